// demos/orbit_tour.cpp
// Walk through the periodic orbits on one energy surface: solve the circular
// cubic, list the low covers with their indices, and re-derive two of the
// indices from the variational flow.
#include <cstdio>

#include "rkp/rkp.hpp"

int main() {
    using namespace rkp;
    const double c = -2.1;

    std::printf("energy surface c = %.3f\n\n", c);

    const CircularRoots roots = circular_energies(c);
    std::printf("circular orbits (roots of 2E(c - E)^2 + 1 = 0):\n");
    for (std::size_t i = 0; i < roots.roots.size(); ++i)
        std::printf("  %-13s E = %+.12f\n", orbit_kind_name(roots.labels[i]), roots.roots[i]);
    std::printf("\n");

    std::printf("catalog up to cover 3, families up to k = 11:\n");
    std::printf("  %-16s %2s %18s %18s %8s\n", "orbit", "N", "E", "period", "index");
    for (const OrbitRecord& rec : catalog(c, 3, 11)) {
        const HalfInteger mu = closed_form_index(rec);
        std::printf("  %-16s %2d %18.12f %18.12f %8s\n", rec.label().c_str(), rec.N, rec.E,
                    rec.N * rec.period, mu.str().c_str());
    }
    std::printf("\n");

    std::printf("numeric cross-check of two covers:\n");
    for (const char* name : {"retrograde", "direct"}) {
        OrbitRecord rec;
        rec.kind = name[0] == 'r' ? OrbitKind::Retrograde : OrbitKind::Direct;
        rec.c = c;
        rec.E = name[0] == 'r' ? roots.retrograde() : roots.direct();
        rec.period = circular_period(rec.E, name[0] == 'r' ? +1 : -1);
        rec.N = 2;
        const HalfInteger closed = closed_form_index(rec);
        const NumericCzResult res = numeric_cz(rec);
        std::printf("  %s^2: closed form %s, variational flow %s, crossings:\n", name,
                    closed.str().c_str(), res.index.str().c_str());
        for (const Crossing& cr : res.parts[0].crossings)
            std::printf("    t = %10.6f  signature %+d  kernel dim %d\n", cr.t, cr.signature,
                        static_cast<int>(cr.kernel.cols()));
    }
    return 0;
}
