// demos/ledger_walk.cpp
// Build the symplectic-homology generator ledger on one energy surface and
// compare the multiplicity in each degree with the reference ranks.
#include <cstdio>

#include "rkp/rkp.hpp"

int main() {
    using namespace rkp;
    const double c = -2.1;
    const long long cap = 12;

    const LedgerReport rep = compare_with_reference(c, cap);
    std::printf("c = %.3f, degree cap %lld, n* = %d, trusted through degree %lld\n\n", c, cap,
                rep.n_star, static_cast<long long>(rep.trusted_cap));
    std::printf("  %6s %12s %9s %-10s generators\n", "degree", "multiplicity", "reference",
                "status");
    for (const DegreeLine& line : rep.lines) {
        std::printf("  %6lld %12d %9d %-10s ", static_cast<long long>(line.degree),
                    line.multiplicity, line.reference, line.status.c_str());
        for (std::size_t i = 0; i < line.generators.size(); ++i)
            std::printf("%s%s", i ? ", " : "", line.generators[i].c_str());
        std::printf("\n");
    }
    std::printf("\n%s\n", rep.all_match ? "every trusted degree matches the reference"
                                        : "mismatch in a trusted degree");

    std::printf("\nbirth and death of the first three admissible families:\n");
    for (int k : {2, 3, 4}) {
        const BifurcationInvariance inv = bifurcation_invariance(k, 1);
        std::printf("  family (%d,1): c- = %.6f, degrees %lld -> %lld across the birth, "
                    "family occupies {%lld, %lld}\n",
                    k, inv.c_minus, static_cast<long long>(inv.degree_before),
                    static_cast<long long>(inv.degree_after),
                    static_cast<long long>(inv.family_sh),
                    static_cast<long long>(inv.family_top));
    }
    return rep.all_match ? 0 : 1;
}
