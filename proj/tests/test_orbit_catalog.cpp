#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <set>

#include "oracles.hpp"
#include "rkp/orbit_catalog.hpp"

using namespace rkp;

TEST_CASE("circular energies match the bisection oracle", "[catalog]") {
    for (double c : {-2.1, -1.8, -2.7, -4.0}) {
        const CircularRoots lib = circular_energies(c);
        const std::vector<double> ref =
            oracles::scan_roots(oracles::circular_cubic(c), -12.0, -1e-3, 120000);
        REQUIRE(lib.roots.size() == 3);
        REQUIRE(ref.size() == 3);
        for (int i = 0; i < 3; ++i) CHECK(std::abs(lib.roots[i] - ref[i]) < 1e-10);
    }
}

TEST_CASE("circular roots satisfy the defining identity", "[catalog]") {
    const double c = -2.1;
    const CircularRoots roots = circular_energies(c);
    const double Ep = roots.retrograde();
    const double Em = roots.direct();
    const double Eo = roots.outer();
    // c = E + 1/sqrt(-2E) on the retrograde branch, c = E - 1/sqrt(-2E) on
    // the other two.
    CHECK(std::abs(c - (Ep + 1.0 / std::sqrt(-2.0 * Ep))) < 1e-10);
    CHECK(std::abs(c - (Em - 1.0 / std::sqrt(-2.0 * Em))) < 1e-10);
    CHECK(std::abs(c - (Eo - 1.0 / std::sqrt(-2.0 * Eo))) < 1e-10);
    CHECK(Ep < Em);
    CHECK(Em < Eo);
    CHECK(Em < -0.5);   // direct root below the critical energy
    CHECK(Eo > -0.5);   // outer root above it
}

TEST_CASE("root structure degenerates exactly at the critical energy", "[catalog]") {
    const CircularRoots at = circular_energies(-1.5);
    CHECK(at.critical_double);
    const CircularRoots above = circular_energies(-1.2);
    CHECK(above.roots.size() == 1);
    CHECK(above.labels.front() == OrbitKind::Retrograde);
}

TEST_CASE("circular periods match detected return times", "[catalog]") {
    const double c = -2.1;
    const CircularRoots roots = circular_energies(c);
    struct Row {
        double E;
        int sign;
    };
    for (const Row row : {Row{roots.retrograde(), +1}, Row{roots.direct(), -1}}) {
        const double predicted = circular_period(row.E, row.sign);
        const CircularState st = circular_orbit_state(row.E, row.sign, 0.0);
        const double detected = detect_first_return(HamiltonianId::RotatingH, st.cartesian);
        CHECK(detected == Catch::Approx(predicted).epsilon(1e-6));
    }
}

TEST_CASE("circular state parametrization flows along itself", "[catalog]") {
    const double c = -2.1;
    const double E = circular_energies(c).direct();
    const CircularState s0 = circular_orbit_state(E, -1, 0.0);
    const double t = 0.7;
    const PhasePoint flowed = flow(HamiltonianId::RotatingH, s0.cartesian, t);
    const CircularState st = circular_orbit_state(E, -1, t);
    CHECK((flowed.q - st.cartesian.q).norm() < 1e-9);
    CHECK((flowed.p - st.cartesian.p).norm() < 1e-9);
    // And its Jacobi energy is c.
    CHECK(hamiltonian_value(HamiltonianId::RotatingH, s0.cartesian) ==
          Catch::Approx(c).margin(1e-12));
}

TEST_CASE("resonance energies and bifurcation window", "[catalog]") {
    // E_{k,l} = -(1/2)(k/l)^(2/3); the family lives between c^- and c^+.
    CHECK(resonance_energy(1, 1) == Catch::Approx(-0.5).margin(1e-15));
    CHECK(resonance_energy(8, 1) == Catch::Approx(-2.0).margin(1e-12));
    const auto [cm, cp] = bifurcation_energies(8, 1);
    CHECK(cm == Catch::Approx(-2.5).margin(1e-12));
    CHECK(cp == Catch::Approx(-1.5).margin(1e-12));
    CHECK(cm < cp);

    // (k,l) and (2k,2l) name the same family.
    const auto [cm2, cp2] = bifurcation_energies(16, 2);
    CHECK(cm2 == Catch::Approx(cm).margin(1e-15));
    CHECK(cp2 == Catch::Approx(cp).margin(1e-15));
}

TEST_CASE("family enumeration matches the ratio-interval oracle", "[catalog]") {
    const double c = -2.1;
    const int k_max = 11;
    const std::vector<FamilyId> fams = enumerate_families(c, k_max);

    // Oracle: k/l must lie strictly between (-2E)^(3/2) at the direct and
    // retrograde roots, computed from bisection roots.
    const std::vector<double> ref =
        oracles::scan_roots(oracles::circular_cubic(c), -12.0, -1e-3, 120000);
    const double r_lo = std::pow(-2.0 * ref[1], 1.5);  // direct root
    const double r_hi = std::pow(-2.0 * ref[0], 1.5);  // retrograde root
    std::set<std::pair<int, int>> expect;
    for (int k = 1; k <= k_max; ++k)
        for (int l = 1; l < k; ++l) {
            if (std::gcd(k, l) != 1) continue;
            const double ratio = static_cast<double>(k) / l;
            if (ratio > r_lo && ratio < r_hi) expect.insert({k, l});
        }

    CHECK(fams.size() == 7);
    CHECK(fams.size() == expect.size());
    for (const FamilyId& f : fams) CHECK(expect.count({f.k, f.l}) == 1);
}

TEST_CASE("genericity guard flags resonant jacobi energies", "[catalog]") {
    CHECK(is_generic(-2.1, 11).generic);
    // c = -2.5 is the birth energy of the (8,1) family.
    const GenericityReport rep = is_generic(-2.5, 11);
    CHECK_FALSE(rep.generic);
    bool found = false;
    for (const auto& off : rep.offenders)
        if (off.k == 8 && off.l == 1) found = true;
    CHECK(found);
}

TEST_CASE("catalog lists covers and families with correct bookkeeping", "[catalog]") {
    const double c = -2.1;
    const std::vector<OrbitRecord> cat = catalog(c, 3, 11);

    int retro = 0, direct = 0, cplus = 0, cminus = 0, fam = 0;
    for (const OrbitRecord& rec : cat) {
        CHECK(rec.c == Catch::Approx(c).margin(1e-12));
        switch (rec.kind) {
            case OrbitKind::Retrograde: ++retro; break;
            case OrbitKind::Direct: ++direct; break;
            case OrbitKind::CollisionPlus: ++cplus; break;
            case OrbitKind::CollisionMinus: ++cminus; break;
            case OrbitKind::Family: ++fam; break;
            default: break;
        }
        if (rec.kind == OrbitKind::Family) {
            REQUIRE(rec.family.has_value());
            // Rotating-frame period of the closed resonant torus orbit.
            CHECK(rec.period == Catch::Approx(2.0 * M_PI * rec.family->l).margin(1e-12));
            CHECK(rec.E == Catch::Approx(resonance_energy(rec.family->k, rec.family->l))
                               .margin(1e-12));
        }
        if (rec.kind == OrbitKind::CollisionPlus || rec.kind == OrbitKind::CollisionMinus) {
            CHECK(rec.E == Catch::Approx(c).margin(1e-15));
            // Simple-orbit period; the cover count N is bookkeeping.
            CHECK(rec.period == Catch::Approx(kepler_period(c)).margin(1e-12));
        }
    }
    CHECK(retro == 3);
    CHECK(direct == 3);
    CHECK(cplus == 3);
    CHECK(cminus == 3);
    CHECK(fam == 7);
}

TEST_CASE("energy guards reject invalid inputs", "[catalog]") {
    CHECK_THROWS_AS(circular_period(0.25, +1), EnergyRangeError);
    CHECK_THROWS_AS(circular_orbit_state(-0.5, 2, 0.0), InvalidOrbitError);
    CHECK_THROWS_AS(kepler_period(0.1), EnergyRangeError);
    // Above the critical energy there is no direct root to query.
    CHECK_THROWS_AS(circular_energies(-1.2).direct(), EnergyRangeError);
}
