#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <vector>

#include "rkp/core_dynamics.hpp"
#include "rkp/detail/rng.hpp"
#include "rkp/moduli_space.hpp"

using namespace rkp;

namespace {

PhasePoint random_bound(detail::Rng& rng) {
    PhasePoint s;
    do {
        s.q = rng.uniform(0.4, 2.2) * rng.unit_vector3();
        s.p = rng.uniform(0.1, 1.3) * rng.unit_vector3();
    } while (invariants(s).E >= -0.15 || invariants(s).L.norm() < 0.25);
    return s;
}

}  // namespace

TEST_CASE("orbit images land on the product of unit spheres", "[moduli]") {
    detail::Rng rng(51);
    for (int i = 0; i < 100; ++i) {
        const PhasePoint s = random_bound(rng);
        const InvariantTriple iv = invariants(s);
        const SpherePair sp = to_sphere_pair(iv.E, iv.L, iv.A);
        CHECK(sp.max_norm_defect() < 1e-12);

        // Round trip back to (L, A).
        const auto [L, A] = from_sphere_pair(iv.E, sp);
        CHECK((L - iv.L).norm() < 1e-12);
        CHECK((A - iv.A).norm() < 1e-12);

        // Heights recover L3 and A3.
        CHECK(l3_value(iv.E, sp) == Catch::Approx(iv.L.z()).margin(1e-12));
        CHECK(a3_value(sp) == Catch::Approx(iv.A.z()).margin(1e-12));
    }
}

TEST_CASE("invariant-violating inputs are rejected", "[moduli]") {
    CHECK_THROWS_AS(to_sphere_pair(0.5, Vec3::UnitZ(), Vec3::Zero()), EnergyRangeError);
    // A not perpendicular to L.
    CHECK_THROWS_AS(to_sphere_pair(-0.5, Vec3::UnitZ(), Vec3(0.0, 0.0, 0.5)),
                    InvariantViolationError);
}

TEST_CASE("named points classify as the four special orbits", "[moduli]") {
    const double E = -2.544;  // retrograde energy near c = -2.1
    const MorseData md = l3_morse_data(E);
    REQUIRE(md.points.size() == 4);

    for (const CriticalPoint& cp : md.points) {
        const LocusTags tags = classify_point(cp.sp);
        if (cp.name == "retrograde") {
            CHECK(tags.circular);
            CHECK(tags.retrograde);
            CHECK(cp.morse_index == 4);
            CHECK(cp.value == Catch::Approx(1.0 / std::sqrt(-2.0 * E)));
        } else if (cp.name == "direct") {
            CHECK(tags.circular);
            CHECK(tags.direct);
            CHECK(cp.morse_index == 0);
            CHECK(cp.value == Catch::Approx(-1.0 / std::sqrt(-2.0 * E)));
        } else if (cp.name == "collision+") {
            CHECK(tags.collision);
            CHECK(tags.collision_plus);
            CHECK(cp.morse_index == 2);
            CHECK(cp.value == 0.0);
        } else if (cp.name == "collision-") {
            CHECK(tags.collision);
            CHECK(tags.collision_minus);
            CHECK(cp.morse_index == 2);
            CHECK(cp.value == 0.0);
        } else {
            FAIL("unexpected critical point name " << cp.name);
        }
        // The projected gradient vanishes identically at the poles.
        CHECK(l3_projected_gradient(E, cp.sp).norm() == 0.0);
    }
}

TEST_CASE("a3 exchanges the morse roles of the named points", "[moduli]") {
    const MorseData md = a3_morse_data(-1.0);
    REQUIRE(md.points.size() == 4);
    for (const CriticalPoint& cp : md.points) {
        CHECK(a3_projected_gradient(cp.sp).norm() == 0.0);
        if (cp.name == "collision+") {
            CHECK(cp.morse_index == 0);
            CHECK(cp.value == -1.0);
        }
        if (cp.name == "collision-") {
            CHECK(cp.morse_index == 4);
            CHECK(cp.value == 1.0);
        }
        if (cp.name == "retrograde" || cp.name == "direct") CHECK(cp.morse_index == 2);
    }
}

TEST_CASE("l3 has exactly four critical points at scan threshold", "[moduli]") {
    const double E = -2.544;
    const MorseData md = l3_morse_data(E);

    // Every sampled point with a tiny projected gradient must lie next to
    // one of the four named points; by linearity of the height the gradient
    // norm grows like the distance from the nearest pole.
    detail::Rng rng(61);
    int hits = 0;
    for (int i = 0; i < 200000; ++i) {
        SpherePair sp;
        sp.x = rng.unit_vector3();
        sp.y = rng.unit_vector3();
        if (l3_projected_gradient(E, sp).norm() >= 1e-6) continue;
        ++hits;
        double nearest = 8.0;
        for (const CriticalPoint& cp : md.points)
            nearest = std::min(nearest, (sp.x - cp.sp.x).norm() + (sp.y - cp.sp.y).norm());
        CHECK(nearest < 1e-3);
    }
    // The named points themselves are exact critical points, and they are
    // pairwise distinct; together with the scan this pins the count at 4.
    for (const CriticalPoint& cp : md.points)
        CHECK(l3_projected_gradient(E, cp.sp).norm() < 1e-6);
    for (std::size_t i = 0; i < md.points.size(); ++i)
        for (std::size_t j = i + 1; j < md.points.size(); ++j)
            CHECK((md.points[i].sp.x - md.points[j].sp.x).norm() +
                      (md.points[i].sp.y - md.points[j].sp.y).norm() >
                  1.0);
    CHECK(hits == 0);  // random samples essentially never land within 5e-7 of a pole
}

TEST_CASE("level sets sample the stated level and reject singular ones", "[moduli]") {
    const double E = -1.7;
    const double level = 0.31;
    const std::vector<SpherePair> pts = level_set_sample(E, level, 64);
    REQUIRE(pts.size() == 64);
    for (const SpherePair& sp : pts) {
        CHECK(sp.max_norm_defect() < 1e-12);
        CHECK(l3_value(E, sp) == Catch::Approx(level).margin(1e-12));
    }
    CHECK_THROWS_AS(level_set_sample(E, 0.0, 8), SingularLevelError);
    CHECK_THROWS_AS(level_set_sample(E, 1.0 / std::sqrt(-2.0 * E), 8), SingularLevelError);
}

TEST_CASE("bifurcation schedule names birth and death covers", "[moduli]") {
    const BifurcationSchedule sched = bifurcation_schedule(8, 1);
    CHECK(sched.c_minus == Catch::Approx(-2.5).margin(1e-12));
    CHECK(sched.c_plus == Catch::Approx(-1.5).margin(1e-12));
    CHECK(sched.birth_cover == 7);
    CHECK(sched.death_cover == 9);
    CHECK_THROWS_AS(bifurcation_schedule(1, 1), DegenerateBirthError);
}
