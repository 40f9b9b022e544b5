#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <numeric>

#include "oracles.hpp"
#include "rkp/action_angle.hpp"
#include "rkp/detail/rng.hpp"

using namespace rkp;

namespace {

Eigen::Matrix<double, 6, 1> pack(const SphericalPoint& sp) {
    Eigen::Matrix<double, 6, 1> v;
    v << sp.r, sp.psi, sp.phi, sp.p_r, sp.p_psi, sp.p_phi;
    return v;
}

SphericalPoint unpack(const Eigen::Matrix<double, 6, 1>& v) {
    SphericalPoint sp;
    sp.r = v(0);
    sp.psi = v(1);
    sp.phi = v(2);
    sp.p_r = v(3);
    sp.p_psi = v(4);
    sp.p_phi = v(5);
    return sp;
}

/// Random bound, non-planar, non-vertical state in the spherical chart.
SphericalPoint random_chart_state(detail::Rng& rng) {
    for (;;) {
        SphericalPoint sp;
        sp.r = rng.uniform(0.5, 1.8);
        sp.psi = rng.uniform(0.5, M_PI - 0.5);
        sp.phi = rng.uniform(0.0, 2.0 * M_PI);
        sp.p_r = rng.uniform(-0.6, 0.6);
        sp.p_psi = rng.uniform(-0.5, 0.5);
        sp.p_phi = rng.uniform(0.15, 0.7) * (rng.uniform01() < 0.5 ? -1.0 : 1.0);
        if (detail::delaunay_radicand(sp) > 0.05) return sp;
    }
}

}  // namespace

TEST_CASE("spherical chart round trips", "[action_angle]") {
    detail::Rng rng(71);
    for (int i = 0; i < 100; ++i) {
        PhasePoint s;
        s.q = rng.uniform(0.3, 2.0) * rng.unit_vector3();
        s.p = rng.uniform(0.1, 1.4) * rng.unit_vector3();
        if (std::hypot(s.q.x(), s.q.y()) < 1e-3) continue;
        const SphericalPoint sp = to_spherical(s);
        const PhasePoint back = from_spherical(sp);
        CHECK((back.q - s.q).norm() < 1e-12);
        CHECK((back.p - s.p).norm() < 1e-12);
    }
    PhasePoint axis;
    axis.q = Vec3(0.0, 0.0, 1.0);
    axis.p = Vec3(0.1, 0.2, 0.3);
    CHECK_THROWS_AS(to_spherical(axis), AxisChartError);
}

TEST_CASE("delaunay actions recover the invariants", "[action_angle]") {
    detail::Rng rng(73);
    for (int i = 0; i < 100; ++i) {
        const SphericalPoint sp = random_chart_state(rng);
        const PhasePoint s = from_spherical(sp);
        const InvariantTriple iv = invariants(s);
        if (iv.E >= -0.01) continue;
        const DelaunayActions a = delaunay_actions(sp);
        CHECK(a.p_l == Catch::Approx(1.0 / std::sqrt(-2.0 * iv.E)).margin(1e-10));
        CHECK(a.p_g == Catch::Approx(iv.L.norm()).margin(1e-10));
        CHECK(a.p_theta == Catch::Approx(iv.L.z()).margin(1e-10));
    }
    SphericalPoint unbound;
    unbound.r = 5.0;
    unbound.p_r = 2.0;
    unbound.p_phi = 0.3;
    CHECK_THROWS_AS(delaunay_actions(unbound), UnboundStateError);
}

TEST_CASE("lrl action is the third laplace-runge-lenz component", "[action_angle]") {
    detail::Rng rng(79);
    for (int i = 0; i < 100; ++i) {
        const SphericalPoint sp = random_chart_state(rng);
        const PhasePoint s = from_spherical(sp);
        CHECK(lrl_action(sp) == Catch::Approx(invariants(s).A.z()).margin(1e-10));
    }
}

TEST_CASE("delaunay jacobian matches finite differences", "[action_angle]") {
    detail::Rng rng(83);
    for (int i = 0; i < 25; ++i) {
        const SphericalPoint sp = random_chart_state(rng);
        const JacobianReport rep = delaunay_jacobian(sp);

        const auto fd_col = [&](int which) {
            return oracles::fd_gradient6(
                [which](const Eigen::Matrix<double, 6, 1>& v) {
                    const DelaunayActions a = delaunay_actions(unpack(v));
                    return which == 0 ? a.p_l : which == 1 ? a.p_g : a.p_theta;
                },
                pack(sp), 1e-6);
        };
        for (int c = 0; c < 3; ++c) {
            const Eigen::Matrix<double, 6, 1> ref = fd_col(c);
            for (int r = 0; r < 6; ++r)
                CHECK(rep.matrix(r, c) == Catch::Approx(ref(r)).margin(1e-6));
        }
    }
}

TEST_CASE("lrl jacobian matches finite differences", "[action_angle]") {
    detail::Rng rng(89);
    for (int i = 0; i < 25; ++i) {
        const SphericalPoint sp = random_chart_state(rng);
        const LrlJacobian rep = lrl_jacobian(sp);
        const auto fd_col = [&](int which) {
            return oracles::fd_gradient6(
                [which](const Eigen::Matrix<double, 6, 1>& v) {
                    const SphericalPoint z = unpack(v);
                    if (which == 0) return delaunay_actions(z).p_l;
                    if (which == 1) return lrl_action(z);
                    return z.p_phi;
                },
                pack(sp), 1e-6);
        };
        for (int c = 0; c < 3; ++c) {
            const Eigen::Matrix<double, 6, 1> ref = fd_col(c);
            for (int r = 0; r < 6; ++r)
                CHECK(rep.matrix(r, c) == Catch::Approx(ref(r)).margin(1e-6));
        }
    }
}

TEST_CASE("delaunay rank is three away from the planar locus", "[action_angle]") {
    detail::Rng rng(97);
    int case1 = 0, case2 = 0;
    for (int i = 0; i < 200; ++i) {
        SphericalPoint sp = random_chart_state(rng);
        if (std::abs(std::cos(sp.psi)) < 1e-3) continue;  // keep clearly non-planar
        const JacobianReport rep = delaunay_jacobian(sp);
        CHECK(rep.rank == 3);
        CHECK((rep.tag == RankCase::NonCircularNonPlanar ||
               rep.tag == RankCase::CircularNonPlanar));
        if (rep.tag == RankCase::NonCircularNonPlanar) ++case1;
        if (rep.tag == RankCase::CircularNonPlanar) ++case2;
        // The substitute pivot 1/r - 2E never vanishes on bound states.
        const double Q = detail::delaunay_radicand(sp);  // -2E
        CHECK(1.0 / sp.r + Q > 1e-6);
    }
    CHECK(case1 > 0);

    // Apsis states (p_r = 0) classify as case2; the r-row pivot
    // -(p_l^3/r)(1/r + 2E) substitutes for the p_r-row and keeps rank 3 as
    // long as the orbit is not genuinely circular.
    SphericalPoint apsis;
    apsis.psi = 1.1;
    apsis.p_psi = 0.4;
    apsis.p_phi = 0.5;
    const double g2 = apsis.p_psi * apsis.p_psi +
                      apsis.p_phi * apsis.p_phi / std::pow(std::sin(apsis.psi), 2);
    apsis.r = 0.5 * (1.0 + g2);  // then -2E = 1/r^2, E < -1/2, pivot nonzero
    apsis.p_r = 0.0;
    const JacobianReport rep2 = delaunay_jacobian(apsis);
    CHECK(rep2.tag == RankCase::CircularNonPlanar);
    CHECK(rep2.rank == 3);

    // On a genuinely circular orbit (r = p_g^2 on top of p_r = 0) the pivot
    // 1/r + 2E vanishes, the p_l and p_g gradients align, and the rank
    // honestly drops to 2. Random states never land on this stratum.
    SphericalPoint circ = apsis;
    circ.r = g2;
    const JacobianReport rep3 = delaunay_jacobian(circ);
    CHECK(rep3.tag == RankCase::CircularNonPlanar);
    CHECK(rep3.rank == 2);
}

TEST_CASE("planar states drop delaunay rank and lrl restores it", "[action_angle]") {
    SphericalPoint planar;
    planar.r = 1.4;
    planar.psi = M_PI / 2.0;
    planar.p_r = 0.35;   // non-circular
    planar.p_psi = 0.0;
    planar.p_phi = 0.6;

    const JacobianReport dj = delaunay_jacobian(planar);
    CHECK(dj.tag == RankCase::Planar);
    CHECK(dj.rank == 2);  // p_g and p_theta columns collapse

    const LrlJacobian lj = lrl_jacobian(planar);
    CHECK(lj.rank == 3);

    // Planar circular states are genuinely rank-deficient for both systems.
    SphericalPoint circ = planar;
    circ.p_r = 0.0;
    circ.r = circ.p_phi * circ.p_phi;
    CHECK(lrl_jacobian(circ).rank < 3);
}

TEST_CASE("vertical orbits are rejected", "[action_angle]") {
    SphericalPoint vertical;
    vertical.psi = 0.8;
    vertical.p_psi = 0.9;
    vertical.p_phi = 0.0;
    CHECK_THROWS_AS(delaunay_jacobian(vertical), VerticalOrbitError);
}

TEST_CASE("return map shear and displacement", "[action_angle]") {
    // Psi differs from the identity only in the (l, p_l) shear entry.
    const Eigen::Matrix<double, 6, 6> Psi = delaunay_return_map(5, 2);
    const double p_l = std::cbrt(2.0 / 5.0);
    CHECK(Psi(0, 1) == Catch::Approx(-6.0 * M_PI * 5.0 / p_l).margin(1e-12));
    Eigen::Matrix<double, 6, 6> diff = Psi - Eigen::Matrix<double, 6, 6>::Identity();
    diff(0, 1) = 0.0;
    CHECK(diff.cwiseAbs().maxCoeff() == 0.0);

    // Displacement 6 pi k p_l^2 for every coprime pair up to 50.
    for (int k = 2; k <= 50; ++k)
        for (int l = 1; l < k; ++l) {
            if (std::gcd(k, l) != 1) continue;
            const MorseBottResult mb = morse_bott_test(k, l);
            CHECK(mb.nondegenerate);
            const double ref = 6.0 * M_PI * k * mb.p_l * mb.p_l;
            CHECK(mb.displacement == Catch::Approx(ref).epsilon(1e-13));
        }

    // The (8,1) family: p_l = 1/2 is exact in binary, so the displacement
    // 12 pi is reproduced bit for bit, and the shear entry is -96 pi.
    const MorseBottResult mb81 = morse_bott_test(8, 1);
    CHECK(mb81.displacement == 12.0 * M_PI);
    CHECK(delaunay_return_map(8, 1)(0, 1) == Catch::Approx(-96.0 * M_PI).margin(1e-12));

    // (1,1) reduces any (m,m) input and displaces by 6 pi.
    const MorseBottResult mb11 = morse_bott_test(3, 3);
    CHECK(mb11.p_l == 1.0);
    CHECK(mb11.displacement == Catch::Approx(6.0 * M_PI).margin(1e-12));
}
