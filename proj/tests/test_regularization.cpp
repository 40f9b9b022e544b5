#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "rkp/core_dynamics.hpp"
#include "rkp/detail/rng.hpp"
#include "rkp/regularization.hpp"

using namespace rkp;

TEST_CASE("stereographic lift and projection are mutually inverse", "[regularization]") {
    detail::Rng rng(31);
    for (int i = 0; i < 100; ++i) {
        const double r = rng.uniform(0.5, 2.0);
        const Vec3 p = rng.uniform(0.0, 2.0) * rng.unit_vector3();
        const Vec3 q = rng.uniform(0.05, 2.5) * rng.unit_vector3();
        const SphereCotangent sc = stereo_lift(r, p, q);
        CHECK(sc.max_defect() < 1e-12);
        const auto [a, b] = stereo_project(sc);
        CHECK((a - p).norm() < 1e-12);
        CHECK((b - q).norm() < 1e-12);
    }
}

TEST_CASE("lift lands on the sphere with the stated identities", "[regularization]") {
    const double r = 1.3;
    const Vec3 p(0.4, -0.8, 0.3);
    const Vec3 q(1.1, 0.2, -0.6);
    const SphereCotangent sc = stereo_lift(r, p, q);
    const double p2 = p.squaredNorm(), r2 = r * r, r3 = r2 * r;

    CHECK(std::abs((r - sc.x(0)) - 2.0 * r3 / (p2 + r2)) < 1e-12);
    CHECK(std::abs(p2 - (2.0 * r3 / (r - sc.x(0)) - r2)) < 1e-12);
    CHECK(std::abs(sc.y.squaredNorm() -
                   (p2 + r2) * (p2 + r2) / (4.0 * r2 * r2) * q.squaredNorm()) < 1e-12);
    CHECK(std::abs(q.norm() - (r - sc.x(0)) / r * sc.y.norm()) < 1e-12);
}

TEST_CASE("projection rejects the pole", "[regularization]") {
    SphereCotangent sc;
    sc.radius = 1.0;
    sc.x = Eigen::Vector4d(1.0, 0.0, 0.0, 0.0);
    sc.y = Eigen::Vector4d(0.0, 0.2, 0.0, 0.0);
    CHECK_THROWS_AS(stereo_project(sc), NorthPoleError);
}

TEST_CASE("moser map conjugates between flat states and the sphere chart", "[regularization]") {
    detail::Rng rng(37);
    for (int i = 0; i < 50; ++i) {
        const double r = rng.uniform(0.7, 1.6);
        PhasePoint s;
        s.q = rng.uniform(0.2, 2.0) * rng.unit_vector3();
        s.p = rng.uniform(0.1, 1.5) * rng.unit_vector3();
        const SphereCotangent sc = moser_lift(r, s);
        CHECK(sc.max_defect() < 1e-10);
        CHECK(std::abs(sc.radius - 1.0) < 1e-14);
        const PhasePoint back = moser_drop(r, sc);
        CHECK((back.q - s.q).norm() < 1e-12);
        CHECK((back.p - s.p).norm() < 1e-12);
    }
}

TEST_CASE("collision orbit satisfies the regularized equations of motion", "[regularization]") {
    const double r = 1.3;
    for (int sign : {+1, -1}) {
        for (int i = 0; i <= 24; ++i) {
            const double t = 2.0 * M_PI / r * static_cast<double>(i) / 24.0;
            const CollisionSample cs = collision_orbit(r, sign, t);
            CHECK(cs.sc.max_defect() < 1e-14);

            const double ct = std::cos(r * t), st = std::sin(r * t);
            const double sg = static_cast<double>(sign);
            const Vec8 field = vector_field(HamiltonianId::MoserKr, cs.sc.to_vec8(), r);
            Vec8 rhs = Vec8::Zero();
            rhs(0) = r * st;
            rhs(3) = sg * r * ct;
            rhs(4) = ct;
            rhs(7) = -sg * st;
            CHECK((field - rhs).cwiseAbs().maxCoeff() < 1e-12);
        }
    }
}

TEST_CASE("regularized flow reproduces the closed-form collision orbit", "[regularization]") {
    const double r = std::sqrt(2.0 * 2.1);  // the c = -2.1 collision level
    const double period = 2.0 * M_PI / r;
    for (int sign : {+1, -1}) {
        const Vec8 start = collision_orbit(r, sign, 0.0).sc.to_vec8();
        for (int i = 1; i <= 8; ++i) {
            const double t = period * static_cast<double>(i) / 8.0;
            const Vec8 z = flow(HamiltonianId::MoserKr, start, r, t);
            const CollisionSample ref = collision_orbit(r, sign, t);
            CHECK((z - ref.sc.to_vec8()).cwiseAbs().maxCoeff() < 1e-9);

            // Flat-chart height away from the cusp, q3(t) = (1/r^2)(1 + cos rt).
            if (std::abs(1.0 + std::cos(r * t)) > 0.1) {
                const PhasePoint s = moser_drop(r, SphereCotangent::from_vec8(z, 1.0));
                CHECK(std::abs(s.q.x()) < 1e-9);
                CHECK(std::abs(s.q.y()) < 1e-9);
                CHECK(std::abs(std::abs(s.q.z()) -
                               (1.0 + std::cos(r * t)) / (r * r)) < 1e-9);
                CHECK((s.q - ref.q_flat).norm() < 1e-9);
            }
        }
        // The orbit is periodic in the regularized time.
        const Vec8 closed = flow(HamiltonianId::MoserKr, start, r, period);
        CHECK((closed - start).cwiseAbs().maxCoeff() < 1e-9);
    }
}

TEST_CASE("collision branches sit on opposite vertical axes", "[regularization]") {
    const double r = 1.1;
    // Branch -1 runs along the positive q3-axis, branch +1 along the negative.
    const CollisionSample plus_axis = collision_orbit(r, -1, 0.4);
    const CollisionSample minus_axis = collision_orbit(r, +1, 0.4);
    CHECK(plus_axis.q_flat.z() > 0.0);
    CHECK(minus_axis.q_flat.z() < 0.0);
    CHECK((plus_axis.q_flat + minus_axis.q_flat).norm() < 1e-14);
}

TEST_CASE("hill region classification around the critical energy", "[regularization]") {
    // At the ray maximum U = -3/2; just below that Jacobi energy the unit
    // circle is forbidden, just above everything on the ray is admissible.
    const Vec3 planar(1.0, 0.0, 0.0);
    CHECK(hill_classify(-1.5 - 1e-3, planar).tag == HillTag::Forbidden);
    CHECK(hill_classify(-1.5 + 1e-3, planar).tag == HillTag::SingleComponent);

    // Well below the critical energy the gap splits bounded from unbounded.
    const HillClassification near_in = hill_classify(-2.1, 0.2 * planar);
    const HillClassification far_out = hill_classify(-2.1, 5.0 * planar);
    CHECK(near_in.tag == HillTag::BoundedComponent);
    CHECK(far_out.tag == HillTag::UnboundedComponent);
    CHECK(near_in.has_gap);
    CHECK(near_in.inner_root < near_in.outer_root);

    // Vertical rays have no outer component.
    const HillClassification vertical = hill_classify(-2.1, Vec3(0.0, 0.0, 0.3));
    CHECK(vertical.tag == HillTag::BoundedComponent);
    CHECK(std::isinf(vertical.outer_root));

    CHECK_THROWS_AS(hill_classify(-2.1, Vec3::Zero()), OriginError);
}

TEST_CASE("scaling and switch maps preserve the chart", "[regularization]") {
    detail::Rng rng(41);
    for (int i = 0; i < 20; ++i) {
        const double r = rng.uniform(0.6, 1.7);
        PhasePoint s;
        s.q = rng.uniform(0.3, 1.8) * rng.unit_vector3();
        s.p = rng.uniform(0.2, 1.4) * rng.unit_vector3();
        const SphereCotangent unit = moser_lift(r, s);
        const SphereCotangent scaled = scaling_map(r, unit);
        CHECK(std::abs(scaled.radius - r) < 1e-14);
        CHECK(scaled.max_defect() < 1e-10);
        const SphereCotangent back = unscale_map(scaled);
        CHECK((back.to_vec8() - unit.to_vec8()).cwiseAbs().maxCoeff() < 1e-12);
    }
}
