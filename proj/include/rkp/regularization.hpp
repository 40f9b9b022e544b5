// rkp/regularization.hpp
// Moser regularization: stereographic charts between T*S^3 and flat phase
// space, switch/scaling maps, closed-form collision orbits, Hill's region.
#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <limits>
#include <optional>

#include "rkp/core_dynamics.hpp"
#include "rkp/errors.hpp"

namespace rkp {

using Vec4 = Eigen::Vector4d;

/// Point of the cotangent bundle of the radius-r sphere inside T*R^4.
/// Note the chart convention: the displayed stereographic formulas put the
/// base point at |x| = r (not |x| = 1); the unit chart is reached through
/// scaling_map. Components are (x0, xvec), (y0, yvec).
struct SphereCotangent {
    Vec4 x = Vec4::Zero();
    Vec4 y = Vec4::Zero();
    double radius = 1.0;

    Vec8 to_vec8() const {
        Vec8 v;
        v << x, y;
        return v;
    }
    static SphereCotangent from_vec8(const Vec8& v, double radius) {
        SphereCotangent sc;
        sc.x = v.head<4>();
        sc.y = v.tail<4>();
        sc.radius = radius;
        return sc;
    }

    /// Largest violation of the two chart invariants |x| = r and x.y = 0.
    double max_defect() const {
        return std::max(std::abs(x.norm() - radius), std::abs(x.dot(y)));
    }
};

// --------------------------------------------------------------------------
// Stereographic charts (projection pole at (r, 0, 0, 0))

/// Phi_r: T*S^3_r minus the pole fiber -> T*R^3. Returns (a, b); under the
/// Moser identification a plays the role of the flat momentum p and b of the
/// flat position q, i.e. stereo_lift(r, a, b) restores (x, y).
inline std::pair<Vec3, Vec3> stereo_project(const SphereCotangent& sc) {
    const double r = sc.radius;
    const double denom = r - sc.x(0);
    if (std::abs(denom) < 1e-14 * r)
        throw NorthPoleError("stereo_project: x0 = r (projection pole)");
    const Vec3 xv = sc.x.tail<3>();
    const Vec3 yv = sc.y.tail<3>();
    const Vec3 a = r * xv / denom;
    const Vec3 b = (denom / r) * yv + (sc.y(0) / r) * xv;
    return {a, b};
}

/// Psi_r: T*R^3 -> T*S^3_r, the inverse chart. Arguments follow the momentum
/// -first convention of the displayed formula: stereo_lift(r, p, q).
inline SphereCotangent stereo_lift(double r, const Vec3& p, const Vec3& q) {
    const double p2 = p.squaredNorm();
    const double r2 = r * r;
    const double denom = p2 + r2;
    SphereCotangent sc;
    sc.radius = r;
    sc.x(0) = r * (p2 - r2) / denom;
    sc.x.tail<3>() = 2.0 * r2 * p / denom;
    sc.y(0) = p.dot(q) / r;
    sc.y.tail<3>() = (denom / (2.0 * r2)) * q - (p.dot(q) / r2) * p;
    return sc;
}

/// sigma(q, p) = (p, -q); an exact symplectomorphism squaring to -identity.
inline PhasePoint switch_map(const PhasePoint& s) {
    PhasePoint out;
    out.q = s.p;
    out.p = -s.q;
    return out;
}

/// sc_{1,r}(x, y) = (r x, y/r): carries the unit-sphere chart to radius r.
inline SphereCotangent scaling_map(double r, const SphereCotangent& sc_unit) {
    SphereCotangent out;
    out.x = r * sc_unit.x;
    out.y = sc_unit.y / r;
    out.radius = r * sc_unit.radius;
    return out;
}

/// Inverse scaling: radius-r chart back to the unit chart.
inline SphereCotangent unscale_map(const SphereCotangent& sc_r) {
    SphereCotangent out;
    const double r = sc_r.radius;
    out.x = sc_r.x / r;
    out.y = r * sc_r.y;
    out.radius = 1.0;
    return out;
}

/// Full regularizing chart: flat (q, p) -> unit-sphere cotangent point, via
/// the switch map followed by Psi_r and unscaling. r = sqrt(-2E) of the
/// energy surface being regularized.
inline SphereCotangent moser_lift(double r, const PhasePoint& s) {
    const PhasePoint sw = switch_map(s);  // (p, -q)
    return unscale_map(stereo_lift(r, sw.q, sw.p));
}

/// Inverse of moser_lift: unit-sphere point -> flat (q, p).
inline PhasePoint moser_drop(double r, const SphereCotangent& sc_unit) {
    const auto [a, b] = stereo_project(scaling_map(r, sc_unit));
    PhasePoint s;
    s.p = a;
    s.q = -b;
    return s;
}

// --------------------------------------------------------------------------
// Collision orbits

/// One sample of the closed-form vertical collision orbit in both charts.
/// The flat momentum is undefined at the cusp (rt = pi mod 2pi).
struct CollisionSample {
    SphereCotangent sc;  // unit-sphere chart
    Vec3 q_flat = Vec3::Zero();
    std::optional<Vec3> p_flat;
};

/// Closed-form collision orbit of K_r on the unit-sphere chart:
///   (x(t); y(t)) = (-cos rt, 0, 0, s sin rt; sin(rt)/r, 0, 0, s cos(rt)/r)
/// where s is the branch sign. Branch '-' is the positive-axis orbit: its
/// flat image is q(t) = (0, 0, (1/r^2)(1 + cos rt)); branch '+' mirrors it
/// through the plane. (The physical gamma_{c+} orbit, labelled by positive
/// axis height, is therefore branch '-'.)
inline CollisionSample collision_orbit(double r, int sign, double t) {
    if (sign != 1 && sign != -1) throw InvalidOrbitError("collision_orbit: sign must be +1 or -1");
    const double s = static_cast<double>(sign);
    CollisionSample out;
    out.sc.radius = 1.0;
    const double c = std::cos(r * t), sn = std::sin(r * t);
    out.sc.x = Vec4(-c, 0.0, 0.0, s * sn);
    out.sc.y = Vec4(sn / r, 0.0, 0.0, s * c / r);
    out.q_flat = Vec3(0.0, 0.0, -s * (1.0 + c) / (r * r));
    const double denom = 1.0 + c;
    if (std::abs(denom) > 1e-9) {
        out.p_flat = Vec3(0.0, 0.0, s * r * sn / denom);
    }
    return out;
}

// --------------------------------------------------------------------------
// Hill's region

/// Rotating-frame effective potential U(q) = -1/|q| - (q1^2 + q2^2)/2.
inline double effective_potential(const Vec3& q) {
    const double rq = q.norm();
    if (rq == 0.0) throw OriginError("effective_potential: |q| = 0");
    return -1.0 / rq - 0.5 * (q(0) * q(0) + q(1) * q(1));
}

enum class HillTag { BoundedComponent, UnboundedComponent, Forbidden, SingleComponent };

/// Per-ray classification of a point against the Hill region of energy c.
/// inner_root/outer_root bound the forbidden gap along the ray through q
/// (outer_root is +inf on vertical rays, where the admissible set ends at
/// inner_root for good).
struct HillClassification {
    HillTag tag = HillTag::Forbidden;
    double inner_root = std::numeric_limits<double>::quiet_NaN();
    double outer_root = std::numeric_limits<double>::quiet_NaN();
    bool has_gap = false;
};

inline const char* hill_tag_name(HillTag t) {
    switch (t) {
        case HillTag::BoundedComponent: return "bounded-component";
        case HillTag::UnboundedComponent: return "unbounded-component";
        case HillTag::Forbidden: return "forbidden";
        case HillTag::SingleComponent: return "single-component";
    }
    return "?";
}

namespace detail {

/// Bisection root of U(s) = c on [lo, hi] along a ray with planar fraction
/// alpha; U(s) = -1/s - alpha s^2 / 2. Assumes a sign change on the bracket.
inline double hill_ray_root(double alpha, double c, double lo, double hi) {
    auto f = [&](double s) { return -1.0 / s - 0.5 * alpha * s * s - c; };
    double flo = f(lo);
    for (int it = 0; it < 200 && (hi - lo) > 1e-10 * std::max(1.0, hi); ++it) {
        const double mid = 0.5 * (lo + hi);
        if ((f(mid) <= 0.0) == (flo <= 0.0))
            lo = mid, flo = f(mid);
        else
            hi = mid;
    }
    return 0.5 * (lo + hi);
}

}  // namespace detail

inline HillClassification hill_classify(double c, const Vec3& q) {
    const double rq = q.norm();
    if (rq == 0.0) throw OriginError("hill_classify: |q| = 0");
    const double U = effective_potential(q);
    const double alpha = (q(0) * q(0) + q(1) * q(1)) / (rq * rq);
    HillClassification out;

    if (alpha < 1e-14) {
        // Vertical ray: U = -1/s is increasing; admissible only inside -1/c.
        if (c < 0.0) {
            out.inner_root = -1.0 / c;
            out.outer_root = std::numeric_limits<double>::infinity();
            out.has_gap = true;
        }
    } else {
        // U rises from -inf to its ray maximum -(3/2) alpha^(1/3) then falls.
        const double s_star = std::pow(alpha, -1.0 / 3.0);
        const double u_max = -1.5 * std::cbrt(alpha);
        if (u_max > c) {
            out.has_gap = true;
            out.inner_root = detail::hill_ray_root(alpha, c, 1e-12, s_star);
            double hi = 2.0 * s_star;
            while (-1.0 / hi - 0.5 * alpha * hi * hi > c) hi *= 2.0;
            out.outer_root = detail::hill_ray_root(alpha, c, s_star, hi);
        }
    }

    if (U > c) {
        out.tag = HillTag::Forbidden;
    } else if (c > -1.5) {
        // Admissible set is connected above the critical energy.
        out.tag = HillTag::SingleComponent;
    } else if (out.has_gap && rq > out.inner_root) {
        out.tag = HillTag::UnboundedComponent;
    } else {
        out.tag = HillTag::BoundedComponent;
    }
    return out;
}

}  // namespace rkp
