// rkp/moduli_space.hpp
// The bijection between Kepler orbits of energy E and points of S^2 x S^2:
// forward and inverse maps, locus classification, Morse data of the L3 and
// A3 height functions, level-set sampling, and the bifurcation schedule.
#pragma once

#include <cmath>
#include <string>
#include <utility>
#include <vector>

#include "rkp/core_dynamics.hpp"
#include "rkp/detail/rng.hpp"
#include "rkp/errors.hpp"
#include "rkp/orbit_catalog.hpp"

namespace rkp {

/// Point of S^2 x S^2; the image of an orbit is
/// (sqrt(-2E) L - A, sqrt(-2E) L + A).
struct SpherePair {
    Vec3 x = Vec3::UnitZ();
    Vec3 y = Vec3::UnitZ();

    double max_norm_defect() const {
        return std::max(std::abs(x.norm() - 1.0), std::abs(y.norm() - 1.0));
    }
};

/// Kepler orbits at energy E map onto the product of unit spheres. The two
/// preconditions (A.L = 0 and |A|^2 = 2E|L|^2 + 1) make the images unit
/// vectors; violations beyond tol are rejected.
inline SpherePair to_sphere_pair(double E, const Vec3& L, const Vec3& A, double tol = 1e-7) {
    if (E >= 0.0) throw EnergyRangeError("to_sphere_pair: E must be negative");
    const double perp = std::abs(A.dot(L));
    const double ecc = std::abs(A.squaredNorm() - (2.0 * E * L.squaredNorm() + 1.0));
    if (perp > tol || ecc > tol)
        throw InvariantViolationError("to_sphere_pair: orbit invariants violated (|A.L| = " +
                                      std::to_string(perp) + ", eccentricity defect = " +
                                      std::to_string(ecc) + ")");
    const double s = std::sqrt(-2.0 * E);
    SpherePair sp;
    sp.x = s * L - A;
    sp.y = s * L + A;
    return sp;
}

/// Inverse map: L = (x + y) / (2 sqrt(-2E)), A = -(x - y)/2.
inline std::pair<Vec3, Vec3> from_sphere_pair(double E, const SpherePair& sp) {
    if (E >= 0.0) throw EnergyRangeError("from_sphere_pair: E must be negative");
    const double s = std::sqrt(-2.0 * E);
    return {(sp.x + sp.y) / (2.0 * s), -0.5 * (sp.x - sp.y)};
}

// --------------------------------------------------------------------------
// Locus classification

/// Special loci of the product of spheres. Circular orbits sit on the
/// diagonal, collisions on the anti-diagonal; the four named points are the
/// common poles.
struct LocusTags {
    bool circular = false;
    bool collision = false;
    bool planar = false;
    bool vertical = false;
    bool retrograde = false;
    bool direct = false;
    bool collision_plus = false;
    bool collision_minus = false;

    std::vector<std::string> names() const {
        std::vector<std::string> out;
        if (circular) out.push_back("circular");
        if (collision) out.push_back("collision");
        if (planar) out.push_back("planar");
        if (vertical) out.push_back("vertical");
        if (retrograde) out.push_back("retrograde");
        if (direct) out.push_back("direct");
        if (collision_plus) out.push_back("collision+");
        if (collision_minus) out.push_back("collision-");
        return out;
    }
};

inline LocusTags classify_point(const SpherePair& sp, double tol = 1e-9) {
    LocusTags t;
    t.circular = (sp.x - sp.y).lpNorm<Eigen::Infinity>() <= tol;
    t.collision = (sp.x + sp.y).lpNorm<Eigen::Infinity>() <= tol;
    t.planar = std::abs(sp.x(0) + sp.y(0)) <= tol && std::abs(sp.x(1) + sp.y(1)) <= tol &&
               std::abs(sp.x(2) - sp.y(2)) <= tol;
    t.vertical = std::abs(sp.x(0) - sp.y(0)) <= tol && std::abs(sp.x(1) - sp.y(1)) <= tol &&
                 std::abs(sp.x(2) + sp.y(2)) <= tol;
    if (t.circular && t.planar) {
        t.retrograde = sp.x(2) > 0.0;
        t.direct = sp.x(2) < 0.0;
    }
    if (t.collision && t.vertical) {
        t.collision_plus = sp.x(2) > 0.0;
        t.collision_minus = sp.x(2) < 0.0;
    }
    return t;
}

// --------------------------------------------------------------------------
// Height functions and Morse data

/// L3 expressed on the product of spheres: (x3 + y3) / (2 sqrt(-2E)).
inline double l3_value(double E, const SpherePair& sp) {
    return (sp.x(2) + sp.y(2)) / (2.0 * std::sqrt(-2.0 * E));
}

/// A3 expressed on the product of spheres: -(x3 - y3)/2.
inline double a3_value(const SpherePair& sp) { return -0.5 * (sp.x(2) - sp.y(2)); }

/// Gradient of an ambient-linear function a_x.x + a_y.y projected onto the
/// tangent space of S^2 x S^2 at sp; stacked as (grad_x; grad_y).
inline Eigen::Matrix<double, 6, 1> projected_gradient(const Vec3& ax, const Vec3& ay,
                                                      const SpherePair& sp) {
    const Vec3 xh = sp.x.normalized(), yh = sp.y.normalized();
    Eigen::Matrix<double, 6, 1> g;
    g.head<3>() = ax - ax.dot(xh) * xh;
    g.tail<3>() = ay - ay.dot(yh) * yh;
    return g;
}

inline Eigen::Matrix<double, 6, 1> l3_projected_gradient(double E, const SpherePair& sp) {
    const double c = 1.0 / (2.0 * std::sqrt(-2.0 * E));
    return projected_gradient(c * Vec3::UnitZ(), c * Vec3::UnitZ(), sp);
}

inline Eigen::Matrix<double, 6, 1> a3_projected_gradient(const SpherePair& sp) {
    return projected_gradient(-0.5 * Vec3::UnitZ(), 0.5 * Vec3::UnitZ(), sp);
}

/// Morse index of an ambient-linear height function at a critical point of
/// the product of spheres. The tangential Hessian on each factor is
/// -(a.x) Id_2, so each factor contributes 2 when a points along +x.
inline int linear_height_morse_index(const Vec3& ax, const Vec3& ay, const SpherePair& sp) {
    int idx = 0;
    if (ax.dot(sp.x) > 0.0) idx += 2;
    if (ay.dot(sp.y) > 0.0) idx += 2;
    return idx;
}

struct CriticalPoint {
    SpherePair sp;
    std::string name;
    int morse_index = 0;
    double value = 0.0;
};

struct MorseData {
    std::string function;  // "L3" or "A3"
    std::vector<CriticalPoint> points;
};

namespace detail {

inline SpherePair named_point(double x3, double y3) {
    SpherePair sp;
    sp.x = Vec3(0.0, 0.0, x3);
    sp.y = Vec3(0.0, 0.0, y3);
    return sp;
}

}  // namespace detail

/// The four critical points of L3 on the product of spheres: the direct
/// orbit is the minimum, the collision orbits are the saddles, the
/// retrograde orbit the maximum.
inline MorseData l3_morse_data(double E) {
    if (E >= 0.0) throw EnergyRangeError("l3_morse_data: E must be negative");
    const double ext = 1.0 / std::sqrt(-2.0 * E);
    MorseData md;
    md.function = "L3";
    md.points = {
        {detail::named_point(-1.0, -1.0), "direct", 0, -ext},
        {detail::named_point(1.0, -1.0), "collision+", 2, 0.0},
        {detail::named_point(-1.0, 1.0), "collision-", 2, 0.0},
        {detail::named_point(1.0, 1.0), "retrograde", 4, ext},
    };
    return md;
}

/// The same four points are critical for A3, with the roles exchanged:
/// collision+ is the minimum (A3 = -1), collision- the maximum (A3 = +1),
/// and the circular orbits the saddles.
inline MorseData a3_morse_data(double E) {
    if (E >= 0.0) throw EnergyRangeError("a3_morse_data: E must be negative");
    MorseData md;
    md.function = "A3";
    md.points = {
        {detail::named_point(1.0, -1.0), "collision+", 0, -1.0},
        {detail::named_point(-1.0, -1.0), "direct", 2, 0.0},
        {detail::named_point(1.0, 1.0), "retrograde", 2, 0.0},
        {detail::named_point(-1.0, 1.0), "collision-", 4, 1.0},
    };
    return md;
}

// --------------------------------------------------------------------------
// Level-set sampling

/// n points of the level set L3 = value, drawn by fixing the height sum
/// h = x3 + y3, sampling x3 uniformly in its admissible interval and the
/// two azimuths uniformly. Rejects the singular level L3 = 0 and the
/// extreme levels |L3| >= 1/sqrt(-2E).
inline std::vector<SpherePair> level_set_sample(double E, double l3, int n,
                                                std::uint64_t seed = 12345) {
    if (E >= 0.0) throw EnergyRangeError("level_set_sample: E must be negative");
    const double ext = 1.0 / std::sqrt(-2.0 * E);
    if (l3 == 0.0)
        throw SingularLevelError("level_set_sample: L3 = 0 level is not a manifold");
    if (std::abs(l3) >= ext)
        throw SingularLevelError("level_set_sample: |L3| at or beyond the extreme value");
    const double h = 2.0 * std::sqrt(-2.0 * E) * l3;  // x3 + y3
    detail::Rng rng(seed);
    std::vector<SpherePair> out;
    out.reserve(static_cast<std::size_t>(n));
    const double x3_lo = std::max(-1.0, h - 1.0), x3_hi = std::min(1.0, h + 1.0);
    for (int i = 0; i < n; ++i) {
        const double x3 = rng.uniform(x3_lo, x3_hi);
        const double y3 = h - x3;
        const double rx = std::sqrt(std::max(0.0, 1.0 - x3 * x3));
        const double ry = std::sqrt(std::max(0.0, 1.0 - y3 * y3));
        const double ax = rng.uniform(0.0, 2.0 * M_PI);
        const double ay = rng.uniform(0.0, 2.0 * M_PI);
        SpherePair sp;
        sp.x = Vec3(rx * std::cos(ax), rx * std::sin(ax), x3);
        sp.y = Vec3(ry * std::cos(ay), ry * std::sin(ay), y3);
        out.push_back(sp);
    }
    return out;
}

// --------------------------------------------------------------------------
// Bifurcation schedule

/// A family (k,l) is born at the (k-l)-th cover of the direct orbit when c
/// crosses c^-_{k,l} and dies at the (k+l)-th cover of the retrograde orbit
/// at c^+_{k,l}.
struct BifurcationSchedule {
    FamilyId id;
    double c_minus = 0.0;
    int birth_cover = 0;  // cover of the direct orbit
    double c_plus = 0.0;
    int death_cover = 0;  // cover of the retrograde orbit
};

inline BifurcationSchedule bifurcation_schedule(int k, int l) {
    const FamilyId id(k, l);
    if (id.k <= id.l)
        throw DegenerateBirthError("bifurcation_schedule: birth cover k - l requires k > l");
    BifurcationSchedule out;
    out.id = id;
    const auto [cm, cp] = bifurcation_energies(id.k, id.l);
    out.c_minus = cm;
    out.birth_cover = id.k - id.l;
    out.c_plus = cp;
    out.death_cover = id.k + id.l;
    return out;
}

}  // namespace rkp
