// rkp/action_angle.hpp
// Spherical canonical chart, Delaunay actions with their Jacobian rank
// analysis, Laplace-Runge-Lenz coordinates for the planar case, and the
// analytic linearized return map behind the Morse-Bott property of the
// resonant tori.
#pragma once

#include <Eigen/Dense>
#include <Eigen/SVD>
#include <cmath>
#include <cstdint>

#include "rkp/core_dynamics.hpp"
#include "rkp/errors.hpp"
#include "rkp/orbit_catalog.hpp"

namespace rkp {

// --------------------------------------------------------------------------
// Spherical chart

/// Point of T*R^3 in spherical coordinates (r, psi, phi) with conjugate
/// momenta. psi is the polar angle from the +q3 axis; the chart excludes
/// the axis (0 < psi < pi).
struct SphericalPoint {
    double r = 1.0;
    double psi = M_PI / 2.0;
    double phi = 0.0;
    double p_r = 0.0;
    double p_psi = 0.0;
    double p_phi = 0.0;
};

inline SphericalPoint to_spherical(const PhasePoint& s) {
    const double r = s.q.norm();
    const double rho = std::hypot(s.q.x(), s.q.y());
    if (rho <= 1e-12 * std::max(r, 1.0))
        throw AxisChartError("to_spherical: state lies on the q3-axis");
    SphericalPoint sp;
    sp.r = r;
    sp.psi = std::atan2(rho, s.q.z());
    sp.phi = std::atan2(s.q.y(), s.q.x());
    const double cp = std::cos(sp.phi), spn = std::sin(sp.phi);
    const double cpsi = std::cos(sp.psi), spsi = std::sin(sp.psi);
    const Vec3 rhat = s.q / r;
    const Vec3 psihat(cpsi * cp, cpsi * spn, -spsi);
    const Vec3 phihat(-spn, cp, 0.0);
    sp.p_r = s.p.dot(rhat);
    sp.p_psi = r * s.p.dot(psihat);
    sp.p_phi = r * spsi * s.p.dot(phihat);
    return sp;
}

inline PhasePoint from_spherical(const SphericalPoint& sp) {
    if (sp.r <= 0.0) throw OriginError("from_spherical: r must be positive");
    if (sp.psi <= 0.0 || sp.psi >= M_PI)
        throw AxisChartError("from_spherical: psi outside (0, pi)");
    const double cp = std::cos(sp.phi), spn = std::sin(sp.phi);
    const double cpsi = std::cos(sp.psi), spsi = std::sin(sp.psi);
    const Vec3 rhat(spsi * cp, spsi * spn, cpsi);
    const Vec3 psihat(cpsi * cp, cpsi * spn, -spsi);
    const Vec3 phihat(-spn, cp, 0.0);
    PhasePoint s;
    s.q = sp.r * rhat;
    s.p = sp.p_r * rhat + (sp.p_psi / sp.r) * psihat + (sp.p_phi / (sp.r * spsi)) * phihat;
    return s;
}

// --------------------------------------------------------------------------
// Delaunay actions

/// The action triple (p_l, p_g, p_theta) = (1/sqrt(-2E), |L|, L3).
struct DelaunayActions {
    double p_l = 0.0;
    double p_g = 0.0;
    double p_theta = 0.0;
};

namespace detail {

/// Radicand of p_l: -2E expressed in the spherical chart.
inline double delaunay_radicand(const SphericalPoint& sp) {
    const double s2 = std::sin(sp.psi) * std::sin(sp.psi);
    return 2.0 / sp.r - sp.p_r * sp.p_r - sp.p_psi * sp.p_psi / (sp.r * sp.r) -
           sp.p_phi * sp.p_phi / (sp.r * sp.r * s2);
}

}  // namespace detail

inline DelaunayActions delaunay_actions(const SphericalPoint& sp) {
    const double Q = detail::delaunay_radicand(sp);
    if (Q <= 0.0)
        throw UnboundStateError("delaunay_actions: state is unbound (E >= 0)");
    DelaunayActions a;
    a.p_l = 1.0 / std::sqrt(Q);
    const double s2 = std::sin(sp.psi) * std::sin(sp.psi);
    a.p_g = std::sqrt(sp.p_psi * sp.p_psi + sp.p_phi * sp.p_phi / s2);
    a.p_theta = sp.p_phi;
    return a;
}

// --------------------------------------------------------------------------
// Jacobian rank analysis

/// The three rank regimes of the Delaunay action Jacobian.
enum class RankCase {
    NonCircularNonPlanar,  // case1: p_r != 0, momentum rows independent
    CircularNonPlanar,     // case2: p_r = 0, the r-row substitutes
    Planar                 // case3: rank drops, defer to LRL coordinates
};

inline const char* rank_case_name(RankCase c) {
    switch (c) {
        case RankCase::NonCircularNonPlanar: return "case1";
        case RankCase::CircularNonPlanar: return "case2";
        case RankCase::Planar: return "case3";
    }
    return "?";
}

/// 6x3 action Jacobian, rows ordered (r, psi, phi, p_r, p_psi, p_phi),
/// with its numeric rank and case tag.
struct JacobianReport {
    Eigen::Matrix<double, 6, 3> matrix = Eigen::Matrix<double, 6, 3>::Zero();
    RankCase tag = RankCase::NonCircularNonPlanar;
    int rank = 0;
};

namespace detail {

inline int numeric_rank(const Eigen::Matrix<double, 6, 3>& J) {
    Eigen::JacobiSVD<Eigen::Matrix<double, 6, 3>> svd(J);
    const auto& sv = svd.singularValues();
    const double thresh = 1e-8 * sv(0);
    int rank = 0;
    for (Eigen::Index i = 0; i < sv.size(); ++i)
        if (sv(i) > thresh) ++rank;
    return rank;
}

inline RankCase classify_rank_case(const SphericalPoint& sp, double tol) {
    const bool planar = std::abs(std::cos(sp.psi)) < tol && std::abs(sp.p_psi) < tol;
    if (planar) return RankCase::Planar;
    if (std::abs(sp.p_r) > tol) return RankCase::NonCircularNonPlanar;
    return RankCase::CircularNonPlanar;
}

/// Column of partials of p_l, shared by both action systems.
inline Eigen::Matrix<double, 6, 1> p_l_gradient(const SphericalPoint& sp, double p_l) {
    const double r = sp.r;
    const double s = std::sin(sp.psi), c = std::cos(sp.psi);
    const double s2 = s * s;
    const double pl3 = p_l * p_l * p_l;
    Eigen::Matrix<double, 6, 1> g;
    g(0) = pl3 * (1.0 / (r * r) - sp.p_psi * sp.p_psi / (r * r * r) -
                  sp.p_phi * sp.p_phi / (r * r * r * s2));
    g(1) = -pl3 * sp.p_phi * sp.p_phi * c / (r * r * s2 * s);
    g(2) = 0.0;
    g(3) = pl3 * sp.p_r;
    g(4) = pl3 * sp.p_psi / (r * r);
    g(5) = pl3 * sp.p_phi / (r * r * s2);
    return g;
}

}  // namespace detail

/// Jacobian of (p_l, p_g, p_theta) with respect to the chart variables.
/// Vertical orbits (p_phi = 0) are excluded: p_g is not differentiable
/// there and the angle theta is undefined.
inline JacobianReport delaunay_jacobian(const SphericalPoint& sp, double tol = 1e-9) {
    if (std::abs(sp.p_phi) < tol)
        throw VerticalOrbitError("delaunay_jacobian: vertical orbit (p_phi = 0)");
    const DelaunayActions a = delaunay_actions(sp);
    const double s = std::sin(sp.psi), c = std::cos(sp.psi);
    const double s2 = s * s;

    JacobianReport rep;
    rep.matrix.col(0) = detail::p_l_gradient(sp, a.p_l);
    // p_g = sqrt(p_psi^2 + p_phi^2 / sin^2 psi)
    rep.matrix(1, 1) = -sp.p_phi * sp.p_phi * c / (a.p_g * s2 * s);
    rep.matrix(4, 1) = sp.p_psi / a.p_g;
    rep.matrix(5, 1) = sp.p_phi / (a.p_g * s2);
    // p_theta = p_phi
    rep.matrix(5, 2) = 1.0;

    rep.tag = detail::classify_rank_case(sp, tol);
    rep.rank = detail::numeric_rank(rep.matrix);
    return rep;
}

// --------------------------------------------------------------------------
// Laplace-Runge-Lenz coordinates

/// Third Laplace-Runge-Lenz component in the spherical chart,
/// p_eta = (cos psi / r)(p_psi^2 + p_phi^2/sin^2 psi) + sin psi p_r p_psi - cos psi.
inline double lrl_action(const SphericalPoint& sp) {
    const double s = std::sin(sp.psi), c = std::cos(sp.psi);
    const double G = sp.p_psi * sp.p_psi + sp.p_phi * sp.p_phi / (s * s);
    return (c / sp.r) * G + s * sp.p_r * sp.p_psi - c;
}

/// 6x3 Jacobian of the planar action system (p_l, p_eta, p_theta) with its
/// numeric rank. On planar non-circular states (cos psi = 0, p_psi = 0,
/// p_r != 0) the momentum rows alone have determinant p_l^3 p_r^2, so the
/// rank is 3 exactly where the Delaunay chart degenerates.
struct LrlJacobian {
    Eigen::Matrix<double, 6, 3> matrix = Eigen::Matrix<double, 6, 3>::Zero();
    int rank = 0;
};

inline LrlJacobian lrl_jacobian(const SphericalPoint& sp) {
    const DelaunayActions a = delaunay_actions(sp);
    const double r = sp.r;
    const double s = std::sin(sp.psi), c = std::cos(sp.psi);
    const double s2 = s * s;
    const double G = sp.p_psi * sp.p_psi + sp.p_phi * sp.p_phi / s2;

    LrlJacobian rep;
    rep.matrix.col(0) = detail::p_l_gradient(sp, a.p_l);
    // p_eta = (c/r) G + s p_r p_psi - c
    rep.matrix(0, 1) = -(c / (r * r)) * G;
    rep.matrix(1, 1) = -(s / r) * G - 2.0 * sp.p_phi * sp.p_phi * c * c / (r * s2 * s) +
                       c * sp.p_r * sp.p_psi + s;
    rep.matrix(3, 1) = s * sp.p_psi;
    rep.matrix(4, 1) = 2.0 * sp.p_psi * c / r + s * sp.p_r;
    rep.matrix(5, 1) = 2.0 * sp.p_phi * c / (r * s2);
    // p_theta = p_phi
    rep.matrix(5, 2) = 1.0;

    rep.rank = detail::numeric_rank(rep.matrix);
    return rep;
}

// --------------------------------------------------------------------------
// Linearized return map and the Morse-Bott test

/// Linearized rotating-frame return map of the (k,l) torus in Delaunay
/// coordinates ordered (l, p_l, g, p_g, theta, p_theta): the identity
/// except for the shear entry (l, p_l) = -6 pi k / p_l.
inline Eigen::Matrix<double, 6, 6> delaunay_return_map(int k, int l) {
    const FamilyId id(k, l);
    const double p_l = resonance_action(id.k, id.l);
    Eigen::Matrix<double, 6, 6> Psi = Eigen::Matrix<double, 6, 6>::Identity();
    Psi(0, 1) = -6.0 * M_PI * id.k / p_l;
    return Psi;
}

/// Nondegeneracy of the return map transverse to the torus family: the
/// normal displacement (Psi nu - nu) . d/dl with nu = -p_l^3 d/dp_l + d/dp_theta,
/// equal to 6 pi k p_l^2. Nonzero for every family.
struct MorseBottResult {
    bool nondegenerate = false;
    double displacement = 0.0;
    double p_l = 0.0;
};

inline MorseBottResult morse_bott_test(int k, int l) {
    const FamilyId id(k, l);
    MorseBottResult res;
    res.p_l = resonance_action(id.k, id.l);
    const Eigen::Matrix<double, 6, 6> Psi = delaunay_return_map(id.k, id.l);
    Eigen::Matrix<double, 6, 1> nu = Eigen::Matrix<double, 6, 1>::Zero();
    nu(1) = -res.p_l * res.p_l * res.p_l;
    nu(5) = 1.0;
    const Eigen::Matrix<double, 6, 1> moved = Psi * nu - nu;
    res.displacement = moved(0);
    res.nondegenerate = std::abs(res.displacement) > 0.0;
    return res;
}

}  // namespace rkp
