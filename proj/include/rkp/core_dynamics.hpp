// rkp/core_dynamics.hpp
// Phase-space states, Hamiltonians, flows and brackets of the spatial
// rotating Kepler problem  H = |p|^2/2 - 1/|q| + (q1 p2 - q2 p1).
#pragma once

#include <Eigen/Dense>
#include <boost/numeric/odeint.hpp>
#include <cmath>
#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "rkp/errors.hpp"

namespace rkp {

using Vec3 = Eigen::Vector3d;
using Vec6 = Eigen::Matrix<double, 6, 1>;
using Vec8 = Eigen::Matrix<double, 8, 1>;
using Mat3 = Eigen::Matrix3d;
using Mat6 = Eigen::Matrix<double, 6, 6>;
using Mat8 = Eigen::Matrix<double, 8, 8>;

/// Point of the flat chart T*R^3 in an inertial-labelled rotating frame.
struct PhasePoint {
    Vec3 q = Vec3::Zero();
    Vec3 p = Vec3::Zero();

    Vec6 to_vec6() const {
        Vec6 v;
        v << q, p;
        return v;
    }
    static PhasePoint from_vec6(const Vec6& v) {
        PhasePoint s;
        s.q = v.head<3>();
        s.p = v.tail<3>();
        return s;
    }
};

/// Hamiltonians the dynamics layer knows how to evaluate and flow.
/// KeplerE, AngularL3 and RotatingH live on T*R^3; MoserKr and MoserKc live
/// on the unit-sphere cotangent chart, stored as raw 8-vectors
/// (x0,x1,x2,x3,y0,y1,y2,y3).
enum class HamiltonianId { KeplerE, AngularL3, RotatingH, MoserKr, MoserKc };

inline bool is_flat_chart(HamiltonianId h) {
    return h == HamiltonianId::KeplerE || h == HamiltonianId::AngularL3 ||
           h == HamiltonianId::RotatingH;
}

inline const char* hamiltonian_name(HamiltonianId h) {
    switch (h) {
        case HamiltonianId::KeplerE: return "KeplerE";
        case HamiltonianId::AngularL3: return "AngularL3";
        case HamiltonianId::RotatingH: return "RotatingH";
        case HamiltonianId::MoserKr: return "MoserKr";
        case HamiltonianId::MoserKc: return "MoserKc";
    }
    return "?";
}

/// Adaptive integration controls shared by every flow operation.
struct IntegratorConfig {
    double rtol = 1e-10;
    double atol = 1e-10;
    /// Unregularized flows abort when |q| drops below this.
    double collision_floor = 1e-6;
    long max_steps = 4000000;
    double initial_step = 1e-3;
    /// Optional hard cap on |dt| (0 = uncapped); used by event detection.
    double max_step = 0.0;
};

// --------------------------------------------------------------------------
// Invariants

/// Kepler first integrals of a flat-chart state: energy E, angular momentum
/// L = q x p and Laplace-Runge-Lenz vector A = p x L - q/|q|.
struct InvariantTriple {
    double E = 0.0;
    Vec3 L = Vec3::Zero();
    Vec3 A = Vec3::Zero();

    double eccentricity() const { return A.norm(); }
    /// Rotating-frame (Jacobi) energy H = E + L3 of the same state.
    double jacobi() const { return E + L(2); }
};

inline InvariantTriple invariants(const PhasePoint& s) {
    const double rq = s.q.norm();
    if (rq == 0.0) throw OriginError("invariants: |q| = 0");
    InvariantTriple iv;
    iv.E = 0.5 * s.p.squaredNorm() - 1.0 / rq;
    iv.L = s.q.cross(s.p);
    iv.A = s.p.cross(iv.L) - s.q / rq;
    return iv;
}

// --------------------------------------------------------------------------
// Hamiltonian values, vector fields, Jacobians

inline void require_flat(HamiltonianId h, const char* op) {
    if (!is_flat_chart(h))
        throw ChartMismatchError(std::string(op) + ": " + hamiltonian_name(h) +
                                 " lives on the sphere chart");
}
inline void require_sphere(HamiltonianId h, const char* op) {
    if (is_flat_chart(h))
        throw ChartMismatchError(std::string(op) + ": " + hamiltonian_name(h) +
                                 " lives on the flat chart");
}

/// Value of a flat-chart Hamiltonian.
inline double hamiltonian_value(HamiltonianId h, const PhasePoint& s) {
    require_flat(h, "hamiltonian_value");
    const double rq = s.q.norm();
    switch (h) {
        case HamiltonianId::KeplerE:
            if (rq == 0.0) throw OriginError("hamiltonian_value: |q| = 0");
            return 0.5 * s.p.squaredNorm() - 1.0 / rq;
        case HamiltonianId::AngularL3:
            return s.q(0) * s.p(1) - s.q(1) * s.p(0);
        default:
            if (rq == 0.0) throw OriginError("hamiltonian_value: |q| = 0");
            return 0.5 * s.p.squaredNorm() - 1.0 / rq + s.q(0) * s.p(1) - s.q(1) * s.p(0);
    }
}

/// Value of a sphere-chart Hamiltonian on the unit-sphere chart. K_r is used
/// in its homogeneous form (r^2/2)|x|^2|y|^2 (equal to (r^2/2)|y|^2 on
/// |x| = 1) so that its symplectic gradient generates the geodesic flow.
inline double hamiltonian_value(HamiltonianId h, const Vec8& xy, double r) {
    require_sphere(h, "hamiltonian_value");
    const auto x = xy.head<4>();
    const auto y = xy.tail<4>();
    if (h == HamiltonianId::MoserKr) {
        return 0.5 * r * r * x.squaredNorm() * y.squaredNorm();
    }
    // MoserKc: (1/2)|y|^2 (r + (1/r^2)(1 - x0)(x1 y2 - x2 y1))^2, r = sqrt(-2c).
    const double w = x(1) * y(2) - x(2) * y(1);
    const double S = r + (1.0 - x(0)) * w / (r * r);
    return 0.5 * y.squaredNorm() * S * S;
}

/// Symplectic gradient of a flat-chart Hamiltonian (qdot = dH/dp, pdot = -dH/dq).
inline Vec6 vector_field(HamiltonianId h, const PhasePoint& s) {
    require_flat(h, "vector_field");
    Vec6 f = Vec6::Zero();
    if (h == HamiltonianId::KeplerE || h == HamiltonianId::RotatingH) {
        const double rq = s.q.norm();
        if (rq == 0.0) throw OriginError("vector_field: |q| = 0");
        const double r3 = rq * rq * rq;
        f.head<3>() += s.p;
        f.tail<3>() += -s.q / r3;
    }
    if (h == HamiltonianId::AngularL3 || h == HamiltonianId::RotatingH) {
        f(0) += -s.q(1);
        f(1) += s.q(0);
        f(3) += -s.p(1);
        f(4) += s.p(0);
    }
    return f;
}

/// Symplectic gradient of a sphere-chart Hamiltonian on R^8.
inline Vec8 vector_field(HamiltonianId h, const Vec8& xy, double r) {
    require_sphere(h, "vector_field");
    const Eigen::Vector4d x = xy.head<4>();
    const Eigen::Vector4d y = xy.tail<4>();
    Vec8 f;
    if (h == HamiltonianId::MoserKr) {
        f.head<4>() = r * r * x.squaredNorm() * y;
        f.tail<4>() = -r * r * y.squaredNorm() * x;
        return f;
    }
    const double w = x(1) * y(2) - x(2) * y(1);
    const double c1 = (1.0 - x(0)) / (r * r);
    const double S = r + c1 * w;
    const double y2 = y.squaredNorm();
    // dK/dy and dK/dx of (1/2)|y|^2 S^2.
    Eigen::Vector4d dKdy = S * S * y;
    dKdy(1) += y2 * S * c1 * (-x(2));
    dKdy(2) += y2 * S * c1 * x(1);
    Eigen::Vector4d dKdx = Eigen::Vector4d::Zero();
    dKdx(0) = y2 * S * (-w / (r * r));
    dKdx(1) = y2 * S * c1 * y(2);
    dKdx(2) = y2 * S * c1 * (-y(1));
    f.head<4>() = dKdy;
    f.tail<4>() = -dKdx;
    return f;
}

/// Jacobian of the flat-chart vector field (needed by variational flows).
inline Mat6 vector_field_jacobian(HamiltonianId h, const PhasePoint& s) {
    require_flat(h, "vector_field_jacobian");
    Mat6 J = Mat6::Zero();
    if (h == HamiltonianId::KeplerE || h == HamiltonianId::RotatingH) {
        const double rq = s.q.norm();
        if (rq == 0.0) throw OriginError("vector_field_jacobian: |q| = 0");
        const double r3 = rq * rq * rq;
        const double r5 = r3 * rq * rq;
        J.block<3, 3>(0, 3) += Mat3::Identity();
        J.block<3, 3>(3, 0) += 3.0 * s.q * s.q.transpose() / r5 - Mat3::Identity() / r3;
    }
    if (h == HamiltonianId::AngularL3 || h == HamiltonianId::RotatingH) {
        Mat3 R = Mat3::Zero();
        R(0, 1) = -1.0;
        R(1, 0) = 1.0;
        J.block<3, 3>(0, 0) += R;
        J.block<3, 3>(3, 3) += R;
    }
    return J;
}

/// Jacobian of the sphere-chart vector field. MoserKr is analytic; MoserKc
/// falls back to centered differences of the vector field.
inline Mat8 vector_field_jacobian(HamiltonianId h, const Vec8& xy, double r) {
    require_sphere(h, "vector_field_jacobian");
    if (h == HamiltonianId::MoserKr) {
        const Eigen::Vector4d x = xy.head<4>();
        const Eigen::Vector4d y = xy.tail<4>();
        const double r2 = r * r;
        Mat8 J = Mat8::Zero();
        J.block<4, 4>(0, 0) = 2.0 * r2 * y * x.transpose();
        J.block<4, 4>(0, 4) = r2 * x.squaredNorm() * Eigen::Matrix4d::Identity();
        J.block<4, 4>(4, 0) = -r2 * y.squaredNorm() * Eigen::Matrix4d::Identity();
        J.block<4, 4>(4, 4) = -2.0 * r2 * x * y.transpose();
        return J;
    }
    Mat8 J;
    const double step = 1e-6;
    for (int j = 0; j < 8; ++j) {
        Vec8 hi = xy, lo = xy;
        hi(j) += step;
        lo(j) -= step;
        J.col(j) = (vector_field(h, hi, r) - vector_field(h, lo, r)) / (2.0 * step);
    }
    return J;
}

// --------------------------------------------------------------------------
// Adaptive integration driver

namespace detail {

using OdeState = std::vector<double>;
using StepCallback = std::function<void(double, const OdeState&)>;

/// Drive boost::odeint's controlled RKF78 from t0 to t1 with per-accepted-step
/// callbacks (collision floor, event tracking). Keeps the running step size in
/// dt so consecutive segments resume smoothly.
template <class System>
void integrate_segment(System&& sys, OdeState& x, double t0, double t1,
                       const IntegratorConfig& cfg, double& dt,
                       const StepCallback& on_step = {}) {
    namespace ode = boost::numeric::odeint;
    if (t1 == t0) return;
    auto stepper = ode::make_controlled(cfg.atol, cfg.rtol, ode::runge_kutta_fehlberg78<OdeState>());
    const double dir = (t1 > t0) ? 1.0 : -1.0;
    double t = t0;
    if (dt == 0.0 || dt * dir <= 0.0) dt = dir * cfg.initial_step;
    long attempts = 0;
    while (dir * (t1 - t) > 0.0) {
        if (cfg.max_step > 0.0 && std::abs(dt) > cfg.max_step) dt = dir * cfg.max_step;
        double trial = dt;
        if (dir * (t + trial - t1) > 0.0) trial = t1 - t;
        double t_before = t;
        double dt_inout = trial;
        const auto result = stepper.try_step(sys, x, t, dt_inout);
        if (++attempts > cfg.max_steps)
            throw StepLimitError("integrate: exceeded max_steps = " + std::to_string(cfg.max_steps));
        if (result == ode::success) {
            // dt_inout now suggests the next step; remember it un-clipped.
            dt = dt_inout;
            if (on_step) on_step(t, x);
        } else {
            dt = dt_inout;  // reduced step after rejection
            t = t_before;
        }
    }
}

inline OdeState to_ode(const Eigen::Ref<const Eigen::VectorXd>& v) {
    return OdeState(v.data(), v.data() + v.size());
}

inline Eigen::VectorXd from_ode(const OdeState& x) {
    return Eigen::Map<const Eigen::VectorXd>(x.data(), static_cast<Eigen::Index>(x.size()));
}

}  // namespace detail

// --------------------------------------------------------------------------
// Flows

/// Evolve a flat-chart state for time t. Aborts with CollisionApproachError
/// when the trajectory sinks below the collision floor.
inline PhasePoint flow(HamiltonianId h, const PhasePoint& s, double t,
                       const IntegratorConfig& cfg = {}) {
    require_flat(h, "flow");
    auto sys = [h](const detail::OdeState& x, detail::OdeState& dxdt, double) {
        PhasePoint z;
        z.q = Vec3(x[0], x[1], x[2]);
        z.p = Vec3(x[3], x[4], x[5]);
        const Vec6 f = vector_field(h, z);
        dxdt.assign(f.data(), f.data() + 6);
    };
    auto floor_check = [&cfg](double, const detail::OdeState& x) {
        const double rq = std::sqrt(x[0] * x[0] + x[1] * x[1] + x[2] * x[2]);
        if (rq < cfg.collision_floor)
            throw CollisionApproachError("flow: |q| = " + std::to_string(rq) +
                                         " fell below the collision floor");
    };
    detail::OdeState x = detail::to_ode(s.to_vec6());
    double dt = 0.0;
    detail::integrate_segment(sys, x, 0.0, t, cfg, dt, floor_check);
    return PhasePoint::from_vec6(Eigen::Map<const Vec6>(x.data()));
}

/// Evolve a sphere-chart state (regularized; no collision floor applies).
inline Vec8 flow(HamiltonianId h, const Vec8& xy, double r, double t,
                 const IntegratorConfig& cfg = {}) {
    require_sphere(h, "flow");
    auto sys = [h, r](const detail::OdeState& x, detail::OdeState& dxdt, double) {
        const Vec8 f = vector_field(h, Eigen::Map<const Vec8>(x.data()), r);
        dxdt.assign(f.data(), f.data() + 8);
    };
    detail::OdeState x = detail::to_ode(xy);
    double dt = 0.0;
    detail::integrate_segment(sys, x, 0.0, t, cfg, dt);
    return Eigen::Map<const Vec8>(x.data());
}

/// State together with the linearized flow transported along it.
template <int N>
struct VariationalResult {
    Eigen::Matrix<double, N, 1> state;
    Eigen::Matrix<double, N, N> monodromy;
};

/// Variational flow of a flat-chart Hamiltonian: evolves (z, M) with
/// Mdot = DX_h(z) M, M(0) = Id. Returns the state and the 6x6 monodromy.
inline VariationalResult<6> variational_flow(HamiltonianId h, const PhasePoint& s, double t,
                                             const IntegratorConfig& cfg = {}) {
    require_flat(h, "variational_flow");
    auto sys = [h](const detail::OdeState& x, detail::OdeState& dxdt, double) {
        PhasePoint z;
        z.q = Vec3(x[0], x[1], x[2]);
        z.p = Vec3(x[3], x[4], x[5]);
        const Vec6 f = vector_field(h, z);
        const Mat6 J = vector_field_jacobian(h, z);
        const Eigen::Map<const Mat6> M(x.data() + 6);
        const Mat6 Mdot = J * M;
        dxdt.resize(42);
        Eigen::Map<Vec6>(dxdt.data()) = f;
        Eigen::Map<Mat6>(dxdt.data() + 6) = Mdot;
    };
    auto floor_check = [&cfg](double, const detail::OdeState& x) {
        const double rq = std::sqrt(x[0] * x[0] + x[1] * x[1] + x[2] * x[2]);
        if (rq < cfg.collision_floor)
            throw CollisionApproachError("variational_flow: below the collision floor");
    };
    detail::OdeState x(42);
    Eigen::Map<Vec6>(x.data()) = s.to_vec6();
    Eigen::Map<Mat6>(x.data() + 6) = Mat6::Identity();
    double dt = 0.0;
    detail::integrate_segment(sys, x, 0.0, t, cfg, dt, floor_check);
    VariationalResult<6> out;
    out.state = Eigen::Map<const Vec6>(x.data());
    out.monodromy = Eigen::Map<const Mat6>(x.data() + 6);
    return out;
}

/// Variational flow of a sphere-chart Hamiltonian (8x8).
inline VariationalResult<8> variational_flow(HamiltonianId h, const Vec8& xy, double r, double t,
                                             const IntegratorConfig& cfg = {}) {
    require_sphere(h, "variational_flow");
    auto sys = [h, r](const detail::OdeState& x, detail::OdeState& dxdt, double) {
        const Eigen::Map<const Vec8> z(x.data());
        const Vec8 f = vector_field(h, z, r);
        const Mat8 J = vector_field_jacobian(h, z, r);
        const Eigen::Map<const Mat8> M(x.data() + 8);
        const Mat8 Mdot = J * M;
        dxdt.resize(72);
        Eigen::Map<Vec8>(dxdt.data()) = f;
        Eigen::Map<Mat8>(dxdt.data() + 8) = Mdot;
    };
    detail::OdeState x(72);
    Eigen::Map<Vec8>(x.data()) = xy;
    Eigen::Map<Mat8>(x.data() + 8) = Mat8::Identity();
    double dt = 0.0;
    detail::integrate_segment(sys, x, 0.0, t, cfg, dt);
    VariationalResult<8> out;
    out.state = Eigen::Map<const Vec8>(x.data());
    out.monodromy = Eigen::Map<const Mat8>(x.data() + 8);
    return out;
}

// --------------------------------------------------------------------------
// Poisson brackets

/// Scalar observable on the flat chart. When an analytic gradient is not
/// supplied the bracket falls back to centered differences (step 1e-5) with
/// one Richardson refinement.
struct Observable {
    std::string name;
    std::function<double(const PhasePoint&)> value;
    std::function<Vec6(const PhasePoint&)> gradient;  // optional
};

namespace detail {

inline Vec6 numeric_gradient(const std::function<double(const PhasePoint&)>& f,
                             const PhasePoint& s, double step) {
    Vec6 g;
    const Vec6 base = s.to_vec6();
    auto central = [&](int i, double h) {
        Vec6 hi = base, lo = base;
        hi(i) += h;
        lo(i) -= h;
        return (f(PhasePoint::from_vec6(hi)) - f(PhasePoint::from_vec6(lo))) / (2.0 * h);
    };
    for (int i = 0; i < 6; ++i) {
        const double d1 = central(i, step);
        const double d2 = central(i, step / 2.0);
        g(i) = (4.0 * d2 - d1) / 3.0;  // one Richardson pass on O(h^2) data
    }
    return g;
}

}  // namespace detail

/// Canonical bracket {f,g} = sum_i df/dq_i dg/dp_i - df/dp_i dg/dq_i.
inline double poisson_bracket(const Observable& f, const Observable& g, const PhasePoint& s,
                              double fd_step = 1e-5) {
    const Vec6 gf = f.gradient ? f.gradient(s) : detail::numeric_gradient(f.value, s, fd_step);
    const Vec6 gg = g.gradient ? g.gradient(s) : detail::numeric_gradient(g.value, s, fd_step);
    double sum = 0.0;
    for (int i = 0; i < 3; ++i) sum += gf(i) * gg(i + 3) - gf(i + 3) * gg(i);
    return sum;
}

/// Kepler energy with analytic gradient.
inline Observable obs_energy() {
    Observable o;
    o.name = "E";
    o.value = [](const PhasePoint& s) { return hamiltonian_value(HamiltonianId::KeplerE, s); };
    o.gradient = [](const PhasePoint& s) {
        const double r3 = std::pow(s.q.norm(), 3);
        Vec6 g;
        g.head<3>() = s.q / r3;
        g.tail<3>() = s.p;
        return g;
    };
    return o;
}

/// Angular momentum component L_i (i in 0..2) with analytic gradient.
inline Observable obs_angular(int i) {
    Observable o;
    o.name = std::string("L") + std::to_string(i + 1);
    o.value = [i](const PhasePoint& s) { return s.q.cross(s.p)(i); };
    o.gradient = [i](const PhasePoint& s) {
        const int a = (i + 1) % 3, b = (i + 2) % 3;
        Vec6 g = Vec6::Zero();
        // L_i = q_a p_b - q_b p_a
        g(a) = s.p(b);
        g(b) = -s.p(a);
        g(3 + a) = -s.q(b);
        g(3 + b) = s.q(a);
        return g;
    };
    return o;
}

/// Laplace-Runge-Lenz component A_i; gradient left to finite differences.
inline Observable obs_lrl(int i) {
    Observable o;
    o.name = std::string("A") + std::to_string(i + 1);
    o.value = [i](const PhasePoint& s) { return invariants(s).A(i); };
    return o;
}

/// Rotating-frame Hamiltonian with analytic gradient.
inline Observable obs_jacobi() {
    Observable o;
    o.name = "H";
    o.value = [](const PhasePoint& s) { return hamiltonian_value(HamiltonianId::RotatingH, s); };
    o.gradient = [](const PhasePoint& s) {
        Vec6 g = obs_energy().gradient(s);
        g(0) += s.p(1);
        g(1) += -s.p(0);
        g(3) += -s.q(1);
        g(4) += s.q(0);
        return g;
    };
    return o;
}

// --------------------------------------------------------------------------
// Conic reconstruction

/// Deterministic in-plane reference axis for the argument of perigee: the
/// projection of e1 onto the plane L.q = 0, falling back to e2 when L is
/// parallel to e1. The reference direction is a convention of ours; the
/// orbital trace itself does not depend on it once g is measured consistently.
inline Vec3 conic_reference_axis(const Vec3& L) {
    const Vec3 n = L.normalized();
    Vec3 u = Vec3::UnitX() - Vec3::UnitX().dot(n) * n;
    if (u.norm() < 1e-8) u = Vec3::UnitY() - Vec3::UnitY().dot(n) * n;
    return u.normalized();
}

/// Argument of perigee: polar angle of A within the orbital plane, measured
/// against conic_reference_axis(L). Zero for circular orbits.
inline double argument_of_perigee(const Vec3& L, const Vec3& A) {
    if (A.norm() < 1e-12) return 0.0;
    const Vec3 n = L.normalized();
    const Vec3 u = conic_reference_axis(L);
    const Vec3 v = n.cross(u);
    return std::atan2(A.dot(v), A.dot(u));
}

/// Orbital trace r(theta) = |L|^2 / (1 + |A| cos(theta - g)) at polar angle
/// theta in the orbital plane.
inline double conic_trace(const Vec3& L, const Vec3& A, double theta) {
    const double l2 = L.squaredNorm();
    if (l2 == 0.0) throw DegenerateConicError("conic_trace: |L| = 0 (collision orbit)");
    const double g = argument_of_perigee(L, A);
    const double denom = 1.0 + A.norm() * std::cos(theta - g);
    if (denom <= 0.0) throw UnboundedConicError("conic_trace: 1 + e cos(theta - g) <= 0");
    return l2 / denom;
}

// --------------------------------------------------------------------------
// First-return detection

/// Minimum radius of the Kepler conic with the given invariants (perihelion).
inline double perihelion_radius(const InvariantTriple& iv) {
    const double l2 = iv.L.squaredNorm();
    const double e = iv.A.norm();
    return l2 / (1.0 + e);
}

/// Numerically detected first-return time of a bound orbit: the time for the
/// in-plane polar angle to advance by 2 pi. Supports the Kepler flow (any
/// bound non-collinear state; orbits close, so angle return = period) and
/// the rotating flow on planar orbits (used for the circular families).
inline double detect_first_return(HamiltonianId h, const PhasePoint& s,
                                  const IntegratorConfig& cfg = {}) {
    if (h != HamiltonianId::KeplerE && h != HamiltonianId::RotatingH)
        throw InvalidOrbitError("detect_first_return: flow must be KeplerE or RotatingH");
    const InvariantTriple iv = invariants(s);
    if (iv.E >= 0.0) throw UnboundedConicError("detect_first_return: E >= 0");
    const double l = iv.L.norm();
    if (l < 1e-8) throw DegenerateConicError("detect_first_return: |L| ~ 0");
    Vec3 n = iv.L / l;
    if (h == HamiltonianId::RotatingH) {
        if (std::abs(s.q(2)) > 1e-9 || std::abs(s.p(2)) > 1e-9)
            throw InvalidOrbitError("detect_first_return: rotating-frame detection needs a planar orbit");
        n = Vec3::UnitZ();
    }
    Vec3 u = s.q - (s.q.dot(n)) * n;
    if (u.norm() < 1e-12) throw AxisChartError("detect_first_return: initial point on the axis");
    u.normalize();
    const Vec3 v = n.cross(u);

    // Angle rate is bounded by |L|/r_min^2 (+1 frame rotation); cap the step
    // so per-step angle increments stay well under pi for safe unwrapping.
    const double r_min = perihelion_radius(iv);
    const double rate = l / (r_min * r_min) + 1.0;
    IntegratorConfig c = cfg;
    c.max_step = std::min(0.25, 0.5 * M_PI / rate);

    auto angle = [&](const PhasePoint& z) { return std::atan2(z.q.dot(v), z.q.dot(u)); };
    auto wrap = [](double a) {
        while (a > M_PI) a -= 2.0 * M_PI;
        while (a < -M_PI) a += 2.0 * M_PI;
        return a;
    };

    auto sys = [h](const detail::OdeState& x, detail::OdeState& dxdt, double) {
        PhasePoint z;
        z.q = Vec3(x[0], x[1], x[2]);
        z.p = Vec3(x[3], x[4], x[5]);
        const Vec6 f = vector_field(h, z);
        dxdt.assign(f.data(), f.data() + 6);
    };

    double total = 0.0;
    double prev_angle = angle(s);
    double t_lo = 0.0, total_lo = 0.0;
    detail::OdeState x_lo = detail::to_ode(s.to_vec6());
    double t_hi = 0.0;
    detail::OdeState x = x_lo;
    double dt = 0.0;
    const double t_limit = 1e6;
    // Step until the unwrapped angle has advanced a full turn.
    while (std::abs(total) < 2.0 * M_PI) {
        t_lo = t_hi;
        total_lo = total;
        x_lo = x;
        const double target = t_hi + c.max_step;
        if (target > t_limit) throw StepLimitError("detect_first_return: no return found");
        detail::integrate_segment(sys, x, t_hi, target, c, dt);
        t_hi = target;
        PhasePoint z = PhasePoint::from_vec6(Eigen::Map<const Vec6>(x.data()));
        const double a = angle(z);
        total += wrap(a - prev_angle);
        prev_angle = a;
    }
    // Bisect inside [t_lo, t_hi] on the unwrapped advance.
    const double goal = (total > 0.0) ? 2.0 * M_PI : -2.0 * M_PI;
    double lo = t_lo, hi = t_hi;
    const double a_lo_ref = angle(PhasePoint::from_vec6(Eigen::Map<const Vec6>(x_lo.data())));
    for (int it = 0; it < 80 && (hi - lo) > 1e-13 * std::max(1.0, hi); ++it) {
        const double mid = 0.5 * (lo + hi);
        detail::OdeState xm = x_lo;
        double dtm = 0.0;
        detail::integrate_segment(sys, xm, t_lo, mid, c, dtm);
        PhasePoint zm = PhasePoint::from_vec6(Eigen::Map<const Vec6>(xm.data()));
        const double adv = total_lo + wrap(angle(zm) - a_lo_ref);
        if (std::abs(adv) < std::abs(goal))
            lo = mid;
        else
            hi = mid;
    }
    return 0.5 * (lo + hi);
}

// --------------------------------------------------------------------------
// Cylindrical chart (r, theta, z, p_r, p_theta, p_z)

/// Convert a flat-chart state to cylindrical canonical coordinates.
inline Vec6 cylindrical_from_cartesian(const PhasePoint& s) {
    const double rho = std::hypot(s.q(0), s.q(1));
    if (rho < 1e-12) throw AxisChartError("cylindrical chart: point on the vertical axis");
    Vec6 u;
    u(0) = rho;
    u(1) = std::atan2(s.q(1), s.q(0));
    u(2) = s.q(2);
    u(3) = (s.q(0) * s.p(0) + s.q(1) * s.p(1)) / rho;
    u(4) = s.q(0) * s.p(1) - s.q(1) * s.p(0);
    u(5) = s.p(2);
    return u;
}

inline PhasePoint cylindrical_to_cartesian(const Vec6& u) {
    const double r = u(0), th = u(1);
    if (r <= 0.0) throw AxisChartError("cylindrical chart: r <= 0");
    PhasePoint s;
    s.q = Vec3(r * std::cos(th), r * std::sin(th), u(2));
    s.p = Vec3(u(3) * std::cos(th) - (u(4) / r) * std::sin(th),
               u(3) * std::sin(th) + (u(4) / r) * std::cos(th), u(5));
    return s;
}

/// Rotating-frame Hamiltonian in the cylindrical chart.
inline double rotating_h_cylindrical(const Vec6& u) {
    const double r = u(0), z = u(2), pr = u(3), pth = u(4), pz = u(5);
    const double R = std::sqrt(r * r + z * z);
    return 0.5 * (pr * pr + pth * pth / (r * r) + pz * pz) - 1.0 / R + pth;
}

/// X_H in the cylindrical chart.
inline Vec6 rotating_h_cylindrical_field(const Vec6& u) {
    const double r = u(0), z = u(2), pr = u(3), pth = u(4), pz = u(5);
    const double R = std::sqrt(r * r + z * z);
    const double R3 = R * R * R;
    Vec6 f;
    f(0) = pr;
    f(1) = pth / (r * r) + 1.0;
    f(2) = pz;
    f(3) = pth * pth / (r * r * r) - r / R3;
    f(4) = 0.0;
    f(5) = -z / R3;
    return f;
}

/// Jacobian of X_H in the cylindrical chart.
inline Mat6 rotating_h_cylindrical_jacobian(const Vec6& u) {
    const double r = u(0), z = u(2), pth = u(4);
    const double R = std::sqrt(r * r + z * z);
    const double R3 = R * R * R;
    const double R5 = R3 * R * R;
    Mat6 J = Mat6::Zero();
    J(0, 3) = 1.0;
    J(1, 0) = -2.0 * pth / (r * r * r);
    J(1, 4) = 1.0 / (r * r);
    J(2, 5) = 1.0;
    J(3, 0) = -3.0 * pth * pth / (r * r * r * r) + 3.0 * r * r / R5 - 1.0 / R3;
    J(3, 2) = 3.0 * r * z / R5;
    J(3, 4) = 2.0 * pth / (r * r * r);
    J(5, 0) = 3.0 * r * z / R5;
    J(5, 2) = 3.0 * z * z / R5 - 1.0 / R3;
    return J;
}

}  // namespace rkp
