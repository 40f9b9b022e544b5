// rkp/index_engine.hpp
// Robbin-Salamon index machinery: symplectic paths, crossing forms and
// signatures, the analytic paths of the circular and collision orbits,
// closed-form index formulas, and a numerical variational pipeline that
// re-derives the indices independently.
#pragma once

#include <Eigen/Dense>
#include <Eigen/SVD>
#include <algorithm>
#include <cmath>
#include <functional>
#include <memory>
#include <string>
#include <tuple>
#include <vector>

#include "rkp/core_dynamics.hpp"
#include "rkp/errors.hpp"
#include "rkp/half_integer.hpp"
#include "rkp/orbit_catalog.hpp"
#include "rkp/regularization.hpp"

namespace rkp {

using MatX = Eigen::MatrixXd;

/// Block-diagonal symplectic form J + J + ... with J = [[0,1],[-1,0]].
/// Basis convention everywhere: coordinates come in (momentum, position)
/// pairs, so omega(u, v) = sum_i (u_p v_q - u_q v_p) has this matrix.
inline MatX standard_omega(int dim) {
    if (dim % 2 != 0) throw NonSymplecticPathError("standard_omega: odd dimension");
    MatX O = MatX::Zero(dim, dim);
    for (int i = 0; i < dim; i += 2) {
        O(i, i + 1) = 1.0;
        O(i + 1, i) = -1.0;
    }
    return O;
}

// --------------------------------------------------------------------------
// Paths

/// Path of symplectic matrices over [0, tau] with Psi(0) = Id. Analytic
/// paths carry exact crossing times and exact derivatives; sampled paths
/// expose an evaluator (accurate to integrator tolerance) and are scanned.
struct SymplecticPath {
    int dim = 4;
    double tau = 0.0;
    std::string name;
    bool analytic = false;
    std::function<MatX(double)> eval;
    std::function<MatX(double)> deriv;      // empty: finite differences
    std::vector<double> exact_crossings;    // analytic paths only, sorted
};

struct RsConfig {
    int grid = 2048;               // scan samples over the whole interval
    double dip_gate = 1e-4;        // refined minima above this are discarded
    double kernel_tol = 1e-7;      // singular values below this span the kernel
    double time_tol = 1e-10;       // refinement width in t
    double fd_step = 1e-6;         // centered-difference step for derivatives
    double symplectic_tol = 1e-8;  // ||Psi^T O Psi - O|| acceptance
    double eig_zero = 1e-5;        // relative zero threshold for form eigenvalues
};

struct Crossing {
    double t = 0.0;
    MatX kernel;     // columns: kernel basis of Psi(t) - Id
    MatX form;       // crossing form Q restricted to the kernel, symmetrized
    int signature = 0;
    enum class Endpoint { Interior, Start, End } endpoint = Endpoint::Interior;
};

struct RsResult {
    HalfInteger index = HalfInteger(0);
    std::vector<Crossing> crossings;
    std::vector<std::string> notes;  // skipped near-crossings and the like
};

namespace detail {

inline int form_signature(const MatX& Q, double eig_zero) {
    Eigen::SelfAdjointEigenSolver<MatX> es(Q);
    const auto& ev = es.eigenvalues();
    const double thresh = eig_zero * std::max(1.0, ev.cwiseAbs().maxCoeff());
    int sig = 0;
    for (Eigen::Index i = 0; i < ev.size(); ++i) {
        if (ev(i) > thresh) ++sig;
        if (ev(i) < -thresh) --sig;
    }
    return sig;
}

inline double smallest_singular_value(const MatX& A) {
    return Eigen::JacobiSVD<MatX>(A).singularValues().minCoeff();
}

/// Psi_dot at time t: exact derivative when available, else second-order
/// differences kept inside [0, tau].
inline MatX path_derivative(const SymplecticPath& p, double t, double h) {
    if (p.deriv) return p.deriv(t);
    if (t < h) return (-3.0 * p.eval(t) + 4.0 * p.eval(t + h) - p.eval(t + 2.0 * h)) / (2.0 * h);
    if (t > p.tau - h)
        return (3.0 * p.eval(t) - 4.0 * p.eval(t - h) + p.eval(t - 2.0 * h)) / (2.0 * h);
    return (p.eval(t + h) - p.eval(t - h)) / (2.0 * h);
}

/// Crossing data at a located time: kernel from the SVD of Psi(t) - Id
/// (identity basis when the kernel is everything, so the form appears in
/// the standard basis), form Q = ker^T Omega Psi_dot ker, signature.
inline Crossing make_crossing(const SymplecticPath& p, const MatX& O, double t,
                              Crossing::Endpoint ep, const RsConfig& cfg) {
    const MatX A = p.eval(t) - MatX::Identity(p.dim, p.dim);
    Eigen::JacobiSVD<MatX> svd(A, Eigen::ComputeFullV);
    const auto& sv = svd.singularValues();
    std::vector<int> idx;
    for (Eigen::Index i = 0; i < sv.size(); ++i)
        if (sv(i) < cfg.kernel_tol) idx.push_back(static_cast<int>(i));
    Crossing c;
    c.t = t;
    c.endpoint = ep;
    if (static_cast<int>(idx.size()) == p.dim) {
        c.kernel = MatX::Identity(p.dim, p.dim);
    } else {
        c.kernel.resize(p.dim, static_cast<Eigen::Index>(idx.size()));
        for (std::size_t j = 0; j < idx.size(); ++j) c.kernel.col(j) = svd.matrixV().col(idx[j]);
    }
    const MatX dPsi = path_derivative(p, t, cfg.fd_step);
    MatX Q = c.kernel.transpose() * O * dPsi * c.kernel;
    Q = 0.5 * (Q + Q.transpose()).eval();
    c.form = Q;
    c.signature = form_signature(Q, cfg.eig_zero);
    return c;
}

/// Golden-section minimization of sigma_min(Psi(t) - Id) on [lo, hi].
inline double refine_minimum(const SymplecticPath& p, double lo, double hi, double width) {
    const double phi = 0.5 * (std::sqrt(5.0) - 1.0);
    const MatX I = MatX::Identity(p.dim, p.dim);
    auto f = [&](double t) { return smallest_singular_value(p.eval(t) - I); };
    double a = lo, b = hi;
    double x1 = b - phi * (b - a), x2 = a + phi * (b - a);
    double f1 = f(x1), f2 = f(x2);
    for (int it = 0; it < 200 && (b - a) > width; ++it) {
        if (f1 < f2) {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - phi * (b - a);
            f1 = f(x1);
        } else {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + phi * (b - a);
            f2 = f(x2);
        }
    }
    return f1 < f2 ? x1 : x2;
}

}  // namespace detail

/// Robbin-Salamon index of a path: half the signature of the crossing form
/// at each endpoint crossing plus the full signature at interior crossings.
/// Analytic paths use their exact crossing times; sampled paths are scanned
/// on a uniform grid, candidate minima of sigma_min(Psi - Id) are refined,
/// and refined minima that stay above the kernel tolerance are dropped as
/// near-crossings.
inline RsResult rs_index(const SymplecticPath& p, const RsConfig& cfg = {}) {
    if (!p.eval) throw NonSymplecticPathError("rs_index: path has no evaluator");
    const MatX I = MatX::Identity(p.dim, p.dim);
    const MatX O = standard_omega(p.dim);
    if ((p.eval(0.0) - I).cwiseAbs().maxCoeff() > cfg.symplectic_tol)
        throw NonSymplecticPathError("rs_index: Psi(0) != Id");

    RsResult out;
    std::vector<double> interior;
    bool end_is_crossing = false;

    if (p.analytic && !p.exact_crossings.empty()) {
        for (double t : p.exact_crossings) {
            if (t <= p.tau * 1e-14) continue;  // start crossing handled below
            if (t > p.tau * (1.0 + 1e-12)) continue;
            if (std::abs(t - p.tau) <= p.tau * 1e-12)
                end_is_crossing = true;
            else
                interior.push_back(t);
        }
    } else {
        // Uniform scan of sigma_min, symplecticity audit on the same grid.
        const int n = std::max(cfg.grid, 16);
        std::vector<double> sigma(static_cast<std::size_t>(n) + 1);
        double worst = 0.0;
        for (int i = 0; i <= n; ++i) {
            const double t = p.tau * static_cast<double>(i) / n;
            const MatX Psi = p.eval(t);
            sigma[static_cast<std::size_t>(i)] = detail::smallest_singular_value(Psi - I);
            worst = std::max(worst, (Psi.transpose() * O * Psi - O).cwiseAbs().maxCoeff());
        }
        if (worst > cfg.symplectic_tol)
            throw NonSymplecticPathError("rs_index: path loses symplecticity, defect = " +
                                         std::to_string(worst));
        for (int i = 1; i < n; ++i) {
            const auto si = sigma[static_cast<std::size_t>(i)];
            if (si > sigma[static_cast<std::size_t>(i - 1)] ||
                si > sigma[static_cast<std::size_t>(i + 1)])
                continue;
            const double lo = p.tau * static_cast<double>(i - 1) / n;
            const double hi = p.tau * static_cast<double>(i + 1) / n;
            const double t_star = detail::refine_minimum(p, lo, hi, cfg.time_tol);
            const double s_star =
                detail::smallest_singular_value(p.eval(t_star) - I);
            if (s_star >= cfg.dip_gate) continue;
            if (s_star >= cfg.kernel_tol) {
                out.notes.push_back("near-crossing at t = " + std::to_string(t_star) +
                                    " (sigma = " + std::to_string(s_star) + "), not counted");
                continue;
            }
            if (t_star <= p.tau * 1e-9) continue;  // the start crossing re-found
            if (t_star >= p.tau * (1.0 - 1e-9)) {
                end_is_crossing = true;
                continue;
            }
            interior.push_back(t_star);
        }
        // A grid node can seed the same crossing from both sides; collapse.
        std::sort(interior.begin(), interior.end());
        std::vector<double> dedup;
        for (double t : interior) {
            if (!dedup.empty() && t - dedup.back() < 1e3 * cfg.time_tol) continue;
            dedup.push_back(t);
        }
        interior.swap(dedup);
        if (!end_is_crossing &&
            sigma[static_cast<std::size_t>(n)] < cfg.kernel_tol)
            end_is_crossing = true;

        // Isolation audit. A path whose kernel persists on an interval (a
        // degenerate direction along a critical manifold, say) has no
        // meaningful crossing sum; detect that instead of summing noise.
        int kernel_nodes = 0;
        for (int i = 1; i < n; ++i)
            if (sigma[static_cast<std::size_t>(i)] < cfg.kernel_tol) ++kernel_nodes;
        if (kernel_nodes > n / 8)
            throw CrossingIsolationError(
                "rs_index: Psi(t) - Id stays singular on a positive-measure set (" +
                std::to_string(kernel_nodes) + " of " + std::to_string(n) + " grid nodes)");
        std::vector<double> knots;
        knots.push_back(0.0);
        knots.insert(knots.end(), interior.begin(), interior.end());
        knots.push_back(p.tau);
        for (std::size_t i = 1; i < knots.size(); ++i) {
            const double mid = 0.5 * (knots[i - 1] + knots[i]);
            if (detail::smallest_singular_value(p.eval(mid) - I) < cfg.kernel_tol)
                throw CrossingIsolationError("rs_index: crossing at t = " +
                                             std::to_string(knots[i - 1]) +
                                             " is not isolated (kernel persists at t = " +
                                             std::to_string(mid) + ")");
        }
    }

    for (std::size_t i = 1; i < interior.size(); ++i)
        if (interior[i] - interior[i - 1] < 1e4 * cfg.time_tol)
            throw CrossingIsolationError("rs_index: crossings at t = " +
                                         std::to_string(interior[i - 1]) + " and t = " +
                                         std::to_string(interior[i]) + " are not isolated");

    int doubled = 0;
    {
        Crossing c0 = detail::make_crossing(p, O, 0.0, Crossing::Endpoint::Start, cfg);
        doubled += c0.signature;
        out.crossings.push_back(std::move(c0));
    }
    for (double t : interior) {
        Crossing c = detail::make_crossing(p, O, t, Crossing::Endpoint::Interior, cfg);
        if (c.kernel.cols() == 0) {
            out.notes.push_back("crossing at t = " + std::to_string(t) +
                                " vanished under the kernel tolerance");
            continue;
        }
        doubled += 2 * c.signature;
        out.crossings.push_back(std::move(c));
    }
    if (end_is_crossing) {
        Crossing ce = detail::make_crossing(p, O, p.tau, Crossing::Endpoint::End, cfg);
        doubled += ce.signature;
        out.crossings.push_back(std::move(ce));
    }
    out.index = HalfInteger::halves(doubled);
    return out;
}

// --------------------------------------------------------------------------
// Analytic paths

namespace detail {

/// exp(t [[0,-b],[a,0]]) with ab > 0: an elliptic rotation of angular speed
/// nu = sqrt(ab).
inline Eigen::Matrix2d elliptic_block(double a, double b, double t) {
    const double nu = std::sqrt(a * b);
    Eigen::Matrix2d m;
    m << std::cos(nu * t), -(b / nu) * std::sin(nu * t), (a / nu) * std::sin(nu * t),
        std::cos(nu * t);
    return m;
}

inline Eigen::Matrix2d elliptic_block_deriv(double a, double b, double t) {
    const double nu = std::sqrt(a * b);
    Eigen::Matrix2d m;
    m << -nu * std::sin(nu * t), -b * std::cos(nu * t), a * std::cos(nu * t),
        -nu * std::sin(nu * t);
    return m;
}

inline std::vector<double> lattice_crossings(double spacing, double tau) {
    std::vector<double> out;
    for (int j = 0; spacing * j <= tau * (1.0 + 1e-12); ++j) out.push_back(spacing * j);
    return out;
}

}  // namespace detail

/// Generator of the linearized circular-orbit flow in the planar frame,
/// with w = sign/sqrt(-2E).
inline Eigen::Matrix4d psi_h_generator(double E, int sign) {
    const double w = static_cast<double>(sign) / std::sqrt(-2.0 * E);
    Eigen::Matrix4d L = Eigen::Matrix4d::Zero();
    L(0, 1) = -1.0 / std::pow(w, 4);
    L(1, 0) = 1.0 / (w * w);
    L(2, 3) = -1.0 / std::pow(w, 6);
    L(3, 2) = 1.0;
    return L;
}

/// Generator of the linearized regularized Kepler flow transverse to the
/// collision orbit, block [[0,-1],[r^2,0]] on each (y_i, x_i) pair.
inline Eigen::Matrix4d psi_ke_generator(double r) {
    Eigen::Matrix4d L = Eigen::Matrix4d::Zero();
    L(0, 1) = -1.0;
    L(1, 0) = r * r;
    L(2, 3) = -1.0;
    L(3, 2) = r * r;
    return L;
}

/// Generator of the transverse rotation flow: simultaneous rotation of both
/// coordinate planes, squaring to -Id.
inline Eigen::Matrix4d psi_l_generator() {
    Eigen::Matrix4d M = Eigen::Matrix4d::Zero();
    M(0, 2) = -1.0;
    M(1, 3) = -1.0;
    M(2, 0) = 1.0;
    M(3, 1) = 1.0;
    return M;
}

/// Psi_H over N periods of the circular orbit: exp(t L4), crossings spaced
/// 2 pi |w|^3 = 2 pi / (-2E)^(3/2).
inline SymplecticPath path_psi_h(double E, int sign, int N) {
    if (E >= 0.0) throw EnergyRangeError("path_psi_h: E must be negative");
    const double w = static_cast<double>(sign) / std::sqrt(-2.0 * E);
    const double tau = N * circular_period(E, sign);
    SymplecticPath p;
    p.dim = 4;
    p.tau = tau;
    p.name = "Psi_H";
    p.analytic = true;
    p.eval = [w](double t) {
        MatX m = MatX::Zero(4, 4);
        m.block<2, 2>(0, 0) = detail::elliptic_block(1.0 / (w * w), 1.0 / std::pow(w, 4), t);
        m.block<2, 2>(2, 2) = detail::elliptic_block(1.0, 1.0 / std::pow(w, 6), t);
        return m;
    };
    p.deriv = [w](double t) {
        MatX m = MatX::Zero(4, 4);
        m.block<2, 2>(0, 0) =
            detail::elliptic_block_deriv(1.0 / (w * w), 1.0 / std::pow(w, 4), t);
        m.block<2, 2>(2, 2) = detail::elliptic_block_deriv(1.0, 1.0 / std::pow(w, 6), t);
        return m;
    };
    p.exact_crossings = detail::lattice_crossings(2.0 * M_PI * std::pow(std::abs(w), 3), tau);
    return p;
}

/// Psi_{K_E} over [0, 2 pi N / r]: crossings spaced 2 pi / r, including both
/// endpoints.
inline SymplecticPath path_psi_ke(double r, int N) {
    SymplecticPath p;
    p.dim = 4;
    p.tau = 2.0 * M_PI * N / r;
    p.name = "Psi_KE";
    p.analytic = true;
    p.eval = [r](double t) {
        MatX m = MatX::Zero(4, 4);
        m.block<2, 2>(0, 0) = detail::elliptic_block(r * r, 1.0, t);
        m.block<2, 2>(2, 2) = detail::elliptic_block(r * r, 1.0, t);
        return m;
    };
    p.deriv = [r](double t) {
        MatX m = MatX::Zero(4, 4);
        m.block<2, 2>(0, 0) = detail::elliptic_block_deriv(r * r, 1.0, t);
        m.block<2, 2>(2, 2) = detail::elliptic_block_deriv(r * r, 1.0, t);
        return m;
    };
    p.exact_crossings = detail::lattice_crossings(2.0 * M_PI / r, p.tau);
    return p;
}

/// Psi_L over [0, 2 pi N]: the loop cos(t) Id + sin(t) M, crossings 2 pi Z,
/// every crossing form of signature zero.
inline SymplecticPath path_psi_l(int N) {
    SymplecticPath p;
    p.dim = 4;
    p.tau = 2.0 * M_PI * N;
    p.name = "Psi_L";
    p.analytic = true;
    const Eigen::Matrix4d M = psi_l_generator();
    p.eval = [M](double t) {
        return MatX(std::cos(t) * Eigen::Matrix4d::Identity() + std::sin(t) * M);
    };
    p.deriv = [M](double t) {
        return MatX(-std::sin(t) * Eigen::Matrix4d::Identity() + std::cos(t) * M);
    };
    p.exact_crossings = detail::lattice_crossings(2.0 * M_PI, p.tau);
    return p;
}

/// Linearized Delaunay flow Phi(t) = Id + t N in coordinates ordered
/// (l, p_l, g, p_g, theta, p_theta), over the rotating-frame return time
/// 2 pi l. Psi(tau) - Id has constant rank one, so this path has no
/// isolated crossings; it feeds the Morse-Bott analysis, not rs_index.
inline SymplecticPath path_delaunay_phi(int k, int l) {
    const FamilyId id(k, l);
    const double p_l = resonance_action(id.k, id.l);
    SymplecticPath p;
    p.dim = 6;
    p.tau = 2.0 * M_PI * id.l;
    p.name = "Delaunay-Phi";
    p.analytic = true;
    const double rate = -3.0 / std::pow(p_l, 4);
    p.eval = [rate](double t) {
        MatX m = MatX::Identity(6, 6);
        m(0, 1) = rate * t;
        return m;
    };
    p.deriv = [rate](double) {
        MatX m = MatX::Zero(6, 6);
        m(0, 1) = rate;
        return m;
    };
    return p;
}

/// Pointwise product path t -> A(t) B(t) over the shorter of the two
/// intervals; used for the additivity property.
inline SymplecticPath product_path(const SymplecticPath& A, const SymplecticPath& B) {
    if (A.dim != B.dim) throw NonSymplecticPathError("product_path: dimension mismatch");
    SymplecticPath p;
    p.dim = A.dim;
    p.tau = std::min(A.tau, B.tau);
    p.name = A.name + "*" + B.name;
    p.analytic = false;
    auto ea = A.eval, eb = B.eval;
    p.eval = [ea, eb](double t) { return MatX(ea(t) * eb(t)); };
    if (A.deriv && B.deriv) {
        auto da = A.deriv, db = B.deriv;
        p.deriv = [ea, eb, da, db](double t) { return MatX(da(t) * eb(t) + ea(t) * db(t)); };
    }
    return p;
}

/// Truncation of a path to [0, T].
inline SymplecticPath truncated_path(const SymplecticPath& src, double T) {
    SymplecticPath p = src;
    p.tau = T;
    p.exact_crossings.clear();
    for (double t : src.exact_crossings)
        if (t <= T * (1.0 + 1e-12)) p.exact_crossings.push_back(t);
    return p;
}

/// Time-reparametrized copy: eval(t) = src.eval(phi(t)) with phi monotone,
/// phi(0) = 0, phi(new_tau) = src.tau. Scanned, not exact.
inline SymplecticPath warped_path(const SymplecticPath& src, std::function<double(double)> phi,
                                  std::function<double(double)> dphi, double new_tau) {
    SymplecticPath p;
    p.dim = src.dim;
    p.tau = new_tau;
    p.name = src.name + "-warped";
    p.analytic = false;
    auto ev = src.eval;
    p.eval = [ev, phi](double t) { return ev(phi(t)); };
    if (src.deriv && dphi) {
        auto de = src.deriv;
        p.deriv = [de, phi, dphi](double t) { return MatX(dphi(t) * de(phi(t))); };
    }
    return p;
}

// --------------------------------------------------------------------------
// Closed forms

/// mu_pm = R/(R + sign) with R = (-2E)^(3/2); the rotation number of the
/// linearized circular-orbit flow per rotating-frame period.
inline double circular_rotation_number(double E, int sign) {
    if (E >= 0.0) throw EnergyRangeError("circular_rotation_number: E must be negative");
    const double R = std::pow(-2.0 * E, 1.5);
    const double denom = R + static_cast<double>(sign);
    if (std::abs(denom) < 1e-13)
        throw ResonantEnergyError("circular_rotation_number: zero rotating-frame frequency");
    return R / denom;
}

/// mu_CZ(gamma_pm^N) = 2 + 4 floor(N mu_pm). Degenerate covers (N mu_pm an
/// integer, i.e. resonant Kepler energy) are rejected.
inline HalfInteger cz_circular(double E, int sign, int N) {
    if (N < 1) throw InvalidOrbitError("cz_circular: cover must be >= 1");
    const double x = N * circular_rotation_number(E, sign);
    if (std::abs(x - std::round(x)) < 1e-9)
        throw ResonantEnergyError("cz_circular: degenerate cover (N mu = " +
                                  std::to_string(x) + " is an integer)");
    return HalfInteger(2 + 4 * static_cast<std::int64_t>(std::floor(x)));
}

/// mu_CZ(gamma_{c pm}^N) = 4N for every cover.
inline HalfInteger cz_collision(int N) {
    if (N < 1) throw InvalidOrbitError("cz_collision: cover must be >= 1");
    return HalfInteger(4 * static_cast<std::int64_t>(N));
}

/// mu_RS of the (k,l) torus family: 4k - 1/2.
inline HalfInteger rs_family(int k, int l) {
    const FamilyId id(k, l);
    return HalfInteger::halves(8 * static_cast<std::int64_t>(id.k) - 1);
}

/// The collision-orbit index split into its two analytic factors,
/// (mu(Psi_KE), mu(Psi_L), sum), each term through rs_index.
inline std::tuple<HalfInteger, HalfInteger, HalfInteger> decomposition_index(
    double E, int N, const RsConfig& cfg = {}) {
    if (E >= 0.0) throw EnergyRangeError("decomposition_index: E must be negative");
    const double r = std::sqrt(-2.0 * E);
    const HalfInteger a = rs_index(path_psi_ke(r, N), cfg).index;
    const HalfInteger b = rs_index(path_psi_l(N), cfg).index;
    return {a, b, a + b};
}

// --------------------------------------------------------------------------
// Frames

/// Symplectic frame along the planar circular orbit in cylindrical
/// coordinates (r, theta, z, p_r, p_theta, p_z). Columns: X1..X4 span the
/// contact structure with Gram matrix exactly the standard Omega, N1, N2
/// complete the basis. Constant in t by rotational symmetry.
struct PlanarFrame {
    Eigen::Matrix<double, 6, 6> F = Eigen::Matrix<double, 6, 6>::Zero();
    double omega0 = 0.0;
};

inline PlanarFrame frame_planar(double E, int sign, double /*t*/ = 0.0) {
    if (E >= 0.0) throw EnergyRangeError("frame_planar: E must be negative");
    PlanarFrame fr;
    const double w = static_cast<double>(sign) / std::sqrt(-2.0 * E);
    fr.omega0 = w;
    auto& F = fr.F;
    // X1 = d_theta + (1/w) d_{p_r}
    F(1, 0) = 1.0;
    F(3, 0) = 1.0 / w;
    // X2 = w d_r
    F(0, 1) = w;
    // X3 = d_{p_z}, X4 = d_z
    F(5, 2) = 1.0;
    F(2, 3) = 1.0;
    // N1 = (1/w) d_theta
    F(1, 4) = 1.0 / w;
    // N2 = -(w d_{p_theta} + w^2 d_r)
    F(0, 5) = -w * w;
    F(4, 5) = -w;
    return fr;
}

/// Frame transverse to the collision orbit in the sphere chart
/// (x0..x3, y0..y3): the constant coordinate directions
/// (d_{y1}, d_{x1}, d_{y2}, d_{x2}).
struct CollisionFrame {
    Eigen::Matrix<double, 8, 4> F = Eigen::Matrix<double, 8, 4>::Zero();
    std::array<int, 4> indices{5, 1, 6, 2};
};

inline CollisionFrame frame_collision(double /*t*/ = 0.0) {
    CollisionFrame fr;
    for (int j = 0; j < 4; ++j) fr.F(fr.indices[static_cast<std::size_t>(j)], j) = 1.0;
    return fr;
}

// --------------------------------------------------------------------------
// Numeric pipeline

namespace detail {

/// Dense record of an ODE trajectory over [0, tau]: states stored at grid
/// nodes, arbitrary times reached by a short re-integration from the node
/// below. Keeps the numeric paths evaluable to integrator accuracy.
class DenseTrajectory {
  public:
    using System = std::function<void(const OdeState&, OdeState&, double)>;

    DenseTrajectory(System sys, OdeState x0, double tau, int grid, IntegratorConfig cfg)
        : sys_(std::move(sys)), tau_(tau), cfg_(cfg) {
        grid = std::max(grid, 2);
        times_.reserve(static_cast<std::size_t>(grid) + 1);
        states_.reserve(static_cast<std::size_t>(grid) + 1);
        times_.push_back(0.0);
        states_.push_back(x0);
        double dt = 0.0;
        OdeState x = x0;
        for (int i = 1; i <= grid; ++i) {
            const double t1 = tau * static_cast<double>(i) / grid;
            integrate_segment(sys_, x, times_.back(), t1, cfg_, dt);
            times_.push_back(t1);
            states_.push_back(x);
        }
    }

    OdeState eval(double t) const {
        t = std::clamp(t, 0.0, tau_);
        const auto it = std::upper_bound(times_.begin(), times_.end(), t);
        const std::size_t i = (it == times_.begin()) ? 0 : static_cast<std::size_t>(it - times_.begin()) - 1;
        OdeState x = states_[i];
        double dt = 0.0;
        integrate_segment(sys_, x, times_[i], t, cfg_, dt);
        return x;
    }

    double tau() const { return tau_; }

  private:
    System sys_;
    double tau_ = 0.0;
    IntegratorConfig cfg_;
    std::vector<double> times_;
    std::vector<OdeState> states_;
};

}  // namespace detail

/// Sampled path for a planar circular orbit: the 6x6 cylindrical
/// variational flow of the rotating Hamiltonian, conjugated by the constant
/// planar frame and restricted to the X-block.
inline SymplecticPath numeric_path_circular(double E, int sign, int N,
                                            const IntegratorConfig& icfg = {},
                                            int grid_per_period = 256) {
    const double tau = N * circular_period(E, sign);
    const Vec6 s0 = circular_orbit_state(E, sign, 0.0).cylindrical;

    auto sys = [](const detail::OdeState& z, detail::OdeState& dz, double) {
        Eigen::Map<const Vec6> u(z.data());
        Eigen::Map<const Mat6> M(z.data() + 6);
        const Vec6 f = rotating_h_cylindrical_field(u);
        const Mat6 A = rotating_h_cylindrical_jacobian(u);
        dz.resize(42);
        Eigen::Map<Vec6>(dz.data()) = f;
        Eigen::Map<Mat6>(dz.data() + 6) = A * M;
    };
    detail::OdeState z0(42, 0.0);
    Eigen::Map<Vec6>(z0.data()) = s0;
    Eigen::Map<Mat6>(z0.data() + 6) = Mat6::Identity();

    auto dense = std::make_shared<detail::DenseTrajectory>(sys, z0, tau, grid_per_period * N, icfg);
    const PlanarFrame fr = frame_planar(E, sign);
    Eigen::FullPivLU<Eigen::Matrix<double, 6, 6>> lu(fr.F);
    if (!lu.isInvertible()) throw FrameDegeneracyError("numeric_path_circular: frame not invertible");
    const Eigen::Matrix<double, 6, 6> Finv = lu.inverse();
    const Eigen::Matrix<double, 6, 6> F = fr.F;

    SymplecticPath p;
    p.dim = 4;
    p.tau = tau;
    p.name = std::string("numeric-") + (sign > 0 ? "retrograde" : "direct");
    p.analytic = false;
    p.eval = [dense, F, Finv](double t) {
        const detail::OdeState z = dense->eval(t);
        Eigen::Map<const Mat6> M(z.data() + 6);
        const Mat6 red = Finv * M * F;
        return MatX(red.topLeftCorner<4, 4>());
    };
    return p;
}

/// Sampled path for the regularized Kepler factor along a collision orbit:
/// the 8x8 variational flow of K_r on the unit-sphere chart restricted to
/// the transverse coordinate frame (y1, x1, y2, x2). branch_sign follows
/// collision_orbit; N covers of the geodesic period 2 pi / r.
inline SymplecticPath numeric_path_collision_kepler(double r, int branch_sign, int N,
                                                    const IntegratorConfig& icfg = {},
                                                    int grid_per_period = 256) {
    const double tau = 2.0 * M_PI * N / r;
    const CollisionSample start = collision_orbit(r, branch_sign, 0.0);

    auto sys = [r](const detail::OdeState& z, detail::OdeState& dz, double) {
        Eigen::Map<const Vec8> u(z.data());
        Eigen::Map<const Mat8> M(z.data() + 8);
        const Vec8 f = vector_field(HamiltonianId::MoserKr, Vec8(u), r);
        const Mat8 A = vector_field_jacobian(HamiltonianId::MoserKr, Vec8(u), r);
        dz.resize(72);
        Eigen::Map<Vec8>(dz.data()) = f;
        Eigen::Map<Mat8>(dz.data() + 8) = A * M;
    };
    detail::OdeState z0(72, 0.0);
    Eigen::Map<Vec8>(z0.data()) = start.sc.to_vec8();
    Eigen::Map<Mat8>(z0.data() + 8) = Mat8::Identity();

    auto dense = std::make_shared<detail::DenseTrajectory>(sys, z0, tau, grid_per_period * N, icfg);
    const CollisionFrame fr = frame_collision();
    const auto idx = fr.indices;

    SymplecticPath p;
    p.dim = 4;
    p.tau = tau;
    p.name = "numeric-collision-KE";
    p.analytic = false;
    p.eval = [dense, idx](double t) {
        const detail::OdeState z = dense->eval(t);
        Eigen::Map<const Mat8> M(z.data() + 8);
        MatX red(4, 4);
        for (int i = 0; i < 4; ++i)
            for (int j = 0; j < 4; ++j)
                red(i, j) = M(idx[static_cast<std::size_t>(i)], idx[static_cast<std::size_t>(j)]);
        return red;
    };
    return p;
}

/// Sampled path for the rotation factor: the linear system v' = M v
/// integrated numerically over [0, 2 pi N].
inline SymplecticPath numeric_path_collision_rotation(int N, const IntegratorConfig& icfg = {},
                                                      int grid_per_period = 256) {
    const double tau = 2.0 * M_PI * N;
    const Eigen::Matrix4d M = psi_l_generator();
    auto sys = [M](const detail::OdeState& z, detail::OdeState& dz, double) {
        Eigen::Map<const Eigen::Matrix4d> P(z.data());
        dz.resize(16);
        Eigen::Map<Eigen::Matrix4d>(dz.data()) = M * P;
    };
    detail::OdeState z0(16, 0.0);
    Eigen::Map<Eigen::Matrix4d>(z0.data()) = Eigen::Matrix4d::Identity();

    auto dense = std::make_shared<detail::DenseTrajectory>(sys, z0, tau, grid_per_period * N, icfg);
    SymplecticPath p;
    p.dim = 4;
    p.tau = tau;
    p.name = "numeric-collision-L";
    p.analytic = false;
    p.eval = [dense](double t) {
        const detail::OdeState z = dense->eval(t);
        return MatX(Eigen::Map<const Eigen::Matrix4d>(z.data()));
    };
    return p;
}

/// Fully numerical Conley-Zehnder index of a catalog orbit: variational
/// integration, frame reduction, singular-value crossing detection,
/// signature summation. Families are rejected (their index is the
/// closed-form rs_family).
struct NumericCzResult {
    HalfInteger index = HalfInteger(0);
    std::vector<RsResult> parts;
};

inline NumericCzResult numeric_cz(const OrbitRecord& rec, const IntegratorConfig& icfg = {},
                                  RsConfig rcfg = {}) {
    NumericCzResult out;
    rcfg.grid = 2048 * rec.N;
    switch (rec.kind) {
        case OrbitKind::Retrograde:
        case OrbitKind::Direct: {
            const int sign = (rec.kind == OrbitKind::Retrograde) ? +1 : -1;
            RsResult r = rs_index(numeric_path_circular(rec.E, sign, rec.N, icfg), rcfg);
            out.index = r.index;
            out.parts.push_back(std::move(r));
            return out;
        }
        case OrbitKind::CollisionPlus:
        case OrbitKind::CollisionMinus: {
            const double r = std::sqrt(-2.0 * rec.c);
            const int branch = (rec.kind == OrbitKind::CollisionPlus) ? -1 : +1;
            RsResult a =
                rs_index(numeric_path_collision_kepler(r, branch, rec.N, icfg), rcfg);
            RsResult b = rs_index(numeric_path_collision_rotation(rec.N, icfg), rcfg);
            out.index = a.index + b.index;
            out.parts.push_back(std::move(a));
            out.parts.push_back(std::move(b));
            return out;
        }
        default:
            throw InvalidOrbitError("numeric_cz: only the four isolated orbits are supported");
    }
}

/// Closed-form index for any catalog record (dispatch helper for the CLI).
inline HalfInteger closed_form_index(const OrbitRecord& rec) {
    switch (rec.kind) {
        case OrbitKind::Retrograde: return cz_circular(rec.E, +1, rec.N);
        case OrbitKind::Direct: return cz_circular(rec.E, -1, rec.N);
        case OrbitKind::CollisionPlus:
        case OrbitKind::CollisionMinus: return cz_collision(rec.N);
        case OrbitKind::Family: return rs_family(rec.family->k, rec.family->l);
        case OrbitKind::OuterDirect: return cz_circular(rec.E, -1, rec.N);
    }
    throw InvalidOrbitError("closed_form_index: unknown orbit kind");
}

}  // namespace rkp
