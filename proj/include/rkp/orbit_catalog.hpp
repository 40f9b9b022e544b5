// rkp/orbit_catalog.hpp
// Periodic orbits of a fixed Jacobi energy surface c < -3/2: circular-orbit
// energies from the cubic 2E(c-E)^2 + 1 = 0, periods, parametrizations,
// resonance and bifurcation energies, genericity, family enumeration.
#pragma once

#include <algorithm>
#include <cmath>
#include <numeric>
#include <optional>
#include <string>
#include <vector>

#include "rkp/core_dynamics.hpp"
#include "rkp/errors.hpp"
#include "rkp/half_integer.hpp"

namespace rkp {

enum class OrbitKind {
    Retrograde,      // planar circular, L3 > 0, c = E + 1/sqrt(-2E)
    Direct,          // planar circular, L3 < 0, c = E - 1/sqrt(-2E)
    OuterDirect,     // third cubic root, excluded from the catalog
    CollisionPlus,   // vertical collision orbit on the positive q3 axis
    CollisionMinus,  // mirror orbit on the negative q3 axis
    Family,          // Morse-Bott torus family of (k:l) resonant ellipses
};

inline const char* orbit_kind_name(OrbitKind k) {
    switch (k) {
        case OrbitKind::Retrograde: return "retrograde";
        case OrbitKind::Direct: return "direct";
        case OrbitKind::OuterDirect: return "outer-direct";
        case OrbitKind::CollisionPlus: return "collision+";
        case OrbitKind::CollisionMinus: return "collision-";
        case OrbitKind::Family: return "family";
    }
    return "?";
}

/// Coprime resonance label; (k,l) and (mk,ml) name the same Kepler energy,
/// so construction reduces and remembers whether it had to.
struct FamilyId {
    int k = 1;
    int l = 1;
    bool was_reduced = false;

    FamilyId() = default;
    FamilyId(int k_in, int l_in) {
        if (k_in < 1 || l_in < 1) throw InvalidOrbitError("FamilyId: k, l must be >= 1");
        const int g = std::gcd(k_in, l_in);
        k = k_in / g;
        l = l_in / g;
        was_reduced = (g != 1);
    }
    double ratio() const { return static_cast<double>(k) / static_cast<double>(l); }
    friend bool operator==(const FamilyId& a, const FamilyId& b) {
        return a.k == b.k && a.l == b.l;
    }
};

/// One catalog entry. `period` is the rotating-frame period of the simple
/// orbit; iteration data lives in the cover number N. `index` is filled by
/// the index engine, not here.
struct OrbitRecord {
    OrbitKind kind = OrbitKind::Retrograde;
    std::optional<FamilyId> family;
    double E = 0.0;
    double c = 0.0;
    double period = 0.0;
    int N = 1;
    std::optional<HalfInteger> index;

    std::string label() const {
        std::string s = orbit_kind_name(kind);
        if (family) s += "(" + std::to_string(family->k) + "," + std::to_string(family->l) + ")";
        if (N != 1) s += "^" + std::to_string(N);
        return s;
    }
};

// --------------------------------------------------------------------------
// Circular-orbit energies

/// Real roots of 2E(c-E)^2 + 1 = 0, ascending, with their kind labels.
/// Three roots iff c < -3/2; exactly at c = -3/2 the direct and outer roots
/// coincide at E = -1/2 (critical_double is set); above, only the
/// retrograde root survives.
struct CircularRoots {
    std::vector<double> roots;
    std::vector<OrbitKind> labels;
    bool critical_double = false;

    double retrograde() const { return roots.front(); }
    double direct() const {
        if (roots.size() < 2) throw EnergyRangeError("direct root requires c <= -3/2");
        return roots[1];
    }
    double outer() const {
        if (roots.size() < 3) throw EnergyRangeError("outer root requires c <= -3/2");
        return roots[2];
    }
};

namespace detail {

inline double circular_cubic(double c, double E) {
    const double d = c - E;
    return 2.0 * E * d * d + 1.0;
}

inline double circular_cubic_deriv(double c, double E) {
    return 2.0 * (c - E) * (c - 3.0 * E);
}

/// Bracketed bisection plus one Newton polish.
inline double circular_root(double c, double lo, double hi) {
    const bool lo_neg = circular_cubic(c, lo) < 0.0;
    for (int it = 0; it < 200; ++it) {
        const double mid = 0.5 * (lo + hi);
        if ((circular_cubic(c, mid) < 0.0) == lo_neg)
            lo = mid;
        else
            hi = mid;
        if (hi - lo < 1e-14 * std::max(1.0, std::abs(lo))) break;
    }
    double e = 0.5 * (lo + hi);
    const double dd = circular_cubic_deriv(c, e);
    if (dd != 0.0) {
        const double step = circular_cubic(c, e) / dd;
        if (std::abs(step) < (hi - lo) + 1e-12) e -= step;
    }
    return e;
}

}  // namespace detail

inline CircularRoots circular_energies(double c) {
    CircularRoots out;
    // Sign-change scan on a log-spaced grid of |E|. All roots lie in
    // (E_lo, 0): the retrograde root is below c and the others above.
    const double e_lo = std::min(c, -0.5) - 1.0 / std::sqrt(std::max(-2.0 * c, 1.0)) - 1.0;
    const double lg_lo = std::log(1e-9), lg_hi = std::log(-e_lo);
    const int n = 4096;
    double prev_e = -1e-9;
    double prev_f = detail::circular_cubic(c, prev_e);
    for (int i = 1; i <= n; ++i) {
        const double mag = std::exp(lg_lo + (lg_hi - lg_lo) * static_cast<double>(i) / n);
        const double e = -mag;
        const double f = detail::circular_cubic(c, e);
        if ((f < 0.0) != (prev_f < 0.0))
            out.roots.push_back(detail::circular_root(c, e, prev_e));
        prev_e = e;
        prev_f = f;
    }
    // A tangency at E = -1/2 (only at the critical energy) leaves no sign
    // change; insert the double root explicitly.
    if (std::abs(c + 1.5) < 1e-12 && out.roots.size() == 1) {
        out.roots.push_back(-0.5);
        out.roots.push_back(-0.5);
        out.critical_double = true;
    }
    std::sort(out.roots.begin(), out.roots.end());
    if (out.roots.size() == 3) {
        out.labels = {OrbitKind::Retrograde, OrbitKind::Direct, OrbitKind::OuterDirect};
    } else {
        out.labels.assign(out.roots.size(), OrbitKind::Retrograde);
    }
    return out;
}

/// Rotating-frame period 2*pi / ((-2E)^(3/2) + sign) of a circular orbit.
inline double circular_period(double E, int sign) {
    if (E >= 0.0) throw EnergyRangeError("circular_period: E must be negative");
    if (sign != 1 && sign != -1) throw InvalidOrbitError("circular_period: sign must be +1 or -1");
    const double R = std::pow(-2.0 * E, 1.5);
    const double denom = R + static_cast<double>(sign);
    if (std::abs(denom) < 1e-13)
        throw ResonantEnergyError("circular_period: orbit is at rest in the rotating frame");
    return 2.0 * M_PI / denom;
}

/// Explicit circular-orbit parametrization in cylindrical coordinates,
/// (r, theta, z, p_r, p_theta, p_z) = (w^2, (1/w^3 + 1) t, 0, 0, w, 0) with
/// w = sign/sqrt(-2E), plus its Cartesian image.
struct CircularState {
    Vec6 cylindrical = Vec6::Zero();
    PhasePoint cartesian;
};

inline CircularState circular_orbit_state(double E, int sign, double t) {
    if (E >= 0.0) throw EnergyRangeError("circular_orbit_state: E must be negative");
    if (sign != 1 && sign != -1)
        throw InvalidOrbitError("circular_orbit_state: sign must be +1 or -1");
    const double w = static_cast<double>(sign) / std::sqrt(-2.0 * E);
    CircularState out;
    out.cylindrical << w * w, (1.0 / (w * w * w) + 1.0) * t, 0.0, 0.0, w, 0.0;
    out.cartesian = cylindrical_to_cartesian(out.cylindrical);
    return out;
}

// --------------------------------------------------------------------------
// Resonances and families

/// Kepler energy of the (k:l) resonant ellipses, E_{k,l} = -(1/2)(k/l)^(2/3).
inline double resonance_energy(int k, int l) {
    const FamilyId id(k, l);
    return -0.5 * std::pow(id.ratio(), 2.0 / 3.0);
}

/// Delaunay action p_l = (l/k)^(1/3) = 1/sqrt(-2 E_{k,l}) of the (k:l)
/// resonant ellipses. The platform cbrt can be one ulp off on exact cubes
/// (cbrt(1/8) != 1/2 with this libm), so snap to an adjacent double whose
/// cube reproduces the ratio exactly.
inline double resonance_action(int k, int l) {
    const FamilyId id(k, l);
    const double q = static_cast<double>(id.l) / id.k;
    const double r = std::cbrt(q);
    for (const double cand : {r, std::nextafter(r, HUGE_VAL), std::nextafter(r, 0.0)})
        if (cand * cand * cand == q) return cand;
    return r;
}

/// Jacobi energies (c^-, c^+) = E_{k,l} -/+ 1/sqrt(-2 E_{k,l}) where the
/// family is born and dies against the circular orbits.
inline std::pair<double, double> bifurcation_energies(int k, int l) {
    const double E = resonance_energy(k, l);
    const double s = 1.0 / std::sqrt(-2.0 * E);
    return {E - s, E + s};
}

/// All coprime (k,l), k <= k_max, whose resonant energy lies strictly
/// between the direct and retrograde circular energies at Jacobi energy c;
/// equivalently k/l in the open ratio interval below. Sorted by k, then l.
inline std::vector<FamilyId> enumerate_families(double c, int k_max) {
    if (c >= -1.5) throw EnergyRangeError("enumerate_families: requires c < -3/2");
    if (k_max < 1) throw InvalidOrbitError("enumerate_families: k_max must be >= 1");
    const CircularRoots roots = circular_energies(c);
    const double lo = std::pow(-2.0 * roots.direct(), 1.5);      // smaller ratio
    const double hi = std::pow(-2.0 * roots.retrograde(), 1.5);  // larger ratio
    std::vector<FamilyId> out;
    for (int k = 1; k <= k_max; ++k) {
        const int l_min = std::max(1, static_cast<int>(std::ceil(static_cast<double>(k) / hi)));
        const int l_max = static_cast<int>(std::floor(static_cast<double>(k) / lo));
        for (int l = l_min; l <= l_max; ++l) {
            const double ratio = static_cast<double>(k) / l;
            if (ratio <= lo || ratio >= hi) continue;
            if (std::gcd(k, l) != 1) continue;
            out.push_back(FamilyId(k, l));
        }
    }
    std::sort(out.begin(), out.end(), [](const FamilyId& a, const FamilyId& b) {
        return a.k != b.k ? a.k < b.k : a.l < b.l;
    });
    return out;
}

// --------------------------------------------------------------------------
// Genericity

struct GenericityReport {
    bool generic = true;
    std::vector<NonGenericError::Offender> offenders;
};

namespace detail {

/// Register (k,l) as an offender if c is within tol of E_{k,l} or of either
/// bifurcation energy.
inline void genericity_check_pair(double c, int k, int l, double tol,
                                  std::vector<NonGenericError::Offender>& out) {
    if (std::gcd(k, l) != 1) return;
    const double E = resonance_energy(k, l);
    const auto [cm, cp] = bifurcation_energies(k, l);
    if (std::abs(c - E) <= tol) out.push_back({k, l, "resonance", E});
    if (std::abs(c - cm) <= tol) out.push_back({k, l, "birth", cm});
    if (std::abs(c - cp) <= tol) out.push_back({k, l, "death", cp});
}

}  // namespace detail

/// True iff no coprime (k,l) with k <= k_max has c within 1e-9 of E_{k,l}
/// or of c^-_{k,l} or c^+_{k,l}. Candidate l values per k are found by
/// inverting each of the three level equations for the ratio k/l.
inline GenericityReport is_generic(double c, int k_max) {
    if (k_max < 1) throw InvalidOrbitError("is_generic: k_max must be >= 1");
    const double tol = 1e-9;
    GenericityReport rep;

    // Critical ratios: c = E(rho) has one solution; c = c^+(rho) one
    // (both monotone in rho); c = c^-(rho) two when c < -3/2, and they are
    // exactly the family-interval endpoints.
    std::vector<double> critical;
    if (c < 0.0) critical.push_back(std::pow(-2.0 * c, 1.5));
    {
        // c^+(rho) = -(1/2) rho^(2/3) + rho^(-1/3) = c, decreasing in rho.
        double lo = 1e-9, hi = 1.0;
        auto cp = [](double rho) {
            return -0.5 * std::pow(rho, 2.0 / 3.0) + std::pow(rho, -1.0 / 3.0);
        };
        while (cp(hi) > c) hi *= 2.0;
        for (int it = 0; it < 200; ++it) {
            const double mid = 0.5 * (lo + hi);
            (cp(mid) > c ? lo : hi) = mid;
        }
        critical.push_back(0.5 * (lo + hi));
    }
    if (c < -1.5) {
        const CircularRoots roots = circular_energies(c);
        critical.push_back(std::pow(-2.0 * roots.direct(), 1.5));
        critical.push_back(std::pow(-2.0 * roots.retrograde(), 1.5));
    }

    for (int k = 1; k <= k_max; ++k) {
        for (double rho : critical) {
            const double l_star = static_cast<double>(k) / rho;
            const int l0 = static_cast<int>(std::floor(l_star));
            for (int l = std::max(1, l0 - 1); l <= l0 + 2; ++l)
                detail::genericity_check_pair(c, k, l, tol, rep.offenders);
        }
    }
    // Deduplicate (a pair can be flagged via several candidate ratios).
    std::sort(rep.offenders.begin(), rep.offenders.end(),
              [](const auto& a, const auto& b) {
                  return std::tie(a.k, a.l, a.kind) < std::tie(b.k, b.l, b.kind);
              });
    rep.offenders.erase(std::unique(rep.offenders.begin(), rep.offenders.end(),
                                    [](const auto& a, const auto& b) {
                                        return a.k == b.k && a.l == b.l && a.kind == b.kind;
                                    }),
                        rep.offenders.end());
    rep.generic = rep.offenders.empty();
    return rep;
}

// --------------------------------------------------------------------------
// Catalog

/// Kepler period of the energy-E ellipse, 2*pi/(-2E)^(3/2).
inline double kepler_period(double E) {
    if (E >= 0.0) throw EnergyRangeError("kepler_period: E must be negative");
    return 2.0 * M_PI / std::pow(-2.0 * E, 1.5);
}

/// Records for the covers of the four isolated orbits (N <= N_max) and one
/// record per Morse-Bott family with k <= k_max. Indices are left unfilled.
inline std::vector<OrbitRecord> catalog(double c, int N_max, int k_max) {
    if (c >= -1.5) throw EnergyRangeError("catalog: requires c < -3/2");
    if (N_max < 1 || k_max < 1) throw InvalidOrbitError("catalog: N_max, k_max must be >= 1");
    const GenericityReport rep = is_generic(c, k_max);
    if (!rep.generic) {
        std::string what = "catalog: non-generic Jacobi energy; offenders:";
        for (const auto& o : rep.offenders)
            what += " (" + std::to_string(o.k) + "," + std::to_string(o.l) + ")/" + o.kind;
        throw NonGenericError(what, rep.offenders);
    }

    const CircularRoots roots = circular_energies(c);
    std::vector<OrbitRecord> out;
    for (int N = 1; N <= N_max; ++N) {
        OrbitRecord retro;
        retro.kind = OrbitKind::Retrograde;
        retro.E = roots.retrograde();
        retro.c = c;
        retro.period = circular_period(retro.E, +1);
        retro.N = N;
        out.push_back(retro);

        OrbitRecord direct;
        direct.kind = OrbitKind::Direct;
        direct.E = roots.direct();
        direct.c = c;
        direct.period = circular_period(direct.E, -1);
        direct.N = N;
        out.push_back(direct);

        for (OrbitKind kind : {OrbitKind::CollisionPlus, OrbitKind::CollisionMinus}) {
            OrbitRecord col;
            col.kind = kind;
            col.E = c;  // L3 = 0 on the vertical axis
            col.c = c;
            col.period = kepler_period(c);
            col.N = N;
            out.push_back(col);
        }
    }
    for (const FamilyId& id : enumerate_families(c, k_max)) {
        OrbitRecord fam;
        fam.kind = OrbitKind::Family;
        fam.family = id;
        fam.E = resonance_energy(id.k, id.l);
        fam.c = c;
        fam.period = 2.0 * M_PI * id.l;  // l Kepler revolutions close the loop
        fam.N = 1;
        out.push_back(fam);
    }
    return out;
}

}  // namespace rkp
