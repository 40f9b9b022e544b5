// rkp/verify.hpp
// Named property suites shared by the command-line verify command and the
// test harness: conservation, poisson, regularization, index-agreement,
// morse-bott, ledger. Each suite runs a fixed set of properties and reports
// pass/fail with the first counterexample.
#pragma once

#include <cmath>
#include <cstdint>
#include <functional>
#include <numeric>
#include <sstream>
#include <string>
#include <vector>

#include "rkp/action_angle.hpp"
#include "rkp/core_dynamics.hpp"
#include "rkp/detail/rng.hpp"
#include "rkp/errors.hpp"
#include "rkp/index_engine.hpp"
#include "rkp/moduli_space.hpp"
#include "rkp/orbit_catalog.hpp"
#include "rkp/regularization.hpp"
#include "rkp/sh_ledger.hpp"

namespace rkp {

struct PropertyResult {
    std::string property;
    bool passed = true;
    std::string counterexample;  // empty when passed
};

struct SuiteResult {
    std::string name;
    std::vector<PropertyResult> checks;
    bool passed() const {
        for (const auto& c : checks)
            if (!c.passed) return false;
        return true;
    }
};

namespace detail {

/// Property accumulator: keeps the first counterexample only.
struct Property {
    PropertyResult res;
    explicit Property(std::string name) { res.property = std::move(name); }
    void require(bool ok, const std::function<std::string()>& counterexample) {
        if (!ok && res.passed) {
            res.passed = false;
            res.counterexample = counterexample();
        }
    }
};

inline std::string describe(const PhasePoint& s) {
    std::ostringstream os;
    os.precision(17);
    os << "q=(" << s.q.x() << "," << s.q.y() << "," << s.q.z() << ") p=(" << s.p.x() << ","
       << s.p.y() << "," << s.p.z() << ")";
    return os.str();
}

/// Random bound Kepler state, kept away from collinear degeneracy so the
/// orbit stays clear of the collision floor for every flow we test.
inline PhasePoint random_bound_state(Rng& rng) {
    for (int tries = 0; tries < 10000; ++tries) {
        PhasePoint s;
        s.q = rng.uniform(0.4, 2.2) * rng.unit_vector3();
        s.p = rng.uniform(0.1, 1.3) * rng.unit_vector3();
        const InvariantTriple iv = invariants(s);
        if (iv.E < -0.15 && iv.E > -1.6 && iv.L.norm() > 0.25) return s;
    }
    throw Error("random_bound_state: rejection sampling failed");
}

inline double levi_civita(int i, int j, int k) {
    if (i == j || j == k || i == k) return 0.0;
    return ((j - i) * (k - j) * (k - i) > 0) ? 1.0 : -1.0;
}

}  // namespace detail

// --------------------------------------------------------------------------
// conservation

inline SuiteResult verify_conservation(std::uint64_t seed = 12345, int n_states = 100,
                                       const IntegratorConfig& cfg = {.rtol = 1e-12,
                                                                      .atol = 1e-12}) {
    SuiteResult suite{"conservation", {}};
    detail::Property drift_e("kepler-flow-energy-drift");
    detail::Property drift_l("kepler-flow-angular-momentum-drift");
    detail::Property drift_a("kepler-flow-lrl-drift");
    detail::Property rotating("rotating-flow-invariants");
    const double tol = 1e-9;

    detail::Rng rng(seed);
    for (int i = 0; i < n_states; ++i) {
        const PhasePoint s0 = detail::random_bound_state(rng);
        const InvariantTriple iv0 = invariants(s0);
        const double T = kepler_period(iv0.E);

        const PhasePoint s1 = flow(HamiltonianId::KeplerE, s0, T, cfg);
        const InvariantTriple iv1 = invariants(s1);
        auto cex = [&](const char* what, double err) {
            return [&, what, err]() {
                std::ostringstream os;
                os.precision(17);
                os << what << " drift " << err << " at state " << detail::describe(s0);
                return os.str();
            };
        };
        const double de = std::abs(iv1.E - iv0.E) / std::max(std::abs(iv0.E), 1.0);
        const double dl = (iv1.L - iv0.L).norm() / std::max(iv0.L.norm(), 1.0);
        const double da = (iv1.A - iv0.A).norm() / std::max(iv0.A.norm(), 1.0);
        drift_e.require(de < tol, cex("E", de));
        drift_l.require(dl < tol, cex("L", dl));
        drift_a.require(da < tol, cex("A", da));

        const PhasePoint s2 = flow(HamiltonianId::RotatingH, s0, T, cfg);
        const InvariantTriple iv2 = invariants(s2);
        const double worst = std::max(
            {std::abs(iv2.E - iv0.E) / std::max(std::abs(iv0.E), 1.0),
             std::abs(iv2.L.z() - iv0.L.z()), std::abs(iv2.A.z() - iv0.A.z()),
             std::abs(iv2.L.norm() - iv0.L.norm()), std::abs(iv2.A.norm() - iv0.A.norm())});
        rotating.require(worst < tol, cex("rotating-frame invariant", worst));
    }
    suite.checks = {drift_e.res, drift_l.res, drift_a.res, rotating.res};
    return suite;
}

// --------------------------------------------------------------------------
// poisson

inline SuiteResult verify_poisson(std::uint64_t seed = 12345, int n_states = 100) {
    SuiteResult suite{"poisson", {}};
    detail::Property el("bracket-E-L");
    detail::Property ea("bracket-E-A");
    detail::Property al("bracket-A-L");
    detail::Property ll("bracket-L-L");
    detail::Property anti("bracket-antisymmetry");
    const double tol = 1e-6;

    const Observable E = obs_energy();
    const Observable L[3] = {obs_angular(0), obs_angular(1), obs_angular(2)};
    const Observable A[3] = {obs_lrl(0), obs_lrl(1), obs_lrl(2)};

    detail::Rng rng(seed);
    for (int n = 0; n < n_states; ++n) {
        const PhasePoint s = detail::random_bound_state(rng);
        const InvariantTriple iv = invariants(s);
        auto cex = [&](const std::string& what, double err) {
            return [&, what, err]() {
                std::ostringstream os;
                os.precision(17);
                os << what << " residual " << err << " at state " << detail::describe(s);
                return os.str();
            };
        };
        for (int i = 0; i < 3; ++i) {
            const double r1 = std::abs(poisson_bracket(E, L[i], s));
            el.require(r1 < tol, cex("{E,L_" + std::to_string(i) + "}", r1));
            const double r2 = std::abs(poisson_bracket(E, A[i], s));
            ea.require(r2 < tol, cex("{E,A_" + std::to_string(i) + "}", r2));
            for (int j = 0; j < 3; ++j) {
                double rhs_a = 0.0, rhs_l = 0.0;
                for (int k = 0; k < 3; ++k) {
                    rhs_a += detail::levi_civita(i, j, k) * iv.A(k);
                    rhs_l += detail::levi_civita(i, j, k) * iv.L(k);
                }
                const double r3 = std::abs(poisson_bracket(A[i], L[j], s) - rhs_a);
                al.require(r3 < tol,
                           cex("{A_" + std::to_string(i) + ",L_" + std::to_string(j) + "}", r3));
                const double r4 = std::abs(poisson_bracket(L[i], L[j], s) - rhs_l);
                ll.require(r4 < tol,
                           cex("{L_" + std::to_string(i) + ",L_" + std::to_string(j) + "}", r4));
            }
        }
        const double r5 = std::abs(poisson_bracket(E, L[0], s) + poisson_bracket(L[0], E, s));
        const double r6 = std::abs(poisson_bracket(A[1], L[2], s) + poisson_bracket(L[2], A[1], s));
        anti.require(r5 < tol, cex("{E,L_0}+{L_0,E}", r5));
        anti.require(r6 < tol, cex("{A_1,L_2}+{L_2,A_1}", r6));
    }
    suite.checks = {el.res, ea.res, al.res, ll.res, anti.res};
    return suite;
}

// --------------------------------------------------------------------------
// regularization

inline SuiteResult verify_regularization(std::uint64_t seed = 12345, int n_samples = 200,
                                         const IntegratorConfig& cfg = {}) {
    SuiteResult suite{"regularization", {}};
    detail::Property round_trip("stereo-round-trip");
    detail::Property chart("stereo-chart-identities");
    detail::Property ode("collision-orbit-ode-residual");
    detail::Property kr_flow("kr-flow-matches-closed-form");
    detail::Property height("collision-flat-height");
    detail::Property hill("hill-critical-energy");

    detail::Rng rng(seed);
    for (int n = 0; n < n_samples; ++n) {
        const double r = rng.uniform(0.6, 1.8);
        const Vec3 p = rng.uniform(0.0, 1.5) * rng.unit_vector3();
        const Vec3 q = rng.uniform(0.1, 2.0) * rng.unit_vector3();
        auto cex = [&](const std::string& what, double err) {
            return [&, what, err]() {
                std::ostringstream os;
                os.precision(17);
                os << what << " error " << err << " at r=" << r << " p=(" << p.transpose()
                   << ") q=(" << q.transpose() << ")";
                return os.str();
            };
        };

        const SphereCotangent sc = stereo_lift(r, p, q);
        const auto [a, b] = stereo_project(sc);
        const double rt = std::max((a - p).norm(), (b - q).norm());
        round_trip.require(rt < 1e-12, cex("lift-then-project", rt));
        round_trip.require(sc.max_defect() < 1e-12, cex("chart invariants", sc.max_defect()));
        const SphereCotangent sc2 = stereo_lift(r, a, b);
        const double rt2 = (sc2.to_vec8() - sc.to_vec8()).cwiseAbs().maxCoeff();
        round_trip.require(rt2 < 1e-12, cex("project-then-lift", rt2));

        PhasePoint s;
        s.q = q;
        s.p = p;
        const PhasePoint s_back = moser_drop(r, moser_lift(r, s));
        const double mr = std::max((s_back.q - s.q).norm(), (s_back.p - s.p).norm());
        round_trip.require(mr < 1e-12, cex("moser round trip", mr));

        const double p2 = p.squaredNorm(), r2 = r * r, r3 = r2 * r;
        const double e1 = std::abs((r - sc.x(0)) - 2.0 * r3 / (p2 + r2));
        const double e2 = std::abs(p2 - (2.0 * r3 / (r - sc.x(0)) - r2));
        const double e3 = std::abs(sc.y.squaredNorm() -
                                   (p2 + r2) * (p2 + r2) / (4.0 * r2 * r2) * q.squaredNorm());
        const double e4 = std::abs(q.norm() - (r - sc.x(0)) / r * sc.y.norm());
        chart.require(e1 < 1e-12, cex("r - x0 relation", e1));
        chart.require(e2 < 1e-12, cex("|p|^2 relation", e2));
        chart.require(e3 < 1e-12, cex("|y|^2 relation", e3));
        chart.require(e4 < 1e-12, cex("|q| relation", e4));
    }

    // Closed-form collision orbit: reduced ODE residual, regularized flow
    // agreement over one period, and the flat-chart height q3(t).
    for (int sign : {+1, -1}) {
        const double r = 1.3;
        const double period = 2.0 * M_PI / r;
        const Vec8 start = collision_orbit(r, sign, 0.0).sc.to_vec8();
        for (int i = 0; i <= 16; ++i) {
            const double t = period * static_cast<double>(i) / 16.0;
            const CollisionSample ref = collision_orbit(r, sign, t);
            auto cex = [&](const std::string& what, double err) {
                return [&, what, err]() {
                    std::ostringstream os;
                    os.precision(17);
                    os << what << " error " << err << " at sign=" << sign << " t=" << t;
                    return os.str();
                };
            };
            // The displayed orbit must satisfy the chart equations of motion
            // x' = r^2 |x|^2 y, y' = -r^2 |y|^2 x.
            const double ct = std::cos(r * t), st = std::sin(r * t);
            const double sg = static_cast<double>(sign);
            const Vec8 field = vector_field(HamiltonianId::MoserKr, ref.sc.to_vec8(), r);
            Vec8 rhs = Vec8::Zero();
            rhs(0) = r * st;
            rhs(3) = sg * r * ct;
            rhs(4) = ct;
            rhs(7) = -sg * st;
            const double res = (field - rhs).cwiseAbs().maxCoeff();
            ode.require(res < 1e-12, cex("chart ODE residual", res));

            const Vec8 flowed = flow(HamiltonianId::MoserKr, start, r, t, cfg);
            const double chart_err = (flowed - ref.sc.to_vec8()).cwiseAbs().maxCoeff();
            kr_flow.require(chart_err < 1e-9, cex("sphere-chart mismatch", chart_err));

            if (std::abs(1.0 + ct) > 0.1) {
                const PhasePoint dropped =
                    moser_drop(r, SphereCotangent::from_vec8(flowed, 1.0));
                const double hq = (dropped.q - ref.q_flat).norm();
                height.require(hq < 1e-9, cex("flat height", hq));
                const double h3 = std::abs(std::abs(dropped.q.z()) -
                                           (1.0 / (r * r)) * (1.0 + ct));
                height.require(h3 < 1e-9, cex("q3 closed form", h3));
            }
        }
    }

    {
        const Vec3 ray(1.0, 0.0, 0.0);
        const HillClassification below = hill_classify(-1.5 - 1e-3, ray);
        const HillClassification above = hill_classify(-1.5 + 1e-3, ray);
        hill.require(below.tag == HillTag::Forbidden, [&]() {
            return std::string("c just below -3/2: expected forbidden at |q|=1, got ") +
                   hill_tag_name(below.tag);
        });
        hill.require(above.tag == HillTag::SingleComponent, [&]() {
            return std::string("c just above -3/2: expected single-component, got ") +
                   hill_tag_name(above.tag);
        });
    }

    suite.checks = {round_trip.res, chart.res, ode.res, kr_flow.res, height.res, hill.res};
    return suite;
}

// --------------------------------------------------------------------------
// index-agreement

inline SuiteResult verify_index_agreement(double c = -2.1, int N_max = 3, int k_max = 11,
                                          const IntegratorConfig& icfg = {},
                                          const RsConfig& rcfg = {}) {
    SuiteResult suite{"index-agreement", {}};
    detail::Property retro("retrograde-numeric-vs-closed-form");
    detail::Property direct("direct-numeric-vs-closed-form");
    detail::Property collision("collision-numeric-vs-closed-form");

    for (const OrbitRecord& rec : catalog(c, N_max, k_max)) {
        if (rec.kind == OrbitKind::Family) continue;
        const HalfInteger closed = closed_form_index(rec);
        const HalfInteger numeric = numeric_cz(rec, icfg, rcfg).index;
        auto cex = [&]() {
            std::ostringstream os;
            os << rec.label() << ": closed form " << closed.str() << ", numeric "
               << numeric.str();
            return os.str();
        };
        switch (rec.kind) {
            case OrbitKind::Retrograde: retro.require(numeric == closed, cex); break;
            case OrbitKind::Direct: direct.require(numeric == closed, cex); break;
            default: collision.require(numeric == closed, cex); break;
        }
    }
    suite.checks = {retro.res, direct.res, collision.res};
    return suite;
}

// --------------------------------------------------------------------------
// morse-bott

inline SuiteResult verify_morse_bott(int k_max = 50) {
    SuiteResult suite{"morse-bott", {}};
    detail::Property nondeg("return-map-displacement-nonzero");
    detail::Property symp("return-map-symplectic");
    detail::Property exact("displacement-closed-form");

    // Delaunay ordering (l, p_l, g, p_g, theta, p_theta): omega(d_l, d_{p_l}) = -1.
    Eigen::Matrix<double, 6, 6> O = Eigen::Matrix<double, 6, 6>::Zero();
    for (int i = 0; i < 6; i += 2) {
        O(i, i + 1) = -1.0;
        O(i + 1, i) = 1.0;
    }

    for (int k = 2; k <= k_max; ++k) {
        for (int l = 1; l < k; ++l) {
            if (std::gcd(k, l) != 1) continue;
            const MorseBottResult mb = morse_bott_test(k, l);
            auto cex = [&](const std::string& what) {
                return [&, what]() {
                    std::ostringstream os;
                    os.precision(17);
                    os << "(" << k << "," << l << "): " << what << ", displacement "
                       << mb.displacement;
                    return os.str();
                };
            };
            nondeg.require(mb.nondegenerate && mb.displacement > 0.0, cex("degenerate"));
            const double ref = 6.0 * M_PI * k * mb.p_l * mb.p_l;
            exact.require(std::abs(mb.displacement - ref) <= 1e-12 * ref,
                          cex("closed-form mismatch"));

            const Eigen::Matrix<double, 6, 6> Psi = delaunay_return_map(k, l);
            const double defect = (Psi.transpose() * O * Psi - O).cwiseAbs().maxCoeff();
            symp.require(defect == 0.0, cex("symplectic defect " + std::to_string(defect)));
        }
    }
    const MorseBottResult mb81 = morse_bott_test(8, 1);
    exact.require(mb81.displacement == 12.0 * M_PI, [&]() {
        std::ostringstream os;
        os.precision(17);
        os << "(8,1) displacement " << mb81.displacement << " != 12 pi";
        return os.str();
    });
    suite.checks = {nondeg.res, symp.res, exact.res};
    return suite;
}

// --------------------------------------------------------------------------
// ledger

inline SuiteResult verify_ledger(double c = -2.1, std::int64_t degree_cap = 10,
                                 int k_max = 64) {
    SuiteResult suite{"ledger", {}};
    detail::Property ref("reference-ranks");
    detail::Property match("generator-table-matches-reference");
    detail::Property shift("family-shift-identity");
    detail::Property bif("bifurcation-invariance");

    ref.require(sh_reference(2) == 1, []() { return std::string("rank at degree 2 != 1"); });
    ref.require(sh_reference(4) == 2, []() { return std::string("rank at degree 4 != 2"); });
    ref.require(sh_reference(6) == 2, []() { return std::string("rank at degree 6 != 2"); });
    ref.require(sh_reference(3) == 0, []() { return std::string("rank at degree 3 != 0"); });

    const LedgerReport rep = compare_with_reference(c, degree_cap, 1024, k_max);
    for (const DegreeLine& line : rep.lines) {
        match.require(line.status != "mismatch", [&]() {
            std::ostringstream os;
            os << "degree " << line.degree << ": multiplicity " << line.multiplicity
               << " vs reference " << line.reference;
            return os.str();
        });
    }

    for (int k = 2; k <= 50; ++k) {
        for (int l = 1; l < k; ++l) {
            if (std::gcd(k, l) != 1) continue;
            const bool ok =
                rs_family(k, l) - HalfInteger::halves(3) == HalfInteger(mbss_shift(k, l));
            shift.require(ok, [&]() {
                std::ostringstream os;
                os << "(" << k << "," << l << "): mu_RS - 3/2 != sh";
                return os.str();
            });
        }
    }

    for (auto [k, l] : {std::pair{2, 1}, std::pair{4, 1}, std::pair{8, 1}}) {
        const BifurcationInvariance inv = bifurcation_invariance(k, l, 1e-3);
        bif.require(inv.holds, [&, k = k, l = l]() {
            std::ostringstream os;
            os << "(" << k << "," << l << "): before " << inv.degree_before << ", after "
               << inv.degree_after << ", family {" << inv.family_sh << "," << inv.family_top
               << "}";
            return os.str();
        });
    }

    suite.checks = {ref.res, match.res, shift.res, bif.res};
    return suite;
}

// --------------------------------------------------------------------------
// dispatcher

inline SuiteResult run_suite(const std::string& name, std::uint64_t seed = 12345) {
    if (name == "conservation") return verify_conservation(seed);
    if (name == "poisson") return verify_poisson(seed);
    if (name == "regularization") return verify_regularization(seed);
    if (name == "index-agreement") return verify_index_agreement();
    if (name == "morse-bott") return verify_morse_bott();
    if (name == "ledger") return verify_ledger();
    throw Error("run_suite: unknown suite '" + name +
                "' (expected conservation | poisson | regularization | index-agreement | "
                "morse-bott | ledger)");
}

}  // namespace rkp
