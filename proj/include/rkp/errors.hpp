// rkp/errors.hpp
// Exception hierarchy for chart, dynamics and catalog failure modes.
#pragma once

#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace rkp {

/// Base class of every error thrown by the library.
struct Error : std::runtime_error {
    explicit Error(const std::string& what) : std::runtime_error(what) {}
};

/// A state was passed to an operation defined on a different chart
/// (e.g. a flat-chart flow asked to evolve a cotangent-sphere Hamiltonian).
struct ChartMismatchError : Error {
    using Error::Error;
};

/// An unregularized flow came closer to the origin than the collision floor.
struct CollisionApproachError : Error {
    using Error::Error;
};

/// The adaptive integrator exceeded its step budget.
struct StepLimitError : Error {
    using Error::Error;
};

/// Stereographic projection evaluated at the projection pole x0 = r.
struct NorthPoleError : Error {
    using Error::Error;
};

/// Conic reconstruction asked for a degenerate (collinear, |L| ~ 0) orbit.
struct DegenerateConicError : Error {
    using Error::Error;
};

/// Conic reconstruction asked for an unbound (E >= 0) orbit.
struct UnboundedConicError : Error {
    using Error::Error;
};

/// Effective potential or Hill classification evaluated at the origin.
struct OriginError : Error {
    using Error::Error;
};

/// A chart that excludes the vertical axis was evaluated on it.
struct AxisChartError : Error {
    using Error::Error;
};

/// Delaunay actions requested for an unbound or otherwise inadmissible state.
struct UnboundStateError : Error {
    using Error::Error;
};

/// Rank analysis requested for a vertical orbit (p_phi = 0), which the
/// Delaunay chart excludes.
struct VerticalOrbitError : Error {
    using Error::Error;
};

/// The Jacobi energy fails a genericity requirement; offending resonance
/// pairs (k,l) and which of E_{k,l}, c^-_{k,l}, c^+_{k,l} was hit are listed.
struct NonGenericError : Error {
    struct Offender {
        int k = 0;
        int l = 0;
        std::string kind;  // "resonance", "birth", "death"
        double value = 0.0;
    };
    NonGenericError(const std::string& what, std::vector<Offender> offenders)
        : Error(what), offenders(std::move(offenders)) {}
    std::vector<Offender> offenders;
};

/// Energy out of range for the requested operation (e.g. c >= -3/2 where
/// three circular orbits are required, or E >= -1/2 for a direct period).
struct EnergyRangeError : Error {
    using Error::Error;
};

/// A closed-form index was requested at a resonant Kepler energy.
struct ResonantEnergyError : Error {
    using Error::Error;
};

/// Orbit selector failed to parse or names an orbit the operation rejects.
struct InvalidOrbitError : Error {
    using Error::Error;
};

/// Moduli-space inputs violate the orbit invariants beyond tolerance.
struct InvariantViolationError : Error {
    using Error::Error;
};

/// Level-set sampling asked for a singular or empty level.
struct SingularLevelError : Error {
    using Error::Error;
};

/// Bifurcation schedule for a pair with k <= l (no direct-orbit birth).
struct DegenerateBirthError : Error {
    using Error::Error;
};

/// A path handed to the index machinery failed its symplecticity check.
struct NonSymplecticPathError : Error {
    using Error::Error;
};

/// Crossing detection could not isolate a candidate crossing.
struct CrossingIsolationError : Error {
    using Error::Error;
};

/// A reduction frame failed to be invertible at the orbit point.
struct FrameDegeneracyError : Error {
    using Error::Error;
};

}  // namespace rkp
