#pragma once

#include <cstddef>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "ctmg/model.hpp"

namespace ctmg {

enum class Objective { Max, Min, Game };

std::string_view objectiveName(Objective objective);

/// Whether `l` is optimised upwards under `objective`. Max and min treat
/// every location as owned by the single optimising player.
bool maximises(const CtmgModel& model, Objective objective, LocationIndex l);

/// A deterministic positional decision map, one action per location.
/// Locations without a decision (frozen goals, no enabled action) hold
/// `kNoAction`.
struct PositionalProfile {
    std::vector<ActionIndex> choice;

    bool operator==(const PositionalProfile&) const = default;
};

/// Profile choosing the first enabled action everywhere.
PositionalProfile firstEnabledProfile(const CtmgModel& model);

/// Location name -> action name. Independent of any particular model.
using DecisionMap = std::map<std::string, std::string>;

/// Finite partition 0 = b[0] < b[1] < ... < b[k] = t_max with one positional
/// decision map per interval. Interval 0 is [b0,b1], interval i > 0 is
/// (b[i], b[i+1]], so a breakpoint belongs to the interval on its left.
struct CylindricalScheduler {
    std::vector<double> breakpoints;
    std::vector<DecisionMap> decisions;

    std::size_t intervalCount() const noexcept { return decisions.size(); }
    /// Interval containing `t` under the left-closed-at-zero convention.
    std::size_t intervalAt(double t) const;
    /// Merges adjacent intervals with identical decisions.
    void normalize();

    bool operator==(const CylindricalScheduler&) const = default;
};

/// A scheduler whose decision maps are resolved against a model.
struct BoundScheduler {
    std::vector<double> breakpoints;
    std::vector<PositionalProfile> profiles;

    std::size_t intervalAt(double t) const;
};

DecisionMap toDecisionMap(const CtmgModel& model, const PositionalProfile& profile);

/// Single interval [0, t_max] using `profile`.
CylindricalScheduler positionalScheduler(const CtmgModel& model, const PositionalProfile& profile);

/// Resolves names. A decision location missing from a map defaults to its
/// only enabled action; otherwise `Error(InvalidArgument)`. Disabled actions
/// raise `Error(DisabledAction)`; a final breakpoint other than t_max raises
/// `Error(TimeBoundMismatch)`.
BoundScheduler bindScheduler(const CtmgModel& model, const CylindricalScheduler& scheduler);

/// The decisions of one player only, with equal adjacent intervals merged.
CylindricalScheduler restrictToOwner(const CtmgModel& model, const CylindricalScheduler& scheduler, Player player);

/// Reachability probability per location over [0, t_max], sampled on a grid
/// that contains every switch point as an exact row.
struct ValueFunction {
    std::vector<double> times;   // ascending
    std::vector<double> values;  // node-major: values[node * numLocations + l]
    std::size_t numLocations = 0;
    std::vector<double> switchPoints;
    std::optional<Objective> objective; // empty for a fixed scheduler

    std::size_t numNodes() const noexcept { return times.size(); }
    double at(std::size_t node, LocationIndex l) const { return values[node * numLocations + l]; }
    std::span<const double> node(std::size_t i) const {
        return std::span<const double>(values).subspan(i * numLocations, numLocations);
    }
};

/// Monotone piecewise cubic Hermite interpolation; exact at grid points.
/// Throws `Error(OutOfRange)` outside [0, t_max].
double valueAt(const ValueFunction& vf, LocationIndex l, double t);

/// sum over l of nu(l) * f(l, 0).
double initialValue(const CtmgModel& model, const ValueFunction& vf);

struct SolveOptions {
    std::size_t steps = 10000;
    double switchTol = 1e-9;
    double tieTol = 1e-12;
    /// Game only: run the safety player's improvement phase first.
    bool safetyFirst = false;
};

/// Throws `Error(InvalidArgument)` on steps < 2 or non-positive tolerances.
void checkOptions(const SolveOptions& opts);

struct SolveResult {
    ValueFunction values;
    /// Decisions of both players on one common partition.
    CylindricalScheduler scheduler;
};

/// Backward integration of the optimality equations with switch detection.
/// Throws `InvalidModelError(InvalidModel)` and `Error(GameOnSinglePlayer)`.
SolveResult solve(const CtmgModel& model, Objective objective, const SolveOptions& opts = {});

/// sum over l' of R(l,a,l') * (snapshot(l') - snapshot(l)).
/// Throws `Error(DisabledAction)` if `a` is not enabled at continuous `l`.
double gain(const CtmgModel& model, std::span<const double> snapshot, LocationIndex l, ActionIndex a);

/// Strategy improvement at a snapshot of the true values. Continuous entries
/// of `snapshot` are taken as given; discrete entries are recomputed under
/// the profile being improved. Ties in gain are broken by the time
/// derivatives of the gains under the current profile (the ordering that
/// holds just below the snapshot time), then by keeping the incumbent, then
/// by lowest action index.
PositionalProfile localImprovement(const CtmgModel& model, std::span<const double> snapshot, Objective objective,
                                   const PositionalProfile& incumbent, const SolveOptions& opts = {});

/// Value function of a fixed cylindrical scheduler (linear ODE per interval).
ValueFunction evaluateScheduler(const CtmgModel& model, const CylindricalScheduler& scheduler,
                                const SolveOptions& opts = {});
ValueFunction evaluateProfile(const CtmgModel& model, const PositionalProfile& profile,
                              const SolveOptions& opts = {});

struct NashReport {
    /// max |(-df/dt) - opt gain| over grid nodes and continuous locations.
    double derivativeResidual = 0.0;
    /// max gap between the optimal gain and the scheduler's chosen gain.
    double decisionResidual = 0.0;
    /// max residual of the discrete-location equations.
    double discreteResidual = 0.0;
    double worstTime = 0.0;
    std::optional<LocationIndex> worstLocation;
    bool passed = false;
};

/// Residuals of the min/max equations along `vf`, with `scheduler` supplying
/// the decisions. Optimisation direction comes from `vf.objective`
/// (game if unset).
NashReport checkNash(const CtmgModel& model, const ValueFunction& vf, const CylindricalScheduler& scheduler,
                     double tol);

} // namespace ctmg
