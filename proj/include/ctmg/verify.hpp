#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "ctmg/model.hpp"
#include "ctmg/parallel.hpp"
#include "ctmg/solver.hpp"

namespace ctmg {

/// Smallest n with P(N > n) < epsilon for N ~ Poisson(lambda * horizon).
std::size_t poissonStepBound(double lambda, double horizon, double epsilon);

struct ValueBounds {
    std::vector<double> lower; // per location, at t = 0
    std::vector<double> upper;
    double gap = 0.0;
    std::size_t steps = 0;     // n_epsilon
    double rate = 0.0;         // uniformisation rate
    double initialLower = 0.0; // nu-weighted
    double initialUpper = 0.0;
};

/// Poisson-weighted transient analysis of the uniformised chain induced by
/// `profile`, truncated after n_epsilon jumps. Throws `Error(DisabledAction)`.
ValueBounds truncatedUniformizationValue(const CtmgModel& model, const PositionalProfile& profile, double epsilon);

/// Explicit Euler dynamic program with per-step optimisation.
/// Throws `Error(InvalidArgument)` if `timeSteps < 2`.
ValueFunction gridOracle(const CtmgModel& model, Objective objective, std::size_t timeSteps);

/// Values at t = 0 only, without storing the grid.
std::vector<double> gridOracleInitial(const CtmgModel& model, Objective objective, std::size_t timeSteps);

/// 2 f(2N) - f(N) at t = 0, per location.
std::vector<double> richardsonOracle(const CtmgModel& model, Objective objective, std::size_t timeSteps);

/// Grid size for which the extrapolated oracle is accurate to about 1e-6.
std::size_t recommendedOracleSteps(const CtmgModel& model);

struct EnumerationResult {
    PositionalProfile best;
    double value = 0.0;
    std::size_t evaluated = 0;
};

/// Evaluates every deterministic positional profile and returns the best
/// nu-weighted value at t = 0 (max-min over the two players for games).
/// Ties go to the first profile in enumeration order. Throws
/// `Error(CapExceeded)` if more than `cap` profiles exist.
EnumerationResult enumeratePositional(const CtmgModel& model, Objective objective, const SolveOptions& opts = {},
                                      std::size_t cap = 1000000, Execution exec = Execution::Parallel);

struct SimResult {
    double estimate = 0.0;
    std::size_t runs = 0;
    double standardError = 0.0;
    std::uint64_t seed = 0;
    std::size_t successes = 0;
};

/// Monte Carlo estimate of the reachability probability under `scheduler`.
/// Run i draws from mt19937_64 seeded with runSeed(seed, i), so results do
/// not depend on the thread count. Throws `Error(InvalidArgument)` if
/// `runs == 0`.
SimResult simulate(const CtmgModel& model, const CylindricalScheduler& scheduler, std::size_t runs,
                   std::uint64_t seed, Execution exec = Execution::Parallel);

/// splitmix64 finaliser.
std::uint64_t splitmix64(std::uint64_t x);
std::uint64_t runSeed(std::uint64_t seed, std::uint64_t run);

struct DifferenceModel {
    CtmgModel model;
    CylindricalScheduler scheduler;
    LocationIndex goal = 0;
};

/// Model and scheduler whose reachability of the fresh goal measures where D
/// and E disagree on the merged partition.
DifferenceModel differenceModel(const CtmgModel& model, const CylindricalScheduler& d, const CylindricalScheduler& e);

/// nu-weighted probability of reaching a disagreement before t_max.
/// Throws `Error(TimeBoundMismatch)`.
double schedulerDistance(const CtmgModel& model, const CylindricalScheduler& d, const CylindricalScheduler& e,
                         const SolveOptions& opts = {});

/// Solves every model; models are distributed over threads.
std::vector<SolveResult> solveAll(const std::vector<CtmgModel>& models, Objective objective,
                                  const SolveOptions& opts = {}, Execution exec = Execution::Parallel);

} // namespace ctmg
