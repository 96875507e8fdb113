#pragma once

#include <cstdint>
#include <random>
#include <vector>

#include "ctmg/model.hpp"
#include "ctmg/solver.hpp"

namespace ctmg::testing {

struct CorpusOptions {
    std::size_t maxLocations = 5;
    std::size_t maxActions = 3;
    double maxRate = 10.0;
    double maxTime = 3.0;
    bool twoPlayer = false;
    bool discrete = true;
    GoalMode goalMode = GoalMode::Absorbing;
};

/// Random valid model. Discrete locations only point to continuous locations
/// or to discrete locations of higher index, so there are no discrete cycles.
CtmgModel randomModel(std::mt19937_64& rng, const CorpusOptions& opts);

/// `count` models from a fixed seed.
std::vector<CtmgModel> corpus(std::size_t count, std::uint64_t seed, const CorpusOptions& opts = {});

/// The mixed corpus used by the property checks: single-player models with
/// and without discrete locations.
std::vector<CtmgModel> standardCorpus(std::size_t count = 100);

/// Two-player models.
std::vector<CtmgModel> gameCorpus(std::size_t count = 50);

/// Every deterministic positional profile, in mixed-radix order over the
/// decision locations.
std::vector<PositionalProfile> allProfiles(const CtmgModel& model);

/// Cylindrical scheduler with up to `maxBreaks` interior breakpoints and
/// uniformly drawn enabled actions.
CylindricalScheduler randomScheduler(std::mt19937_64& rng, const CtmgModel& model, std::size_t maxBreaks = 3);

} // namespace ctmg::testing
