#pragma once

#include <cstddef>
#include <optional>
#include <vector>

#include "ctmg/model.hpp"

namespace ctmg {

/// For each location of the source model, the location of the result that
/// carries its value.
using LocationMap = std::vector<LocationIndex>;

struct Transformed {
    CtmgModel model;
    LocationMap map;
};

/// Adds self-loop rate so every enabled continuous action has exit rate
/// `targetRate` (default: the maximal exit rate). Throws `Error(RateTooLow)`.
CtmgModel uniformise(const CtmgModel& model, std::optional<double> targetRate = std::nullopt);

/// True if all enabled continuous actions share one exit rate (relative
/// tolerance 1e-9).
bool isUniform(const CtmgModel& model);

/// Splits each continuous location `l` with enabled actions into a discrete
/// gate `l^d` and one continuous copy `l^a` per enabled action. Incoming
/// transitions and initial mass move to the gate; the map sends `l` to its
/// gate. Locations without enabled actions are kept unchanged.
Transformed earlyToLate(const CtmgModel& model);

/// For a uniform model with rate L: each continuous location `l` with enabled
/// actions gets a single action `tau` of rate L to a fresh discrete location
/// `l^post`, where P(l^post, a, l') = R(l, a, l') / L. Throws
/// `Error(NotUniform)`.
Transformed lateToEarly(const CtmgModel& model);

struct SimpleModel {
    CtmgModel model;
    /// Original location -> same location in the result.
    LocationMap map;
    /// Location of the result -> original location whose dynamics it
    /// mirrors (the endpoint of the pooled path for new locations).
    std::vector<LocationIndex> endpoint;
};

/// Pools every continuous-to-continuous passage through discrete locations
/// into compound actions leading to fresh continuous locations named
/// `[a0>d1>a1>...>l']`. Throws `Error(MultiPlayer)` on two-player models and
/// `Error(CapExceeded)` if more than `cap` compound actions arise.
SimpleModel makeSimple(const CtmgModel& model, std::size_t cap = 10000);

} // namespace ctmg
