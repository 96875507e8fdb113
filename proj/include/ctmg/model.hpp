#pragma once

#include <cstddef>
#include <cstdint>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "ctmg/error.hpp"

namespace ctmg {

using LocationIndex = std::size_t;
using ActionIndex = std::size_t;

inline constexpr ActionIndex kNoAction = std::numeric_limits<ActionIndex>::max();

/// Tolerance for "sums to exactly 0 or 1" checks on decimal inputs.
inline constexpr double kProbabilityTolerance = 1e-12;

enum class LocationKind { Continuous, Discrete };
enum class Player { Reachability, Safety };
enum class GoalMode { Absorbing, AtDeadline };

struct Transition {
    LocationIndex target;
    double value;

    bool operator==(const Transition&) const = default;
};

/// Outgoing entries of one (location, action) pair. For continuous locations
/// the values are rates, for discrete locations probabilities. Entries are
/// sorted by target and never hold an exact zero.
struct ActionRow {
    ActionIndex action;
    std::vector<Transition> entries;
    double total = 0.0;

    bool operator==(const ActionRow&) const = default;
};

struct Location {
    std::string name;
    LocationKind kind = LocationKind::Continuous;
    Player owner = Player::Reachability;
    bool goal = false;
    std::vector<ActionRow> rateRows; // sorted by action
    std::vector<ActionRow> probRows; // sorted by action

    bool continuous() const noexcept { return kind == LocationKind::Continuous; }
    bool discrete() const noexcept { return kind == LocationKind::Discrete; }

    /// Rows that carry this location's dynamics: rates if continuous,
    /// probabilities if discrete.
    const std::vector<ActionRow>& rows() const noexcept { return continuous() ? rateRows : probRows; }

    bool operator==(const Location&) const = default;
};

/// A continuous-time Markov game with discrete (zero-time) locations, a goal
/// region, an initial distribution and a time bound. Immutable once built.
///
/// The embedded jump probabilities of continuous locations are not stored;
/// `prob` derives them from the rates.
class CtmgModel {
public:
    CtmgModel() = default;

    std::size_t numLocations() const noexcept { return locations_.size(); }
    std::size_t numActions() const noexcept { return actions_.size(); }

    std::span<const Location> locations() const noexcept { return locations_; }
    const Location& location(LocationIndex l) const;
    const std::vector<std::string>& actions() const noexcept { return actions_; }
    const std::string& actionName(ActionIndex a) const;

    const std::vector<double>& initialDistribution() const noexcept { return initial_; }
    double initial(LocationIndex l) const { return initial_.at(l); }
    double timeBound() const noexcept { return timeBound_; }
    GoalMode goalMode() const noexcept { return goalMode_; }

    std::optional<LocationIndex> findLocation(std::string_view name) const;
    std::optional<ActionIndex> findAction(std::string_view name) const;
    /// Throws `Error(UnknownLocation)`.
    LocationIndex locationIndex(std::string_view name) const;
    /// Throws `Error(UnknownAction)`.
    ActionIndex actionIndex(std::string_view name) const;

    /// Row of (l, a) among the location's dynamics, or nullptr.
    const ActionRow* row(LocationIndex l, ActionIndex a) const;

    double rate(LocationIndex from, ActionIndex a, LocationIndex to) const;
    /// P(from, a, to); derived as R/R(from,a,L) for continuous locations.
    double prob(LocationIndex from, ActionIndex a, LocationIndex to) const;

    /// Goal locations whose value is pinned at one (absorbing goal mode).
    bool frozen(LocationIndex l) const { return goalMode_ == GoalMode::Absorbing && location(l).goal; }

    /// True if both players own at least one location.
    bool twoPlayer() const;

    /// Structural equality (names, order and exact values).
    bool operator==(const CtmgModel& other) const;

private:
    friend class ModelBuilder;

    std::vector<Location> locations_;
    std::vector<std::string> actions_;
    std::vector<double> initial_;
    double timeBound_ = 0.0;
    GoalMode goalMode_ = GoalMode::Absorbing;
    std::unordered_map<std::string, LocationIndex> locationByName_;
    std::unordered_map<std::string, ActionIndex> actionByName_;
};

/// Assembles a `CtmgModel`. Accepts structurally invalid content so that
/// `validate` can report it.
class ModelBuilder {
public:
    ModelBuilder& timeBound(double t);
    ModelBuilder& goalMode(GoalMode mode);

    /// Throws `Error(InvalidArgument)` on a duplicate name.
    LocationIndex addLocation(std::string name, LocationKind kind, Player owner, bool goal = false);
    /// Returns the index of `name`, appending it to the action order if new.
    ActionIndex action(std::string_view name);

    ModelBuilder& setRate(LocationIndex from, ActionIndex a, LocationIndex to, double value);
    ModelBuilder& setProb(LocationIndex from, ActionIndex a, LocationIndex to, double value);
    ModelBuilder& addRate(LocationIndex from, ActionIndex a, LocationIndex to, double value);
    ModelBuilder& setInitial(LocationIndex l, double p);

    bool hasRate(LocationIndex from, ActionIndex a, LocationIndex to) const;
    bool hasProb(LocationIndex from, ActionIndex a, LocationIndex to) const;

    std::optional<LocationIndex> findLocation(std::string_view name) const;
    std::size_t numLocations() const noexcept { return model_.locations_.size(); }

    /// Drops actions that carry no entry anywhere, then returns the model.
    CtmgModel build() const;

private:
    static void setEntry(std::vector<ActionRow>& rows, ActionIndex a, LocationIndex to, double value, bool accumulate);
    static bool hasEntry(const std::vector<ActionRow>& rows, ActionIndex a, LocationIndex to);
    void checkLocation(LocationIndex l) const;

    CtmgModel model_;
};

struct Violation {
    std::string code;
    std::optional<LocationIndex> location;
    std::optional<ActionIndex> action;
    std::string message;
};

struct ValidationReport {
    std::vector<Violation> violations;

    bool ok() const noexcept { return violations.empty(); }
    bool has(std::string_view code) const;
    /// One line per violation: `CODE location action: message`.
    std::string render(const CtmgModel& model) const;
};

/// Raised by operations that require a valid model; carries the report.
class InvalidModelError : public Error {
public:
    InvalidModelError(ErrorCode code, ValidationReport report, const std::string& message)
        : Error(code, message), report_(std::move(report)) {}

    const ValidationReport& report() const noexcept { return report_; }

private:
    ValidationReport report_;
};

/// Checks every structural side condition. Violations are ordered by
/// location, then action index; model-level violations come first.
ValidationReport validate(const CtmgModel& model);

/// Throws `InvalidModelError(InvalidModel)` unless `validate(model).ok()`.
void requireValid(const CtmgModel& model);

/// Enabled actions in model action order (the tie-break order).
std::vector<ActionIndex> enabledActions(const CtmgModel& model, LocationIndex l);

/// R(l, a, L). Throws for discrete locations and unknown ids.
double exitRate(const CtmgModel& model, LocationIndex l, ActionIndex a);

/// Largest exit rate over continuous locations and enabled actions.
double maxExitRate(const CtmgModel& model);

/// 0 for continuous locations, 1 + max over successors for discrete ones.
/// Throws `Error(Cycle)` if discrete locations form a cycle.
std::vector<std::size_t> discreteDepth(const CtmgModel& model);

/// Discrete locations sorted by increasing depth (ties by index).
std::vector<LocationIndex> discreteEvaluationOrder(const CtmgModel& model);

/// Locations that carry a decision: at least one enabled action and not frozen.
std::vector<LocationIndex> decisionLocations(const CtmgModel& model);

} // namespace ctmg
