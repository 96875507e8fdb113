#include "ctmg/model.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <sstream>

namespace ctmg {

std::string_view errorCodeName(ErrorCode code) {
    switch (code) {
    case ErrorCode::Syntax: return "SYNTAX";
    case ErrorCode::Semantic: return "SEMANTIC";
    case ErrorCode::InvalidModel: return "INVALID_MODEL";
    case ErrorCode::UnknownLocation: return "UNKNOWN_LOCATION";
    case ErrorCode::UnknownAction: return "UNKNOWN_ACTION";
    case ErrorCode::NotContinuous: return "NOT_CONTINUOUS";
    case ErrorCode::Cycle: return "CYCLE";
    case ErrorCode::DisabledAction: return "DISABLED_ACTION";
    case ErrorCode::GameOnSinglePlayer: return "GAME_ON_SINGLE_PLAYER";
    case ErrorCode::MultiPlayer: return "MULTI_PLAYER";
    case ErrorCode::NotUniform: return "NOT_UNIFORM";
    case ErrorCode::RateTooLow: return "RATE_TOO_LOW";
    case ErrorCode::CapExceeded: return "CAP_EXCEEDED";
    case ErrorCode::MalformedArtifact: return "MALFORMED_ARTIFACT";
    case ErrorCode::OutOfRange: return "OUT_OF_RANGE";
    case ErrorCode::InvalidArgument: return "INVALID_ARGUMENT";
    case ErrorCode::TimeBoundMismatch: return "TIME_BOUND_MISMATCH";
    }
    return "UNKNOWN";
}

SyntaxError::SyntaxError(std::size_t line, std::size_t column, std::string expected)
    : Error(ErrorCode::Syntax,
            "syntax error at " + std::to_string(line) + ":" + std::to_string(column) + ": expected " + expected),
      line_(line), column_(column), expected_(std::move(expected)) {}

// ---------------------------------------------------------------------------
// CtmgModel

const Location& CtmgModel::location(LocationIndex l) const {
    if (l >= locations_.size())
        throw Error(ErrorCode::UnknownLocation, "location index " + std::to_string(l) + " out of range");
    return locations_[l];
}

const std::string& CtmgModel::actionName(ActionIndex a) const {
    if (a >= actions_.size())
        throw Error(ErrorCode::UnknownAction, "action index " + std::to_string(a) + " out of range");
    return actions_[a];
}

std::optional<LocationIndex> CtmgModel::findLocation(std::string_view name) const {
    auto it = locationByName_.find(std::string(name));
    if (it == locationByName_.end()) return std::nullopt;
    return it->second;
}

std::optional<ActionIndex> CtmgModel::findAction(std::string_view name) const {
    auto it = actionByName_.find(std::string(name));
    if (it == actionByName_.end()) return std::nullopt;
    return it->second;
}

LocationIndex CtmgModel::locationIndex(std::string_view name) const {
    if (auto l = findLocation(name)) return *l;
    throw Error(ErrorCode::UnknownLocation, "unknown location '" + std::string(name) + "'");
}

ActionIndex CtmgModel::actionIndex(std::string_view name) const {
    if (auto a = findAction(name)) return *a;
    throw Error(ErrorCode::UnknownAction, "unknown action '" + std::string(name) + "'");
}

namespace {

const ActionRow* findRow(const std::vector<ActionRow>& rows, ActionIndex a) {
    auto it = std::lower_bound(rows.begin(), rows.end(), a,
                               [](const ActionRow& r, ActionIndex x) { return r.action < x; });
    if (it == rows.end() || it->action != a) return nullptr;
    return &*it;
}

double entryValue(const ActionRow* row, LocationIndex to) {
    if (!row) return 0.0;
    auto it = std::lower_bound(row->entries.begin(), row->entries.end(), to,
                               [](const Transition& t, LocationIndex x) { return t.target < x; });
    if (it == row->entries.end() || it->target != to) return 0.0;
    return it->value;
}

} // namespace

const ActionRow* CtmgModel::row(LocationIndex l, ActionIndex a) const {
    return findRow(location(l).rows(), a);
}

double CtmgModel::rate(LocationIndex from, ActionIndex a, LocationIndex to) const {
    const Location& loc = location(from);
    return entryValue(findRow(loc.rateRows, a), to);
}

double CtmgModel::prob(LocationIndex from, ActionIndex a, LocationIndex to) const {
    const Location& loc = location(from);
    if (loc.discrete()) return entryValue(findRow(loc.probRows, a), to);
    const ActionRow* r = findRow(loc.rateRows, a);
    if (!r || !(r->total > 0.0)) return 0.0;
    return entryValue(r, to) / r->total;
}

bool CtmgModel::twoPlayer() const {
    bool reach = false, safe = false;
    for (const auto& loc : locations_) {
        (loc.owner == Player::Reachability ? reach : safe) = true;
    }
    return reach && safe;
}

bool CtmgModel::operator==(const CtmgModel& other) const {
    return locations_ == other.locations_ && actions_ == other.actions_ && initial_ == other.initial_ &&
           timeBound_ == other.timeBound_ && goalMode_ == other.goalMode_;
}

// ---------------------------------------------------------------------------
// ModelBuilder

ModelBuilder& ModelBuilder::timeBound(double t) {
    model_.timeBound_ = t;
    return *this;
}

ModelBuilder& ModelBuilder::goalMode(GoalMode mode) {
    model_.goalMode_ = mode;
    return *this;
}

LocationIndex ModelBuilder::addLocation(std::string name, LocationKind kind, Player owner, bool goal) {
    if (model_.locationByName_.count(name))
        throw Error(ErrorCode::InvalidArgument, "duplicate location '" + name + "'");
    LocationIndex idx = model_.locations_.size();
    model_.locationByName_.emplace(name, idx);
    Location loc;
    loc.name = std::move(name);
    loc.kind = kind;
    loc.owner = owner;
    loc.goal = goal;
    model_.locations_.push_back(std::move(loc));
    model_.initial_.push_back(0.0);
    return idx;
}

ActionIndex ModelBuilder::action(std::string_view name) {
    std::string key(name);
    auto it = model_.actionByName_.find(key);
    if (it != model_.actionByName_.end()) return it->second;
    ActionIndex idx = model_.actions_.size();
    model_.actionByName_.emplace(key, idx);
    model_.actions_.push_back(std::move(key));
    return idx;
}

void ModelBuilder::checkLocation(LocationIndex l) const {
    if (l >= model_.locations_.size())
        throw Error(ErrorCode::UnknownLocation, "location index " + std::to_string(l) + " out of range");
}

void ModelBuilder::setEntry(std::vector<ActionRow>& rows, ActionIndex a, LocationIndex to, double value,
                            bool accumulate) {
    auto it = std::lower_bound(rows.begin(), rows.end(), a,
                               [](const ActionRow& r, ActionIndex x) { return r.action < x; });
    if (it == rows.end() || it->action != a) it = rows.insert(it, ActionRow{a, {}, 0.0});
    auto& entries = it->entries;
    auto e = std::lower_bound(entries.begin(), entries.end(), to,
                              [](const Transition& t, LocationIndex x) { return t.target < x; });
    if (e != entries.end() && e->target == to) {
        e->value = accumulate ? e->value + value : value;
        if (e->value == 0.0) entries.erase(e);
    } else if (value != 0.0) {
        entries.insert(e, Transition{to, value});
    }
    it->total = 0.0;
    for (const auto& t : entries) it->total += t.value;
    if (entries.empty()) rows.erase(it);
}

bool ModelBuilder::hasEntry(const std::vector<ActionRow>& rows, ActionIndex a, LocationIndex to) {
    const ActionRow* r = findRow(rows, a);
    if (!r) return false;
    return std::any_of(r->entries.begin(), r->entries.end(), [to](const Transition& t) { return t.target == to; });
}

ModelBuilder& ModelBuilder::setRate(LocationIndex from, ActionIndex a, LocationIndex to, double value) {
    checkLocation(from);
    checkLocation(to);
    setEntry(model_.locations_[from].rateRows, a, to, value, false);
    return *this;
}

ModelBuilder& ModelBuilder::addRate(LocationIndex from, ActionIndex a, LocationIndex to, double value) {
    checkLocation(from);
    checkLocation(to);
    setEntry(model_.locations_[from].rateRows, a, to, value, true);
    return *this;
}

ModelBuilder& ModelBuilder::setProb(LocationIndex from, ActionIndex a, LocationIndex to, double value) {
    checkLocation(from);
    checkLocation(to);
    setEntry(model_.locations_[from].probRows, a, to, value, false);
    return *this;
}

ModelBuilder& ModelBuilder::setInitial(LocationIndex l, double p) {
    checkLocation(l);
    model_.initial_[l] = p;
    return *this;
}

bool ModelBuilder::hasRate(LocationIndex from, ActionIndex a, LocationIndex to) const {
    checkLocation(from);
    return hasEntry(model_.locations_[from].rateRows, a, to);
}

bool ModelBuilder::hasProb(LocationIndex from, ActionIndex a, LocationIndex to) const {
    checkLocation(from);
    return hasEntry(model_.locations_[from].probRows, a, to);
}

std::optional<LocationIndex> ModelBuilder::findLocation(std::string_view name) const {
    return model_.findLocation(name);
}

CtmgModel ModelBuilder::build() const {
    CtmgModel m = model_;
    std::vector<bool> used(m.actions_.size(), false);
    for (const auto& loc : m.locations_) {
        for (const auto& r : loc.rateRows) used[r.action] = true;
        for (const auto& r : loc.probRows) used[r.action] = true;
    }
    if (std::all_of(used.begin(), used.end(), [](bool u) { return u; })) return m;

    std::vector<ActionIndex> remap(m.actions_.size(), kNoAction);
    std::vector<std::string> kept;
    for (ActionIndex a = 0; a < m.actions_.size(); ++a) {
        if (!used[a]) continue;
        remap[a] = kept.size();
        kept.push_back(m.actions_[a]);
    }
    m.actions_ = std::move(kept);
    m.actionByName_.clear();
    for (ActionIndex a = 0; a < m.actions_.size(); ++a) m.actionByName_.emplace(m.actions_[a], a);
    for (auto& loc : m.locations_) {
        for (auto& r : loc.rateRows) r.action = remap[r.action];
        for (auto& r : loc.probRows) r.action = remap[r.action];
    }
    return m;
}

// ---------------------------------------------------------------------------
// Validation

bool ValidationReport::has(std::string_view code) const {
    return std::any_of(violations.begin(), violations.end(), [&](const Violation& v) { return v.code == code; });
}

std::string ValidationReport::render(const CtmgModel& model) const {
    std::ostringstream out;
    for (const auto& v : violations) {
        out << v.code;
        if (v.location && *v.location < model.numLocations()) out << ' ' << model.location(*v.location).name;
        if (v.action && *v.action < model.numActions()) out << ' ' << model.actionName(*v.action);
        out << ": " << v.message << '\n';
    }
    return out.str();
}

namespace {

bool isEnabled(const Location& loc, const ActionRow& row) {
    if (loc.continuous()) return row.total > 0.0;
    return std::abs(row.total - 1.0) <= kProbabilityTolerance;
}

// Returns a location on a discrete-only cycle, if any.
std::optional<LocationIndex> findDiscreteCycle(const CtmgModel& m) {
    enum class Mark { White, Grey, Black };
    std::vector<Mark> mark(m.numLocations(), Mark::White);
    std::optional<LocationIndex> hit;
    std::function<bool(LocationIndex)> visit = [&](LocationIndex l) -> bool {
        mark[l] = Mark::Grey;
        for (const auto& row : m.location(l).probRows) {
            for (const auto& t : row.entries) {
                if (!(t.value > 0.0) || !m.location(t.target).discrete()) continue;
                if (mark[t.target] == Mark::Grey) {
                    hit = t.target;
                    return true;
                }
                if (mark[t.target] == Mark::White && visit(t.target)) return true;
            }
        }
        mark[l] = Mark::Black;
        return false;
    };
    for (LocationIndex l = 0; l < m.numLocations(); ++l) {
        if (m.location(l).discrete() && mark[l] == Mark::White && visit(l)) return hit;
    }
    return std::nullopt;
}

} // namespace

ValidationReport validate(const CtmgModel& m) {
    ValidationReport rep;
    auto add = [&](std::string code, std::optional<LocationIndex> l, std::optional<ActionIndex> a, std::string msg) {
        rep.violations.push_back(Violation{std::move(code), l, a, std::move(msg)});
    };

    if (m.numLocations() == 0) add("EMPTY_MODEL", std::nullopt, std::nullopt, "model declares no locations");
    if (!std::isfinite(m.timeBound()) || m.timeBound() < 0.0)
        add("BAD_TIME_BOUND", std::nullopt, std::nullopt, "time bound must be a finite nonnegative number");
    double mass = 0.0;
    for (double p : m.initialDistribution()) mass += p;
    if (m.numLocations() > 0 && std::abs(mass - 1.0) > kProbabilityTolerance)
        add("BAD_INITIAL", std::nullopt, std::nullopt, "initial distribution sums to " + std::to_string(mass));

    auto cycle = findDiscreteCycle(m);
    const bool absorbing = m.goalMode() == GoalMode::Absorbing;

    for (LocationIndex l = 0; l < m.numLocations(); ++l) {
        const Location& loc = m.location(l);
        double nu = m.initial(l);
        if (!(nu >= 0.0 && nu <= 1.0)) add("BAD_INITIAL", l, std::nullopt, "initial probability outside [0,1]");
        if (cycle && *cycle == l)
            add("NO_DISCRETE_CYCLE", l, std::nullopt, "location lies on a cycle of discrete locations");

        if (loc.continuous() && !loc.probRows.empty())
            add("PROB_ON_CONTINUOUS", l, loc.probRows.front().action,
                "continuous locations take rates; probabilities are derived");
        if (loc.discrete() && !loc.rateRows.empty())
            add("RATE_ON_DISCRETE", l, loc.rateRows.front().action, "rates are defined on continuous locations only");

        bool anyEnabled = false;
        for (const auto& row : loc.rows()) {
            bool badValue = false;
            for (const auto& t : row.entries) {
                if (!std::isfinite(t.value) || t.value < 0.0) badValue = true;
                if (loc.discrete() && t.value > 1.0) badValue = true;
            }
            if (badValue) {
                add(loc.continuous() ? "NEGATIVE_RATE" : "PROB_OUT_OF_RANGE", l, row.action,
                    loc.continuous() ? "rates must be finite and nonnegative" : "probabilities must lie in [0,1]");
            }
            if (loc.discrete() && std::abs(row.total) > kProbabilityTolerance &&
                std::abs(row.total - 1.0) > kProbabilityTolerance) {
                add("BAD_ROW_SUM", l, row.action, "probability row sums to " + std::to_string(row.total));
            }
            if (isEnabled(loc, row)) anyEnabled = true;
            if (absorbing && loc.goal) {
                bool leaks = std::any_of(row.entries.begin(), row.entries.end(), [&](const Transition& t) {
                    return t.value > 0.0 && !m.location(t.target).goal;
                });
                if (leaks) add("GOAL_NOT_ABSORBING", l, row.action, "goal location has a transition leaving the goal");
            }
        }
        // Absorbing goals never leave, so they need no enabled action.
        if (!anyEnabled && !(absorbing && loc.goal))
            add("NO_ENABLED_ACTION", l, std::nullopt, "location has no enabled action");
    }
    return rep;
}

void requireValid(const CtmgModel& model) {
    ValidationReport rep = validate(model);
    if (!rep.ok()) throw InvalidModelError(ErrorCode::InvalidModel, rep, "invalid model:\n" + rep.render(model));
}

std::vector<ActionIndex> enabledActions(const CtmgModel& m, LocationIndex l) {
    const Location& loc = m.location(l);
    std::vector<ActionIndex> out;
    for (const auto& row : loc.rows())
        if (isEnabled(loc, row)) out.push_back(row.action);
    return out;
}

double exitRate(const CtmgModel& m, LocationIndex l, ActionIndex a) {
    const Location& loc = m.location(l);
    if (!loc.continuous())
        throw Error(ErrorCode::NotContinuous, "exit rate requested for discrete location '" + loc.name + "'");
    if (a >= m.numActions()) throw Error(ErrorCode::UnknownAction, "action index out of range");
    const ActionRow* r = m.row(l, a);
    return r ? r->total : 0.0;
}

double maxExitRate(const CtmgModel& m) {
    double best = 0.0;
    for (const auto& loc : m.locations()) {
        if (!loc.continuous()) continue;
        for (const auto& row : loc.rateRows) best = std::max(best, row.total);
    }
    return best;
}

std::vector<std::size_t> discreteDepth(const CtmgModel& m) {
    constexpr std::size_t kUnset = std::numeric_limits<std::size_t>::max();
    constexpr std::size_t kActive = kUnset - 1;
    std::vector<std::size_t> depth(m.numLocations(), kUnset);
    std::function<std::size_t(LocationIndex)> visit = [&](LocationIndex l) -> std::size_t {
        if (depth[l] == kActive)
            throw Error(ErrorCode::Cycle, "discrete cycle through '" + m.location(l).name + "'");
        if (depth[l] != kUnset) return depth[l];
        const Location& loc = m.location(l);
        if (loc.continuous()) return depth[l] = 0;
        depth[l] = kActive;
        std::size_t d = 0;
        for (const auto& row : loc.probRows)
            for (const auto& t : row.entries)
                if (t.value > 0.0) d = std::max(d, visit(t.target));
        return depth[l] = d + 1;
    };
    for (LocationIndex l = 0; l < m.numLocations(); ++l) visit(l);
    return depth;
}

std::vector<LocationIndex> discreteEvaluationOrder(const CtmgModel& m) {
    auto depth = discreteDepth(m);
    std::vector<LocationIndex> order;
    for (LocationIndex l = 0; l < m.numLocations(); ++l)
        if (m.location(l).discrete()) order.push_back(l);
    std::stable_sort(order.begin(), order.end(),
                     [&](LocationIndex a, LocationIndex b) { return depth[a] < depth[b]; });
    return order;
}

std::vector<LocationIndex> decisionLocations(const CtmgModel& m) {
    std::vector<LocationIndex> out;
    for (LocationIndex l = 0; l < m.numLocations(); ++l) {
        if (m.frozen(l)) continue;
        if (!enabledActions(m, l).empty()) out.push_back(l);
    }
    return out;
}

} // namespace ctmg
