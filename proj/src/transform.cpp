#include "ctmg/transform.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <string>

namespace ctmg {

namespace {

void requireFreshName(const ModelBuilder& b, const std::string& name) {
    if (b.findLocation(name))
        throw Error(ErrorCode::InvalidArgument, "generated location name '" + name + "' is already taken");
}

ModelBuilder copyHeader(const CtmgModel& m) {
    ModelBuilder b;
    b.timeBound(m.timeBound()).goalMode(m.goalMode());
    for (const auto& a : m.actions()) b.action(a);
    return b;
}

} // namespace

// ---------------------------------------------------------------------------
// uniformise

bool isUniform(const CtmgModel& model) {
    const double lambda = maxExitRate(model);
    for (LocationIndex l = 0; l < model.numLocations(); ++l) {
        const Location& loc = model.location(l);
        if (!loc.continuous()) continue;
        for (const auto& r : loc.rateRows) {
            if (r.total > 0.0 && std::abs(r.total - lambda) > 1e-9 * lambda) return false;
        }
    }
    return true;
}

CtmgModel uniformise(const CtmgModel& model, std::optional<double> targetRate) {
    requireValid(model);
    const double lambda = maxExitRate(model);
    const double target = targetRate.value_or(lambda);
    if (!std::isfinite(target) || target < lambda)
        throw Error(ErrorCode::RateTooLow, "target rate is below the maximal exit rate");

    ModelBuilder b = copyHeader(model);
    for (LocationIndex l = 0; l < model.numLocations(); ++l) {
        const Location& loc = model.location(l);
        b.addLocation(loc.name, loc.kind, loc.owner, loc.goal);
    }
    for (LocationIndex l = 0; l < model.numLocations(); ++l) {
        const Location& loc = model.location(l);
        for (const auto& r : loc.rateRows) {
            for (const auto& t : r.entries) b.setRate(l, r.action, t.target, t.value);
            if (r.total > 0.0 && target > r.total) b.addRate(l, r.action, l, target - r.total);
        }
        for (const auto& r : loc.probRows)
            for (const auto& t : r.entries) b.setProb(l, r.action, t.target, t.value);
        b.setInitial(l, model.initial(l));
    }
    return b.build();
}

// ---------------------------------------------------------------------------
// earlyToLate

Transformed earlyToLate(const CtmgModel& model) {
    requireValid(model);
    const std::size_t n = model.numLocations();
    ModelBuilder b = copyHeader(model);

    LocationMap gate(n);
    std::vector<std::vector<std::pair<ActionIndex, LocationIndex>>> copies(n);
    for (LocationIndex l = 0; l < n; ++l) {
        const Location& loc = model.location(l);
        auto enabled = enabledActions(model, l);
        if (loc.discrete() || enabled.empty()) {
            requireFreshName(b, loc.name);
            gate[l] = b.addLocation(loc.name, loc.kind, loc.owner, loc.goal);
            continue;
        }
        std::string gateName = loc.name + "^d";
        requireFreshName(b, gateName);
        gate[l] = b.addLocation(gateName, LocationKind::Discrete, loc.owner, loc.goal);
        for (ActionIndex a : enabled) {
            std::string copyName = loc.name + "^" + model.actionName(a);
            requireFreshName(b, copyName);
            copies[l].emplace_back(a, b.addLocation(copyName, LocationKind::Continuous, loc.owner, loc.goal));
        }
    }

    for (LocationIndex l = 0; l < n; ++l) {
        const Location& loc = model.location(l);
        b.setInitial(gate[l], model.initial(l));
        if (loc.discrete()) {
            for (const auto& r : loc.probRows)
                for (const auto& t : r.entries) b.setProb(gate[l], r.action, gate[t.target], t.value);
            continue;
        }
        for (auto [a, copy] : copies[l]) {
            b.setProb(gate[l], a, copy, 1.0);
            for (const auto& t : model.row(l, a)->entries) b.addRate(copy, a, gate[t.target], t.value);
        }
    }
    return {b.build(), std::move(gate)};
}

// ---------------------------------------------------------------------------
// lateToEarly

Transformed lateToEarly(const CtmgModel& model) {
    requireValid(model);
    if (!isUniform(model)) throw Error(ErrorCode::NotUniform, "model is not uniform; uniformise it first");
    const double lambda = maxExitRate(model);
    const std::size_t n = model.numLocations();

    ModelBuilder b = copyHeader(model);
    std::string tauName = "tau";
    while (model.findAction(tauName)) tauName += "'";
    const ActionIndex tau = b.action(tauName);

    LocationMap map(n);
    for (LocationIndex l = 0; l < n; ++l) {
        const Location& loc = model.location(l);
        map[l] = b.addLocation(loc.name, loc.kind, loc.owner, loc.goal);
    }
    for (LocationIndex l = 0; l < n; ++l) {
        const Location& loc = model.location(l);
        b.setInitial(l, model.initial(l));
        if (loc.discrete()) {
            for (const auto& r : loc.probRows)
                for (const auto& t : r.entries) b.setProb(l, r.action, t.target, t.value);
            continue;
        }
        auto enabled = enabledActions(model, l);
        if (enabled.empty()) continue;
        std::string postName = loc.name + "^post";
        requireFreshName(b, postName);
        LocationIndex post = b.addLocation(postName, LocationKind::Discrete, loc.owner, loc.goal);
        b.setRate(l, tau, post, lambda);
        for (ActionIndex a : enabled) {
            const ActionRow* r = model.row(l, a);
            for (const auto& t : r->entries) b.setProb(post, a, t.target, t.value / r->total);
        }
    }
    return {b.build(), std::move(map)};
}

// ---------------------------------------------------------------------------
// makeSimple

namespace {

/// One resolution of the choices below a (location, action) pair: the
/// continuous endpoints reached with their path names and weights.
struct Outcome {
    std::string name;
    LocationIndex endpoint;
    double weight;
};

struct Alternative {
    std::string label;
    std::vector<Outcome> outcomes;
};

class Pooler {
public:
    explicit Pooler(const CtmgModel& m) : m_(m) {}

    bool terminal(LocationIndex l) const { return m_.location(l).continuous() || m_.frozen(l); }

    /// Number of compound choices below discrete location d.
    double count(LocationIndex d) {
        if (auto it = counts_.find(d); it != counts_.end()) return it->second;
        double total = 0.0;
        for (ActionIndex b : enabledActions(m_, d)) {
            double prod = 1.0;
            for (const auto& t : m_.row(d, b)->entries)
                if (!terminal(t.target)) prod *= count(t.target);
            total += prod;
        }
        counts_[d] = total;
        return total;
    }

    double count(LocationIndex l, ActionIndex a) {
        double prod = 1.0;
        for (const auto& t : m_.row(l, a)->entries)
            if (!terminal(t.target)) prod *= count(t.target);
        return prod;
    }

    std::vector<Alternative> expand(LocationIndex l, ActionIndex a) {
        std::vector<std::vector<Alternative>> parts;
        const std::string head = "[" + m_.actionName(a);
        for (const auto& t : m_.row(l, a)->entries) parts.push_back(expandTarget(head, t.target, t.value));
        auto alts = product(parts);
        for (auto& alt : alts) alt.label = alt.label.empty() ? m_.actionName(a) : m_.actionName(a) + "(" + alt.label + ")";
        return alts;
    }

private:
    std::vector<Alternative> expandTarget(const std::string& prefix, LocationIndex t, double weight) {
        const std::string name = prefix + ">" + m_.location(t).name;
        if (terminal(t)) return {Alternative{"", {Outcome{name + "]", t, weight}}}};
        std::vector<Alternative> out;
        for (ActionIndex b : enabledActions(m_, t)) {
            std::vector<std::vector<Alternative>> parts;
            const std::string next = name + ">" + m_.actionName(b);
            for (const auto& e : m_.row(t, b)->entries) parts.push_back(expandTarget(next, e.target, weight * e.value));
            for (auto& alt : product(parts)) {
                std::string choice = name.substr(1) + "=" + m_.actionName(b);
                alt.label = alt.label.empty() ? choice : choice + ";" + alt.label;
                out.push_back(std::move(alt));
            }
        }
        return out;
    }

    static std::vector<Alternative> product(const std::vector<std::vector<Alternative>>& parts) {
        std::vector<Alternative> acc{Alternative{}};
        for (const auto& part : parts) {
            std::vector<Alternative> next;
            for (const auto& x : acc) {
                for (const auto& y : part) {
                    Alternative z = x;
                    if (!y.label.empty()) z.label = z.label.empty() ? y.label : z.label + ";" + y.label;
                    z.outcomes.insert(z.outcomes.end(), y.outcomes.begin(), y.outcomes.end());
                    next.push_back(std::move(z));
                }
            }
            acc = std::move(next);
        }
        return acc;
    }

    const CtmgModel& m_;
    std::map<LocationIndex, double> counts_;
};

} // namespace

SimpleModel makeSimple(const CtmgModel& model, std::size_t cap) {
    requireValid(model);
    if (model.twoPlayer()) throw Error(ErrorCode::MultiPlayer, "makeSimple requires a single-player model");
    const std::size_t n = model.numLocations();
    Pooler pooler(model);

    double total = 0.0;
    for (LocationIndex l = 0; l < n; ++l) {
        if (!model.location(l).continuous()) continue;
        for (ActionIndex a : enabledActions(model, l)) total += pooler.count(l, a);
    }
    if (total > static_cast<double>(cap))
        throw Error(ErrorCode::CapExceeded, "pooling needs more than " + std::to_string(cap) + " compound actions");

    std::vector<std::vector<Alternative>> rows(n);
    for (LocationIndex l = 0; l < n; ++l) {
        if (!model.location(l).continuous()) continue;
        for (ActionIndex a : enabledActions(model, l)) {
            auto alts = pooler.expand(l, a);
            rows[l].insert(rows[l].end(), std::make_move_iterator(alts.begin()), std::make_move_iterator(alts.end()));
        }
    }

    ModelBuilder b;
    b.timeBound(model.timeBound()).goalMode(model.goalMode());
    SimpleModel out;
    for (LocationIndex l = 0; l < n; ++l) {
        const Location& loc = model.location(l);
        out.map.push_back(b.addLocation(loc.name, loc.kind, loc.owner, loc.goal));
        out.endpoint.push_back(l);
    }
    std::map<std::string, LocationIndex> underline;
    for (LocationIndex l = 0; l < n; ++l) {
        for (const auto& alt : rows[l]) {
            for (const auto& o : alt.outcomes) {
                if (underline.count(o.name)) continue;
                requireFreshName(b, o.name);
                const Location& end = model.location(o.endpoint);
                underline[o.name] = b.addLocation(o.name, LocationKind::Continuous, end.owner, end.goal);
                out.endpoint.push_back(o.endpoint);
            }
        }
    }

    auto emitRows = [&](LocationIndex source, LocationIndex mirrored) {
        for (const auto& alt : rows[mirrored]) {
            ActionIndex a = b.action(alt.label);
            for (const auto& o : alt.outcomes) b.addRate(source, a, underline.at(o.name), o.weight);
        }
    };
    for (LocationIndex l = 0; l < n; ++l) {
        const Location& loc = model.location(l);
        b.setInitial(l, model.initial(l));
        if (loc.continuous()) {
            emitRows(l, l);
        } else {
            for (const auto& r : loc.probRows) {
                ActionIndex a = b.action(model.actionName(r.action));
                for (const auto& t : r.entries) b.setProb(l, a, t.target, t.value);
            }
        }
    }
    for (const auto& [name, idx] : underline) {
        LocationIndex end = out.endpoint[idx];
        if (model.location(end).continuous()) emitRows(idx, end);
    }
    out.model = b.build();
    return out;
}

} // namespace ctmg
