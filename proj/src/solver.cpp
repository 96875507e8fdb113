#include "ctmg/solver.hpp"

#include <algorithm>
#include <cmath>

#include "dynamics.hpp"

namespace ctmg {

using detail::BoundRows;
using detail::LinearDynamics;

std::string_view objectiveName(Objective objective) {
    switch (objective) {
    case Objective::Max: return "max";
    case Objective::Min: return "min";
    case Objective::Game: return "game";
    }
    return "?";
}

bool maximises(const CtmgModel& model, Objective objective, LocationIndex l) {
    switch (objective) {
    case Objective::Max: return true;
    case Objective::Min: return false;
    case Objective::Game: return model.location(l).owner == Player::Reachability;
    }
    return true;
}

PositionalProfile firstEnabledProfile(const CtmgModel& model) {
    PositionalProfile p;
    p.choice.assign(model.numLocations(), kNoAction);
    for (LocationIndex l : decisionLocations(model)) p.choice[l] = enabledActions(model, l).front();
    return p;
}

void checkOptions(const SolveOptions& opts) {
    if (opts.steps < 2) throw Error(ErrorCode::InvalidArgument, "steps must be at least 2");
    if (!(opts.switchTol > 0.0) || !(opts.tieTol > 0.0))
        throw Error(ErrorCode::InvalidArgument, "tolerances must be positive");
}

// ---------------------------------------------------------------------------
// Schedulers

std::size_t CylindricalScheduler::intervalAt(double t) const {
    if (decisions.empty()) throw Error(ErrorCode::InvalidArgument, "scheduler has no intervals");
    auto it = std::lower_bound(breakpoints.begin() + 1, breakpoints.end(), t);
    std::size_t i = static_cast<std::size_t>(it - (breakpoints.begin() + 1));
    return std::min(i, decisions.size() - 1);
}

void CylindricalScheduler::normalize() {
    if (decisions.size() < 2) return;
    std::vector<double> bps{breakpoints.front()};
    std::vector<DecisionMap> ds{decisions.front()};
    for (std::size_t i = 1; i < decisions.size(); ++i) {
        if (decisions[i] == ds.back()) continue;
        bps.push_back(breakpoints[i]);
        ds.push_back(decisions[i]);
    }
    bps.push_back(breakpoints.back());
    breakpoints = std::move(bps);
    decisions = std::move(ds);
}

std::size_t BoundScheduler::intervalAt(double t) const {
    auto it = std::lower_bound(breakpoints.begin() + 1, breakpoints.end(), t);
    std::size_t i = static_cast<std::size_t>(it - (breakpoints.begin() + 1));
    return std::min(i, profiles.size() - 1);
}

DecisionMap toDecisionMap(const CtmgModel& model, const PositionalProfile& profile) {
    DecisionMap out;
    for (LocationIndex l = 0; l < model.numLocations(); ++l) {
        ActionIndex a = profile.choice.at(l);
        if (a != kNoAction) out.emplace(model.location(l).name, model.actionName(a));
    }
    return out;
}

CylindricalScheduler positionalScheduler(const CtmgModel& model, const PositionalProfile& profile) {
    return CylindricalScheduler{{0.0, model.timeBound()}, {toDecisionMap(model, profile)}};
}

namespace {

double boundTolerance(double tmax) { return 1e-12 * std::max(1.0, tmax); }

} // namespace

BoundScheduler bindScheduler(const CtmgModel& model, const CylindricalScheduler& s) {
    const double tmax = model.timeBound();
    if (s.decisions.empty() || s.breakpoints.size() != s.decisions.size() + 1)
        throw Error(ErrorCode::InvalidArgument, "scheduler needs one decision map per interval");
    if (s.breakpoints.front() != 0.0) throw Error(ErrorCode::OutOfRange, "first breakpoint must be 0");
    if (std::abs(s.breakpoints.back() - tmax) > boundTolerance(tmax))
        throw Error(ErrorCode::TimeBoundMismatch, "scheduler horizon differs from the model time bound");
    for (std::size_t i = 1; i < s.breakpoints.size(); ++i) {
        bool degenerate = tmax == 0.0 && s.breakpoints.size() == 2;
        if (!(s.breakpoints[i] > s.breakpoints[i - 1]) && !degenerate)
            throw Error(ErrorCode::OutOfRange, "breakpoints must be strictly increasing within [0, t_max]");
    }

    BoundScheduler out;
    out.breakpoints = s.breakpoints;
    out.breakpoints.back() = tmax;
    auto decisionLocs = decisionLocations(model);
    for (const auto& map : s.decisions) {
        PositionalProfile p;
        p.choice.assign(model.numLocations(), kNoAction);
        for (const auto& [locName, actName] : map) {
            LocationIndex l = model.locationIndex(locName);
            if (model.frozen(l)) continue;
            ActionIndex a = model.actionIndex(actName);
            auto en = enabledActions(model, l);
            if (std::find(en.begin(), en.end(), a) == en.end())
                throw Error(ErrorCode::DisabledAction, "action '" + actName + "' is not enabled at '" + locName + "'");
            p.choice[l] = a;
        }
        for (LocationIndex l : decisionLocs) {
            if (p.choice[l] != kNoAction) continue;
            auto en = enabledActions(model, l);
            if (en.size() != 1)
                throw Error(ErrorCode::InvalidArgument, "no decision for location '" + model.location(l).name + "'");
            p.choice[l] = en.front();
        }
        out.profiles.push_back(std::move(p));
    }
    return out;
}

CylindricalScheduler restrictToOwner(const CtmgModel& model, const CylindricalScheduler& s, Player player) {
    CylindricalScheduler out = s;
    for (auto& map : out.decisions) {
        for (auto it = map.begin(); it != map.end();) {
            auto l = model.findLocation(it->first);
            if (l && model.location(*l).owner != player)
                it = map.erase(it);
            else
                ++it;
        }
    }
    out.normalize();
    return out;
}

// ---------------------------------------------------------------------------
// Value functions

namespace {

// Fritsch-Butland slope at node i, limited to keep the interpolant monotone.
double pchipSlope(const ValueFunction& vf, LocationIndex l, std::size_t i) {
    const std::size_t n = vf.numNodes();
    auto secant = [&](std::size_t a) {
        return (vf.at(a + 1, l) - vf.at(a, l)) / (vf.times[a + 1] - vf.times[a]);
    };
    if (n < 2) return 0.0;
    if (i == 0) return secant(0);
    if (i == n - 1) return secant(n - 2);
    double d0 = secant(i - 1), d1 = secant(i);
    if (d0 * d1 <= 0.0) return 0.0;
    double h0 = vf.times[i] - vf.times[i - 1], h1 = vf.times[i + 1] - vf.times[i];
    double w0 = 2.0 * h1 + h0, w1 = h1 + 2.0 * h0;
    return (w0 + w1) / (w0 / d0 + w1 / d1);
}

} // namespace

double valueAt(const ValueFunction& vf, LocationIndex l, double t) {
    if (vf.times.empty()) throw Error(ErrorCode::InvalidArgument, "empty value function");
    if (l >= vf.numLocations) throw Error(ErrorCode::UnknownLocation, "location index out of range");
    const double lo = vf.times.front(), hi = vf.times.back();
    const double slack = boundTolerance(hi);
    if (t < lo - slack || t > hi + slack) throw Error(ErrorCode::OutOfRange, "time outside [0, t_max]");
    t = std::clamp(t, lo, hi);
    auto it = std::lower_bound(vf.times.begin(), vf.times.end(), t);
    std::size_t j = static_cast<std::size_t>(it - vf.times.begin());
    if (j < vf.numNodes() && vf.times[j] == t) return vf.at(j, l);
    std::size_t i = j - 1;
    double h = vf.times[i + 1] - vf.times[i];
    double s = (t - vf.times[i]) / h;
    double y0 = vf.at(i, l), y1 = vf.at(i + 1, l);
    double m0 = pchipSlope(vf, l, i), m1 = pchipSlope(vf, l, i + 1);
    double s2 = s * s, s3 = s2 * s;
    return (2 * s3 - 3 * s2 + 1) * y0 + (s3 - 2 * s2 + s) * h * m0 + (-2 * s3 + 3 * s2) * y1 + (s3 - s2) * h * m1;
}

double initialValue(const CtmgModel& model, const ValueFunction& vf) {
    double acc = 0.0;
    for (LocationIndex l = 0; l < model.numLocations(); ++l) acc += model.initial(l) * vf.at(0, l);
    return acc;
}

// ---------------------------------------------------------------------------
// Gains and local improvement

double gain(const CtmgModel& model, std::span<const double> snapshot, LocationIndex l, ActionIndex a) {
    const Location& loc = model.location(l);
    if (!loc.continuous()) throw Error(ErrorCode::NotContinuous, "gain is defined for continuous locations");
    const ActionRow* r = model.row(l, a);
    if (!r || !(r->total > 0.0))
        throw Error(ErrorCode::DisabledAction, "action not enabled at '" + loc.name + "'");
    double acc = 0.0;
    for (const auto& t : r->entries) acc += t.value * (snapshot[t.target] - snapshot[l]);
    return acc;
}

namespace {

class Improver {
public:
    Improver(const LinearDynamics& dyn, Objective objective, const SolveOptions& opts)
        : dyn_(dyn), model_(dyn.model()), objective_(objective), opts_(opts) {
        for (LocationIndex l : decisionLocations(model_)) {
            decisionLocs_.push_back(l);
            enabled_.push_back(enabledActions(model_, l));
        }
        maxOrder_ = std::min<std::size_t>(model_.numLocations() + 1, 12);
        scale_ = 2.0 * std::max(1.0, maxExitRate(model_));
        maxim_.resize(model_.numLocations());
        for (LocationIndex l = 0; l < model_.numLocations(); ++l) maxim_[l] = maximises(model_, objective, l);
    }

    PositionalProfile improve(std::span<const double> snapshot, PositionalProfile profile) {
        std::vector<int> phases;
        if (objective_ == Objective::Game)
            phases = opts_.safetyFirst ? std::vector<int>{1, 0} : std::vector<int>{0, 1};
        else
            phases = {-1};

        constexpr int kMaxRounds = 64;
        for (int round = 0; round < kMaxRounds; ++round) {
            bool changed = false;
            for (int phase : phases) changed |= improvePhase(snapshot, profile, phase);
            if (!changed) break;
        }
        return profile;
    }

private:
    bool inPhase(LocationIndex l, int phase) const {
        if (phase < 0) return true;
        Player p = model_.location(l).owner;
        return (phase == 0) == (p == Player::Reachability);
    }

    bool improvePhase(std::span<const double> snapshot, PositionalProfile& profile, int phase) {
        bool any = false;
        constexpr int kMaxIterations = 256;
        for (int it = 0; it < kMaxIterations; ++it) {
            prepare(snapshot, profile);
            PositionalProfile next = profile;
            bool changed = false;
            for (std::size_t i = 0; i < decisionLocs_.size(); ++i) {
                LocationIndex l = decisionLocs_[i];
                if (!inPhase(l, phase)) continue;
                ActionIndex best = profile.choice[l];
                for (ActionIndex a : enabled_[i]) {
                    if (a != best && compare(l, a, best) > 0) best = a;
                }
                if (best != profile.choice[l]) {
                    next.choice[l] = best;
                    changed = true;
                }
            }
            if (!changed) break;
            profile = std::move(next);
            any = true;
        }
        return any;
    }

    void prepare(std::span<const double> snapshot, const PositionalProfile& profile) {
        rows_ = dyn_.bind(profile);
        derivs_.resize(1);
        derivs_[0].assign(snapshot.begin(), snapshot.end());
        dyn_.complete(derivs_[0], rows_);
    }

    const std::vector<double>& order(std::size_t k) {
        while (derivs_.size() <= k) {
            std::vector<double> next(model_.numLocations());
            dyn_.derivative(derivs_.back(), rows_, next);
            derivs_.push_back(std::move(next));
        }
        return derivs_[k];
    }

    double gainOf(LocationIndex l, ActionIndex a, const std::vector<double>& v) const {
        const ActionRow* r = model_.row(l, a);
        double acc = 0.0;
        if (model_.location(l).continuous()) {
            for (const auto& t : r->entries) acc += t.value * (v[t.target] - v[l]);
        } else {
            for (const auto& t : r->entries) acc += t.value * v[t.target];
        }
        return acc;
    }

    // +1 if a is strictly preferable to b at l, -1 if strictly worse, 0 on a tie.
    int compare(LocationIndex l, ActionIndex a, ActionIndex b) {
        double tol = opts_.tieTol;
        for (std::size_t k = 0; k <= maxOrder_; ++k) {
            const auto& v = order(k);
            double diff = gainOf(l, a, v) - gainOf(l, b, v);
            if (!maxim_[l]) diff = -diff;
            if (diff > tol) return 1;
            if (diff < -tol) return -1;
            tol *= scale_;
        }
        return 0;
    }

    const LinearDynamics& dyn_;
    const CtmgModel& model_;
    Objective objective_;
    SolveOptions opts_;
    std::vector<LocationIndex> decisionLocs_;
    std::vector<std::vector<ActionIndex>> enabled_;
    std::vector<bool> maxim_;
    std::size_t maxOrder_ = 0;
    double scale_ = 2.0;
    BoundRows rows_;
    std::vector<std::vector<double>> derivs_;
};

double gridTime(double tmax, std::size_t steps, std::size_t j) {
    return j == steps ? tmax : tmax * static_cast<double>(j) / static_cast<double>(steps);
}

// Collects nodes in descending time order and emits an ascending ValueFunction.
class NodeRecorder {
public:
    explicit NodeRecorder(std::size_t n) : n_(n) {}

    void record(double t, std::span<const double> v) {
        times_.push_back(t);
        for (double x : v) values_.push_back(std::clamp(x, 0.0, 1.0));
    }

    ValueFunction finish(std::vector<double> switchPoints, std::optional<Objective> objective) {
        ValueFunction vf;
        vf.numLocations = n_;
        const std::size_t nodes = times_.size();
        vf.times.resize(nodes);
        vf.values.resize(values_.size());
        for (std::size_t i = 0; i < nodes; ++i) {
            std::size_t src = nodes - 1 - i;
            vf.times[i] = times_[src];
            std::copy_n(values_.begin() + static_cast<std::ptrdiff_t>(src * n_), n_,
                        vf.values.begin() + static_cast<std::ptrdiff_t>(i * n_));
        }
        vf.switchPoints = std::move(switchPoints);
        vf.objective = objective;
        return vf;
    }

private:
    std::size_t n_;
    std::vector<double> times_;
    std::vector<double> values_;
};

} // namespace

PositionalProfile localImprovement(const CtmgModel& model, std::span<const double> snapshot, Objective objective,
                                   const PositionalProfile& incumbent, const SolveOptions& opts) {
    LinearDynamics dyn(model);
    Improver imp(dyn, objective, opts);
    return imp.improve(snapshot, incumbent);
}

// ---------------------------------------------------------------------------
// solve

SolveResult solve(const CtmgModel& model, Objective objective, const SolveOptions& opts) {
    checkOptions(opts);
    requireValid(model);
    if (objective == Objective::Game && !model.twoPlayer())
        throw Error(ErrorCode::GameOnSinglePlayer, "game objective requires locations of both players");

    const std::size_t n = model.numLocations();
    const double tmax = model.timeBound();
    const std::size_t steps = opts.steps;

    LinearDynamics dyn(model);
    Improver imp(dyn, objective, opts);

    PositionalProfile profile = firstEnabledProfile(model);
    BoundRows rows = dyn.bind(profile);
    std::vector<double> v(n), trial(n), probe(n);
    dyn.initialValues(v, rows);
    profile = imp.improve(v, profile);
    rows = dyn.bind(profile);
    dyn.complete(v, rows);

    NodeRecorder rec(n);
    rec.record(tmax, v);

    // Segments in descending time; segProfiles[i] holds on (bps[i], bps[i-1]].
    std::vector<double> bpsDesc;
    std::vector<PositionalProfile> segProfiles{profile};
    double segStart = tmax;

    if (tmax > 0.0) {
        for (std::size_t jj = steps; jj-- > 0;) {
            const double tNext = gridTime(tmax, steps, jj);
            double t = gridTime(tmax, steps, jj + 1);
            int switchesHere = 0;
            while (t > tNext) {
                const double dt = t - tNext;
                dyn.rk4(v, dt, rows, trial);
                PositionalProfile cand = imp.improve(trial, profile);
                if (cand == profile || switchesHere > 32) {
                    v.swap(trial);
                    t = tNext;
                    break;
                }
                double lo = 0.0, hi = dt;
                PositionalProfile hiProfile = std::move(cand);
                while (hi - lo > opts.switchTol) {
                    double mid = 0.5 * (lo + hi);
                    dyn.rk4(v, mid, rows, probe);
                    PositionalProfile p = imp.improve(probe, profile);
                    if (p == profile) {
                        lo = mid;
                    } else {
                        hi = mid;
                        hiProfile = std::move(p);
                    }
                }
                if (lo > 0.0) {
                    dyn.rk4(v, lo, rows, v);
                    t = std::max(t - lo, tNext);
                    if (t > tNext) rec.record(t, v);
                }
                ++switchesHere;

                if (segStart - t < opts.switchTol) {
                    // Switch coincides with the start of the current segment:
                    // the segment's profile was chosen on a tie; replace it.
                    segProfiles.back() = hiProfile;
                    if (segProfiles.size() >= 2 && segProfiles[segProfiles.size() - 2] == hiProfile) {
                        segProfiles.pop_back();
                        bpsDesc.pop_back();
                        segStart = bpsDesc.empty() ? tmax : bpsDesc.back();
                    }
                } else {
                    bpsDesc.push_back(t);
                    segProfiles.push_back(hiProfile);
                    segStart = t;
                }
                profile = std::move(hiProfile);
                rows = dyn.bind(profile);
                dyn.complete(v, rows);
            }
            rec.record(tNext, v);
        }
    }

    SolveResult result;
    std::vector<double> switchPoints(bpsDesc.rbegin(), bpsDesc.rend());
    result.scheduler.breakpoints.push_back(0.0);
    for (double b : switchPoints) result.scheduler.breakpoints.push_back(b);
    result.scheduler.breakpoints.push_back(tmax);
    for (auto it = segProfiles.rbegin(); it != segProfiles.rend(); ++it)
        result.scheduler.decisions.push_back(toDecisionMap(model, *it));
    result.values = rec.finish(std::move(switchPoints), objective);
    return result;
}

// ---------------------------------------------------------------------------
// evaluateScheduler

ValueFunction evaluateScheduler(const CtmgModel& model, const CylindricalScheduler& scheduler,
                                const SolveOptions& opts) {
    checkOptions(opts);
    requireValid(model);
    BoundScheduler bound = bindScheduler(model, scheduler);
    const std::size_t n = model.numLocations();
    const double tmax = model.timeBound();

    // Descending node times: uniform grid plus interior breakpoints.
    std::vector<double> nodes;
    nodes.reserve(opts.steps + bound.breakpoints.size());
    for (std::size_t j = 0; j <= opts.steps; ++j) nodes.push_back(gridTime(tmax, opts.steps, j));
    for (std::size_t i = 1; i + 1 < bound.breakpoints.size(); ++i) nodes.push_back(bound.breakpoints[i]);
    std::sort(nodes.begin(), nodes.end(), std::greater<>());
    nodes.erase(std::unique(nodes.begin(), nodes.end()), nodes.end());

    LinearDynamics dyn(model);
    std::vector<BoundRows> rows;
    for (const auto& p : bound.profiles) rows.push_back(dyn.bind(p));

    std::vector<double> v(n);
    dyn.initialValues(v, rows[bound.intervalAt(tmax)]);
    NodeRecorder rec(n);
    rec.record(tmax, v);
    for (std::size_t i = 1; i < nodes.size(); ++i) {
        const double t = nodes[i - 1], tNext = nodes[i];
        std::size_t interval = bound.intervalAt(0.5 * (t + tNext));
        dyn.rk4(v, t - tNext, rows[interval], v);
        dyn.complete(v, rows[bound.intervalAt(tNext)]);
        rec.record(tNext, v);
    }
    std::vector<double> switchPoints(bound.breakpoints.begin() + 1, bound.breakpoints.end() - 1);
    return rec.finish(std::move(switchPoints), std::nullopt);
}

ValueFunction evaluateProfile(const CtmgModel& model, const PositionalProfile& profile, const SolveOptions& opts) {
    return evaluateScheduler(model, positionalScheduler(model, profile), opts);
}

// ---------------------------------------------------------------------------
// checkNash

namespace {

// Derivative at x0 of the quadratic through (x0,y0), (x1,y1), (x2,y2).
double quadraticSlope(double x0, double y0, double x1, double y1, double x2, double y2) {
    double a = x1 - x0, b = x2 - x0;
    return (y1 * b * b - y2 * a * a - y0 * (b * b - a * a)) / (a * b * (b - a));
}

} // namespace

NashReport checkNash(const CtmgModel& model, const ValueFunction& vf, const CylindricalScheduler& scheduler,
                     double tol) {
    NashReport rep;
    const Objective objective = vf.objective.value_or(Objective::Game);
    BoundScheduler bound = bindScheduler(model, scheduler);
    const std::size_t nodes = vf.numNodes();
    auto decisionLocs = decisionLocations(model);

    auto note = [&](double& slot, double value, double t, LocationIndex l) {
        if (value > slot) {
            slot = value;
            if (value > tol) {
                rep.worstTime = t;
                rep.worstLocation = l;
            }
        }
    };

    for (std::size_t i = 0; i < nodes; ++i) {
        const double t = vf.times[i];
        auto snap = vf.node(i);
        const PositionalProfile& chosen = bound.profiles[bound.intervalAt(t)];
        for (LocationIndex l : decisionLocs) {
            const Location& loc = model.location(l);
            const bool up = maximises(model, objective, l);
            double best = up ? -INFINITY : INFINITY;
            double mine = 0.0;
            for (ActionIndex a : enabledActions(model, l)) {
                double g = 0.0;
                const ActionRow* r = model.row(l, a);
                if (loc.continuous()) {
                    for (const auto& e : r->entries) g += e.value * (snap[e.target] - snap[l]);
                } else {
                    for (const auto& e : r->entries) g += e.value * snap[e.target];
                }
                best = up ? std::max(best, g) : std::min(best, g);
                if (a == chosen.choice[l]) mine = g;
            }
            note(rep.decisionResidual, std::abs(best - mine), t, l);
            if (loc.discrete()) {
                note(rep.discreteResidual, std::abs(snap[l] - best), t, l);
                continue;
            }
            // Stencil nodes stay within the smooth piece between switch points.
            const std::size_t k = static_cast<std::size_t>(
                std::lower_bound(vf.switchPoints.begin(), vf.switchPoints.end(), t) - vf.switchPoints.begin());
            const double pieceLo = k == 0 ? vf.times.front() : vf.switchPoints[k - 1];
            const double pieceHi = k < vf.switchPoints.size() ? vf.switchPoints[k] : vf.times.back();
            const std::size_t lo = static_cast<std::size_t>(
                std::lower_bound(vf.times.begin(), vf.times.end(), pieceLo) - vf.times.begin());
            const std::size_t hi = static_cast<std::size_t>(
                std::upper_bound(vf.times.begin(), vf.times.end(), pieceHi) - vf.times.begin() - 1);
            std::size_t j1, j2;
            if (i > lo && i < hi) {
                j1 = i - 1;
                j2 = i + 1;
            } else if (i + 2 <= hi) {
                j1 = i + 1;
                j2 = i + 2;
            } else if (i >= lo + 2) {
                j1 = i - 1;
                j2 = i - 2;
            } else {
                continue;
            }
            const double slope =
                quadraticSlope(t, vf.at(i, l), vf.times[j1], vf.at(j1, l), vf.times[j2], vf.at(j2, l));
            note(rep.derivativeResidual, std::abs(-slope - best), t, l);
        }
    }
    rep.passed = rep.derivativeResidual <= tol && rep.decisionResidual <= tol && rep.discreteResidual <= tol;
    return rep;
}

} // namespace ctmg
