#include "ctmg/verify.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <random>
#include <string>

namespace ctmg {

// ---------------------------------------------------------------------------
// Poisson step bound

std::size_t poissonStepBound(double lambda, double horizon, double epsilon) {
    if (!(lambda >= 0.0) || !(horizon >= 0.0) || !(epsilon > 0.0))
        throw Error(ErrorCode::InvalidArgument, "poissonStepBound needs non-negative rate and time, positive epsilon");
    const double mu = lambda * horizon;
    if (mu == 0.0 || epsilon >= 1.0) return 0;
    // Log-space pmf up to a point far in the tail, then suffix sums.
    const std::size_t kmax = static_cast<std::size_t>(mu + 50.0 * std::sqrt(mu) + 100.0);
    std::vector<double> pmf(kmax + 1);
    const double logMu = std::log(mu);
    for (std::size_t k = 0; k <= kmax; ++k)
        pmf[k] = std::exp(-mu + static_cast<double>(k) * logMu - std::lgamma(static_cast<double>(k) + 1.0));
    double tail = 0.0; // P(N > n)
    std::vector<double> tails(kmax + 1);
    for (std::size_t n = kmax + 1; n-- > 0;) {
        tails[n] = tail;
        tail += pmf[n];
    }
    for (std::size_t n = 0; n <= kmax; ++n)
        if (tails[n] < epsilon) return n;
    return kmax;
}

// ---------------------------------------------------------------------------
// Truncated uniformisation

namespace {

void requireEnabledProfile(const CtmgModel& model, const PositionalProfile& profile) {
    if (profile.choice.size() != model.numLocations())
        throw Error(ErrorCode::InvalidArgument, "profile size differs from the number of locations");
    for (LocationIndex l : decisionLocations(model)) {
        ActionIndex a = profile.choice[l];
        auto en = enabledActions(model, l);
        if (std::find(en.begin(), en.end(), a) == en.end())
            throw Error(ErrorCode::DisabledAction, "profile action not enabled at '" + model.location(l).name + "'");
    }
}

} // namespace

ValueBounds truncatedUniformizationValue(const CtmgModel& model, const PositionalProfile& profile, double epsilon) {
    requireValid(model);
    requireEnabledProfile(model, profile);
    const std::size_t n = model.numLocations();
    const bool absorbing = model.goalMode() == GoalMode::Absorbing;

    // States: continuous non-frozen locations, plus one sink for frozen goals.
    std::vector<std::size_t> state(n, SIZE_MAX);
    std::vector<LocationIndex> cont;
    for (LocationIndex l = 0; l < n; ++l)
        if (model.location(l).continuous() && !model.frozen(l)) {
            state[l] = cont.size();
            cont.push_back(l);
        }
    const std::size_t sink = cont.size();
    const std::size_t S = cont.size() + 1;

    // Distribution over states reached from each location in zero time.
    std::vector<std::vector<double>> resolved(n);
    auto order = discreteEvaluationOrder(model);
    for (LocationIndex l = 0; l < n; ++l) {
        resolved[l].assign(S, 0.0);
        if (model.frozen(l))
            resolved[l][sink] = 1.0;
        else if (model.location(l).continuous())
            resolved[l][state[l]] = 1.0;
    }
    for (LocationIndex d : order) {
        if (model.frozen(d)) continue;
        const ActionRow* r = model.row(d, profile.choice[d]);
        for (const auto& t : r->entries)
            for (std::size_t s = 0; s < S; ++s) resolved[d][s] += t.value * resolved[t.target][s];
    }

    double lambda = maxExitRate(model);
    if (lambda == 0.0) lambda = 1.0;
    // Uniformised one-step matrix, row-major over states.
    std::vector<double> M(S * S, 0.0);
    for (std::size_t s = 0; s < cont.size(); ++s) {
        LocationIndex l = cont[s];
        ActionIndex a = profile.choice[l];
        double stay = 1.0;
        if (a != kNoAction) {
            const ActionRow* r = model.row(l, a);
            for (const auto& t : r->entries)
                for (std::size_t u = 0; u < S; ++u) M[s * S + u] += t.value / lambda * resolved[t.target][u];
            stay -= r->total / lambda;
        }
        M[s * S + s] += stay;
    }
    M[sink * S + sink] = 1.0;

    std::vector<double> target(S, 0.0); // indicator of G among states
    target[sink] = 1.0;
    if (!absorbing)
        for (std::size_t s = 0; s < cont.size(); ++s) target[s] = model.location(cont[s]).goal ? 1.0 : 0.0;

    ValueBounds out;
    out.rate = lambda;
    out.steps = poissonStepBound(lambda, model.timeBound(), epsilon);
    const double mu = lambda * model.timeBound();

    std::vector<double> u = target, next(S), acc(S, 0.0);
    for (std::size_t k = 0; k <= out.steps; ++k) {
        double w = mu == 0.0 ? (k == 0 ? 1.0 : 0.0)
                             : std::exp(-mu + static_cast<double>(k) * std::log(mu) -
                                        std::lgamma(static_cast<double>(k) + 1.0));
        for (std::size_t s = 0; s < S; ++s) acc[s] += w * u[s];
        for (std::size_t s = 0; s < S; ++s) {
            double v = 0.0;
            for (std::size_t x = 0; x < S; ++x) v += M[s * S + x] * u[x];
            next[s] = v;
        }
        u.swap(next);
    }

    out.lower.assign(n, 0.0);
    out.upper.assign(n, 0.0);
    for (LocationIndex l = 0; l < n; ++l) {
        double v = 0.0;
        for (std::size_t s = 0; s < S; ++s) v += resolved[l][s] * acc[s];
        out.lower[l] = std::clamp(v, 0.0, 1.0);
        out.upper[l] = std::min(1.0, out.lower[l] + epsilon);
        out.gap = std::max(out.gap, out.upper[l] - out.lower[l]);
    }
    for (LocationIndex l = 0; l < n; ++l) {
        out.initialLower += model.initial(l) * out.lower[l];
        out.initialUpper += model.initial(l) * out.upper[l];
    }
    out.initialUpper = std::min(1.0, out.initialUpper);
    return out;
}

// ---------------------------------------------------------------------------
// Grid oracle

namespace {

class EulerGrid {
public:
    EulerGrid(const CtmgModel& model, Objective objective) : m_(model) {
        for (LocationIndex l = 0; l < m_.numLocations(); ++l) {
            up_.push_back(maximises(model, objective, l));
            const Location& loc = m_.location(l);
            if (m_.frozen(l)) continue;
            if (loc.continuous() && !enabledActions(model, l).empty()) cont_.push_back(l);
        }
        for (LocationIndex d : discreteEvaluationOrder(model))
            if (!m_.frozen(d)) disc_.push_back(d);
    }

    void init(std::vector<double>& v) const {
        v.assign(m_.numLocations(), 0.0);
        for (LocationIndex l = 0; l < m_.numLocations(); ++l) v[l] = m_.location(l).goal ? 1.0 : 0.0;
        settle(v);
    }

    void step(std::vector<double>& v, double h, std::vector<double>& scratch) const {
        scratch = v;
        for (LocationIndex l : cont_) {
            double best = 0.0;
            bool first = true;
            for (const auto& r : m_.location(l).rateRows) {
                double g = 0.0;
                for (const auto& t : r.entries) g += t.value * (v[t.target] - v[l]);
                if (first || (up_[l] ? g > best : g < best)) best = g;
                first = false;
            }
            scratch[l] = v[l] + h * best;
        }
        v.swap(scratch);
        settle(v);
    }

private:
    void settle(std::vector<double>& v) const {
        for (LocationIndex d : disc_) {
            double best = 0.0;
            bool first = true;
            for (const auto& r : m_.location(d).probRows) {
                double s = 0.0;
                for (const auto& t : r.entries) s += t.value;
                if (std::abs(s - 1.0) > kProbabilityTolerance) continue;
                double g = 0.0;
                for (const auto& t : r.entries) g += t.value * v[t.target];
                if (first || (up_[d] ? g > best : g < best)) best = g;
                first = false;
            }
            v[d] = best;
        }
    }

    const CtmgModel& m_;
    std::vector<bool> up_;
    std::vector<LocationIndex> cont_;
    std::vector<LocationIndex> disc_;
};

void checkOracleArgs(const CtmgModel& model, Objective objective, std::size_t steps) {
    if (steps < 2) throw Error(ErrorCode::InvalidArgument, "timeSteps must be at least 2");
    requireValid(model);
    if (objective == Objective::Game && !model.twoPlayer())
        throw Error(ErrorCode::GameOnSinglePlayer, "game objective requires locations of both players");
}

} // namespace

ValueFunction gridOracle(const CtmgModel& model, Objective objective, std::size_t timeSteps) {
    checkOracleArgs(model, objective, timeSteps);
    EulerGrid grid(model, objective);
    const std::size_t n = model.numLocations();
    const double tmax = model.timeBound();
    std::vector<double> v, scratch;
    grid.init(v);

    ValueFunction vf;
    vf.numLocations = n;
    vf.objective = objective;
    if (tmax == 0.0) {
        vf.times = {0.0};
        vf.values = v;
        return vf;
    }
    const double h = tmax / static_cast<double>(timeSteps);
    vf.times.resize(timeSteps + 1);
    vf.values.resize((timeSteps + 1) * n);
    auto store = [&](std::size_t j) {
        vf.times[j] = j == timeSteps ? tmax : tmax * static_cast<double>(j) / static_cast<double>(timeSteps);
        for (LocationIndex l = 0; l < n; ++l) vf.values[j * n + l] = std::clamp(v[l], 0.0, 1.0);
    };
    store(timeSteps);
    for (std::size_t j = timeSteps; j-- > 0;) {
        grid.step(v, h, scratch);
        store(j);
    }
    return vf;
}

std::vector<double> gridOracleInitial(const CtmgModel& model, Objective objective, std::size_t timeSteps) {
    checkOracleArgs(model, objective, timeSteps);
    EulerGrid grid(model, objective);
    std::vector<double> v, scratch;
    grid.init(v);
    if (model.timeBound() == 0.0) return v;
    const double h = model.timeBound() / static_cast<double>(timeSteps);
    for (std::size_t j = 0; j < timeSteps; ++j) grid.step(v, h, scratch);
    return v;
}

std::vector<double> richardsonOracle(const CtmgModel& model, Objective objective, std::size_t timeSteps) {
    auto coarse = gridOracleInitial(model, objective, timeSteps);
    auto fine = gridOracleInitial(model, objective, 2 * timeSteps);
    std::vector<double> out(coarse.size());
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = 2.0 * fine[i] - coarse[i];
    return out;
}

std::size_t recommendedOracleSteps(const CtmgModel& model) {
    const double work = maxExitRate(model) * model.timeBound();
    return std::max<std::size_t>(1000, static_cast<std::size_t>(std::ceil(4000.0 * work)));
}

// ---------------------------------------------------------------------------
// Positional enumeration

EnumerationResult enumeratePositional(const CtmgModel& model, Objective objective, const SolveOptions& opts,
                                      std::size_t cap, Execution exec) {
    requireValid(model);
    checkOptions(opts);
    if (objective == Objective::Game && !model.twoPlayer())
        throw Error(ErrorCode::GameOnSinglePlayer, "game objective requires locations of both players");

    // Reachability decisions are the high digits so that, for games, each
    // block of consecutive indices fixes one reachability profile.
    std::vector<LocationIndex> locs;
    for (LocationIndex l : decisionLocations(model))
        if (objective != Objective::Game || model.location(l).owner == Player::Reachability) locs.push_back(l);
    const std::size_t reachDigits = locs.size();
    if (objective == Objective::Game)
        for (LocationIndex l : decisionLocations(model))
            if (model.location(l).owner == Player::Safety) locs.push_back(l);

    std::vector<std::vector<ActionIndex>> choices;
    std::size_t total = 1, inner = 1;
    for (std::size_t i = 0; i < locs.size(); ++i) {
        choices.push_back(enabledActions(model, locs[i]));
        if (total > cap / choices.back().size())
            throw Error(ErrorCode::CapExceeded, "more than " + std::to_string(cap) + " positional profiles");
        total *= choices.back().size();
        if (i >= reachDigits) inner *= choices.back().size();
    }

    const PositionalProfile base = firstEnabledProfile(model);
    auto decode = [&](std::size_t index) {
        PositionalProfile p = base;
        for (std::size_t i = locs.size(); i-- > 0;) {
            p.choice[locs[i]] = choices[i][index % choices[i].size()];
            index /= choices[i].size();
        }
        return p;
    };
    auto evaluate = [&](std::size_t index) { return initialValue(model, evaluateProfile(model, decode(index), opts)); };

    std::vector<double> values(total);
    if (exec == Execution::Serial) {
        for (std::size_t i = 0; i < total; ++i) values[i] = evaluate(i);
    } else {
        std::exception_ptr failure;
#pragma omp parallel for schedule(dynamic)
        for (std::ptrdiff_t i = 0; i < static_cast<std::ptrdiff_t>(total); ++i) {
            try {
                values[static_cast<std::size_t>(i)] = evaluate(static_cast<std::size_t>(i));
            } catch (...) {
#pragma omp critical
                if (!failure) failure = std::current_exception();
            }
        }
        if (failure) std::rethrow_exception(failure);
    }

    std::size_t best = 0;
    if (objective == Objective::Game) {
        if (reachDigits == locs.size()) inner = 1;
        double bestValue = -1.0;
        for (std::size_t block = 0; block < total; block += inner) {
            std::size_t worst = block;
            for (std::size_t i = block + 1; i < block + inner; ++i)
                if (values[i] < values[worst]) worst = i;
            if (values[worst] > bestValue) {
                bestValue = values[worst];
                best = worst;
            }
        }
    } else {
        const bool up = objective == Objective::Max;
        for (std::size_t i = 1; i < total; ++i)
            if (up ? values[i] > values[best] : values[i] < values[best]) best = i;
    }
    return EnumerationResult{decode(best), values[best], total};
}

// ---------------------------------------------------------------------------
// Monte Carlo

std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

std::uint64_t runSeed(std::uint64_t seed, std::uint64_t run) { return splitmix64(splitmix64(seed) ^ run); }

namespace {

class PathSampler {
public:
    PathSampler(const CtmgModel& model, const CylindricalScheduler& scheduler)
        : m_(model), bound_(bindScheduler(model, scheduler)) {
        for (LocationIndex l = 0; l < model.numLocations(); ++l)
            if (model.initial(l) > 0.0) initial_.emplace_back(l, model.initial(l));
    }

    bool run(std::uint64_t seed) const {
        std::mt19937_64 rng(seed);
        auto uniform = [&rng] { return static_cast<double>(rng() >> 11) * 0x1.0p-53; };
        const double tmax = m_.timeBound();
        const bool absorbing = m_.goalMode() == GoalMode::Absorbing;
        const auto& bps = bound_.breakpoints;

        LocationIndex l = initial_.back().first;
        {
            double u = uniform(), acc = 0.0;
            for (auto [loc, p] : initial_) {
                acc += p;
                if (u < acc) {
                    l = loc;
                    break;
                }
            }
        }

        double t = 0.0;
        for (;;) {
            if (absorbing && m_.location(l).goal) return true;
            const Location& loc = m_.location(l);
            if (loc.discrete()) {
                const ActionRow* r = m_.row(l, bound_.profiles[bound_.intervalAt(t)].choice[l]);
                l = pick(*r, uniform());
                continue;
            }
            if (t >= tmax) break;
            // Interval governing (t, t + dt): first i with t < b[i+1].
            auto it = std::upper_bound(bps.begin() + 1, bps.end(), t);
            std::size_t k = std::min(static_cast<std::size_t>(it - (bps.begin() + 1)), bound_.profiles.size() - 1);
            const double end = std::min(bps[k + 1], tmax);
            ActionIndex a = bound_.profiles[k].choice[l];
            const ActionRow* r = a == kNoAction ? nullptr : m_.row(l, a);
            if (!r || !(r->total > 0.0)) {
                t = end;
                continue;
            }
            const double dt = -std::log(1.0 - uniform()) / r->total;
            if (t + dt > end) {
                t = end;
                continue;
            }
            t += dt;
            l = pick(*r, uniform());
        }
        return !absorbing && m_.location(l).goal;
    }

private:
    static LocationIndex pick(const ActionRow& r, double u) {
        double x = u * r.total, acc = 0.0;
        for (const auto& e : r.entries) {
            acc += e.value;
            if (x < acc) return e.target;
        }
        return r.entries.back().target;
    }

    const CtmgModel& m_;
    BoundScheduler bound_;
    std::vector<std::pair<LocationIndex, double>> initial_;
};

} // namespace

SimResult simulate(const CtmgModel& model, const CylindricalScheduler& scheduler, std::size_t runs,
                   std::uint64_t seed, Execution exec) {
    if (runs == 0) throw Error(ErrorCode::InvalidArgument, "runs must be positive");
    requireValid(model);
    PathSampler sampler(model, scheduler);

    std::size_t successes = 0;
    if (exec == Execution::Serial) {
        for (std::size_t i = 0; i < runs; ++i) successes += sampler.run(runSeed(seed, i)) ? 1 : 0;
    } else {
        long long count = 0;
#pragma omp parallel for reduction(+ : count) schedule(static)
        for (long long i = 0; i < static_cast<long long>(runs); ++i)
            count += sampler.run(runSeed(seed, static_cast<std::uint64_t>(i))) ? 1 : 0;
        successes = static_cast<std::size_t>(count);
    }
    SimResult res;
    res.runs = runs;
    res.seed = seed;
    res.successes = successes;
    res.estimate = static_cast<double>(successes) / static_cast<double>(runs);
    res.standardError = std::sqrt(res.estimate * (1.0 - res.estimate) / static_cast<double>(runs));
    return res;
}

// ---------------------------------------------------------------------------
// Scheduler distance

namespace {

std::string freshName(std::string base, auto&& taken) {
    while (taken(base)) base += "'";
    return base;
}

} // namespace

DifferenceModel differenceModel(const CtmgModel& model, const CylindricalScheduler& d, const CylindricalScheduler& e) {
    requireValid(model);
    BoundScheduler bd = bindScheduler(model, d);
    BoundScheduler be = bindScheduler(model, e);
    const std::size_t n = model.numLocations();
    const bool absorbing = model.goalMode() == GoalMode::Absorbing;

    std::vector<double> merged = bd.breakpoints;
    merged.insert(merged.end(), be.breakpoints.begin(), be.breakpoints.end());
    std::sort(merged.begin(), merged.end());
    merged.erase(std::unique(merged.begin(), merged.end()), merged.end());
    if (merged.size() < 2) merged.push_back(merged.back());

    ModelBuilder b;
    b.timeBound(model.timeBound()).goalMode(GoalMode::Absorbing);
    auto actionTaken = [&](const std::string& s) { return model.findAction(s).has_value(); };
    for (const auto& a : model.actions()) b.action(a);
    const std::string stay = freshName("stay", actionTaken);

    auto sink = [&](LocationIndex l) { return absorbing && model.location(l).goal; };
    for (LocationIndex l = 0; l < n; ++l) {
        const Location& loc = model.location(l);
        b.addLocation(loc.name, sink(l) ? LocationKind::Continuous : loc.kind, loc.owner, false);
    }
    const std::string goalName =
        freshName("g", [&](const std::string& s) { return model.findLocation(s).has_value(); });
    const LocationIndex g = b.addLocation(goalName, LocationKind::Continuous, Player::Reachability, true);

    DifferenceModel out;
    out.goal = g;
    out.scheduler.breakpoints = merged;
    for (LocationIndex l = 0; l < n; ++l) {
        b.setInitial(l, model.initial(l));
        if (sink(l)) {
            b.setRate(l, b.action(stay), l, 1.0);
            continue;
        }
        const Location& loc = model.location(l);
        for (const auto& r : loc.rows())
            for (const auto& t : r.entries) {
                if (loc.continuous())
                    b.setRate(l, r.action, t.target, t.value);
                else
                    b.setProb(l, r.action, t.target, t.value);
            }
    }

    for (std::size_t i = 0; i + 1 < merged.size(); ++i) {
        const double mid = 0.5 * (merged[i] + merged[i + 1]);
        const auto& pd = bd.profiles[bd.intervalAt(mid)];
        const auto& pe = be.profiles[be.intervalAt(mid)];
        DecisionMap map;
        for (LocationIndex l = 0; l < n; ++l) {
            const Location& loc = model.location(l);
            if (sink(l)) {
                map.emplace(loc.name, stay);
                continue;
            }
            ActionIndex ad = pd.choice[l], ae = pe.choice[l];
            if (ad == kNoAction) continue;
            if (ad == ae) {
                map.emplace(loc.name, model.actionName(ad));
                continue;
            }
            const ActionIndex lo = std::min(ad, ae), hi = std::max(ad, ae);
            const std::string name =
                freshName(model.actionName(lo) + "|" + model.actionName(hi), actionTaken);
            const ActionIndex combined = b.action(name);
            if (loc.continuous())
                b.setRate(l, combined, g, exitRate(model, l, ad) + exitRate(model, l, ae));
            else
                b.setProb(l, combined, g, 1.0);
            map.emplace(loc.name, name);
        }
        out.scheduler.decisions.push_back(std::move(map));
    }
    out.model = b.build();
    return out;
}

double schedulerDistance(const CtmgModel& model, const CylindricalScheduler& d, const CylindricalScheduler& e,
                         const SolveOptions& opts) {
    DifferenceModel dm = differenceModel(model, d, e);
    return initialValue(dm.model, evaluateScheduler(dm.model, dm.scheduler, opts));
}

// ---------------------------------------------------------------------------
// Batches

std::vector<SolveResult> solveAll(const std::vector<CtmgModel>& models, Objective objective, const SolveOptions& opts,
                                  Execution exec) {
    std::vector<SolveResult> out(models.size());
    if (exec == Execution::Serial) {
        for (std::size_t i = 0; i < models.size(); ++i) out[i] = solve(models[i], objective, opts);
        return out;
    }
    std::vector<std::exception_ptr> failures(models.size());
#pragma omp parallel for schedule(dynamic)
    for (std::ptrdiff_t i = 0; i < static_cast<std::ptrdiff_t>(models.size()); ++i) {
        try {
            out[static_cast<std::size_t>(i)] = solve(models[static_cast<std::size_t>(i)], objective, opts);
        } catch (...) {
            failures[static_cast<std::size_t>(i)] = std::current_exception();
        }
    }
    for (auto& f : failures)
        if (f) std::rethrow_exception(f);
    return out;
}

} // namespace ctmg
