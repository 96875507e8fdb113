#include "ctmg/cli.hpp"

#include <CLI11.hpp>

#include <ostream>
#include <string>

#include "ctmg/format.hpp"
#include "ctmg/solver.hpp"
#include "ctmg/transform.hpp"
#include "ctmg/verify.hpp"

namespace ctmg::cli {

namespace {

struct Args {
    std::string model;
    std::string objective = "max";
    std::size_t steps = 10000;
    double switchTol = 1e-9;
    double tieTol = 1e-12;
    bool safetyFirst = false;
    std::string out;
    std::string csv;
    int precision = 6;
    std::string scheduler;
    std::string other;
    std::size_t runs = 1000000;
    std::uint64_t seed = 1;
    double epsilon = 1e-8;
    std::string op;
    std::string method;
    double rate = 0.0;
    std::size_t cap = 0;
};

Objective parseObjective(const std::string& s) {
    if (s == "max") return Objective::Max;
    if (s == "min") return Objective::Min;
    return Objective::Game;
}

SolveOptions solveOptions(const Args& a) {
    SolveOptions o;
    o.steps = a.steps;
    o.switchTol = a.switchTol;
    o.tieTol = a.tieTol;
    o.safetyFirst = a.safetyFirst;
    return o;
}

void addSolveFlags(CLI::App* cmd, Args& a) {
    cmd->add_option("--objective", a.objective, "max, min or game")
        ->check(CLI::IsMember({"max", "min", "game"}));
    cmd->add_option("--steps", a.steps, "grid steps N")->check(CLI::Range(std::size_t{2}, std::size_t{1} << 40));
    cmd->add_option("--switch-tol", a.switchTol, "switch bisection tolerance")->check(CLI::PositiveNumber);
    cmd->add_option("--tie-tol", a.tieTol, "gain tie tolerance")->check(CLI::PositiveNumber);
    cmd->add_flag("--safety-first", a.safetyFirst, "improve the safety player first");
}

void addPrecision(CLI::App* cmd, Args& a) {
    cmd->add_option("--precision", a.precision, "decimals in printed values")->check(CLI::Range(0, 17));
}

std::string fixed(double v, const Args& a) { return formatFixed(v, a.precision); }

CtmgModel loadModel(const std::string& path) { return parseModel(readFile(path)); }

} // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
    Args a;
    CLI::App app{"Time-bounded reachability for continuous-time Markov games"};
    app.require_subcommand(1);

    auto* validateCmd = app.add_subcommand("validate", "check a model file");
    validateCmd->add_option("model", a.model)->required();

    auto* solveCmd = app.add_subcommand("solve", "optimal values and scheduler");
    solveCmd->add_option("model", a.model)->required();
    addSolveFlags(solveCmd, a);
    addPrecision(solveCmd, a);
    solveCmd->add_option("--out", a.out, "scheduler artifact (default <model>.sched)");
    solveCmd->add_option("--csv", a.csv, "value curve CSV");

    auto* evalCmd = app.add_subcommand("evaluate", "value of a fixed scheduler");
    evalCmd->add_option("model", a.model)->required();
    evalCmd->add_option("--scheduler", a.scheduler, "scheduler artifact")->required();
    evalCmd->add_option("--steps", a.steps, "grid steps N")->check(CLI::Range(std::size_t{2}, std::size_t{1} << 40));
    evalCmd->add_option("--out", a.out, "value curve CSV");
    addPrecision(evalCmd, a);

    auto* transformCmd = app.add_subcommand("transform", "model-to-model constructions");
    transformCmd->add_option("model", a.model)->required();
    transformCmd->add_option("--op", a.op)
        ->required()
        ->check(CLI::IsMember({"early-to-late", "late-to-early", "make-simple", "uniformise"}));
    transformCmd->add_option("--out", a.out, "output model (default stdout)");
    transformCmd->add_option("--rate", a.rate, "uniformisation rate")->check(CLI::PositiveNumber);
    transformCmd->add_option("--cap", a.cap, "compound action cap for make-simple")->check(CLI::PositiveNumber);

    auto* simCmd = app.add_subcommand("simulate", "Monte Carlo estimate under a scheduler");
    simCmd->add_option("model", a.model)->required();
    simCmd->add_option("--scheduler", a.scheduler, "scheduler artifact")->required();
    simCmd->add_option("--runs", a.runs)->check(CLI::Range(std::size_t{1}, std::size_t{1} << 40));
    simCmd->add_option("--seed", a.seed);
    addPrecision(simCmd, a);

    auto* distCmd = app.add_subcommand("distance", "scheduler distance");
    distCmd->add_option("model", a.model)->required();
    distCmd->add_option("first", a.scheduler)->required();
    distCmd->add_option("second", a.other)->required();
    distCmd->add_option("--steps", a.steps, "grid steps N")->check(CLI::Range(std::size_t{2}, std::size_t{1} << 40));
    addPrecision(distCmd, a);

    auto* oracleCmd = app.add_subcommand("oracle", "independent reference values");
    oracleCmd->add_option("model", a.model)->required();
    oracleCmd->add_option("--method", a.method)
        ->required()
        ->check(CLI::IsMember({"grid", "uniformization", "enumerate"}));
    oracleCmd->add_option("--objective", a.objective)->check(CLI::IsMember({"max", "min", "game"}));
    auto* oracleSteps = oracleCmd->add_option("--steps", a.steps, "grid steps")
                            ->check(CLI::Range(std::size_t{2}, std::size_t{1} << 40));
    oracleCmd->add_option("--scheduler", a.scheduler, "single-interval scheduler (uniformization)");
    oracleCmd->add_option("--epsilon", a.epsilon)->check(CLI::Range(1e-300, 1.0));
    oracleCmd->add_option("--out", a.out, "value curve CSV (grid)");
    addPrecision(oracleCmd, a);

    auto* curveCmd = app.add_subcommand("curve", "value and gain curves");
    curveCmd->add_option("model", a.model)->required();
    addSolveFlags(curveCmd, a);
    addPrecision(curveCmd, a);
    curveCmd->add_option("--out", a.out, "CSV path (default stdout)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e, out, err);
        return code == 0 ? 0 : 2;
    }

    try {
        if (*validateCmd) {
            CtmgModel m = loadModel(a.model);
            out << "ok " << m.numLocations() << " locations\n";
            return 0;
        }

        CtmgModel m = loadModel(a.model);

        if (*solveCmd || *curveCmd) {
            SolveResult res = solve(m, parseObjective(a.objective), solveOptions(a));
            if (*curveCmd) {
                std::string csv = writeValueCsv(m, res.values, a.precision, true);
                if (a.out.empty())
                    out << csv;
                else
                    writeFileAtomic(a.out, csv);
                return 0;
            }
            out << "value " << fixed(initialValue(m, res.values), a) << '\n';
            out << "switches " << res.values.switchPoints.size() << '\n';
            for (double t : res.values.switchPoints) out << "switch " << fixed(t, a) << '\n';
            writeFileAtomic(a.out.empty() ? a.model + ".sched" : a.out, writeSchedulerArtifact(res.scheduler));
            if (!a.csv.empty()) writeFileAtomic(a.csv, writeValueCsv(m, res.values, a.precision));
            return 0;
        }

        if (*evalCmd) {
            auto sched = readSchedulerArtifact(readFile(a.scheduler));
            SolveOptions o;
            o.steps = a.steps;
            ValueFunction vf = evaluateScheduler(m, sched, o);
            out << "value " << fixed(initialValue(m, vf), a) << '\n';
            if (!a.out.empty()) writeFileAtomic(a.out, writeValueCsv(m, vf, a.precision));
            return 0;
        }

        if (*transformCmd) {
            CtmgModel result;
            LocationMap map;
            if (a.op == "uniformise") {
                result = uniformise(m, a.rate > 0.0 ? std::optional<double>(a.rate) : std::nullopt);
                for (LocationIndex l = 0; l < m.numLocations(); ++l) map.push_back(l);
            } else if (a.op == "early-to-late" || a.op == "late-to-early") {
                Transformed t = a.op == "early-to-late" ? earlyToLate(m) : lateToEarly(m);
                result = std::move(t.model);
                map = std::move(t.map);
            } else {
                SimpleModel s = a.cap > 0 ? makeSimple(m, a.cap) : makeSimple(m);
                result = std::move(s.model);
                map = std::move(s.map);
            }
            std::string text = serializeModel(result);
            if (a.out.empty()) {
                out << text;
            } else {
                writeFileAtomic(a.out, text);
                for (LocationIndex l = 0; l < m.numLocations(); ++l)
                    out << "map " << m.location(l).name << ' ' << result.location(map[l]).name << '\n';
            }
            return 0;
        }

        if (*simCmd) {
            auto sched = readSchedulerArtifact(readFile(a.scheduler));
            SimResult r = simulate(m, sched, a.runs, a.seed);
            out << "estimate " << fixed(r.estimate, a) << " stderr " << fixed(r.standardError, a) << " runs "
                << r.runs << " seed " << r.seed << '\n';
            return 0;
        }

        if (*distCmd) {
            auto d = readSchedulerArtifact(readFile(a.scheduler));
            auto e = readSchedulerArtifact(readFile(a.other));
            SolveOptions o;
            o.steps = a.steps;
            out << "distance " << fixed(schedulerDistance(m, d, e, o), a) << '\n';
            return 0;
        }

        if (*oracleCmd) {
            Objective obj = parseObjective(a.objective);
            if (a.method == "grid") {
                std::size_t steps = oracleSteps->count() > 0 ? a.steps : recommendedOracleSteps(m);
                ValueFunction vf = gridOracle(m, obj, steps);
                auto extrapolated = richardsonOracle(m, obj, steps);
                double rich = 0.0;
                for (LocationIndex l = 0; l < m.numLocations(); ++l) rich += m.initial(l) * extrapolated[l];
                out << "value " << fixed(initialValue(m, vf), a) << " extrapolated " << fixed(rich, a) << " steps "
                    << steps << '\n';
                if (!a.out.empty()) writeFileAtomic(a.out, writeValueCsv(m, vf, a.precision));
            } else if (a.method == "uniformization") {
                if (a.scheduler.empty()) throw Error(ErrorCode::InvalidArgument, "--scheduler is required");
                auto sched = readSchedulerArtifact(readFile(a.scheduler));
                if (sched.intervalCount() != 1)
                    throw Error(ErrorCode::InvalidArgument, "uniformization needs a single-interval scheduler");
                auto profile = bindScheduler(m, sched).profiles.front();
                ValueBounds b = truncatedUniformizationValue(m, profile, a.epsilon);
                out << "lower " << formatNumber(b.initialLower) << " upper " << formatNumber(b.initialUpper)
                    << " steps " << b.steps << '\n';
            } else {
                EnumerationResult r = enumeratePositional(m, obj, solveOptions(a));
                out << "value " << fixed(r.value, a) << " profiles " << r.evaluated << '\n';
                for (const auto& [loc, act] : toDecisionMap(m, r.best)) out << "choose " << loc << ' ' << act << '\n';
            }
            return 0;
        }
    } catch (const SyntaxError& e) {
        err << a.model << ':' << e.line() << ':' << e.column() << ": syntax error: expected " << e.expected() << '\n';
        return 1;
    } catch (const InvalidModelError& e) {
        err << "invalid model:\n" << e.what();
        return 1;
    } catch (const Error& e) {
        err << errorCodeName(e.code()) << ": " << e.what() << '\n';
        return 1;
    }
    return 2;
}

} // namespace ctmg::cli
