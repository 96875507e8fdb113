#include "doctest.h"

#include <cmath>

#include "ctmg/solver.hpp"
#include "corpus.hpp"
#include "fig1.hpp"

using namespace ctmg;
namespace fig1 = ctmg::testing::fig1;
using ctmg::testing::fig1Model;

namespace {

PositionalProfile profileOf(const CtmgModel& m, const DecisionMap& map) {
    return bindScheduler(m, CylindricalScheduler{{0.0, m.timeBound()}, {map}}).profiles.front();
}

} // namespace

TEST_CASE("fig1 optimum") {
    CtmgModel m = fig1Model();
    auto res = solve(m, Objective::Max);
    const auto& vf = res.values;
    auto A = m.locationIndex("A");
    auto B = m.locationIndex("B");
    auto C = m.locationIndex("C");

    REQUIRE(vf.switchPoints.size() == 1);
    CHECK(std::abs(vf.switchPoints[0] - fig1::switchTime()) <= 1e-4);
    CHECK(std::abs(vf.at(0, A) - fig1::optimalValue()) <= 1e-6);
    CHECK(std::abs(initialValue(m, vf) - fig1::optimalValue()) <= 1e-6);

    REQUIRE(res.scheduler.intervalCount() == 2);
    CHECK(res.scheduler.decisions[0].at("A") == "a");
    CHECK(res.scheduler.decisions[1].at("A") == "b");
    CHECK(res.scheduler.decisions[0].at("B") == "a");
    CHECK(res.scheduler.breakpoints.front() == 0.0);
    CHECK(res.scheduler.breakpoints.back() == 1.0);

    for (double t : {0.0, 0.5, 0.9}) CHECK(std::abs(valueAt(vf, B, t) - fig1::valueB(t)) <= 1e-6);
    for (double t : {0.0, 0.2, 0.5, 0.65, 0.8, 1.0}) CHECK(std::abs(valueAt(vf, A, t) - fig1::valueA(t)) <= 1e-6);
    CHECK(valueAt(vf, C, 0.5) == 1.0);
    CHECK(valueAt(vf, A, 1.0) == 0.0);
    CHECK_THROWS_AS(valueAt(vf, A, 1.5), Error);
    CHECK_THROWS_AS(valueAt(vf, A, -0.1), Error);

    // The switch is an exact grid row.
    bool found = false;
    for (double t : vf.times) found |= t == vf.switchPoints[0];
    CHECK(found);
    for (std::size_t i = 1; i < vf.numNodes(); ++i) CHECK(vf.times[i] > vf.times[i - 1]);
}

TEST_CASE("fig1 minimum") {
    // a is worse while 2 f_B - f_A < 1, i.e. for remaining time below 1/4.
    CtmgModel m = fig1Model();
    auto res = solve(m, Objective::Min);
    REQUIRE(res.values.switchPoints.size() == 1);
    CHECK(std::abs(res.values.switchPoints[0] - 0.75) <= 1e-6);
    CHECK(res.scheduler.decisions[0].at("A") == "b");
    CHECK(res.scheduler.decisions[1].at("A") == "a");
    CHECK(std::abs(initialValue(m, res.values) - (1.0 - 2.0 * std::exp(-2.5))) <= 1e-6);
}

TEST_CASE("positional baselines") {
    CtmgModel m = fig1Model();
    auto b = evaluateProfile(m, profileOf(m, {{"A", "b"}, {"B", "a"}}));
    auto a = evaluateProfile(m, profileOf(m, {{"A", "a"}, {"B", "a"}}));
    CHECK(std::abs(initialValue(m, b) - fig1::alwaysB()) <= 1e-6);
    CHECK(std::abs(initialValue(m, a) - fig1::alwaysA()) <= 1e-6);
    CHECK_FALSE(b.objective.has_value());
}

TEST_CASE("evaluating the extracted scheduler reproduces the optimum") {
    CtmgModel m = fig1Model();
    auto res = solve(m, Objective::Max);
    auto ev = evaluateScheduler(m, res.scheduler);
    REQUIRE(ev.numNodes() == res.values.numNodes());
    double worst = 0.0;
    for (std::size_t i = 0; i < ev.values.size(); ++i) worst = std::max(worst, std::abs(ev.values[i] - res.values.values[i]));
    CHECK(worst <= 1e-6);
}

TEST_CASE("gains") {
    CtmgModel m = fig1Model();
    std::vector<double> snap{0.0, 0.0, 1.0};
    auto A = m.locationIndex("A");
    CHECK(gain(m, snap, A, m.actionIndex("b")) == 2.0);
    CHECK(gain(m, snap, A, m.actionIndex("a")) == 0.0);
    CHECK_THROWS_AS(gain(m, snap, m.locationIndex("B"), m.actionIndex("b")), Error);

    auto res = solve(m, Objective::Max);
    const double ts = res.values.switchPoints.at(0);
    std::vector<double> at(3);
    for (LocationIndex l = 0; l < 3; ++l) at[l] = valueAt(res.values, l, ts);
    CHECK(std::abs(gain(m, at, A, m.actionIndex("a")) - gain(m, at, A, m.actionIndex("b"))) <= 1e-6);
}

TEST_CASE("local improvement") {
    CtmgModel m = fig1Model();
    auto A = m.locationIndex("A");
    std::vector<double> snap{0.0, 0.0, 1.0};
    auto p = localImprovement(m, snap, Objective::Max, firstEnabledProfile(m));
    CHECK(m.actionName(p.choice[A]) == "b");
    auto q = localImprovement(m, snap, Objective::Min, firstEnabledProfile(m));
    CHECK(m.actionName(q.choice[A]) == "a");
}

TEST_CASE("zero time bound") {
    ModelBuilder b;
    b.timeBound(0.0);
    auto A = b.addLocation("A", LocationKind::Continuous, Player::Reachability);
    auto C = b.addLocation("C", LocationKind::Continuous, Player::Reachability, true);
    auto a = b.action("a");
    b.setRate(A, a, C, 3.0).setInitial(A, 1.0);
    CtmgModel m = b.build();
    auto res = solve(m, Objective::Max);
    CHECK(res.values.switchPoints.empty());
    CHECK(res.values.at(0, A) == 0.0);
    CHECK(res.values.at(0, C) == 1.0);
    CHECK(valueAt(res.values, C, 0.0) == 1.0);
}

TEST_CASE("options and objective checks") {
    CtmgModel m = fig1Model();
    SolveOptions bad;
    bad.steps = 1;
    CHECK_THROWS_AS(solve(m, Objective::Max, bad), Error);
    try {
        solve(m, Objective::Game);
        FAIL("expected error");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::GameOnSinglePlayer);
    }
}

TEST_CASE("at-deadline goals evolve") {
    CtmgModel m = fig1Model(GoalMode::AtDeadline);
    REQUIRE(validate(m).ok());
    auto res = solve(m, Objective::Max);
    auto C = m.locationIndex("C");
    // C only self-loops, so it stays in G.
    CHECK(std::abs(res.values.at(0, C) - 1.0) <= 1e-12);
    CHECK(std::abs(initialValue(m, res.values) - fig1::optimalValue()) <= 1e-6);
}

TEST_CASE("domination and monotonicity on a small corpus") {
    auto models = ctmg::testing::standardCorpus(10);
    for (const auto& m : models) {
        auto hi = solve(m, Objective::Max, {.steps = 2000});
        auto lo = solve(m, Objective::Min, {.steps = 2000});
        for (std::size_t l = 0; l < m.numLocations(); ++l) {
            for (std::size_t i = 1; i < hi.values.numNodes(); ++i)
                CHECK(hi.values.at(i, l) <= hi.values.at(i - 1, l) + 1e-9);
        }
        CHECK(initialValue(m, lo.values) <= initialValue(m, hi.values) + 1e-9);
    }
}

TEST_CASE("checkNash") {
    CtmgModel m = fig1Model();
    auto res = solve(m, Objective::Max);
    const double h = 1.0 / 10000;
    auto rep = checkNash(m, res.values, res.scheduler, 10 * h);
    CHECK(rep.passed);

    // Flip A to b on the lower interval.
    CylindricalScheduler flipped = res.scheduler;
    flipped.decisions[0]["A"] = "b";
    auto bad = checkNash(m, res.values, flipped, 10 * h);
    CHECK_FALSE(bad.passed);
    CHECK(bad.decisionResidual > 10 * h);

    ModelBuilder b;
    b.timeBound(1.0);
    auto g = b.addLocation("g", LocationKind::Continuous, Player::Reachability, true);
    b.setInitial(g, 1.0);
    CtmgModel goalOnly = b.build();
    auto r = solve(goalOnly, Objective::Max);
    CHECK(checkNash(goalOnly, r.values, r.scheduler, 1e-3).passed);
}

TEST_CASE("scheduler conventions") {
    CylindricalScheduler s{{0.0, 0.5, 1.0}, {{{"A", "a"}}, {{"A", "b"}}}};
    CHECK(s.intervalAt(0.0) == 0);
    CHECK(s.intervalAt(0.5) == 0);
    CHECK(s.intervalAt(0.500001) == 1);
    CHECK(s.intervalAt(1.0) == 1);

    CylindricalScheduler dup{{0.0, 0.3, 0.6, 1.0}, {{{"A", "a"}}, {{"A", "a"}}, {{"A", "b"}}}};
    dup.normalize();
    CHECK(dup.breakpoints == std::vector<double>{0.0, 0.6, 1.0});

    CtmgModel m = fig1Model();
    CylindricalScheduler wrongHorizon{{0.0, 2.0}, {{{"A", "a"}}}};
    try {
        bindScheduler(m, wrongHorizon);
        FAIL("expected error");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::TimeBoundMismatch);
    }
    CylindricalScheduler disabled{{0.0, 1.0}, {{{"B", "b"}, {"A", "a"}}}};
    CHECK_THROWS_AS(bindScheduler(m, disabled), Error);
    CylindricalScheduler missing{{0.0, 1.0}, {{{"B", "a"}}}};
    CHECK_THROWS_AS(bindScheduler(m, missing), Error);
}
