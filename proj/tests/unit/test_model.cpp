#include "doctest.h"

#include "ctmg/model.hpp"
#include "corpus.hpp"
#include "fig1.hpp"

using namespace ctmg;
using ctmg::testing::fig1Model;

TEST_CASE("fig1 model validates") {
    CtmgModel m = fig1Model();
    CHECK(validate(m).ok());
    CHECK(m.numLocations() == 3);
    CHECK(m.timeBound() == 1.0);
}

TEST_CASE("enabled actions follow model order") {
    CtmgModel m = fig1Model();
    auto A = m.locationIndex("A");
    auto B = m.locationIndex("B");
    auto en = enabledActions(m, A);
    REQUIRE(en.size() == 2);
    CHECK(m.actionName(en[0]) == "a");
    CHECK(m.actionName(en[1]) == "b");
    auto enB = enabledActions(m, B);
    REQUIRE(enB.size() == 1);
    CHECK(m.actionName(enB[0]) == "a");
    CHECK_THROWS_AS(enabledActions(m, 17), Error);
}

TEST_CASE("exit rates") {
    CtmgModel m = fig1Model();
    auto A = m.locationIndex("A");
    CHECK(exitRate(m, A, m.actionIndex("a")) == 4.0);
    CHECK(exitRate(m, A, m.actionIndex("b")) == 2.0);
    CHECK(exitRate(m, m.locationIndex("B"), m.actionIndex("b")) == 0.0);
    CHECK(maxExitRate(m) == 4.0);
}

TEST_CASE("embedded probabilities derive from rates") {
    ModelBuilder b;
    b.timeBound(1);
    auto x = b.addLocation("x", LocationKind::Continuous, Player::Reachability);
    auto y = b.addLocation("y", LocationKind::Continuous, Player::Reachability, true);
    auto a = b.action("a");
    b.setRate(x, a, y, 1.0).setRate(x, a, x, 2.0).setInitial(x, 1);
    CtmgModel m = b.build();
    CHECK(m.prob(x, a, y) == doctest::Approx(1.0 / 3.0).epsilon(1e-15));
    CHECK(m.prob(x, a, x) == doctest::Approx(2.0 / 3.0).epsilon(1e-15));
}

TEST_CASE("discrete cycle is reported") {
    ModelBuilder b;
    b.timeBound(1);
    auto d1 = b.addLocation("d1", LocationKind::Discrete, Player::Reachability);
    auto d2 = b.addLocation("d2", LocationKind::Discrete, Player::Reachability);
    auto g = b.addLocation("g", LocationKind::Continuous, Player::Reachability, true);
    auto a = b.action("a");
    b.setProb(d1, a, d2, 1.0).setProb(d2, a, d1, 0.5).setProb(d2, a, g, 0.5).setInitial(d1, 1);
    CtmgModel m = b.build();
    auto rep = validate(m);
    CHECK_FALSE(rep.ok());
    CHECK(rep.has("NO_DISCRETE_CYCLE"));
    try {
        discreteDepth(m);
        FAIL("expected a cycle error");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::Cycle);
    }
}

TEST_CASE("goal must be absorbing") {
    ModelBuilder b;
    b.timeBound(1);
    auto A = b.addLocation("A", LocationKind::Continuous, Player::Reachability);
    auto C = b.addLocation("C", LocationKind::Continuous, Player::Reachability, true);
    auto a = b.action("a");
    b.setRate(A, a, C, 1.0).setRate(C, a, A, 1.0).setInitial(A, 1);
    CtmgModel m = b.build();
    CHECK(validate(m).has("GOAL_NOT_ABSORBING"));

    ModelBuilder b2 = b;
    b2.goalMode(GoalMode::AtDeadline);
    CHECK(validate(b2.build()).ok());
}

TEST_CASE("side conditions") {
    SUBCASE("continuous location without enabled action") {
        ModelBuilder b;
        b.timeBound(1);
        auto A = b.addLocation("A", LocationKind::Continuous, Player::Reachability);
        b.addLocation("C", LocationKind::Continuous, Player::Reachability, true);
        b.setInitial(A, 1);
        auto rep = validate(b.build());
        CHECK(rep.has("NO_ENABLED_ACTION"));
    }
    SUBCASE("initial distribution must sum to one") {
        ModelBuilder b;
        b.timeBound(1);
        auto A = b.addLocation("A", LocationKind::Continuous, Player::Reachability, true);
        b.setInitial(A, 0.5);
        CHECK(validate(b.build()).has("BAD_INITIAL"));
    }
    SUBCASE("discrete row must sum to zero or one") {
        ModelBuilder b;
        b.timeBound(1);
        auto d = b.addLocation("d", LocationKind::Discrete, Player::Reachability);
        auto g = b.addLocation("g", LocationKind::Continuous, Player::Reachability, true);
        auto a = b.action("a");
        auto c = b.action("c");
        b.setProb(d, a, g, 1.0).setProb(d, c, g, 0.5).setInitial(d, 1);
        CHECK(validate(b.build()).has("BAD_ROW_SUM"));
    }
    SUBCASE("rate on a discrete location") {
        ModelBuilder b;
        b.timeBound(1);
        auto d = b.addLocation("d", LocationKind::Discrete, Player::Reachability);
        auto g = b.addLocation("g", LocationKind::Continuous, Player::Reachability, true);
        auto a = b.action("a");
        b.setProb(d, a, g, 1.0).setRate(d, a, g, 1.0).setInitial(d, 1);
        CHECK(validate(b.build()).has("RATE_ON_DISCRETE"));
    }
}

TEST_CASE("discrete depth") {
    ModelBuilder b;
    b.timeBound(1);
    auto d1 = b.addLocation("d1", LocationKind::Discrete, Player::Reachability);
    auto d2 = b.addLocation("d2", LocationKind::Discrete, Player::Reachability);
    auto c = b.addLocation("c", LocationKind::Continuous, Player::Reachability, true);
    auto a = b.action("a");
    b.setProb(d1, a, d2, 1.0).setProb(d2, a, c, 1.0).setInitial(d1, 1);
    CtmgModel m = b.build();
    auto depth = discreteDepth(m);
    CHECK(depth[d1] == 2);
    CHECK(depth[d2] == 1);
    CHECK(depth[c] == 0);
    auto order = discreteEvaluationOrder(m);
    REQUIRE(order.size() == 2);
    CHECK(order[0] == d2);
    CHECK(order[1] == d1);

    for (std::size_t d : discreteDepth(fig1Model())) CHECK(d == 0);
}

TEST_CASE("random corpus is valid and within bounds") {
    auto models = ctmg::testing::standardCorpus(40);
    for (const auto& m : models) {
        REQUIRE(validate(m).ok());
        CHECK(m.numLocations() <= 5);
        CHECK(m.numActions() <= 3);
        CHECK(m.timeBound() <= 3.0);
        CHECK(maxExitRate(m) <= 30.0);
        std::size_t discrete = 0;
        for (const auto& l : m.locations()) discrete += l.discrete();
        for (std::size_t d : discreteDepth(m)) CHECK(d <= discrete);
    }
}
