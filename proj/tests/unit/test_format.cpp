#include "doctest.h"

#include <filesystem>

#include "ctmg/format.hpp"
#include "ctmg/transform.hpp"
#include "corpus.hpp"
#include "fig1.hpp"

using namespace ctmg;
using ctmg::testing::fig1Model;
using ctmg::testing::kFig1Text;

TEST_CASE("parse the fig1 document") {
    CtmgModel m = parseModel(kFig1Text);
    CHECK(m.numLocations() == 3);
    CHECK(m.timeBound() == 1.0);
    CHECK(m == fig1Model());
}

TEST_CASE("syntax errors carry positions") {
    try {
        parseModel("");
        FAIL("expected error");
    } catch (const SyntaxError& e) {
        CHECK(e.line() == 1);
        CHECK(e.code() == ErrorCode::Syntax);
    }
    try {
        parseModel("ctmg\ntime-bound 1\nlocation A continuous reach\nrate A a B x\n");
        FAIL("expected error");
    } catch (const SyntaxError& e) {
        CHECK(e.line() == 4);
        CHECK(e.column() == 10);
    }
    CHECK_THROWS_AS(parseModel("ctmg\ntime-bound 1\nfrobnicate\n"), SyntaxError);
    CHECK_THROWS_AS(parseModel("ctmg\nlocation A continuous reach goal\ninit A 1\n"), SyntaxError);
    CHECK_THROWS_AS(parseModel("ctmg\ntime-bound 1\nlocation A continuous reach goal\ninit A 1\ninit A 1\n"),
                    SyntaxError);
    CHECK_THROWS_AS(parseModel(std::string(kFig1Text) + "rate A a B 4\n"), SyntaxError);
}

TEST_CASE("semantic errors wrap the validation report") {
    const char* text = R"(ctmg
time-bound 1
location d discrete reach
location g continuous reach goal
rate d a g 1
init d 1
)";
    try {
        parseModel(text);
        FAIL("expected error");
    } catch (const InvalidModelError& e) {
        CHECK(e.code() == ErrorCode::Semantic);
        CHECK(e.report().has("RATE_ON_DISCRETE"));
    }
}

TEST_CASE("numbers") {
    CHECK(parseNumber("3") == 3.0);
    CHECK(parseNumber("2.5") == 2.5);
    CHECK(parseNumber("1/3") == 1.0 / 3.0);
    CHECK(parseNumber("1e-3") == 1e-3);
    CHECK_FALSE(parseNumber("1/0"));
    CHECK_FALSE(parseNumber("abc"));
    CHECK_FALSE(parseNumber("inf"));
    CHECK_FALSE(parseNumber("2.5x"));
    CHECK(formatNumber(1.0 / 3.0) == "0.33333333333333331");
    CHECK(formatNumber(4.0) == "4");
    CHECK(formatFixed(-1e-9, 6) == "0.000000");
    CHECK(formatFixed(0.9154970335, 6) == "0.915497");
}

TEST_CASE("model round trip") {
    CtmgModel m = fig1Model();
    CHECK(parseModel(serializeModel(m)) == m);
    CtmgModel u = uniformise(m);
    CHECK(parseModel(serializeModel(u)) == u);
    std::string once = serializeModel(parseModel(kFig1Text));
    CHECK(serializeModel(parseModel(once)) == once);

    for (const auto& c : ctmg::testing::standardCorpus(30)) CHECK(parseModel(serializeModel(c)) == c);
    for (const auto& c : ctmg::testing::gameCorpus(10)) CHECK(parseModel(serializeModel(c)) == c);

    const char* third = R"(ctmg
time-bound 1
location A continuous reach
location C continuous reach goal
rate A a C 1/3
init A 1
)";
    std::string s = serializeModel(parseModel(third));
    CHECK(s.find("rate A a C 0.33333333333333331") != std::string::npos);
}

TEST_CASE("scheduler artifacts") {
    CylindricalScheduler one{{0.0, 1.0}, {{{"A", "b"}}}};
    std::string text = writeSchedulerArtifact(one);
    CHECK(text == "interval 0 1\nchoose A b\n");
    CHECK(readSchedulerArtifact(text) == one);

    CylindricalScheduler two{{0.0, 0.65342640972002736, 1.0}, {{{"A", "a"}, {"B", "a"}}, {{"A", "b"}, {"B", "a"}}}};
    CHECK(readSchedulerArtifact(writeSchedulerArtifact(two)) == two);

    CHECK_THROWS_AS(readSchedulerArtifact("interval 0 0.5\ninterval 0.7 1\n"), Error);
    CHECK_THROWS_AS(readSchedulerArtifact("interval 0 0.5\ninterval 0.5 0.2\n"), Error);
    CHECK_THROWS_AS(readSchedulerArtifact("choose A a\n"), Error);
    CHECK_THROWS_AS(readSchedulerArtifact(""), Error);
    CHECK_THROWS_AS(readSchedulerArtifact("interval 0 1\nchoose A a\nchoose A b\n"), Error);
}

TEST_CASE("atomic file writes") {
    auto dir = std::filesystem::temp_directory_path() / "ctmg_format_test";
    std::filesystem::create_directories(dir);
    auto file = dir / "out.txt";
    writeFileAtomic(file, "hello\n");
    CHECK(readFile(file) == "hello\n");
    writeFileAtomic(file, "again\n");
    CHECK(readFile(file) == "again\n");
    CHECK_FALSE(std::filesystem::exists(dir / "out.txt.tmp"));
    std::filesystem::remove_all(dir);
    CHECK_THROWS_AS(readFile(dir / "missing"), Error);
}
