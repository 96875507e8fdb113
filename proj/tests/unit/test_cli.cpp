#include "doctest.h"

#include <filesystem>
#include <sstream>
#include <string>
#include <vector>

#include "ctmg/cli.hpp"
#include "ctmg/format.hpp"
#include "fig1.hpp"

namespace fs = std::filesystem;

namespace {

struct Outcome {
    int code;
    std::string out;
    std::string err;
};

Outcome invoke(std::vector<std::string> args) {
    args.insert(args.begin(), "ctmg");
    std::vector<const char*> argv;
    for (const auto& s : args) argv.push_back(s.c_str());
    std::ostringstream out, err;
    int code = ctmg::cli::run(static_cast<int>(argv.size()), argv.data(), out, err);
    return {code, out.str(), err.str()};
}

struct Workspace {
    fs::path dir;
    Workspace() {
        dir = fs::temp_directory_path() / "ctmg_cli_test";
        fs::remove_all(dir);
        fs::create_directories(dir);
        ctmg::writeFileAtomic(dir / "fig1.ctmg", ctmg::testing::kFig1Text);
    }
    ~Workspace() { fs::remove_all(dir); }
    std::string path(const std::string& name) const { return (dir / name).string(); }
};

std::vector<std::string> lines(const std::string& s) {
    std::vector<std::string> out;
    std::istringstream in(s);
    for (std::string line; std::getline(in, line);) out.push_back(line);
    return out;
}

std::vector<std::string> split(const std::string& s, char sep) {
    std::vector<std::string> out;
    std::string cur;
    for (char c : s) {
        if (c == sep) {
            out.push_back(cur);
            cur.clear();
        } else {
            cur += c;
        }
    }
    out.push_back(cur);
    return out;
}

} // namespace

TEST_CASE("solve prints value and switch, writes artifact") {
    Workspace ws;
    auto r = invoke({"solve", "--objective", "max", ws.path("fig1.ctmg")});
    REQUIRE(r.code == 0);
    CHECK(r.out == "value 0.915497\nswitches 1\nswitch 0.653426\n");
    auto sched = ctmg::readSchedulerArtifact(ctmg::readFile(ws.path("fig1.ctmg.sched")));
    CHECK(sched.intervalCount() == 2);

    auto e = invoke({"evaluate", ws.path("fig1.ctmg"), "--scheduler", ws.path("fig1.ctmg.sched")});
    CHECK(e.code == 0);
    CHECK(e.out == "value 0.915497\n");

    auto again = invoke({"solve", ws.path("fig1.ctmg"), "--out", ws.path("b.sched"), "--csv", ws.path("v.csv")});
    CHECK(ctmg::readFile(ws.path("b.sched")) == ctmg::readFile(ws.path("fig1.ctmg.sched")));
    CHECK(ctmg::readFile(ws.path("v.csv")).rfind("t,A,B,C\n", 0) == 0);
}

TEST_CASE("validate reports violations") {
    Workspace ws;
    ctmg::writeFileAtomic(ws.dir / "broken.ctmg",
                          "ctmg\ntime-bound 1\nlocation A continuous reach\nlocation C continuous reach goal\n"
                          "rate C a A 1\nrate A a C 1\ninit A 1\n");
    auto r = invoke({"validate", ws.path("broken.ctmg")});
    CHECK(r.code == 1);
    CHECK(r.err.find("GOAL_NOT_ABSORBING C a") != std::string::npos);
    auto ok = invoke({"validate", ws.path("fig1.ctmg")});
    CHECK(ok.code == 0);
    auto missing = invoke({"validate", ws.path("nope.ctmg")});
    CHECK(missing.code == 1);
}

TEST_CASE("usage errors exit with 2") {
    Workspace ws;
    CHECK(invoke({}).code == 2);
    CHECK(invoke({"frobnicate"}).code == 2);
    CHECK(invoke({"solve", ws.path("fig1.ctmg"), "--steps", "1"}).code == 2);
    CHECK(invoke({"solve", ws.path("fig1.ctmg"), "--objective", "best"}).code == 2);
    CHECK(invoke({"transform", ws.path("fig1.ctmg"), "--op", "fold"}).code == 2);
    CHECK(invoke({"solve", ws.path("fig1.ctmg"), "--objective", "game"}).code == 1);
}

TEST_CASE("curve gains cross once at the switch") {
    Workspace ws;
    auto r = invoke({"curve", "--objective", "max", ws.path("fig1.ctmg"), "--steps", "2000"});
    REQUIRE(r.code == 0);
    auto rows = lines(r.out);
    auto header = split(rows.at(0), ',');
    std::size_t ga = 0, gb = 0;
    for (std::size_t i = 0; i < header.size(); ++i) {
        if (header[i] == "gain:A:a") ga = i;
        if (header[i] == "gain:A:b") gb = i;
    }
    REQUIRE(ga > 0);
    REQUIRE(gb > 0);
    int crossings = 0;
    int lastSign = 0;
    double crossingTime = -1.0, prev = -1.0;
    for (std::size_t i = 1; i < rows.size(); ++i) {
        auto cells = split(rows[i], ',');
        double t = std::stod(cells[0]);
        CHECK(t > prev);
        prev = t;
        double d = std::stod(cells[ga]) - std::stod(cells[gb]);
        int sign = d > 0 ? 1 : (d < 0 ? -1 : 0);
        if (sign != 0 && lastSign != 0 && sign != lastSign) {
            ++crossings;
            crossingTime = t;
        }
        if (sign != 0) lastSign = sign;
    }
    CHECK(crossings == 1);
    CHECK(std::abs(crossingTime - ctmg::testing::fig1::switchTime()) <= 1e-3);
}

TEST_CASE("transform, oracle, simulate and distance") {
    Workspace ws;
    auto u = invoke({"transform", ws.path("fig1.ctmg"), "--op", "uniformise", "--out", ws.path("u.ctmg")});
    CHECK(u.code == 0);
    CHECK(u.out == "map A A\nmap B B\nmap C C\n");
    auto e = invoke({"transform", ws.path("u.ctmg"), "--op", "late-to-early"});
    CHECK(e.code == 0);
    CHECK(e.out.find("A^post") != std::string::npos);
    CHECK(invoke({"transform", ws.path("fig1.ctmg"), "--op", "late-to-early"}).code == 1);
    auto el = invoke({"transform", ws.path("fig1.ctmg"), "--op", "early-to-late", "--out", ws.path("e.ctmg")});
    CHECK(el.out.find("map A A^d") != std::string::npos);

    ctmg::writeFileAtomic(ws.dir / "a.sched", "interval 0 1\nchoose A a\nchoose B a\n");
    ctmg::writeFileAtomic(ws.dir / "b.sched", "interval 0 1\nchoose A b\nchoose B a\n");
    auto o = invoke({"oracle", ws.path("fig1.ctmg"), "--method", "uniformization", "--scheduler", ws.path("b.sched")});
    CHECK(o.code == 0);
    CHECK(o.out.rfind("lower 0.86466", 0) == 0);
    auto en = invoke({"oracle", ws.path("fig1.ctmg"), "--method", "enumerate"});
    CHECK(en.out == "value 0.908422 profiles 2\nchoose A a\nchoose B a\n");
    auto g = invoke({"oracle", ws.path("fig1.ctmg"), "--method", "grid"});
    CHECK(g.out.find("extrapolated 0.915497") != std::string::npos);

    auto s1 = invoke({"simulate", ws.path("fig1.ctmg"), "--scheduler", ws.path("b.sched"), "--runs", "20000",
                      "--seed", "5"});
    auto s2 = invoke({"simulate", ws.path("fig1.ctmg"), "--scheduler", ws.path("b.sched"), "--runs", "20000",
                      "--seed", "5"});
    CHECK(s1.code == 0);
    CHECK(s1.out == s2.out);

    auto d = invoke({"distance", ws.path("fig1.ctmg"), ws.path("a.sched"), ws.path("b.sched")});
    CHECK(d.out == "distance 0.997521\n");
}
