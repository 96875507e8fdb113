#include "ctmg/format.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>
#include <system_error>
#include <tuple>
#include <vector>

namespace ctmg {

// ---------------------------------------------------------------------------
// Numbers

namespace {

std::optional<double> parseDecimal(std::string_view s) {
    if (s.empty()) return std::nullopt;
    if (s.front() == '+') s.remove_prefix(1);
    double v = 0.0;
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v, std::chars_format::general);
    if (ec != std::errc() || ptr != s.data() + s.size() || !std::isfinite(v)) return std::nullopt;
    return v;
}

} // namespace

std::optional<double> parseNumber(std::string_view token) {
    auto slash = token.find('/');
    if (slash == std::string_view::npos) return parseDecimal(token);
    auto num = parseDecimal(token.substr(0, slash));
    auto den = parseDecimal(token.substr(slash + 1));
    if (!num || !den || *den == 0.0) return std::nullopt;
    double v = *num / *den;
    if (!std::isfinite(v)) return std::nullopt;
    return v;
}

std::string formatNumber(double value) {
    char buf[64];
    auto res = std::to_chars(buf, buf + sizeof buf, value, std::chars_format::general, 17);
    return std::string(buf, res.ptr);
}

std::string formatShortest(double value) {
    char buf[64];
    auto res = std::to_chars(buf, buf + sizeof buf, value);
    return std::string(buf, res.ptr);
}

std::string formatFixed(double value, int precision) {
    char buf[512];
    auto res = std::to_chars(buf, buf + sizeof buf, value, std::chars_format::fixed, precision);
    std::string out(buf, res.ptr);
    if (!out.empty() && out.front() == '-' &&
        std::all_of(out.begin() + 1, out.end(), [](char c) { return c == '0' || c == '.'; }))
        out.erase(out.begin());
    return out;
}

// ---------------------------------------------------------------------------
// Tokenizer

namespace {

struct Token {
    std::string_view text;
    std::size_t column;
};

struct Line {
    std::size_t number;
    std::vector<Token> tokens;
};

std::vector<Line> tokenize(std::string_view text) {
    std::vector<Line> lines;
    std::size_t lineNo = 0;
    std::size_t pos = 0;
    while (pos <= text.size()) {
        std::size_t end = text.find('\n', pos);
        if (end == std::string_view::npos) end = text.size();
        std::string_view raw = text.substr(pos, end - pos);
        ++lineNo;
        if (auto hash = raw.find('#'); hash != std::string_view::npos) raw = raw.substr(0, hash);
        Line line{lineNo, {}};
        std::size_t i = 0;
        auto space = [](char c) { return c == ' ' || c == '\t' || c == '\r'; };
        while (i < raw.size()) {
            while (i < raw.size() && space(raw[i])) ++i;
            std::size_t start = i;
            while (i < raw.size() && !space(raw[i])) ++i;
            if (i > start) line.tokens.push_back(Token{raw.substr(start, i - start), start + 1});
        }
        if (!line.tokens.empty()) lines.push_back(std::move(line));
        if (end == text.size()) break;
        pos = end + 1;
    }
    return lines;
}

[[noreturn]] void syntax(const Line& line, std::size_t index, std::string expected) {
    std::size_t col = index < line.tokens.size()
                          ? line.tokens[index].column
                          : (line.tokens.empty() ? 1 : line.tokens.back().column + line.tokens.back().text.size());
    throw SyntaxError(line.number, col, std::move(expected));
}

void expectCount(const Line& line, std::size_t min, std::size_t max, const std::string& what) {
    if (line.tokens.size() < min) syntax(line, line.tokens.size(), what);
    if (line.tokens.size() > max) syntax(line, max, "end of line");
}

double number(const Line& line, std::size_t index) {
    auto v = parseNumber(line.tokens[index].text);
    if (!v) syntax(line, index, "number");
    return *v;
}

} // namespace

// ---------------------------------------------------------------------------
// Models

CtmgModel parseModel(std::string_view text) {
    auto lines = tokenize(text);
    if (lines.empty()) throw SyntaxError(1, 1, "'ctmg' header");
    if (lines.front().tokens.front().text != "ctmg") syntax(lines.front(), 0, "'ctmg' header");
    expectCount(lines.front(), 1, 1, "'ctmg' header");

    ModelBuilder b;
    bool haveTimeBound = false, haveGoalMode = false;
    std::set<std::tuple<LocationIndex, ActionIndex, LocationIndex>> seenRate, seenProb;
    std::set<LocationIndex> seenInit;

    auto location = [&](const Line& line, std::size_t i) {
        auto l = b.findLocation(line.tokens[i].text);
        if (!l) syntax(line, i, "declared location");
        return *l;
    };

    for (std::size_t li = 1; li < lines.size(); ++li) {
        const Line& line = lines[li];
        std::string_view kw = line.tokens[0].text;
        if (kw == "time-bound") {
            expectCount(line, 2, 2, "number");
            if (haveTimeBound) syntax(line, 0, "single time-bound directive");
            b.timeBound(number(line, 1));
            haveTimeBound = true;
        } else if (kw == "goal-mode") {
            expectCount(line, 2, 2, "absorbing|at-deadline");
            if (haveGoalMode) syntax(line, 0, "single goal-mode directive");
            std::string_view v = line.tokens[1].text;
            if (v == "absorbing")
                b.goalMode(GoalMode::Absorbing);
            else if (v == "at-deadline")
                b.goalMode(GoalMode::AtDeadline);
            else
                syntax(line, 1, "absorbing|at-deadline");
            haveGoalMode = true;
        } else if (kw == "location") {
            expectCount(line, 4, 5, "location <id> continuous|discrete reach|safe [goal]");
            std::string name(line.tokens[1].text);
            if (b.findLocation(name)) syntax(line, 1, "unique location id");
            LocationKind kind;
            if (line.tokens[2].text == "continuous")
                kind = LocationKind::Continuous;
            else if (line.tokens[2].text == "discrete")
                kind = LocationKind::Discrete;
            else
                syntax(line, 2, "continuous|discrete");
            Player owner;
            if (line.tokens[3].text == "reach")
                owner = Player::Reachability;
            else if (line.tokens[3].text == "safe")
                owner = Player::Safety;
            else
                syntax(line, 3, "reach|safe");
            bool goal = false;
            if (line.tokens.size() == 5) {
                if (line.tokens[4].text != "goal") syntax(line, 4, "'goal' or end of line");
                goal = true;
            }
            b.addLocation(std::move(name), kind, owner, goal);
        } else if (kw == "rate" || kw == "prob") {
            expectCount(line, 5, 5, "<loc> <action> <loc> <number>");
            LocationIndex from = location(line, 1);
            ActionIndex a = b.action(line.tokens[2].text);
            LocationIndex to = location(line, 3);
            double v = number(line, 4);
            auto key = std::make_tuple(from, a, to);
            auto& seen = kw == "rate" ? seenRate : seenProb;
            if (!seen.insert(key).second) syntax(line, 0, "no duplicate transition");
            if (kw == "rate")
                b.setRate(from, a, to, v);
            else
                b.setProb(from, a, to, v);
        } else if (kw == "init") {
            expectCount(line, 3, 3, "init <loc> <number>");
            LocationIndex l = location(line, 1);
            if (!seenInit.insert(l).second) syntax(line, 0, "single init per location");
            b.setInitial(l, number(line, 2));
        } else if (kw == "ctmg") {
            syntax(line, 0, "single 'ctmg' header");
        } else {
            syntax(line, 0, "directive");
        }
    }
    if (!haveTimeBound) {
        const Line& last = lines.back();
        throw SyntaxError(last.number + 1, 1, "time-bound directive");
    }

    CtmgModel m = b.build();
    ValidationReport rep = validate(m);
    if (!rep.ok()) throw InvalidModelError(ErrorCode::Semantic, rep, rep.render(m));
    return m;
}

std::string serializeModel(const CtmgModel& m) {
    std::ostringstream out;
    out << "ctmg\n";
    out << "time-bound " << formatNumber(m.timeBound()) << '\n';
    out << "goal-mode " << (m.goalMode() == GoalMode::Absorbing ? "absorbing" : "at-deadline") << '\n';
    for (const auto& loc : m.locations()) {
        out << "location " << loc.name << (loc.continuous() ? " continuous " : " discrete ")
            << (loc.owner == Player::Reachability ? "reach" : "safe") << (loc.goal ? " goal" : "") << '\n';
    }
    for (ActionIndex a = 0; a < m.numActions(); ++a) {
        for (LocationIndex l = 0; l < m.numLocations(); ++l) {
            const Location& loc = m.location(l);
            auto emit = [&](const std::vector<ActionRow>& rows, const char* kw) {
                for (const auto& r : rows) {
                    if (r.action != a) continue;
                    for (const auto& t : r.entries)
                        out << kw << ' ' << loc.name << ' ' << m.actionName(a) << ' ' << m.location(t.target).name
                            << ' ' << formatNumber(t.value) << '\n';
                }
            };
            emit(loc.rateRows, "rate");
            emit(loc.probRows, "prob");
        }
    }
    for (LocationIndex l = 0; l < m.numLocations(); ++l) {
        if (m.initial(l) != 0.0) out << "init " << m.location(l).name << ' ' << formatNumber(m.initial(l)) << '\n';
    }
    return out.str();
}

// ---------------------------------------------------------------------------
// Scheduler artifacts

std::string writeSchedulerArtifact(const CylindricalScheduler& s) {
    std::ostringstream out;
    for (std::size_t i = 0; i < s.decisions.size(); ++i) {
        out << "interval " << formatShortest(s.breakpoints.at(i)) << ' ' << formatShortest(s.breakpoints.at(i + 1))
            << '\n';
        for (const auto& [loc, act] : s.decisions[i]) out << "choose " << loc << ' ' << act << '\n';
    }
    return out.str();
}

CylindricalScheduler readSchedulerArtifact(std::string_view text) {
    auto bad = [](const Line& line, const std::string& what) -> Error {
        return Error(ErrorCode::MalformedArtifact, "line " + std::to_string(line.number) + ": " + what);
    };
    CylindricalScheduler s;
    for (const Line& line : tokenize(text)) {
        std::string_view kw = line.tokens[0].text;
        if (kw == "interval") {
            if (line.tokens.size() != 3) throw bad(line, "expected 'interval <lo> <hi>'");
            auto lo = parseDecimal(line.tokens[1].text);
            auto hi = parseDecimal(line.tokens[2].text);
            if (!lo || !hi) throw bad(line, "expected numeric bounds");
            if (s.breakpoints.empty()) {
                if (*lo != 0.0) throw bad(line, "first interval must start at 0");
                s.breakpoints.push_back(*lo);
            } else if (*lo != s.breakpoints.back()) {
                throw bad(line, "intervals must be contiguous and ordered");
            }
            if (!(*hi > *lo) && !(*hi == 0.0 && *lo == 0.0 && s.decisions.empty()))
                throw bad(line, "breakpoints must be strictly increasing");
            s.breakpoints.push_back(*hi);
            s.decisions.emplace_back();
        } else if (kw == "choose") {
            if (line.tokens.size() != 3) throw bad(line, "expected 'choose <loc> <action>'");
            if (s.decisions.empty()) throw bad(line, "'choose' before any interval");
            auto [it, fresh] =
                s.decisions.back().emplace(std::string(line.tokens[1].text), std::string(line.tokens[2].text));
            if (!fresh) throw bad(line, "duplicate decision for '" + it->first + "'");
        } else {
            throw bad(line, "unknown directive '" + std::string(kw) + "'");
        }
    }
    if (s.decisions.empty()) throw Error(ErrorCode::MalformedArtifact, "artifact has no interval");
    if (s.decisions.size() > 1 && s.breakpoints.back() == 0.0)
        throw Error(ErrorCode::MalformedArtifact, "breakpoints must be strictly increasing");
    return s;
}

// ---------------------------------------------------------------------------
// CSV

std::string writeValueCsv(const CtmgModel& m, const ValueFunction& vf, int precision, bool gains) {
    std::vector<std::pair<LocationIndex, ActionIndex>> gainCols;
    if (gains) {
        for (LocationIndex l : decisionLocations(m)) {
            if (!m.location(l).continuous()) continue;
            for (ActionIndex a : enabledActions(m, l)) gainCols.emplace_back(l, a);
        }
    }
    std::string out = "t";
    for (const auto& loc : m.locations()) out += "," + loc.name;
    for (auto [l, a] : gainCols) out += ",gain:" + m.location(l).name + ":" + m.actionName(a);
    out += '\n';
    for (std::size_t i = 0; i < vf.numNodes(); ++i) {
        out += formatShortest(vf.times[i]);
        for (LocationIndex l = 0; l < vf.numLocations; ++l) out += "," + formatFixed(vf.at(i, l), precision);
        for (auto [l, a] : gainCols) out += "," + formatFixed(gain(m, vf.node(i), l, a), precision);
        out += '\n';
    }
    return out;
}

// ---------------------------------------------------------------------------
// Files

std::string readFile(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(ErrorCode::InvalidArgument, "cannot read '" + path.string() + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void writeFileAtomic(const std::filesystem::path& path, std::string_view content) {
    std::filesystem::path tmp = path;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw Error(ErrorCode::InvalidArgument, "cannot write '" + path.string() + "'");
        out.write(content.data(), static_cast<std::streamsize>(content.size()));
        out.flush();
        if (!out) throw Error(ErrorCode::InvalidArgument, "cannot write '" + path.string() + "'");
    }
    std::error_code ec;
    std::filesystem::rename(tmp, path, ec);
    if (ec) {
        std::filesystem::remove(tmp, ec);
        throw Error(ErrorCode::InvalidArgument, "cannot write '" + path.string() + "'");
    }
}

} // namespace ctmg
