#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <string_view>

#include "ctmg/model.hpp"
#include "ctmg/solver.hpp"

namespace ctmg {

/// Parses the line-oriented model format:
///
///     ctmg
///     time-bound <number>
///     goal-mode absorbing|at-deadline
///     location <id> continuous|discrete reach|safe [goal]
///     rate <loc> <action> <loc> <number>
///     prob <loc> <action> <loc> <number>
///     init <loc> <number>
///
/// `#` starts a comment. Numbers are decimals or fractions `p/q`. Throws
/// `SyntaxError` on grammar errors and `InvalidModelError(Semantic)` when
/// the model fails validation.
CtmgModel parseModel(std::string_view text);

/// Canonical text form; `parseModel(serializeModel(m)) == m`.
std::string serializeModel(const CtmgModel& model);

/// Decimal or fraction literal; nullopt if malformed or not finite.
std::optional<double> parseNumber(std::string_view token);

/// 17 significant digits, locale independent.
std::string formatNumber(double value);

/// Shortest representation that reads back to the same double.
std::string formatShortest(double value);

/// Fixed-point rendering with `precision` decimals; never prints "-0".
std::string formatFixed(double value, int precision);

/// `interval <lo> <hi>` lines, each followed by its `choose <loc> <action>`
/// lines.
std::string writeSchedulerArtifact(const CylindricalScheduler& scheduler);

/// Throws `Error(MalformedArtifact)`.
CylindricalScheduler readSchedulerArtifact(std::string_view text);

/// CSV with header `t,<loc1>,...`; rows ascending in time. With `gains`,
/// appends `gain:<loc>:<action>` for every continuous decision location and
/// enabled action.
std::string writeValueCsv(const CtmgModel& model, const ValueFunction& vf, int precision = 6, bool gains = false);

/// Throws `Error(InvalidArgument)` if the file cannot be read.
std::string readFile(const std::filesystem::path& path);

/// Writes to a temporary sibling, then renames over `path`.
void writeFileAtomic(const std::filesystem::path& path, std::string_view content);

} // namespace ctmg
