#pragma once

#include <iosfwd>

namespace ctmg::cli {

/// Runs one command line. Returns 0 on success, 1 on a domain error and 2
/// on a usage error.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

} // namespace ctmg::cli
