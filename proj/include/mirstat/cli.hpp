#pragma once

#include <ostream>

namespace mirstat {

inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 1;
inline constexpr int kExitData = 2;

/// Subcommands: index, search, expand, export-owl, eval, serve.
/// Returns 0 on success, 1 on a usage error and 2 on a data error.
int cli_main(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace mirstat
