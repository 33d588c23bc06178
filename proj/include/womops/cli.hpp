#pragma once

#include <ostream>

namespace womops::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 2;   ///< bad flags, config or table id
inline constexpr int kExitSolver = 3;  ///< solver or I/O failure

/// Entry point of the `womops` tool. Output goes to `out`, diagnostics to
/// `err`.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace womops::cli
