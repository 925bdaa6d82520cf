#pragma once

#include <iosfwd>

namespace campaign::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitInput = 2;
inline constexpr int kExitSemantic = 3;

/// Entry point for the `campaign` executable. Regular output goes to `out`,
/// diagnostics to `err`; the return value is the process exit code.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace campaign::cli
