#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace fuzzanon::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 2;  // usage, config or data error
inline constexpr int kExitStage = 3;  // pipeline stage failure

/// Runs one `fuzzanon` invocation; args excludes the program name.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace fuzzanon::cli
