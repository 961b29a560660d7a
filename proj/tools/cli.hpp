#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace pfaffian::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitAnalysis = 1;
inline constexpr int kExitUsage = 2;

// args excludes the program name. `in` is read when no system path is given
// or the path is "-".
int run(const std::vector<std::string>& args, std::istream& in, std::ostream& out, std::ostream& err);

}  // namespace pfaffian::cli
