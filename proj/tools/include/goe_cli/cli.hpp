#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace goe::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitConfig = 2;
inline constexpr int kExitRuntime = 3;

// Entry point behind the goecomm binary; streams are injectable for tests.
int run_cli(int argc, const char* const* argv, std::istream& in, std::ostream& out, std::ostream& err);

// "0.1,0.2,0.5" or "a..b" (step 1) or "a..b:step".
std::vector<double> parse_values(const std::string& spec);

}  // namespace goe::cli
