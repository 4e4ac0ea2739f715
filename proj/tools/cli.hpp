#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace safex::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitConfig = 2;
inline constexpr int kExitAbort = 3;

/// Runs the `safex` command line; args exclude the program name.
int main(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace safex::cli
