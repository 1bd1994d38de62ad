#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace beamproj::cli {

// Exit codes.
constexpr int kOk = 0;
constexpr int kFailure = 1;
constexpr int kUsage = 2;
constexpr int kNumerical = 3;

// args excludes the program name.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace beamproj::cli
