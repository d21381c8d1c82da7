#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "sdce/error.hpp"

namespace sdce::cli {

// Exit codes.
inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 1;
inline constexpr int kExitParse = 2;
inline constexpr int kExitKey = 3;
inline constexpr int kExitIo = 4;
inline constexpr int kExitCorrupt = 5;

int exit_code_for(ErrorCode code) noexcept;

// args excludes the program name.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace sdce::cli
