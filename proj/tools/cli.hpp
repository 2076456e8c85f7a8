#pragma once

#include <string>
#include <vector>

#include "bsuv/error.hpp"

namespace bsuv::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitConfig = 2;
inline constexpr int kExitData = 3;
inline constexpr int kExitNumerical = 4;
inline constexpr int kExitValidation = 5;

int exit_code_for(Errc code) noexcept;

/// Runs one command line (args exclude the program name) and returns the
/// process exit code. Diagnostics go to stderr, progress to stdout.
int run(const std::vector<std::string>& args);

}  // namespace bsuv::cli
