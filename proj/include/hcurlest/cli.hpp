#pragma once

#include <iosfwd>

namespace hcurlest {

/// Exit codes of the command-line driver.
inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 1;
inline constexpr int kExitConfig = 2;
inline constexpr int kExitNumerical = 3;

/// `run <config>`, `validate <config>`, `export <run-dir>`.
int run_cli(int argc, char** argv, std::ostream& out, std::ostream& err);

}  // namespace hcurlest
