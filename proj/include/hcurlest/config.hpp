#pragma once

#include "hcurlest/amr.hpp"

#include <array>
#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace hcurlest {

/// Validation failure with the offending key path ("amr.theta") and the
/// 1-based line it was found on (0 when unknown).
class ConfigError : public std::runtime_error {
 public:
  ConfigError(std::string key, int line, const std::string& message);
  const std::string& key() const { return key_; }
  int line() const { return line_; }

 private:
  std::string key_;
  int line_;
};

struct RunConfig {
  std::string problem;
  double example2_a = 1e-3;
  std::optional<std::array<int, 3>> subdivisions;
  std::vector<EstimatorKind> estimators;
  AmrConfig amr;
  std::filesystem::path output_directory;
  bool write_csv = true;
  bool write_vtk = false;
  std::uint64_t seed = 0;
};

/// Parses and validates a JSON run configuration.
RunConfig parse_run_config(const std::string& text);
RunConfig load_run_config(const std::filesystem::path& path);

}  // namespace hcurlest
