#pragma once

// Flat key-value run configuration:
//
//   # comment
//   lambda_r = 0.50, 0.70
//   w_r2     = 1.00, 0.75, 0.50, 0.25
//   n        = 300, 600, 900
//   reps     = 2000
//
// Recognized keys: p, q_r, q_q, lambda_r, lambda_q, w_r2, n, reps, seed,
// alphas, workers, out_dir, pooling (pooled | per_replication),
// exclude_flagged (true | false).

#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "rqf/harness.hpp"

namespace rqf {

class ConfigError : public std::runtime_error {
 public:
  ConfigError(std::string key, const std::string& message)
      : std::runtime_error(key.empty() ? message : "config key '" + key + "': " + message),
        key_(std::move(key)) {}
  const std::string& key() const { return key_; }

 private:
  std::string key_;
};

struct RunConfig {
  ConditionGrid grid;
  int workers = 1;
  std::filesystem::path out_dir = ".";
  AggregationOptions aggregation;

  /// Checks every field; throws ConfigError naming the key.
  void validate() const;
};

/// Command-line values that take precedence over the file.
struct ConfigOverrides {
  std::optional<std::uint64_t> seed;
  std::optional<int> reps;
  std::optional<int> workers;
  std::optional<std::filesystem::path> out_dir;
  std::vector<double> alphas;
};

RunConfig parse_config(const std::string& text);
RunConfig load_config(const std::filesystem::path& path);
void apply_overrides(RunConfig& config, const ConfigOverrides& overrides);

}  // namespace rqf
