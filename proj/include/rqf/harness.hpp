#pragma once

// Monte Carlo driver over a grid of combined R/Q populations.
//
// Every replication gets its own seed, derived from (master seed, condition,
// replication index) by a fixed 64-bit mixer, so results do not depend on how
// replications are scheduled across workers. Aggregation always walks
// replications in index order.

#include <array>
#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "rqf/model.hpp"
#include "rqf/mvnkurt.hpp"

namespace rqf {

inline constexpr std::array<KurtosisTest, 3> kAllTests = {
    KurtosisTest::Mardia, KurtosisTest::Srivastava, KurtosisTest::Small};

struct ConditionGrid {
  std::vector<double> lambda_r{0.50, 0.70};
  std::vector<double> w_r2{1.00, 0.75, 0.50, 0.25};
  std::vector<int> n{300, 600, 900};
  int p = 15;
  int q_r = 3;
  int q_q = 3;
  double lambda_q = 0.90;
  int reps = 2000;
  std::vector<double> alphas{0.05, 0.10, 0.20};
  std::uint64_t master_seed = 20220623;

  /// Throws std::invalid_argument naming the offending field.
  void validate() const;
  /// Conditions in lambda_r, then w_r2, then n order.
  std::vector<PopulationSpec> conditions() const;
};

enum class Pooling {
  Pooled,          // mean/SD over all cells of all replications
  PerReplication,  // average of per-replication means and SDs
};

struct AggregationOptions {
  Pooling pooling = Pooling::Pooled;
  bool exclude_flagged = false;  // drop non-converged / Heywood replications from loadings
};

struct ReplicationResult {
  MatrixXd rotated;  // p x q_r, aligned to Lambda_R
  std::array<KurtosisReport, 3> reports{};
  bool converged = false;
  bool heywood = false;
  bool failed = false;  // numerical failure; nothing else is meaningful
  std::string error;
};

struct ConditionSummary {
  PopulationSpec spec;
  int reps = 0;
  double mean_salient = 0.0;
  double sd_salient = 0.0;
  double mean_nonsalient = 0.0;
  double sd_nonsalient = 0.0;
  std::vector<double> alphas;
  /// detection[test][alpha index], tests in kAllTests order.
  std::array<std::vector<double>, 3> detection;
  int n_nonconverged = 0;
  int n_heywood = 0;
  int n_failed = 0;

  double detection_rate_for(KurtosisTest test, double alpha) const;
};

/// splitmix64 finalizer applied to a running combination of the inputs.
std::uint64_t mix_seed(std::uint64_t master_seed, std::uint64_t condition_key, std::uint64_t rep);
/// Stable key for a population; equal specs give equal keys.
std::uint64_t condition_key(const PopulationSpec& spec);

/// generate -> correlations -> PAF(q_r) -> Procrustes to Lambda_R -> kurtosis
/// battery. Numerical failures are reported through `failed`, never thrown.
ReplicationResult run_replication(const PopulationSpec& spec, std::uint64_t rep_seed);

/// Runs `count` tasks on `workers` threads; task i is called exactly once.
void parallel_for(std::size_t count, int workers, const std::function<void(std::size_t)>& task);

std::vector<ReplicationResult> run_replications(const PopulationSpec& spec, int reps,
                                                std::uint64_t master_seed, int workers = 1);

ConditionSummary summarize(const PopulationSpec& spec, std::span<const ReplicationResult> reps,
                           std::span<const double> alphas, const AggregationOptions& options = {});

ConditionSummary run_condition(const PopulationSpec& spec, int reps, std::uint64_t master_seed,
                               std::span<const double> alphas,
                               const AggregationOptions& options = {}, int workers = 1);

std::vector<ConditionSummary> run_grid(const ConditionGrid& grid, int workers,
                                       const AggregationOptions& options = {});

/// Fraction of p-values <= alpha. Throws on p-values outside [0, 1].
double detection_rate(std::span<const double> p_values, double alpha);

}  // namespace rqf
