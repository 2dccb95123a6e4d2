#pragma once

// Subcommands of the `rqf` command-line tool. Each returns the process exit
// status and writes human-readable output to `out`, diagnostics to `err`.

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "rqf/config.hpp"
#include "rqf/datagen.hpp"
#include "rqf/harness.hpp"
#include "rqf/mvnkurt.hpp"

namespace rqf {

inline constexpr int kExitOk = 0;
inline constexpr int kExitError = 1;
inline constexpr int kExitSignificant = 2;

// CSV renderers; every table starts with a header row.
std::string table1_csv(std::span<const ConditionSummary> summaries);
std::string table2_csv(std::span<const ConditionSummary> summaries);
std::string scatter_csv(const PopulationSpec& spec, std::span<const ReplicationResult> reps);
/// Cases x variables with header v1..vp.
std::string data_csv(const DataMatrix& data);
std::string kurtosis_csv(std::span<const KurtosisReport> reports, std::span<const double> alphas);
std::string pairwise_csv(std::span<const PairReport> pairs);

/// Bivariate data whose cases fall on parallel lines z2 = z1 - offset_g, one
/// line per group, with the offset spread tuned so that corr(z1, z2) hits the
/// target.
struct GroupOffsetData {
  MatrixXd points;         // n x 2, columns z-standardized
  std::vector<int> group;  // 0-based line index per case
  double offset_scale = 0.0;
  double achieved_r = 0.0;
};

/// `offsets` gives the relative line positions, one per group. Throws
/// std::domain_error when the offsets cannot produce the target (e.g. all
/// offsets equal, which forces r = 1).
GroupOffsetData build_group_offset_dataset(int n, std::span<const double> offsets, double target_r,
                                           std::uint64_t seed);
/// q_q equally spaced offsets in [-1, 1].
GroupOffsetData build_fig3_dataset(int n, int q_q, double target_r, std::uint64_t seed);

struct ConditionSelector {
  double lambda_r = 0.50;
  double w_r2 = 0.25;
  int n = 300;
};

struct DemoOptions {
  int n = 145;
  int q_q = 3;
  double target_r = 0.40;
  std::uint64_t seed = 1;
  std::filesystem::path out_dir = ".";
};

struct GenerateOptions {
  PopulationSpec spec;
  std::uint64_t seed = 1;
  std::filesystem::path output = "data.csv";
};

struct ScreenOptions {
  std::filesystem::path csv;
  double alpha = 0.05;
  bool pairwise = false;
};

int cmd_simulate(const RunConfig& config, std::ostream& out, std::ostream& err);
int cmd_scatter(const RunConfig& config, const ConditionSelector& selector, std::ostream& out,
                std::ostream& err);
int cmd_demo_fig3(const DemoOptions& options, std::ostream& out, std::ostream& err);
int cmd_generate(const GenerateOptions& options, std::ostream& out, std::ostream& err);
int cmd_screen(const ScreenOptions& options, std::ostream& out, std::ostream& err);

}  // namespace rqf
