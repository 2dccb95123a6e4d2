#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "rqf/commands.hpp"
#include "rqf/config.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Simulation and screening tools for R-factor analysis under Q-factor variance"};
  app.require_subcommand(1);

  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::optional<int> reps;
  std::optional<int> workers;
  std::optional<std::string> out_dir;
  std::vector<double> alphas;
  app.add_option("--config", config_path, "key = value run configuration");
  app.add_option("--seed", seed, "master seed");
  app.add_option("--reps", reps, "replications per condition");
  app.add_option("--workers", workers, "worker threads");
  app.add_option("--out-dir", out_dir, "directory for CSV output");
  app.add_option("--alpha", alphas, "significance level (repeatable)");

  auto* simulate = app.add_subcommand("simulate", "run the condition grid, write table1/table2 CSVs");
  simulate->fallthrough();

  rqf::ConditionSelector selector;
  auto* scatter = app.add_subcommand("scatter", "export rotated loadings of one grid cell");
  scatter->fallthrough();
  scatter->add_option("--lambda-r", selector.lambda_r, "salient R loading of the cell")->required();
  scatter->add_option("--w-r2", selector.w_r2, "w_R^2 of the cell")->required();
  scatter->add_option("-n,--n", selector.n, "sample size of the cell")->required();

  rqf::DemoOptions demo;
  auto* demo_cmd = app.add_subcommand("demo-fig3", "bivariate group-offset dataset and kurtosis tests");
  demo_cmd->fallthrough();
  demo_cmd->add_option("-n,--n", demo.n, "cases")->capture_default_str();
  demo_cmd->add_option("--q-q", demo.q_q, "number of offset lines")->capture_default_str();
  demo_cmd->add_option("--target-r", demo.target_r, "target correlation")->capture_default_str();

  rqf::GenerateOptions gen;
  auto* generate = app.add_subcommand("generate", "write one simulated data matrix as CSV");
  generate->fallthrough();
  generate->add_option("-p,--p", gen.spec.p)->capture_default_str();
  generate->add_option("-n,--n", gen.spec.n)->capture_default_str();
  generate->add_option("--q-r", gen.spec.q_r)->capture_default_str();
  generate->add_option("--q-q", gen.spec.q_q)->capture_default_str();
  generate->add_option("--lambda-r", gen.spec.lambda_r)->capture_default_str();
  generate->add_option("--lambda-q", gen.spec.lambda_q)->capture_default_str();
  generate->add_option("--w-r2", gen.spec.w_r2)->capture_default_str();
  generate->add_option("-o,--output", gen.output, "output CSV")->capture_default_str();

  rqf::ScreenOptions screen;
  auto* screen_cmd = app.add_subcommand("screen", "kurtosis screening of a cases x variables CSV");
  screen_cmd->fallthrough();
  screen_cmd->add_option("csv", screen.csv, "input CSV with header row")->required();
  screen_cmd->add_flag("--pairwise", screen.pairwise, "also test every variable pair");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : rqf::kExitError;
  }

  auto load = [&]() -> std::optional<rqf::RunConfig> {
    try {
      rqf::RunConfig cfg = config_path.empty() ? rqf::RunConfig{} : rqf::load_config(config_path);
      rqf::ConfigOverrides o;
      o.seed = seed;
      o.reps = reps;
      o.workers = workers;
      if (out_dir) o.out_dir = *out_dir;
      o.alphas = alphas;
      rqf::apply_overrides(cfg, o);
      cfg.validate();
      return cfg;
    } catch (const rqf::ConfigError& e) {
      std::cerr << "config error: " << e.what() << '\n';
      return std::nullopt;
    }
  };

  if (*simulate) {
    const auto cfg = load();
    return cfg ? rqf::cmd_simulate(*cfg, std::cout, std::cerr) : rqf::kExitError;
  }
  if (*scatter) {
    const auto cfg = load();
    return cfg ? rqf::cmd_scatter(*cfg, selector, std::cout, std::cerr) : rqf::kExitError;
  }
  if (*demo_cmd) {
    if (seed) demo.seed = *seed;
    if (out_dir) demo.out_dir = *out_dir;
    return rqf::cmd_demo_fig3(demo, std::cout, std::cerr);
  }
  if (*generate) {
    if (seed) gen.seed = *seed;
    if (out_dir && !gen.output.is_absolute()) gen.output = std::filesystem::path(*out_dir) / gen.output;
    return rqf::cmd_generate(gen, std::cout, std::cerr);
  }
  if (*screen_cmd) {
    if (!alphas.empty()) screen.alpha = alphas.front();
    return rqf::cmd_screen(screen, std::cout, std::cerr);
  }
  return rqf::kExitError;
}
