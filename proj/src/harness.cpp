#include "rqf/harness.hpp"

#include <atomic>
#include <bit>
#include <cmath>
#include <exception>
#include <stdexcept>
#include <thread>

#include "rqf/datagen.hpp"
#include "rqf/extract.hpp"

namespace rqf {

void ConditionGrid::validate() const {
  auto fail = [](const std::string& what) { throw std::invalid_argument(what); };
  if (reps < 1) fail("reps must be >= 1");
  if (alphas.empty()) fail("alphas must not be empty");
  for (double a : alphas) {
    if (!(a > 0.0 && a < 1.0)) fail("alphas must lie in (0,1)");
  }
  for (double w : w_r2) {
    if (!(w > 0.0 && w <= 1.0)) fail("w_r2 values must lie in (0,1]");
  }
  for (double l : lambda_r) {
    if (!(l > 0.0 && l < 1.0)) fail("lambda_r values must lie in (0,1)");
  }
  for (const auto& spec : conditions()) spec.validate();
  // Catch structural problems even when a list is empty.
  PopulationSpec probe{p, q_q * 3, q_r, q_q, 0.5, lambda_q, 1.0};
  probe.validate();
}

std::vector<PopulationSpec> ConditionGrid::conditions() const {
  std::vector<PopulationSpec> out;
  for (double l : lambda_r) {
    for (double w : w_r2) {
      for (int cases : n) {
        out.push_back(PopulationSpec{p, cases, q_r, q_q, l, lambda_q, w});
      }
    }
  }
  return out;
}

double ConditionSummary::detection_rate_for(KurtosisTest test, double alpha) const {
  for (std::size_t t = 0; t < kAllTests.size(); ++t) {
    if (kAllTests[t] != test) continue;
    for (std::size_t a = 0; a < alphas.size(); ++a) {
      if (alphas[a] == alpha) return detection[t][a];
    }
  }
  throw std::out_of_range("no detection rate recorded for that alpha");
}

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

}  // namespace

std::uint64_t mix_seed(std::uint64_t master_seed, std::uint64_t condition_key, std::uint64_t rep) {
  std::uint64_t h = splitmix64(master_seed);
  h = splitmix64(h ^ condition_key);
  return splitmix64(h ^ rep);
}

std::uint64_t condition_key(const PopulationSpec& spec) {
  std::uint64_t h = 0x243f6a8885a308d3ULL;
  auto feed = [&h](std::uint64_t v) { h = splitmix64(h ^ v); };
  feed(static_cast<std::uint64_t>(spec.p));
  feed(static_cast<std::uint64_t>(spec.n));
  feed(static_cast<std::uint64_t>(spec.q_r));
  feed(static_cast<std::uint64_t>(spec.q_q));
  feed(std::bit_cast<std::uint64_t>(spec.lambda_r));
  feed(std::bit_cast<std::uint64_t>(spec.lambda_q));
  feed(std::bit_cast<std::uint64_t>(spec.w_r2));
  return h;
}

ReplicationResult run_replication(const PopulationSpec& spec, std::uint64_t rep_seed) {
  ReplicationResult out;
  try {
    const DataMatrix data = generate_sample(spec, rep_seed);
    const MatrixXd r = correlation_matrix(data);
    const FactorSolution sol = principal_axis(r, spec.q_r);
    const LoadingMatrix target = build_loading_matrix(spec.p, spec.q_r, spec.lambda_r);
    out.rotated = orthogonal_target_rotation(sol.loadings, target.values()).rotated;
    out.converged = sol.converged;
    out.heywood = sol.heywood_adjusted;
    out.reports = kurtosis_battery(data.values.transpose());
  } catch (const std::exception& e) {
    out.failed = true;
    out.error = e.what();
  }
  return out;
}

void parallel_for(std::size_t count, int workers, const std::function<void(std::size_t)>& task) {
  if (workers < 1) throw std::invalid_argument("workers must be >= 1");
  if (workers == 1 || count < 2) {
    for (std::size_t i = 0; i < count; ++i) task(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr first_error;
  std::atomic<bool> errored{false};
  std::vector<std::thread> pool;
  const auto n_threads = std::min<std::size_t>(static_cast<std::size_t>(workers), count);
  pool.reserve(n_threads);
  for (std::size_t t = 0; t < n_threads; ++t) {
    pool.emplace_back([&] {
      for (std::size_t i = next++; i < count; i = next++) {
        try {
          task(i);
        } catch (...) {
          if (!errored.exchange(true)) first_error = std::current_exception();
        }
      }
    });
  }
  for (auto& th : pool) th.join();
  if (first_error) std::rethrow_exception(first_error);
}

std::vector<ReplicationResult> run_replications(const PopulationSpec& spec, int reps,
                                                std::uint64_t master_seed, int workers) {
  spec.validate();
  if (reps < 1) throw std::invalid_argument("reps must be >= 1");
  const std::uint64_t key = condition_key(spec);
  std::vector<ReplicationResult> out(static_cast<std::size_t>(reps));
  parallel_for(out.size(), workers, [&](std::size_t i) {
    out[i] = run_replication(spec, mix_seed(master_seed, key, i));
  });
  return out;
}

namespace {

struct MeanSd {
  double mean = 0.0;
  double sd = 0.0;
};

// Two-pass mean and sample SD in input order.
MeanSd mean_sd(const std::vector<double>& v) {
  MeanSd out;
  if (v.empty()) return {std::nan(""), std::nan("")};
  double sum = 0.0;
  for (double x : v) sum += x;
  out.mean = sum / static_cast<double>(v.size());
  if (v.size() < 2) return out;
  double ss = 0.0;
  for (double x : v) ss += (x - out.mean) * (x - out.mean);
  out.sd = std::sqrt(ss / static_cast<double>(v.size() - 1));
  return out;
}

}  // namespace

double detection_rate(std::span<const double> p_values, double alpha) {
  if (p_values.empty()) return std::nan("");
  std::size_t hits = 0;
  for (double p : p_values) {
    if (!(p >= 0.0 && p <= 1.0)) throw std::invalid_argument("p-value outside [0,1]");
    if (p <= alpha) ++hits;
  }
  return static_cast<double>(hits) / static_cast<double>(p_values.size());
}

ConditionSummary summarize(const PopulationSpec& spec, std::span<const ReplicationResult> reps,
                           std::span<const double> alphas, const AggregationOptions& options) {
  ConditionSummary s;
  s.spec = spec;
  s.reps = static_cast<int>(reps.size());
  s.alphas.assign(alphas.begin(), alphas.end());

  const LoadingMatrix target = build_loading_matrix(spec.p, spec.q_r, spec.lambda_r);
  const BoolMatrix& mask = target.salient_mask();

  std::vector<double> salient, nonsalient;
  std::vector<double> rep_mean_sal, rep_sd_sal, rep_mean_non, rep_sd_non;
  std::array<std::vector<double>, 3> p_values;

  for (const auto& r : reps) {
    if (r.failed) {
      ++s.n_failed;
      continue;
    }
    if (!r.converged) ++s.n_nonconverged;
    if (r.heywood) ++s.n_heywood;
    for (std::size_t t = 0; t < 3; ++t) p_values[t].push_back(r.reports[t].p_value);

    if (options.exclude_flagged && (!r.converged || r.heywood)) continue;
    std::vector<double> sal_here, non_here;
    for (Eigen::Index j = 0; j < r.rotated.rows(); ++j) {
      for (Eigen::Index k = 0; k < r.rotated.cols(); ++k) {
        (mask(j, k) ? sal_here : non_here).push_back(r.rotated(j, k));
      }
    }
    salient.insert(salient.end(), sal_here.begin(), sal_here.end());
    nonsalient.insert(nonsalient.end(), non_here.begin(), non_here.end());
    if (options.pooling == Pooling::PerReplication) {
      const auto a = mean_sd(sal_here);
      const auto b = mean_sd(non_here);
      rep_mean_sal.push_back(a.mean);
      rep_sd_sal.push_back(a.sd);
      rep_mean_non.push_back(b.mean);
      rep_sd_non.push_back(b.sd);
    }
  }

  if (options.pooling == Pooling::Pooled) {
    const auto a = mean_sd(salient);
    const auto b = mean_sd(nonsalient);
    s.mean_salient = a.mean;
    s.sd_salient = a.sd;
    s.mean_nonsalient = b.mean;
    s.sd_nonsalient = b.sd;
  } else {
    s.mean_salient = mean_sd(rep_mean_sal).mean;
    s.sd_salient = mean_sd(rep_sd_sal).mean;
    s.mean_nonsalient = mean_sd(rep_mean_non).mean;
    s.sd_nonsalient = mean_sd(rep_sd_non).mean;
  }

  for (std::size_t t = 0; t < 3; ++t) {
    for (double a : alphas) s.detection[t].push_back(detection_rate(p_values[t], a));
  }
  return s;
}

ConditionSummary run_condition(const PopulationSpec& spec, int reps, std::uint64_t master_seed,
                               std::span<const double> alphas, const AggregationOptions& options,
                               int workers) {
  const auto results = run_replications(spec, reps, master_seed, workers);
  return summarize(spec, results, alphas, options);
}

std::vector<ConditionSummary> run_grid(const ConditionGrid& grid, int workers,
                                       const AggregationOptions& options) {
  grid.validate();
  if (workers < 1) throw std::invalid_argument("workers must be >= 1");
  const auto specs = grid.conditions();
  const auto reps = static_cast<std::size_t>(grid.reps);

  std::vector<std::uint64_t> keys;
  for (const auto& s : specs) keys.push_back(condition_key(s));

  // One flat task list so that workers stay busy across condition boundaries.
  std::vector<ReplicationResult> results(specs.size() * reps);
  parallel_for(results.size(), workers, [&](std::size_t i) {
    const std::size_t c = i / reps;
    const std::size_t r = i % reps;
    results[i] = run_replication(specs[c], mix_seed(grid.master_seed, keys[c], r));
  });

  std::vector<ConditionSummary> out;
  out.reserve(specs.size());
  for (std::size_t c = 0; c < specs.size(); ++c) {
    std::span<const ReplicationResult> slice(results.data() + c * reps, reps);
    out.push_back(summarize(specs[c], slice, grid.alphas, options));
  }
  return out;
}

}  // namespace rqf
