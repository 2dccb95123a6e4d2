#include "rqf/commands.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <ostream>
#include <random>
#include <sstream>

#include "rqf/csv.hpp"
#include "rqf/extract.hpp"

namespace rqf {

namespace {

constexpr std::array<double, 3> kScreenAlphas = {0.05, 0.10, 0.20};

std::string alpha_label(double a) {
  // .05 -> "significant@.05"
  std::ostringstream s;
  s.imbue(std::locale::classic());
  s << std::fixed << std::setprecision(2) << a;
  std::string text = s.str();
  if (text.rfind("0.", 0) == 0) text.erase(0, 1);
  return "significant@" + text;
}

void condition_fields(std::ostringstream& s, const ConditionSummary& c) {
  s << format_number(c.spec.lambda_r) << ',' << format_number(c.spec.w_r2) << ',' << c.spec.n
    << ',' << c.reps;
}

std::ostringstream classic_stream() {
  std::ostringstream s;
  s.imbue(std::locale::classic());
  return s;
}

}  // namespace

std::string table1_csv(std::span<const ConditionSummary> summaries) {
  auto s = classic_stream();
  s << "lambda_r,w_r2,n,reps,mean_salient,sd_salient,mean_nonsalient,sd_nonsalient,"
       "n_nonconverged,n_heywood\n";
  for (const auto& c : summaries) {
    condition_fields(s, c);
    s << ',' << format_number(c.mean_salient) << ',' << format_number(c.sd_salient) << ','
      << format_number(c.mean_nonsalient) << ',' << format_number(c.sd_nonsalient) << ','
      << c.n_nonconverged << ',' << c.n_heywood << '\n';
  }
  return s.str();
}

std::string table2_csv(std::span<const ConditionSummary> summaries) {
  auto s = classic_stream();
  s << "lambda_r,w_r2,n,reps,test,alpha,detection_rate\n";
  for (const auto& c : summaries) {
    for (std::size_t t = 0; t < kAllTests.size(); ++t) {
      for (std::size_t a = 0; a < c.alphas.size(); ++a) {
        condition_fields(s, c);
        s << ',' << test_name(kAllTests[t]) << ',' << format_number(c.alphas[a]) << ','
          << format_number(c.detection[t][a]) << '\n';
      }
    }
  }
  return s.str();
}

std::string scatter_csv(const PopulationSpec& spec, std::span<const ReplicationResult> reps) {
  const LoadingMatrix target = build_loading_matrix(spec.p, spec.q_r, spec.lambda_r);
  auto s = classic_stream();
  s << "rep,variable,salient_factor,loading_f1,loading_f2\n";
  for (std::size_t r = 0; r < reps.size(); ++r) {
    const auto& rep = reps[r];
    if (rep.failed) continue;
    for (Eigen::Index j = 0; j < rep.rotated.rows(); ++j) {
      const double f2 = rep.rotated.cols() > 1 ? rep.rotated(j, 1) : std::nan("");
      s << r + 1 << ',' << j + 1 << ',' << target.salient_factor(j) + 1 << ','
        << format_number(rep.rotated(j, 0)) << ',' << format_number(f2) << '\n';
    }
  }
  return s.str();
}

std::string data_csv(const DataMatrix& data) {
  auto s = classic_stream();
  const auto p = data.values.rows();
  for (Eigen::Index j = 0; j < p; ++j) s << (j ? "," : "") << 'v' << j + 1;
  s << '\n';
  for (Eigen::Index i = 0; i < data.values.cols(); ++i) {
    for (Eigen::Index j = 0; j < p; ++j) s << (j ? "," : "") << format_number(data.values(j, i));
    s << '\n';
  }
  return s.str();
}

std::string kurtosis_csv(std::span<const KurtosisReport> reports, std::span<const double> alphas) {
  auto s = classic_stream();
  s << "test,statistic,standardized,df,p_value";
  for (double a : alphas) s << ',' << alpha_label(a);
  s << '\n';
  for (const auto& r : reports) {
    s << test_name(r.test) << ',' << format_number(r.statistic) << ','
      << format_number(r.standardized) << ',' << (r.df ? std::to_string(*r.df) : "") << ','
      << format_number(r.p_value);
    for (double a : alphas) s << ',' << (r.p_value <= a ? 1 : 0);
    s << '\n';
  }
  return s.str();
}

std::string pairwise_csv(std::span<const PairReport> pairs) {
  auto s = classic_stream();
  s << "var_i,var_j,statistic,standardized,p_value\n";
  for (const auto& pr : pairs) {
    s << pr.first + 1 << ',' << pr.second + 1 << ',' << format_number(pr.report.statistic) << ','
      << format_number(pr.report.standardized) << ',' << format_number(pr.report.p_value) << '\n';
  }
  return s.str();
}

namespace {

double pearson(const VectorXd& a, const VectorXd& b) {
  const VectorXd ca = a.array() - a.mean();
  const VectorXd cb = b.array() - b.mean();
  return ca.dot(cb) / std::sqrt(ca.squaredNorm() * cb.squaredNorm());
}

}  // namespace

GroupOffsetData build_group_offset_dataset(int n, std::span<const double> offsets, double target_r,
                                           std::uint64_t seed) {
  if (offsets.size() < 2) throw std::invalid_argument("need at least two groups");
  if (n < static_cast<int>(offsets.size()) + 2) throw std::invalid_argument("too few cases");
  if (!(target_r > -1.0 && target_r < 1.0)) {
    throw std::domain_error("target correlation must lie in (-1,1)");
  }
  const auto [lo, hi] = std::minmax_element(offsets.begin(), offsets.end());
  if (*hi - *lo == 0.0) {
    throw std::domain_error("identical group offsets give sigma_d^2 = 0 and r = 1; target infeasible");
  }

  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal;
  VectorXd t(n);
  VectorXd c(n);
  GroupOffsetData out;
  out.group.resize(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) {
    t(i) = normal(rng);
    const auto g = static_cast<std::size_t>(i) % offsets.size();
    out.group[static_cast<std::size_t>(i)] = static_cast<int>(g);
    c(i) = offsets[g];
  }

  auto corr_at = [&](double a) {
    return pearson(t + 0.5 * a * c, t - 0.5 * a * c);
  };
  // corr(0) = 1 and corr -> -1 as the offsets dominate; bracket then bisect.
  double a_lo = 0.0;
  double a_hi = 1.0;
  while (corr_at(a_hi) > target_r) {
    a_hi *= 2.0;
    if (a_hi > 1e8) throw std::domain_error("target correlation not reachable");
  }
  for (int it = 0; it < 200 && a_hi - a_lo > 1e-14 * a_hi; ++it) {
    const double mid = 0.5 * (a_lo + a_hi);
    (corr_at(mid) > target_r ? a_lo : a_hi) = mid;
  }
  const double a = 0.5 * (a_lo + a_hi);

  out.offset_scale = a;
  out.points.resize(n, 2);
  out.points.col(0) = t + 0.5 * a * c;
  out.points.col(1) = t - 0.5 * a * c;
  for (int k = 0; k < 2; ++k) {
    auto col = out.points.col(k);
    const double mean = col.mean();
    col.array() -= mean;
    col /= std::sqrt(col.squaredNorm() / n);
  }
  out.achieved_r = pearson(out.points.col(0), out.points.col(1));
  return out;
}

GroupOffsetData build_fig3_dataset(int n, int q_q, double target_r, std::uint64_t seed) {
  if (q_q < 2) throw std::invalid_argument("q_q must be >= 2");
  std::vector<double> offsets(static_cast<std::size_t>(q_q));
  for (int g = 0; g < q_q; ++g) offsets[static_cast<std::size_t>(g)] = -1.0 + 2.0 * g / (q_q - 1);
  return build_group_offset_dataset(n, offsets, target_r, seed);
}

namespace {

void print_summary(std::ostream& out, std::span<const ConditionSummary> summaries) {
  out << "lambda_r  w_r2   n     mean/sd salient   mean/sd non-salient  mardia  sriv   small"
         "  (detection at first alpha)\n";
  for (const auto& c : summaries) {
    out << std::fixed << std::setprecision(2) << std::setw(8) << c.spec.lambda_r << std::setw(6)
        << c.spec.w_r2 << std::setw(6) << c.spec.n << "   " << std::setprecision(3)
        << c.mean_salient << " / " << c.sd_salient << "     " << std::setw(6) << c.mean_nonsalient
        << " / " << c.sd_nonsalient << "   " << std::setprecision(3) << c.detection[0][0] << "  "
        << c.detection[1][0] << "  " << c.detection[2][0] << '\n';
  }
  out.unsetf(std::ios::floatfield);
}

}  // namespace

int cmd_simulate(const RunConfig& config, std::ostream& out, std::ostream& err) {
  try {
    config.validate();
    const auto summaries = run_grid(config.grid, config.workers, config.aggregation);
    const std::string t1 = table1_csv(summaries);
    const std::string t2 = table2_csv(summaries);
    std::filesystem::create_directories(config.out_dir);
    write_file_atomic(config.out_dir / "table1.csv", t1);
    write_file_atomic(config.out_dir / "table2.csv", t2);
    print_summary(out, summaries);
    out << "wrote " << (config.out_dir / "table1.csv").string() << " and "
        << (config.out_dir / "table2.csv").string() << '\n';
    return kExitOk;
  } catch (const std::exception& e) {
    err << "simulate: " << e.what() << '\n';
    return kExitError;
  }
}

int cmd_scatter(const RunConfig& config, const ConditionSelector& sel, std::ostream& out,
                std::ostream& err) {
  try {
    config.validate();
    const auto specs = config.grid.conditions();
    const auto match = std::find_if(specs.begin(), specs.end(), [&](const PopulationSpec& s) {
      return std::abs(s.lambda_r - sel.lambda_r) < 1e-12 && std::abs(s.w_r2 - sel.w_r2) < 1e-12 &&
             s.n == sel.n;
    });
    if (match == specs.end()) {
      err << "scatter: unknown condition lambda_r=" << sel.lambda_r << " w_r2=" << sel.w_r2
          << " n=" << sel.n << " (not in the configured grid)\n";
      return kExitError;
    }
    const auto reps = run_replications(*match, config.grid.reps, config.grid.master_seed,
                                       config.workers);
    std::filesystem::create_directories(config.out_dir);
    const auto path = config.out_dir / "scatter_loadings.csv";
    write_file_atomic(path, scatter_csv(*match, reps));
    const auto summary = summarize(*match, reps, config.grid.alphas, config.aggregation);
    out << "salient mean/sd " << summary.mean_salient << " / " << summary.sd_salient
        << ", non-salient mean/sd " << summary.mean_nonsalient << " / " << summary.sd_nonsalient
        << "\nwrote " << path.string() << '\n';
    return kExitOk;
  } catch (const std::exception& e) {
    err << "scatter: " << e.what() << '\n';
    return kExitError;
  }
}

int cmd_demo_fig3(const DemoOptions& o, std::ostream& out, std::ostream& err) {
  try {
    const auto data = build_fig3_dataset(o.n, o.q_q, o.target_r, o.seed);
    const auto reports = kurtosis_battery(data.points);
    const auto zd = zdiff_correlation(data.points.col(0), data.points.col(1));

    auto points = classic_stream();
    points << "case,group,z1,z2\n";
    for (int i = 0; i < o.n; ++i) {
      points << i + 1 << ',' << data.group[static_cast<std::size_t>(i)] + 1 << ','
             << format_number(data.points(i, 0)) << ',' << format_number(data.points(i, 1))
             << '\n';
    }
    // Same points without labels, ready for `screen`.
    auto data_only = classic_stream();
    data_only << "z1,z2\n";
    for (int i = 0; i < o.n; ++i) {
      data_only << format_number(data.points(i, 0)) << ',' << format_number(data.points(i, 1))
                << '\n';
    }
    const std::string table = kurtosis_csv(reports, kScreenAlphas);
    std::filesystem::create_directories(o.out_dir);
    write_file_atomic(o.out_dir / "fig3_points.csv", points.str());
    write_file_atomic(o.out_dir / "fig3_data.csv", data_only.str());
    write_file_atomic(o.out_dir / "fig3_kurtosis.csv", table);

    out << "achieved r = " << data.achieved_r << " (sigma_d^2 = " << zd.sigma_d2
        << ", 1 - sigma_d^2/2 = " << zd.rho << ")\n"
        << table;
    return kExitOk;
  } catch (const std::exception& e) {
    err << "demo-fig3: " << e.what() << '\n';
    return kExitError;
  }
}

int cmd_generate(const GenerateOptions& o, std::ostream& out, std::ostream& err) {
  try {
    const DataMatrix data = generate_sample(o.spec, o.seed);
    if (o.output.has_parent_path()) std::filesystem::create_directories(o.output.parent_path());
    write_file_atomic(o.output, data_csv(data));
    out << "wrote " << data.values.cols() << " cases x " << data.values.rows() << " variables to "
        << o.output.string() << '\n';
    return kExitOk;
  } catch (const std::exception& e) {
    err << "generate: " << e.what() << '\n';
    return kExitError;
  }
}

int cmd_screen(const ScreenOptions& o, std::ostream& out, std::ostream& err) {
  try {
    if (!(o.alpha > 0.0 && o.alpha < 1.0)) throw std::invalid_argument("alpha must lie in (0,1)");
    const NumericTable table = read_numeric_csv(o.csv);
    if (table.values.rows() < 20) {
      throw std::invalid_argument("need at least 20 cases, got " +
                                  std::to_string(table.values.rows()));
    }
    for (Eigen::Index j = 0; j < table.values.cols(); ++j) {
      const auto col = table.values.col(j);
      if (col.maxCoeff() == col.minCoeff()) {
        throw std::domain_error("column '" + table.header[static_cast<std::size_t>(j)] +
                                "' is constant");
      }
    }
    const auto reports = kurtosis_battery(table.values);

    std::vector<double> alphas(kScreenAlphas.begin(), kScreenAlphas.end());
    if (std::find(alphas.begin(), alphas.end(), o.alpha) == alphas.end()) alphas.push_back(o.alpha);
    out << kurtosis_csv(reports, alphas);
    if (o.pairwise) {
      out << '\n' << pairwise_csv(pairwise_bivariate_kurtosis(table.values));
    }
    const bool any = std::any_of(reports.begin(), reports.end(),
                                 [&](const KurtosisReport& r) { return r.p_value <= o.alpha; });
    return any ? kExitSignificant : kExitOk;
  } catch (const std::exception& e) {
    err << "screen: " << e.what() << '\n';
    return kExitError;
  }
}

}  // namespace rqf
