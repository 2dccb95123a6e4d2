// Acceptance suite: one PASS/FAIL line per criterion, nonzero exit if any fail.

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <sys/wait.h>

#include "rqf/datagen.hpp"
#include "rqf/extract.hpp"
#include "rqf/harness.hpp"
#include "rqf/model.hpp"
#include "rqf/mvnkurt.hpp"

using namespace rqf;
namespace fs = std::filesystem;

namespace {

int failures = 0;

void report(int id, bool ok, const std::string& what) {
  std::cout << (ok ? "PASS" : "FAIL") << "  criterion " << id << ": " << what << std::endl;
  if (!ok) ++failures;
}

std::string fmt(double v, int digits = 3) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", digits, v);
  return buf;
}

struct Cell {
  double lambda_r;
  double w_r2;
  double mean;
  double sd;
};

// Published n = 300 values.
const std::vector<Cell> kTable1 = {
    {0.50, 1.00, 0.50, 0.06}, {0.50, 0.75, 0.50, 0.07}, {0.50, 0.50, 0.50, 0.09},
    {0.50, 0.25, 0.50, 0.12}, {0.70, 1.00, 0.70, 0.04}, {0.70, 0.75, 0.70, 0.04},
    {0.70, 0.50, 0.70, 0.05}, {0.70, 0.25, 0.70, 0.06},
};

constexpr int kReps = 500;
constexpr std::uint64_t kSeed = 20220623;
const std::vector<double> kAlphas{0.05, 0.10, 0.20};

ConditionSummary cell(double lambda_r, double w_r2) {
  PopulationSpec spec;
  spec.lambda_r = lambda_r;
  spec.w_r2 = w_r2;
  spec.n = 300;
  return run_condition(spec, kReps, kSeed, kAlphas);
}

void criteria_1_to_3() {
  std::vector<ConditionSummary> results;
  for (const auto& c : kTable1) results.push_back(cell(c.lambda_r, c.w_r2));

  bool ok1 = true;
  for (std::size_t i = 0; i < kTable1.size(); ++i) {
    const auto& want = kTable1[i];
    const auto& got = results[i];
    const bool m = std::abs(got.mean_salient - want.mean) <= 0.01;
    const bool s = std::abs(got.sd_salient - want.sd) <= 0.02;
    ok1 = ok1 && m && s;
    std::cout << "      lambda_r=" << fmt(want.lambda_r, 2) << " w_r2=" << fmt(want.w_r2, 2)
              << "  mean " << fmt(got.mean_salient) << " (want " << fmt(want.mean, 2)
              << " +-.01)" << (m ? "" : " X") << "  sd " << fmt(got.sd_salient) << " (want "
              << fmt(want.sd, 2) << " +-.02)" << (s ? "" : " X") << '\n';
  }
  report(1, ok1, "Table 1 salient mean/SD at n=300, 500 reps, 8 cells");

  const double sd100 = results[0].sd_salient;
  const double sd75 = results[1].sd_salient;
  const double sd50 = results[2].sd_salient;
  const double sd25 = results[3].sd_salient;
  report(2, sd25 > sd50 && sd50 > sd75 && sd75 > sd100,
         "sd_salient ordering at lambda_r=.50: " + fmt(sd25) + " > " + fmt(sd50) + " > " +
             fmt(sd75) + " > " + fmt(sd100));

  const auto& q25 = results[3];
  const auto& q100 = results[0];
  struct Spot {
    const ConditionSummary* s;
    KurtosisTest test;
    double want;
    double tol;
    const char* label;
  };
  const Spot spots[] = {
      {&q25, KurtosisTest::Mardia, 0.976, 0.03, "Mardia w_r2=.25"},
      {&q25, KurtosisTest::Srivastava, 0.843, 0.04, "Srivastava w_r2=.25"},
      {&q100, KurtosisTest::Srivastava, 0.034, 0.025, "Srivastava w_r2=1"},
      {&q100, KurtosisTest::Mardia, 0.075, 0.03, "Mardia w_r2=1"},
  };
  bool ok3 = true;
  for (const auto& sp : spots) {
    const double got = sp.s->detection_rate_for(sp.test, 0.05);
    const bool ok = std::abs(got - sp.want) <= sp.tol + 1e-12;
    ok3 = ok3 && ok;
    std::cout << "      " << sp.label << ": " << fmt(100 * got, 1) << "% (want "
              << fmt(100 * sp.want, 1) << " +- " << fmt(100 * sp.tol, 1) << ")" << (ok ? "" : " X")
              << '\n';
  }
  report(3, ok3, "Table 2 detection spot cells at n=300, lambda_r=.50, alpha=.05");
}

void criterion_4() {
  const double m = mardia_z(6.36, 145, 2);
  const double s = srivastava_z(2.26, 145, 2);
  report(4, std::abs(m + 2.47) <= 0.005 && std::abs(s + 2.57) <= 0.01,
         "mardia z = " + fmt(m, 4) + ", srivastava z = " + fmt(s, 4));
}

MatrixXd random_orthogonal(int q, std::mt19937_64& rng) {
  std::normal_distribution<double> normal;
  MatrixXd g(q, q);
  for (Eigen::Index i = 0; i < g.size(); ++i) g.data()[i] = normal(rng);
  Eigen::HouseholderQR<MatrixXd> qr(g);
  return qr.householderQ() * MatrixXd::Identity(q, q);
}

void criterion_5() {
  std::mt19937_64 rng(5);

  double procrustes = 0.0;
  for (double lambda : {0.5, 0.7}) {
    const MatrixXd target = build_loading_matrix(15, 3, lambda).values();
    for (int t = 0; t < 100; ++t) {
      const auto rot = orthogonal_target_rotation(target * random_orthogonal(3, rng), target);
      procrustes = std::max(procrustes, (rot.rotated - target).cwiseAbs().maxCoeff());
    }
  }

  // The product is formed in extended precision so that summation rounding
  // over n terms does not mask the idempotency of the stored matrix.
  using MatrixXld = Eigen::Matrix<long double, Eigen::Dynamic, Eigen::Dynamic>;
  double centering = 0.0;
  double centering_double = 0.0;
  for (int n : {2, 3, 15, 145, 300, 900}) {
    const MatrixXd c = centering_matrix(n);
    const MatrixXld cl = c.cast<long double>();
    centering = std::max(centering, static_cast<double>((cl * cl - cl).cwiseAbs().maxCoeff()));
    centering_double = std::max(centering_double, (c * c - c).cwiseAbs().maxCoeff());
  }

  double metric = 0.0;
  const std::vector<LoadingMatrix> structures = {
      build_loading_matrix(15, 3, 0.5), build_loading_matrix(15, 3, 0.7),
      build_loading_matrix(300, 3, 0.9), build_loading_matrix(600, 3, 0.9),
      build_loading_matrix(900, 3, 0.9)};
  for (const auto& l : structures) {
    const MatrixXd s = population_covariance(l, unique_from_common(l));
    metric = std::max(metric, (s.diagonal().array() - 1.0).abs().maxCoeff());
  }

  double identity = 0.0;
  std::normal_distribution<double> normal;
  for (int t = 0; t < 100; ++t) {
    VectorXd a(145), b(145);
    for (int i = 0; i < 145; ++i) {
      a(i) = normal(rng);
      b(i) = 0.4 * a(i) + normal(rng);
    }
    const VectorXd ca = a.array() - a.mean();
    const VectorXd cb = b.array() - b.mean();
    const double r = ca.dot(cb) / (ca.norm() * cb.norm());
    identity = std::max(identity, std::abs(zdiff_correlation(a, b).rho - r));
  }

  bool bitwise = true;
  for (double lambda : {0.5, 0.7}) {
    PopulationSpec spec;
    spec.lambda_r = lambda;
    spec.w_r2 = 1.0;
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
      const auto scores = generate_scores(spec, seed);
      const auto l = build_loading_matrix(spec.p, spec.q_r, spec.lambda_r);
      const MatrixXd pure = l.values() * scores.f_r + unique_from_common(l).values.asDiagonal() * scores.e_r;
      const MatrixXd got = generate_sample(spec, seed).values;
      bitwise = bitwise && std::memcmp(pure.data(), got.data(), sizeof(double) * pure.size()) == 0;
    }
  }

  char buf[256];
  std::snprintf(buf, sizeof buf,
                "procrustes %.1e, centering %.1e (double product %.1e), unit metric %.1e, "
                "rho identity %.1e, pure-R bitwise %s",
                procrustes, centering, centering_double, metric, identity, bitwise ? "yes" : "no");
  report(5, procrustes <= 1e-10 && centering <= 1e-14 && metric <= 1e-12 && identity <= 1e-10 &&
                bitwise,
         buf);
}

void criterion_6() {
  const double a = verify_q_variance_inflation(12, 3, 12).ratio;
  const double b = verify_q_variance_inflation(20, 4, 20).ratio;
  report(6, std::abs(a - 4.0) <= 1e-8 && std::abs(b - 5.0) <= 1e-8,
         "variance inflation ratios " + fmt(a, 10) + ", " + fmt(b, 10));
}

void criterion_7() {
  double worst = 0.0;
  bool converged = true;
  for (double lambda : {0.5, 0.7}) {
    const auto l = build_loading_matrix(15, 3, lambda);
    const auto sol = principal_axis(population_covariance(l, unique_from_common(l)), 3);
    converged = converged && sol.converged;
    const auto rot = orthogonal_target_rotation(sol.loadings, l.values());
    worst = std::max(worst, (rot.rotated - l.values()).cwiseAbs().maxCoeff());
  }
  char buf[128];
  std::snprintf(buf, sizeof buf, "noiseless PAF + Procrustes max error %.2e", worst);
  report(7, converged && worst <= 1e-4, buf);
}

void criterion_8() {
  const auto c = count_parameters(15, 15, 1, 1);
  report(8, c.model_params == 270 && c.data_points == 120 && !c.identified,
         std::to_string(c.model_params) + " parameters vs " + std::to_string(c.data_points) +
             " data points, identified=" + (c.identified ? "true" : "false"));
}

std::string slurp(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void criterion_9() {
  const fs::path root = fs::temp_directory_path() / "rqf_acceptance_c9";
  fs::remove_all(root);
  fs::create_directories(root);
  {
    std::ofstream cfg(root / "grid.cfg");
    cfg << "lambda_r = 0.50, 0.70\nw_r2 = 1.00, 0.25\nn = 300\nreps = 100\n";
  }
  auto run = [&](int workers) {
    const fs::path out = root / ("w" + std::to_string(workers));
    const std::string cmd = std::string(RQF_CLI_PATH) + " --config " + (root / "grid.cfg").string() +
                            " --workers " + std::to_string(workers) + " --out-dir " + out.string() +
                            " simulate > /dev/null";
    const int status = std::system(cmd.c_str());
    return WIFEXITED(status) && WEXITSTATUS(status) == 0;
  };
  const bool ran = run(1) && run(8);
  bool same = false;
  if (ran) {
    same = true;
    for (const char* name : {"table1.csv", "table2.csv"}) {
      const std::string a = slurp(root / "w1" / name);
      same = same && !a.empty() && a == slurp(root / "w8" / name);
    }
  }
  report(9, ran && same, "simulate workers=1 vs workers=8, 4 conditions x 100 reps: " +
                             std::string(!ran ? "run failed" : same ? "byte-identical" : "differ"));
}

}  // namespace

int main() {
  criteria_1_to_3();
  criterion_4();
  criterion_5();
  criterion_6();
  criterion_7();
  criterion_8();
  criterion_9();
  std::cout << (failures == 0 ? "all criteria passed" : std::to_string(failures) + " criteria failed")
            << std::endl;
  return failures == 0 ? 0 : 1;
}
