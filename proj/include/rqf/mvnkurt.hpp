#pragma once

// Tests of multivariate kurtosis. All functions take data as cases x variables.

#include <array>
#include <optional>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

namespace rqf {

using Eigen::MatrixXd;
using Eigen::VectorXd;

enum class KurtosisTest { Mardia, Srivastava, Small };

std::string_view test_name(KurtosisTest test);

struct KurtosisReport {
  KurtosisTest test = KurtosisTest::Mardia;
  double statistic = 0.0;     // b2,p (Mardia), b2 (Srivastava), Q2 (Small)
  double standardized = 0.0;  // z for the normal tests, Q2 for Small
  std::optional<int> df;      // Small only
  double p_value = 1.0;
  bool two_sided = true;
};

/// Two-sided standard-normal p-value.
double normal_two_sided_p(double z);
/// Lower-tail standard-normal p-value, for callers screening platykurtosis only.
double normal_lower_p(double z);
double chi_square_upper_p(double x, int df);

/// (b2p - p(p+2)) / sqrt(8 p (p+2) / n), no small-sample correction.
double mardia_z(double b2p, int n, int p);
/// sqrt(n p / 24) (b2 - 3).
double srivastava_z(double b2, int n, int p);
/// Anscombe-Glynn normalizing transformation of a univariate b2.
double anscombe_glynn_z(double b2, int n);

/// Mardia's b2,p with the n-divisor covariance. Requires n > p + 1.
KurtosisReport mardia_kurtosis(const MatrixXd& data);
/// Mean standardized fourth moment along the principal axes of the
/// n-divisor covariance. Requires n > p and p positive eigenvalues.
KurtosisReport srivastava_kurtosis(const MatrixXd& data);
/// Small's Q2 = z' U^-1 z with U_jk = r_jk^4, chi-square with p df.
KurtosisReport small_q2(const MatrixXd& data);

/// Mardia, Srivastava, Small in that order.
std::array<KurtosisReport, 3> kurtosis_battery(const MatrixXd& data);

struct ZDiff {
  double sigma_d2 = 0.0;  // n-divisor variance of z1 - z2
  double rho = 0.0;       // 1 - sigma_d2 / 2
};

/// Standardizes both inputs (n divisor) and returns the difference-score
/// variance with the correlation it implies.
ZDiff zdiff_correlation(const VectorXd& z1, const VectorXd& z2);

struct PairReport {
  int first = 0;
  int second = 0;
  KurtosisReport report;
};

/// Mardia's test on every variable pair (i < j), row-major upper triangle.
std::vector<PairReport> pairwise_bivariate_kurtosis(const MatrixXd& data);

}  // namespace rqf
