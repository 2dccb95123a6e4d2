#include "rqf/mvnkurt.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

#include <boost/math/special_functions/erf.hpp>
#include <boost/math/special_functions/gamma.hpp>

namespace rqf {

std::string_view test_name(KurtosisTest test) {
  switch (test) {
    case KurtosisTest::Mardia:
      return "mardia";
    case KurtosisTest::Srivastava:
      return "srivastava";
    case KurtosisTest::Small:
      return "small";
  }
  return "unknown";
}

double normal_two_sided_p(double z) {
  return boost::math::erfc(std::abs(z) / std::sqrt(2.0));
}

double normal_lower_p(double z) { return 0.5 * boost::math::erfc(-z / std::sqrt(2.0)); }

double chi_square_upper_p(double x, int df) {
  if (df < 1) throw std::invalid_argument("chi-square needs df >= 1");
  if (x <= 0.0) return 1.0;
  return boost::math::gamma_q(0.5 * df, 0.5 * x);
}

double mardia_z(double b2p, int n, int p) {
  const double pp2 = static_cast<double>(p) * (p + 2);
  return (b2p - pp2) / std::sqrt(8.0 * pp2 / n);
}

double srivastava_z(double b2, int n, int p) {
  return std::sqrt(static_cast<double>(n) * p / 24.0) * (b2 - 3.0);
}

double anscombe_glynn_z(double b2, int n) {
  if (n < 4) throw std::invalid_argument("Anscombe-Glynn transformation needs n >= 4");
  const double nd = n;
  const double expected = 3.0 * (nd - 1.0) / (nd + 1.0);
  const double var = 24.0 * nd * (nd - 2.0) * (nd - 3.0) /
                     ((nd + 1.0) * (nd + 1.0) * (nd + 3.0) * (nd + 5.0));
  const double x = (b2 - expected) / std::sqrt(var);
  // Third standardized moment of b2.
  const double sqrt_beta1 = 6.0 * (nd * nd - 5.0 * nd + 2.0) / ((nd + 7.0) * (nd + 9.0)) *
                            std::sqrt(6.0 * (nd + 3.0) * (nd + 5.0) / (nd * (nd - 2.0) * (nd - 3.0)));
  const double a = 6.0 + 8.0 / sqrt_beta1 *
                             (2.0 / sqrt_beta1 + std::sqrt(1.0 + 4.0 / (sqrt_beta1 * sqrt_beta1)));
  const double ratio = (1.0 - 2.0 / a) / (1.0 + x * std::sqrt(2.0 / (a - 4.0)));
  return ((1.0 - 2.0 / (9.0 * a)) - std::cbrt(ratio)) / std::sqrt(2.0 / (9.0 * a));
}

namespace {

MatrixXd centered(const MatrixXd& data) {
  MatrixXd c = data;
  c.rowwise() -= data.colwise().mean();
  return c;
}

void require_shape(const MatrixXd& data, const char* who) {
  if (data.rows() < 2 || data.cols() < 1) {
    throw std::invalid_argument(std::string(who) + ": need at least 2 cases and 1 variable");
  }
  if (!data.allFinite()) throw std::invalid_argument(std::string(who) + ": non-finite input");
}

}  // namespace

KurtosisReport mardia_kurtosis(const MatrixXd& data) {
  require_shape(data, "mardia_kurtosis");
  const auto n = static_cast<int>(data.rows());
  const auto p = static_cast<int>(data.cols());
  if (n <= p + 1) throw std::invalid_argument("mardia_kurtosis: need n > p + 1");

  const MatrixXd c = centered(data);
  const MatrixXd s = (c.transpose() * c) / n;
  Eigen::LDLT<MatrixXd> ldlt(s);
  const double scale = s.diagonal().cwiseAbs().maxCoeff();
  if (ldlt.info() != Eigen::Success || !(ldlt.vectorD().minCoeff() > 1e-12 * scale)) {
    throw std::domain_error("mardia_kurtosis: covariance matrix is singular");
  }
  const MatrixXd solved = ldlt.solve(c.transpose());  // S^-1 (x_i - xbar), p x n
  double sum = 0.0;
  for (int i = 0; i < n; ++i) {
    const double d2 = c.row(i).dot(solved.col(i));
    sum += d2 * d2;
  }

  KurtosisReport r;
  r.test = KurtosisTest::Mardia;
  r.statistic = sum / n;
  r.standardized = mardia_z(r.statistic, n, p);
  r.p_value = normal_two_sided_p(r.standardized);
  r.two_sided = true;
  return r;
}

KurtosisReport srivastava_kurtosis(const MatrixXd& data) {
  require_shape(data, "srivastava_kurtosis");
  const auto n = static_cast<int>(data.rows());
  const auto p = static_cast<int>(data.cols());
  if (n <= p) throw std::invalid_argument("srivastava_kurtosis: need n > p");

  const MatrixXd c = centered(data);
  const MatrixXd s = (c.transpose() * c) / n;
  Eigen::SelfAdjointEigenSolver<MatrixXd> eig(s);
  const VectorXd& lambda = eig.eigenvalues();
  if (!(lambda.minCoeff() > 1e-12 * std::max(1.0, lambda.maxCoeff()))) {
    throw std::domain_error("srivastava_kurtosis: covariance has a zero eigenvalue");
  }
  // Centered data projected on principal axes stays centered.
  const MatrixXd y = c * eig.eigenvectors();
  double total = 0.0;
  for (int j = 0; j < p; ++j) {
    total += y.col(j).array().pow(4).sum() / (lambda(j) * lambda(j));
  }

  KurtosisReport r;
  r.test = KurtosisTest::Srivastava;
  r.statistic = total / (static_cast<double>(n) * p);
  r.standardized = srivastava_z(r.statistic, n, p);
  r.p_value = normal_two_sided_p(r.standardized);
  r.two_sided = true;
  return r;
}

KurtosisReport small_q2(const MatrixXd& data) {
  require_shape(data, "small_q2");
  const auto n = static_cast<int>(data.rows());
  const auto p = static_cast<int>(data.cols());
  if (n < 20) throw std::invalid_argument("small_q2: need n >= 20");

  const MatrixXd c = centered(data);
  VectorXd z(p);
  VectorXd sd(p);
  for (int j = 0; j < p; ++j) {
    const double m2 = c.col(j).squaredNorm() / n;
    if (!(m2 > 0.0)) {
      throw std::domain_error("small_q2: variable " + std::to_string(j + 1) + " is constant");
    }
    const double m4 = c.col(j).array().pow(4).sum() / n;
    z(j) = anscombe_glynn_z(m4 / (m2 * m2), n);
    sd(j) = std::sqrt(m2 * n);
  }

  MatrixXd u(p, p);
  for (int j = 0; j < p; ++j) {
    u(j, j) = 1.0;
    for (int k = j + 1; k < p; ++k) {
      const double r = c.col(j).dot(c.col(k)) / (sd(j) * sd(k));
      if (std::abs(r) >= 1.0 - 1e-12) {
        throw std::domain_error("small_q2: variables " + std::to_string(j + 1) + " and " +
                                std::to_string(k + 1) + " are perfectly correlated");
      }
      u(j, k) = u(k, j) = std::pow(r, 4);
    }
  }
  Eigen::LLT<MatrixXd> llt(u);
  if (llt.info() != Eigen::Success) {
    throw std::domain_error("small_q2: fourth-power correlation matrix is singular");
  }

  KurtosisReport r;
  r.test = KurtosisTest::Small;
  r.statistic = z.dot(llt.solve(z));
  r.standardized = r.statistic;
  r.df = p;
  r.p_value = chi_square_upper_p(r.statistic, p);
  r.two_sided = false;
  return r;
}

std::array<KurtosisReport, 3> kurtosis_battery(const MatrixXd& data) {
  return {mardia_kurtosis(data), srivastava_kurtosis(data), small_q2(data)};
}

namespace {

VectorXd standardize(const VectorXd& v, const char* which) {
  const double mean = v.mean();
  const VectorXd c = v.array() - mean;
  const double var = c.squaredNorm() / static_cast<double>(v.size());
  if (!(var > 0.0)) throw std::domain_error(std::string(which) + " has zero variance");
  return c / std::sqrt(var);
}

}  // namespace

ZDiff zdiff_correlation(const VectorXd& z1, const VectorXd& z2) {
  if (z1.size() != z2.size() || z1.size() < 2) {
    throw std::invalid_argument("zdiff_correlation: inputs must have equal length >= 2");
  }
  const VectorXd a = standardize(z1, "z1");
  const VectorXd b = standardize(z2, "z2");
  const VectorXd d = a - b;
  const double mean = d.mean();
  ZDiff out;
  out.sigma_d2 = (d.array() - mean).square().sum() / static_cast<double>(d.size());
  out.rho = 1.0 - out.sigma_d2 / 2.0;
  return out;
}

std::vector<PairReport> pairwise_bivariate_kurtosis(const MatrixXd& data) {
  const auto p = static_cast<int>(data.cols());
  if (p < 2) throw std::invalid_argument("pairwise_bivariate_kurtosis: need p >= 2");
  std::vector<PairReport> out;
  out.reserve(static_cast<std::size_t>(p) * (p - 1) / 2);
  MatrixXd pair(data.rows(), 2);
  for (int i = 0; i < p; ++i) {
    for (int j = i + 1; j < p; ++j) {
      pair.col(0) = data.col(i);
      pair.col(1) = data.col(j);
      out.push_back({i, j, mardia_kurtosis(pair)});
    }
  }
  return out;
}

}  // namespace rqf
