#include "rqf/model.hpp"

#include <cmath>
#include <random>
#include <stdexcept>
#include <string>

namespace rqf {

LoadingMatrix::LoadingMatrix(MatrixXd values) : values_(std::move(values)) {
  const auto rows = values_.rows();
  const auto cols = values_.cols();
  if (rows < 1 || cols < 1) {
    throw std::invalid_argument("loading matrix must be non-empty");
  }
  if (rows % cols != 0) {
    throw std::invalid_argument("loading matrix rows (" + std::to_string(rows) +
                                ") not divisible by factors (" + std::to_string(cols) + ")");
  }
  mask_ = values_.array() != 0.0;
  const auto block = rows / cols;
  for (Eigen::Index j = 0; j < rows; ++j) {
    if (mask_.row(j).count() != 1 || !mask_(j, j / block)) {
      throw std::invalid_argument("row " + std::to_string(j) +
                                  " does not follow the balanced simple-structure pattern");
    }
  }
}

void PopulationSpec::validate() const {
  auto fail = [](const std::string& what) { throw std::invalid_argument(what); };
  if (q_r < 1) fail("q_r must be >= 1");
  if (q_q < 2) fail("q_q must be >= 2 (a single Q-factor is removed by centering)");
  if (p < 2) fail("p must be >= 2");
  if (n < 3) fail("n must be >= 3");
  if (p % q_r != 0) fail("p must be divisible by q_r");
  if (n % q_q != 0) fail("n must be divisible by q_q");
  if (!(lambda_r > 0.0 && lambda_r < 1.0)) fail("lambda_r must lie in (0,1)");
  if (!(lambda_q > 0.0 && lambda_q < 1.0)) fail("lambda_q must lie in (0,1)");
  if (!(w_r2 > 0.0 && w_r2 <= 1.0)) fail("w_r2 must lie in (0,1]");
}

LoadingMatrix build_loading_matrix(int rows, int factors, double salient) {
  if (factors < 1 || rows < 1) throw std::invalid_argument("rows and factors must be >= 1");
  if (rows % factors != 0) {
    throw std::invalid_argument("rows (" + std::to_string(rows) + ") not divisible by factors (" +
                                std::to_string(factors) + ")");
  }
  if (!(salient > 0.0 && salient < 1.0)) {
    throw std::invalid_argument("salient loading must lie in (0,1)");
  }
  const int block = rows / factors;
  MatrixXd values = MatrixXd::Zero(rows, factors);
  for (int j = 0; j < rows; ++j) values(j, j / block) = salient;
  return LoadingMatrix(std::move(values));
}

UniqueLoadings unique_from_common(const LoadingMatrix& common) {
  const VectorXd h2 = common.communalities();
  VectorXd psi(h2.size());
  for (Eigen::Index j = 0; j < h2.size(); ++j) {
    if (!(h2(j) < 1.0)) {
      throw std::domain_error("communality of row " + std::to_string(j) +
                              " is >= 1; no unique variance left");
    }
    psi(j) = std::sqrt(1.0 - h2(j));
  }
  return {psi};
}

MatrixXd population_covariance(const MatrixXd& loadings, const VectorXd& unique) {
  if (loadings.rows() != unique.size()) {
    throw std::invalid_argument("loadings have " + std::to_string(loadings.rows()) +
                                " rows but " + std::to_string(unique.size()) +
                                " unique loadings were given");
  }
  MatrixXd sigma = loadings * loadings.transpose();
  sigma.diagonal() += unique.array().square().matrix();
  return sigma;
}

MatrixXd population_covariance(const LoadingMatrix& common, const UniqueLoadings& unique) {
  return population_covariance(common.values(), unique.values);
}

ParamCount count_parameters(std::int64_t p, std::int64_t n, std::int64_t q_r, std::int64_t q_q) {
  ParamCount c;
  c.data_points = (p * p + p) / 2;
  c.model_params = p * q_r + n * q_q + p * q_q + p * n;
  c.identified = c.model_params <= c.data_points;
  return c;
}

namespace {

// Rows of the result are orthonormal: M M' = I. Requires rows <= cols.
MatrixXd row_orthonormal(Eigen::Index rows, Eigen::Index cols) {
  // Gaussian seed matrix is full rank with probability one; fixed seed keeps
  // the construction deterministic.
  std::mt19937_64 rng(0x5eedULL);
  std::normal_distribution<double> normal;
  MatrixXd seed(cols, rows);
  for (Eigen::Index k = 0; k < rows; ++k) {
    for (Eigen::Index i = 0; i < cols; ++i) seed(i, k) = normal(rng);
  }
  Eigen::HouseholderQR<MatrixXd> qr(seed);
  const MatrixXd q = qr.householderQ() * MatrixXd::Identity(cols, rows);
  return q.transpose();
}

}  // namespace

VarianceInflation verify_q_variance_inflation(int n, int q_q, int p) {
  if (n < 1 || q_q < 1 || n % q_q != 0) {
    throw std::invalid_argument("n must be a positive multiple of q_q");
  }
  if (p < n) {
    throw std::invalid_argument("p must be >= n so that score rows can be orthonormal");
  }
  // Equal split: each individual has common and unique Q variance of 1/2.
  const LoadingMatrix lambda_q = build_loading_matrix(n, q_q, std::sqrt(0.5));
  const VectorXd psi_q2 = VectorXd::Constant(n, 0.5);

  const MatrixXd f_q = row_orthonormal(q_q, p);  // f f' = I_{q_q}
  const MatrixXd e_q = row_orthonormal(n, p);    // e e' = I_n

  const MatrixXd lf = lambda_q.values() * f_q;  // n x p
  const MatrixXd common = lf.transpose() * lf;  // f' L' L f, p x p
  const MatrixXd unique = e_q.transpose() * psi_q2.asDiagonal() * e_q;

  VarianceInflation v;
  v.ssq_common = common.squaredNorm();  // tr(A A') for symmetric A
  v.ssq_unique = unique.squaredNorm();
  v.ratio = v.ssq_common / v.ssq_unique;
  return v;
}

}  // namespace rqf
