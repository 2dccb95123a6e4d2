#pragma once

// Population structures for data generated by combined R-factor (variables)
// and Q-factor (individuals) models.

#include <cstdint>

#include <Eigen/Dense>

namespace rqf {

using Eigen::MatrixXd;
using Eigen::VectorXd;
using BoolMatrix = Eigen::Array<bool, Eigen::Dynamic, Eigen::Dynamic>;

/// Balanced simple-structure loading matrix. Rows are split into contiguous
/// blocks of rows()/factors(); every row of block k loads `salient` on factor
/// k and exactly zero elsewhere.
class LoadingMatrix {
 public:
  /// Wraps an existing matrix. Throws std::invalid_argument unless every row
  /// has exactly one nonzero entry and the pattern is contiguous and balanced.
  /// Salient sizes may differ between rows.
  explicit LoadingMatrix(MatrixXd values);

  const MatrixXd& values() const { return values_; }
  const BoolMatrix& salient_mask() const { return mask_; }
  Eigen::Index rows() const { return values_.rows(); }
  Eigen::Index factors() const { return values_.cols(); }
  Eigen::Index block_size() const { return values_.rows() / values_.cols(); }
  /// Factor index carrying the salient loading of `row`.
  Eigen::Index salient_factor(Eigen::Index row) const { return row / block_size(); }
  /// Row sums of squared loadings.
  VectorXd communalities() const { return values_.rowwise().squaredNorm(); }

 private:
  MatrixXd values_;
  BoolMatrix mask_;
};

struct UniqueLoadings {
  VectorXd values;  // diagonal of Psi, strictly positive
};

/// One combined R/Q population. w_q2 is always 1 - w_r2.
struct PopulationSpec {
  int p = 15;
  int n = 300;
  int q_r = 3;
  int q_q = 3;
  double lambda_r = 0.5;
  double lambda_q = 0.9;
  double w_r2 = 1.0;

  double w_q2() const { return 1.0 - w_r2; }
  /// Throws std::invalid_argument naming the first violated constraint.
  void validate() const;
};

struct ParamCount {
  std::int64_t data_points = 0;
  std::int64_t model_params = 0;
  bool identified = false;
};

struct VarianceInflation {
  double ssq_common = 0.0;
  double ssq_unique = 0.0;
  double ratio = 0.0;
};

LoadingMatrix build_loading_matrix(int rows, int factors, double salient);

/// psi_j = sqrt(1 - communality_j). Rejects rows with communality >= 1.
UniqueLoadings unique_from_common(const LoadingMatrix& common);

/// Lambda Lambda' + Psi^2.
MatrixXd population_covariance(const MatrixXd& loadings, const VectorXd& unique);
MatrixXd population_covariance(const LoadingMatrix& common, const UniqueLoadings& unique);

ParamCount count_parameters(std::int64_t p, std::int64_t n, std::int64_t q_r, std::int64_t q_q);

/// Builds the equal-split Q population (diag(Lambda_Q Lambda_Q') = Psi_Q^2 = I/2)
/// with exactly row-orthonormal score matrices and returns the sums of squares
/// of the common part f'L'Lf and the unique part e'Psi^2 e. Their ratio is n/q_q.
VarianceInflation verify_q_variance_inflation(int n, int q_q, int p);

}  // namespace rqf
