#pragma once

// R-factor extraction: Pearson correlations, principal-axis factoring with
// iterated communalities, and orthogonal Procrustes rotation to a target.

#include "rqf/datagen.hpp"
#include "rqf/model.hpp"

namespace rqf {

struct FactorSolution {
  MatrixXd loadings;       // p x q, columns by descending eigenvalue
  VectorXd communalities;  // in [0, 1]
  int iterations = 0;
  bool converged = false;
  bool heywood_adjusted = false;  // a communality was clamped to [0, 1]
  bool eigen_clamped = false;     // a retained eigenvalue was negative
};

struct RotationResult {
  MatrixXd rotation;  // q x q orthogonal
  MatrixXd rotated;   // loadings * rotation
  double residual_frobenius = 0.0;
  bool degenerate = false;  // cross-product matrix was rank deficient
};

struct Communalities {
  VectorXd values;
  bool ridge_applied = false;
};

/// Correlations between the rows (variables) of a p x n score matrix.
/// Throws std::domain_error naming a constant variable.
MatrixXd correlation_matrix(const MatrixXd& variables_by_cases);
MatrixXd correlation_matrix(const DataMatrix& data);

/// Squared multiple correlations 1 - 1/(R^-1)_jj. A ridge of 1e-8 is added
/// to the diagonal when the condition number exceeds 1e12.
Communalities smc_communalities(const MatrixXd& r);

struct PafOptions {
  double tol = 1e-6;
  int max_iter = 200;
};

FactorSolution principal_axis(const MatrixXd& r, int q, PafOptions options = {});

/// T = U V' from the SVD loadings' target = U S V'; minimizes
/// ||loadings T - target||_F over orthogonal T.
RotationResult orthogonal_target_rotation(const MatrixXd& loadings, const MatrixXd& target);

}  // namespace rqf
