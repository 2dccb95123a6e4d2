#pragma once

// Observed-score generation for the combined R/Q model
//
//   X = Lambda_R f_R + Psi_R (w_R e_R + w_Q Q_std)
//
// where Q_std is the row-standardized, column-centered transposed Q-part
// (f_Q' Lambda_Q' + e_Q' Psi_Q) C_n. Each row of Q_std is scaled to unit
// sample variance (n - 1 divisor) so that it shares the scale of e_R and
// w_R^2 + w_Q^2 = 1 keeps every variable at unit population variance.

#include <cstdint>

#include "rqf/model.hpp"

namespace rqf {

/// Independent standard-normal draws for one replication.
struct ScoreSet {
  MatrixXd f_r;  // q_r x n
  MatrixXd e_r;  // p x n
  MatrixXd f_q;  // q_q x p
  MatrixXd e_q;  // n x p
  std::uint64_t seed = 0;
};

/// Observed scores, variables x individuals.
struct DataMatrix {
  MatrixXd values;  // p x n
  PopulationSpec spec;
  std::uint64_t seed = 0;
};

/// I - (1/n) 1 1'.
MatrixXd centering_matrix(int n);

/// Draw order is f_r, e_r, f_q, e_q, each column-major, from one
/// mt19937_64 stream seeded with `seed`.
ScoreSet generate_scores(const PopulationSpec& spec, std::uint64_t seed);

/// (f_q' Lambda_q' + e_q' Psi_q) C_n with every row scaled to unit sample
/// variance. Throws std::domain_error naming a zero-variance row.
MatrixXd assemble_q_part(const LoadingMatrix& lambda_q, const UniqueLoadings& psi_q,
                         const MatrixXd& f_q, const MatrixXd& e_q);

DataMatrix generate_sample(const PopulationSpec& spec, std::uint64_t seed);

/// Mean element of H = X_R (C_n X_Q) for the unstandardized parts of one draw.
double cross_term_check(const PopulationSpec& spec, std::uint64_t seed);

/// Mean element of x_r (p x n) times C_n times x_q (n x p).
double cross_term_mean(const MatrixXd& x_r, const MatrixXd& x_q);

}  // namespace rqf
