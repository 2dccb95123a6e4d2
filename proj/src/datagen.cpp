#include "rqf/datagen.hpp"

#include <cmath>
#include <random>
#include <stdexcept>
#include <string>

namespace rqf {

MatrixXd centering_matrix(int n) {
  if (n < 1) throw std::invalid_argument("centering matrix needs n >= 1");
  MatrixXd c = MatrixXd::Constant(n, n, -1.0 / n);
  c.diagonal().array() += 1.0;
  return c;
}

namespace {

MatrixXd draw_normal(Eigen::Index rows, Eigen::Index cols, std::mt19937_64& rng) {
  std::normal_distribution<double> normal(0.0, 1.0);
  MatrixXd m(rows, cols);
  for (Eigen::Index c = 0; c < cols; ++c) {
    for (Eigen::Index r = 0; r < rows; ++r) m(r, c) = normal(rng);
  }
  return m;
}

// Removes each row's mean; equivalent to right-multiplying by C_n.
void center_rows(MatrixXd& m) {
  const VectorXd means = m.rowwise().mean();
  m.colwise() -= means;
}

}  // namespace

ScoreSet generate_scores(const PopulationSpec& spec, std::uint64_t seed) {
  spec.validate();
  std::mt19937_64 rng(seed);
  ScoreSet s;
  s.seed = seed;
  s.f_r = draw_normal(spec.q_r, spec.n, rng);
  s.e_r = draw_normal(spec.p, spec.n, rng);
  s.f_q = draw_normal(spec.q_q, spec.p, rng);
  s.e_q = draw_normal(spec.n, spec.p, rng);
  return s;
}

MatrixXd assemble_q_part(const LoadingMatrix& lambda_q, const UniqueLoadings& psi_q,
                         const MatrixXd& f_q, const MatrixXd& e_q) {
  const auto n = lambda_q.rows();
  const auto q = lambda_q.factors();
  if (psi_q.values.size() != n || f_q.rows() != q || e_q.rows() != n ||
      f_q.cols() != e_q.cols()) {
    throw std::invalid_argument("assemble_q_part: inconsistent shapes");
  }
  if (n < 2) throw std::invalid_argument("assemble_q_part: need n >= 2 for a sample variance");

  MatrixXd raw = f_q.transpose() * lambda_q.values().transpose() +
                 e_q.transpose() * psi_q.values.asDiagonal();  // p x n
  center_rows(raw);

  for (Eigen::Index j = 0; j < raw.rows(); ++j) {
    const double ssq = raw.row(j).squaredNorm();
    if (!(ssq > 0.0)) {
      throw std::domain_error("Q-part row " + std::to_string(j) + " has zero variance");
    }
    raw.row(j) /= std::sqrt(ssq / static_cast<double>(n - 1));
  }
  return raw;
}

DataMatrix generate_sample(const PopulationSpec& spec, std::uint64_t seed) {
  const ScoreSet scores = generate_scores(spec, seed);
  const LoadingMatrix lambda_r = build_loading_matrix(spec.p, spec.q_r, spec.lambda_r);
  const UniqueLoadings psi_r = unique_from_common(lambda_r);

  const double w_r = std::sqrt(spec.w_r2);
  const double w_q = std::sqrt(spec.w_q2());

  MatrixXd unique_part;
  if (w_q == 0.0) {
    unique_part = scores.e_r;
  } else {
    const LoadingMatrix lambda_q = build_loading_matrix(spec.n, spec.q_q, spec.lambda_q);
    const UniqueLoadings psi_q = unique_from_common(lambda_q);
    const MatrixXd q_std = assemble_q_part(lambda_q, psi_q, scores.f_q, scores.e_q);
    unique_part = w_r * scores.e_r + w_q * q_std;
  }

  DataMatrix out;
  out.values = lambda_r.values() * scores.f_r + psi_r.values.asDiagonal() * unique_part;
  out.spec = spec;
  out.seed = seed;
  return out;
}

double cross_term_mean(const MatrixXd& x_r, const MatrixXd& x_q) {
  if (x_r.cols() != x_q.rows() || x_r.rows() != x_q.cols()) {
    throw std::invalid_argument("cross_term_mean: x_r must be p x n and x_q n x p");
  }
  MatrixXd centered = x_q;  // C_n X_Q: remove each column's mean over individuals
  centered.rowwise() -= x_q.colwise().mean();
  const MatrixXd h = x_r * centered;
  return h.mean();
}

double cross_term_check(const PopulationSpec& spec, std::uint64_t seed) {
  const ScoreSet s = generate_scores(spec, seed);
  const LoadingMatrix lambda_r = build_loading_matrix(spec.p, spec.q_r, spec.lambda_r);
  const UniqueLoadings psi_r = unique_from_common(lambda_r);
  const LoadingMatrix lambda_q = build_loading_matrix(spec.n, spec.q_q, spec.lambda_q);
  const UniqueLoadings psi_q = unique_from_common(lambda_q);

  const MatrixXd x_r = lambda_r.values() * s.f_r + psi_r.values.asDiagonal() * s.e_r;
  const MatrixXd x_q = lambda_q.values() * s.f_q + psi_q.values.asDiagonal() * s.e_q;
  return cross_term_mean(x_r, x_q);
}

}  // namespace rqf
