#include "rqf/extract.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace rqf {

MatrixXd correlation_matrix(const MatrixXd& x) {
  const auto p = x.rows();
  const auto n = x.cols();
  if (n < 3) throw std::invalid_argument("correlation_matrix needs at least 3 cases");

  MatrixXd centered = x;
  centered.colwise() -= x.rowwise().mean();
  VectorXd sd = centered.rowwise().norm();
  for (Eigen::Index j = 0; j < p; ++j) {
    if (!(sd(j) > 0.0)) {
      throw std::domain_error("variable " + std::to_string(j + 1) + " has zero variance");
    }
  }
  centered = sd.cwiseInverse().asDiagonal() * centered;
  MatrixXd r = centered * centered.transpose();
  // Symmetrize and pin the unit diagonal against rounding.
  r = 0.5 * (r + r.transpose()).eval();
  r.diagonal().setOnes();
  return r;
}

MatrixXd correlation_matrix(const DataMatrix& data) { return correlation_matrix(data.values); }

Communalities smc_communalities(const MatrixXd& r) {
  if (r.rows() != r.cols()) throw std::invalid_argument("correlation matrix must be square");
  Communalities out;
  MatrixXd work = r;

  Eigen::SelfAdjointEigenSolver<MatrixXd> eig(work, Eigen::EigenvaluesOnly);
  const double lo = eig.eigenvalues().minCoeff();
  const double hi = eig.eigenvalues().maxCoeff();
  if (!(lo > 0.0) || hi / lo > 1e12) {
    work.diagonal().array() += 1e-8;
    out.ridge_applied = true;
  }

  Eigen::LLT<MatrixXd> llt(work);
  if (llt.info() != Eigen::Success) {
    throw std::domain_error("correlation matrix is not positive definite");
  }
  const MatrixXd inv = llt.solve(MatrixXd::Identity(r.rows(), r.cols()));
  out.values.resize(r.rows());
  for (Eigen::Index j = 0; j < r.rows(); ++j) {
    out.values(j) = std::clamp(1.0 - 1.0 / inv(j, j), 0.0, std::nextafter(1.0, 0.0));
  }
  return out;
}

namespace {

struct Extraction {
  MatrixXd loadings;
  bool eigen_clamped = false;
};

// Top-q eigenpairs of the reduced matrix, scaled to loadings.
Extraction extract_once(const MatrixXd& r, const VectorXd& h2, int q) {
  MatrixXd reduced = r;
  reduced.diagonal() = h2;
  Eigen::SelfAdjointEigenSolver<MatrixXd> eig(reduced);
  if (eig.info() != Eigen::Success) {
    throw std::runtime_error("eigendecomposition failed");
  }
  const auto p = r.rows();
  Extraction out;
  out.loadings.resize(p, q);
  for (int k = 0; k < q; ++k) {
    const Eigen::Index idx = p - 1 - k;  // eigenvalues come in ascending order
    double value = eig.eigenvalues()(idx);
    if (value < 0.0) {
      value = 0.0;
      out.eigen_clamped = true;
    }
    out.loadings.col(k) = eig.eigenvectors().col(idx) * std::sqrt(value);
  }
  return out;
}

void fix_signs(MatrixXd& loadings) {
  for (Eigen::Index k = 0; k < loadings.cols(); ++k) {
    Eigen::Index arg = 0;
    loadings.col(k).cwiseAbs().maxCoeff(&arg);
    if (loadings(arg, k) < 0.0) loadings.col(k) *= -1.0;
  }
}

}  // namespace

FactorSolution principal_axis(const MatrixXd& r, int q, PafOptions options) {
  const auto p = r.rows();
  if (r.cols() != p) throw std::invalid_argument("correlation matrix must be square");
  if (q < 1 || q >= p) {
    throw std::invalid_argument("number of factors must satisfy 1 <= q < p");
  }
  if ((r - r.transpose()).cwiseAbs().maxCoeff() > 1e-10) {
    throw std::invalid_argument("correlation matrix is not symmetric");
  }

  FactorSolution sol;
  VectorXd h2 = smc_communalities(r).values;
  Extraction ext;
  for (int it = 1; it <= options.max_iter; ++it) {
    ext = extract_once(r, h2, q);
    sol.eigen_clamped = sol.eigen_clamped || ext.eigen_clamped;
    VectorXd next = ext.loadings.rowwise().squaredNorm();
    for (Eigen::Index j = 0; j < p; ++j) {
      if (next(j) > 1.0 || next(j) < 0.0) {
        next(j) = std::clamp(next(j), 0.0, 1.0);
        sol.heywood_adjusted = true;
      }
    }
    const double change = (next - h2).cwiseAbs().maxCoeff();
    h2 = next;
    sol.iterations = it;
    if (change < options.tol) {
      sol.converged = true;
      break;
    }
  }
  fix_signs(ext.loadings);
  sol.loadings = std::move(ext.loadings);
  sol.communalities = std::move(h2);
  return sol;
}

RotationResult orthogonal_target_rotation(const MatrixXd& loadings, const MatrixXd& target) {
  if (loadings.rows() != target.rows() || loadings.cols() != target.cols()) {
    throw std::invalid_argument("loadings and target must have the same shape");
  }
  if (loadings.cols() < 1) throw std::invalid_argument("need at least one factor");

  const MatrixXd cross = loadings.transpose() * target;
  Eigen::JacobiSVD<MatrixXd> svd(cross, Eigen::ComputeFullU | Eigen::ComputeFullV);

  RotationResult out;
  out.rotation = svd.matrixU() * svd.matrixV().transpose();
  out.rotated = loadings * out.rotation;
  out.residual_frobenius = (out.rotated - target).norm();
  const auto& s = svd.singularValues();
  out.degenerate = s.size() == 0 || s(s.size() - 1) <= 1e-12 * std::max(1.0, s(0));
  return out;
}

}  // namespace rqf
