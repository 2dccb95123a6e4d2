#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "rqf/datagen.hpp"
#include "rqf/extract.hpp"

using namespace rqf;

namespace {

PopulationSpec paper_spec(double w_r2 = 0.25, int n = 300) {
  return PopulationSpec{15, n, 3, 3, 0.50, 0.90, w_r2};
}

}  // namespace

TEST(CenteringMatrix, SmallCases) {
  const MatrixXd c2 = centering_matrix(2);
  EXPECT_DOUBLE_EQ(c2(0, 0), 0.5);
  EXPECT_DOUBLE_EQ(c2(0, 1), -0.5);
  EXPECT_DOUBLE_EQ(c2(1, 0), -0.5);
  EXPECT_DOUBLE_EQ(c2(1, 1), 0.5);
  EXPECT_DOUBLE_EQ(centering_matrix(1)(0, 0), 0.0);
  EXPECT_THROW(centering_matrix(0), std::invalid_argument);
}

TEST(CenteringMatrix, SymmetricIdempotentAnnihilatesOnes) {
  for (int n : {1, 2, 3, 7, 50, 145}) {
    const MatrixXd c = centering_matrix(n);
    EXPECT_LT((c * c - c).cwiseAbs().maxCoeff(), 1e-14) << n;
    EXPECT_TRUE(c.isApprox(c.transpose(), 0.0));
    EXPECT_LT((c * VectorXd::Ones(n)).cwiseAbs().maxCoeff(), 1e-14);
  }
}

TEST(GenerateScores, ShapesAndDeterminism) {
  const auto spec = paper_spec();
  const auto a = generate_scores(spec, 99);
  const auto b = generate_scores(spec, 99);
  EXPECT_EQ(a.f_r.rows(), 3);
  EXPECT_EQ(a.f_r.cols(), 300);
  EXPECT_EQ(a.e_r.rows(), 15);
  EXPECT_EQ(a.e_r.cols(), 300);
  EXPECT_EQ(a.f_q.rows(), 3);
  EXPECT_EQ(a.f_q.cols(), 15);
  EXPECT_EQ(a.e_q.rows(), 300);
  EXPECT_EQ(a.e_q.cols(), 15);
  EXPECT_TRUE(a.f_r == b.f_r && a.e_r == b.e_r && a.f_q == b.f_q && a.e_q == b.e_q);
  const auto c = generate_scores(spec, 100);
  EXPECT_FALSE(a.e_r == c.e_r);
}

TEST(GenerateScores, MeanWithinNormalTheoryBound) {
  const auto spec = paper_spec(1.0, 9000);
  const auto s = generate_scores(spec, 5);
  const double bound = 4.0 / std::sqrt(static_cast<double>(s.e_r.size()));
  EXPECT_LT(std::abs(s.e_r.mean()), bound);
  EXPECT_TRUE(s.e_r.allFinite());
}

TEST(AssembleQPart, RowsCenteredWithUnitVariance) {
  std::mt19937_64 rng(3);
  std::uniform_int_distribution<int> pick_q(2, 4);
  std::uniform_int_distribution<int> pick_block(2, 40);
  std::uniform_int_distribution<int> pick_p(2, 20);
  for (int trial = 0; trial < 40; ++trial) {
    const int q = pick_q(rng);
    PopulationSpec spec{pick_p(rng), q * pick_block(rng), 1, q, 0.5, 0.9, 0.5};
    spec.p = std::max(spec.p, 2);
    const auto s = generate_scores(spec, rng());
    const auto lq = build_loading_matrix(spec.n, spec.q_q, spec.lambda_q);
    const MatrixXd part = assemble_q_part(lq, unique_from_common(lq), s.f_q, s.e_q);
    ASSERT_EQ(part.rows(), spec.p);
    ASSERT_EQ(part.cols(), spec.n);
    for (Eigen::Index j = 0; j < part.rows(); ++j) {
      const double mean = part.row(j).mean();
      const double var = (part.row(j).array() - mean).square().sum() / (spec.n - 1);
      EXPECT_LT(std::abs(mean), 1e-12);
      EXPECT_LT(std::abs(var - 1.0), 1e-10);
    }
  }
}

TEST(AssembleQPart, ZeroVarianceRowIsNamed) {
  const auto lq = build_loading_matrix(6, 2, 0.9);
  const auto psi = unique_from_common(lq);
  MatrixXd f = MatrixXd::Zero(2, 3);
  MatrixXd e = MatrixXd::Zero(6, 3);
  f(0, 0) = 1.0;
  e(1, 0) = 0.3;
  f(1, 1) = -1.0;  // row 2 (index 2) stays all zeros
  try {
    assemble_q_part(lq, psi, f, e);
    FAIL() << "expected domain_error";
  } catch (const std::domain_error& err) {
    EXPECT_NE(std::string(err.what()).find("row 2"), std::string::npos);
  }
}

TEST(AssembleQPart, SingleQFactorRejectedUpstream) {
  auto spec = paper_spec();
  spec.q_q = 1;
  EXPECT_THROW(generate_sample(spec, 1), std::invalid_argument);
}

TEST(GenerateSample, PureRModelWhenWR2IsOne) {
  const auto spec = paper_spec(1.0);
  const auto s = generate_scores(spec, 42);
  const auto l = build_loading_matrix(15, 3, 0.5);
  const auto psi = unique_from_common(l);
  const MatrixXd expected = l.values() * s.f_r + psi.values.asDiagonal() * s.e_r;
  const auto x = generate_sample(spec, 42);
  EXPECT_TRUE(x.values == expected);  // bitwise
}

TEST(GenerateSample, PaperCellIsValid) {
  const auto x = generate_sample(paper_spec(0.25), 11);
  EXPECT_EQ(x.values.rows(), 15);
  EXPECT_EQ(x.values.cols(), 300);
  EXPECT_TRUE(x.values.allFinite());
  EXPECT_EQ(x.seed, 11u);
  const auto y = generate_sample(paper_spec(0.25), 11);
  EXPECT_TRUE(x.values == y.values);
}

TEST(GenerateSample, LargeSampleMatchesPopulationCorrelations) {
  const auto x = generate_sample(paper_spec(1.0, 50001), 2024);
  const MatrixXd r = correlation_matrix(x);
  const auto l = build_loading_matrix(15, 3, 0.5);
  const MatrixXd sigma = population_covariance(l, unique_from_common(l));
  EXPECT_LT((r - sigma).cwiseAbs().maxCoeff(), 0.02);
}

TEST(GenerateSample, UnitVarianceForEveryMixingWeight) {
  for (double w : {1.0, 0.75, 0.5, 0.25, 0.1}) {
    const auto x = generate_sample(paper_spec(w, 30000), 8);
    for (Eigen::Index j = 0; j < x.values.rows(); ++j) {
      const double mean = x.values.row(j).mean();
      const double var = (x.values.row(j).array() - mean).square().sum() / (x.values.cols() - 1);
      EXPECT_GE(var, 0.9) << "w_r2=" << w << " var " << j;
      EXPECT_LE(var, 1.1) << "w_r2=" << w << " var " << j;
    }
  }
}

TEST(CrossTerm, DegenerateCasesAreExactlyZero) {
  EXPECT_EQ(cross_term_mean(MatrixXd::Zero(4, 6), MatrixXd::Random(6, 4)), 0.0);
  EXPECT_EQ(cross_term_mean(MatrixXd::Random(4, 1), MatrixXd::Random(1, 4)), 0.0);
}

TEST(CrossTerm, ZeroInExpectation) {
  // Monte Carlo oracle: replicate means scatter around 0.
  const auto spec = paper_spec(0.5, 60);
  std::vector<double> means;
  for (std::uint64_t seed = 0; seed < 200; ++seed) means.push_back(cross_term_check(spec, seed));
  double m = 0.0;
  for (double v : means) m += v;
  m /= static_cast<double>(means.size());
  double ss = 0.0;
  for (double v : means) ss += (v - m) * (v - m);
  const double se = std::sqrt(ss / (means.size() - 1) / means.size());
  EXPECT_LT(std::abs(m), 4.0 * se);
}
