#include <gtest/gtest.h>

#include <random>

#include "../oracles/oracles.h"
#include "tripcast/error.h"
#include "tripcast/tripdist.h"

using namespace tripcast;

namespace {

struct Instance {
  Eigen::VectorXd p, a;
  Eigen::MatrixXd d;
};

Instance random_instance(std::mt19937_64& rng, int n) {
  std::uniform_real_distribution<double> up(1, 1000), ua(0.1, 10), ud(100, 50000);
  Instance x{Eigen::VectorXd(n), Eigen::VectorXd(n), Eigen::MatrixXd(n, n)};
  for (int i = 0; i < n; ++i) {
    x.p(i) = up(rng);
    x.a(i) = ua(rng);
    for (int j = 0; j < n; ++j) x.d(i, j) = ud(rng);
  }
  return x;
}

oracle::Matrix to_rows(const Eigen::MatrixXd& m) {
  oracle::Matrix r(m.rows(), std::vector<double>(m.cols()));
  for (Eigen::Index i = 0; i < m.rows(); ++i)
    for (Eigen::Index j = 0; j < m.cols(); ++j) r[i][j] = m(i, j);
  return r;
}

std::vector<double> to_vec(const Eigen::VectorXd& v) { return {v.data(), v.data() + v.size()}; }

}  // namespace

TEST(Gravity, SpotValue) {
  const auto n = gravity_distribute(Eigen::Vector3d(100, 0, 0), Eigen::Vector3d(2, 1, 1),
                                    Eigen::Matrix3d{{1, 2, 4}, {1, 1, 1}, {1, 1, 1}}, 1.0);
  EXPECT_NEAR(n(0, 0), 72.7273, 1e-3);
  EXPECT_NEAR(n(0, 1), 18.1818, 1e-3);
  EXPECT_NEAR(n(0, 2), 9.0909, 1e-3);
  EXPECT_EQ(n.row(1).sum(), 0.0);
}

TEST(Gravity, BetaZeroSplitsByAttraction) {
  const auto n = gravity_distribute(Eigen::Vector3d(100, 0, 0), Eigen::Vector3d(2, 1, 1),
                                    Eigen::Matrix3d{{1, 2, 4}, {1, 1, 1}, {1, 1, 1}}, 0.0);
  EXPECT_NEAR(n(0, 0), 50, 1e-12);
  EXPECT_NEAR(n(0, 1), 25, 1e-12);
  EXPECT_NEAR(n(0, 2), 25, 1e-12);
}

TEST(Gravity, SingleZone) {
  const auto n = gravity_distribute(Eigen::VectorXd::Constant(1, 42), Eigen::VectorXd::Constant(1, 3),
                                    Eigen::MatrixXd::Constant(1, 1, 7), 2.0);
  EXPECT_DOUBLE_EQ(n(0, 0), 42);
}

TEST(Gravity, InputChecks) {
  const Eigen::Vector2d p(1, 1);
  EXPECT_THROW(gravity_distribute(p, Eigen::Vector2d(-1, 1), Eigen::Matrix2d::Ones(), 1), std::invalid_argument);
  EXPECT_THROW(gravity_distribute(p, Eigen::Vector2d(1, 1), Eigen::Matrix2d::Zero(), 1), std::invalid_argument);
  EXPECT_THROW(gravity_distribute(p, Eigen::Vector3d(1, 1, 1), Eigen::Matrix2d::Ones(), 1), std::invalid_argument);
  EXPECT_THROW(gravity_distribute(p, Eigen::Vector2d(0, 0), Eigen::Matrix2d::Ones(), 1), DataError);
}

TEST(Gravity, MatchesLiteralFormula) {
  std::mt19937_64 rng(4);
  for (int trial = 0; trial < 20; ++trial) {
    const auto x = random_instance(rng, 12);
    const double beta = 0.3 * (trial % 8);
    const auto got = gravity_distribute(x.p, x.a, x.d, beta);
    const auto expect = oracle::gravity(to_vec(x.p), to_vec(x.a), to_rows(x.d), beta);
    for (int i = 0; i < 12; ++i)
      for (int j = 0; j < 12; ++j) EXPECT_NEAR(got(i, j), expect[i][j], 1e-10 * x.p(i));
  }
}

TEST(Gravity, ConservationScaleAndMonotonicity) {
  std::mt19937_64 rng(8);
  for (int trial = 0; trial < 30; ++trial) {
    const auto x = random_instance(rng, 20);
    const auto n = gravity_distribute(x.p, x.a, x.d, 1.3);
    for (int i = 0; i < 20; ++i) EXPECT_NEAR(n.row(i).sum(), x.p(i), 1e-9 * x.p(i));
    const auto scaled = gravity_distribute(x.p, 3.7 * x.a, 0.01 * x.d, 1.3);
    EXPECT_LT(((scaled - n).array().abs() / n.array()).maxCoeff(), 1e-12);
    // Higher cost to one destination lowers its share.
    auto d2 = x.d;
    d2(0, 5) *= 2;
    EXPECT_LT(gravity_distribute(x.p, x.a, d2, 1.3)(0, 5), n(0, 5));
    // Doubling production doubles every cell.
    EXPECT_LT(((gravity_distribute(2 * x.p, x.a, x.d, 1.3) - 2 * n).array().abs()).maxCoeff(),
              1e-9 * x.p.maxCoeff());
  }
}

TEST(Gravity, ExtremeCostsStayFinite) {
  const Eigen::Vector2d p(10, 10), a(1, 1);
  Eigen::Matrix2d d{{1, 1e300}, {1e-300, 1}};
  const auto n = gravity_distribute(p, a, d, 3.0);
  EXPECT_TRUE(n.allFinite());
  EXPECT_NEAR(n.row(0).sum(), 10, 1e-12);
}

TEST(Mse, Examples) {
  const Eigen::Matrix2d a{{1, 2}, {3, 4}};
  Eigen::Matrix2d b = a;
  EXPECT_EQ(distribution_mse(a, a), 0.0);
  b(1, 0) += 2;
  EXPECT_DOUBLE_EQ(distribution_mse(a, b), 1.0);
  const Eigen::MatrixXd x = Eigen::MatrixXd::Random(5, 5), y = Eigen::MatrixXd::Random(5, 5);
  EXPECT_NEAR(distribution_mse(x, y), oracle::mse(to_rows(x), to_rows(y)), 1e-14);
}

TEST(BetaGrid, DecimalSteps) {
  const auto g = beta_grid({});
  ASSERT_EQ(g.size(), 30u);
  EXPECT_EQ(g.front(), 0.1);
  EXPECT_EQ(g[14], 1.5);
  EXPECT_EQ(g.back(), 3.0);
}

TEST(Calibrate, ExactRecoveryAndExhaustiveMinimum) {
  std::mt19937_64 rng(15);
  const auto x = random_instance(rng, 25);
  const auto observed = gravity_distribute(x.p, x.a, x.d, 1.5);
  const auto g = calibrate_beta(x.p, x.a, x.d, observed, {}, 4);
  EXPECT_DOUBLE_EQ(g.beta, 1.5);
  EXPECT_TRUE(validate(g).ok());
  // Exhaustive check with the literal oracle.
  double best = 1e300, best_beta = -1;
  for (double b : beta_grid({})) {
    const double e = oracle::mse(oracle::gravity(to_vec(x.p), to_vec(x.a), to_rows(x.d), b), to_rows(observed));
    if (e < best) best = e, best_beta = b;
  }
  EXPECT_DOUBLE_EQ(best_beta, 1.5);
  EXPECT_LT(g.mse[14], 1e-18 * x.p.squaredNorm());
}

TEST(Calibrate, IncreasingCurvePicksRangeStart) {
  // Observed equals the beta = 0 prediction, so the error only grows.
  std::mt19937_64 rng(16);
  const auto x = random_instance(rng, 10);
  const auto observed = gravity_distribute(x.p, x.a, x.d, 0.0);
  const auto g = calibrate_beta(x.p, x.a, x.d, observed, {0.5, 2.0, 0.1});
  EXPECT_DOUBLE_EQ(g.beta, 0.5);
  for (std::size_t i = 1; i < g.mse.size(); ++i) EXPECT_GT(g.mse[i], g.mse[i - 1]);
}

TEST(Calibrate, WorkerCountDoesNotChangeResult) {
  std::mt19937_64 rng(17);
  const auto x = random_instance(rng, 15);
  const auto observed = gravity_distribute(x.p, x.a, x.d, 0.7);
  const auto a = calibrate_beta(x.p, x.a, x.d, observed, {}, 1);
  const auto b = calibrate_beta(x.p, x.a, x.d, observed, {}, 7);
  EXPECT_EQ(a.mse, b.mse);
}

TEST(GravityJson, RoundTrip) {
  std::mt19937_64 rng(18);
  const auto x = random_instance(rng, 6);
  auto g = calibrate_beta(x.p, x.a, x.d, gravity_distribute(x.p, x.a, x.d, 2.0));
  g.day_type = DayType::kWeekend;
  const auto back = gravity_from_json(gravity_to_json(g));
  EXPECT_EQ(back.beta, g.beta);
  EXPECT_EQ(back.grid, g.grid);
  EXPECT_EQ(back.mse, g.mse);
  EXPECT_EQ(back.day_type, DayType::kWeekend);
  EXPECT_EQ(back.aggregation, g.aggregation);
}
