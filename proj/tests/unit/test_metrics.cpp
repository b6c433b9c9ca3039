#include <algorithm>
#include <cmath>

#include <gtest/gtest.h>

#include "ehjb/metrics.hpp"
#include "ehjb/objectives.hpp"
#include "generators.hpp"

using namespace ehjb;
using ehjb::testing::Gen;

TEST(RelL2, Examples) {
  EXPECT_EQ(rel_l2_error({1, 2, 3}, {1, 2, 3}), 0.0);
  EXPECT_DOUBLE_EQ(rel_l2_error({1, -2, 3}, {2, -4, 6}), 1.0);
  EXPECT_DOUBLE_EQ(rel_l2_error({3, 4}, {3, 0}), 0.8);
  EXPECT_THROW(rel_l2_error({0, 0}, {1, 1}), MetricError);
  EXPECT_THROW(rel_l2_error({1, 2}, {1}), ContractError);
}

TEST(RelL2, PermutationInvariant) {
  Gen gen(1);
  for (int trial = 0; trial < 200; ++trial) {
    const int n = gen.integer(1, 50);
    std::vector<double> a(n), b(n);
    for (int i = 0; i < n; ++i) {
      a[i] = gen.uniform(-5, 5);
      b[i] = gen.uniform(-5, 5);
    }
    std::vector<int> perm(n);
    for (int i = 0; i < n; ++i) perm[i] = i;
    for (int i = n - 1; i > 0; --i) std::swap(perm[i], perm[gen.integer(0, i)]);
    std::vector<double> pa(n), pb(n);
    for (int i = 0; i < n; ++i) {
      pa[i] = a[perm[i]];
      pb[i] = b[perm[i]];
    }
    EXPECT_NEAR(rel_l2_error(a, b), rel_l2_error(pa, pb), 1e-14);
    EXPECT_EQ(linf_error(a, b), linf_error(pa, pb));
  }
}

TEST(Linf, Examples) {
  EXPECT_EQ(linf_error({1, 2}, {1, 2}), 0.0);
  EXPECT_DOUBLE_EQ(linf_error({1, 2, 3}, {1, 2.3, 3}), 2.3 - 2);
}

TEST(Residual, ManufacturedClassicalJet) {
  // A problem whose H_lambda is the classical min is not expressible through
  // pde_residual; the classical residual helper is checked on the exact jet.
  const ManufacturedCosine m(2, 1.0, ControlSet{0.2, 1.0});
  const Problem p = m.problem(0.04);
  const Points pts = test_points(m.domain(), 500, 3);
  for (Eigen::Index i = 0; i < pts.cols(); ++i) {
    const Vec x = pts.col(i);
    EXPECT_LE(std::abs(pde_residual_classical(m.jet(x), x, p)), 1e-10);
  }
}

TEST(Residual, DeterministicAndFinite) {
  const ManufacturedCosine m(1, 1.0, ControlSet{0.2, 1.0});
  const Problem p = m.problem(0.08);
  const MlpParams net = init_network(4, {1, 8, 8, 1});
  const double a = residual_linf(net, p, test_points(p.domain, 256, 11));
  const double b = residual_linf(net, p, test_points(p.domain, 256, 11));
  EXPECT_EQ(a, b);
  EXPECT_TRUE(std::isfinite(a));
  // Max over points equals the max of per-point residuals.
  const Points pts = test_points(p.domain, 256, 11);
  double worst = 0.0;
  for (Eigen::Index i = 0; i < pts.cols(); ++i) {
    const Vec x = pts.col(i);
    worst = std::max(worst, std::abs(pde_residual(forward_jet(net, x), x, p)));
  }
  EXPECT_NEAR(a, worst, 1e-12 * (1 + worst));
}

TEST(TestPoints, InsideAndSeeded) {
  const Box box{{-1.0, 2.0}, {0.5, 7.0}};
  const Points a = test_points(box, 1000, 5);
  EXPECT_EQ(a, test_points(box, 1000, 5));
  EXPECT_NE(a, test_points(box, 1000, 6));
  for (Eigen::Index i = 0; i < a.cols(); ++i) EXPECT_TRUE(box.contains(a.col(i)));
  EXPECT_THROW(test_points(box, 0, 5), ConfigError);
}

TEST(LaplacianReport, ExactNetworkLaplacianGivesZeroError) {
  const ManufacturedCosine m(1, 1.0, ControlSet{0.2, 1.0});
  const Problem p = m.problem(0.16);
  const MlpParams net = init_network(8, {1, 6, 1});
  const ErrorReport r = laplacian_report(
      net, p, [&](const Vec& x) { return forward_jet(net, x).laplacian(); }, 300, 21);
  EXPECT_NEAR(r.e_l2_rel, 0.0, 1e-14);
  EXPECT_NEAR(r.e_linf, 0.0, 1e-14);
  EXPECT_EQ(r.n_test, 300);
  EXPECT_EQ(r.seed, 21u);
  EXPECT_DOUBLE_EQ(r.lambda, 0.16);
  EXPECT_EQ(ErrorReport::csv_header(), "lambda,e_l2_rel,e_linf,residual_eps,n_test,seed\n");
  EXPECT_EQ(r.csv_row().substr(0, 5), "0.16,");
}

TEST(Ratios, Examples) {
  EXPECT_EQ(ratio_table({4, 2, 1}), (std::vector<double>{2, 2}));
  for (double r : ratio_table({0.3, 0.3, 0.3, 0.3})) EXPECT_EQ(r, 1.0);
  const auto t = ratio_table({0.304, 0.265, 0.208, 0.149, 0.124});
  const std::vector<double> expected{1.145, 1.277, 1.398, 1.195};
  ASSERT_EQ(t.size(), expected.size());
  // The printed ratios come from unrounded errors; the last one (1.195) is off
  // the rounded-table quotient 1.2016 but inside its +-0.0005 rounding band.
  for (std::size_t k = 0; k + 1 < t.size(); ++k) EXPECT_NEAR(t[k], expected[k], 5e-3);
  const std::vector<double> table{0.304, 0.265, 0.208, 0.149, 0.124};
  for (std::size_t k = 0; k < t.size(); ++k) {
    const auto lo = ratio_table({table[k] - 5e-4, table[k + 1] + 5e-4});
    const auto hi = ratio_table({table[k] + 5e-4, table[k + 1] - 5e-4});
    EXPECT_GE(expected[k], lo[0]);
    EXPECT_LE(expected[k], hi[0]);
  }
  EXPECT_THROW(ratio_table({1, 0}), MetricError);
}

namespace {

TrajectoryLog frozen_log(const std::vector<Vec>& points, int horizon, const Benchmark& b) {
  TrajectoryLog log;
  log.n_traj = static_cast<int>(points.size());
  log.horizon = horizon;
  log.dim = b.dim();
  for (const Vec& x : points) {
    for (int k = 0; k <= horizon; ++k) {
      log.states.insert(log.states.end(), x.data(), x.data() + x.size());
      log.objectives.push_back(b.evaluate(x));
    }
    log.best_step.push_back(0);
  }
  return log;
}

}  // namespace

TEST(TrajectoryStats, FrozenAtMinimizer) {
  const Benchmark b = easom_2d();
  const TrajectoryLog log = frozen_log({b.minimizers[0], b.minimizers[0]}, 5, b);
  const TrajectoryStats s = trajectory_stats(log, b.minimizers);
  ASSERT_EQ(s.err.size(), 6u);
  for (int k = 0; k <= 5; ++k) {
    EXPECT_EQ(s.err[k], 0.0);
    EXPECT_EQ(s.f_hat[k], b.evaluate(b.minimizers[0]));
  }
}

TEST(TrajectoryStats, MeanDistance) {
  const Benchmark b = double_well_1d();
  const TrajectoryLog log = frozen_log({Vec::Constant(1, 5.0), Vec::Constant(1, 1.0)}, 3, b);
  const TrajectoryStats s = trajectory_stats(log, b.minimizers);
  for (double e : s.err) EXPECT_DOUBLE_EQ(e, 2.0);
  EXPECT_EQ(s.to_csv().substr(0, s.to_csv().find('\n')), "k,f_hat,err_mean");
}

TEST(TrajectoryStats, NonNegativeAndZeroOnlyAtMinimizers) {
  Gen gen(9);
  const Benchmark b = gaussian_mixture_2d();
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<Vec> pts;
    const int n = gen.integer(1, 5);
    bool all_on = true;
    for (int j = 0; j < n; ++j) {
      if (gen.integer(0, 1)) {
        pts.push_back(b.minimizers[0]);
      } else {
        pts.push_back(gen.vector(2, -1, 5));
        all_on = false;
      }
    }
    const TrajectoryStats s = trajectory_stats(frozen_log(pts, 1, b), b.minimizers);
    EXPECT_GE(s.err[0], 0.0);
    EXPECT_EQ(s.err[0] == 0.0, all_on);
  }
}
