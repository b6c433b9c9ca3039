#include <algorithm>
#include <cmath>

#include <gtest/gtest.h>

#include "ehjb/objectives.hpp"
#include "ehjb/pinn_solver.hpp"
#include "generators.hpp"

using namespace ehjb;
using ehjb::testing::Gen;

namespace {

// Problem whose exact solution is the given network: the source is built from
// the network's own jet, so every interior residual vanishes up to rounding.
Problem network_manufactured(const MlpParams& net, double lambda) {
  Problem p;
  const int d = net.input_dim();
  p.domain = Box::cube(d, -1.0, 1.0);
  p.rho = 0.7;
  p.lambda = lambda;
  p.control = ControlSet{0.2, 1.0};
  p.transport = false;
  p.objective.value = [](const Vec&) { return 0.0; };
  p.objective.gradient = [d](const Vec&) { return Vec::Zero(d); };
  p.source = [net, p](const Vec& x) {
    const EvalJet jet = forward_jet(net, x);
    return p.rho * jet.value - log_partition(jet.laplacian(), p.lambda, p.control);
  };
  return p;
}

TrainConfig small_config() {
  TrainConfig c;
  c.n_interior = 40;
  c.n_boundary = 12;
  c.iterations = 6;
  c.chunk_size = 16;
  c.hidden_width = 6;
  c.hidden_layers = 2;
  c.log_every = 2;
  c.seed = 17;
  return c;
}

}  // namespace

TEST(SampleInterior, OpenBoxAndUniformMean) {
  Rng rng(1);
  const Box box = Box::cube(2, 0.0, 1.0);
  const int n = 1000;
  const Points pts = sample_interior(box, n, rng);
  ASSERT_EQ(pts.cols(), n);
  EXPECT_GT(pts.minCoeff(), 0.0);
  EXPECT_LT(pts.maxCoeff(), 1.0);
  for (int i = 0; i < 2; ++i) EXPECT_NEAR(pts.row(i).mean(), 0.5, 4.0 / std::sqrt(n));
  Rng again(1);
  EXPECT_EQ(sample_interior(box, n, again), pts);
  Rng r2(2);
  EXPECT_THROW(sample_interior(Box{{0.0}, {0.0}}, 3, r2), ConfigError);
}

TEST(SampleBoundary, FacesByMeasure) {
  Rng rng(3);
  const int n = 10000;
  const BoundaryBatch square = sample_boundary(Box::cube(2, 0.0, 1.0), n, rng);
  std::array<int, 4> counts{};
  for (int j = 0; j < n; ++j) {
    const Vec nrm = square.normals.col(j);
    const int axis = nrm[0] != 0.0 ? 0 : 1;
    counts[2 * axis + (nrm[axis] > 0 ? 1 : 0)]++;
  }
  for (int c : counts) EXPECT_NEAR(c / double(n), 0.25, 0.05);

  // A 1 x 4 box: the faces normal to x have measure 4, those normal to y 1.
  const Box wide{{0.0, 0.0}, {1.0, 4.0}};
  const BoundaryBatch b = sample_boundary(wide, n, rng);
  int x_faces = 0;
  for (int j = 0; j < n; ++j) x_faces += b.normals(0, j) != 0.0;
  EXPECT_NEAR(x_faces / double(n), 0.8, 0.02);
}

TEST(SampleBoundary, NormalsAndPinnedCoordinates) {
  Gen gen(4);
  for (int trial = 0; trial < 20; ++trial) {
    const int d = gen.integer(1, 5);
    const Box box = gen.box(d);
    Rng rng(gen.seed());
    const BoundaryBatch b = sample_boundary(box, 200, rng);
    for (int j = 0; j < b.size(); ++j) {
      int nonzero = 0, axis = -1;
      for (int i = 0; i < d; ++i) {
        if (b.normals(i, j) != 0.0) {
          ++nonzero;
          axis = i;
          EXPECT_EQ(std::abs(b.normals(i, j)), 1.0);
        }
      }
      ASSERT_EQ(nonzero, 1);
      const double face = b.normals(axis, j) > 0 ? box.upper[axis] : box.lower[axis];
      EXPECT_EQ(b.points(axis, j), face);
      int pinned = 0;
      for (int i = 0; i < d; ++i)
        pinned += b.points(i, j) == box.lower[i] || b.points(i, j) == box.upper[i];
      EXPECT_EQ(pinned, 1);
    }
  }
}

TEST(Loss, ExactNetworkHasNoInteriorResidual) {
  Gen gen(5);
  for (int trial = 0; trial < 10; ++trial) {
    const MlpParams net = gen.small_net(2, 6, 2);
    const Problem p = network_manufactured(net, gen.log_uniform(0.01, 0.5));
    Rng rng(gen.seed());
    const Points interior = sample_interior(p.domain, 64, rng);
    const BoundaryBatch boundary = sample_boundary(p.domain, 8, rng);
    Tape tape;
    const LossTerms terms = loss(net, p, interior, boundary, small_config(), tape);
    EXPECT_LE(terms.pde, 1e-16);
  }
}

TEST(Loss, WeightsAndSign) {
  Gen gen(6);
  const ManufacturedCosine m(2, 1.0, ControlSet{0.2, 1.0});
  for (int trial = 0; trial < 20; ++trial) {
    const MlpParams net = init_network(gen.seed(), {2, 5, 5, 1});
    const Problem p = m.problem(0.1);
    Rng rng(gen.seed());
    const Points interior = sample_interior(p.domain, 32, rng);
    const BoundaryBatch boundary = sample_boundary(p.domain, 8, rng);
    TrainConfig c = small_config();
    Tape tape;
    const LossTerms full = loss(net, p, interior, boundary, c, tape);
    EXPECT_GE(full.total, 0.0);
    EXPECT_NEAR(full.total, c.alpha_res * full.pde + c.alpha_bnd * full.bnd, 1e-12 * full.total);
    c.alpha_res = 0.0;
    const LossTerms bnd_only = loss(net, p, interior, boundary, c, tape);
    EXPECT_DOUBLE_EQ(bnd_only.total, c.alpha_bnd * bnd_only.bnd);
    EXPECT_DOUBLE_EQ(bnd_only.bnd, full.bnd);
  }
}

TEST(Loss, ChunkedGradientMatchesSingleTape) {
  Gen gen(7);
  const ManufacturedCosine m(1, 1.0, ControlSet{0.2, 1.0});
  const Problem p = m.problem(0.05);
  const MlpParams net = init_network(gen.seed(), {1, 7, 7, 1});
  Rng rng(gen.seed());
  const Points interior = sample_interior(p.domain, 100, rng);
  const BoundaryBatch boundary = sample_boundary(p.domain, 10, rng);
  TrainConfig c = small_config();
  Tape tape;
  const LossTerms whole = loss(net, p, interior, boundary, c, tape);
  const ParamGrad g = backward(tape);
  for (int chunk : {1, 7, 32, 1000}) {
    c.chunk_size = chunk;
    const LossGradient lg = loss_and_gradient(net, p, interior, boundary, c);
    EXPECT_NEAR(lg.terms.total, whole.total, 1e-12 * whole.total);
    for (std::size_t l = 0; l < g.weights.size(); ++l) {
      EXPECT_LE((lg.gradient.weights[l] - g.weights[l]).lpNorm<Eigen::Infinity>(),
                1e-12 * (1 + g.weights[l].lpNorm<Eigen::Infinity>()));
      EXPECT_LE((lg.gradient.biases[l] - g.biases[l]).lpNorm<Eigen::Infinity>(),
                1e-12 * (1 + g.biases[l].lpNorm<Eigen::Infinity>()));
    }
  }
}

TEST(Loss, WorkerCountDoesNotChangeBits) {
  const ManufacturedCosine m(2, 1.0, ControlSet{0.2, 1.0});
  const Problem p = m.problem(0.05);
  const MlpParams net = init_network(3, {2, 8, 8, 1});
  Rng rng(9);
  const Points interior = sample_interior(p.domain, 300, rng);
  const BoundaryBatch boundary = sample_boundary(p.domain, 30, rng);
  TrainConfig c = small_config();
  c.chunk_size = 50;
  c.workers = 1;
  const LossGradient a = loss_and_gradient(net, p, interior, boundary, c);
  c.workers = 3;
  const LossGradient b = loss_and_gradient(net, p, interior, boundary, c);
  EXPECT_EQ(a.terms.total, b.terms.total);
  for (std::size_t l = 0; l < a.gradient.weights.size(); ++l) {
    EXPECT_EQ(a.gradient.weights[l], b.gradient.weights[l]);
    EXPECT_EQ(a.gradient.biases[l], b.gradient.biases[l]);
  }
}

TEST(Loss, NonFiniteResidualCarriesPoint) {
  const ManufacturedCosine m(1, 1.0, ControlSet{0.2, 1.0});
  Problem p = m.problem(0.05);
  p.source = [](const Vec& x) { return x[0] > 0 ? NAN : 0.0; };
  const MlpParams net = init_network(3, {1, 4, 1});
  Rng rng(1);
  const Points interior = sample_interior(p.domain, 20, rng);
  const BoundaryBatch boundary = sample_boundary(p.domain, 4, rng);
  Tape tape;
  try {
    loss(net, p, interior, boundary, small_config(), tape);
    FAIL();
  } catch (const NumericalError& e) {
    ASSERT_EQ(e.point().size(), 1u);
    EXPECT_GT(e.point()[0], 0.0);
  }
}

TEST(Lion, PositiveGradientMovesEveryParameterByLr) {
  const MlpParams start = init_network(1, {2, 3, 1});
  MlpParams params = start;
  ParamGrad g = ParamGrad::zeros_like(params);
  for (auto& w : g.weights) w.setConstant(0.7);
  for (auto& b : g.biases) b.setConstant(1e-9);
  ParamGrad m = ParamGrad::zeros_like(params);
  TrainConfig c;
  lion_step(params, g, m, 0.01, c);
  for (std::size_t l = 0; l < params.weights.size(); ++l) {
    EXPECT_EQ(params.weights[l], (start.weights[l].array() - 0.01).matrix());
    EXPECT_EQ(params.biases[l], (start.biases[l].array() - 0.01).matrix());
  }
}

TEST(Lion, ZeroGradientIsNoOp) {
  const MlpParams start = init_network(2, {2, 3, 1});
  MlpParams params = start;
  ParamGrad g = ParamGrad::zeros_like(params), m = ParamGrad::zeros_like(params);
  lion_step(params, g, m, 0.5, TrainConfig{});
  EXPECT_EQ(params.weights, start.weights);
  EXPECT_EQ(params.biases, start.biases);
}

TEST(Lion, TwoStepMomentumRecursion) {
  MlpParams params = init_network(3, {1, 1});
  params.weights[0](0, 0) = 0.25;
  params.biases[0](0) = -0.5;
  ParamGrad g = ParamGrad::zeros_like(params), m = ParamGrad::zeros_like(params);
  g.weights[0](0, 0) = 2.0;
  g.biases[0](0) = -3.0;
  TrainConfig c;
  c.weight_decay = 0.1;
  lion_step(params, g, m, 0.01, c);
  lion_step(params, g, m, 0.01, c);
  // m_2 = (1 - beta2) g (1 + beta2) = (1 - beta2^2) g.
  EXPECT_NEAR(m.weights[0](0, 0), (1 - 0.99 * 0.99) * 2.0, 1e-15);
  EXPECT_NEAR(m.biases[0](0), (1 - 0.99 * 0.99) * -3.0, 1e-15);
  // Decoupled decay: w <- w - lr (sign(c) + wd w), twice.
  double w = 0.25, b = -0.5;
  for (int k = 0; k < 2; ++k) {
    w -= 0.01 * (1.0 + 0.1 * w);
    b -= 0.01 * (-1.0 + 0.1 * b);
  }
  EXPECT_NEAR(params.weights[0](0, 0), w, 1e-15);
  EXPECT_NEAR(params.biases[0](0), b, 1e-15);
}

TEST(Lion, ShapeMismatch) {
  MlpParams params = init_network(3, {2, 3, 1});
  ParamGrad g = ParamGrad::zeros_like(init_network(3, {2, 4, 1}));
  ParamGrad m = ParamGrad::zeros_like(params);
  EXPECT_THROW(lion_step(params, g, m, 0.1, TrainConfig{}), ContractError);
}

TEST(Schedule, ConstantAndCosine) {
  TrainConfig c;
  c.iterations = 101;
  EXPECT_EQ(learning_rate_at(c, 50), c.learning_rate);
  c.schedule = LrSchedule::Cosine;
  EXPECT_DOUBLE_EQ(learning_rate_at(c, 0), 3e-4);
  EXPECT_NEAR(learning_rate_at(c, 100), 3e-5, 1e-18);
  EXPECT_NEAR(learning_rate_at(c, 50), 0.5 * (3e-4 + 3e-5), 1e-18);
  for (int t = 1; t <= 100; ++t) EXPECT_LE(learning_rate_at(c, t), learning_rate_at(c, t - 1));
}

TEST(TrainConfig, PresetsAndValidation) {
  const TrainConfig ci = train_preset("ci");
  EXPECT_EQ(ci.iterations, 5000);
  EXPECT_EQ(ci.n_interior, 2048);
  EXPECT_EQ(ci.hidden_width, 32);
  EXPECT_EQ(ci.hidden_layers, 5);
  const TrainConfig paper = train_preset("paper");
  EXPECT_EQ(paper.iterations, 20000);
  EXPECT_EQ(paper.n_interior, 16384);
  EXPECT_EQ(paper.hidden_width, 64);
  EXPECT_EQ(network_sizes(3, paper), (std::vector<int>{3, 64, 64, 64, 64, 64, 1}));
  EXPECT_THROW(train_preset("huge"), ConfigError);
  TrainConfig bad;
  bad.lion_beta1 = 1.0;
  EXPECT_THROW(bad.validate(), ConfigError);
  bad = {};
  bad.n_boundary = 0;
  EXPECT_THROW(bad.validate(), ConfigError);
}

TEST(Train, ZeroIterationsReturnsInput) {
  const ManufacturedCosine m(1, 1.0, ControlSet{0.2, 1.0});
  const MlpParams net = init_network(4, {1, 6, 6, 1});
  TrainConfig c = small_config();
  c.iterations = 0;
  const TrainResult r = train(m.problem(0.1), net, c);
  EXPECT_EQ(r.params.weights, net.weights);
  EXPECT_EQ(r.params.biases, net.biases);
  EXPECT_TRUE(r.log.rows.empty());
}

TEST(Train, DeterministicAndLogged) {
  const ManufacturedCosine m(2, 1.0, ControlSet{0.2, 1.0});
  const MlpParams net = init_network(4, network_sizes(2, small_config()));
  const TrainConfig c = small_config();
  const TrainResult a = train(m.problem(0.1), net, c);
  const TrainResult b = train(m.problem(0.1), net, c);
  EXPECT_EQ(a.params.weights, b.params.weights);
  EXPECT_EQ(a.log.to_csv(), b.log.to_csv());
  std::vector<int> iters;
  for (const auto& row : a.log.rows) iters.push_back(row.iter);
  EXPECT_EQ(iters, (std::vector<int>{0, 2, 4, 5}));
  EXPECT_EQ(a.log.to_csv().substr(0, a.log.to_csv().find('\n')), "iter,loss_total,loss_pde,loss_bnd,lr,seconds");
  TrainConfig threaded = c;
  threaded.workers = 3;
  EXPECT_EQ(train(m.problem(0.1), net, threaded).params.weights, a.params.weights);
}

TEST(Train, ShortRunReducesInteriorLoss) {
  const ManufacturedCosine m(1, 1.0, ControlSet{0.2, 1.0});
  TrainConfig c = train_preset("ci");
  c.iterations = 600;
  c.n_interior = 256;
  c.hidden_width = 16;
  c.hidden_layers = 3;
  c.learning_rate = 1e-3;
  c.schedule = LrSchedule::Cosine;
  c.log_every = 30;
  c.seed = 5;
  const TrainResult r = train(m.problem(0.32), init_network(2, network_sizes(1, c)), c);
  const auto& rows = r.log.rows;
  ASSERT_GE(rows.size(), 10u);
  EXPECT_LT(rows.back().loss_pde * 10.0, rows.front().loss_pde);
  std::vector<double> head, tail;
  for (std::size_t i = 0; i < 3; ++i) head.push_back(rows[i].loss_total);
  for (std::size_t i = rows.size() - 3; i < rows.size(); ++i) tail.push_back(rows[i].loss_total);
  std::sort(head.begin(), head.end());
  std::sort(tail.begin(), tail.end());
  EXPECT_LT(tail[1], head[1]);
}
