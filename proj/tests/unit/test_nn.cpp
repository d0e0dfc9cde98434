#include <cmath>
#include <cstdio>
#include <random>

#include "doctest.h"
#include "remsched/nn.hpp"

using namespace remsched;

namespace {

using DMlp = MlpT<double>;
using DMatrix = DMlp::Matrix;

// Central finite differences of a scalar loss over every network parameter.
template <typename LossFn>
double max_rel_grad_error(DMlp& net, const LossFn& loss, const DMlp::Gradients& analytic,
                          double h = 1e-5) {
  double worst = 0;
  auto probe = [&](double& param, double analytic_g) {
    const double keep = param;
    param = keep + h;
    const double up = loss();
    param = keep - h;
    const double down = loss();
    param = keep;
    const double fd = (up - down) / (2 * h);
    const double denom = std::max({std::abs(fd), std::abs(analytic_g), 1e-8});
    worst = std::max(worst, std::abs(fd - analytic_g) / denom);
  };
  for (size_t l = 0; l < net.layers.size(); ++l) {
    auto& layer = net.layers[l];
    for (Eigen::Index r = 0; r < layer.w.rows(); ++r)
      for (Eigen::Index c = 0; c < layer.w.cols(); ++c)
        probe(layer.w(r, c), analytic.g[l].w(r, c));
    for (Eigen::Index r = 0; r < layer.b.size(); ++r)
      probe(layer.b(r), analytic.g[l].b(r));
  }
  return worst;
}

double gradcheck_architecture(const std::vector<int>& dims, DMlp::Output out, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  DMlp net = DMlp::random(dims, out, rng);
  const int B = 5;
  DMatrix x(dims.front(), B), target(dims.back(), B);
  std::uniform_real_distribution<double> u(-1.5, 1.5);
  for (Eigen::Index i = 0; i < x.size(); ++i) x.data()[i] = u(rng);
  for (Eigen::Index i = 0; i < target.size(); ++i) target.data()[i] = u(rng);

  const auto loss = [&]() {
    const DMatrix y = net.forward(x);
    return ((y - target).array() * (y - target).array()).sum();
  };
  DMlp::Cache cache;
  const DMatrix y = net.forward(x, &cache);
  const DMatrix dLdY = 2.0 * (y - target);
  const auto grads = net.backward(cache, dLdY);
  return max_rel_grad_error(net, loss, grads);
}

}  // namespace

TEST_CASE("a zero-weight network outputs its biases") {
  Mlp net;
  Mlp::Layer l;
  l.w = Mlp::Matrix::Zero(3, 2);
  l.b = Mlp::Vector(3);
  l.b << 1.0f, -1.0f, 0.25f;
  net.layers.push_back(l);

  Eigen::MatrixXf x = Eigen::MatrixXf::Random(2, 4);
  const Eigen::MatrixXf y = net.forward(x);
  for (int c = 0; c < 4; ++c)
    for (int r = 0; r < 3; ++r) CHECK(y(r, c) == doctest::Approx(l.b(r)));
}

TEST_CASE("a single linear layer computes wx+b with gradient x") {
  Mlp net;
  Mlp::Layer l;
  l.w = Mlp::Matrix(1, 1);
  l.w << 3.0f;
  l.b = Mlp::Vector(1);
  l.b << 0.5f;
  net.layers.push_back(l);

  Eigen::MatrixXf x(1, 1);
  x << 2.0f;
  Mlp::Cache cache;
  const Eigen::MatrixXf y = net.forward(x, &cache);
  CHECK(y(0, 0) == doctest::Approx(6.5f));

  Eigen::MatrixXf up(1, 1);
  up << 1.0f;
  const auto grads = net.backward(cache, up);
  CHECK(grads.g[0].w(0, 0) == doctest::Approx(2.0f));  // dy/dw = x
  CHECK(grads.g[0].b(0) == doctest::Approx(1.0f));
}

TEST_CASE("analytic gradients match central finite differences") {
  CHECK(gradcheck_architecture({3, 16, 16, 4}, DMlp::Output::linear, 1) < 1e-4);
  CHECK(gradcheck_architecture({3, 16, 16, 2}, DMlp::Output::tanh, 2) < 1e-4);
  CHECK(gradcheck_architecture({5, 32, 1}, DMlp::Output::linear, 3) < 1e-4);
}

TEST_CASE("backward can chain the loss into the network inputs") {
  std::mt19937_64 rng(9);
  DMlp net = DMlp::random({3, 8, 2}, DMlp::Output::linear, rng);
  DMatrix x(3, 1);
  x << 0.3, -0.2, 0.9;
  DMlp::Cache cache;
  const DMatrix y = net.forward(x, &cache);
  DMatrix up = DMatrix::Ones(2, 1);
  DMatrix dx;
  net.backward(cache, up, &dx);

  const double h = 1e-6;
  for (int i = 0; i < 3; ++i) {
    DMatrix xp = x, xm = x;
    xp(i, 0) += h;
    xm(i, 0) -= h;
    const double fd = (net.forward(xp).sum() - net.forward(xm).sum()) / (2 * h);
    CHECK(dx(i, 0) == doctest::Approx(fd).epsilon(1e-5));
  }
}

TEST_CASE("adam leaves parameters alone on zero gradients") {
  std::mt19937_64 rng(4);
  DMlp net = DMlp::random({2, 4, 1}, DMlp::Output::linear, rng);
  const DMlp snapshot = net;
  AdamT<double> opt(net);
  auto zeros = DMlp::Gradients::zeros_like(net);
  for (int i = 0; i < 5; ++i) opt.step(net, zeros, 0.01);
  for (size_t l = 0; l < net.layers.size(); ++l)
    CHECK((net.layers[l].w - snapshot.layers[l].w).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("the first adam step from zero moments matches hand arithmetic") {
  DMlp net;
  DMlp::Layer l;
  l.w = DMlp::Matrix::Zero(1, 1);
  l.b = DMlp::Vector::Zero(1);
  net.layers.push_back(l);
  AdamT<double> opt(net);

  DMlp::Gradients g = DMlp::Gradients::zeros_like(net);
  const double grad = 3.0, lr = 0.1;
  g.g[0].w(0, 0) = grad;
  opt.step(net, g, lr);
  // bias correction cancels at t=1: delta = -lr * g / (|g| + eps)
  CHECK(net.layers[0].w(0, 0) == doctest::Approx(-lr * grad / (std::abs(grad) + 1e-8)));
}

TEST_CASE("adam steps stay bounded by the learning rate under constant gradients") {
  DMlp net;
  DMlp::Layer l;
  l.w = DMlp::Matrix::Zero(1, 1);
  l.b = DMlp::Vector::Zero(1);
  net.layers.push_back(l);
  AdamT<double> opt(net);
  DMlp::Gradients g = DMlp::Gradients::zeros_like(net);
  g.g[0].w(0, 0) = 0.37;
  const double lr = 0.05;
  double prev = 0;
  for (int t = 0; t < 200; ++t) {
    opt.step(net, g, lr);
    const double now = net.layers[0].w(0, 0);
    CHECK(std::abs(now - prev) <= lr * 1.000001);
    prev = now;
  }
}

TEST_CASE("target synchronization modes") {
  std::mt19937_64 rng(5);
  Mlp online = Mlp::random({2, 3, 1}, Mlp::Output::linear, rng);
  Mlp target = Mlp::random({2, 3, 1}, Mlp::Output::linear, rng);

  Mlp soft_one = target;
  sync_target(soft_one, online, SyncMode::soft, 1.0f);
  Mlp hard = target;
  sync_target(hard, online, SyncMode::hard);
  for (size_t l = 0; l < online.layers.size(); ++l)
    CHECK((soft_one.layers[l].w - hard.layers[l].w).cwiseAbs().maxCoeff() == 0.0f);

  Mlp frozen = target;
  sync_target(frozen, online, SyncMode::soft, 0.0f);
  for (size_t l = 0; l < online.layers.size(); ++l)
    CHECK((frozen.layers[l].w - target.layers[l].w).cwiseAbs().maxCoeff() == 0.0f);

  Mlp blend;
  Mlp::Layer bl;
  bl.w = Mlp::Matrix::Zero(1, 1);
  bl.b = Mlp::Vector::Zero(1);
  blend.layers.push_back(bl);
  Mlp one = blend;
  one.layers[0].w(0, 0) = 1.0f;
  sync_target(blend, one, SyncMode::soft, 0.005f);
  CHECK(blend.layers[0].w(0, 0) == doctest::Approx(0.005f));

  Mlp mismatched = Mlp::random({3, 3, 1}, Mlp::Output::linear, rng);
  CHECK_THROWS_AS(sync_target(mismatched, online, SyncMode::hard), ValidationError);
}

TEST_CASE("replay evicts the oldest entries and samples distinct indices") {
  ReplayBuffer<int> buffer(5);
  for (int i = 0; i < 8; ++i) buffer.push(i);
  CHECK(buffer.size() == 5);
  std::vector<int> contents;
  for (size_t i = 0; i < buffer.size(); ++i) contents.push_back(buffer[i]);
  std::sort(contents.begin(), contents.end());
  CHECK(contents == std::vector<int>{3, 4, 5, 6, 7});

  std::mt19937_64 rng(6);
  for (int trial = 0; trial < 50; ++trial) {
    const auto picks = buffer.sample_indices(4, rng);
    CHECK(picks.size() == 4);
    auto sorted = picks;
    std::sort(sorted.begin(), sorted.end());
    CHECK(std::adjacent_find(sorted.begin(), sorted.end()) == sorted.end());
    for (const auto p : picks) CHECK(p < buffer.size());
  }
  CHECK_THROWS_AS(buffer.sample_indices(6, rng), ValidationError);
}

TEST_CASE("checkpoints round-trip through the flat binary format") {
  std::mt19937_64 rng(7);
  Mlp net = Mlp::random({4, 16, 3}, Mlp::Output::tanh, rng);
  const std::string path = "nn_roundtrip.bin";
  save_mlp(net, path);
  const Mlp loaded = load_mlp(path);
  CHECK(loaded.output == net.output);
  REQUIRE(loaded.layers.size() == net.layers.size());

  Eigen::MatrixXf x = Eigen::MatrixXf::Random(4, 6);
  CHECK((net.forward(x) - loaded.forward(x)).cwiseAbs().maxCoeff() == 0.0f);
  std::remove(path.c_str());
}

TEST_CASE("network initialization is deterministic per seed") {
  std::mt19937_64 a(42), b(42), c(43);
  const Mlp na = Mlp::random({3, 8, 2}, Mlp::Output::linear, a);
  const Mlp nb = Mlp::random({3, 8, 2}, Mlp::Output::linear, b);
  const Mlp nc = Mlp::random({3, 8, 2}, Mlp::Output::linear, c);
  CHECK((na.layers[0].w - nb.layers[0].w).cwiseAbs().maxCoeff() == 0.0f);
  CHECK((na.layers[0].w - nc.layers[0].w).cwiseAbs().maxCoeff() > 0.0f);
}
