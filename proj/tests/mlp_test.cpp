#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <cmath>
#include <set>
#include <vector>

#include "doctest.h"
#include "test_util.hpp"
#include "unotb/adam.hpp"
#include "unotb/error.hpp"
#include "unotb/mlp.hpp"

using namespace unotb;
using testutil::fd_grad;
using testutil::random_matrix;
using testutil::rel_err;

TEST_CASE("single linear layer is exact") {
  Rng rng(31);
  Mlp net = Mlp::create({1, 1}, rng);
  net.weights[0][0] = 2.0;
  net.biases[0][0] = 1.0;
  const Tensor y = net.eval(Tensor::matrix(1, 1, std::vector<double>{3.0}));
  CHECK(y[0] == 7.0);
}

TEST_CASE("hidden relu clips negative pre-activations") {
  Rng rng(32);
  Mlp net = Mlp::create({1, 1, 1}, rng);
  net.weights[0][0] = 1.0;
  net.biases[0][0] = 0.0;
  net.weights[1][0] = 1.0;
  net.biases[1][0] = 0.5;
  CHECK(net.eval(Tensor::matrix(1, 1, std::vector<double>{2.0}))[0] == 2.5);
  CHECK(net.eval(Tensor::matrix(1, 1, std::vector<double>{-2.0}))[0] == 0.5);
}

TEST_CASE("zero weights leave only the bias") {
  Rng rng(33);
  Mlp net = Mlp::create({3, 8, 2}, rng);
  for (Tensor& w : net.weights) w.fill(0.0);
  net.biases[1][0] = -1.25;
  net.biases[1][1] = 4.0;
  const Tensor y = net.eval(random_matrix(5, 3, rng));
  for (int64_t i = 0; i < 5; ++i) {
    CHECK(y.at(i, 0) == -1.25);
    CHECK(y.at(i, 1) == 4.0);
  }
}

TEST_CASE("glorot init stays inside its bound with zero biases") {
  Rng rng(34);
  Mlp net = Mlp::create({64, 128, 10}, rng);
  for (size_t l = 0; l < net.weights.size(); ++l) {
    const double limit =
        std::sqrt(6.0 / static_cast<double>(net.widths[l] + net.widths[l + 1]));
    double hi = 0.0;
    for (int64_t i = 0; i < net.weights[l].size(); ++i)
      hi = std::max(hi, std::abs(net.weights[l][i]));
    CHECK(hi <= limit);
    CHECK(hi > 0.5 * limit);  // actually spread out, not collapsed near zero
    for (int64_t i = 0; i < net.biases[l].size(); ++i)
      CHECK(net.biases[l][i] == 0.0);
  }
}

TEST_CASE("backprop through the full net matches finite differences") {
  Rng rng(35);
  Mlp net = Mlp::create({4, 16, 16, 3}, rng);
  Tensor x = random_matrix(7, 4, rng);

  const auto loss_value = [&] {
    Tape tape;
    const int out = net.on_tape(tape, tape.leaf(&x, false), true);
    return tape.value(tape.mean_all(out))[0];
  };

  Tape tape;
  const int out = net.on_tape(tape, tape.leaf(&x, false), true);
  tape.backward(tape.mean_all(out));

  Rng pick(36);
  for (int check = 0; check < 40; ++check) {
    const size_t l = pick.below(net.weights.size());
    Tensor& p = pick.uniform() < 0.8 ? net.weights[l] : net.biases[l];
    const int64_t idx = static_cast<int64_t>(pick.below(
        static_cast<uint64_t>(p.size())));
    const double ad = tape.grad(tape.leaf(&p, true))[idx];
    const double fd = fd_grad(p, idx, loss_value);
    CHECK(rel_err(ad, fd) < 1e-6);
  }
}

TEST_CASE("widths validation") {
  Rng rng(37);
  CHECK_THROWS_AS(Mlp::create({3}, rng), ConfigError);
  CHECK_THROWS_AS(Mlp::create({3, 0, 1}, rng), ConfigError);
}

TEST_CASE("input width mismatch is rejected") {
  Rng rng(38);
  Mlp net = Mlp::create({3, 4, 1}, rng);
  CHECK_THROWS_AS(net.eval(Tensor::full({2, 5}, 1.0)), NumericError);
}

TEST_CASE("collect_params enumerates every tensor once with stable names") {
  Rng rng(39);
  Mlp net = Mlp::create({2, 8, 8, 1}, rng);
  std::vector<Tensor*> params;
  std::vector<std::string> names;
  net.collect_params("g1", params, names);
  CHECK(params.size() == 6);
  CHECK(names[0] == "g1/w0");
  CHECK(names[1] == "g1/b0");
  CHECK(names[5] == "g1/b2");
  std::set<Tensor*> unique(params.begin(), params.end());
  CHECK(unique.size() == params.size());
}

TEST_CASE("adam first step with momentum off moves by about lr") {
  Tensor p = Tensor::scalar(5.0);
  Adam opt({1e-3, 0.0, 0.9, 1e-8}, {&p}, {"p"});
  std::vector<Tensor> grads;
  grads.push_back(Tensor::scalar(3.7));
  opt.step(grads);
  // beta1 = 0 makes mhat = g; first-step vhat = g^2, so the update is
  // lr * g/(|g| + eps) = lr up to eps.
  CHECK(std::abs((5.0 - p[0]) - 1e-3) < 1e-9);
  grads[0][0] = -3.7;
  opt.step(grads);
  opt.step(grads);
  CHECK(p[0] > 5.0 - 1e-3);
}

TEST_CASE("adam zero gradient leaves parameters in place") {
  Tensor p = Tensor::scalar(2.0);
  Adam opt({1e-3, 0.0, 0.9, 1e-8}, {&p}, {"p"});
  std::vector<Tensor> grads;
  grads.push_back(Tensor::scalar(0.0));
  opt.step(grads);
  CHECK(p[0] == 2.0);
}

TEST_CASE("adam rejects non-finite gradients with the parameter name") {
  Tensor p = Tensor::scalar(0.0);
  Adam opt({1e-3, 0.0, 0.9, 1e-8}, {&p}, {"g2/w1"});
  std::vector<Tensor> grads;
  grads.push_back(Tensor::scalar(std::nan("")));
  try {
    opt.step(grads);
    FAIL("expected NumericError");
  } catch (const NumericError& e) {
    CHECK(std::string(e.what()).find("g2/w1") != std::string::npos);
  }
}

TEST_CASE("global norm clipping") {
  std::vector<Tensor> grads;
  grads.push_back(Tensor::matrix(1, 2, std::vector<double>{3.0, 0.0}));
  grads.push_back(Tensor::matrix(1, 1, std::vector<double>{4.0}));
  const double norm = clip_global_norm(grads, 2.5);
  CHECK(norm == doctest::Approx(5.0));
  double after = std::sqrt(grads[0][0] * grads[0][0] +
                           grads[1][0] * grads[1][0]);
  CHECK(after == doctest::Approx(2.5).epsilon(1e-12));

  std::vector<Tensor> small;
  small.push_back(Tensor::scalar(0.5));
  clip_global_norm(small, 2.5);
  CHECK(small[0][0] == 0.5);  // under the limit: untouched
}
