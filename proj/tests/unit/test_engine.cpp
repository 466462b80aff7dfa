#include <doctest.h>

#include <cmath>
#include <limits>
#include <numbers>

#include "support/gradcheck.hpp"
#include "tskip/error.hpp"
#include "tskip/ops.hpp"
#include "tskip/rng.hpp"

using namespace tskip;
using tskip::testing::gradcheck;

namespace {

Tensor random_tensor(Shape s, std::uint64_t seed, double lo = -1.0, double hi = 1.0) {
  Rng rng(seed);
  Tensor t(std::move(s));
  for (auto& v : t.data()) v = lo + (hi - lo) * uniform01(rng);
  return t;
}

}  // namespace

TEST_SUITE("engine") {
  TEST_CASE("tensor shape and data invariants") {
    Tensor t({2, 3}, 1.5);
    CHECK(t.size() == 6);
    CHECK(t.rank() == 2);
    CHECK_THROWS_AS(Tensor({2, 0}), DimensionError);
    CHECK_THROWS_AS(Tensor({2, 2}, std::vector<double>{1, 2, 3}), DimensionError);
    const Tensor s = stack(std::vector<Tensor>{Tensor({2}, 1.0), Tensor({2}, 2.0)});
    CHECK(s.shape() == Shape{2, 2});
    CHECK(take_leading(s, 1) == Tensor({2}, 2.0));
  }

  TEST_CASE("matmul examples") {
    Tape tape;
    const Var eye = tape.constant(Tensor::from({2, 2}, {1, 0, 0, 1}));
    const Var col = tape.constant(Tensor::from({2, 1}, {3, 4}));
    CHECK(tape.value(matmul(tape, eye, col)) == Tensor::from({2, 1}, {3, 4}));
    const Var row = tape.constant(Tensor::from({1, 2}, {1, 2}));
    CHECK(tape.value(matmul(tape, row, col)).item() == 11.0);
    CHECK_THROWS_AS(matmul(tape, col, col), DimensionError);
  }

  TEST_CASE("matmul gradient matches finite differences") {
    const auto r = gradcheck([](Tape& t, const std::vector<Var>& v) { return sum(t, matmul(t, v[0], v[1])); },
                             {random_tensor({5, 4}, 1), random_tensor({4, 3}, 2)});
    CHECK(r.max_rel_error <= 1e-6);
    const auto r2 = gradcheck(
        [](Tape& t, const std::vector<Var>& v) {
          const Var y = matmul(t, v[0], v[1]);
          return sum(t, mul(t, y, y));
        },
        {random_tensor({5, 4}, 3), random_tensor({4, 3}, 4)});
    CHECK(r2.max_rel_error <= 1e-6);
  }

  TEST_CASE("conv2d examples") {
    Tape tape;
    const Tensor img = random_tensor({1, 1, 4, 5}, 7);
    const Var x = tape.constant(img);
    const Var ones = tape.constant(Tensor({1, 1, 1, 1}, 1.0));
    CHECK(tape.value(conv2d(tape, x, ones, 1)) == img);
    const Var zero = tape.constant(Tensor({1, 2, 5, 5}, 0.0));
    const Var k = tape.constant(random_tensor({3, 2, 3, 3}, 8));
    for (double v : tape.value(conv2d(tape, zero, k, 1)).data()) CHECK(v == 0.0);
    CHECK(tape.shape(conv2d(tape, zero, k, 2)) == Shape{1, 3, 3, 3});
    CHECK(same_output_size(64, 11) == 6);
    CHECK_THROWS_AS(conv2d(tape, x, k, 1), DimensionError);
  }

  TEST_CASE("conv2d gradient matches finite differences") {
    for (std::size_t stride : {1, 2}) {
      const auto r = gradcheck(
          [stride](Tape& t, const std::vector<Var>& v) {
            const Var y = conv2d(t, v[0], v[1], stride);
            return sum(t, mul(t, y, y));
          },
          {random_tensor({1, 2, 5, 5}, 11), random_tensor({3, 2, 3, 3}, 12)});
      CHECK(r.max_rel_error <= 1e-5);
    }
  }

  TEST_CASE("hard spikes use a strict threshold") {
    Tape tape;
    const Var z = tape.constant(Tensor::from({3}, {-0.5, 0.0, 0.3}));
    CHECK(tape.value(spike(tape, z, {}, SpikeMode::Hard)) == Tensor::from({3}, {0, 0, 1}));
  }

  TEST_CASE("surrogate derivative is even, peaked at zero and positive") {
    const SurrogateConfig cfg{};
    CHECK(surrogate_grad(0.0, cfg) == doctest::Approx(cfg.alpha / 2).epsilon(1e-15));
    for (double z : {1e-3, 0.1, 0.7, 3.0, 1e3, 1e300}) {
      CHECK(surrogate_grad(z, cfg) == surrogate_grad(-z, cfg));
      CHECK(surrogate_grad(z, cfg) < surrogate_grad(0.0, cfg));
      CHECK(std::isfinite(surrogate_grad(z, cfg)));
      CHECK(surrogate_grad(z, cfg) >= 0.0);
    }
    CHECK(surrogate_grad(5.0, cfg) > 0.0);
    // Primitive is the antiderivative of the surrogate.
    const double h = 1e-6;
    for (double z : {-1.0, -0.2, 0.0, 0.4}) {
      const double d = (surrogate_primitive(z + h, cfg) - surrogate_primitive(z - h, cfg)) / (2 * h);
      CHECK(d == doctest::Approx(surrogate_grad(z, cfg)).epsilon(1e-7));
    }
  }

  TEST_CASE("hard spike backward never produces NaN") {
    Tape tape;
    Tensor zt = Tensor::from({5}, {-1e308, -1.0, 0.0, 1.0, 1e308});
    zt.set_requires_grad(true);
    const Var z = tape.leaf(zt);
    const Var s = spike(tape, z, {}, SpikeMode::Hard);
    for (double v : tape.value(s).data()) CHECK((v == 0.0 || v == 1.0));
    const auto g = backward(tape, sum(tape, s));
    CHECK(g.get(tape, z).all_finite());
  }

  TEST_CASE("soft-forward spike gradient matches finite differences") {
    const auto r = gradcheck(
        [](Tape& t, const std::vector<Var>& v) {
          const Var s = spike(t, v[0], {2.0}, SpikeMode::SoftForward);
          return sum(t, mul(t, s, v[1]));
        },
        {random_tensor({6}, 21), random_tensor({6}, 22)});
    CHECK(r.max_rel_error <= 1e-4);
  }

  TEST_CASE("concat examples and gradient") {
    Tape tape;
    const Var a = tape.constant(Tensor::from({1, 1}, {1}));
    const Var b = tape.constant(Tensor::from({1, 1}, {2}));
    CHECK(tape.value(concat(tape, a, b)) == Tensor::from({1, 2}, {1, 2}));
    const Var w = tape.constant(Tensor({3, 124}, 0.5));
    CHECK(tape.shape(concat(tape, w, w)) == Shape{3, 248});
    CHECK_THROWS_AS(concat(tape, a, tape.constant(Tensor({2, 1}))), DimensionError);
    const auto r = gradcheck(
        [](Tape& t, const std::vector<Var>& v) {
          const Var c = concat(t, v[0], v[1]);
          return sum(t, mul(t, c, c));
        },
        {random_tensor({2, 3, 2, 2}, 31), random_tensor({2, 2, 2, 2}, 32)});
    CHECK(r.max_rel_error <= 1e-6);
  }

  TEST_CASE("select_channels routes gradients additively") {
    const std::vector<std::size_t> sel{2, 0, 2};
    const auto r = gradcheck(
        [&](Tape& t, const std::vector<Var>& v) {
          const Var y = select_channels(t, v[0], sel);
          return sum(t, mul(t, y, y));
        },
        {random_tensor({2, 3}, 41)});
    CHECK(r.max_rel_error <= 1e-6);
  }

  TEST_CASE("bntt examples") {
    Tape tape;
    BnStats stats(2);
    const Var x = tape.constant(Tensor::from({3, 2}, {4, 1, 4, 2, 4, 3}));
    const Var gamma = tape.constant(Tensor({2}, 1.0));
    const Var beta = tape.constant(Tensor::from({2}, {0.25, -0.5}));
    const Tensor y = tape.value(bntt_step(tape, x, stats, gamma, beta, true));
    // Channel 0 has zero variance: output collapses to beta.
    for (std::size_t b = 0; b < 3; ++b) CHECK(y[b * 2] == doctest::Approx(0.25).epsilon(1e-12));
    // Channel 1 is standardized: values become (x - 2) / sqrt(2/3 + eps) - 0.5.
    const double sd = std::sqrt(2.0 / 3.0 + 1e-5);
    CHECK(y[1] == doctest::Approx(-1.0 / sd - 0.5));
    CHECK(y[5] == doctest::Approx(1.0 / sd - 0.5));
    CHECK(stats.mean[0] == doctest::Approx(0.4));

    BnStats s2(2);
    const Var single = tape.constant(Tensor({1, 2}, 1.0));
    CHECK_THROWS_AS(bntt_step(tape, single, s2, gamma, beta, true), DimensionError);
    CHECK_NOTHROW(bntt_step(tape, single, s2, gamma, beta, false));
  }

  TEST_CASE("bntt normalizes a symmetric batch") {
    Tape tape;
    BnStats stats(1);
    const double a = std::sqrt(1.0 + 1e-5);
    const Var x = tape.constant(Tensor::from({2, 1}, {-a, a}));
    const Tensor y = tape.value(bntt_step(tape, x, stats, tape.constant(Tensor({1}, 1.0)), tape.constant(Tensor({1}, 0.0)), true));
    const double expect = a / std::sqrt(a * a + 1e-5);
    CHECK(y[0] == doctest::Approx(-expect).epsilon(1e-12));
    CHECK(y[1] == doctest::Approx(expect).epsilon(1e-12));
  }

  TEST_CASE("bntt gradient matches finite differences") {
    for (bool training : {true, false}) {
      const auto r = gradcheck(
          [training](Tape& t, const std::vector<Var>& v) {
            BnStats scratch(3);
            scratch.mean = {0.1, -0.2, 0.3};
            scratch.var = {0.5, 1.5, 2.0};
            const Var y = bntt_step(t, v[0], scratch, v[1], v[2], training);
            return sum(t, mul(t, y, t.constant(random_tensor({4, 3, 2, 2}, 55))));
          },
          {random_tensor({4, 3, 2, 2}, 51), random_tensor({3}, 52, 0.5, 1.5), random_tensor({3}, 53)});
      CHECK(r.max_rel_error <= 1e-4);
    }
  }

  TEST_CASE("backward basics") {
    Tape tape;
    Tensor wt = Tensor::from({3}, {0.5, -1, 2});
    wt.set_requires_grad(true);
    const Var w = tape.leaf(wt);
    const Var x = tape.constant(Tensor::from({3}, {3, 4, 5}));
    const auto g = backward(tape, sum(tape, mul(tape, w, x)));
    CHECK(g.get(tape, w) == Tensor::from({3}, {3, 4, 5}));
    CHECK(g.find(x) == nullptr);
    CHECK_THROWS_AS(backward(tape, mul(tape, w, x)), DimensionError);
  }

  TEST_CASE("backward is deterministic") {
    auto run = [] {
      Tape tape;
      Tensor a = random_tensor({4, 4}, 61);
      a.set_requires_grad(true);
      const Var va = tape.leaf(a);
      const Var y = spike(tape, matmul(tape, va, va), {}, SpikeMode::SoftForward);
      return backward(tape, sum(tape, y)).get(tape, va);
    };
    CHECK(run() == run());
  }

  TEST_CASE("two-layer soft-forward MLP gradient") {
    const auto r = gradcheck(
        [](Tape& t, const std::vector<Var>& v) {
          const Var h = spike(t, add_bias(t, matmul(t, v[0], v[1]), v[2]), {}, SpikeMode::SoftForward);
          const Var y = matmul(t, h, v[3]);
          return mse_loss(t, y, t.constant(Tensor({3, 2}, 0.3)));
        },
        {random_tensor({3, 4}, 71), random_tensor({4, 5}, 72), random_tensor({5}, 73), random_tensor({5, 2}, 74)});
    CHECK(r.max_rel_error <= 1e-4);
  }

  TEST_CASE("non-finite values are rejected") {
    Tape tape;
    CHECK_THROWS_AS(tape.leaf(Tensor::from({1}, {std::numeric_limits<double>::quiet_NaN()})), NumericError);
    const Var big = tape.constant(Tensor::from({1}, {1e308}));
    CHECK_THROWS_AS(scale(tape, big, 10.0), NumericError);
  }

  TEST_CASE("losses") {
    Tape tape;
    const Var a = tape.constant(random_tensor({3, 4}, 81));
    CHECK(tape.value(mse_loss(tape, a, a)).item() == 0.0);
    const Var uniform = tape.constant(Tensor({2, 7}, 0.3));
    const std::vector<int> labels{1, 6};
    CHECK(tape.value(cross_entropy(tape, uniform, labels)).item() == doctest::Approx(std::log(7.0)).epsilon(1e-14));
    const Var huge = tape.constant(Tensor::from({1, 2}, {1000.0, -1000.0}));
    CHECK(std::isfinite(tape.value(cross_entropy(tape, huge, std::vector<int>{1})).item()));
    const auto r = gradcheck(
        [](Tape& t, const std::vector<Var>& v) { return cross_entropy(t, v[0], std::vector<int>{0, 2, 1}); },
        {random_tensor({3, 4}, 82, -3, 3)});
    CHECK(r.max_rel_error <= 1e-6);
    const auto r2 = gradcheck([](Tape& t, const std::vector<Var>& v) { return mse_loss(t, v[0], v[1]); },
                              {random_tensor({3, 4}, 83), random_tensor({3, 4}, 84)});
    CHECK(r2.max_rel_error <= 1e-6);
  }

  TEST_CASE("elementwise ops gradients") {
    const auto r = gradcheck(
        [](Tape& t, const std::vector<Var>& v) {
          const Var a = sigmoid(t, v[0]);
          const Var m = mix(t, sigmoid(t, v[2]), a, v[1]);
          const Var s = mul_scalar(t, sub(t, m, scale(t, v[1], 0.5)), v[2]);
          return sum(t, mul(t, s, s));
        },
        {random_tensor({2, 3}, 91), random_tensor({2, 3}, 92), random_tensor({1}, 93)});
    CHECK(r.max_rel_error <= 1e-6);
  }
}
