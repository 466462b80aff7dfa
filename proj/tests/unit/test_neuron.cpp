#include <doctest.h>

#include <cmath>
#include <limits>

#include "support/gradcheck.hpp"
#include "tskip/error.hpp"
#include "tskip/neuron.hpp"
#include "tskip/ops.hpp"
#include "tskip/rng.hpp"

using namespace tskip;

namespace {

struct Cell {
  Tape tape;
  LifState state;
  LifParams params;

  Cell(Shape shape, LifParams p) : params(p) { state = lif_initial_state(tape, shape); }

  Tensor step(const Tensor& input) {
    auto r = lif_step(tape, state, tape.constant(input), params, SurrogateConfig{});
    state = r.state;
    return tape.value(r.spikes);
  }
  double u(std::size_t i = 0) const { return tape.value(state.membrane)[i]; }
};

}  // namespace

TEST_SUITE("neuron") {
  TEST_CASE("rest stays at rest") {
    Cell c({1, 1}, LifParams{0.6, 15.0});
    const Tensor s = c.step(Tensor({1, 1}, 0.0));
    CHECK(c.u() == 0.0);
    CHECK(s[0] == 0.0);
  }

  TEST_CASE("constant input follows the geometric series") {
    Cell c({1, 1}, LifParams{0.6, 15.0});
    for (int t = 1; t <= 3; ++t) {
      const Tensor s = c.step(Tensor({1, 1}, 3.0));
      CHECK(s[0] == 0.0);
      CHECK(c.u() == doctest::Approx(3.0 * (1 - std::pow(0.6, t)) / 0.4).epsilon(1e-12));
    }
    CHECK(c.u() == doctest::Approx(5.88).epsilon(1e-12));
  }

  TEST_CASE("threshold crossing then reset") {
    // leak 1 is outside the clamped range but is a valid hand-trace of the update rule.
    for (ResetMode mode : {ResetMode::Soft, ResetMode::Hard}) {
      Tape tape;
      const Var leak = tape.constant(Tensor::scalar(1.0));
      const Var th = tape.constant(Tensor::scalar(15.0));
      LifState st{tape.constant(Tensor({1}, 14.0)), tape.constant(Tensor({1}, 0.0))};
      auto r = lif_step(tape, st, tape.constant(Tensor({1}, 2.0)), leak, th, mode, {});
      CHECK(tape.value(r.state.membrane)[0] == 16.0);
      CHECK(tape.value(r.spikes)[0] == 1.0);
      auto r2 = lif_step(tape, r.state, tape.constant(Tensor({1}, 0.0)), leak, th, mode, {});
      CHECK(tape.value(r2.state.membrane)[0] == (mode == ResetMode::Soft ? 1.0 : 0.0));
      CHECK(tape.value(r2.spikes)[0] == 0.0);
    }
  }

  TEST_CASE("exact threshold does not spike") {
    Cell c({1}, LifParams{0.5, 2.0});
    CHECK(c.step(Tensor({1}, 2.0))[0] == 0.0);
  }

  TEST_CASE("clamp_params") {
    CHECK(clamp_params({1.2, 15.0}).leak == 0.999);
    CHECK(clamp_params({0.6, -1.0}).threshold == 0.01);
    CHECK(clamp_params({-5.0, 1.0}).leak == 1e-3);
    const LifParams in{0.37, 4.2, ResetMode::Hard, false};
    const LifParams out = clamp_params(in);
    CHECK(out.leak == in.leak);
    CHECK(out.threshold == in.threshold);
    CHECK(out.reset == in.reset);
    CHECK(out.learnable == in.learnable);
  }

  TEST_CASE("zero input decays geometrically") {
    for (double leak : {0.1, 0.6, 0.95}) {
      Tape tape;
      const Var lv = tape.constant(Tensor::scalar(leak));
      const Var th = tape.constant(Tensor::scalar(1e6));
      LifState st{tape.constant(Tensor({3}, 7.5)), tape.constant(Tensor({3}, 0.0))};
      for (int t = 1; t <= 40; ++t) {
        st = lif_step(tape, st, tape.constant(Tensor({3}, 0.0)), lv, th, ResetMode::Soft, {}).state;
        CHECK(tape.value(st.membrane)[1] == doctest::Approx(7.5 * std::pow(leak, t)).epsilon(1e-12));
      }
    }
  }

  TEST_CASE("soft reset subtracts exactly the threshold") {
    Rng rng(5);
    for (int trial = 0; trial < 200; ++trial) {
      const double lam = 0.05 + 0.9 * uniform01(rng), vth = 0.5 + 3 * uniform01(rng);
      const double u0 = 4 * uniform01(rng), in = 2 * uniform01(rng) - 1;
      Tape tape;
      const Var lv = tape.constant(Tensor::scalar(lam)), tv = tape.constant(Tensor::scalar(vth));
      const Var U = tape.constant(Tensor({1}, u0)), I = tape.constant(Tensor({1}, in));
      const double fired = tape.value(lif_integrate(tape, U, I, tape.constant(Tensor({1}, 1.0)), lv, tv, ResetMode::Soft))[0];
      const double quiet = tape.value(lif_integrate(tape, U, I, tape.constant(Tensor({1}, 0.0)), lv, tv, ResetMode::Soft))[0];
      CHECK(fired == quiet - vth);
      const double hard = tape.value(lif_integrate(tape, U, I, tape.constant(Tensor({1}, 1.0)), lv, tv, ResetMode::Hard))[0];
      CHECK(hard == in);
    }
  }

  TEST_CASE("spike count is monotone in constant input") {
    for (ResetMode mode : {ResetMode::Soft, ResetMode::Hard}) {
      for (double lam : {0.3, 0.6, 0.9}) {
        int prev = -1;
        for (int k = 0; k <= 60; ++k) {
          const double c = 0.25 * k;
          Cell cell({1}, LifParams{lam, 2.0, mode});
          int count = 0;
          for (int t = 0; t < 50; ++t) count += static_cast<int>(cell.step(Tensor({1}, c))[0]);
          CHECK(count >= prev);
          prev = count;
        }
      }
    }
  }

  TEST_CASE("shape mismatch and bad inputs") {
    Tape tape;
    const LifState st = lif_initial_state(tape, {2, 3});
    CHECK_THROWS_AS(lif_step(tape, st, tape.constant(Tensor({2, 2})), LifParams{}, {}), DimensionError);
    Tensor bad({2, 3}, 0.0);
    bad[0] = std::numeric_limits<double>::infinity();
    CHECK_THROWS_AS(tape.constant(bad), NumericError);
  }

  TEST_CASE("three-step LIF chain gradient") {
    for (ResetMode mode : {ResetMode::Soft, ResetMode::Hard}) {
      Rng rng(17);
      Tensor inputs({3, 2, 4});
      for (auto& v : inputs.data()) v = 2.0 * uniform01(rng);
      Tensor w({4, 3});
      for (auto& v : w.data()) v = uniform01(rng) - 0.2;
      const auto r = testing::gradcheck(
          [&](Tape& t, const std::vector<Var>& v) {
            LifState st = lif_initial_state(t, {2, 3});
            std::vector<Var> outs;
            for (std::size_t s = 0; s < 3; ++s) {
              const Var x = t.constant(take_leading(inputs, s));
              const auto step = lif_step(t, st, matmul(t, x, v[0]), v[1], v[2], mode, {}, SpikeMode::SoftForward);
              st = step.state;
              outs.push_back(scale(t, step.spikes, static_cast<double>(s + 1)));
            }
            return sum(t, add_n(t, outs));
          },
          {w, Tensor::scalar(0.6), Tensor::scalar(1.1)});
      CHECK(r.max_rel_error <= 1e-4);
    }
  }
}
