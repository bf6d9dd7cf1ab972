#include <gtest/gtest.h>

#include <random>

#include "pmsn/error.hpp"
#include "pmsn/grad.hpp"
#include "support.hpp"

namespace pmsn {
namespace {

using cd = std::complex<double>;

TEST(Surrogate, TriangleValues) {
  const SurrogateConfig c{1.0};
  EXPECT_DOUBLE_EQ(surrogate(1.0, 1.0, c), 1.0);
  EXPECT_DOUBLE_EQ(surrogate(2.0, 1.0, c), 0.0);
  EXPECT_DOUBLE_EQ(surrogate(0.0, 1.0, c), 0.0);
  EXPECT_DOUBLE_EQ(surrogate(1.5, 1.0, c), 0.5);
  const SurrogateConfig w{0.5};
  EXPECT_DOUBLE_EQ(surrogate(1.0, 1.0, w), 2.0);
  EXPECT_THROW(SurrogateConfig{0.0}.validate(), InvalidArgument);
}

TEST(Surrogate, RampDerivativeIsTriangle) {
  for (double width : {0.5, 1.0, 2.0})
    for (double d = -2.5; d <= 2.5; d += 0.137) {
      const double h = 1e-6;
      const double fd = (smooth_spike(d + h, width) - smooth_spike(d - h, width)) / (2 * h);
      EXPECT_NEAR(fd, surrogate(d + 1.0, 1.0, SurrogateConfig{width}), 1e-6);
    }
  EXPECT_DOUBLE_EQ(smooth_spike(0.0, 1.0), 0.5);
}

struct Setup {
  PmsnParams p;
  SeqTensor<double> I;
  ForwardOptions opt;
  ForwardOutput<double> out;
  LayerTape<double> tape;
};

Setup make_setup(std::uint64_t seed, std::size_t modes, std::size_t T, std::size_t B = 2,
                 std::size_t F = 3, ForwardOptions opt = {}) {
  std::mt19937_64 rng(seed);
  Setup s;
  s.p = testing::random_params(F, modes, rng, 0.5);
  s.I = testing::random_input<double>(B, T, F, rng, 0.4, 0.8);
  s.opt = opt;
  s.out = layer_forward(s.p, s.I, s.opt);
  s.tape = make_tape(s.p, s.I, s.out, s.opt);
  return s;
}

TEST(BackwardInput, DeltaAtLastStep) {
  ForwardOptions o;
  o.mode = ForwardMode::kSerial;
  o.clamp_ih = false;
  auto s = make_setup(70, 4, 20, 1, 2, o);
  std::fill(s.p.gamma_n.begin(), s.p.gamma_n.end(), 0.0);
  s.p.touch();
  s.out = layer_forward(s.p, s.I, s.opt);
  s.tape = make_tape(s.p, s.I, s.out, s.opt);
  SeqTensor<double> dS(1, 20, 2);
  dS(0, 19, 0) = 1.0;
  const SurrogateConfig c{2.0};
  const auto dI = backward_input(s.tape, c, dS);
  const double g = surrogate(s.out.v_s(0, 19, 0), s.p.theta, c);
  for (std::size_t t = 0; t < 20; ++t) {
    EXPECT_NEAR(dI(0, t, 0), g * s.tape.kernel->kernel(0)[19 - t], 1e-12);
    EXPECT_EQ(dI(0, t, 1), 0.0);
  }
}

TEST(BackwardInput, DeadZoneGivesZero) {
  auto s = make_setup(71, 4, 30);
  s.p.theta = 1e6;
  s.out = layer_forward(s.p, s.I, s.opt);
  s.tape = make_tape(s.p, s.I, s.out, s.opt);
  SeqTensor<double> dS(2, 30, 3, 1.0);
  const auto r = layer_backward(s.tape, SurrogateConfig{}, dS, true);
  for (double v : r.d_input.data()) EXPECT_EQ(v, 0.0);
  EXPECT_TRUE(r.grads.all_zero());
}

TEST(BackwardInput, MatchesDenseDoubleLoop) {
  for (std::size_t T : {1, 5, 16, 32}) {
    for (std::size_t modes : {1, 2, 4}) {
      auto s = make_setup(72 + T + modes, modes, T);
      std::mt19937_64 rng(T);
      const auto dS = testing::random_input<double>(2, T, 3, rng, 0.0, 1.0);
      const SurrogateConfig c{1.0};
      const auto dI = backward_input(s.tape, c, dS);
      const auto ref = testing::dense_input_grad(s.p, testing::reference_adjoint(s.p, s.out, s.opt, dS, c));
      double scale = 0.0;
      for (double v : ref.data()) scale = std::max(scale, std::abs(v));
      for (std::size_t i = 0; i < dI.size(); ++i)
        EXPECT_LE(std::abs(dI.data()[i] - ref.data()[i]), 1e-5 * std::max(std::abs(ref.data()[i]), 1e-3 * scale))
            << "T=" << T << " modes=" << modes;
    }
  }
}

TEST(BackwardInput, SerialRecurrenceAgrees) {
  for (Context ctx : {Context::kLocal, Context::kGlobal}) {
    ForwardOptions o;
    o.context = ctx;
    auto s = make_setup(73, 5, 200, 2, 3, o);
    std::mt19937_64 rng(2);
    const auto dS = testing::random_input<double>(2, 200, 3, rng, 0.0, 1.0);
    const auto a = backward_input(s.tape, SurrogateConfig{}, dS);
    const auto b = backward_input_serial(s.tape, SurrogateConfig{}, dS);
    for (std::size_t i = 0; i < a.size(); ++i) EXPECT_NEAR(a.data()[i], b.data()[i], 1e-9);
  }
}

TEST(BackwardInput, MissingTapeIsInvalidState) {
  auto s = make_setup(74, 2, 10);
  SeqTensor<double> dS(2, 10, 3, 1.0);
  LayerTape<double> empty;
  EXPECT_THROW(backward_input(empty, SurrogateConfig{}, dS), InvalidState);
  auto t = s.tape;
  t.v_s = SeqTensor<double>();
  EXPECT_THROW(backward_input(t, SurrogateConfig{}, dS), InvalidState);
  t = s.tape;
  t.I = SeqTensor<double>();
  EXPECT_THROW(backward_params(t, SurrogateConfig{}, dS), InvalidState);
  t = s.tape;
  t.kernel.reset();
  EXPECT_THROW(backward_input(t, SurrogateConfig{}, dS), InvalidState);
}

TEST(BackwardInput, ResetBookkeepingDoesNotLeak) {
  auto s = make_setup(75, 4, 40);
  std::mt19937_64 rng(3);
  const auto dS = testing::random_input<double>(2, 40, 3, rng, 0.0, 1.0);
  const auto a = layer_backward(s.tape, SurrogateConfig{}, dS, true);
  auto t = s.tape;
  for (auto& v : t.v_r.data()) v += 17.0;
  const auto b = layer_backward(t, SurrogateConfig{}, dS, true);
  EXPECT_EQ(a.d_input.data().size(), b.d_input.data().size());
  for (std::size_t i = 0; i < a.d_input.size(); ++i) EXPECT_EQ(a.d_input.data()[i], b.d_input.data()[i]);
  EXPECT_EQ(a.grads.d_lambda_dt, b.grads.d_lambda_dt);
}

TEST(BackwardInput, DecaysAtEigenvalueRate) {
  auto s = make_setup(76, 4, 120, 1, 2);
  SeqTensor<double> dS(1, 120, 2);
  dS(0, 119, 0) = dS(0, 119, 1) = 1.0;
  std::fill(s.p.gamma_n.begin(), s.p.gamma_n.end(), 0.0);
  s.p.touch();
  ForwardOptions o;
  o.mode = ForwardMode::kSerial;
  o.clamp_ih = false;
  s.opt = o;
  s.out = layer_forward(s.p, s.I, o);
  s.tape = make_tape(s.p, s.I, s.out, o);
  const SurrogateConfig c{1e3};
  const auto dI = backward_input(s.tape, c, dS);
  for (std::size_t f = 0; f < 2; ++f) {
    double rate = -1e9, amp = 0.0;
    for (std::size_t j = 0; j < 4; ++j) {
      rate = std::max(rate, s.p.lambda_dt[s.p.index(f, j)].real());
      amp += std::abs(s.p.phi_s[s.p.index(f, j)] * s.p.Phi_c(f, j));
    }
    const double g = surrogate(s.out.v_s(0, 119, f), s.p.theta, c);
    for (std::size_t t = 0; t < 120; ++t)
      EXPECT_LE(std::abs(dI(0, t, f)), g * amp * std::exp(double(119 - t) * rate) * (1 + 1e-9));
  }
}

TEST(BackwardParams, GammaGradientWithHiddenZeroed) {
  auto s = make_setup(77, 2, 25);
  std::fill(s.p.phi_s.begin(), s.p.phi_s.end(), cd{});
  s.p.touch();
  s.out = layer_forward(s.p, s.I, s.opt);
  s.tape = make_tape(s.p, s.I, s.out, s.opt);
  std::mt19937_64 rng(4);
  const auto dS = testing::random_input<double>(2, 25, 3, rng, 0.0, 1.0);
  const SurrogateConfig c{1.0};
  const auto g = backward_params(s.tape, c, dS);
  for (std::size_t f = 0; f < 3; ++f) {
    double want = 0.0;
    for (std::size_t b = 0; b < 2; ++b)
      for (std::size_t t = 0; t < 25; ++t)
        if (s.out.I_h(b, t, f) >= 0)
          want += dS(b, t, f) * surrogate(s.out.v_s(b, t, f), s.p.theta, c) * s.I(b, t, f);
    EXPECT_NEAR(g.d_gamma_n[f], want, 1e-12 * (1 + std::abs(want)));
  }
}

TEST(BackwardParams, ZeroUpstreamGivesZeroBundle) {
  auto s = make_setup(78, 4, 30);
  const auto g = backward_params(s.tape, SurrogateConfig{}, SeqTensor<double>(2, 30, 3));
  EXPECT_TRUE(g.all_zero());
  EXPECT_EQ(g.d_theta, 0.0);
}

TEST(BackwardParams, PairedModesGetConjugateGradients) {
  auto s = make_setup(79, 5, 50);
  std::mt19937_64 rng(5);
  const auto dS = testing::random_input<double>(2, 50, 3, rng, 0.0, 1.0);
  const auto g = backward_params(s.tape, SurrogateConfig{}, dS);
  for (std::size_t f = 0; f < 3; ++f) {
    for (std::size_t j = 0; j < 4; j += 2) {
      const auto a = s.p.index(f, j);
      EXPECT_EQ(g.d_lambda_dt[a + 1], std::conj(g.d_lambda_dt[a]));
      EXPECT_EQ(g.d_phi_c[a + 1], std::conj(g.d_phi_c[a]));
      EXPECT_EQ(g.d_phi_s[a + 1], std::conj(g.d_phi_s[a]));
    }
    EXPECT_EQ(g.d_lambda_dt[s.p.index(f, 4)].imag(), 0.0);
  }
}

TEST(BackwardParams, MaskedFieldsAreZero) {
  auto s = make_setup(80, 4, 30);
  s.p.learnable.phi_c = false;
  s.p.learnable.gamma_n = false;
  std::mt19937_64 rng(6);
  const auto dS = testing::random_input<double>(2, 30, 3, rng, 0.0, 1.0);
  const auto g = backward_params(s.tape, SurrogateConfig{}, dS);
  for (const auto& z : g.d_phi_c) EXPECT_EQ(z, cd{});
  for (double v : g.d_gamma_n) EXPECT_EQ(v, 0.0);
  bool any = false;
  for (const auto& z : g.d_lambda_dt) any |= z != cd{};
  EXPECT_TRUE(any);
}

TEST(BackwardParams, ParallelWorkersAreBitIdentical) {
  auto s = make_setup(81, 4, 64, 3, 5);
  std::mt19937_64 rng(7);
  const auto dS = testing::random_input<double>(3, 64, 5, rng, 0.0, 1.0);
  const auto a = layer_backward(s.tape, SurrogateConfig{}, dS, true, 1);
  const auto b = layer_backward(s.tape, SurrogateConfig{}, dS, true, 3);
  EXPECT_EQ(a.grads.d_lambda_dt, b.grads.d_lambda_dt);
  EXPECT_EQ(a.grads.d_phi_s, b.grads.d_phi_s);
  for (std::size_t i = 0; i < a.d_input.size(); ++i) EXPECT_EQ(a.d_input.data()[i], b.d_input.data()[i]);
}

TEST(FdCheck, LinearSubmodelIsExact) {
  auto m = testing::fd_model(90, 5, 2, 3);
  m.linear = true;
  std::mt19937_64 rng(90);
  const auto x = testing::random_input<double>(2, 32, 2, rng);
  const auto w = testing::random_input<double>(2, 32, 3, rng, 0.0, 1.0);
  const auto r = fd_check(m, x, w, 1e-3);
  for (const auto& e : r.entries) EXPECT_LE(e.max_rel_err, 1e-7) << e.name;
}

TEST(FdCheck, SmoothedLayerSeveralSeeds) {
  for (std::uint64_t seed = 0; seed < 6; ++seed) {
    auto m = testing::fd_model(100 + seed, 5, 2, 3);
    std::mt19937_64 rng(seed);
    const auto x = testing::random_input<double>(2, 32, 2, rng);
    const auto w = testing::random_input<double>(2, 32, 3, rng, 0.0, 1.0);
    const auto r = fd_check(m, x, w, 1e-5);
    for (const auto& e : r.entries) EXPECT_LE(e.max_rel_err, 1e-4) << "seed " << seed << " " << e.name;
  }
}

TEST(FdCheck, SubtractResetWithLeakInSerialMode) {
  auto m = testing::fd_model(110, 4, 2, 2);
  m.params.alpha_out = 0.8;
  m.options.mode = ForwardMode::kSerial;
  m.options.reset = ResetMode::kSubtract;
  std::mt19937_64 rng(110);
  const auto x = testing::random_input<double>(2, 24, 2, rng);
  const auto w = testing::random_input<double>(2, 24, 2, rng, 0.0, 1.0);
  const auto r = fd_check(m, x, w, 1e-5);
  for (const auto& e : r.entries) EXPECT_LE(e.max_rel_err, 1e-4) << e.name;
}

TEST(FdCheck, GlobalContext) {
  auto m = testing::fd_model(111, 5, 2, 2);
  m.options.context = Context::kGlobal;
  std::mt19937_64 rng(111);
  const auto x = testing::random_input<double>(2, 24, 2, rng);
  const auto w = testing::random_input<double>(2, 24, 2, rng, 0.0, 1.0);
  const auto r = fd_check(m, x, w, 1e-5);
  for (const auto& e : r.entries) EXPECT_LE(e.max_rel_err, 1e-4) << e.name;
}

TEST(FdCheck, EpsSweepHasInteriorMinimum) {
  auto m = testing::fd_model(100, 5, 2, 3);
  std::mt19937_64 rng(0);
  const auto x = testing::random_input<double>(2, 32, 2, rng);
  const auto w = testing::random_input<double>(2, 32, 3, rng, 0.0, 1.0);
  std::vector<double> errs;
  for (double eps : {1e-3, 1e-4, 1e-5}) errs.push_back(fd_check(m, x, w, eps).max_rel_err());
  EXPECT_LT(errs[1], errs[0]);
  EXPECT_LT(errs[1], errs[2]);
  const auto j = fd_check(m, x, w, 1e-4).to_json();
  EXPECT_EQ(j["parameters"].size(), 6u);
  EXPECT_TRUE(j["parameters"][0].contains("argmax"));
}

}  // namespace
}  // namespace pmsn
