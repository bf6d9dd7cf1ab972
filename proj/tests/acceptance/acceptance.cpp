// Acceptance harness: one PASS/FAIL line per criterion.
//
//   pmsn_acceptance            all criteria
//   pmsn_acceptance 1 3 8      a subset

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <numbers>
#include <numeric>
#include <random>
#include <set>
#include <sstream>
#include <string>

#include "../unit/support.hpp"
#include "pmsn/bench.hpp"
#include "pmsn/config.hpp"
#include "pmsn/data.hpp"
#include "pmsn/error.hpp"
#include "pmsn/fft.hpp"
#include "pmsn/grad.hpp"
#include "pmsn/network.hpp"
#include "pmsn/parallel.hpp"
#include "pmsn/trainer.hpp"
#include "pmsn/tridiag_eigen.hpp"

namespace pmsn {
namespace {

struct Verdict {
  bool pass = false;
  std::string detail;
};

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

std::string fmt(double v) {
  std::ostringstream os;
  os.precision(3);
  os << v;
  return os.str();
}

const std::filesystem::path kSource = PMSN_SOURCE_DIR;

// ------------------------------------------------------------------ 1 + 2

struct EquivalenceTally {
  std::size_t draws = 0;
  std::size_t spike_mismatch = 0;
  double dev_single = 0.0;
  double dev_double = 0.0;
  std::size_t identity_checks = 0;
  std::size_t identity_failures = 0;
  double seconds = 0.0;
};

template <typename Real>
void compare_routes(const PmsnParams& p, const SeqTensor<Real>& I, EquivalenceTally& tally, double& dev,
                    bool check_identity) {
  ForwardOptions par, ser;
  ser.mode = ForwardMode::kSerial;
  const auto a = layer_forward(p, I, par);
  const auto b = layer_forward(p, I, ser);
  for (std::size_t i = 0; i < a.S.size(); ++i) {
    tally.spike_mismatch += a.S.data()[i] != b.S.data()[i];
    dev = std::max(dev, std::abs(static_cast<double>(a.v_s.data()[i]) - static_cast<double>(b.v_s.data()[i])));
  }
  if (!check_identity) return;
  for (const auto* out : {&a, &b})
    for (std::size_t bb = 0; bb < I.batch(); ++bb)
      for (std::size_t f = 0; f < I.features(); ++f) {
        double discharged = 0.0;
        for (std::size_t t = 0; t < I.time(); ++t) {
          discharged += static_cast<double>(out->v_r(bb, t, f));
          ++tally.identity_checks;
          tally.identity_failures +=
              discharged != p.theta * std::floor(static_cast<double>(out->cum_Ih(bb, t, f)) / p.theta);
        }
      }
}

const EquivalenceTally& equivalence_suite() {
  static EquivalenceTally tally;
  static bool done = false;
  if (done) return tally;
  const auto t0 = Clock::now();
  const std::size_t Ts[] = {1, 2, 31, 32, 33, 256, 512};
  const std::size_t Bs[] = {1, 4};
  std::mt19937_64 rng(2024);
  std::uniform_real_distribution<double> sd(0.5, 3.0);
  for (std::size_t d = 0; d < 10000; ++d) {
    const std::size_t n = 2 + d % 8;
    const std::size_t T = Ts[(d / 8) % 7];
    const std::size_t B = Bs[(d / 56) % 2];
    const auto p = testing::random_params(3, n - 1, rng);
    const auto I = testing::random_input<double>(B, T, 3, rng, 0.3, sd(rng));
    SeqTensor<float> If(B, T, 3);
    for (std::size_t i = 0; i < I.size(); ++i) If.data()[i] = static_cast<float>(I.data()[i]);
    compare_routes(p, If, tally, tally.dev_single, false);
    compare_routes(p, I, tally, tally.dev_double, true);
    ++tally.draws;
  }
  tally.seconds = seconds_since(t0);
  done = true;
  return tally;
}

Verdict criterion1() {
  const auto& t = equivalence_suite();
  const bool pass = t.spike_mismatch == 0 && t.dev_single <= 1e-5 && t.dev_double <= 1e-9 && t.seconds <= 300;
  return {pass, std::to_string(t.draws) + " draws x {single, double}: spike mismatches " +
                    std::to_string(t.spike_mismatch) + ", max |v_s| dev single " + fmt(t.dev_single) +
                    " double " + fmt(t.dev_double) + ", " + fmt(t.seconds) + " s"};
}

// Integer oracle: I_h on a 1/1024 grid, theta a multiple of the grid, so
// every partial sum is exact.
Verdict rational_discharge() {
  std::mt19937_64 rng(7);
  std::uniform_int_distribution<int> q(-600, 2600);
  std::size_t checks = 0, failures = 0;
  for (int theta_q : {1024, 512, 1536}) {
    const double theta = theta_q / 1024.0;
    for (std::size_t T : {1, 2, 31, 32, 33, 256, 512}) {
      SeqTensor<double> Ih(4, T, 3);
      for (auto& v : Ih.data()) v = q(rng) / 1024.0;
      const auto out = output_forward_parallel(Ih, theta, true);
      for (std::size_t b = 0; b < 4; ++b)
        for (std::size_t f = 0; f < 3; ++f) {
          long long cum = 0;
          double discharged = 0.0;
          for (std::size_t t = 0; t < T; ++t) {
            cum += std::max(0LL, static_cast<long long>(std::llround(Ih(b, t, f) * 1024.0)));
            discharged += out.v_r(b, t, f);
            const double expect = theta * static_cast<double>(cum / theta_q);
            ++checks;
            failures += discharged != expect;
          }
        }
    }
  }
  return {failures == 0, std::to_string(checks) + " rational checks, " + std::to_string(failures) + " failures"};
}

Verdict criterion2() {
  const auto& t = equivalence_suite();
  const auto r = rational_discharge();
  return {t.identity_failures == 0 && r.pass,
          std::to_string(t.identity_checks) + " suite checks (serial and parallel, double), " +
              std::to_string(t.identity_failures) + " failures; " + r.detail};
}

// ---------------------------------------------------------------------- 3

Verdict criterion3() {
  double worst_smooth = 0.0, worst_linear = 0.0, worst_dense = 0.0;
  std::string where;
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    auto m = testing::fd_model(100 + seed, 5, 2, 3);
    std::mt19937_64 rng(seed);
    const auto x = testing::random_input<double>(2, 32, 2, rng);
    const auto w = testing::random_input<double>(2, 32, 3, rng, 0.0, 1.0);
    for (const auto& e : fd_check(m, x, w, 1e-5).entries)
      if (e.max_rel_err > worst_smooth) {
        worst_smooth = e.max_rel_err;
        where = e.name + " seed " + std::to_string(seed);
      }
    m.linear = true;
    worst_linear = std::max(worst_linear, fd_check(m, x, w, 1e-3).max_rel_err());
  }
  for (std::size_t T : {1, 5, 16, 32})
    for (std::size_t modes : {1, 2, 4}) {
      std::mt19937_64 rng(72 + T + modes);
      const auto p = testing::random_params(3, modes, rng, 0.5);
      const auto I = testing::random_input<double>(2, T, 3, rng, 0.4, 0.8);
      const ForwardOptions opt;
      const auto out = layer_forward(p, I, opt);
      const auto tape = make_tape(p, I, out, opt);
      const auto dS = testing::random_input<double>(2, T, 3, rng, 0.0, 1.0);
      const SurrogateConfig c{1.0};
      const auto dI = backward_input(tape, c, dS);
      const auto ref = testing::dense_input_grad(p, testing::reference_adjoint(p, out, opt, dS, c));
      double scale = 0.0;
      for (double v : ref.data()) scale = std::max(scale, std::abs(v));
      for (std::size_t i = 0; i < dI.size(); ++i)
        worst_dense = std::max(worst_dense, std::abs(dI.data()[i] - ref.data()[i]) /
                                                std::max(std::abs(ref.data()[i]), 1e-3 * scale));
    }
  const bool pass = worst_smooth <= 1e-4 && worst_linear <= 1e-7 && worst_dense <= 1e-5;
  return {pass, "smoothed max rel " + fmt(worst_smooth) + " (" + where + "), linear " + fmt(worst_linear) +
                    ", dense temporal term " + fmt(worst_dense)};
}

// ---------------------------------------------------------------------- 4

Verdict criterion4() {
  double worst_zoh = 0.0;
  for (int n : {3, 5, 8}) {
    const auto init = init_params(n, 4, static_cast<std::uint64_t>(17 + n));
    std::mt19937_64 rng(static_cast<std::uint64_t>(n));
    for (std::size_t f = 0; f < 4; ++f) {
      const auto& mcn = init.mcn[f];
      const PmsnParams one = discretize(mcn);
      const auto I = testing::random_input<double>(1, 50, 1, rng);
      SerialOptions so;
      so.keep_hidden = true;
      const auto out = pmsn_serial_forward(one, I, so);
      const auto eig = tridiag_skew_eigen(mcn.hidden_matrix());
      const Eigen::MatrixXd A = mcn.hidden_matrix().dense();
      const auto h = static_cast<Eigen::Index>(n - 1);
      Eigen::VectorXd g(h);
      for (Eigen::Index k = 0; k < h; ++k) g(k) = mcn.gamma[static_cast<std::size_t>(k)];
      std::vector<double> x(50);
      for (std::size_t t = 0; t < 50; ++t) x[t] = I(0, t, 0);
      const Eigen::MatrixXd ref =
          2.0 * testing::euler_hidden(A, g, x, mcn.dt, 2000) - testing::euler_hidden(A, g, x, mcn.dt, 1000);
      for (std::size_t t = 0; t < 50; ++t) {
        Eigen::VectorXcd vh(h);
        for (Eigen::Index j = 0; j < h; ++j) vh(j) = out.V_h.at(0, t, static_cast<std::size_t>(j));
        const Eigen::VectorXd v = (eig.P * vh).real();
        const Eigen::VectorXd r = ref.col(static_cast<Eigen::Index>(t));
        worst_zoh = std::max(worst_zoh, (v - r).norm() / std::max(r.norm(), 1e-12));
      }
    }
  }
  double worst_recon = 0.0, worst_re = 0.0;
  for (int n = 2; n <= 9; ++n)
    for (std::uint64_t seed = 0; seed < 5; ++seed) {
      const auto init = init_params(n, 3, seed);
      for (std::size_t f = 0; f < 3; ++f) {
        const auto m = init.mcn[f].hidden_matrix();
        const auto eig = tridiag_skew_eigen(m);
        worst_recon = std::max(worst_recon, eig.reconstruction_error(m));
        for (Eigen::Index j = 0; j < eig.eigenvalues.size(); ++j)
          worst_re = std::max(worst_re, std::abs(eig.eigenvalues(j).real() + 0.5));
      }
    }
  const bool pass = worst_zoh <= 1e-3 && worst_recon <= 1e-8 && worst_re <= 1e-10;
  return {pass, "ZOH vs fine Euler max rel " + fmt(worst_zoh) + ", reconstruction " + fmt(worst_recon) +
                    ", |Re(lambda) + 1/2| " + fmt(worst_re)};
}

// ------------------------------------------------------------------ 5 + 6

struct RunResult {
  double accuracy = 0.0;
  double seconds = 0.0;
  std::shared_ptr<Network> net;
  EvalResult eval;
  std::size_t T = 0;
};

RunResult train_run(RunConfig c, std::uint64_t seed, const Dataset& train, const Dataset& test) {
  c.seed = seed;
  const auto t0 = Clock::now();
  auto net = std::make_shared<Network>(c.network_spec(train.x.features(), train.classes));
  OptimState opt;
  train_loop<float>(*net, opt, train, test, c.train_config());
  RunResult r;
  r.eval = evaluate<float>(*net, test, c.batch_size, c.workers);
  r.accuracy = r.eval.accuracy;
  r.seconds = seconds_since(t0);
  r.net = net;
  r.T = train.x.time();
  std::cout << "  [" << to_string(c.neuron) << " n=" << c.n << " seed " << seed << " task " << c.task
            << "] test accuracy " << r.accuracy << " in " << fmt(r.seconds) << " s" << std::endl;
  return r;
}

struct LearningRuns {
  std::vector<RunResult> pmsn, lif, pmsn_n2, smnist;
};

const LearningRuns& learning_runs() {
  static LearningRuns runs;
  static bool done = false;
  if (done) return runs;
  const RunConfig dr = load_run_config(kSource / "configs/delayed_recall.toml");
  const Dataset tr = gen_delayed_recall(dr.n_train, dr.T, dr.n_classes, dr.cue_window, dr.data_seed, dr.noise);
  const Dataset te = gen_delayed_recall(dr.n_test, dr.T, dr.n_classes, dr.cue_window, dr.data_seed + 1, dr.noise);
  RunConfig lif = dr, n2 = dr;
  lif.neuron = NeuronKind::kLif;
  n2.n = 2;

  RunConfig sm = load_run_config(kSource / "configs/smnist01.toml");
  const auto root = kSource / sm.path;
  const Dataset smtr = load_idx_digits(root / "train-images-idx3-ubyte", root / "train-labels-idx1-ubyte",
                                       sm.digits, sm.n_train, {});
  const Dataset smte = load_idx_digits(root / "t10k-images-idx3-ubyte", root / "t10k-labels-idx1-ubyte",
                                       sm.digits, sm.n_test, {});
  for (std::uint64_t seed : {1, 2, 3}) {
    runs.pmsn.push_back(train_run(dr, seed, tr, te));
    runs.lif.push_back(train_run(lif, seed, tr, te));
    runs.pmsn_n2.push_back(train_run(n2, seed, tr, te));
    runs.smnist.push_back(train_run(sm, seed, smtr, smte));
  }
  done = true;
  return runs;
}

Verdict criterion5() {
  const auto& r = learning_runs();
  int dr_ok = 0, sm_ok = 0;
  double slowest = 0.0;
  std::ostringstream os;
  for (std::size_t s = 0; s < 3; ++s) {
    const double gap = r.pmsn[s].accuracy - r.lif[s].accuracy;
    dr_ok += r.pmsn[s].accuracy >= 0.90 && gap >= 0.10 && r.pmsn[s].seconds <= 1800 && r.lif[s].seconds <= 1800;
    sm_ok += r.smnist[s].accuracy >= 0.95 && r.smnist[s].seconds <= 1800;
    for (const auto* v : {&r.pmsn[s], &r.lif[s], &r.smnist[s]}) slowest = std::max(slowest, v->seconds);
    os << (s ? "; " : "") << "seed " << s + 1 << ": recall PMSN " << fmt(r.pmsn[s].accuracy) << " LIF "
       << fmt(r.lif[s].accuracy) << ", S-MNIST " << fmt(r.smnist[s].accuracy);
  }
  os << "; slowest run " << fmt(slowest) << " s";
  return {dr_ok >= 2 && sm_ok >= 2, os.str()};
}

Verdict criterion6() {
  const auto& r = learning_runs();
  double m5 = 0.0, m2 = 0.0;
  for (std::size_t s = 0; s < 3; ++s) {
    m5 += r.pmsn[s].accuracy / 3.0;
    m2 += r.pmsn_n2[s].accuracy / 3.0;
  }
  return {m5 >= m2, "mean accuracy n=5 " + fmt(m5) + ", n=2 " + fmt(m2)};
}

// ---------------------------------------------------------------------- 7

Verdict criterion7() {
  struct Row {
    ModelKind kind;
    std::uint64_t n, k;
    Int128 deci_pj;  // expected energy in tenths of a picojoule
  };
  // h = 100, m = 64, t = 784, Fr = 1/10: 501760 accumulates.
  const Int128 ac_deci = Int128{501760} * 9;
  const Row rows[] = {
      {ModelKind::kLif, 1, 0, ac_deci + Int128{64} * 784 * 46},
      {ModelKind::kPmsn, 5, 0, ac_deci + Int128{8} * 4 * 64 * 784 * 46},
      {ModelKind::kPsn, 1, 0, ac_deci + Int128{64} * 784 * 784 * 46},
      {ModelKind::kMaskedPsn, 1, 4, ac_deci + Int128{4} * 64 * 784 * 46},
      {ModelKind::kSpsn, 1, 8, ac_deci + Int128{8} * 64 * 784 * 46},
  };
  int exact = 0;
  for (const auto& row : rows) {
    EnergyStats s;
    s.kind = row.kind;
    s.h = 100;
    s.m = 64;
    s.t = 784;
    s.n = row.n;
    s.k = row.k;
    s.fr_num = 1;
    s.fr_den = 10;
    exact += energy_estimate(s).picojoules == Rational(row.deci_pj, 10);
  }
  EnergyStats zero;
  zero.kind = ModelKind::kLif;
  zero.h = zero.m = zero.t = 5;
  const bool zero_ok = energy_estimate(zero).ac_count == Rational(Int128{0});
  const bool lif_str = energy_estimate({"", ModelKind::kLif, 100, 64, 784, 1, 0, 1, 10}).picojoules.to_string() ==
                       "682393.6";

  // Measured run: a trained PMSN network on the recall test set.
  const auto& run = learning_runs().pmsn.front();
  const RunConfig dr = load_run_config(kSource / "configs/delayed_recall.toml");
  const Dataset te = gen_delayed_recall(dr.n_test, dr.T, dr.n_classes, dr.cue_window, dr.data_seed + 1, dr.noise);
  std::uint64_t nz = 0;
  for (float v : te.x.data()) nz += v != 0.0f;
  const auto stats = network_energy_stats(*run.net, run.eval, run.T);
  bool finite = !stats.empty();
  double total = 0.0;
  for (const auto& s : stats) {
    const double pj = energy_estimate(s).picojoules.to_double();
    finite = finite && std::isfinite(pj) && pj > 0;
    total += pj;
  }
  const bool measured = stats.front().fr_num == nz && stats.front().fr_den == te.x.size();
  std::ostringstream os;
  os << exact << "/5 formula rows exact, Fr=0 row " << (zero_ok ? "ok" : "wrong") << "; measured run "
     << fmt(total / 1e6) << " uJ over " << stats.size() << " layer(s), Fr_in(block0) = " << stats.front().fr_num
     << "/" << stats.front().fr_den << (measured ? " (matches input count)" : " (MISMATCH)");
  return {exact == 5 && zero_ok && lif_str && finite && measured, os.str()};
}

// ---------------------------------------------------------------------- 8

Verdict criterion8() {
  TimingConfig tc;
  tc.T_list = {128, 1024};
  tc.batch_list = {8};
  tc.neurons = 64;
  tc.repetitions = 7;
  const auto rows = time_models(tc);
  std::map<std::string, std::map<std::size_t, double>> med;
  bool has_ratio = true;
  for (const auto& r : rows) {
    med[r.model][r.T] = r.median_us;
    has_ratio = has_ratio && std::isfinite(r.ratio) && r.ratio > 0;
  }
  const auto path = std::filesystem::temp_directory_path() / "pmsn_acceptance_timing.csv";
  write_timing_csv(path, rows);
  std::ifstream is(path);
  std::string header;
  std::getline(is, header);
  has_ratio = has_ratio && header == "model,T,batch,median_us,iqr_us,ratio";

  auto grow = [&](const std::string& m) { return med[m][1024] / med[m][128]; };
  const double sf = grow("serial_msn:forward"), sfb = grow("serial_msn:forward_backward");
  const double pf = grow("parallel_pmsn:forward"), pfb = grow("parallel_pmsn:forward_backward");

  double worst_fft = 0.0;
  std::mt19937_64 rng(5);
  std::normal_distribution<double> nd;
  for (std::size_t T : {1, 2, 7, 31, 32, 33, 128, 256, 512, 1000, 1024, 4096}) {
    std::vector<double> x(T), k(T);
    for (auto& v : x) v = nd(rng);
    for (std::size_t t = 0; t < T; ++t) k[t] = std::exp(-0.01 * static_cast<double>(t)) * nd(rng);
    const auto plan = RealFft::get(linear_conv_length(T));
    std::vector<std::complex<double>> k_hat(plan->spectrum_size());
    plan->forward(k, k_hat);
    FftScratch scratch;
    std::vector<double> y(T);
    causal_convolve(*plan, x, k_hat, y, scratch);
    const auto ref = testing::direct_convolve(x, k);
    double num = 0.0, den = 0.0;
    for (std::size_t t = 0; t < T; ++t) {
      num = std::max(num, std::abs(y[t] - ref[t]));
      den = std::max(den, std::abs(ref[t]));
    }
    worst_fft = std::max(worst_fft, num / std::max(den, 1e-300));
  }
  const bool pass = sf >= 6 && sfb >= 6 && pf <= 16 && pfb <= 16 && has_ratio && worst_fft <= 1e-5;
  std::ostringstream os;
  os << "T 128->1024 growth: serial fwd x" << fmt(sf) << " fwd+bwd x" << fmt(sfb) << ", parallel fwd x" << fmt(pf)
     << " fwd+bwd x" << fmt(pfb) << "; serial/parallel at T=1024 fwd " << fmt(med["serial_msn:forward"][1024] / med["parallel_pmsn:forward"][1024])
     << " fwd+bwd "
     << fmt(med["serial_msn:forward_backward"][1024] / med["parallel_pmsn:forward_backward"][1024])
     << "; FFT vs direct max rel " << fmt(worst_fft) << " (1 worker)";
  return {pass, os.str()};
}

// ---------------------------------------------------------------------- 9

Verdict criterion9() {
  std::size_t traces = 0, spacing_fail = 0, envelope_fail = 0;
  double worst_spacing = 0.0;
  for (std::uint64_t seed = 0; seed < 4; ++seed) {
    const auto p = init_params(5, 8, seed).pmsn;
    for (std::size_t f = 0; f < p.neurons; ++f) {
      const std::size_t T = 2000;
      const auto tr = impulse_trace(p, T, f);
      double max_re = -1e300, amp_sum = 0.0;
      for (std::size_t j = 0; j < p.modes; ++j) {
        const auto z = p.lambda_dt[p.index(f, j)];
        max_re = std::max(max_re, z.real());
        amp_sum += std::abs(p.phi_s[p.index(f, j)] * p.Phi_c(f, j));
      }
      for (std::size_t j = 0; j < p.modes; ++j) {
        const double im = std::abs(p.lambda_dt[p.index(f, j)].imag());
        const auto zc = zero_crossings(tr.mode_values, p.modes, j);
        // Only crossings while the trace is far above the double noise floor.
        const double predicted = std::numbers::pi / im;
        ++traces;
        if (zc.size() < 3) {
          ++spacing_fail;
          continue;
        }
        for (std::size_t i = 1; i < zc.size(); ++i) {
          const double err = std::abs(static_cast<double>(zc[i] - zc[i - 1]) - predicted);
          worst_spacing = std::max(worst_spacing, err);
          spacing_fail += err > 1.0;
        }
      }
      for (std::size_t t = 0; t < T; ++t) {
        double total = 0.0;
        for (std::size_t j = 0; j < p.modes; ++j) total += tr.mode_values[t * p.modes + j];
        envelope_fail += std::abs(total) > amp_sum * std::exp(static_cast<double>(t) * max_re) * (1 + 1e-9);
      }
    }
  }
  std::ostringstream os;
  os << traces << " hidden-mode traces: worst |spacing - pi/|Im(lambda dt)|| = " << fmt(worst_spacing)
     << " steps, spacing failures " << spacing_fail << ", envelope violations " << envelope_fail;
  return {spacing_fail == 0 && envelope_fail == 0, os.str()};
}

}  // namespace
}  // namespace pmsn

int main(int argc, char** argv) {
  const std::map<int, std::function<pmsn::Verdict()>> criteria{
      {1, pmsn::criterion1}, {2, pmsn::criterion2}, {3, pmsn::criterion3},
      {4, pmsn::criterion4}, {5, pmsn::criterion5}, {6, pmsn::criterion6},
      {7, pmsn::criterion7}, {8, pmsn::criterion8}, {9, pmsn::criterion9}};
  std::set<int> wanted;
  for (int i = 1; i < argc; ++i) wanted.insert(std::atoi(argv[i]));
  if (wanted.empty())
    for (const auto& [k, fn] : criteria) wanted.insert(k);
  int failures = 0;
  for (int k : wanted) {
    const auto it = criteria.find(k);
    if (it == criteria.end()) {
      std::cerr << "no criterion " << k << '\n';
      return 2;
    }
    pmsn::Verdict v;
    try {
      v = it->second();
    } catch (const std::exception& e) {
      v = {false, std::string("exception: ") + e.what()};
    }
    failures += !v.pass;
    std::cout << "CRITERION " << k << ' ' << (v.pass ? "PASS" : "FAIL") << ": " << v.detail << std::endl;
  }
  return failures == 0 ? 0 : 1;
}
