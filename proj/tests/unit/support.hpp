#pragma once

#include <cmath>
#include <complex>
#include <numbers>
#include <random>
#include <vector>

#include <Eigen/Dense>

#include "pmsn/grad.hpp"
#include "pmsn/neuron.hpp"
#include "pmsn/parallel.hpp"
#include "pmsn/seq_tensor.hpp"

namespace pmsn::testing {

/// Random stable parameters with exact conjugate pairing: per-step decay
/// Re(lambda dt) in [-0.6, -0.005], frequency Im(lambda dt) in [0, pi].
inline PmsnParams random_params(std::size_t neurons, std::size_t modes, std::mt19937_64& rng,
                                double gain = 1.0) {
  std::uniform_real_distribution<double> re(-0.6, -0.005), im(0.0, std::numbers::pi),
      amp(-1.0, 1.0);
  PmsnParams p(neurons, modes);
  for (std::size_t f = 0; f < neurons; ++f) {
    p.dt[f] = 1.0;
    p.gamma_n[f] = amp(rng);
    for (std::size_t j = 0; j < modes; ++j) {
      const auto i = p.index(f, j);
      p.lambda_dt[i] = {re(rng), im(rng)};
      p.phi_c[i] = {gain * amp(rng), gain * amp(rng)};
      p.phi_s[i] = {gain * amp(rng), gain * amp(rng)};
    }
  }
  p.enforce_pairing();
  return p;
}

template <typename Real>
SeqTensor<Real> random_input(std::size_t B, std::size_t T, std::size_t F, std::mt19937_64& rng,
                             double mean = 0.3, double sd = 1.0) {
  std::normal_distribution<double> nd(mean, sd);
  SeqTensor<Real> x(B, T, F);
  for (auto& v : x.data()) v = static_cast<Real>(nd(rng));
  return x;
}

/// Direct O(T^2) causal convolution.
inline std::vector<double> direct_convolve(const std::vector<double>& x, const std::vector<double>& k) {
  std::vector<double> y(x.size(), 0.0);
  for (std::size_t t = 0; t < x.size(); ++t)
    for (std::size_t s = 0; s <= t && t - s < k.size(); ++s) y[t] += k[t - s] * x[s];
  return y;
}

/// Kernel from its definition, power by power in long double.
inline std::vector<double> kernel_by_powers(const PmsnParams& p, std::size_t f, std::size_t T) {
  std::vector<double> K(T, 0.0);
  for (std::size_t j = 0; j < p.modes; ++j) {
    const auto i = p.index(f, j);
    const std::complex<long double> w(std::exp(p.lambda_dt[i].real()) * std::cos(p.lambda_dt[i].imag()),
                                      std::exp(p.lambda_dt[i].real()) * std::sin(p.lambda_dt[i].imag()));
    const std::complex<long double> c(p.Phi_c(f, j).real(), p.Phi_c(f, j).imag());
    const std::complex<long double> s(p.phi_s[i].real(), p.phi_s[i].imag());
    for (std::size_t t = 0; t < T; ++t)
      K[t] += static_cast<double>((s * std::pow(w, static_cast<long double>(t)) * c).real());
  }
  return K;
}

inline double rel_err(double a, double b, double floor = 1e-12) {
  return std::abs(a - b) / std::max({std::abs(a), std::abs(b), floor});
}

// Adjoint of the output compartment, written out directly.
inline SeqTensor<double> reference_adjoint(const PmsnParams& p, const ForwardOutput<double>& out,
                                           const ForwardOptions& opt, const SeqTensor<double>& dS,
                                           const SurrogateConfig& c) {
  SeqTensor<double> e(dS.batch(), dS.time(), dS.features());
  const double carry = p.alpha_out - (opt.reset == ResetMode::kFloor ? 1.0 : 0.0);
  for (std::size_t b = 0; b < dS.batch(); ++b)
    for (std::size_t f = 0; f < dS.features(); ++f) {
      double a = 0.0;
      for (std::size_t t = dS.time(); t-- > 0;) {
        a = dS(b, t, f) * surrogate(out.v_s(b, t, f), p.theta, c) + carry * a;
        e(b, t, f) = (!opt.clamp_ih || out.I_h(b, t, f) >= 0) ? a : 0.0;
      }
    }
  return e;
}

// Direct double loop: dI[t] = gamma_n e[t] + sum_{i>=t} e[i] Phi_s Tbar^{i-t} Phi_c.
inline SeqTensor<double> dense_input_grad(const PmsnParams& p, const SeqTensor<double>& e) {
  SeqTensor<double> d(e.batch(), e.time(), e.features());
  for (std::size_t f = 0; f < e.features(); ++f) {
    const auto K = kernel_by_powers(p, f, e.time());
    for (std::size_t b = 0; b < e.batch(); ++b)
      for (std::size_t t = 0; t < e.time(); ++t) {
        double acc = p.gamma_n[f] * e(b, t, f);
        for (std::size_t i = t; i < e.time(); ++i) acc += e(b, i, f) * K[i - t];
        d(b, t, f) = acc;
      }
  }
  return d;
}

/// Smoothed-model fixture: paper initialization with dt rescaled to 0.5.
inline FdModel fd_model(std::uint64_t seed, std::size_t n, std::size_t in, std::size_t F) {
  std::mt19937_64 rng(seed);
  FdModel m;
  m.params = init_params(static_cast<int>(n), F, seed).pmsn;
  // Larger steps than the initialization draws make every mode matter.
  for (std::size_t f = 0; f < F; ++f) {
    const double scale = 0.5 / m.params.dt[f];
    m.params.dt[f] *= scale;
    for (std::size_t j = 0; j < m.params.modes; ++j) m.params.lambda_dt[m.params.index(f, j)] *= scale;
  }
  m.params.touch();
  m.in_features = in;
  std::normal_distribution<double> nd(0.0, 0.7);
  m.W.resize(in * F);
  m.b.resize(F);
  for (auto& v : m.W) v = nd(rng);
  for (auto& v : m.b) v = 0.3 + 0.1 * nd(rng);
  m.surrogate.gamma_width = 1.0;
  return m;
}

// Fine-step explicit Euler of the continuous hidden subsystem with the
// input rate held over each step.
inline Eigen::MatrixXd euler_hidden(const Eigen::MatrixXd& A, const Eigen::VectorXd& g,
                             const std::vector<double>& x, double dt, int sub) {
  const auto n = A.rows();
  Eigen::MatrixXd out(n, static_cast<Eigen::Index>(x.size()));
  Eigen::VectorXd v = Eigen::VectorXd::Zero(n);
  const double h = dt / sub;
  for (std::size_t t = 0; t < x.size(); ++t) {
    for (int k = 0; k < sub; ++k) v += h * (A * v + g * x[t]);
    out.col(static_cast<Eigen::Index>(t)) = v;
  }
  return out;
}

}  // namespace pmsn::testing
