#include <cmath>
#include <random>
#include <string>

#include "pmsn/error.hpp"
#include "pmsn/neuron.hpp"

namespace pmsn {

using cd = std::complex<double>;

ResetMode parse_reset_mode(std::string_view s) {
  if (s == "floor") return ResetMode::kFloor;
  if (s == "subtract") return ResetMode::kSubtract;
  if (s == "none") return ResetMode::kNone;
  throw InvalidArgument("unknown reset mode '" + std::string(s) + "' (floor|subtract|none)");
}

Context parse_context(std::string_view s) {
  if (s == "local") return Context::kLocal;
  if (s == "global") return Context::kGlobal;
  throw InvalidArgument("unknown context '" + std::string(s) + "' (local|global)");
}

Integrator parse_integrator(std::string_view s) {
  if (s == "euler") return Integrator::kEuler;
  if (s == "zoh") return Integrator::kZoh;
  throw InvalidArgument("unknown integrator '" + std::string(s) + "' (euler|zoh)");
}

std::string_view to_string(ResetMode m) {
  switch (m) {
    case ResetMode::kFloor: return "floor";
    case ResetMode::kSubtract: return "subtract";
    case ResetMode::kNone: return "none";
  }
  return "?";
}

std::string_view to_string(Context c) { return c == Context::kLocal ? "local" : "global"; }

LIFParams LIFParams::from_tau(double tau_m, double dt, double theta) {
  if (!(tau_m > 0) || !(dt > 0)) throw InvalidArgument("LIF tau_m and dt must be positive");
  LIFParams p;
  p.alpha = std::exp(-dt / tau_m);
  p.theta = theta;
  p.validate();
  return p;
}

void LIFParams::validate() const {
  if (!(alpha > 0 && alpha <= 1)) throw InvalidArgument("LIF alpha must lie in (0, 1]");
  if (!(theta > 0)) throw InvalidArgument("LIF theta must be positive");
}

void GeneralizedMCNParams::validate() const {
  if (n < 1) throw InvalidArgument("compartment count must be >= 1");
  const auto un = static_cast<std::size_t>(n);
  if (tau.size() != un || gamma.size() != un || beta_fwd.size() != un - 1 ||
      beta_bwd.size() != un - 1)
    throw InvalidArgument("compartment parameter lengths do not match n = " + std::to_string(n));
  for (double t : tau)
    if (!(t > 0)) throw InvalidArgument("membrane time constants must be positive");
  if (!(theta > 0)) throw InvalidArgument("threshold must be positive");
  if (!(dt > 0)) throw InvalidArgument("dt must be positive");
}

Eigen::MatrixXd GeneralizedMCNParams::matrix() const {
  validate();
  Eigen::MatrixXd a = Eigen::MatrixXd::Zero(n, n);
  for (int k = 0; k < n; ++k) a(k, k) = -1.0 / tau[k];
  for (int k = 0; k + 1 < n; ++k) {
    a(k, k + 1) = beta_bwd[k];
    a(k + 1, k) = beta_fwd[k];
  }
  return a;
}

TridiagMatrix GeneralizedMCNParams::hidden_matrix() const {
  validate();
  if (n < 2) throw InvalidArgument("a neuron with n = 1 has no hidden compartments");
  TridiagMatrix m;
  for (int k = 0; k < n - 1; ++k) m.diag.push_back(-1.0 / tau[k]);
  for (int k = 0; k + 2 < n; ++k) {
    m.upper.push_back(beta_bwd[k]);
    m.lower.push_back(beta_fwd[k]);
  }
  return m;
}

PmsnParams::PmsnParams(std::size_t neurons_, std::size_t modes_)
    : neurons(neurons_),
      modes(modes_),
      lambda_dt(neurons_ * modes_),
      phi_c(neurons_ * modes_),
      phi_s(neurons_ * modes_),
      dt(neurons_, 1.0),
      gamma_n(neurons_, 0.0) {}

cd PmsnParams::t_bar(std::size_t f, std::size_t j) const { return std::exp(lambda_dt[index(f, j)]); }

cd PmsnParams::Phi_c(std::size_t f, std::size_t j) const {
  const auto i = index(f, j);
  return dt[f] * zoh_psi(lambda_dt[i]) * phi_c[i];
}

void PmsnParams::validate() const {
  const std::size_t total = neurons * modes;
  if (lambda_dt.size() != total || phi_c.size() != total || phi_s.size() != total ||
      dt.size() != neurons || gamma_n.size() != neurons)
    throw InvalidArgument("PMSN parameter arrays do not match (neurons, modes)");
  if (!(theta > 0)) throw InvalidArgument("threshold must be positive");
  for (std::size_t f = 0; f < neurons; ++f) {
    if (!(dt[f] > 0)) throw InvalidArgument("dt must be positive");
    for (std::size_t j = 0; j + 1 < modes; j += 2) {
      const auto a = index(f, j), b = a + 1;
      if (lambda_dt[b] != std::conj(lambda_dt[a]) || phi_c[b] != std::conj(phi_c[a]) ||
          phi_s[b] != std::conj(phi_s[a]))
        throw InvalidArgument("modes " + std::to_string(j) + "/" + std::to_string(j + 1) +
                              " of neuron " + std::to_string(f) + " are not conjugate-paired");
    }
    if (modes % 2 == 1) {
      const auto r = index(f, modes - 1);
      if (lambda_dt[r].imag() != 0 || phi_c[r].imag() != 0 || phi_s[r].imag() != 0)
        throw InvalidArgument("unpaired mode of neuron " + std::to_string(f) + " must be real");
    }
  }
}

void PmsnParams::enforce_pairing() {
  for (std::size_t f = 0; f < neurons; ++f) {
    for (std::size_t j = 0; j + 1 < modes; j += 2) {
      const auto a = index(f, j), b = a + 1;
      lambda_dt[b] = std::conj(lambda_dt[a]);
      phi_c[b] = std::conj(phi_c[a]);
      phi_s[b] = std::conj(phi_s[a]);
    }
    if (modes % 2 == 1) {
      const auto r = index(f, modes - 1);
      lambda_dt[r] = lambda_dt[r].real();
      phi_c[r] = phi_c[r].real();
      phi_s[r] = phi_s[r].real();
    }
  }
  touch();
}

void PmsnParams::clamp_stability(double max_real) {
  for (auto& z : lambda_dt)
    if (z.real() > max_real) z.real(max_real);
  touch();
}

PmsnParams PmsnParams::from_discrete(std::size_t neurons, std::size_t modes,
                                     std::span<const cd> lambda_dt, std::span<const cd> Phi_c,
                                     std::span<const cd> phi_s, std::span<const double> gamma_n) {
  PmsnParams p(neurons, modes);
  if (lambda_dt.size() != neurons * modes || Phi_c.size() != neurons * modes ||
      phi_s.size() != neurons * modes || gamma_n.size() != neurons)
    throw InvalidArgument("from_discrete: array lengths do not match (neurons, modes)");
  for (std::size_t i = 0; i < neurons * modes; ++i) {
    p.lambda_dt[i] = lambda_dt[i];
    p.phi_c[i] = Phi_c[i] / zoh_psi(lambda_dt[i]);
    p.phi_s[i] = phi_s[i];
  }
  std::copy(gamma_n.begin(), gamma_n.end(), p.gamma_n.begin());
  return p;
}

cd zoh_psi(cd z) {
  if (std::abs(z) < 1e-8) return 1.0 + z / 2.0 + z * z / 6.0;
  const double x = z.real(), y = z.imag();
  const double s = std::sin(0.5 * y);
  const cd em1(std::expm1(x) * std::cos(y) - 2.0 * s * s, std::exp(x) * std::sin(y));
  return em1 / z;
}

cd zoh_psi_prime(cd z) {
  if (std::abs(z) < 1e-3) return 0.5 + z / 3.0 + z * z / 8.0 + z * z * z / 30.0;
  return (std::exp(z) - zoh_psi(z)) / z;
}

PmsnParams discretize(const GeneralizedMCNParams& p) {
  return discretize(std::span<const GeneralizedMCNParams>(&p, 1));
}

PmsnParams discretize(std::span<const GeneralizedMCNParams> layer) {
  if (layer.empty()) throw InvalidArgument("discretize needs at least one neuron");
  const int n = layer[0].n;
  if (n < 2) throw InvalidArgument("discretize needs n >= 2");
  PmsnParams out(layer.size(), static_cast<std::size_t>(n - 1));
  out.theta = layer[0].theta;
  for (std::size_t f = 0; f < layer.size(); ++f) {
    const auto& p = layer[f];
    p.validate();
    if (p.n != n) throw InvalidArgument("all neurons of a layer must share n");
    if (p.theta != out.theta) throw InvalidArgument("all neurons of a layer must share theta");
    if (p.beta_bwd[n - 2] != 0.0)
      throw InvalidArgument("output-to-hidden feedback must be zero for the split form");
    const EigenDecomposition eig = tridiag_skew_eigen(p.hidden_matrix());
    Eigen::VectorXcd gamma_h(n - 1);
    for (int k = 0; k < n - 1; ++k) gamma_h(k) = p.gamma[k];
    const Eigen::VectorXcd phi_c = eig.P_inv * gamma_h;
    const Eigen::RowVectorXcd phi_s = p.beta_fwd[n - 2] * eig.P.row(n - 2);
    for (int j = 0; j < n - 1; ++j) {
      const auto i = out.index(f, j);
      out.lambda_dt[i] = eig.eigenvalues(j) * p.dt;
      out.phi_c[i] = phi_c(j);
      out.phi_s[i] = phi_s(j);
    }
    out.dt[f] = p.dt;
    out.gamma_n[f] = p.gamma[n - 1];
  }
  // The structured solver pairs exactly; this only cleans rounding in the
  // general path.
  out.enforce_pairing();
  return out;
}

InitResult init_params(int n, std::size_t neurons, std::uint64_t seed) {
  if (n < 2) throw InvalidArgument("init_params needs n >= 2");
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> dt_dist(1e-3, 1e-1);
  std::normal_distribution<double> gain_dist(0.0, 1.0);
  InitResult out;
  out.mcn.reserve(neurons);
  for (std::size_t f = 0; f < neurons; ++f) {
    GeneralizedMCNParams p;
    p.n = n;
    p.tau.assign(n, 2.0);
    p.gamma.assign(n, 1.0);
    for (int i = 1; i < n; ++i) {
      p.beta_bwd.push_back(5.0 * i);
      p.beta_fwd.push_back(-5.0 * i);
    }
    p.beta_bwd[n - 2] = 0.0;
    p.dt = dt_dist(rng);
    p.gamma[n - 1] = gain_dist(rng);
    out.mcn.push_back(std::move(p));
  }
  out.pmsn = discretize(out.mcn);
  return out;
}

}  // namespace pmsn
