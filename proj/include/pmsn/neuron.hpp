#pragma once

#include <complex>
#include <cstdint>
#include <span>
#include <string_view>
#include <vector>

#include "pmsn/seq_tensor.hpp"
#include "pmsn/tridiag_eigen.hpp"

namespace pmsn {

enum class ResetMode { kFloor, kSubtract, kNone };
enum class Context { kLocal, kGlobal };
enum class Integrator { kEuler, kZoh };

ResetMode parse_reset_mode(std::string_view s);
Context parse_context(std::string_view s);
Integrator parse_integrator(std::string_view s);
std::string_view to_string(ResetMode m);
std::string_view to_string(Context c);

/// Single-compartment leaky integrate-and-fire neuron.
struct LIFParams {
  double alpha = 1.0;  ///< per-step decay exp(-dt / tau_m)
  double theta = 1.0;
  double v_rest = 0.0;

  static LIFParams from_tau(double tau_m, double dt, double theta = 1.0);
  void validate() const;
};

/// Continuous-time n-compartment neuron with nearest-neighbour coupling.
/// beta_fwd[k] is the coupling of compartment k+1 into k+2 (lower
/// diagonal), beta_bwd[k] the coupling of compartment k+2 into k+1 (upper
/// diagonal). Compartment n spikes and resets.
struct GeneralizedMCNParams {
  int n = 1;
  std::vector<double> tau;
  std::vector<double> beta_fwd;
  std::vector<double> beta_bwd;
  std::vector<double> gamma;
  double theta = 1.0;
  double dt = 1.0;

  void validate() const;
  /// Full n x n state matrix.
  Eigen::MatrixXd matrix() const;
  /// Leading (n-1) x (n-1) block coupling the hidden compartments.
  TridiagMatrix hidden_matrix() const;
};

/// Diagonalized, discretized parameters for one layer of `neurons` PMSN
/// neurons with `modes` = n-1 hidden eigenmodes each. Complex per-mode
/// arrays are neuron-major: index f * modes + j. Within a neuron, conjugate
/// pairs occupy slots (2k, 2k+1); an odd mode count leaves one real mode in
/// the last slot.
struct PmsnParams {
  std::size_t neurons = 0;
  std::size_t modes = 0;
  std::vector<std::complex<double>> lambda_dt;
  std::vector<std::complex<double>> phi_c;  ///< continuous input map P^-1 gamma
  std::vector<std::complex<double>> phi_s;  ///< readout row, applied to V_h
  std::vector<double> dt;                   ///< integration step per neuron, fixed
  std::vector<double> gamma_n;
  double theta = 1.0;
  double alpha_out = 1.0;

  struct Learnable {
    bool lambda_dt = true;
    bool phi_c = true;
    bool phi_s = true;
    bool gamma_n = true;
  } learnable;

  /// Bumped whenever values change; kernel caches key on it.
  std::uint64_t revision = 0;

  PmsnParams() = default;
  PmsnParams(std::size_t neurons, std::size_t modes);

  std::size_t compartments() const noexcept { return modes + 1; }
  std::size_t index(std::size_t f, std::size_t j) const noexcept { return f * modes + j; }
  bool is_real_mode(std::size_t j) const noexcept { return modes % 2 == 1 && j + 1 == modes; }

  /// exp(lambda_dt)
  std::complex<double> t_bar(std::size_t f, std::size_t j) const;
  /// Discrete input map dt * psi(lambda_dt) * phi_c.
  std::complex<double> Phi_c(std::size_t f, std::size_t j) const;

  void validate() const;
  /// Copies each pair's first member, conjugated, onto its partner and
  /// zeroes imaginary parts of the real mode.
  void enforce_pairing();
  /// Clamps Re(lambda_dt) to at most `max_real`.
  void clamp_stability(double max_real = -1e-4);
  void touch() noexcept { ++revision; }

  /// Builds parameters directly from discrete quantities: dt = 1 and
  /// phi_c = Phi_c / psi(lambda_dt).
  static PmsnParams from_discrete(std::size_t neurons, std::size_t modes,
                                  std::span<const std::complex<double>> lambda_dt,
                                  std::span<const std::complex<double>> Phi_c,
                                  std::span<const std::complex<double>> phi_s,
                                  std::span<const double> gamma_n);
};

/// psi(z) = (e^z - 1) / z with psi(0) = 1, accurate near zero.
std::complex<double> zoh_psi(std::complex<double> z);
/// d psi / dz.
std::complex<double> zoh_psi_prime(std::complex<double> z);

/// Zero-order-hold discretization of one neuron. Requires the feedback
/// from the output compartment into the last hidden one to be zero.
PmsnParams discretize(const GeneralizedMCNParams& p);
/// Layer version: neuron f is discretized from p[f].
PmsnParams discretize(std::span<const GeneralizedMCNParams> p);

struct InitResult {
  std::vector<GeneralizedMCNParams> mcn;  ///< one per neuron
  PmsnParams pmsn;
};

/// Standard initialization: tau_i = 2, coupling magnitude 5*i between
/// compartments i and i+1, no output feedback, hidden gains 1, output gain
/// drawn N(0, 1) and dt drawn U(1e-3, 1e-1) per neuron.
InitResult init_params(int n, std::size_t neurons, std::uint64_t seed);

template <typename Real>
struct LifResult {
  SeqTensor<Real> v;
  SeqTensor<Real> s;
};

template <typename Real>
LifResult<Real> lif_forward_serial(const LIFParams& p, const SeqTensor<Real>& I);

template <typename Real>
struct McnResult {
  std::vector<SeqTensor<Real>> v;  ///< v[k] is compartment k+1
  SeqTensor<Real> s;
};

/// Serial simulation of the full compartment model; every feature lane
/// shares the same parameters. Input enters each compartment scaled by
/// gamma_k; compartment n spikes with H(0) = 1 and resets by subtracting
/// theta on the following step.
template <typename Real>
McnResult<Real> mcn_forward_serial(const GeneralizedMCNParams& p, const SeqTensor<Real>& I,
                                   Integrator integrator);

struct SerialOptions {
  ResetMode reset = ResetMode::kFloor;
  bool clamp_ih = true;
  Context context = Context::kLocal;
  bool keep_hidden = false;
};

template <typename Real>
struct SerialOutput {
  SeqTensor<Real> v_s;
  SeqTensor<Real> S;
  SeqTensor<Real> I_h;  ///< before clamping
  SeqTensor<Real> v_r;  ///< discharge applied after each step
  ComplexSeq V_h;       ///< (B, T, F * modes) when keep_hidden
};

/// Step-by-step PMSN recurrence, computed in double; I_h is rounded to the
/// storage precision before it enters the output compartment.
template <typename Real>
SerialOutput<Real> pmsn_serial_forward(const PmsnParams& p, const SeqTensor<Real>& I,
                                       const SerialOptions& opt = {});

/// Per-lane time mean broadcast over time.
template <typename Real>
SeqTensor<Real> time_mean(const SeqTensor<Real>& I);

}  // namespace pmsn
