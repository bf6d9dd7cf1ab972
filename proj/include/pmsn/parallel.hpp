#pragma once

#include <complex>
#include <memory>
#include <span>
#include <vector>

#include "pmsn/fft.hpp"
#include "pmsn/neuron.hpp"
#include "pmsn/seq_tensor.hpp"

namespace pmsn {

/// Per-layer convolution kernel K[t] = sum_j Re(Phi_s,j Tbar_j^t Phi_c,j)
/// for t < T_used, plus its spectrum at the padded length L.
struct KernelCache {
  std::size_t T_used = 0;
  std::size_t L = 0;
  std::size_t neurons = 0;
  const PmsnParams* source = nullptr;
  std::uint64_t revision = 0;

  std::vector<double> K;                    ///< [f * T_used + t]
  std::vector<double> K_cum;                ///< inclusive prefix sums of K
  std::vector<double> K_imag;               ///< discarded imaginary residue
  std::vector<std::complex<double>> K_hat;  ///< [f * (L/2+1) + k]
  std::shared_ptr<const RealFft> plan;

  std::span<const double> kernel(std::size_t f) const { return {K.data() + f * T_used, T_used}; }
  std::span<const double> cumulative(std::size_t f) const {
    return {K_cum.data() + f * T_used, T_used};
  }
  std::span<const std::complex<double>> spectrum(std::size_t f) const {
    return {K_hat.data() + f * (L / 2 + 1), L / 2 + 1};
  }
  /// True when built from this very parameter object at its current
  /// revision for sequences of length T.
  bool matches(const PmsnParams& p, std::size_t T) const noexcept {
    return source == &p && revision == p.revision && T_used == T && neurons == p.neurons;
  }
};

/// Builds the kernel by repeated complex multiplication per eigenmode.
/// pad_length 0 selects linear_conv_length(T). Throws NumericFailure naming
/// the mode when an entry is not finite.
KernelCache build_kernel(const PmsnParams& p, std::size_t T, std::size_t pad_length = 0,
                         int workers = 1);

enum class ForwardMode { kParallel, kSerial };
ForwardMode parse_forward_mode(std::string_view s);

struct ForwardOptions {
  ForwardMode mode = ForwardMode::kParallel;
  Context context = Context::kLocal;
  ResetMode reset = ResetMode::kFloor;
  bool clamp_ih = true;
  bool keep_hidden = false;
  int workers = 1;
  std::size_t pad_length = 0;
};

template <typename Real>
struct ForwardOutput {
  SeqTensor<Real> S;
  SeqTensor<Real> v_s;
  SeqTensor<Real> I_h;     ///< before clamping
  SeqTensor<Real> cum_Ih;  ///< prefix sum of the (clamped) I_h
  SeqTensor<Real> v_r;     ///< discharge after each step
  ComplexSeq V_h;          ///< (B, T, F * modes) when keep_hidden
  std::shared_ptr<const KernelCache> kernel;
};

/// I_h = (x * K) + gamma_n * I where x is I (local) or its per-lane time
/// mean (global). Throws InvalidArgument on shape mismatch.
template <typename Real>
SeqTensor<Real> hidden_forward_parallel(const KernelCache& cache, const PmsnParams& p,
                                        const SeqTensor<Real>& I, Context context = Context::kLocal,
                                        int workers = 1);

/// Hidden eigenmode potentials by FFT convolution, (B, T, F * modes).
template <typename Real>
ComplexSeq hidden_states_parallel(const PmsnParams& p, const SeqTensor<Real>& I,
                                  Context context = Context::kLocal, int workers = 1);

/// Floor-reset output compartment through a prefix sum:
/// v_s[t] = cum[t] - theta * floor(cum[t-1] / theta).
template <typename Real>
ForwardOutput<Real> output_forward_parallel(const SeqTensor<Real>& I_h, double theta, bool clamp,
                                            int workers = 1);

/// Dispatches to the serial oracle or the parallel path. Parallel mode
/// refuses reset != floor, alpha_out != 1 and clamp_ih = false with
/// InvalidArgument. `cache` is reused when it matches (p, T).
template <typename Real>
ForwardOutput<Real> layer_forward(const PmsnParams& p, const SeqTensor<Real>& I,
                                  const ForwardOptions& opt = {},
                                  std::shared_ptr<const KernelCache> cache = nullptr);

}  // namespace pmsn
