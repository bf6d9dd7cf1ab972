#pragma once

#include <complex>
#include <cstddef>
#include <memory>
#include <span>
#include <vector>

#include "pmsn/seq_tensor.hpp"

namespace pmsn {

bool is_power_of_two(std::size_t n) noexcept;

/// Smallest power of two >= 2T-1, the padding that turns circular
/// convolution of two length-T sequences into linear convolution.
std::size_t linear_conv_length(std::size_t time) noexcept;

/// Discrete Fourier transform along the time axis, zero-padding each lane
/// to `len`. Forward is unnormalized; fft_inverse divides by `len`.
/// Throws InvalidArgument unless `len` is a power of two >= x.time().
ComplexSeq fft_forward(const ComplexSeq& x, std::size_t len);
ComplexSeq fft_inverse(const ComplexSeq& x, std::size_t len);

/// Cached real-to-complex plan pair of one power-of-two length. Execution
/// is thread-safe; each call uses caller-provided buffers.
class RealFft {
 public:
  static std::shared_ptr<const RealFft> get(std::size_t len);
  ~RealFft();
  RealFft(const RealFft&) = delete;
  RealFft& operator=(const RealFft&) = delete;

  std::size_t length() const noexcept { return len_; }
  std::size_t spectrum_size() const noexcept { return len_ / 2 + 1; }

  /// `in` holds up to len samples; the rest is zero-padded.
  void forward(std::span<const double> in, std::span<std::complex<double>> out) const;
  /// Unnormalized inverse; writes len samples.
  void inverse(std::span<const std::complex<double>> in, std::span<double> out) const;

 private:
  explicit RealFft(std::size_t len);
  std::size_t len_;
  void* r2c_ = nullptr;
  void* c2r_ = nullptr;
};

/// Scratch buffers for one worker doing lane convolutions.
struct FftScratch {
  std::vector<double> time;
  std::vector<std::complex<double>> freq;
  void resize(const RealFft& plan) {
    time.assign(plan.length(), 0.0);
    freq.assign(plan.spectrum_size(), {});
  }
};

/// out[t] = sum_{i<=t} x[i] k[t-i] for t < out.size(), given k's spectrum.
void causal_convolve(const RealFft& plan, std::span<const double> x,
                     std::span<const std::complex<double>> kernel_hat, std::span<double> out,
                     FftScratch& scratch);

/// out[t] = sum_{i>=t} x[i] k[i-t] for t < out.size() (time-reversed
/// convolution with the same kernel spectrum).
void causal_correlate(const RealFft& plan, std::span<const double> x,
                      std::span<const std::complex<double>> kernel_hat, std::span<double> out,
                      FftScratch& scratch);

}  // namespace pmsn
