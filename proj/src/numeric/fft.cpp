#include "pmsn/fft.hpp"

#include <fftw3.h>

#include <map>
#include <mutex>

#include "pmsn/error.hpp"

namespace pmsn {
namespace {

// FFTW's planner is not re-entrant; executing existing plans is.
std::mutex& planner_mutex() {
  static std::mutex m;
  return m;
}

fftw_complex* as_fftw(std::complex<double>* p) { return reinterpret_cast<fftw_complex*>(p); }

void check_length(std::size_t len, std::size_t time) {
  if (!is_power_of_two(len))
    throw InvalidArgument("fft length " + std::to_string(len) + " is not a power of two");
  if (len < time)
    throw InvalidArgument("fft length " + std::to_string(len) + " shorter than sequence length " +
                          std::to_string(time));
}

ComplexSeq c2c(const ComplexSeq& x, std::size_t len, int sign) {
  check_length(len, x.time());
  ComplexSeq out(x.batch(), len, x.features());
  std::vector<std::complex<double>> buf(len);
  fftw_plan plan;
  {
    std::lock_guard lock(planner_mutex());
    plan = fftw_plan_dft_1d(static_cast<int>(len), as_fftw(buf.data()), as_fftw(buf.data()), sign,
                            FFTW_ESTIMATE);
  }
  const double scale = sign == FFTW_BACKWARD ? 1.0 / static_cast<double>(len) : 1.0;
  for (std::size_t b = 0; b < x.batch(); ++b)
    for (std::size_t f = 0; f < x.features(); ++f) {
      std::fill(buf.begin(), buf.end(), std::complex<double>{});
      for (std::size_t t = 0; t < x.time(); ++t) buf[t] = x.at(b, t, f);
      fftw_execute(plan);
      for (std::size_t t = 0; t < len; ++t) out.set(b, t, f, buf[t] * scale);
    }
  {
    std::lock_guard lock(planner_mutex());
    fftw_destroy_plan(plan);
  }
  return out;
}

}  // namespace

bool is_power_of_two(std::size_t n) noexcept { return n != 0 && (n & (n - 1)) == 0; }

std::size_t linear_conv_length(std::size_t time) noexcept {
  const std::size_t need = time == 0 ? 1 : 2 * time - 1;
  std::size_t len = 1;
  while (len < need) len <<= 1;
  return len;
}

ComplexSeq fft_forward(const ComplexSeq& x, std::size_t len) { return c2c(x, len, FFTW_FORWARD); }

ComplexSeq fft_inverse(const ComplexSeq& x, std::size_t len) {
  return c2c(x, len, FFTW_BACKWARD);
}

std::shared_ptr<const RealFft> RealFft::get(std::size_t len) {
  if (!is_power_of_two(len))
    throw InvalidArgument("fft length " + std::to_string(len) + " is not a power of two");
  static std::mutex cache_mutex;
  static std::map<std::size_t, std::shared_ptr<const RealFft>> cache;
  std::lock_guard lock(cache_mutex);
  auto& slot = cache[len];
  if (!slot) slot = std::shared_ptr<const RealFft>(new RealFft(len));
  return slot;
}

RealFft::RealFft(std::size_t len) : len_(len) {
  std::lock_guard lock(planner_mutex());
  double* in = fftw_alloc_real(len);
  fftw_complex* out = fftw_alloc_complex(len / 2 + 1);
  const int n = static_cast<int>(len);
  r2c_ = fftw_plan_dft_r2c_1d(n, in, out, FFTW_ESTIMATE | FFTW_UNALIGNED);
  c2r_ = fftw_plan_dft_c2r_1d(n, out, in, FFTW_ESTIMATE | FFTW_UNALIGNED);
  fftw_free(in);
  fftw_free(out);
  if (!r2c_ || !c2r_) throw NumericFailure("FFTW failed to create a plan of length " + std::to_string(len));
}

RealFft::~RealFft() {
  std::lock_guard lock(planner_mutex());
  fftw_destroy_plan(static_cast<fftw_plan>(r2c_));
  fftw_destroy_plan(static_cast<fftw_plan>(c2r_));
}

void RealFft::forward(std::span<const double> in, std::span<std::complex<double>> out) const {
  thread_local std::vector<double> padded;
  padded.assign(len_, 0.0);
  std::copy_n(in.begin(), std::min(in.size(), len_), padded.begin());
  fftw_execute_dft_r2c(static_cast<fftw_plan>(r2c_), padded.data(), as_fftw(out.data()));
}

void RealFft::inverse(std::span<const std::complex<double>> in, std::span<double> out) const {
  // c2r destroys its input.
  thread_local std::vector<std::complex<double>> work;
  work.assign(in.begin(), in.begin() + static_cast<std::ptrdiff_t>(spectrum_size()));
  fftw_execute_dft_c2r(static_cast<fftw_plan>(c2r_), as_fftw(work.data()), out.data());
}

void causal_convolve(const RealFft& plan, std::span<const double> x,
                     std::span<const std::complex<double>> kernel_hat, std::span<double> out,
                     FftScratch& scratch) {
  if (scratch.time.size() != plan.length()) scratch.resize(plan);
  plan.forward(x, scratch.freq);
  for (std::size_t k = 0; k < plan.spectrum_size(); ++k) scratch.freq[k] *= kernel_hat[k];
  plan.inverse(scratch.freq, scratch.time);
  const double scale = 1.0 / static_cast<double>(plan.length());
  for (std::size_t t = 0; t < out.size(); ++t) out[t] = scratch.time[t] * scale;
}

void causal_correlate(const RealFft& plan, std::span<const double> x,
                      std::span<const std::complex<double>> kernel_hat, std::span<double> out,
                      FftScratch& scratch) {
  if (scratch.time.size() != plan.length()) scratch.resize(plan);
  plan.forward(x, scratch.freq);
  for (std::size_t k = 0; k < plan.spectrum_size(); ++k) scratch.freq[k] *= std::conj(kernel_hat[k]);
  plan.inverse(scratch.freq, scratch.time);
  const double scale = 1.0 / static_cast<double>(plan.length());
  for (std::size_t t = 0; t < out.size(); ++t) out[t] = scratch.time[t] * scale;
}

}  // namespace pmsn
