#include <cmath>
#include <string>

#include "pmsn/error.hpp"
#include "pmsn/parallel.hpp"
#include "pmsn/parallel_for.hpp"

namespace pmsn {

using cd = std::complex<double>;

KernelCache build_kernel(const PmsnParams& p, std::size_t T, std::size_t pad_length, int workers) {
  if (T < 1) throw InvalidArgument("kernel length T must be >= 1");
  p.validate();
  const std::size_t L = pad_length == 0 ? linear_conv_length(T) : pad_length;
  if (!is_power_of_two(L) || L < 2 * T - 1)
    throw InvalidArgument("kernel pad length " + std::to_string(L) +
                          " must be a power of two >= 2T-1 = " + std::to_string(2 * T - 1));
  KernelCache c;
  c.T_used = T;
  c.L = L;
  c.neurons = p.neurons;
  c.source = &p;
  c.revision = p.revision;
  c.plan = RealFft::get(L);
  c.K.assign(p.neurons * T, 0.0);
  c.K_cum.assign(p.neurons * T, 0.0);
  c.K_imag.assign(p.neurons * T, 0.0);
  c.K_hat.assign(p.neurons * c.plan->spectrum_size(), cd{});

  parallel_for(p.neurons, workers, [&](std::size_t begin, std::size_t end) {
    for (std::size_t f = begin; f < end; ++f) {
      double* k = c.K.data() + f * T;
      double* ki = c.K_imag.data() + f * T;
      for (std::size_t j = 0; j < p.modes; ++j) {
        const cd w = p.t_bar(f, j);
        cd acc = p.phi_s[p.index(f, j)] * p.Phi_c(f, j);
        for (std::size_t t = 0; t < T; ++t) {
          if (!std::isfinite(acc.real()) || !std::isfinite(acc.imag()))
            throw NumericFailure("kernel of neuron " + std::to_string(f) + " mode " +
                                 std::to_string(j) + " is not finite at t = " + std::to_string(t) +
                                 " (|Tbar| = " + std::to_string(std::abs(w)) + ")");
          k[t] += acc.real();
          ki[t] += acc.imag();
          acc *= w;
        }
      }
      double run = 0.0;
      for (std::size_t t = 0; t < T; ++t) {
        run += k[t];
        c.K_cum[f * T + t] = run;
      }
      c.plan->forward({k, T}, {c.K_hat.data() + f * c.plan->spectrum_size(), c.plan->spectrum_size()});
    }
  });
  return c;
}

}  // namespace pmsn
