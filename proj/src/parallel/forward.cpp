#include <cmath>

#include "pmsn/error.hpp"
#include "pmsn/parallel.hpp"
#include "pmsn/parallel_for.hpp"

namespace pmsn {

using cd = std::complex<double>;

ForwardMode parse_forward_mode(std::string_view s) {
  if (s == "parallel") return ForwardMode::kParallel;
  if (s == "serial") return ForwardMode::kSerial;
  throw InvalidArgument("unknown forward mode '" + std::string(s) + "' (parallel|serial)");
}

namespace {

template <typename Real>
void check_shape(const PmsnParams& p, const SeqTensor<Real>& I) {
  if (I.features() != p.neurons)
    throw InvalidArgument("input has " + std::to_string(I.features()) + " features, layer has " +
                          std::to_string(p.neurons) + " neurons");
}

// Same summation order and rounding as time_mean().
template <typename Real>
double lane_mean(const SeqTensor<Real>& I, std::size_t b, std::size_t f) {
  double sum = 0.0;
  for (std::size_t t = 0; t < I.time(); ++t) sum += static_cast<double>(I(b, t, f));
  return static_cast<double>(static_cast<Real>(sum / static_cast<double>(I.time())));
}

}  // namespace

template <typename Real>
SeqTensor<Real> hidden_forward_parallel(const KernelCache& cache, const PmsnParams& p,
                                        const SeqTensor<Real>& I, Context context, int workers) {
  check_shape(p, I);
  if (I.time() != cache.T_used)
    throw InvalidArgument("input length " + std::to_string(I.time()) + " does not match kernel length " +
                          std::to_string(cache.T_used));
  if (cache.neurons != p.neurons) throw InvalidArgument("kernel cache built for a different layer");
  const std::size_t B = I.batch(), T = I.time(), F = I.features();
  SeqTensor<Real> out(B, T, F);
  const LaneMajor x = to_lane_major(I);
  parallel_for(B * F, workers, [&](std::size_t begin, std::size_t end) {
    FftScratch scratch;
    std::vector<double> conv(T);
    for (std::size_t lane = begin; lane < end; ++lane) {
      const std::size_t b = lane / F, f = lane % F;
      if (context == Context::kLocal) {
        causal_convolve(*cache.plan, x.lane(b, f), cache.spectrum(f), conv, scratch);
      } else {
        const double m = lane_mean(I, b, f);
        const auto kc = cache.cumulative(f);
        for (std::size_t t = 0; t < T; ++t) conv[t] = m * kc[t];
      }
      const double g = p.gamma_n[f];
      for (std::size_t t = 0; t < T; ++t)
        out(b, t, f) = static_cast<Real>(conv[t] + g * static_cast<double>(I(b, t, f)));
    }
  });
  return out;
}

template <typename Real>
ComplexSeq hidden_states_parallel(const PmsnParams& p, const SeqTensor<Real>& I, Context context,
                                  int workers) {
  check_shape(p, I);
  const std::size_t B = I.batch(), T = I.time(), F = I.features(), M = p.modes;
  ComplexSeq out(B, T, F * M);
  if (T == 0 || M == 0) return out;
  const auto plan = RealFft::get(linear_conv_length(T));
  const std::size_t S = plan->spectrum_size();
  // Real and imaginary parts of Phi_c Tbar^t as two real kernels per mode.
  std::vector<cd> spec_re(F * M * S), spec_im(F * M * S);
  {
    std::vector<double> kr(T), ki(T);
    for (std::size_t f = 0; f < F; ++f)
      for (std::size_t j = 0; j < M; ++j) {
        const cd w = p.t_bar(f, j);
        cd acc = p.Phi_c(f, j);
        for (std::size_t t = 0; t < T; ++t, acc *= w) {
          kr[t] = acc.real();
          ki[t] = acc.imag();
        }
        plan->forward(kr, {spec_re.data() + (f * M + j) * S, S});
        plan->forward(ki, {spec_im.data() + (f * M + j) * S, S});
      }
  }
  const LaneMajor x = to_lane_major(context == Context::kGlobal ? time_mean(I) : I);
  auto re = out.re();
  auto im = out.im();
  parallel_for(B * F, workers, [&](std::size_t begin, std::size_t end) {
    FftScratch scratch;
    std::vector<double> a(T), c(T);
    for (std::size_t lane = begin; lane < end; ++lane) {
      const std::size_t b = lane / F, f = lane % F;
      for (std::size_t j = 0; j < M; ++j) {
        causal_convolve(*plan, x.lane(b, f), {spec_re.data() + (f * M + j) * S, S}, a, scratch);
        causal_convolve(*plan, x.lane(b, f), {spec_im.data() + (f * M + j) * S, S}, c, scratch);
        for (std::size_t t = 0; t < T; ++t) {
          const auto i = out.index(b, t, f * M + j);
          re[i] = a[t];
          im[i] = c[t];
        }
      }
    }
  });
  return out;
}

template <typename Real>
ForwardOutput<Real> output_forward_parallel(const SeqTensor<Real>& I_h, double theta, bool clamp,
                                            int workers) {
  if (!(theta > 0)) throw InvalidArgument("threshold must be positive");
  const std::size_t B = I_h.batch(), T = I_h.time(), F = I_h.features();
  ForwardOutput<Real> out;
  out.S = SeqTensor<Real>(B, T, F);
  out.v_s = SeqTensor<Real>(B, T, F);
  out.I_h = I_h;
  out.cum_Ih = SeqTensor<Real>(B, T, F);
  out.v_r = SeqTensor<Real>(B, T, F);
  parallel_for(B * F, workers, [&](std::size_t begin, std::size_t end) {
    for (std::size_t lane = begin; lane < end; ++lane) {
      const std::size_t b = lane / F, f = lane % F;
      double cum = 0.0, prev = 0.0;
      for (std::size_t t = 0; t < T; ++t) {
        const double u = static_cast<double>(I_h(b, t, f));
        cum += clamp ? std::max(u, 0.0) : u;
        const double v = cum - theta * std::floor(prev / theta);
        const bool spike = v >= theta;
        out.cum_Ih(b, t, f) = static_cast<Real>(cum);
        out.v_s(b, t, f) = static_cast<Real>(v);
        out.S(b, t, f) = spike ? Real(1) : Real(0);
        out.v_r(b, t, f) = static_cast<Real>(spike ? theta * std::floor(v / theta) : 0.0);
        prev = cum;
      }
    }
  });
  return out;
}

template <typename Real>
ForwardOutput<Real> layer_forward(const PmsnParams& p, const SeqTensor<Real>& I,
                                  const ForwardOptions& opt, std::shared_ptr<const KernelCache> cache) {
  check_shape(p, I);
  if (opt.mode == ForwardMode::kSerial) {
    SerialOptions so{opt.reset, opt.clamp_ih, opt.context, opt.keep_hidden};
    auto s = pmsn_serial_forward(p, I, so);
    ForwardOutput<Real> out;
    out.S = std::move(s.S);
    out.v_s = std::move(s.v_s);
    out.v_r = std::move(s.v_r);
    out.cum_Ih = SeqTensor<Real>(I.batch(), I.time(), I.features());
    for (std::size_t b = 0; b < I.batch(); ++b)
      for (std::size_t f = 0; f < I.features(); ++f) {
        double cum = 0.0;
        for (std::size_t t = 0; t < I.time(); ++t) {
          const double u = static_cast<double>(s.I_h(b, t, f));
          cum += opt.clamp_ih ? std::max(u, 0.0) : u;
          out.cum_Ih(b, t, f) = static_cast<Real>(cum);
        }
      }
    out.I_h = std::move(s.I_h);
    out.V_h = std::move(s.V_h);
    return out;
  }
  if (opt.reset != ResetMode::kFloor)
    throw InvalidArgument("parallel mode supports only floor reset; use forward.mode = serial for '" +
                          std::string(to_string(opt.reset)) + "'");
  if (p.alpha_out != 1.0)
    throw InvalidArgument("parallel mode requires alpha_out = 1; use forward.mode = serial");
  if (!opt.clamp_ih)
    throw InvalidArgument("parallel mode requires clamp_ih = true; use forward.mode = serial");
  if (!cache || !cache->matches(p, I.time()))
    cache = std::make_shared<const KernelCache>(build_kernel(p, I.time(), opt.pad_length, opt.workers));
  auto ih = hidden_forward_parallel(*cache, p, I, opt.context, opt.workers);
  auto out = output_forward_parallel(ih, p.theta, true, opt.workers);
  if (opt.keep_hidden) out.V_h = hidden_states_parallel(p, I, opt.context, opt.workers);
  out.kernel = std::move(cache);
  return out;
}

#define PMSN_INSTANTIATE(R)                                                                       \
  template SeqTensor<R> hidden_forward_parallel(const KernelCache&, const PmsnParams&,           \
                                                const SeqTensor<R>&, Context, int);               \
  template ComplexSeq hidden_states_parallel(const PmsnParams&, const SeqTensor<R>&, Context, int); \
  template ForwardOutput<R> output_forward_parallel(const SeqTensor<R>&, double, bool, int);      \
  template ForwardOutput<R> layer_forward(const PmsnParams&, const SeqTensor<R>&,                \
                                          const ForwardOptions&, std::shared_ptr<const KernelCache>);
PMSN_INSTANTIATE(float)
PMSN_INSTANTIATE(double)
#undef PMSN_INSTANTIATE

}  // namespace pmsn
