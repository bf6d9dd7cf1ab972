#include <cmath>

#include "pmsn/error.hpp"
#include "pmsn/grad.hpp"
#include "pmsn/parallel_for.hpp"

namespace pmsn {

using cd = std::complex<double>;

void SurrogateConfig::validate() const {
  if (!(gamma_width > 0)) throw InvalidArgument("surrogate width must be positive");
}

double surrogate(double v_s, double theta, const SurrogateConfig& cfg) {
  const double w = cfg.gamma_width;
  const double d = std::abs(v_s - theta);
  return d < w ? (w - d) / (w * w) : 0.0;
}

double smooth_spike(double delta, double width) {
  if (delta <= -width) return 0.0;
  if (delta >= width) return 1.0;
  const double w2 = 2.0 * width * width;
  if (delta <= 0) return (width + delta) * (width + delta) / w2;
  return 1.0 - (width - delta) * (width - delta) / w2;
}

bool GradBundle::all_zero() const noexcept {
  auto zero_c = [](const std::vector<cd>& v) {
    for (const auto& z : v)
      if (z != cd{}) return false;
    return true;
  };
  auto zero_r = [](const std::vector<double>& v) {
    for (double z : v)
      if (z != 0.0) return false;
    return true;
  };
  return zero_c(d_lambda_dt) && zero_c(d_phi_c) && zero_c(d_phi_s) && zero_r(d_gamma_n) &&
         d_theta == 0.0 && zero_r(d_W) && zero_r(d_b);
}

template <typename Real>
LayerTape<Real> make_tape(const PmsnParams& p, const SeqTensor<Real>& I, const ForwardOutput<Real>& out,
                          const ForwardOptions& opt) {
  LayerTape<Real> tape;
  tape.params = &p;
  tape.options = opt;
  tape.kernel = out.kernel && out.kernel->matches(p, I.time())
                    ? out.kernel
                    : std::make_shared<const KernelCache>(build_kernel(p, I.time(), 0, opt.workers));
  tape.I = I;
  tape.I_h = out.I_h;
  tape.v_s = out.v_s;
  tape.S = out.S;
  tape.v_r = out.v_r;
  return tape;
}

namespace {

template <typename Real>
void check_tape(const LayerTape<Real>& tape, std::size_t B, std::size_t T, std::size_t F) {
  if (!tape.params) throw InvalidState("tape has no parameters attached");
  if (!tape.kernel) throw InvalidState("tape has no kernel cache");
  auto ok = [&](const SeqTensor<Real>& x) { return x.batch() == B && x.time() == T && x.features() == F; };
  if (!ok(tape.I)) throw InvalidState("tape is missing the layer input I");
  if (tape.kernel->T_used != T || tape.kernel->neurons != F)
    throw InvalidState("tape kernel does not match the retained sequence shape");
  if (tape.params->neurons != F) throw InvalidState("tape parameters do not match the retained shape");
}

void symmetrize(const PmsnParams& p, std::vector<cd>& g) {
  for (std::size_t f = 0; f < p.neurons; ++f) {
    for (std::size_t j = 0; j + 1 < p.modes; j += 2) {
      const auto a = p.index(f, j);
      const cd s = 0.5 * (g[a] + std::conj(g[a + 1]));
      g[a] = s;
      g[a + 1] = std::conj(s);
    }
    if (p.modes % 2 == 1) {
      auto& r = g[p.index(f, p.modes - 1)];
      r = r.real();
    }
  }
}

}  // namespace

template <typename Real>
BackwardResult<Real> backward_hidden(const LayerTape<Real>& tape, const SeqTensor<double>& e,
                                     bool with_params, int workers) {
  const std::size_t B = e.batch(), T = e.time(), F = e.features();
  check_tape(tape, B, T, F);
  const PmsnParams& p = *tape.params;
  const KernelCache& kc = *tape.kernel;
  const RealFft& plan = *kc.plan;
  const bool global = tape.options.context == Context::kGlobal;
  const LaneMajor el = to_lane_major(e);

  BackwardResult<Real> out;
  out.d_input = SeqTensor<Real>(B, T, F);
  parallel_for(B * F, workers, [&](std::size_t begin, std::size_t end) {
    FftScratch scratch;
    std::vector<double> corr(T);
    for (std::size_t lane = begin; lane < end; ++lane) {
      const std::size_t b = lane / F, f = lane % F;
      const auto ev = el.lane(b, f);
      if (!global) {
        causal_correlate(plan, ev, kc.spectrum(f), corr, scratch);
      } else {
        const auto kcum = kc.cumulative(f);
        double s = 0.0;
        for (std::size_t i = 0; i < T; ++i) s += ev[i] * kcum[i];
        std::fill(corr.begin(), corr.end(), s / static_cast<double>(T));
      }
      for (std::size_t t = 0; t < T; ++t)
        out.d_input(b, t, f) = static_cast<Real>(corr[t] + p.gamma_n[f] * ev[t]);
    }
  });
  if (!with_params) return out;

  GradBundle& g = out.grads;
  g.d_lambda_dt.assign(p.neurons * p.modes, cd{});
  g.d_phi_c.assign(p.neurons * p.modes, cd{});
  g.d_phi_s.assign(p.neurons * p.modes, cd{});
  g.d_gamma_n.assign(p.neurons, 0.0);
  const LaneMajor xl = to_lane_major(tape.I);

  // One neuron per task with a fixed batch order keeps the reduction
  // independent of the worker count.
  parallel_for(F, workers, [&](std::size_t begin, std::size_t end) {
    const std::size_t S = plan.spectrum_size();
    std::vector<cd> ehat(S), xhat(S), acc(S);
    std::vector<double> full(plan.length()), G(T), suffix(T);
    for (std::size_t f = begin; f < end; ++f) {
      std::fill(acc.begin(), acc.end(), cd{});
      std::fill(G.begin(), G.end(), 0.0);
      double dg = 0.0;
      for (std::size_t b = 0; b < B; ++b) {
        const auto ev = el.lane(b, f);
        const auto xv = xl.lane(b, f);
        for (std::size_t t = 0; t < T; ++t) dg += ev[t] * xv[t];
        if (!global) {
          plan.forward(ev, ehat);
          plan.forward(xv, xhat);
          for (std::size_t k = 0; k < S; ++k) acc[k] += ehat[k] * std::conj(xhat[k]);
        } else {
          double sum = 0.0;
          for (std::size_t t = 0; t < T; ++t) sum += xv[t];
          const double m = static_cast<double>(static_cast<Real>(sum / static_cast<double>(T)));
          double run = 0.0;
          for (std::size_t t = T; t-- > 0;) {
            run += ev[t];
            suffix[t] = run;
          }
          for (std::size_t d = 0; d < T; ++d) G[d] += m * suffix[d];
        }
      }
      if (!global) {
        plan.inverse(acc, full);
        const double scale = 1.0 / static_cast<double>(plan.length());
        for (std::size_t d = 0; d < T; ++d) G[d] = full[d] * scale;
      }
      g.d_gamma_n[f] = dg;
      for (std::size_t j = 0; j < p.modes; ++j) {
        const auto i = p.index(f, j);
        const cd wc = std::conj(p.t_bar(f, j));
        cd s0{}, s1{}, pw = 1.0;
        for (std::size_t d = 0; d < T; ++d) {
          s0 += G[d] * pw;
          s1 += static_cast<double>(d) * G[d] * pw;
          pw *= wc;
        }
        const cd z = p.lambda_dt[i];
        const cd psi = zoh_psi(z);
        const cd Phic = p.dt[f] * psi * p.phi_c[i];
        g.d_phi_s[i] = std::conj(Phic) * s0;
        g.d_phi_c[i] = std::conj(p.phi_s[i] * p.dt[f] * psi) * s0;
        g.d_lambda_dt[i] = std::conj(p.phi_s[i] * p.phi_c[i] * p.dt[f]) *
                           (std::conj(zoh_psi_prime(z)) * s0 + std::conj(psi) * s1);
      }
    }
  });
  symmetrize(p, g.d_lambda_dt);
  symmetrize(p, g.d_phi_c);
  symmetrize(p, g.d_phi_s);
  if (!p.learnable.lambda_dt) std::fill(g.d_lambda_dt.begin(), g.d_lambda_dt.end(), cd{});
  if (!p.learnable.phi_c) std::fill(g.d_phi_c.begin(), g.d_phi_c.end(), cd{});
  if (!p.learnable.phi_s) std::fill(g.d_phi_s.begin(), g.d_phi_s.end(), cd{});
  if (!p.learnable.gamma_n) std::fill(g.d_gamma_n.begin(), g.d_gamma_n.end(), 0.0);
  return out;
}

template <typename Real>
SeqTensor<double> output_adjoint(const LayerTape<Real>& tape, const SurrogateConfig& cfg,
                                 const SeqTensor<Real>& dL_dS, int workers) {
  cfg.validate();
  const std::size_t B = dL_dS.batch(), T = dL_dS.time(), F = dL_dS.features();
  if (!tape.params) throw InvalidState("tape has no parameters attached");
  if (!tape.I_h.same_shape(dL_dS)) throw InvalidState("tape is missing I_h");
  if (!tape.v_s.same_shape(dL_dS)) throw InvalidState("tape is missing v_s");
  const PmsnParams& p = *tape.params;
  const double carry = p.alpha_out - (tape.options.reset == ResetMode::kFloor ? 1.0 : 0.0);
  const bool clamp = tape.options.clamp_ih;
  SeqTensor<double> e(B, T, F);
  parallel_for(B * F, workers, [&](std::size_t begin, std::size_t end) {
    for (std::size_t lane = begin; lane < end; ++lane) {
      const std::size_t b = lane / F, f = lane % F;
      double a = 0.0;
      for (std::size_t t = T; t-- > 0;) {
        a = static_cast<double>(dL_dS(b, t, f)) *
                surrogate(static_cast<double>(tape.v_s(b, t, f)), p.theta, cfg) +
            carry * a;
        const bool pass = !clamp || tape.I_h(b, t, f) >= Real(0);
        e(b, t, f) = pass ? a : 0.0;
      }
    }
  });
  return e;
}

template <typename Real>
BackwardResult<Real> layer_backward(const LayerTape<Real>& tape, const SurrogateConfig& cfg,
                                    const SeqTensor<Real>& dL_dS, bool with_params, int workers) {
  check_tape(tape, dL_dS.batch(), dL_dS.time(), dL_dS.features());
  return backward_hidden(tape, output_adjoint(tape, cfg, dL_dS, workers), with_params, workers);
}

template <typename Real>
SeqTensor<Real> backward_input_serial(const LayerTape<Real>& tape, const SurrogateConfig& cfg,
                                      const SeqTensor<Real>& dL_dS) {
  const SeqTensor<double> e = output_adjoint(tape, cfg, dL_dS, 1);
  const PmsnParams& p = *tape.params;
  const std::size_t B = e.batch(), T = e.time(), F = e.features(), M = p.modes;
  if (p.neurons != F) throw InvalidState("tape parameters do not match the retained shape");
  const bool global = tape.options.context == Context::kGlobal;
  SeqTensor<Real> dI(B, T, F);
  std::vector<cd> u(M), tb(M), pc(M), ps(M);
  std::vector<double> hidden(T);
  for (std::size_t f = 0; f < F; ++f) {
    for (std::size_t j = 0; j < M; ++j) {
      tb[j] = p.t_bar(f, j);
      pc[j] = p.Phi_c(f, j);
      ps[j] = p.phi_s[p.index(f, j)];
    }
    for (std::size_t b = 0; b < B; ++b) {
      std::fill(u.begin(), u.end(), cd{});
      double total = 0.0;
      for (std::size_t t = T; t-- > 0;) {
        const double et = e(b, t, f);
        double h = 0.0;
        for (std::size_t j = 0; j < M; ++j) {
          u[j] = ps[j] * et + tb[j] * u[j];
          h += (pc[j] * u[j]).real();
        }
        hidden[t] = h;
        total += h;
      }
      for (std::size_t t = 0; t < T; ++t) {
        const double through = global ? total / static_cast<double>(T) : hidden[t];
        dI(b, t, f) = static_cast<Real>(p.gamma_n[f] * e(b, t, f) + through);
      }
    }
  }
  return dI;
}

template <typename Real>
SeqTensor<Real> backward_input(const LayerTape<Real>& tape, const SurrogateConfig& cfg,
                               const SeqTensor<Real>& dL_dS, int workers) {
  return layer_backward(tape, cfg, dL_dS, false, workers).d_input;
}

template <typename Real>
GradBundle backward_params(const LayerTape<Real>& tape, const SurrogateConfig& cfg,
                           const SeqTensor<Real>& dL_dS, int workers) {
  return layer_backward(tape, cfg, dL_dS, true, workers).grads;
}

#define PMSN_INSTANTIATE(R)                                                                        \
  template LayerTape<R> make_tape(const PmsnParams&, const SeqTensor<R>&, const ForwardOutput<R>&,  \
                                  const ForwardOptions&);                                          \
  template BackwardResult<R> backward_hidden(const LayerTape<R>&, const SeqTensor<double>&, bool,  \
                                             int);                                                 \
  template BackwardResult<R> layer_backward(const LayerTape<R>&, const SurrogateConfig&,           \
                                            const SeqTensor<R>&, bool, int);                       \
  template SeqTensor<R> backward_input(const LayerTape<R>&, const SurrogateConfig&,                \
                                       const SeqTensor<R>&, int);                                  \
  template GradBundle backward_params(const LayerTape<R>&, const SurrogateConfig&,                 \
                                      const SeqTensor<R>&, int);                                   \
  template SeqTensor<double> output_adjoint(const LayerTape<R>&, const SurrogateConfig&,           \
                                            const SeqTensor<R>&, int);                             \
  template SeqTensor<R> backward_input_serial(const LayerTape<R>&, const SurrogateConfig&,         \
                                              const SeqTensor<R>&);
PMSN_INSTANTIATE(float)
PMSN_INSTANTIATE(double)
#undef PMSN_INSTANTIATE

}  // namespace pmsn
