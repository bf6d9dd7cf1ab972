#include <unsupported/Eigen/MatrixFunctions>
#include <cmath>

#include "pmsn/error.hpp"
#include "pmsn/neuron.hpp"

namespace pmsn {

using cd = std::complex<double>;

template <typename Real>
LifResult<Real> lif_forward_serial(const LIFParams& p, const SeqTensor<Real>& I) {
  p.validate();
  LifResult<Real> out{SeqTensor<Real>(I.batch(), I.time(), I.features()),
                      SeqTensor<Real>(I.batch(), I.time(), I.features())};
  for (std::size_t b = 0; b < I.batch(); ++b)
    for (std::size_t f = 0; f < I.features(); ++f) {
      double v = p.v_rest, s = 0.0;
      for (std::size_t t = 0; t < I.time(); ++t) {
        v = p.v_rest + p.alpha * (v - p.v_rest) + static_cast<double>(I(b, t, f)) - (s > 0 ? p.theta : 0.0);
        s = v >= p.theta ? 1.0 : 0.0;
        out.v(b, t, f) = static_cast<Real>(v);
        out.s(b, t, f) = static_cast<Real>(s);
      }
    }
  return out;
}

// Both integrators treat I[t] as the charge delivered during step t, so
// the Euler form reduces to the LIF update for n = 1. The hold variant
// spreads that charge uniformly over the step and integrates exactly.
template <typename Real>
McnResult<Real> mcn_forward_serial(const GeneralizedMCNParams& p, const SeqTensor<Real>& I,
                                   Integrator integrator) {
  p.validate();
  const int n = p.n;
  const Eigen::MatrixXd a = p.matrix();
  Eigen::MatrixXd step(n, n);
  Eigen::VectorXd in_map(n);
  if (integrator == Integrator::kEuler) {
    step = p.dt * a;
    for (int k = 0; k < n; ++k) step(k, k) = 1.0 + p.dt * a(k, k);
    for (int k = 0; k < n; ++k) in_map(k) = p.gamma[k];
  } else {
    Eigen::MatrixXd aug = Eigen::MatrixXd::Zero(n + 1, n + 1);
    aug.topLeftCorner(n, n) = a * p.dt;
    for (int k = 0; k < n; ++k) aug(k, n) = p.gamma[k];
    const Eigen::MatrixXd e = aug.exp();
    step = e.topLeftCorner(n, n);
    in_map = e.topRightCorner(n, 1);
  }

  McnResult<Real> out;
  for (int k = 0; k < n; ++k) out.v.emplace_back(I.batch(), I.time(), I.features());
  out.s = SeqTensor<Real>(I.batch(), I.time(), I.features());
  std::vector<double> v(n), next(n);
  for (std::size_t b = 0; b < I.batch(); ++b)
    for (std::size_t f = 0; f < I.features(); ++f) {
      std::fill(v.begin(), v.end(), 0.0);
      double s = 0.0;
      for (std::size_t t = 0; t < I.time(); ++t) {
        const double x = static_cast<double>(I(b, t, f));
        for (int r = 0; r < n; ++r) {
          double acc = step(r, r) * v[r];
          if (r > 0) acc += step(r, r - 1) * v[r - 1];
          if (r + 1 < n) acc += step(r, r + 1) * v[r + 1];
          // The exponential of a tridiagonal matrix is dense.
          if (integrator == Integrator::kZoh)
            for (int c = 0; c < n; ++c)
              if (c < r - 1 || c > r + 1) acc += step(r, c) * v[c];
          next[r] = acc + in_map(r) * x;
        }
        if (s > 0) next[n - 1] -= p.theta;
        v.swap(next);
        s = v[n - 1] >= p.theta ? 1.0 : 0.0;
        for (int k = 0; k < n; ++k) out.v[k](b, t, f) = static_cast<Real>(v[k]);
        out.s(b, t, f) = static_cast<Real>(s);
      }
    }
  return out;
}

template <typename Real>
SeqTensor<Real> time_mean(const SeqTensor<Real>& I) {
  SeqTensor<Real> out(I.batch(), I.time(), I.features());
  for (std::size_t b = 0; b < I.batch(); ++b)
    for (std::size_t f = 0; f < I.features(); ++f) {
      double sum = 0.0;
      for (std::size_t t = 0; t < I.time(); ++t) sum += static_cast<double>(I(b, t, f));
      const Real m = static_cast<Real>(sum / static_cast<double>(I.time()));
      for (std::size_t t = 0; t < I.time(); ++t) out(b, t, f) = m;
    }
  return out;
}

template <typename Real>
SerialOutput<Real> pmsn_serial_forward(const PmsnParams& p, const SeqTensor<Real>& I,
                                       const SerialOptions& opt) {
  p.validate();
  if (I.features() != p.neurons)
    throw InvalidArgument("input has " + std::to_string(I.features()) + " features, layer has " +
                          std::to_string(p.neurons) + " neurons");
  const std::size_t B = I.batch(), T = I.time(), F = I.features(), M = p.modes;
  SerialOutput<Real> out{SeqTensor<Real>(B, T, F), SeqTensor<Real>(B, T, F),
                         SeqTensor<Real>(B, T, F), SeqTensor<Real>(B, T, F), ComplexSeq()};
  if (opt.keep_hidden) out.V_h = ComplexSeq(B, T, F * M);
  const SeqTensor<Real> hidden_in = opt.context == Context::kGlobal ? time_mean(I) : SeqTensor<Real>();
  const SeqTensor<Real>& xh = opt.context == Context::kGlobal ? hidden_in : I;

  std::vector<cd> tbar(M), Phic(M), vh(M);
  for (std::size_t f = 0; f < F; ++f) {
    for (std::size_t j = 0; j < M; ++j) {
      tbar[j] = p.t_bar(f, j);
      Phic[j] = p.Phi_c(f, j);
    }
    for (std::size_t b = 0; b < B; ++b) {
      std::fill(vh.begin(), vh.end(), cd{});
      double v = 0.0, vr = 0.0;
      for (std::size_t t = 0; t < T; ++t) {
        const double x = static_cast<double>(xh(b, t, f));
        double ih = 0.0;
        for (std::size_t j = 0; j < M; ++j) {
          vh[j] = tbar[j] * vh[j] + Phic[j] * x;
          ih += (p.phi_s[p.index(f, j)] * vh[j]).real();
          if (opt.keep_hidden) out.V_h.set(b, t, f * M + j, vh[j]);
        }
        ih += p.gamma_n[f] * static_cast<double>(I(b, t, f));
        const Real ih_r = static_cast<Real>(ih);
        out.I_h(b, t, f) = ih_r;
        const double u = opt.clamp_ih ? std::max(static_cast<double>(ih_r), 0.0) : static_cast<double>(ih_r);
        v = p.alpha_out * v + u - vr;
        const bool spike = v >= p.theta;
        switch (opt.reset) {
          case ResetMode::kFloor: vr = spike ? p.theta * std::floor(v / p.theta) : 0.0; break;
          case ResetMode::kSubtract: vr = spike ? p.theta : 0.0; break;
          case ResetMode::kNone: vr = 0.0; break;
        }
        out.v_s(b, t, f) = static_cast<Real>(v);
        out.S(b, t, f) = spike ? Real(1) : Real(0);
        out.v_r(b, t, f) = static_cast<Real>(vr);
      }
    }
  }
  return out;
}

template LifResult<float> lif_forward_serial(const LIFParams&, const SeqTensor<float>&);
template LifResult<double> lif_forward_serial(const LIFParams&, const SeqTensor<double>&);
template McnResult<float> mcn_forward_serial(const GeneralizedMCNParams&, const SeqTensor<float>&,
                                             Integrator);
template McnResult<double> mcn_forward_serial(const GeneralizedMCNParams&,
                                              const SeqTensor<double>&, Integrator);
template SeqTensor<float> time_mean(const SeqTensor<float>&);
template SeqTensor<double> time_mean(const SeqTensor<double>&);
template SerialOutput<float> pmsn_serial_forward(const PmsnParams&, const SeqTensor<float>&,
                                                 const SerialOptions&);
template SerialOutput<double> pmsn_serial_forward(const PmsnParams&, const SeqTensor<double>&,
                                                  const SerialOptions&);

}  // namespace pmsn
