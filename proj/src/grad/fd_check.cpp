#include <algorithm>
#include <cmath>
#include <limits>

#include "pmsn/error.hpp"
#include "pmsn/grad.hpp"

namespace pmsn {

using cd = std::complex<double>;

namespace {

SeqTensor<double> dense_forward(const FdModel& m, const SeqTensor<double>& x) {
  const std::size_t F = m.params.neurons;
  if (x.features() != m.in_features) throw InvalidArgument("fd input width does not match the model");
  if (m.W.size() != m.in_features * F || m.b.size() != F)
    throw InvalidArgument("fd model weight shapes do not match");
  SeqTensor<double> I(x.batch(), x.time(), F);
  for (std::size_t b = 0; b < x.batch(); ++b)
    for (std::size_t t = 0; t < x.time(); ++t) {
      auto in = x.row(b, t);
      auto o = I.row(b, t);
      for (std::size_t f = 0; f < F; ++f) {
        double acc = m.b[f];
        for (std::size_t i = 0; i < m.in_features; ++i) acc += in[i] * m.W[i * F + f];
        o[f] = acc;
      }
    }
  return I;
}

double reset_slope(const FdModel& m) { return m.options.reset == ResetMode::kFloor ? 1.0 : 0.0; }

// v_r[t] - r' v_s[t] of the hard forward: the part of the reset that the
// smoothed model holds fixed.
SeqTensor<double> frozen_reset(const FdModel& base, const SeqTensor<double>& x) {
  const auto I = dense_forward(base, x);
  const auto out = layer_forward(base.params, I, base.options);
  SeqTensor<double> fr(I.batch(), I.time(), I.features());
  const double r = reset_slope(base);
  for (std::size_t k = 0; k < fr.size(); ++k) fr.data()[k] = out.v_r.data()[k] - r * out.v_s.data()[k];
  return fr;
}

double smoothed_loss_frozen(const FdModel& m, const SeqTensor<double>& x, const SeqTensor<double>& w,
                            const SeqTensor<double>& frozen) {
  const auto I = dense_forward(m, x);
  const auto cache = build_kernel(m.params, I.time());
  const auto ih = hidden_forward_parallel(cache, m.params, I, m.options.context);
  double loss = 0.0;
  if (m.linear) {
    for (std::size_t k = 0; k < ih.size(); ++k) loss += w.data()[k] * ih.data()[k];
    return loss;
  }
  const double r = reset_slope(m), alpha = m.params.alpha_out, theta = m.params.theta;
  for (std::size_t b = 0; b < I.batch(); ++b)
    for (std::size_t f = 0; f < I.features(); ++f) {
      double v = 0.0;
      for (std::size_t t = 0; t < I.time(); ++t) {
        const double u = m.options.clamp_ih ? std::max(ih(b, t, f), 0.0) : ih(b, t, f);
        v = t == 0 ? u : alpha * v + u - (r * v + frozen(b, t - 1, f));
        loss += w(b, t, f) * smooth_spike(v - theta, m.surrogate.gamma_width);
      }
    }
  return loss;
}

const char* const kFields[] = {"lambda_dt", "phi_c", "phi_s", "gamma_n", "W", "b"};

std::vector<cd>* complex_field(PmsnParams& p, int field) {
  switch (field) {
    case 0: return &p.lambda_dt;
    case 1: return &p.phi_c;
    case 2: return &p.phi_s;
    default: return nullptr;
  }
}

// Coordinates of a complex field: per neuron, each pair contributes Re and
// Im of its first member, a real mode contributes Re.
std::size_t complex_coords(const PmsnParams& p) {
  return p.neurons * (2 * (p.modes / 2) + (p.modes % 2));
}

std::size_t field_size(const FdModel& m, int field) {
  if (field < 3) return complex_coords(m.params);
  if (field == 3) return m.params.neurons;
  if (field == 4) return m.W.size();
  return m.b.size();
}

void perturb(FdModel& m, int field, std::size_t coord, double delta) {
  if (field < 3) {
    auto& v = *complex_field(m.params, field);
    const std::size_t per = 2 * (m.params.modes / 2) + (m.params.modes % 2);
    const std::size_t f = coord / per, c = coord % per;
    if (c < 2 * (m.params.modes / 2)) {
      const auto i = m.params.index(f, (c / 2) * 2);
      v[i] += c % 2 == 0 ? cd(delta, 0) : cd(0, delta);
      v[i + 1] = std::conj(v[i]);
    } else {
      v[m.params.index(f, m.params.modes - 1)] += delta;
    }
    m.params.touch();
  } else if (field == 3) {
    m.params.gamma_n[coord] += delta;
    m.params.touch();
  } else if (field == 4) {
    m.W[coord] += delta;
  } else {
    m.b[coord] += delta;
  }
}

std::vector<double> flatten(const PmsnParams& p, const std::vector<cd>& g) {
  std::vector<double> out;
  for (std::size_t f = 0; f < p.neurons; ++f) {
    for (std::size_t j = 0; j + 1 < p.modes; j += 2) {
      // A tied pair moves both members, so its coordinate gradient is the
      // sum of the two (conjugate) per-mode gradients.
      const cd s = g[p.index(f, j)] + std::conj(g[p.index(f, j + 1)]);
      out.push_back(s.real());
      out.push_back(s.imag());
    }
    if (p.modes % 2 == 1) out.push_back(g[p.index(f, p.modes - 1)].real());
  }
  return out;
}

}  // namespace

double smoothed_loss(const FdModel& base, const FdModel& m, const SeqTensor<double>& x,
                     const SeqTensor<double>& weights) {
  return smoothed_loss_frozen(m, x, weights, frozen_reset(base, x));
}

std::vector<std::pair<std::string, std::vector<double>>> analytic_gradient(
    const FdModel& m, const SeqTensor<double>& x, const SeqTensor<double>& weights) {
  const auto I = dense_forward(m, x);
  if (!weights.same_shape(I)) throw InvalidArgument("loss weights must match the layer output shape");
  const auto out = layer_forward(m.params, I, m.options);
  const auto tape = make_tape(m.params, I, out, m.options);
  const auto res = m.linear ? backward_hidden(tape, weights, true)
                            : layer_backward(tape, m.surrogate, weights, true);
  const std::size_t F = m.params.neurons;
  std::vector<double> dW(m.W.size(), 0.0), db(F, 0.0);
  for (std::size_t b = 0; b < x.batch(); ++b)
    for (std::size_t t = 0; t < x.time(); ++t)
      for (std::size_t f = 0; f < F; ++f) {
        const double g = res.d_input(b, t, f);
        db[f] += g;
        for (std::size_t i = 0; i < m.in_features; ++i) dW[i * F + f] += x(b, t, i) * g;
      }
  return {{kFields[0], flatten(m.params, res.grads.d_lambda_dt)},
          {kFields[1], flatten(m.params, res.grads.d_phi_c)},
          {kFields[2], flatten(m.params, res.grads.d_phi_s)},
          {kFields[3], res.grads.d_gamma_n},
          {kFields[4], dW},
          {kFields[5], db}};
}

double FdReport::max_rel_err() const noexcept {
  double m = 0.0;
  for (const auto& e : entries) m = std::max(m, e.max_rel_err);
  return m;
}

nlohmann::json FdReport::to_json() const {
  nlohmann::json j;
  j["eps"] = eps;
  j["max_rel_err"] = max_rel_err();
  j["parameters"] = nlohmann::json::array();
  for (const auto& e : entries)
    j["parameters"].push_back({{"name", e.name},
                               {"max_rel_err", e.max_rel_err},
                               {"argmax", e.argmax},
                               {"analytic", e.analytic},
                               {"numeric", e.numeric},
                               {"coordinates", e.coordinates}});
  return j;
}

FdReport fd_check(const FdModel& m, const SeqTensor<double>& x, const SeqTensor<double>& weights,
                  double eps) {
  if (!(eps > 0)) throw InvalidArgument("finite-difference step must be positive");
  const auto analytic = analytic_gradient(m, x, weights);
  const auto frozen = frozen_reset(m, x);
  FdReport report;
  report.eps = eps;
  for (int field = 0; field < 6; ++field) {
    const auto& a = analytic[field].second;
    const std::size_t n = field_size(m, field);
    if (a.size() != n) throw InvalidState("analytic gradient layout mismatch");
    std::vector<double> num(n);
    for (std::size_t c = 0; c < n; ++c) {
      auto eval = [&](double h) {
        FdModel p = m;
        perturb(p, field, c, h);
        return smoothed_loss_frozen(p, x, weights, frozen);
      };
      num[c] = (-eval(2 * eps) + 8 * eval(eps) - 8 * eval(-eps) + eval(-2 * eps)) / (12 * eps);
    }
    double scale = 0.0;
    for (double v : a) scale = std::max(scale, std::abs(v));
    FdEntry entry;
    entry.name = kFields[field];
    entry.coordinates = n;
    for (std::size_t c = 0; c < n; ++c) {
      const double denom = std::max({std::abs(a[c]), std::abs(num[c]), 1e-6 * scale,
                                     std::numeric_limits<double>::min()});
      const double rel = std::abs(a[c] - num[c]) / denom;
      if (rel > entry.max_rel_err || c == 0) {
        entry.max_rel_err = std::max(entry.max_rel_err, rel);
        entry.argmax = c;
        entry.analytic = a[c];
        entry.numeric = num[c];
      }
    }
    report.entries.push_back(entry);
  }
  return report;
}

}  // namespace pmsn
