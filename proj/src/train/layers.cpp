#include "pmsn/layers.hpp"

#include <algorithm>
#include <cmath>

#include "pmsn/error.hpp"
#include "pmsn/parallel_for.hpp"

namespace pmsn {

DenseLayer::DenseLayer(std::size_t in_, std::size_t out_)
    : in(in_), out(out_), W(in_ * out_, 0.0), b(out_, 0.0), dW(in_ * out_, 0.0), db(out_, 0.0) {}

void DenseLayer::init(std::mt19937_64& rng) {
  const double bound = 1.0 / std::sqrt(static_cast<double>(in));
  std::uniform_real_distribution<double> u(-bound, bound);
  for (auto& w : W) w = u(rng);
  for (auto& v : b) v = u(rng);
}

template <typename Real>
SeqTensor<Real> DenseLayer::forward(const SeqTensor<Real>& x, int workers) const {
  if (x.features() != in)
    throw InvalidArgument("dense layer expects " + std::to_string(in) + " features, got " +
                          std::to_string(x.features()));
  const std::size_t rows = x.batch() * x.time();
  SeqTensor<Real> y(x.batch(), x.time(), out);
  const Real* xs = x.data().data();
  Real* ys = y.data().data();
  parallel_for(rows, workers, [&](std::size_t begin, std::size_t end) {
    std::vector<double> acc(out);
    for (std::size_t r = begin; r < end; ++r) {
      std::copy(b.begin(), b.end(), acc.begin());
      const Real* xr = xs + r * in;
      for (std::size_t i = 0; i < in; ++i) {
        const double xi = static_cast<double>(xr[i]);
        if (xi == 0.0) continue;  // spike inputs are mostly zero
        const double* w = W.data() + i * out;
        for (std::size_t o = 0; o < out; ++o) acc[o] += xi * w[o];
      }
      for (std::size_t o = 0; o < out; ++o) ys[r * out + o] = static_cast<Real>(acc[o]);
    }
  });
  return y;
}

template <typename Real>
SeqTensor<Real> DenseLayer::backward(const SeqTensor<Real>& x, const SeqTensor<Real>& dy, bool need_dx,
                                     int workers) {
  const std::size_t rows = x.batch() * x.time();
  const Real* xs = x.data().data();
  const Real* gs = dy.data().data();
  // Parameter gradients: split over input rows of W so every entry has a
  // single writer and a fixed summation order.
  parallel_for(in, workers, [&](std::size_t begin, std::size_t end) {
    for (std::size_t r = 0; r < rows; ++r) {
      const Real* g = gs + r * out;
      for (std::size_t i = begin; i < end; ++i) {
        const double xi = static_cast<double>(xs[r * in + i]);
        if (xi == 0.0) continue;
        double* w = dW.data() + i * out;
        for (std::size_t o = 0; o < out; ++o) w[o] += xi * static_cast<double>(g[o]);
      }
    }
  });
  for (std::size_t r = 0; r < rows; ++r)
    for (std::size_t o = 0; o < out; ++o) db[o] += static_cast<double>(gs[r * out + o]);
  if (!need_dx) return {};
  SeqTensor<Real> dx(x.batch(), x.time(), in);
  Real* ds = dx.data().data();
  parallel_for(rows, workers, [&](std::size_t begin, std::size_t end) {
    for (std::size_t r = begin; r < end; ++r) {
      const Real* g = gs + r * out;
      for (std::size_t i = 0; i < in; ++i) {
        const double* w = W.data() + i * out;
        double acc = 0.0;
        for (std::size_t o = 0; o < out; ++o) acc += w[o] * static_cast<double>(g[o]);
        ds[r * in + i] = static_cast<Real>(acc);
      }
    }
  });
  return dx;
}

BatchNorm::BatchNorm(std::size_t f)
    : features(f),
      gamma(f, 1.0),
      beta(f, 0.0),
      running_mean(f, 0.0),
      running_var(f, 1.0),
      dgamma(f, 0.0),
      dbeta(f, 0.0) {}

template <typename Real>
SeqTensor<Real> BatchNorm::forward_train(const SeqTensor<Real>& x, Cache<Real>& cache) const {
  if (x.features() != features) throw InvalidArgument("batch norm feature count mismatch");
  const std::size_t rows = x.batch() * x.time(), F = features;
  if (rows < 2) throw InvalidArgument("batch norm in training mode needs at least 2 rows");
  std::vector<double> mean(F, 0.0), var(F, 0.0);
  const Real* xs = x.data().data();
  for (std::size_t r = 0; r < rows; ++r)
    for (std::size_t f = 0; f < F; ++f) mean[f] += static_cast<double>(xs[r * F + f]);
  for (auto& m : mean) m /= static_cast<double>(rows);
  for (std::size_t r = 0; r < rows; ++r)
    for (std::size_t f = 0; f < F; ++f) {
      const double d = static_cast<double>(xs[r * F + f]) - mean[f];
      var[f] += d * d;
    }
  for (auto& v : var) v /= static_cast<double>(rows);
  std::vector<double> inv(F);
  for (std::size_t f = 0; f < F; ++f) inv[f] = 1.0 / std::sqrt(var[f] + eps);
  SeqTensor<Real> y(x.batch(), x.time(), F);
  SeqTensor<Real> xhat(x.batch(), x.time(), F);
  for (std::size_t r = 0; r < rows; ++r)
    for (std::size_t f = 0; f < F; ++f) {
      const double h = (static_cast<double>(xs[r * F + f]) - mean[f]) * inv[f];
      xhat.data()[r * F + f] = static_cast<Real>(h);
      y.data()[r * F + f] = static_cast<Real>(gamma[f] * h + beta[f]);
    }
  cache.mean = std::move(mean);
  cache.var = std::move(var);
  cache.inv_std = std::move(inv);
  cache.xhat = std::move(xhat);
  return y;
}

void BatchNorm::update_running(const std::vector<double>& mean, const std::vector<double>& var,
                               std::size_t rows) {
  const double unbias = rows > 1 ? static_cast<double>(rows) / static_cast<double>(rows - 1) : 1.0;
  for (std::size_t f = 0; f < features; ++f) {
    running_mean[f] = (1 - momentum) * running_mean[f] + momentum * mean[f];
    running_var[f] = (1 - momentum) * running_var[f] + momentum * var[f] * unbias;
  }
}

template <typename Real>
SeqTensor<Real> BatchNorm::forward(const SeqTensor<Real>& x, bool training, Cache<Real>* cache) {
  if (!training) return forward_eval(x);
  Cache<Real> local;
  Cache<Real>& c = cache ? *cache : local;
  auto y = forward_train(x, c);
  update_running(c.mean, c.var, x.batch() * x.time());
  return y;
}

template <typename Real>
SeqTensor<Real> BatchNorm::forward_eval(const SeqTensor<Real>& x) const {
  if (x.features() != features) throw InvalidArgument("batch norm feature count mismatch");
  const std::size_t rows = x.batch() * x.time(), F = features;
  SeqTensor<Real> y(x.batch(), x.time(), F);
  for (std::size_t f = 0; f < F; ++f) {
    const double inv = 1.0 / std::sqrt(running_var[f] + eps);
    for (std::size_t r = 0; r < rows; ++r)
      y.data()[r * F + f] = static_cast<Real>(
          gamma[f] * (static_cast<double>(x.data()[r * F + f]) - running_mean[f]) * inv + beta[f]);
  }
  return y;
}

template <typename Real>
SeqTensor<Real> BatchNorm::backward(const Cache<Real>& cache, const SeqTensor<Real>& dy) {
  const std::size_t rows = dy.batch() * dy.time(), F = features;
  std::vector<double> sum_dy(F, 0.0), sum_dy_xhat(F, 0.0);
  for (std::size_t r = 0; r < rows; ++r)
    for (std::size_t f = 0; f < F; ++f) {
      const double g = static_cast<double>(dy.data()[r * F + f]);
      sum_dy[f] += g;
      sum_dy_xhat[f] += g * static_cast<double>(cache.xhat.data()[r * F + f]);
    }
  for (std::size_t f = 0; f < F; ++f) {
    dbeta[f] += sum_dy[f];
    dgamma[f] += sum_dy_xhat[f];
  }
  SeqTensor<Real> dx(dy.batch(), dy.time(), F);
  const double n = static_cast<double>(rows);
  for (std::size_t r = 0; r < rows; ++r)
    for (std::size_t f = 0; f < F; ++f) {
      const double g = static_cast<double>(dy.data()[r * F + f]);
      const double h = static_cast<double>(cache.xhat.data()[r * F + f]);
      dx.data()[r * F + f] =
          static_cast<Real>(gamma[f] * cache.inv_std[f] * (g - sum_dy[f] / n - h * sum_dy_xhat[f] / n));
    }
  return dx;
}

template <typename Real>
SeqTensor<Real> lif_backward(const LIFParams& p, const SeqTensor<Real>& v, const SeqTensor<Real>& dL_dS,
                             const SurrogateConfig& cfg) {
  SeqTensor<Real> dI(v.batch(), v.time(), v.features());
  for (std::size_t b = 0; b < v.batch(); ++b)
    for (std::size_t f = 0; f < v.features(); ++f) {
      double a = 0.0;
      for (std::size_t t = v.time(); t-- > 0;) {
        a = static_cast<double>(dL_dS(b, t, f)) * surrogate(static_cast<double>(v(b, t, f)), p.theta, cfg) +
            p.alpha * a;
        dI(b, t, f) = static_cast<Real>(a);
      }
    }
  return dI;
}

double cross_entropy(std::span<const double> logits, std::span<const int> labels, int classes,
                     std::vector<double>* dlogits) {
  const std::size_t B = labels.size(), C = static_cast<std::size_t>(classes);
  if (logits.size() != B * C) throw InvalidArgument("logits size does not match batch x classes");
  if (dlogits) dlogits->assign(B * C, 0.0);
  double loss = 0.0;
  for (std::size_t b = 0; b < B; ++b) {
    if (labels[b] < 0 || labels[b] >= classes) throw InvalidArgument("label out of range");
    const double* z = logits.data() + b * C;
    const double mx = *std::max_element(z, z + C);
    double sum = 0.0;
    for (std::size_t c = 0; c < C; ++c) sum += std::exp(z[c] - mx);
    const double lse = mx + std::log(sum);
    loss += lse - z[labels[b]];
    if (dlogits)
      for (std::size_t c = 0; c < C; ++c)
        (*dlogits)[b * C + c] =
            (std::exp(z[c] - lse) - (static_cast<int>(c) == labels[b] ? 1.0 : 0.0)) / static_cast<double>(B);
  }
  return loss / static_cast<double>(B);
}

#define PMSN_INSTANTIATE(R)                                                                        \
  template SeqTensor<R> DenseLayer::forward(const SeqTensor<R>&, int) const;                       \
  template SeqTensor<R> DenseLayer::backward(const SeqTensor<R>&, const SeqTensor<R>&, bool, int);  \
  template SeqTensor<R> BatchNorm::forward(const SeqTensor<R>&, bool, Cache<R>*);                  \
  template SeqTensor<R> BatchNorm::forward_eval(const SeqTensor<R>&) const;                         \
  template SeqTensor<R> BatchNorm::forward_train(const SeqTensor<R>&, Cache<R>&) const;            \
  template SeqTensor<R> BatchNorm::backward(const Cache<R>&, const SeqTensor<R>&);                 \
  template SeqTensor<R> lif_backward(const LIFParams&, const SeqTensor<R>&, const SeqTensor<R>&,    \
                                     const SurrogateConfig&);
PMSN_INSTANTIATE(float)
PMSN_INSTANTIATE(double)
#undef PMSN_INSTANTIATE

}  // namespace pmsn
