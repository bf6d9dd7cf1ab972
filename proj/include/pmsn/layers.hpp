#pragma once

#include <cstdint>
#include <random>
#include <span>
#include <vector>

#include "pmsn/grad.hpp"
#include "pmsn/neuron.hpp"
#include "pmsn/seq_tensor.hpp"

namespace pmsn {

/// Time-distributed affine map y[b,t,:] = x[b,t,:] W + b with W stored
/// in x out, row-major. Gradients accumulate into dW, db.
struct DenseLayer {
  std::size_t in = 0;
  std::size_t out = 0;
  std::vector<double> W, b;
  std::vector<double> dW, db;

  DenseLayer() = default;
  DenseLayer(std::size_t in, std::size_t out);
  /// Uniform(-1/sqrt(in), 1/sqrt(in)) for weights and biases.
  void init(std::mt19937_64& rng);

  template <typename Real>
  SeqTensor<Real> forward(const SeqTensor<Real>& x, int workers = 1) const;
  /// Adds parameter gradients for the pair (x, dy); returns dL/dx when
  /// need_dx, otherwise an empty tensor.
  template <typename Real>
  SeqTensor<Real> backward(const SeqTensor<Real>& x, const SeqTensor<Real>& dy, bool need_dx,
                           int workers = 1);
};

/// Per-feature normalization with statistics over batch and time jointly.
struct BatchNorm {
  std::size_t features = 0;
  std::vector<double> gamma, beta;
  std::vector<double> running_mean, running_var;
  std::vector<double> dgamma, dbeta;
  double momentum = 0.1;
  double eps = 1e-5;

  template <typename Real>
  struct Cache {
    std::vector<double> mean, var, inv_std;
    SeqTensor<Real> xhat;
  };

  BatchNorm() = default;
  explicit BatchNorm(std::size_t features);

  /// Training mode normalizes with batch statistics and updates the
  /// running estimates (unbiased variance); evaluation uses the running
  /// estimates.
  template <typename Real>
  SeqTensor<Real> forward(const SeqTensor<Real>& x, bool training, Cache<Real>* cache);
  /// Batch-statistics normalization without touching the running
  /// estimates; `cache` receives the statistics.
  template <typename Real>
  SeqTensor<Real> forward_train(const SeqTensor<Real>& x, Cache<Real>& cache) const;
  void update_running(const std::vector<double>& mean, const std::vector<double>& var, std::size_t rows);
  template <typename Real>
  SeqTensor<Real> forward_eval(const SeqTensor<Real>& x) const;
  template <typename Real>
  SeqTensor<Real> backward(const Cache<Real>& cache, const SeqTensor<Real>& dy);
};

/// BPTT through a serial LIF layer with the reset detached: the membrane
/// adjoint carries alpha to the previous step, the spike path uses the
/// triangle surrogate.
template <typename Real>
SeqTensor<Real> lif_backward(const LIFParams& p, const SeqTensor<Real>& v, const SeqTensor<Real>& dL_dS,
                             const SurrogateConfig& cfg);

/// Mean cross-entropy over the batch with log-sum-exp stabilization.
/// logits is batch x classes, row-major. When dlogits is given it receives
/// (softmax - onehot) / batch.
double cross_entropy(std::span<const double> logits, std::span<const int> labels, int classes,
                     std::vector<double>* dlogits = nullptr);

}  // namespace pmsn
