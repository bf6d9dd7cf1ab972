#pragma once

#include <complex>
#include <memory>
#include <nlohmann/json.hpp>
#include <string>
#include <vector>

#include "pmsn/neuron.hpp"
#include "pmsn/parallel.hpp"

namespace pmsn {

struct SurrogateConfig {
  double gamma_width = 1.0;  ///< triangle half-width
  void validate() const;
};

/// Triangle pseudo-derivative (w - |v_s - theta|) / w^2 inside the window.
double surrogate(double v_s, double theta, const SurrogateConfig& cfg);

/// Piecewise-quadratic ramp whose derivative is the triangle surrogate of
/// half-width `width`; 0 below -width, 1 above +width, 1/2 at 0.
double smooth_spike(double delta, double width);

/// Forward activations a PMSN layer keeps for its backward pass.
template <typename Real>
struct LayerTape {
  const PmsnParams* params = nullptr;
  std::shared_ptr<const KernelCache> kernel;
  ForwardOptions options;
  SeqTensor<Real> I;
  SeqTensor<Real> I_h;  ///< before clamping
  SeqTensor<Real> v_s;
  SeqTensor<Real> S;
  SeqTensor<Real> v_r;  ///< kept for inspection; the backward never reads it
};

/// Builds a tape from a finished forward. The kernel is rebuilt when the
/// forward ran serially.
template <typename Real>
LayerTape<Real> make_tape(const PmsnParams& p, const SeqTensor<Real>& I, const ForwardOutput<Real>& out,
                          const ForwardOptions& opt);

/// Per-field gradients. Complex entries follow dL/dRe + i dL/dIm for each
/// mode taken on its own; paired modes carry conjugate values.
struct GradBundle {
  std::vector<std::complex<double>> d_lambda_dt;
  std::vector<std::complex<double>> d_phi_c;
  std::vector<std::complex<double>> d_phi_s;
  std::vector<double> d_gamma_n;
  double d_theta = 0.0;
  std::vector<double> d_W;
  std::vector<double> d_b;

  bool all_zero() const noexcept;
};

template <typename Real>
struct BackwardResult {
  SeqTensor<Real> d_input;
  GradBundle grads;
};

/// Backward from dL/dI_h (already through the clamp) to the layer input
/// and, when `with_params`, to the neuron parameters. Computed with one
/// FFT correlation per lane against the forward kernel.
template <typename Real>
BackwardResult<Real> backward_hidden(const LayerTape<Real>& tape, const SeqTensor<double>& e,
                                     bool with_params, int workers = 1);

/// Full layer backward from dL/dS. The spike path uses the triangle
/// surrogate; the floor reset passes gradient straight through, so with
/// alpha_out = 1 no term links dL/dv_s across steps. Subtract and no-reset
/// modes keep the alpha_out carry with the reset detached.
template <typename Real>
BackwardResult<Real> layer_backward(const LayerTape<Real>& tape, const SurrogateConfig& cfg,
                                    const SeqTensor<Real>& dL_dS, bool with_params, int workers = 1);

/// dL/dI_h through the output compartment and the clamp.
template <typename Real>
SeqTensor<double> output_adjoint(const LayerTape<Real>& tape, const SurrogateConfig& cfg,
                                 const SeqTensor<Real>& dL_dS, int workers = 1);

/// Step-by-step reverse recurrence over the hidden eigenmodes; needs no
/// kernel. Same result as backward_input up to rounding.
template <typename Real>
SeqTensor<Real> backward_input_serial(const LayerTape<Real>& tape, const SurrogateConfig& cfg,
                                      const SeqTensor<Real>& dL_dS);

template <typename Real>
SeqTensor<Real> backward_input(const LayerTape<Real>& tape, const SurrogateConfig& cfg,
                               const SeqTensor<Real>& dL_dS, int workers = 1);

template <typename Real>
GradBundle backward_params(const LayerTape<Real>& tape, const SurrogateConfig& cfg,
                           const SeqTensor<Real>& dL_dS, int workers = 1);

/// Dense + PMSN model used for finite-difference verification, all in
/// double. In_features x neurons weights, row-major.
struct FdModel {
  PmsnParams params;
  std::size_t in_features = 0;
  std::vector<double> W;
  std::vector<double> b;
  ForwardOptions options;
  SurrogateConfig surrogate;
  /// Loss on I_h directly: no clamp, no spiking.
  bool linear = false;
};

struct FdEntry {
  std::string name;
  double max_rel_err = 0.0;
  std::size_t argmax = 0;  ///< coordinate index within the field
  double analytic = 0.0;   ///< values at argmax
  double numeric = 0.0;
  std::size_t coordinates = 0;
};

struct FdReport {
  double eps = 0.0;
  std::vector<FdEntry> entries;
  double max_rel_err() const noexcept;
  bool passed(double tol) const noexcept { return max_rel_err() <= tol; }
  nlohmann::json to_json() const;
};

/// Loss sum(weights * S) of the smoothed model: the spike is the ramp and
/// the reset bookkeeping beyond its straight-through part is frozen at the
/// hard forward of the unperturbed model.
double smoothed_loss(const FdModel& base, const FdModel& m, const SeqTensor<double>& x,
                     const SeqTensor<double>& weights);

/// Analytic gradient of smoothed_loss at `m` as a flat coordinate list per
/// field, in the order fd_check perturbs them.
std::vector<std::pair<std::string, std::vector<double>>> analytic_gradient(
    const FdModel& m, const SeqTensor<double>& x, const SeqTensor<double>& weights);

/// Central differences (five-point stencil) of smoothed_loss against the
/// analytic backward. Conjugate pairs are perturbed together. The relative
/// error of a coordinate is |a - n| / max(|a|, |n|, 1e-6 * field max).
FdReport fd_check(const FdModel& m, const SeqTensor<double>& x, const SeqTensor<double>& weights,
                  double eps);

}  // namespace pmsn
