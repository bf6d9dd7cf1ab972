#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "pmsn/container.hpp"
#include "pmsn/grad.hpp"
#include "pmsn/layers.hpp"
#include "pmsn/optim.hpp"
#include "pmsn/parallel.hpp"

namespace pmsn {

enum class NeuronKind { kPmsn, kLif };
NeuronKind parse_neuron_kind(std::string_view s);
std::string_view to_string(NeuronKind k);

struct NetworkSpec {
  std::size_t input = 1;
  std::vector<std::size_t> hidden{64};
  int classes = 2;
  NeuronKind neuron = NeuronKind::kPmsn;
  int n = 5;                      ///< compartments per PMSN neuron
  bool norm = true;               ///< batch norm between dense and neuron
  double dropout = 0.0;           ///< on spikes leaving each block
  std::size_t readout_window = 0; ///< trailing steps averaged by the readout, 0 = all
  double lif_alpha = 0.95;
  double theta = 1.0;
  SurrogateConfig surrogate;
  ForwardOptions forward;
  std::uint64_t seed = 0;

  /// Throws ConfigError naming the offending key.
  void validate() const;
};

template <typename Real>
struct BlockTape {
  SeqTensor<Real> x;  ///< block input
  SeqTensor<Real> pre_norm;
  BatchNorm::Cache<Real> norm;
  LayerTape<Real> pmsn;
  SeqTensor<Real> lif_v;
  SeqTensor<Real> keep;  ///< dropout multipliers, empty when unused
};

template <typename Real>
struct NetworkTape {
  std::vector<BlockTape<Real>> blocks;
  SeqTensor<Real> readout_in;
};

struct NetworkOutput {
  std::size_t batch = 0;
  int classes = 0;
  std::vector<double> logits;       ///< batch x classes
  std::vector<double> spike_rate;   ///< per block: spikes / (batch * T * neurons)
  std::vector<double> input_rate;   ///< per block: nonzero fraction of the block input
  std::vector<std::uint64_t> input_nonzero;  ///< per block: nonzero input entries
  std::vector<std::uint64_t> input_elements; ///< per block: input entries
};

struct Block {
  DenseLayer dense;
  std::optional<BatchNorm> norm;
  PmsnParams pmsn;
  GradBundle pmsn_grad;
  LIFParams lif;
};

/// Stack of (dense, norm, spiking neuron) blocks and a dense readout that
/// averages the last spiking layer's output over the readout window.
class Network {
 public:
  explicit Network(const NetworkSpec& spec);

  const NetworkSpec& spec() const noexcept { return spec_; }
  std::vector<Block>& blocks() noexcept { return blocks_; }
  const std::vector<Block>& blocks() const noexcept { return blocks_; }
  DenseLayer& readout() noexcept { return readout_; }
  const DenseLayer& readout() const noexcept { return readout_; }

  /// Training mode uses batch statistics and dropout and fills `tape`.
  template <typename Real>
  NetworkOutput forward(const SeqTensor<Real>& x, bool training, std::uint64_t dropout_seed,
                        NetworkTape<Real>* tape, int workers = 1);
  /// Evaluation forward; no state changes.
  template <typename Real>
  NetworkOutput predict(const SeqTensor<Real>& x, int workers = 1) const;
  /// Accumulates gradients of the loss whose logit gradient is `dlogits`.
  template <typename Real>
  void backward(const NetworkTape<Real>& tape, std::span<const double> dlogits, int workers = 1);

  void zero_grad();
  /// Every learnable tensor with its group: dense and norm parameters are
  /// synaptic, PMSN fields are neuronal.
  std::vector<ParamSlot> parameters();
  /// Restores conjugate pairing and the stability clamp after an update.
  void after_step();

  void save(Container& c) const;
  void load(const Container& c);

 private:
  template <typename Real>
  NetworkOutput run(const SeqTensor<Real>& x, bool training, std::uint64_t dropout_seed,
                    NetworkTape<Real>& tape, int workers) const;

  NetworkSpec spec_;
  std::vector<Block> blocks_;
  DenseLayer readout_;
  mutable std::vector<std::shared_ptr<const KernelCache>> kernels_;
};

}  // namespace pmsn
