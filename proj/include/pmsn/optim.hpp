#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace pmsn {

enum class ParamGroup { kSynaptic, kNeuronal };

/// A learnable tensor viewed as flat doubles (complex values contribute
/// their real and imaginary parts) with its gradient buffer.
struct ParamSlot {
  std::string name;
  ParamGroup group = ParamGroup::kSynaptic;
  std::span<double> value;
  std::span<double> grad;
};

struct AdamWConfig {
  double lr_global = 1e-2;    ///< synaptic group
  double lr_neuronal = 1e-3;  ///< neuronal group
  double weight_decay = 1e-2; ///< synaptic group only
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

struct OptimState {
  std::vector<std::vector<double>> m, v;  ///< one pair per slot
  std::uint64_t step = 0;
};

enum class LrSchedule { kConstant, kCosine };
LrSchedule parse_schedule(std::string_view s);
std::string_view to_string(LrSchedule s);

/// Multiplier on the base learning rates at `epoch` of `epochs`.
double lr_scale(LrSchedule s, int epoch, int epochs);

/// One decoupled-weight-decay Adam step over all slots; moment buffers are
/// created on first use.
void adamw_step(OptimState& st, std::span<const ParamSlot> slots, const AdamWConfig& cfg,
                double scale = 1.0);

}  // namespace pmsn
