#include "pmsn/optim.hpp"

#include <cmath>
#include <numbers>

#include "pmsn/error.hpp"

namespace pmsn {

LrSchedule parse_schedule(std::string_view s) {
  if (s == "constant") return LrSchedule::kConstant;
  if (s == "cosine") return LrSchedule::kCosine;
  throw InvalidArgument("unknown learning-rate schedule '" + std::string(s) + "' (constant|cosine)");
}

std::string_view to_string(LrSchedule s) { return s == LrSchedule::kConstant ? "constant" : "cosine"; }

double lr_scale(LrSchedule s, int epoch, int epochs) {
  if (s == LrSchedule::kConstant || epochs <= 1) return 1.0;
  return 0.5 * (1.0 + std::cos(std::numbers::pi * static_cast<double>(epoch) / static_cast<double>(epochs)));
}

void adamw_step(OptimState& st, std::span<const ParamSlot> slots, const AdamWConfig& cfg, double scale) {
  if (st.m.empty()) {
    for (const auto& s : slots) {
      st.m.emplace_back(s.value.size(), 0.0);
      st.v.emplace_back(s.value.size(), 0.0);
    }
  }
  if (st.m.size() != slots.size()) throw InvalidState("optimizer state does not match the parameter list");
  ++st.step;
  const double bc1 = 1.0 - std::pow(cfg.beta1, static_cast<double>(st.step));
  const double bc2 = 1.0 - std::pow(cfg.beta2, static_cast<double>(st.step));
  for (std::size_t k = 0; k < slots.size(); ++k) {
    const auto& s = slots[k];
    if (st.m[k].size() != s.value.size()) throw InvalidState("optimizer moment size mismatch for " + s.name);
    const bool synaptic = s.group == ParamGroup::kSynaptic;
    const double lr = scale * (synaptic ? cfg.lr_global : cfg.lr_neuronal);
    const double decay = synaptic ? cfg.weight_decay : 0.0;
    auto& m = st.m[k];
    auto& v = st.v[k];
    for (std::size_t i = 0; i < s.value.size(); ++i) {
      const double g = s.grad[i];
      s.value[i] *= 1.0 - lr * decay;
      m[i] = cfg.beta1 * m[i] + (1.0 - cfg.beta1) * g;
      v[i] = cfg.beta2 * v[i] + (1.0 - cfg.beta2) * g * g;
      s.value[i] -= lr * (m[i] / bc1) / (std::sqrt(v[i] / bc2) + cfg.eps);
    }
  }
}

}  // namespace pmsn
