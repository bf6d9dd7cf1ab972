#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <string>
#include <vector>

#include "pmsn/neuron.hpp"
#include "pmsn/trainer.hpp"

namespace pmsn {

__extension__ typedef __int128 Int128;

/// Exact non-negative fraction on 128-bit integers, kept in lowest terms.
struct Rational {
  Int128 num = 0;
  Int128 den = 1;

  Rational() = default;
  Rational(Int128 n, Int128 d = 1);
  Rational operator+(const Rational& o) const;
  Rational operator*(const Rational& o) const;
  bool operator==(const Rational& o) const { return num == o.num && den == o.den; }
  double to_double() const;
  /// Exact decimal when the expansion terminates, otherwise "num/den".
  std::string to_string() const;
};

enum class ModelKind { kLif, kPmsn, kPsn, kMaskedPsn, kSpsn };
ModelKind parse_model_kind(std::string_view s);
std::string_view to_string(ModelKind k);

/// Energy constants in tenths of a picojoule: 0.9 pJ per accumulate,
/// 4.6 pJ per multiply-accumulate (45 nm CMOS).
inline constexpr int kEacDeciPj = 9;
inline constexpr int kEmacDeciPj = 46;

/// Per-layer quantities of the cost model. The presynaptic spike rate is
/// the fraction fr_num / fr_den, normally (nonzero inputs) / (inputs).
struct EnergyStats {
  std::string layer;
  ModelKind kind = ModelKind::kPmsn;
  std::uint64_t h = 0;  ///< input dimension
  std::uint64_t m = 0;  ///< neurons
  std::uint64_t t = 0;  ///< timesteps
  std::uint64_t n = 1;  ///< compartments (PMSN)
  std::uint64_t k = 0;  ///< window / order (masked PSN, SPSN)
  std::uint64_t fr_num = 0;
  std::uint64_t fr_den = 1;
};

struct EnergyReport {
  std::string layer;
  Rational ac_count;
  Rational mac_count;
  Rational picojoules;
};

/// Accumulates h*m*t*Fr; multiply-accumulates m*t (LIF), 8(n-1)*m*t
/// (PMSN), m*t^2 (PSN) or k*m*t (masked PSN, SPSN).
EnergyReport energy_estimate(const EnergyStats& s);

/// Per-block statistics of a network evaluated on sequences of length T.
/// Fr_in is the exact nonzero fraction of each block's input over the
/// evaluation; the first block sees raw inputs, later blocks see spikes.
std::vector<EnergyStats> network_energy_stats(const Network& net, const EvalResult& eval, std::size_t T);

void write_energy_csv(const std::filesystem::path& path, const std::vector<EnergyReport>& rows);

/// Total spikes / element count.
template <typename Real>
double spike_density(const SeqTensor<Real>& S);

struct TimingStats {
  double median_us = 0.0;
  double iqr_us = 0.0;
  int repetitions = 0;
};

/// Runs fn `warmup` times unmeasured, then `repetitions` (>= 5) times.
TimingStats measure(const std::function<void()>& fn, int repetitions, int warmup = 1);

struct TimingRow {
  std::string model;  ///< e.g. "parallel_pmsn:forward"
  std::size_t T = 0;
  std::size_t batch = 0;
  double median_us = 0.0;
  double iqr_us = 0.0;
  double ratio = 1.0;  ///< median / median of parallel_pmsn with the same pass
  int repetitions = 0;
};

struct TimingConfig {
  std::vector<std::size_t> T_list{128, 1024};
  std::vector<std::size_t> batch_list{8};
  std::size_t neurons = 64;
  int n = 5;
  int repetitions = 5;
  int warmup = 1;
  int workers = 1;
  bool backward = true;
  std::uint64_t seed = 0;
};

/// Serial multi-compartment, serial LIF and parallel PMSN layers, forward
/// and forward+backward, at every (T, batch).
std::vector<TimingRow> time_models(const TimingConfig& cfg);
void write_timing_csv(const std::filesystem::path& path, const std::vector<TimingRow>& rows);

struct ImpulseTrace {
  std::size_t T = 0;
  std::size_t modes = 0;
  /// mode_values[t * modes + j] = Re(Phi_s,j V_h,j[t]) for a unit impulse
  /// at t = 0 into neuron `neuron`.
  std::vector<double> mode_values;
  std::vector<double> v_s;
  std::vector<double> spikes;
};

ImpulseTrace impulse_trace(const PmsnParams& p, std::size_t T, std::size_t neuron = 0,
                           const SerialOptions& opt = {});
/// Columns t, compartment, value; compartments 1..modes are the hidden
/// eigenmodes and modes+1 is the output compartment.
void write_impulse_csv(const std::filesystem::path& path, const ImpulseTrace& tr);

/// One row per (neuron, mode): oscillation frequency Im(lambda dt) / 2pi
/// and damping Re(lambda dt), both per step.
struct ModeSpectrum {
  std::vector<std::size_t> neuron, mode;
  std::vector<double> frequency, damping;
};
ModeSpectrum mode_spectrum(const PmsnParams& p);
void write_spectrum_csv(const std::filesystem::path& path, const ModeSpectrum& s);

struct Histogram {
  double lo = 0.0, hi = 0.0;
  std::vector<std::size_t> counts;
};
Histogram histogram(const std::vector<double>& values, std::size_t bins);
void write_histogram_csv(const std::filesystem::path& path, const std::string& quantity, const Histogram& h);

/// Indices t where the sign changes between t-1 and t (zeros skipped).
std::vector<std::size_t> zero_crossings(const std::vector<double>& x, std::size_t stride = 1,
                                        std::size_t offset = 0);

}  // namespace pmsn
