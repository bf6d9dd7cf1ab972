#pragma once

#include <filesystem>
#include <functional>
#include <string>
#include <vector>

#include "pmsn/data.hpp"
#include "pmsn/network.hpp"
#include "pmsn/optim.hpp"

namespace pmsn {

struct TrainConfig {
  int epochs = 20;
  std::size_t batch_size = 64;
  AdamWConfig adam;
  LrSchedule schedule = LrSchedule::kConstant;
  std::uint64_t seed = 0;
  int workers = 1;
  /// When set: metrics.csv is appended after each epoch and
  /// checkpoint.pmsn rewritten at each epoch boundary.
  std::filesystem::path out_dir;
  /// Stop after this many optimizer steps in total (0 = no limit).
  std::uint64_t max_steps = 0;
};

struct MetricsRow {
  int epoch = 0;
  std::string split;
  double loss = 0.0;
  double accuracy = 0.0;
  double wall_seconds = 0.0;
  double spikes_per_neuron_per_step = 0.0;
};

struct EvalResult {
  double loss = 0.0;
  double accuracy = 0.0;
  std::vector<double> spike_rate;  ///< per block
  std::vector<double> input_rate;  ///< per block
  std::vector<std::uint64_t> input_nonzero;   ///< per block, summed over the set
  std::vector<std::uint64_t> input_elements;  ///< per block, summed over the set
};

struct TrainResult {
  std::vector<MetricsRow> metrics;
  std::vector<double> step_losses;
  int next_epoch = 0;
};

template <typename Real>
EvalResult evaluate(const Network& net, const Dataset& data, std::size_t batch_size, int workers = 1);

/// Mini-batch training with a per-epoch shuffle seeded by (seed, epoch).
/// Starts at opt's recorded epoch when resuming. A non-finite loss writes
/// the last epoch-boundary state to out_dir/last_good.pmsn (when out_dir
/// is set) and throws NumericFailure.
template <typename Real>
TrainResult train_loop(Network& net, OptimState& opt, const Dataset& train, const Dataset& test,
                       const TrainConfig& cfg, int start_epoch = 0,
                       const std::function<void(const MetricsRow&)>& on_metrics = {});

/// Network parameters, optimizer moments and the next epoch index.
Container make_checkpoint(const Network& net, const OptimState& opt, int next_epoch);
/// Restores net and opt; returns the next epoch index.
int restore_checkpoint(const Container& c, Network& net, OptimState& opt);

void write_metrics_header(const std::filesystem::path& path);
void append_metrics(const std::filesystem::path& path, const MetricsRow& row);

}  // namespace pmsn
