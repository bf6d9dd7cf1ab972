#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <nlohmann/json.hpp>
#include <string>
#include <variant>
#include <vector>

#include "pmsn/network.hpp"
#include "pmsn/trainer.hpp"

namespace pmsn {

/// Value of the TOML subset: strings, integers, floats, booleans and flat
/// arrays of those.
struct TomlValue {
  using Array = std::vector<TomlValue>;
  std::variant<std::string, std::int64_t, double, bool, Array> v;
  int line = 0;

  bool is_string() const { return std::holds_alternative<std::string>(v); }
  bool is_int() const { return std::holds_alternative<std::int64_t>(v); }
  bool is_float() const { return std::holds_alternative<double>(v); }
  bool is_bool() const { return std::holds_alternative<bool>(v); }
  bool is_array() const { return std::holds_alternative<Array>(v); }
  /// Compares values only, not source lines.
  friend bool operator==(const TomlValue& a, const TomlValue& b) { return a.v == b.v; }
};

/// Fully qualified dotted key -> value.
using TomlDoc = std::map<std::string, TomlValue>;

/// Tables, dotted keys, basic and literal strings, decimal/hex integers,
/// floats (inf, nan), booleans, arrays (multi-line allowed) and comments.
/// Throws ConfigError carrying the line number.
TomlDoc parse_toml(const std::string& text);

struct RunConfig {
  // model
  int n = 5;
  std::vector<std::size_t> hidden{64};
  NeuronKind neuron = NeuronKind::kPmsn;
  bool norm = true;
  std::size_t readout_window = 0;
  double lif_alpha = 0.95;
  double theta = 1.0;
  double surrogate_width = 1.0;

  // train
  double lr_global = 1e-2;
  double lr_neuronal = 1e-3;
  double weight_decay = 1e-2;
  int epochs = 20;
  std::size_t batch_size = 64;
  double dropout = 0.0;
  LrSchedule schedule = LrSchedule::kConstant;
  std::uint64_t max_steps = 0;

  // data
  std::string task = "delayed_recall";  ///< delayed_recall | smnist | psmnist | random
  std::uint64_t data_seed = 0;
  std::string path = "data/mnist01";
  std::size_t n_train = 2000;
  std::size_t n_test = 500;
  std::size_t T = 200;
  std::size_t cue_window = 10;
  int n_classes = 2;
  double noise = 1.0;
  std::vector<int> digits{0, 1};

  // forward
  ForwardMode mode = ForwardMode::kParallel;
  Context context = Context::kLocal;
  ResetMode reset = ResetMode::kFloor;
  bool clamp_ih = true;

  // bench
  std::vector<std::size_t> bench_T{128, 1024};
  std::vector<std::size_t> bench_batch{8};
  std::size_t bench_neurons = 64;
  int bench_repetitions = 5;

  // gradcheck
  std::size_t grad_T = 32;
  std::size_t grad_batch = 2;
  std::size_t grad_neurons = 3;
  std::size_t grad_inputs = 2;
  double grad_eps = 1e-5;
  double grad_tolerance = 1e-4;
  bool grad_linear = false;

  // simulate / impulse
  std::size_t sim_batch = 1;
  std::size_t sim_neurons = 4;

  std::uint64_t seed = 0;
  int workers = 1;
  Precision precision = Precision::kSingle;

  NetworkSpec network_spec(std::size_t input, int classes) const;
  TrainConfig train_config() const;
  ForwardOptions forward_options() const;
  nlohmann::json to_json() const;
};

/// Applies a parsed document onto defaults. Unknown keys and type
/// mismatches throw ConfigError naming the key. model.n and
/// model.compartments are synonyms and must agree when both are set.
RunConfig run_config_from_toml(const TomlDoc& doc);
RunConfig parse_run_config(const std::string& text);
RunConfig load_run_config(const std::filesystem::path& path);

}  // namespace pmsn
