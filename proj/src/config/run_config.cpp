#include <fstream>
#include <functional>
#include <sstream>

#include "pmsn/config.hpp"
#include "pmsn/error.hpp"

namespace pmsn {

namespace {

std::string type_name(const TomlValue& v) {
  if (v.is_string()) return "string";
  if (v.is_int()) return "integer";
  if (v.is_float()) return "float";
  if (v.is_bool()) return "boolean";
  return "array";
}

[[noreturn]] void bad_type(const std::string& key, const TomlValue& v, const char* want) {
  throw ConfigError("key '" + key + "' expects " + want + ", got " + type_name(v), key, v.line);
}

double as_double(const std::string& key, const TomlValue& v) {
  if (v.is_float()) return std::get<double>(v.v);
  if (v.is_int()) return static_cast<double>(std::get<std::int64_t>(v.v));
  bad_type(key, v, "a number");
}

std::int64_t as_int(const std::string& key, const TomlValue& v) {
  if (!v.is_int()) bad_type(key, v, "an integer");
  return std::get<std::int64_t>(v.v);
}

std::uint64_t as_count(const std::string& key, const TomlValue& v) {
  const auto i = as_int(key, v);
  if (i < 0) throw ConfigError("key '" + key + "' must be non-negative", key, v.line);
  return static_cast<std::uint64_t>(i);
}

bool as_bool(const std::string& key, const TomlValue& v) {
  if (!v.is_bool()) bad_type(key, v, "a boolean");
  return std::get<bool>(v.v);
}

std::string as_string(const std::string& key, const TomlValue& v) {
  if (!v.is_string()) bad_type(key, v, "a string");
  return std::get<std::string>(v.v);
}

std::vector<std::size_t> as_counts(const std::string& key, const TomlValue& v) {
  if (!v.is_array()) return {static_cast<std::size_t>(as_count(key, v))};
  std::vector<std::size_t> out;
  for (const auto& item : std::get<TomlValue::Array>(v.v)) out.push_back(as_count(key, item));
  return out;
}

template <typename F>
auto as_enum(const std::string& key, const TomlValue& v, F parse) {
  const auto s = as_string(key, v);
  try {
    return parse(s);
  } catch (const InvalidArgument& e) {
    throw ConfigError("key '" + key + "': " + e.what(), key, v.line);
  }
}

}  // namespace

RunConfig run_config_from_toml(const TomlDoc& doc) {
  RunConfig c;
  using Setter = std::function<void(const std::string&, const TomlValue&)>;
  const std::map<std::string, Setter> setters{
      {"model.n", [&](auto& k, auto& v) { c.n = static_cast<int>(as_int(k, v)); }},
      {"model.compartments", [&](auto& k, auto& v) { c.n = static_cast<int>(as_int(k, v)); }},
      {"model.hidden", [&](auto& k, auto& v) { c.hidden = as_counts(k, v); }},
      {"model.neuron", [&](auto& k, auto& v) { c.neuron = as_enum(k, v, parse_neuron_kind); }},
      {"model.norm", [&](auto& k, auto& v) { c.norm = as_bool(k, v); }},
      {"model.readout_window", [&](auto& k, auto& v) { c.readout_window = as_count(k, v); }},
      {"model.lif_alpha", [&](auto& k, auto& v) { c.lif_alpha = as_double(k, v); }},
      {"model.theta", [&](auto& k, auto& v) { c.theta = as_double(k, v); }},
      {"model.surrogate_width", [&](auto& k, auto& v) { c.surrogate_width = as_double(k, v); }},
      {"train.lr_global", [&](auto& k, auto& v) { c.lr_global = as_double(k, v); }},
      {"train.lr_neuronal", [&](auto& k, auto& v) { c.lr_neuronal = as_double(k, v); }},
      {"train.weight_decay", [&](auto& k, auto& v) { c.weight_decay = as_double(k, v); }},
      {"train.epochs", [&](auto& k, auto& v) { c.epochs = static_cast<int>(as_count(k, v)); }},
      {"train.batch_size", [&](auto& k, auto& v) { c.batch_size = as_count(k, v); }},
      {"train.dropout", [&](auto& k, auto& v) { c.dropout = as_double(k, v); }},
      {"train.schedule", [&](auto& k, auto& v) { c.schedule = as_enum(k, v, parse_schedule); }},
      {"train.max_steps", [&](auto& k, auto& v) { c.max_steps = as_count(k, v); }},
      {"data.task", [&](auto& k, auto& v) { c.task = as_string(k, v); }},
      {"data.seed", [&](auto& k, auto& v) { c.data_seed = as_count(k, v); }},
      {"data.path", [&](auto& k, auto& v) { c.path = as_string(k, v); }},
      {"data.n_train", [&](auto& k, auto& v) { c.n_train = as_count(k, v); }},
      {"data.n_test", [&](auto& k, auto& v) { c.n_test = as_count(k, v); }},
      {"data.T", [&](auto& k, auto& v) { c.T = as_count(k, v); }},
      {"data.cue_window", [&](auto& k, auto& v) { c.cue_window = as_count(k, v); }},
      {"data.n_classes", [&](auto& k, auto& v) { c.n_classes = static_cast<int>(as_count(k, v)); }},
      {"data.noise", [&](auto& k, auto& v) { c.noise = as_double(k, v); }},
      {"data.digits",
       [&](auto& k, auto& v) {
         c.digits.clear();
         for (auto d : as_counts(k, v)) c.digits.push_back(static_cast<int>(d));
       }},
      {"forward.mode", [&](auto& k, auto& v) { c.mode = as_enum(k, v, parse_forward_mode); }},
      {"forward.context", [&](auto& k, auto& v) { c.context = as_enum(k, v, parse_context); }},
      {"forward.reset", [&](auto& k, auto& v) { c.reset = as_enum(k, v, parse_reset_mode); }},
      {"forward.clamp_ih", [&](auto& k, auto& v) { c.clamp_ih = as_bool(k, v); }},
      {"reset", [&](auto& k, auto& v) { c.reset = as_enum(k, v, parse_reset_mode); }},
      {"clamp_ih", [&](auto& k, auto& v) { c.clamp_ih = as_bool(k, v); }},
      {"bench.T", [&](auto& k, auto& v) { c.bench_T = as_counts(k, v); }},
      {"bench.batch", [&](auto& k, auto& v) { c.bench_batch = as_counts(k, v); }},
      {"bench.neurons", [&](auto& k, auto& v) { c.bench_neurons = as_count(k, v); }},
      {"bench.repetitions",
       [&](auto& k, auto& v) { c.bench_repetitions = static_cast<int>(as_count(k, v)); }},
      {"gradcheck.T", [&](auto& k, auto& v) { c.grad_T = as_count(k, v); }},
      {"gradcheck.batch", [&](auto& k, auto& v) { c.grad_batch = as_count(k, v); }},
      {"gradcheck.neurons", [&](auto& k, auto& v) { c.grad_neurons = as_count(k, v); }},
      {"gradcheck.inputs", [&](auto& k, auto& v) { c.grad_inputs = as_count(k, v); }},
      {"gradcheck.eps", [&](auto& k, auto& v) { c.grad_eps = as_double(k, v); }},
      {"gradcheck.tolerance", [&](auto& k, auto& v) { c.grad_tolerance = as_double(k, v); }},
      {"gradcheck.linear", [&](auto& k, auto& v) { c.grad_linear = as_bool(k, v); }},
      {"simulate.batch", [&](auto& k, auto& v) { c.sim_batch = as_count(k, v); }},
      {"simulate.neurons", [&](auto& k, auto& v) { c.sim_neurons = as_count(k, v); }},
      {"seed", [&](auto& k, auto& v) { c.seed = as_count(k, v); }},
      {"workers", [&](auto& k, auto& v) { c.workers = static_cast<int>(as_count(k, v)); }},
      {"precision",
       [&](auto& k, auto& v) {
         const auto s = as_string(k, v);
         if (s == "single") c.precision = Precision::kSingle;
         else if (s == "double") c.precision = Precision::kDouble;
         else throw ConfigError("key 'precision' must be single or double", k, v.line);
       }},
  };

  auto synonym = [&](const char* a, const char* b) {
    auto ia = doc.find(a), ib = doc.find(b);
    if (ia == doc.end() || ib == doc.end()) return;
    const bool same = ia->second == ib->second;
    if (!same)
      throw ConfigError(std::string("'") + a + "' and '" + b + "' disagree", b, ib->second.line);
  };
  synonym("model.n", "model.compartments");
  synonym("forward.reset", "reset");
  synonym("forward.clamp_ih", "clamp_ih");

  for (const auto& [key, value] : doc) {
    auto it = setters.find(key);
    if (it == setters.end()) throw ConfigError("unknown config key '" + key + "'", key, value.line);
    it->second(key, value);
  }
  if (c.workers < 1) throw ConfigError("workers must be at least 1", "workers");
  if (c.bench_repetitions < 5)
    throw ConfigError("bench.repetitions must be at least 5", "bench.repetitions");
  if (c.task != "delayed_recall" && c.task != "smnist" && c.task != "psmnist" && c.task != "random")
    throw ConfigError("data.task must be delayed_recall, smnist, psmnist or random", "data.task");
  return c;
}

RunConfig parse_run_config(const std::string& text) { return run_config_from_toml(parse_toml(text)); }

RunConfig load_run_config(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open config " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_run_config(ss.str());
}

NetworkSpec RunConfig::network_spec(std::size_t input, int classes) const {
  NetworkSpec s;
  s.input = input;
  s.hidden = hidden;
  s.classes = classes;
  s.neuron = neuron;
  s.n = n;
  s.norm = norm;
  s.dropout = dropout;
  s.readout_window = readout_window;
  s.lif_alpha = lif_alpha;
  s.theta = theta;
  s.surrogate.gamma_width = surrogate_width;
  s.forward = forward_options();
  s.seed = seed;
  return s;
}

TrainConfig RunConfig::train_config() const {
  TrainConfig t;
  t.epochs = epochs;
  t.batch_size = batch_size;
  t.adam.lr_global = lr_global;
  t.adam.lr_neuronal = lr_neuronal;
  t.adam.weight_decay = weight_decay;
  t.schedule = schedule;
  t.seed = seed;
  t.workers = workers;
  t.max_steps = max_steps;
  return t;
}

ForwardOptions RunConfig::forward_options() const {
  ForwardOptions f;
  f.mode = mode;
  f.context = context;
  f.reset = reset;
  f.clamp_ih = clamp_ih;
  f.workers = workers;
  return f;
}

nlohmann::json RunConfig::to_json() const {
  using nlohmann::json;
  return json{
      {"model",
       {{"n", n},
        {"hidden", hidden},
        {"neuron", std::string(to_string(neuron))},
        {"norm", norm},
        {"readout_window", readout_window},
        {"lif_alpha", lif_alpha},
        {"theta", theta},
        {"surrogate_width", surrogate_width}}},
      {"train",
       {{"lr_global", lr_global},
        {"lr_neuronal", lr_neuronal},
        {"weight_decay", weight_decay},
        {"epochs", epochs},
        {"batch_size", batch_size},
        {"dropout", dropout},
        {"schedule", std::string(to_string(schedule))},
        {"max_steps", max_steps}}},
      {"data",
       {{"task", task},
        {"seed", data_seed},
        {"path", path},
        {"n_train", n_train},
        {"n_test", n_test},
        {"T", T},
        {"cue_window", cue_window},
        {"n_classes", n_classes},
        {"noise", noise},
        {"digits", digits}}},
      {"forward",
       {{"mode", mode == ForwardMode::kParallel ? "parallel" : "serial"},
        {"context", std::string(to_string(context))},
        {"reset", std::string(to_string(reset))},
        {"clamp_ih", clamp_ih}}},
      {"bench",
       {{"T", bench_T}, {"batch", bench_batch}, {"neurons", bench_neurons}, {"repetitions", bench_repetitions}}},
      {"gradcheck",
       {{"T", grad_T},
        {"batch", grad_batch},
        {"neurons", grad_neurons},
        {"inputs", grad_inputs},
        {"eps", grad_eps},
        {"tolerance", grad_tolerance},
        {"linear", grad_linear}}},
      {"simulate", {{"batch", sim_batch}, {"neurons", sim_neurons}}},
      {"seed", seed},
      {"workers", workers},
      {"precision", std::string(to_string(precision))}};
}

}  // namespace pmsn
