#include "commands.hpp"

#include <algorithm>
#include <charconv>
#include <chrono>
#include <cmath>
#include <ctime>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <map>
#include <random>
#include <sstream>
#include <thread>

#include "pmsn/bench.hpp"
#include "pmsn/data.hpp"
#include "pmsn/error.hpp"
#include "pmsn/grad.hpp"
#include "pmsn/network.hpp"
#include "pmsn/parallel.hpp"
#include "pmsn/trainer.hpp"
#include "pmsn/version.hpp"

namespace pmsn::cli {

namespace {

using nlohmann::json;

std::string utc_now() {
  const auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  std::ostringstream os;
  os << std::put_time(&tm, "%Y-%m-%dT%H:%M:%SZ");
  return os.str();
}

std::ofstream open_out(const std::filesystem::path& path) {
  std::ofstream os(path);
  if (!os) throw IoError("cannot open " + path.string() + " for writing");
  os.precision(17);
  return os;
}

void write_json(const std::filesystem::path& path, const json& j) {
  auto os = open_out(path);
  os << j.dump(2) << '\n';
  if (!os) throw IoError("failed writing " + path.string());
}

template <typename Real>
SeqTensor<Real> gaussian_input(std::size_t B, std::size_t T, std::size_t F, std::uint64_t seed, double mean,
                               double sd) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> nd(mean, sd);
  SeqTensor<Real> x(B, T, F);
  for (auto& v : x.data()) v = static_cast<Real>(nd(rng));
  return x;
}

/// Rows of comma-separated numbers, one per step. A first line holding
/// letters is taken as a header.
SeqTensor<double> read_input_csv(const std::filesystem::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw IoError("cannot open " + path.string());
  std::vector<std::vector<double>> rows;
  std::string line;
  std::uint64_t offset = 0;
  bool first = true;
  while (std::getline(is, line)) {
    const std::uint64_t line_start = offset;
    offset += line.size() + 1;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.find_first_not_of(" \t") == std::string::npos) continue;
    if (first && std::any_of(line.begin(), line.end(), [](char c) { return std::isalpha(static_cast<unsigned char>(c)) && c != 'e' && c != 'E'; })) {
      first = false;
      continue;
    }
    first = false;
    std::vector<double> row;
    std::size_t pos = 0;
    while (pos <= line.size()) {
      std::size_t end = line.find(',', pos);
      if (end == std::string::npos) end = line.size();
      std::size_t a = pos, b = end;
      while (a < b && (line[a] == ' ' || line[a] == '\t')) ++a;
      while (b > a && (line[b - 1] == ' ' || line[b - 1] == '\t')) --b;
      double v = 0.0;
      const auto res = std::from_chars(line.data() + a, line.data() + b, v);
      if (a == b || res.ec != std::errc() || res.ptr != line.data() + b)
        throw ParseError("not a number in " + path.string(), line_start + a);
      row.push_back(v);
      pos = end + 1;
    }
    if (!rows.empty() && row.size() != rows.front().size())
      throw ParseError("row has " + std::to_string(row.size()) + " columns, expected " +
                           std::to_string(rows.front().size()),
                       line_start);
    rows.push_back(std::move(row));
  }
  if (rows.empty()) throw ParseError("input file " + path.string() + " holds no samples", 0);
  SeqTensor<double> x(1, rows.size(), rows.front().size());
  for (std::size_t t = 0; t < rows.size(); ++t)
    for (std::size_t f = 0; f < rows[t].size(); ++f) x(0, t, f) = rows[t][f];
  return x;
}

template <typename To, typename From>
SeqTensor<To> cast(const SeqTensor<From>& x) {
  SeqTensor<To> y(x.batch(), x.time(), x.features());
  for (std::size_t i = 0; i < x.size(); ++i) y.data()[i] = static_cast<To>(x.data()[i]);
  return y;
}

template <typename Real>
void write_traces(const std::filesystem::path& dir, const PmsnParams& p, const SeqTensor<Real>& I,
                  const ForwardOutput<Real>& out) {
  auto os = open_out(dir / "traces.csv");
  os << "batch,t,neuron,input,I_h,v_s,spike,v_r\n";
  for (std::size_t b = 0; b < I.batch(); ++b)
    for (std::size_t t = 0; t < I.time(); ++t)
      for (std::size_t f = 0; f < I.features(); ++f)
        os << b << ',' << t << ',' << f << ',' << I(b, t, f) << ',' << out.I_h(b, t, f) << ','
           << out.v_s(b, t, f) << ',' << out.S(b, t, f) << ',' << out.v_r(b, t, f) << '\n';
  if (out.V_h.size()) {
    auto hs = open_out(dir / "hidden.csv");
    hs << "batch,t,neuron,mode,re,im\n";
    for (std::size_t b = 0; b < I.batch(); ++b)
      for (std::size_t t = 0; t < I.time(); ++t)
        for (std::size_t f = 0; f < p.neurons; ++f)
          for (std::size_t j = 0; j < p.modes; ++j) {
            const auto v = out.V_h.at(b, t, p.index(f, j));
            hs << b << ',' << t << ',' << f << ',' << j << ',' << v.real() << ',' << v.imag() << '\n';
          }
  }
}

template <typename Real>
int simulate_as(const Context& ctx, const SimulateFlags& flags) {
  const RunConfig& c = ctx.config;
  SeqTensor<Real> I;
  if (!flags.input.empty())
    I = cast<Real>(read_input_csv(flags.input));
  else
    I = gaussian_input<Real>(c.sim_batch, c.T, c.sim_neurons, c.seed + 1, 0.5, 2.0);
  const PmsnParams p = init_params(c.n, I.features(), c.seed).pmsn;
  ForwardOptions opt = c.forward_options();
  opt.keep_hidden = true;
  const auto out = layer_forward(p, I, opt);
  write_traces(ctx.out_dir, p, I, out);
  std::cout << "simulated " << I.batch() << " x " << I.time() << " x " << I.features() << " ("
            << (opt.mode == ForwardMode::kParallel ? "parallel" : "serial") << "), spike density "
            << spike_density(out.S) << '\n';
  if (!flags.compare) return 0;

  ForwardOptions other = opt;
  other.mode = opt.mode == ForwardMode::kParallel ? ForwardMode::kSerial : ForwardMode::kParallel;
  other.keep_hidden = false;
  const auto alt = layer_forward(p, I, other);
  double max_dev = 0.0;
  std::size_t mismatches = 0;
  for (std::size_t i = 0; i < out.S.size(); ++i) {
    max_dev = std::max(max_dev, std::abs(static_cast<double>(out.v_s.data()[i]) - alt.v_s.data()[i]));
    mismatches += out.S.data()[i] != alt.S.data()[i];
  }
  const double tol = std::is_same_v<Real, float> ? 1e-5 : 1e-9;
  const bool pass = mismatches == 0 && max_dev <= tol;
  write_json(ctx.out_dir / "compare.json", json{{"max_abs_v_s_deviation", max_dev},
                                                {"spike_mismatches", mismatches},
                                                {"tolerance", tol},
                                                {"elements", out.S.size()},
                                                {"pass", pass}});
  std::cout << "serial vs parallel: max |v_s| deviation " << max_dev << ", spike mismatches " << mismatches
            << (pass ? " (ok)\n" : " (FAILED)\n");
  return pass ? 0 : 2;
}

struct TaskData {
  Dataset train, test;
  std::size_t T = 0;
};

TaskData load_task(const RunConfig& c) {
  TaskData d;
  if (c.task == "delayed_recall") {
    d.train = gen_delayed_recall(c.n_train, c.T, c.n_classes, c.cue_window, c.data_seed, c.noise);
    d.test = gen_delayed_recall(c.n_test, c.T, c.n_classes, c.cue_window, c.data_seed + 1, c.noise);
  } else if (c.task == "smnist" || c.task == "psmnist") {
    SequenceSpec spec;
    if (c.task == "psmnist") {
      spec.transform = SequenceTransform::kPermuted;
      spec.seed = c.data_seed;
    }
    const std::filesystem::path root(c.path);
    d.train = load_idx_digits(root / "train-images-idx3-ubyte", root / "train-labels-idx1-ubyte", c.digits,
                              c.n_train, spec);
    d.test = load_idx_digits(root / "t10k-images-idx3-ubyte", root / "t10k-labels-idx1-ubyte", c.digits,
                             c.n_test, spec);
  } else {
    auto make = [&](std::size_t n, std::uint64_t seed) {
      Dataset r;
      r.classes = c.n_classes;
      r.x = gaussian_input<float>(n, c.T, 4, seed, 0.0, 1.0);
      std::mt19937_64 rng(seed);
      for (std::size_t i = 0; i < n; ++i) r.y.push_back(static_cast<int>(rng() % static_cast<unsigned>(c.n_classes)));
      return r;
    };
    d.train = make(c.n_train, c.data_seed);
    d.test = make(c.n_test, c.data_seed + 1);
  }
  d.T = d.train.x.time();
  return d;
}

template <typename Real>
int train_as(const Context& ctx, const TrainFlags& flags) {
  const RunConfig& c = ctx.config;
  const TaskData data = load_task(c);
  Network net(c.network_spec(data.train.x.features(), data.train.classes));
  OptimState opt;
  int start = 0;
  if (!flags.resume.empty()) {
    start = restore_checkpoint(Container::read(flags.resume), net, opt);
    std::cout << "resuming at epoch " << start << ", step " << opt.step << '\n';
  }
  TrainConfig tc = c.train_config();
  tc.out_dir = ctx.out_dir;
  const std::uint64_t first_step = opt.step;
  const auto res = train_loop<Real>(net, opt, data.train, data.test, tc, start, [](const MetricsRow& r) {
    std::cout << "epoch " << r.epoch << ' ' << r.split << " loss " << r.loss << " acc " << r.accuracy
              << " spikes " << r.spikes_per_neuron_per_step << " (" << r.wall_seconds << " s)\n";
  });
  {
    auto os = open_out(ctx.out_dir / "steps.csv");
    os << "step,loss\n";
    for (std::size_t i = 0; i < res.step_losses.size(); ++i) os << first_step + i + 1 << ',' << res.step_losses[i] << '\n';
  }
  const auto ev = evaluate<Real>(net, data.test.size() ? data.test : data.train, c.batch_size, c.workers);
  std::vector<EnergyReport> energy;
  for (const auto& s : network_energy_stats(net, ev, data.T)) energy.push_back(energy_estimate(s));
  write_energy_csv(ctx.out_dir / "energy.csv", energy);
  json rates = json::array();
  for (std::size_t k = 0; k < ev.spike_rate.size(); ++k)
    rates.push_back({{"block", k}, {"spike_density", ev.spike_rate[k]}, {"input_rate", ev.input_rate[k]}});
  write_json(ctx.out_dir / "summary.json", json{{"test_accuracy", ev.accuracy},
                                                {"test_loss", ev.loss},
                                                {"next_epoch", res.next_epoch},
                                                {"steps", opt.step},
                                                {"blocks", rates}});
  std::cout << "final accuracy " << ev.accuracy << '\n';
  return 0;
}

FdModel gradcheck_model(const RunConfig& c) {
  std::mt19937_64 rng(c.seed);
  FdModel m;
  m.params = init_params(c.n, c.grad_neurons, c.seed).pmsn;
  // Larger steps than the initialization draws so that every mode matters.
  for (std::size_t f = 0; f < c.grad_neurons; ++f) {
    const double scale = 0.5 / m.params.dt[f];
    m.params.dt[f] *= scale;
    for (std::size_t j = 0; j < m.params.modes; ++j) m.params.lambda_dt[m.params.index(f, j)] *= scale;
  }
  m.params.theta = c.theta;
  m.params.touch();
  m.in_features = c.grad_inputs;
  std::normal_distribution<double> nd(0.0, 0.7);
  m.W.resize(c.grad_inputs * c.grad_neurons);
  m.b.resize(c.grad_neurons);
  for (auto& v : m.W) v = nd(rng);
  for (auto& v : m.b) v = 0.3 + 0.1 * nd(rng);
  m.options = c.forward_options();
  m.surrogate.gamma_width = c.surrogate_width;
  m.linear = c.grad_linear;
  return m;
}

std::map<std::string, std::vector<double>> growth(const std::vector<TimingRow>& rows) {
  std::map<std::string, std::map<std::size_t, std::map<std::size_t, double>>> by;
  for (const auto& r : rows) by[r.model][r.batch][r.T] = r.median_us;
  std::map<std::string, std::vector<double>> out;
  for (const auto& [model, batches] : by)
    for (const auto& [batch, times] : batches)
      if (times.size() >= 2) out[model].push_back(times.rbegin()->second / times.begin()->second);
  return out;
}

}  // namespace

void write_manifest(const Context& ctx) {
  std::filesystem::create_directories(ctx.out_dir);
  write_json(ctx.out_dir / "manifest.json",
             json{{"command", ctx.command},
                  {"config", ctx.config.to_json()},
                  {"seed", ctx.config.seed},
                  {"workers", ctx.config.workers},
                  {"version", kVersion},
                  {"git_describe", kGitDescribe},
                  {"start_time", utc_now()},
                  {"out_dir", std::filesystem::absolute(ctx.out_dir).string()}});
}

int cmd_simulate(const Context& ctx, const SimulateFlags& flags) {
  if (flags.impulse) return cmd_impulse(ctx, flags.neuron);
  return ctx.config.precision == Precision::kDouble ? simulate_as<double>(ctx, flags)
                                                    : simulate_as<float>(ctx, flags);
}

int cmd_train(const Context& ctx, const TrainFlags& flags) {
  return ctx.config.precision == Precision::kDouble ? train_as<double>(ctx, flags) : train_as<float>(ctx, flags);
}

int cmd_bench(const Context& ctx) {
  const RunConfig& c = ctx.config;
  TimingConfig tc;
  tc.T_list = c.bench_T;
  tc.batch_list = c.bench_batch;
  tc.neurons = c.bench_neurons;
  tc.n = c.n;
  tc.repetitions = c.bench_repetitions;
  tc.workers = c.workers;
  tc.seed = c.seed;
  const auto rows = time_models(tc);
  write_timing_csv(ctx.out_dir / "timing.csv", rows);
  for (const auto& r : rows)
    std::cout << std::left << std::setw(32) << r.model << " T=" << std::setw(6) << r.T << " B=" << std::setw(3)
              << r.batch << " median " << r.median_us << " us, ratio " << r.ratio << '\n';

  // Energy from a measured pass of PMSN and LIF networks on the same data.
  RunConfig small = c;
  small.n_test = std::min<std::size_t>(c.n_test, 64);
  small.n_train = 1;
  if (small.task != "smnist" && small.task != "psmnist") small.task = "delayed_recall";
  const TaskData data = load_task(small);
  std::vector<EnergyReport> energy;
  for (NeuronKind kind : {NeuronKind::kPmsn, NeuronKind::kLif}) {
    RunConfig rc = small;
    rc.neuron = kind;
    const Network net(rc.network_spec(data.test.x.features(), data.test.classes));
    const auto ev = evaluate<float>(net, data.test, 32, c.workers);
    for (auto s : network_energy_stats(net, ev, data.T)) {
      s.layer = std::string(to_string(kind)) + "." + s.layer;
      energy.push_back(energy_estimate(s));
    }
  }
  write_energy_csv(ctx.out_dir / "energy.csv", energy);

  json g = json::object();
  for (const auto& [model, factors] : growth(rows)) g[model] = factors;
  write_json(ctx.out_dir / "bench.json", json{{"workers", c.workers},
                                              {"hardware_concurrency", std::thread::hardware_concurrency()},
                                              {"repetitions", c.bench_repetitions},
                                              {"T", c.bench_T},
                                              {"batch", c.bench_batch},
                                              {"growth_last_over_first_T", g}});
  return 0;
}

int cmd_gradcheck(const Context& ctx) {
  const RunConfig& c = ctx.config;
  const FdModel m = gradcheck_model(c);
  const auto x = gaussian_input<double>(c.grad_batch, c.grad_T, c.grad_inputs, c.seed + 1, 0.3, 1.0);
  const auto w = gaussian_input<double>(c.grad_batch, c.grad_T, c.grad_neurons, c.seed + 2, 0.0, 1.0);
  const auto report = fd_check(m, x, w, c.grad_eps);
  const bool pass = report.passed(c.grad_tolerance);
  json j = report.to_json();
  j["tolerance"] = c.grad_tolerance;
  j["pass"] = pass;
  j["linear"] = c.grad_linear;
  write_json(ctx.out_dir / "gradcheck.json", j);
  for (const auto& e : report.entries)
    std::cout << std::left << std::setw(12) << e.name << " max rel err " << e.max_rel_err << '\n';
  std::cout << (pass ? "gradcheck passed\n" : "gradcheck FAILED\n");
  return pass ? 0 : 1;
}

int cmd_impulse(const Context& ctx, std::size_t neuron) {
  const RunConfig& c = ctx.config;
  const std::size_t neurons = std::max(c.sim_neurons, neuron + 1);
  const PmsnParams p = init_params(c.n, neurons, c.seed).pmsn;
  SerialOptions so;
  so.reset = c.reset;
  so.clamp_ih = c.clamp_ih;
  const auto tr = impulse_trace(p, c.T, neuron, so);
  write_impulse_csv(ctx.out_dir / "impulse.csv", tr);
  const auto spec = mode_spectrum(p);
  write_spectrum_csv(ctx.out_dir / "spectrum.csv", spec);
  write_histogram_csv(ctx.out_dir / "frequency_hist.csv", "frequency", histogram(spec.frequency, 20));
  write_histogram_csv(ctx.out_dir / "damping_hist.csv", "damping", histogram(spec.damping, 20));
  std::cout << "impulse response of neuron " << neuron << ": " << tr.modes << " eigenmode traces + output, T = "
            << tr.T << '\n';
  return 0;
}

}  // namespace pmsn::cli
