#include "pmsn/trainer.hpp"

#include <chrono>
#include <cmath>
#include <fstream>
#include <numeric>
#include <random>

#include "pmsn/error.hpp"

namespace pmsn {

template <typename Real>
EvalResult evaluate(const Network& net, const Dataset& data, std::size_t batch_size, int workers) {
  EvalResult r;
  if (data.size() == 0) return r;
  const std::size_t nb = net.blocks().size();
  r.spike_rate.assign(nb, 0.0);
  r.input_rate.assign(nb, 0.0);
  r.input_nonzero.assign(nb, 0);
  r.input_elements.assign(nb, 0);
  std::size_t correct = 0;
  double loss_sum = 0.0;
  std::vector<std::size_t> idx;
  for (std::size_t start = 0; start < data.size(); start += batch_size) {
    const std::size_t end = std::min(data.size(), start + batch_size);
    idx.resize(end - start);
    std::iota(idx.begin(), idx.end(), start);
    const auto x = data.gather<Real>(idx);
    const auto y = data.gather_labels(idx);
    const auto out = net.predict(x, workers);
    loss_sum += cross_entropy(out.logits, y, out.classes) * static_cast<double>(idx.size());
    for (std::size_t b = 0; b < idx.size(); ++b) {
      const double* z = out.logits.data() + b * static_cast<std::size_t>(out.classes);
      const auto pred = std::max_element(z, z + out.classes) - z;
      correct += pred == y[b];
    }
    for (std::size_t k = 0; k < nb; ++k) {
      r.spike_rate[k] += out.spike_rate[k] * static_cast<double>(idx.size());
      r.input_rate[k] += out.input_rate[k] * static_cast<double>(idx.size());
      r.input_nonzero[k] += out.input_nonzero[k];
      r.input_elements[k] += out.input_elements[k];
    }
  }
  const double n = static_cast<double>(data.size());
  r.loss = loss_sum / n;
  r.accuracy = static_cast<double>(correct) / n;
  for (std::size_t k = 0; k < nb; ++k) {
    r.spike_rate[k] /= n;
    r.input_rate[k] /= n;
  }
  return r;
}

Container make_checkpoint(const Network& net, const OptimState& opt, int next_epoch) {
  Container c;
  net.save(c);
  c.meta()["kind"] = "checkpoint";
  c.meta()["next_epoch"] = next_epoch;
  c.meta()["opt_step"] = opt.step;
  c.meta()["opt_slots"] = opt.m.size();
  for (std::size_t k = 0; k < opt.m.size(); ++k) {
    c.put("opt.m." + std::to_string(k), opt.m[k]);
    c.put("opt.v." + std::to_string(k), opt.v[k]);
  }
  return c;
}

int restore_checkpoint(const Container& c, Network& net, OptimState& opt) {
  net.load(c);
  opt = OptimState{};
  opt.step = c.meta().value("opt_step", std::uint64_t{0});
  const std::size_t slots = c.meta().value("opt_slots", std::size_t{0});
  for (std::size_t k = 0; k < slots; ++k) {
    opt.m.push_back(c.real("opt.m." + std::to_string(k)));
    opt.v.push_back(c.real("opt.v." + std::to_string(k)));
  }
  return c.meta().value("next_epoch", 0);
}

void write_metrics_header(const std::filesystem::path& path) {
  std::ofstream os(path, std::ios::trunc);
  if (!os) throw IoError("cannot open " + path.string() + " for writing");
  os << "epoch,split,loss,accuracy,wall_seconds,spikes_per_neuron_per_step\n";
}

void append_metrics(const std::filesystem::path& path, const MetricsRow& row) {
  std::ofstream os(path, std::ios::app);
  if (!os) throw IoError("cannot open " + path.string() + " for appending");
  os.precision(10);
  os << row.epoch << ',' << row.split << ',' << row.loss << ',' << row.accuracy << ',' << row.wall_seconds
     << ',' << row.spikes_per_neuron_per_step << '\n';
}

namespace {

double mean_of(const std::vector<double>& v) {
  return v.empty() ? 0.0 : std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

}  // namespace

template <typename Real>
TrainResult train_loop(Network& net, OptimState& opt, const Dataset& train, const Dataset& test,
                       const TrainConfig& cfg, int start_epoch,
                       const std::function<void(const MetricsRow&)>& on_metrics) {
  if (cfg.batch_size < 1) throw ConfigError("batch size must be >= 1", "train.batch_size");
  if (train.size() == 0) throw InvalidArgument("training set is empty");
  TrainResult res;
  res.next_epoch = start_epoch;
  const bool to_disk = !cfg.out_dir.empty();
  const auto metrics_path = cfg.out_dir / "metrics.csv";
  if (to_disk && (start_epoch == 0 || !std::filesystem::exists(metrics_path)))
    write_metrics_header(metrics_path);

  auto record = [&](const MetricsRow& row) {
    res.metrics.push_back(row);
    if (to_disk) append_metrics(metrics_path, row);
    if (on_metrics) on_metrics(row);
  };

  for (int epoch = start_epoch; epoch < cfg.epochs; ++epoch) {
    const Container last_good = make_checkpoint(net, opt, epoch);
    if (to_disk) last_good.write(cfg.out_dir / "checkpoint.pmsn");
    const auto t0 = std::chrono::steady_clock::now();
    std::vector<std::size_t> order(train.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::mt19937_64 rng(cfg.seed * 0x9E3779B97F4A7C15ULL + static_cast<std::uint64_t>(epoch));
    for (std::size_t i = order.size(); i > 1; --i) std::swap(order[i - 1], order[rng() % i]);

    const double scale = lr_scale(cfg.schedule, epoch, cfg.epochs);
    double loss_sum = 0.0, spike_sum = 0.0;
    std::size_t correct = 0, seen = 0;
    bool stopped = false;
    for (std::size_t start = 0; start < order.size(); start += cfg.batch_size) {
      if (cfg.max_steps && opt.step >= cfg.max_steps) {
        stopped = true;
        break;
      }
      const std::size_t end = std::min(order.size(), start + cfg.batch_size);
      std::span<const std::size_t> idx(order.data() + start, end - start);
      const auto x = train.gather<Real>(idx);
      const auto y = train.gather_labels(idx);
      NetworkTape<Real> tape;
      net.zero_grad();
      const auto out = net.forward(x, true, cfg.seed + opt.step, &tape, cfg.workers);
      std::vector<double> dlogits;
      const double loss = cross_entropy(out.logits, y, out.classes, &dlogits);
      if (!std::isfinite(loss)) {
        if (to_disk) last_good.write(cfg.out_dir / "last_good.pmsn");
        throw NumericFailure("non-finite training loss at epoch " + std::to_string(epoch) + ", step " +
                             std::to_string(opt.step));
      }
      res.step_losses.push_back(loss);
      net.backward(tape, dlogits, cfg.workers);
      auto slots = net.parameters();
      adamw_step(opt, slots, cfg.adam, scale);
      net.after_step();
      loss_sum += loss * static_cast<double>(idx.size());
      spike_sum += mean_of(out.spike_rate) * static_cast<double>(idx.size());
      for (std::size_t b = 0; b < idx.size(); ++b) {
        const double* z = out.logits.data() + b * static_cast<std::size_t>(out.classes);
        correct += (std::max_element(z, z + out.classes) - z) == y[b];
      }
      seen += idx.size();
    }
    const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    if (seen > 0)
      record({epoch, "train", loss_sum / static_cast<double>(seen),
              static_cast<double>(correct) / static_cast<double>(seen), wall, spike_sum / static_cast<double>(seen)});
    if (test.size() > 0) {
      const auto t1 = std::chrono::steady_clock::now();
      const auto ev = evaluate<Real>(net, test, cfg.batch_size, cfg.workers);
      const double w = std::chrono::duration<double>(std::chrono::steady_clock::now() - t1).count();
      record({epoch, "test", ev.loss, ev.accuracy, w, mean_of(ev.spike_rate)});
    }
    res.next_epoch = stopped ? epoch : epoch + 1;
    if (stopped) break;
  }
  if (to_disk) make_checkpoint(net, opt, res.next_epoch).write(cfg.out_dir / "checkpoint.pmsn");
  return res;
}

template EvalResult evaluate<float>(const Network&, const Dataset&, std::size_t, int);
template EvalResult evaluate<double>(const Network&, const Dataset&, std::size_t, int);
template TrainResult train_loop<float>(Network&, OptimState&, const Dataset&, const Dataset&, const TrainConfig&,
                                       int, const std::function<void(const MetricsRow&)>&);
template TrainResult train_loop<double>(Network&, OptimState&, const Dataset&, const Dataset&,
                                        const TrainConfig&, int, const std::function<void(const MetricsRow&)>&);

}  // namespace pmsn
