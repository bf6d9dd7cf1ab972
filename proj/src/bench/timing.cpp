#include <algorithm>
#include <chrono>
#include <fstream>
#include <map>
#include <random>

#include "pmsn/bench.hpp"
#include "pmsn/error.hpp"
#include "pmsn/grad.hpp"
#include "pmsn/parallel.hpp"
#include "pmsn/layers.hpp"

namespace pmsn {

namespace {

double quantile(std::vector<double> v, double q) {
  std::sort(v.begin(), v.end());
  const double pos = q * static_cast<double>(v.size() - 1);
  const auto lo = static_cast<std::size_t>(pos);
  const std::size_t hi = std::min(lo + 1, v.size() - 1);
  return v[lo] + (pos - static_cast<double>(lo)) * (v[hi] - v[lo]);
}

}  // namespace

TimingStats measure(const std::function<void()>& fn, int repetitions, int warmup) {
  if (repetitions < 5) throw InvalidArgument("timing needs at least 5 repetitions");
  for (int i = 0; i < warmup; ++i) fn();
  std::vector<double> us;
  us.reserve(static_cast<std::size_t>(repetitions));
  for (int i = 0; i < repetitions; ++i) {
    const auto start = std::chrono::steady_clock::now();
    fn();
    const auto stop = std::chrono::steady_clock::now();
    us.push_back(std::chrono::duration<double, std::micro>(stop - start).count());
  }
  return {quantile(us, 0.5), quantile(us, 0.75) - quantile(us, 0.25), repetitions};
}

std::vector<TimingRow> time_models(const TimingConfig& cfg) {
  if (cfg.n < 2) throw InvalidArgument("timing needs n >= 2");
  if (cfg.neurons == 0) throw InvalidArgument("timing needs at least one neuron");
  const PmsnParams p = init_params(cfg.n, cfg.neurons, cfg.seed).pmsn;
  const LIFParams lif{0.95, 1.0, 0.0};
  const SurrogateConfig sg;
  std::vector<TimingRow> rows;

  for (std::size_t T : cfg.T_list)
    for (std::size_t B : cfg.batch_list) {
      std::mt19937_64 rng(cfg.seed + T * 131 + B);
      std::normal_distribution<double> nd(0.5, 1.0);
      SeqTensor<float> I(B, T, cfg.neurons);
      for (auto& v : I.data()) v = static_cast<float>(nd(rng));
      SeqTensor<float> g(B, T, cfg.neurons);
      for (auto& v : g.data()) v = static_cast<float>(nd(rng));

      ForwardOptions par;
      par.workers = cfg.workers;
      ForwardOptions ser = par;
      ser.mode = ForwardMode::kSerial;

      std::vector<TimingRow> group;
      auto add = [&](const std::string& name, const std::function<void()>& fn) {
        const TimingStats st = measure(fn, cfg.repetitions, cfg.warmup);
        group.push_back({name, T, B, st.median_us, st.iqr_us, 1.0, st.repetitions});
      };

      // Kernel construction is part of the parallel cost: a fresh cache is
      // built inside every timed call.
      add("parallel_pmsn:forward", [&] { layer_forward(p, I, par); });
      add("serial_msn:forward", [&] { layer_forward(p, I, ser); });
      add("serial_lif:forward", [&] { lif_forward_serial(lif, I); });
      if (cfg.backward) {
        add("parallel_pmsn:forward_backward", [&] {
          auto out = layer_forward(p, I, par);
          auto tape = make_tape(p, I, out, par);
          backward_input(tape, sg, g, cfg.workers);
        });
        add("serial_msn:forward_backward", [&] {
          auto out = layer_forward(p, I, ser);
          LayerTape<float> tape;
          tape.params = &p;
          tape.options = ser;
          tape.I = I;
          tape.I_h = out.I_h;
          tape.v_s = out.v_s;
          tape.S = out.S;
          backward_input_serial(tape, sg, g);
        });
        add("serial_lif:forward_backward", [&] {
          auto out = lif_forward_serial(lif, I);
          lif_backward(lif, out.v, g, sg);
        });
      }

      std::map<std::string, double> base;
      for (const auto& r : group)
        if (r.model.rfind("parallel_pmsn:", 0) == 0) base[r.model.substr(14)] = r.median_us;
      for (auto& r : group) {
        const auto pass = r.model.substr(r.model.find(':') + 1);
        r.ratio = base[pass] > 0 ? r.median_us / base[pass] : 0.0;
        rows.push_back(r);
      }
    }
  return rows;
}

void write_timing_csv(const std::filesystem::path& path, const std::vector<TimingRow>& rows) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  out << "model,T,batch,median_us,iqr_us,ratio\n";
  out.precision(10);
  for (const auto& r : rows)
    out << r.model << ',' << r.T << ',' << r.batch << ',' << r.median_us << ',' << r.iqr_us << ','
        << r.ratio << '\n';
  if (!out) throw IoError("failed writing " + path.string());
}

}  // namespace pmsn
