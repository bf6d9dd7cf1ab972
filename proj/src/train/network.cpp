#include "pmsn/network.hpp"

#include <algorithm>
#include <random>

#include "pmsn/error.hpp"

namespace pmsn {

using cd = std::complex<double>;

NeuronKind parse_neuron_kind(std::string_view s) {
  if (s == "pmsn") return NeuronKind::kPmsn;
  if (s == "lif") return NeuronKind::kLif;
  throw InvalidArgument("unknown neuron kind '" + std::string(s) + "' (pmsn|lif)");
}

std::string_view to_string(NeuronKind k) { return k == NeuronKind::kPmsn ? "pmsn" : "lif"; }

void NetworkSpec::validate() const {
  if (input < 1) throw ConfigError("input width must be >= 1", "model.input");
  if (hidden.empty()) throw ConfigError("at least one hidden layer is required", "model.hidden");
  for (auto h : hidden)
    if (h < 1) throw ConfigError("hidden widths must be >= 1", "model.hidden");
  if (classes < 2) throw ConfigError("need at least 2 classes", "data.n_classes");
  if (neuron == NeuronKind::kPmsn && n < 2) throw ConfigError("PMSN needs n >= 2 compartments", "model.n");
  if (!(dropout >= 0 && dropout < 1)) throw ConfigError("dropout must lie in [0, 1)", "train.dropout");
  if (!(theta > 0)) throw ConfigError("threshold must be positive", "model.theta");
  if (!(lif_alpha > 0 && lif_alpha <= 1)) throw ConfigError("LIF decay must lie in (0, 1]", "model.lif_alpha");
  if (!(surrogate.gamma_width > 0))
    throw ConfigError("surrogate width must be positive", "model.surrogate_width");
}

Network::Network(const NetworkSpec& spec) : spec_(spec) {
  spec_.validate();
  std::mt19937_64 rng(spec_.seed);
  std::size_t in = spec_.input;
  for (std::size_t width : spec_.hidden) {
    Block blk;
    blk.dense = DenseLayer(in, width);
    blk.dense.init(rng);
    if (spec_.norm) blk.norm.emplace(width);
    if (spec_.neuron == NeuronKind::kPmsn) {
      blk.pmsn = init_params(spec_.n, width, rng()).pmsn;
      blk.pmsn.theta = spec_.theta;
    }
    blk.lif.alpha = spec_.lif_alpha;
    blk.lif.theta = spec_.theta;
    blocks_.push_back(std::move(blk));
    in = width;
  }
  readout_ = DenseLayer(in, static_cast<std::size_t>(spec_.classes));
  readout_.init(rng);
  kernels_.resize(blocks_.size());
  zero_grad();
}

void Network::zero_grad() {
  for (auto& blk : blocks_) {
    std::fill(blk.dense.dW.begin(), blk.dense.dW.end(), 0.0);
    std::fill(blk.dense.db.begin(), blk.dense.db.end(), 0.0);
    if (blk.norm) {
      std::fill(blk.norm->dgamma.begin(), blk.norm->dgamma.end(), 0.0);
      std::fill(blk.norm->dbeta.begin(), blk.norm->dbeta.end(), 0.0);
    }
    const std::size_t nm = blk.pmsn.neurons * blk.pmsn.modes;
    blk.pmsn_grad.d_lambda_dt.assign(nm, cd{});
    blk.pmsn_grad.d_phi_c.assign(nm, cd{});
    blk.pmsn_grad.d_phi_s.assign(nm, cd{});
    blk.pmsn_grad.d_gamma_n.assign(blk.pmsn.neurons, 0.0);
  }
  std::fill(readout_.dW.begin(), readout_.dW.end(), 0.0);
  std::fill(readout_.db.begin(), readout_.db.end(), 0.0);
}

namespace {

std::span<double> flat(std::vector<cd>& v) {
  return {reinterpret_cast<double*>(v.data()), 2 * v.size()};
}

template <typename Real>
std::uint64_t count_nonzero(const SeqTensor<Real>& x) {
  std::uint64_t nz = 0;
  for (Real v : x.data()) nz += v != Real(0);
  return nz;
}

}  // namespace

std::vector<ParamSlot> Network::parameters() {
  std::vector<ParamSlot> out;
  for (std::size_t k = 0; k < blocks_.size(); ++k) {
    auto& blk = blocks_[k];
    const std::string pre = "block" + std::to_string(k) + ".";
    out.push_back({pre + "dense.W", ParamGroup::kSynaptic, blk.dense.W, blk.dense.dW});
    out.push_back({pre + "dense.b", ParamGroup::kSynaptic, blk.dense.b, blk.dense.db});
    if (blk.norm) {
      out.push_back({pre + "norm.gamma", ParamGroup::kSynaptic, blk.norm->gamma, blk.norm->dgamma});
      out.push_back({pre + "norm.beta", ParamGroup::kSynaptic, blk.norm->beta, blk.norm->dbeta});
    }
    if (spec_.neuron == NeuronKind::kPmsn) {
      auto& p = blk.pmsn;
      auto& g = blk.pmsn_grad;
      if (p.learnable.lambda_dt)
        out.push_back({pre + "pmsn.lambda_dt", ParamGroup::kNeuronal, flat(p.lambda_dt), flat(g.d_lambda_dt)});
      if (p.learnable.phi_c)
        out.push_back({pre + "pmsn.phi_c", ParamGroup::kNeuronal, flat(p.phi_c), flat(g.d_phi_c)});
      if (p.learnable.phi_s)
        out.push_back({pre + "pmsn.phi_s", ParamGroup::kNeuronal, flat(p.phi_s), flat(g.d_phi_s)});
      if (p.learnable.gamma_n)
        out.push_back({pre + "pmsn.gamma_n", ParamGroup::kNeuronal, p.gamma_n, g.d_gamma_n});
    }
  }
  out.push_back({"readout.W", ParamGroup::kSynaptic, readout_.W, readout_.dW});
  out.push_back({"readout.b", ParamGroup::kSynaptic, readout_.b, readout_.db});
  return out;
}

void Network::after_step() {
  if (spec_.neuron != NeuronKind::kPmsn) return;
  for (auto& blk : blocks_) {
    blk.pmsn.enforce_pairing();
    blk.pmsn.clamp_stability(-1e-4);
  }
}

template <typename Real>
NetworkOutput Network::run(const SeqTensor<Real>& x, bool training, std::uint64_t dropout_seed,
                           NetworkTape<Real>& tape, int workers) const {
  if (x.features() != spec_.input)
    throw InvalidArgument("network expects " + std::to_string(spec_.input) + " input channels, got " +
                          std::to_string(x.features()));
  NetworkOutput out;
  out.batch = x.batch();
  out.classes = spec_.classes;
  tape.blocks.clear();
  if (training) tape.blocks.resize(blocks_.size());
  SeqTensor<Real> h = x;
  for (std::size_t k = 0; k < blocks_.size(); ++k) {
    const Block& blk = blocks_[k];
    const std::uint64_t nz = count_nonzero(h);
    out.input_nonzero.push_back(nz);
    out.input_elements.push_back(h.size());
    out.input_rate.push_back(h.size() ? static_cast<double>(nz) / static_cast<double>(h.size()) : 0.0);
    SeqTensor<Real> I = blk.dense.forward(h, workers);
    if (training) tape.blocks[k].x = std::move(h);
    if (blk.norm) I = training ? blk.norm->forward_train(I, tape.blocks[k].norm) : blk.norm->forward_eval(I);
    SeqTensor<Real> S;
    if (spec_.neuron == NeuronKind::kPmsn) {
      ForwardOptions opt = spec_.forward;
      opt.workers = workers;
      auto fo = layer_forward(blk.pmsn, I, opt, kernels_[k]);
      if (fo.kernel) kernels_[k] = fo.kernel;
      if (training) tape.blocks[k].pmsn = make_tape(blk.pmsn, I, fo, opt);
      S = std::move(fo.S);
    } else {
      auto r = lif_forward_serial(blk.lif, I);
      if (training) tape.blocks[k].lif_v = std::move(r.v);
      S = std::move(r.s);
    }
    double spikes = 0.0;
    for (Real v : S.data()) spikes += static_cast<double>(v);
    out.spike_rate.push_back(S.size() ? spikes / static_cast<double>(S.size()) : 0.0);
    if (training && spec_.dropout > 0) {
      std::mt19937_64 rng(dropout_seed * 1000003ULL + k);
      std::bernoulli_distribution keep(1.0 - spec_.dropout);
      SeqTensor<Real> mask(S.batch(), S.time(), S.features());
      const Real scale = static_cast<Real>(1.0 / (1.0 - spec_.dropout));
      for (std::size_t i = 0; i < mask.size(); ++i) {
        mask.data()[i] = keep(rng) ? scale : Real(0);
        S.data()[i] *= mask.data()[i];
      }
      tape.blocks[k].keep = std::move(mask);
    }
    h = std::move(S);
  }
  const std::size_t T = h.time(), F = h.features(), C = static_cast<std::size_t>(spec_.classes);
  const std::size_t Tw = spec_.readout_window == 0 ? T : std::min(spec_.readout_window, T);
  out.logits.assign(x.batch() * C, 0.0);
  for (std::size_t b = 0; b < x.batch(); ++b) {
    double* z = out.logits.data() + b * C;
    for (std::size_t t = T - Tw; t < T; ++t)
      for (std::size_t f = 0; f < F; ++f) {
        const double s = static_cast<double>(h(b, t, f));
        if (s == 0.0) continue;
        for (std::size_t c = 0; c < C; ++c) z[c] += s * readout_.W[f * C + c];
      }
    for (std::size_t c = 0; c < C; ++c) z[c] = z[c] / static_cast<double>(Tw) + readout_.b[c];
  }
  if (training) tape.readout_in = std::move(h);
  return out;
}

template <typename Real>
NetworkOutput Network::forward(const SeqTensor<Real>& x, bool training, std::uint64_t dropout_seed,
                               NetworkTape<Real>* tape, int workers) {
  NetworkTape<Real> local;
  NetworkTape<Real>& tp = tape ? *tape : local;
  auto out = run(x, training, dropout_seed, tp, workers);
  if (training)
    for (std::size_t k = 0; k < blocks_.size(); ++k)
      if (blocks_[k].norm)
        blocks_[k].norm->update_running(tp.blocks[k].norm.mean, tp.blocks[k].norm.var, x.batch() * x.time());
  return out;
}

template <typename Real>
NetworkOutput Network::predict(const SeqTensor<Real>& x, int workers) const {
  NetworkTape<Real> unused;
  return run(x, false, 0, unused, workers);
}

template <typename Real>
void Network::backward(const NetworkTape<Real>& tape, std::span<const double> dlogits, int workers) {
  if (tape.blocks.size() != blocks_.size()) throw InvalidState("network tape was not recorded in training mode");
  const SeqTensor<Real>& s_last = tape.readout_in;
  const std::size_t B = s_last.batch(), T = s_last.time(), F = s_last.features();
  const std::size_t C = static_cast<std::size_t>(spec_.classes);
  if (dlogits.size() != B * C) throw InvalidArgument("logit gradient does not match batch x classes");
  const std::size_t Tw = spec_.readout_window == 0 ? T : std::min(spec_.readout_window, T);
  const double inv_tw = 1.0 / static_cast<double>(Tw);

  SeqTensor<Real> dS(B, T, F);
  for (std::size_t b = 0; b < B; ++b) {
    const double* g = dlogits.data() + b * C;
    for (std::size_t c = 0; c < C; ++c) readout_.db[c] += g[c];
    std::vector<double> ds(F, 0.0);
    for (std::size_t f = 0; f < F; ++f)
      for (std::size_t c = 0; c < C; ++c) ds[f] += g[c] * readout_.W[f * C + c];
    for (std::size_t t = T - Tw; t < T; ++t)
      for (std::size_t f = 0; f < F; ++f) {
        dS(b, t, f) = static_cast<Real>(ds[f] * inv_tw);
        const double s = static_cast<double>(s_last(b, t, f));
        if (s == 0.0) continue;
        for (std::size_t c = 0; c < C; ++c) readout_.dW[f * C + c] += s * g[c] * inv_tw;
      }
  }

  for (std::size_t k = blocks_.size(); k-- > 0;) {
    Block& blk = blocks_[k];
    const BlockTape<Real>& bt = tape.blocks[k];
    if (bt.keep.size())
      for (std::size_t i = 0; i < dS.size(); ++i) dS.data()[i] *= bt.keep.data()[i];
    SeqTensor<Real> dI;
    if (spec_.neuron == NeuronKind::kPmsn) {
      auto res = layer_backward(bt.pmsn, spec_.surrogate, dS, true, workers);
      auto& g = blk.pmsn_grad;
      for (std::size_t i = 0; i < g.d_lambda_dt.size(); ++i) {
        g.d_lambda_dt[i] += res.grads.d_lambda_dt[i];
        g.d_phi_c[i] += res.grads.d_phi_c[i];
        g.d_phi_s[i] += res.grads.d_phi_s[i];
      }
      for (std::size_t f = 0; f < g.d_gamma_n.size(); ++f) g.d_gamma_n[f] += res.grads.d_gamma_n[f];
      dI = std::move(res.d_input);
    } else {
      dI = lif_backward(blk.lif, bt.lif_v, dS, spec_.surrogate);
    }
    if (blk.norm) dI = blk.norm->backward(bt.norm, dI);
    dS = blk.dense.backward(bt.x, dI, k > 0, workers);
  }
}

void Network::save(Container& c) const {
  c.meta()["hidden"] = spec_.hidden;
  c.meta()["input"] = spec_.input;
  c.meta()["classes"] = spec_.classes;
  c.meta()["neuron"] = std::string(to_string(spec_.neuron));
  c.meta()["n"] = spec_.n;
  for (std::size_t k = 0; k < blocks_.size(); ++k) {
    const auto& blk = blocks_[k];
    const std::string pre = "block" + std::to_string(k) + ".";
    c.put(pre + "dense.W", blk.dense.W, {blk.dense.in, blk.dense.out});
    c.put(pre + "dense.b", blk.dense.b);
    if (blk.norm) {
      c.put(pre + "norm.gamma", blk.norm->gamma);
      c.put(pre + "norm.beta", blk.norm->beta);
      c.put(pre + "norm.running_mean", blk.norm->running_mean);
      c.put(pre + "norm.running_var", blk.norm->running_var);
    }
    if (spec_.neuron == NeuronKind::kPmsn) put_params(c, pre + "pmsn.", blk.pmsn);
  }
  c.put("readout.W", readout_.W, {readout_.in, readout_.out});
  c.put("readout.b", readout_.b);
}

void Network::load(const Container& c) {
  const auto& m = c.meta();
  if (!m.contains("hidden") || m["hidden"].get<std::vector<std::size_t>>() != spec_.hidden ||
      m.value("input", std::size_t{0}) != spec_.input || m.value("classes", 0) != spec_.classes ||
      m.value("neuron", std::string()) != to_string(spec_.neuron) || m.value("n", 0) != spec_.n)
    throw ConfigError("checkpoint architecture does not match the configured model");
  auto copy = [&](const std::string& name, std::vector<double>& dst) {
    const auto& src = c.real(name);
    if (src.size() != dst.size()) throw ParseError("tensor '" + name + "' has the wrong size", 0);
    dst = src;
  };
  for (std::size_t k = 0; k < blocks_.size(); ++k) {
    auto& blk = blocks_[k];
    const std::string pre = "block" + std::to_string(k) + ".";
    copy(pre + "dense.W", blk.dense.W);
    copy(pre + "dense.b", blk.dense.b);
    if (blk.norm) {
      copy(pre + "norm.gamma", blk.norm->gamma);
      copy(pre + "norm.beta", blk.norm->beta);
      copy(pre + "norm.running_mean", blk.norm->running_mean);
      copy(pre + "norm.running_var", blk.norm->running_var);
    }
    if (spec_.neuron == NeuronKind::kPmsn) {
      auto p = get_params(c, pre + "pmsn.");
      if (p.neurons != blk.pmsn.neurons || p.modes != blk.pmsn.modes)
        throw ParseError("PMSN block " + std::to_string(k) + " has the wrong shape", 0);
      p.learnable = blk.pmsn.learnable;
      p.revision = blk.pmsn.revision + 1;
      blk.pmsn = std::move(p);
    }
  }
  copy("readout.W", readout_.W);
  copy("readout.b", readout_.b);
  std::fill(kernels_.begin(), kernels_.end(), nullptr);
}

#define PMSN_INSTANTIATE(R)                                                                           \
  template NetworkOutput Network::forward(const SeqTensor<R>&, bool, std::uint64_t, NetworkTape<R>*, int); \
  template NetworkOutput Network::predict(const SeqTensor<R>&, int) const;                            \
  template void Network::backward(const NetworkTape<R>&, std::span<const double>, int);
PMSN_INSTANTIATE(float)
PMSN_INSTANTIATE(double)
#undef PMSN_INSTANTIATE

}  // namespace pmsn
