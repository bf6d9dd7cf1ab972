#include <cmath>
#include <fstream>
#include <numbers>

#include "pmsn/bench.hpp"
#include "pmsn/error.hpp"

namespace pmsn {

ImpulseTrace impulse_trace(const PmsnParams& p, std::size_t T, std::size_t neuron,
                           const SerialOptions& opt) {
  p.validate();
  if (neuron >= p.neurons) throw InvalidArgument("impulse neuron index out of range");
  if (T == 0) throw InvalidArgument("impulse trace needs T >= 1");
  ImpulseTrace tr;
  tr.T = T;
  tr.modes = p.modes;
  tr.mode_values.resize(T * p.modes);
  for (std::size_t j = 0; j < p.modes; ++j) {
    const auto w = p.t_bar(neuron, j);
    const auto ps = p.phi_s[p.index(neuron, j)];
    std::complex<double> v = p.Phi_c(neuron, j);
    for (std::size_t t = 0; t < T; ++t) {
      tr.mode_values[t * p.modes + j] = (ps * v).real();
      v *= w;
    }
  }
  SeqTensor<double> I(1, T, p.neurons);
  I(0, 0, neuron) = 1.0;
  const auto out = pmsn_serial_forward(p, I, opt);
  tr.v_s.resize(T);
  tr.spikes.resize(T);
  for (std::size_t t = 0; t < T; ++t) {
    tr.v_s[t] = out.v_s(0, t, neuron);
    tr.spikes[t] = out.S(0, t, neuron);
  }
  return tr;
}

void write_impulse_csv(const std::filesystem::path& path, const ImpulseTrace& tr) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  out.precision(17);
  out << "t,compartment,value\n";
  for (std::size_t t = 0; t < tr.T; ++t) {
    for (std::size_t j = 0; j < tr.modes; ++j)
      out << t << ',' << j + 1 << ',' << tr.mode_values[t * tr.modes + j] << '\n';
    out << t << ',' << tr.modes + 1 << ',' << tr.v_s[t] << '\n';
  }
  if (!out) throw IoError("failed writing " + path.string());
}

ModeSpectrum mode_spectrum(const PmsnParams& p) {
  ModeSpectrum s;
  for (std::size_t f = 0; f < p.neurons; ++f)
    for (std::size_t j = 0; j < p.modes; ++j) {
      const auto z = p.lambda_dt[p.index(f, j)];
      s.neuron.push_back(f);
      s.mode.push_back(j);
      s.frequency.push_back(z.imag() / (2.0 * std::numbers::pi));
      s.damping.push_back(z.real());
    }
  return s;
}

void write_spectrum_csv(const std::filesystem::path& path, const ModeSpectrum& s) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  out.precision(17);
  out << "neuron,mode,frequency,damping\n";
  for (std::size_t i = 0; i < s.neuron.size(); ++i)
    out << s.neuron[i] << ',' << s.mode[i] << ',' << s.frequency[i] << ',' << s.damping[i] << '\n';
  if (!out) throw IoError("failed writing " + path.string());
}

Histogram histogram(const std::vector<double>& values, std::size_t bins) {
  if (bins == 0) throw InvalidArgument("histogram needs at least one bin");
  Histogram h;
  h.counts.assign(bins, 0);
  if (values.empty()) return h;
  h.lo = *std::min_element(values.begin(), values.end());
  h.hi = *std::max_element(values.begin(), values.end());
  const double width = (h.hi - h.lo) / static_cast<double>(bins);
  for (double v : values) {
    std::size_t k = width > 0 ? static_cast<std::size_t>((v - h.lo) / width) : 0;
    h.counts[std::min(k, bins - 1)]++;
  }
  return h;
}

void write_histogram_csv(const std::filesystem::path& path, const std::string& quantity,
                         const Histogram& h) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  out.precision(17);
  out << "quantity,bin_lo,bin_hi,count\n";
  const double width = (h.hi - h.lo) / static_cast<double>(h.counts.size());
  for (std::size_t k = 0; k < h.counts.size(); ++k)
    out << quantity << ',' << h.lo + width * static_cast<double>(k) << ','
        << h.lo + width * static_cast<double>(k + 1) << ',' << h.counts[k] << '\n';
  if (!out) throw IoError("failed writing " + path.string());
}

std::vector<std::size_t> zero_crossings(const std::vector<double>& x, std::size_t stride,
                                        std::size_t offset) {
  std::vector<std::size_t> out;
  double prev = 0.0;
  bool have = false;
  for (std::size_t i = offset, t = 0; i < x.size(); i += stride, ++t) {
    const double v = x[i];
    if (v == 0.0) continue;
    if (have && ((prev < 0) != (v < 0))) out.push_back(t);
    prev = v;
    have = true;
  }
  return out;
}

}  // namespace pmsn
