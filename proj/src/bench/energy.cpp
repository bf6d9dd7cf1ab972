#include <algorithm>
#include <fstream>
#include <numeric>

#include "pmsn/bench.hpp"
#include "pmsn/error.hpp"

namespace pmsn {

namespace {

Int128 gcd128(Int128 a, Int128 b) {
  if (a < 0) a = -a;
  if (b < 0) b = -b;
  while (b != 0) {
    const Int128 r = a % b;
    a = b;
    b = r;
  }
  return a;
}

std::string int128_to_string(Int128 v) {
  if (v == 0) return "0";
  const bool neg = v < 0;
  if (neg) v = -v;
  std::string s;
  while (v > 0) {
    s.insert(s.begin(), static_cast<char>('0' + static_cast<int>(v % 10)));
    v /= 10;
  }
  return neg ? "-" + s : s;
}

}  // namespace

Rational::Rational(Int128 n, Int128 d) : num(n), den(d) {
  if (d == 0) throw InvalidArgument("rational with zero denominator");
  if (den < 0) {
    num = -num;
    den = -den;
  }
  const Int128 g = gcd128(num, den);
  if (g > 1) {
    num /= g;
    den /= g;
  }
}

Rational Rational::operator+(const Rational& o) const {
  const Int128 g = gcd128(den, o.den);
  return Rational(num * (o.den / g) + o.num * (den / g), den / g * o.den);
}

Rational Rational::operator*(const Rational& o) const {
  const Int128 g1 = gcd128(num, o.den), g2 = gcd128(o.num, den);
  const Int128 a = g1 ? g1 : 1, b = g2 ? g2 : 1;
  return Rational((num / a) * (o.num / b), (den / b) * (o.den / a));
}

double Rational::to_double() const {
  const Int128 whole = num / den;
  const Int128 rem = num % den;
  return static_cast<double>(whole) + static_cast<double>(rem) / static_cast<double>(den);
}

std::string Rational::to_string() const {
  Int128 d = den;
  int twos = 0, fives = 0;
  while (d % 2 == 0) d /= 2, ++twos;
  while (d % 5 == 0) d /= 5, ++fives;
  if (d != 1) return int128_to_string(num) + "/" + int128_to_string(den);
  const int digits = std::max(twos, fives);
  Int128 scale = 1;
  for (int i = 0; i < digits; ++i) scale *= 10;
  const Int128 scaled = num * (scale / den);
  std::string s = int128_to_string(scaled < 0 ? -scaled : scaled);
  if (digits > 0) {
    if (static_cast<int>(s.size()) <= digits) s.insert(0, digits - s.size() + 1, '0');
    s.insert(s.size() - digits, ".");
  }
  return scaled < 0 ? "-" + s : s;
}

ModelKind parse_model_kind(std::string_view s) {
  if (s == "lif") return ModelKind::kLif;
  if (s == "pmsn") return ModelKind::kPmsn;
  if (s == "psn") return ModelKind::kPsn;
  if (s == "masked_psn") return ModelKind::kMaskedPsn;
  if (s == "spsn") return ModelKind::kSpsn;
  throw InvalidArgument("unknown model kind '" + std::string(s) + "'");
}

std::string_view to_string(ModelKind k) {
  switch (k) {
    case ModelKind::kLif: return "lif";
    case ModelKind::kPmsn: return "pmsn";
    case ModelKind::kPsn: return "psn";
    case ModelKind::kMaskedPsn: return "masked_psn";
    case ModelKind::kSpsn: return "spsn";
  }
  return "?";
}

EnergyReport energy_estimate(const EnergyStats& s) {
  if (s.fr_den == 0) throw InvalidArgument("spike rate denominator must be positive");
  if (s.fr_num > s.fr_den) throw InvalidArgument("spike rate must not exceed 1");
  if (s.kind == ModelKind::kPmsn && s.n < 2) throw InvalidArgument("PMSN energy needs n >= 2");
  using i128 = Int128;
  const i128 h = s.h, m = s.m, t = s.t;
  EnergyReport r;
  r.layer = s.layer;
  r.ac_count = Rational(h * m * t * static_cast<i128>(s.fr_num), static_cast<i128>(s.fr_den));
  i128 macs = 0;
  switch (s.kind) {
    case ModelKind::kLif: macs = m * t; break;
    case ModelKind::kPmsn: macs = 8 * (static_cast<i128>(s.n) - 1) * m * t; break;
    case ModelKind::kPsn: macs = m * t * t; break;
    case ModelKind::kMaskedPsn:
    case ModelKind::kSpsn: macs = static_cast<i128>(s.k) * m * t; break;
  }
  r.mac_count = Rational(macs);
  r.picojoules = r.ac_count * Rational(kEacDeciPj, 10) + r.mac_count * Rational(kEmacDeciPj, 10);
  return r;
}

std::vector<EnergyStats> network_energy_stats(const Network& net, const EvalResult& eval, std::size_t T) {
  const auto& blocks = net.blocks();
  if (eval.input_nonzero.size() != blocks.size() || eval.input_elements.size() != blocks.size())
    throw InvalidArgument("evaluation does not cover every block of the network");
  std::vector<EnergyStats> out;
  for (std::size_t k = 0; k < blocks.size(); ++k) {
    EnergyStats s;
    s.layer = "block" + std::to_string(k);
    s.kind = net.spec().neuron == NeuronKind::kPmsn ? ModelKind::kPmsn : ModelKind::kLif;
    s.h = blocks[k].dense.in;
    s.m = blocks[k].dense.out;
    s.t = T;
    s.n = static_cast<std::uint64_t>(net.spec().n);
    s.fr_num = eval.input_nonzero[k];
    s.fr_den = std::max<std::uint64_t>(eval.input_elements[k], 1);
    out.push_back(s);
  }
  return out;
}

void write_energy_csv(const std::filesystem::path& path, const std::vector<EnergyReport>& rows) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  out << "layer,ac_count,mac_count,picojoules\n";
  for (const auto& r : rows)
    out << r.layer << ',' << r.ac_count.to_string() << ',' << r.mac_count.to_string() << ','
        << r.picojoules.to_string() << '\n';
  if (!out) throw IoError("failed writing " + path.string());
}

template <typename Real>
double spike_density(const SeqTensor<Real>& S) {
  if (S.size() == 0) return 0.0;
  double total = 0.0;
  for (Real v : S.data()) total += static_cast<double>(v);
  return total / static_cast<double>(S.size());
}

template double spike_density(const SeqTensor<float>&);
template double spike_density(const SeqTensor<double>&);

}  // namespace pmsn
