#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <limits>
#include <map>
#include <numbers>

#include "pmsn/bench.hpp"
#include "pmsn/error.hpp"
#include "pmsn/network.hpp"
#include "pmsn/neuron.hpp"
#include "pmsn/trainer.hpp"
#include "support.hpp"

namespace pmsn {
namespace {

EnergyStats table_dims(ModelKind kind) {
  EnergyStats s;
  s.layer = "l0";
  s.kind = kind;
  s.h = 100;
  s.m = 64;
  s.t = 784;
  s.fr_num = 1;
  s.fr_den = 10;
  return s;
}

// 100*64*784/10 accumulates at 0.9 pJ.
constexpr std::int64_t kAcCount = 501760;
const Rational kAcPj(Int128{451584});

TEST(Energy, LifRow) {
  const auto r = energy_estimate(table_dims(ModelKind::kLif));
  EXPECT_EQ(r.ac_count, Rational(Int128{kAcCount}));
  EXPECT_EQ(r.mac_count, Rational(Int128{64 * 784}));
  EXPECT_EQ(r.picojoules, kAcPj + Rational(Int128{2308096}, 10));
  EXPECT_EQ(r.picojoules.to_string(), "682393.6");
}

TEST(Energy, PmsnRow) {
  auto s = table_dims(ModelKind::kPmsn);
  s.n = 5;
  const auto r = energy_estimate(s);
  EXPECT_EQ(r.mac_count, Rational(Int128{8 * 4 * 64 * 784}));
  EXPECT_EQ(r.picojoules, kAcPj + Rational(Int128{73859072}, 10));
  EXPECT_EQ(r.picojoules.to_string(), "7837491.2");
}

TEST(Energy, PsnFamilyRows) {
  const auto psn = energy_estimate(table_dims(ModelKind::kPsn));
  EXPECT_EQ(psn.mac_count, Rational(Int128{64} * 784 * 784));
  EXPECT_EQ(psn.picojoules.to_string(), "181406310.4");
  for (auto kind : {ModelKind::kMaskedPsn, ModelKind::kSpsn}) {
    auto s = table_dims(kind);
    s.k = 4;
    const auto r = energy_estimate(s);
    EXPECT_EQ(r.mac_count, Rational(Int128{4 * 64 * 784}));
    EXPECT_EQ(r.picojoules.to_string(), "1374822.4");
  }
}

TEST(Energy, ZeroRateZeroesAccumulateTerm) {
  auto s = table_dims(ModelKind::kPmsn);
  s.n = 5;
  s.fr_num = 0;
  const auto r = energy_estimate(s);
  EXPECT_EQ(r.ac_count, Rational(Int128{0}));
  EXPECT_EQ(r.picojoules, r.mac_count * Rational(Int128{46}, 10));
}

TEST(Energy, NonTerminatingFractionStaysExact) {
  EnergyStats s;
  s.kind = ModelKind::kLif;
  s.h = s.m = s.t = 1;
  s.fr_num = 1;
  s.fr_den = 3;
  const auto r = energy_estimate(s);
  EXPECT_EQ(r.ac_count.to_string(), "1/3");
  EXPECT_EQ(r.picojoules, Rational(Int128{3}, 10) + Rational(Int128{46}, 10));
}

TEST(Energy, RejectsBadInputs) {
  EXPECT_THROW(parse_model_kind("rnn"), InvalidArgument);
  EXPECT_EQ(parse_model_kind("masked_psn"), ModelKind::kMaskedPsn);
  auto s = table_dims(ModelKind::kLif);
  s.fr_num = 11;
  EXPECT_THROW(energy_estimate(s), InvalidArgument);
  s = table_dims(ModelKind::kPmsn);
  s.n = 0;
  EXPECT_THROW(energy_estimate(s), InvalidArgument);
}

TEST(Energy, CsvSchema) {
  const auto path = std::filesystem::temp_directory_path() / "pmsn_energy.csv";
  write_energy_csv(path, {energy_estimate(table_dims(ModelKind::kLif))});
  std::ifstream is(path);
  std::string header, row;
  std::getline(is, header);
  std::getline(is, row);
  EXPECT_EQ(header, "layer,ac_count,mac_count,picojoules");
  EXPECT_EQ(row, "l0,501760,50176,682393.6");
}

TEST(Energy, MeasuredRunCountsBlockInputs) {
  NetworkSpec spec;
  spec.input = 3;
  spec.hidden = {6, 5};
  spec.classes = 3;
  spec.seed = 2;
  const Network net(spec);
  Dataset d = gen_delayed_recall(7, 20, 3, 4, 1);
  std::uint64_t nz = 0;
  for (float v : d.x.data()) nz += v != 0.0f;
  d.x(0, 0, 0) = 0.0f;
  nz -= d.y[0] == 0;
  const auto ev = evaluate<float>(net, d, 3);
  const auto stats = network_energy_stats(net, ev, 20);
  ASSERT_EQ(stats.size(), 2u);
  EXPECT_EQ(stats[0].fr_num, nz);
  EXPECT_EQ(stats[0].fr_den, 7u * 20u * 3u);
  EXPECT_EQ(stats[1].h, 6u);
  EXPECT_EQ(stats[1].m, 5u);
  EXPECT_EQ(stats[1].n, 5u);
  EXPECT_NEAR(static_cast<double>(stats[1].fr_num) / stats[1].fr_den, ev.input_rate[1], 1e-12);
  for (const auto& s : stats) EXPECT_TRUE(std::isfinite(energy_estimate(s).picojoules.to_double()));
}

TEST(Density, SilentFullAndInfiniteThreshold) {
  SeqTensor<float> S(2, 5, 3);
  EXPECT_EQ(spike_density(S), 0.0);
  std::fill(S.data().begin(), S.data().end(), 1.0f);
  EXPECT_EQ(spike_density(S), 1.0);

  auto p = init_params(5, 4, 3).pmsn;
  p.theta = std::numeric_limits<double>::infinity();
  std::mt19937_64 rng(1);
  const auto I = testing::random_input<double>(2, 64, 4, rng, 5.0, 5.0);
  EXPECT_EQ(spike_density(pmsn_serial_forward(p, I).S), 0.0);
}

// --------------------------------------------------------- impulse

PmsnParams single_mode(std::complex<double> lambda_dt, double phi_c, double phi_s) {
  PmsnParams p(1, 1);
  p.lambda_dt[0] = lambda_dt;
  p.phi_c[0] = phi_c;
  p.phi_s[0] = phi_s;
  p.dt[0] = 1.0;
  p.gamma_n[0] = 0.0;
  return p;
}

TEST(Impulse, SingleRealModeIsGeometric) {
  const auto p = single_mode({-0.1, 0.0}, 0.8, 1.3);
  const double Phi_c = (std::exp(-0.1) - 1.0) / -0.1 * 0.8;
  const auto tr = impulse_trace(p, 60);
  ASSERT_EQ(tr.modes, 1u);
  for (std::size_t t = 0; t < 60; ++t)
    EXPECT_NEAR(tr.mode_values[t], std::exp(-0.1 * t) * Phi_c * 1.3, 1e-9);
}

TEST(Impulse, ConjugatePairCrossingSpacing) {
  for (double im : {0.15, 0.3, 0.7, 1.2}) {
    PmsnParams p(1, 2);
    p.lambda_dt = {{-0.02, im}, {-0.02, -im}};
    p.phi_c = {{0.3, 0.5}, {0.3, -0.5}};
    p.phi_s = {{1.0, -0.2}, {1.0, 0.2}};
    p.dt[0] = 1.0;
    p.gamma_n[0] = 0.0;
    const auto tr = impulse_trace(p, 200);
    const auto zc = zero_crossings(tr.mode_values, 2, 0);
    ASSERT_GT(zc.size(), 3u);
    const double spacing = std::numbers::pi / im;
    for (std::size_t i = 1; i < zc.size(); ++i)
      EXPECT_NEAR(static_cast<double>(zc[i] - zc[i - 1]), spacing, 1.0) << "Im " << im;
  }
}

TEST(Impulse, CsvHasModesPlusOutputColumn) {
  const auto p = init_params(5, 2, 7).pmsn;
  const auto tr = impulse_trace(p, 10, 1);
  const auto path = std::filesystem::temp_directory_path() / "pmsn_impulse.csv";
  write_impulse_csv(path, tr);
  std::ifstream is(path);
  std::string line;
  std::getline(is, line);
  EXPECT_EQ(line, "t,compartment,value");
  std::map<int, int> per_compartment;
  while (std::getline(is, line)) ++per_compartment[std::stoi(line.substr(line.find(',') + 1))];
  ASSERT_EQ(per_compartment.size(), 5u);
  for (const auto& [c, count] : per_compartment) EXPECT_EQ(count, 10) << c;
  EXPECT_THROW(impulse_trace(p, 10, 2), InvalidArgument);
}

TEST(Impulse, InitDampingIsHalfStep) {
  const auto p = init_params(5, 16, 11).pmsn;
  const auto s = mode_spectrum(p);
  ASSERT_EQ(s.damping.size(), 16u * 4u);
  for (std::size_t i = 0; i < s.damping.size(); ++i)
    EXPECT_NEAR(s.damping[i], -0.5 * p.dt[s.neuron[i]], 1e-10);
}

TEST(Impulse, HistogramCountsEverySample) {
  const std::vector<double> v{0.0, 0.1, 0.2, 0.5, 0.9, 1.0};
  const auto h = histogram(v, 2);
  EXPECT_EQ(h.lo, 0.0);
  EXPECT_EQ(h.hi, 1.0);
  EXPECT_EQ(h.counts, (std::vector<std::size_t>{3, 3}));
  const auto flat = histogram(std::vector<double>(4, -0.25), 3);
  std::size_t total = 0;
  for (auto c : flat.counts) total += c;
  EXPECT_EQ(total, 4u);
}

TEST(Impulse, ZeroCrossingsSkipZeros) {
  const std::vector<double> x{1.0, 0.0, -1.0, -2.0, 0.0, 0.0, 3.0};
  EXPECT_EQ(zero_crossings(x), (std::vector<std::size_t>{2, 6}));
}

// ----------------------------------------------------------- timing

TEST(Timing, MeasureNeedsFiveRepetitions) {
  EXPECT_THROW(measure([] {}, 4), InvalidArgument);
  int calls = 0;
  const auto st = measure([&] { ++calls; }, 5, 2);
  EXPECT_EQ(calls, 7);
  EXPECT_EQ(st.repetitions, 5);
  EXPECT_GE(st.iqr_us, 0.0);
}

TEST(Timing, TableCoversEveryModelAndPass) {
  TimingConfig cfg;
  cfg.T_list = {16, 32};
  cfg.batch_list = {2};
  cfg.neurons = 4;
  const auto rows = time_models(cfg);
  ASSERT_EQ(rows.size(), 12u);
  for (const auto& r : rows) {
    EXPECT_GE(r.repetitions, 5);
    EXPECT_GT(r.median_us, 0.0);
    if (r.model.rfind("parallel_pmsn:", 0) == 0) EXPECT_EQ(r.ratio, 1.0);
  }
  const auto path = std::filesystem::temp_directory_path() / "pmsn_timing.csv";
  write_timing_csv(path, rows);
  std::ifstream is(path);
  std::string header;
  std::getline(is, header);
  EXPECT_EQ(header, "model,T,batch,median_us,iqr_us,ratio");
}

}  // namespace
}  // namespace pmsn
