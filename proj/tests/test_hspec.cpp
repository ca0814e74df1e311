#include <doctest.h>

#include <cmath>
#include <cstdint>
#include <numbers>
#include <utility>
#include <vector>

#include "crashnet/emd.hpp"
#include "crashnet/errors.hpp"
#include "crashnet/hspec.hpp"

using namespace crashnet;

namespace {

constexpr double kTau = 2.0 * std::numbers::pi;

std::vector<double> cosine(size_t n, double cycles, double amp = 1.0) {
  std::vector<double> x(n);
  for (size_t t = 0; t < n; ++t) {
    x[t] = amp * std::cos(kTau * cycles * double(t) / double(n));
  }
  return x;
}

ImfSet wrap_imfs(std::vector<std::vector<double>> modes) {
  ImfSet set;
  set.source_len = modes[0].size();
  for (auto& m : modes) {
    set.imfs.push_back({std::move(m), 0});
  }
  set.residual.assign(set.source_len, 0.0);
  return set;
}

std::vector<Date> date_axis(size_t n, const char* start = "2020-01-01") {
  std::vector<Date> dates;
  Date d = Date::parse(start);
  for (size_t t = 0; t < n; ++t) dates.push_back(d + int(t));
  return dates;
}

uint64_t splitmix64(uint64_t& state) {
  state += 0x9e3779b97f4a7c15ULL;
  uint64_t z = state;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

// 200 days of drifting, noisy prices, then a 40% drop over 15 days, then
// recovery. The fixed noise gives the energy baseline a realistic spread;
// the drift puts the pre-drop maximum near the top, as in a real bubble.
PriceSeries crash_price_series(double scale = 1.0) {
  PriceSeries s;
  s.symbol = "SYN";
  Date d = Date::parse("2020-01-01");
  size_t flat = 200, drop = 15, recover = 150;
  uint64_t rng = 11;
  for (size_t t = 0; t < flat + drop + recover; ++t) {
    double a = double(splitmix64(rng) >> 11) * 0x1.0p-53;
    double b = double(splitmix64(rng) >> 11) * 0x1.0p-53;
    if (a < 1e-300) a = 1e-300;
    double gauss = std::sqrt(-2.0 * std::log(a)) * std::cos(kTau * b);
    double logp = 0.10 * std::min(double(t), double(flat)) / double(flat);
    if (t >= flat && t < flat + drop) {
      double frac = double(t - flat + 1) / double(drop);
      logp += std::log(1.0 - 0.4 * frac);
    } else if (t >= flat + drop) {
      double frac = double(t - flat - drop + 1) / double(recover);
      logp += std::log(0.6 + 0.25 * frac);
    }
    s.dates.push_back(d + int(t));
    s.closes.push_back(100.0 * std::exp(logp + 0.010 * gauss) * scale);
  }
  return s;
}

// The detection flow: decompose log-price, drop trend modes from the
// spectrum, and trim the boundary transient that the finite Hilbert
// transform leaves at both ends.
constexpr size_t kEdgeTrim = 10;

std::pair<EnergySeries, PriceSeries> detection_inputs(const PriceSeries& prices) {
  std::vector<double> logp(prices.closes.size());
  for (size_t t = 0; t < logp.size(); ++t) logp[t] = std::log(prices.closes[t]);
  auto set = decompose(logp);
  auto spec = hilbert_spectrum(set, 64, trend_mode_count(set), prices.dates);
  auto energy = instantaneous_energy(spec);

  EnergySeries e;
  e.dates.assign(energy.dates.begin() + kEdgeTrim, energy.dates.end() - kEdgeTrim);
  e.energy.assign(energy.energy.begin() + kEdgeTrim, energy.energy.end() - kEdgeTrim);
  PriceSeries p;
  p.symbol = prices.symbol;
  p.dates.assign(prices.dates.begin() + kEdgeTrim, prices.dates.end() - kEdgeTrim);
  p.closes.assign(prices.closes.begin() + kEdgeTrim, prices.closes.end() - kEdgeTrim);
  return {std::move(e), std::move(p)};
}

}  // namespace

TEST_CASE("analytic signal of a resolved tone") {
  size_t n = 1000;
  double f = kTau * 10.0 / double(n);  // rad/sample
  auto a = analytic_signal(cosine(n, 10));
  for (size_t t = n / 10; t < n - n / 10; ++t) {
    CHECK(a.frequency[t] == doctest::Approx(f).epsilon(0.01));
    CHECK(a.amplitude[t] == doctest::Approx(1.0).epsilon(0.01));
  }
}

TEST_CASE("analytic signal amplitude tracks the tone amplitude") {
  size_t n = 512;
  auto a = analytic_signal(cosine(n, 8, 2.5));
  for (size_t t = n / 10; t < n - n / 10; ++t) {
    CHECK(a.amplitude[t] == doctest::Approx(2.5).epsilon(0.01));
  }
}

TEST_CASE("analytic signal of zero input") {
  std::vector<double> zero(64, 0.0);
  auto a = analytic_signal(zero);
  for (size_t t = 0; t < 64; ++t) {
    CHECK(a.amplitude[t] == 0.0);
    CHECK(a.frequency[t] == 0.0);
  }
}

TEST_CASE("unwrapped phase has no jumps") {
  auto a = analytic_signal(cosine(512, 20));
  for (size_t t = 1; t < 512; ++t) {
    CHECK(std::abs(a.phase[t] - a.phase[t - 1]) < std::numbers::pi);
  }
  // phase advances ~ 2*pi per cycle over the run
  CHECK(a.phase.back() - a.phase.front() ==
        doctest::Approx(kTau * 20.0).epsilon(0.05));
}

TEST_CASE("analytic signal input validation") {
  CHECK_THROWS_AS(analytic_signal({1, 2, 3}), DataError);
  std::vector<double> bad(32, 1.0);
  bad[3] = std::nan("");
  CHECK_THROWS_AS(analytic_signal(bad), DataError);
}

TEST_CASE("median frequency of resolved tones is within 1%") {
  for (double cycles : {8.0, 16.0, 32.0}) {  // >= 16 samples/cycle at n=512
    size_t n = 512;
    auto a = analytic_signal(cosine(n, cycles));
    std::vector<double> interior(a.frequency.begin() + n / 10,
                                 a.frequency.end() - n / 10);
    std::sort(interior.begin(), interior.end());
    double med = interior[interior.size() / 2];
    CHECK(med == doctest::Approx(kTau * cycles / double(n)).epsilon(0.01));
  }
}

TEST_CASE("spectrum of a pure tone concentrates in one bin") {
  size_t n = 512;
  auto set = wrap_imfs({cosine(n, 16)});
  auto spec = hilbert_spectrum(set, 32);
  REQUIRE(spec.bins() == 32);

  std::vector<double> per_bin(spec.bins(), 0.0);
  double total = 0.0;
  for (size_t t = n / 10; t < n - n / 10; ++t) {
    for (size_t b = 0; b < spec.bins(); ++b) {
      per_bin[b] += spec.at(t, b);
      total += spec.at(t, b);
    }
  }
  double top = *std::max_element(per_bin.begin(), per_bin.end());
  CHECK(top / total > 0.95);
}

TEST_CASE("two separated tones land in two distinct bins") {
  size_t n = 1024;
  auto set = wrap_imfs({cosine(n, 128, 1.0), cosine(n, 8, 2.0)});
  auto spec = hilbert_spectrum(set, 16);

  std::vector<double> per_bin(spec.bins(), 0.0);
  for (size_t t = n / 10; t < n - n / 10; ++t) {
    for (size_t b = 0; b < spec.bins(); ++b) per_bin[b] += spec.at(t, b);
  }
  // strongest two bins must dominate and be distinct
  auto sorted = per_bin;
  std::sort(sorted.begin(), sorted.end(), std::greater<>());
  double total = 0.0;
  for (double p : per_bin) total += p;
  CHECK((sorted[0] + sorted[1]) / total > 0.9);
  // the slow tone has 4x the power of the fast one
  size_t slow_bin = std::max_element(per_bin.begin(), per_bin.end()) - per_bin.begin();
  CHECK(per_bin[slow_bin] / total > 0.6);
  CHECK(slow_bin < spec.bins() / 2);  // slow tone sits in the low bins
}

TEST_CASE("zero mode gives an all-zero spectrum") {
  auto set = wrap_imfs({std::vector<double>(64, 0.0)});
  auto spec = hilbert_spectrum(set, 8);
  for (double p : spec.power) CHECK(p == 0.0);
  auto e = instantaneous_energy(spec);
  for (double v : e.energy) CHECK(v == 0.0);
}

TEST_CASE("spectrum argument validation") {
  auto set = wrap_imfs({cosine(64, 4)});
  CHECK_THROWS_AS(hilbert_spectrum(set, 1), ConfigError);
  CHECK_THROWS_AS(hilbert_spectrum(set, 8, 1), DataError);  // nothing left
  ImfSet empty;
  empty.source_len = 64;
  empty.residual.assign(64, 0.0);
  CHECK_THROWS_AS(hilbert_spectrum(empty, 8), DataError);
  CHECK_THROWS_AS(hilbert_spectrum(set, 8, 0, date_axis(63)), DataError);
}

TEST_CASE("drop_slowest removes the low-frequency mode's power") {
  size_t n = 1024;
  auto set = wrap_imfs({cosine(n, 128), cosine(n, 8)});
  auto all = instantaneous_energy(hilbert_spectrum(set, 16));
  auto fast_only = instantaneous_energy(hilbert_spectrum(set, 16, 1));
  double sum_all = 0, sum_fast = 0;
  for (size_t t = 0; t < n; ++t) {
    sum_all += all.energy[t];
    sum_fast += fast_only.energy[t];
  }
  CHECK(sum_fast < 0.6 * sum_all);
  CHECK(sum_fast > 0.0);
}

TEST_CASE("energy of a unit tone is near one in the interior") {
  size_t n = 512;
  auto set = wrap_imfs({cosine(n, 16)});
  auto e = instantaneous_energy(hilbert_spectrum(set, 32));
  for (size_t t = n / 10; t < n - n / 10; ++t) {
    CHECK(e.energy[t] == doctest::Approx(1.0).epsilon(0.05));
  }
}

TEST_CASE("doubling a mode amplitude quadruples the energy") {
  size_t n = 256;
  auto e1 = instantaneous_energy(hilbert_spectrum(wrap_imfs({cosine(n, 8)}), 16));
  auto e2 =
      instantaneous_energy(hilbert_spectrum(wrap_imfs({cosine(n, 8, 2.0)}), 16));
  for (size_t t = 0; t < n; ++t) {
    CHECK(e2.energy[t] == doctest::Approx(4.0 * e1.energy[t]).epsilon(1e-12));
  }
}

TEST_CASE("binning conserves per-time energy exactly") {
  // oracle: regroup the squared amplitudes by bin in the same mode order,
  // then fold the bins in ascending order; the spectrum must match bitwise
  std::vector<double> logp;
  for (size_t t = 0; t < 400; ++t) {
    logp.push_back(std::log(100.0) + 0.01 * std::sin(kTau * t / 23.0) +
                   0.02 * std::sin(kTau * t / 101.0) + 1e-4 * double(t));
  }
  auto set = decompose(logp);
  REQUIRE(!set.imfs.empty());
  size_t bins = 24;
  auto spec = hilbert_spectrum(set, bins);
  double w_max = spec.freq_edges.back();

  std::vector<AnalyticSeries> modes;
  for (const auto& imf : set.imfs) modes.push_back(analytic_signal(imf.values));

  auto e = instantaneous_energy(spec);
  for (size_t t = 0; t < set.source_len; ++t) {
    std::vector<double> bin_sums(bins, 0.0);
    for (const auto& a : modes) {
      double w = a.frequency[t];
      size_t b = 0;
      if (w > 0.0) b = std::min(size_t(w / w_max * double(bins)), bins - 1);
      bin_sums[b] += a.amplitude[t] * a.amplitude[t];
    }
    double oracle = 0.0;
    for (size_t b = 0; b < bins; ++b) oracle += bin_sums[b];
    CHECK(e.energy[t] == oracle);  // bitwise: same additions, same order

    double direct = 0.0;
    for (const auto& a : modes) direct += a.amplitude[t] * a.amplitude[t];
    CHECK(e.energy[t] == doctest::Approx(direct).epsilon(1e-12));
  }
}

TEST_CASE("detector finds the engineered crash") {
  auto prices = crash_price_series();
  auto [energy, trimmed] = detection_inputs(prices);
  auto win = detect_crash(energy, trimmed);

  // drop was engineered over days 200..214
  Date drop_start = prices.dates[200];
  Date drop_end = prices.dates[214];
  CHECK(win.peak_date <= drop_start);
  CHECK(win.trough_date >= drop_end);

  // peak within 2 days of the pre-drop maximum
  size_t best = 0;
  for (size_t t = 0; t < 200; ++t) {
    if (prices.closes[t] > prices.closes[best]) best = t;
  }
  int dist = std::abs(win.peak_date - prices.dates[best]);
  CHECK(dist <= 2);

  CHECK(win.peak_date <= win.trigger_date);
  CHECK(win.trigger_date <= win.trough_date);
}

TEST_CASE("detection is invariant under uniform price scaling") {
  auto base = crash_price_series();
  auto [e1, p1] = detection_inputs(base);
  auto w1 = detect_crash(e1, p1);
  for (double c : {3.7, 0.01, 250.0}) {
    auto scaled = crash_price_series(c);
    auto [e2, p2] = detection_inputs(scaled);
    auto w2 = detect_crash(e2, p2);
    CHECK(w1.peak_date == w2.peak_date);
    CHECK(w1.trough_date == w2.trough_date);
    CHECK(w1.trigger_date == w2.trigger_date);
  }
}

TEST_CASE("trend modes are counted from the slow end") {
  // fast tone: 32 cycles over 256 samples (period 8); slow "modes" with
  // periods 256 and 512 at n=256 both exceed half the span
  auto set = wrap_imfs({cosine(256, 32.0), cosine(256, 1.0), cosine(256, 0.5)});
  CHECK(trend_mode_count(set) == 2);

  auto all_fast = wrap_imfs({cosine(256, 32.0), cosine(256, 16.0)});
  CHECK(trend_mode_count(all_fast) == 0);

  // every mode slow: one must still survive
  auto all_slow = wrap_imfs({cosine(512, 1.0), cosine(512, 0.5)});
  CHECK(trend_mode_count(all_slow) == 1);

  ImfSet single = wrap_imfs({cosine(256, 1.0)});
  CHECK(trend_mode_count(single) == 0);
}

TEST_CASE("flat energy raises NoCrashDetected") {
  PriceSeries s;
  s.symbol = "FLAT";
  s.dates = date_axis(100);
  s.closes.assign(100, 42.0);
  EnergySeries e;
  e.dates = s.dates;
  e.energy.assign(100, 0.0);
  CHECK_THROWS_AS(detect_crash(e, s), NoCrashDetected);
}

TEST_CASE("rising market with an energy spike is not a crash") {
  PriceSeries s;
  s.symbol = "UP";
  s.dates = date_axis(100);
  for (size_t t = 0; t < 100; ++t) s.closes.push_back(100.0 + double(t));
  EnergySeries e;
  e.dates = s.dates;
  e.energy.assign(100, 1.0);
  e.energy[50] = 100.0;
  CHECK_THROWS_AS(detect_crash(e, s), NotACrash);
}

TEST_CASE("mismatched axes are rejected") {
  PriceSeries s;
  s.symbol = "X";
  s.dates = date_axis(10);
  s.closes.assign(10, 1.0);
  EnergySeries e;
  e.dates = date_axis(10, "2021-01-01");
  e.energy.assign(10, 0.0);
  CHECK_THROWS_AS(detect_crash(e, s), DataError);
}

TEST_CASE("partition matches the published 2017-18 layout") {
  CrashWindow win;
  win.peak_date = Date::parse("2017-12-17");
  win.trough_date = Date::parse("2018-02-05");
  win.trigger_date = Date::parse("2017-12-22");
  auto p = partition_periods(win);
  CHECK(p.pre.start.to_string() == "2017-09-03");
  CHECK(p.pre.end.to_string() == "2017-12-16");
  CHECK(p.crash.start.to_string() == "2017-12-17");
  CHECK(p.crash.end.to_string() == "2018-02-05");
  CHECK(p.post.start.to_string() == "2018-02-06");
  CHECK(p.post.end.to_string() == "2018-05-21");
}

TEST_CASE("partition spans and contiguity") {
  CrashWindow win;
  win.peak_date = Date::parse("2020-03-01");
  win.trough_date = Date::parse("2020-03-20");
  win.trigger_date = Date::parse("2020-03-05");

  SUBCASE("span 1 gives single-day flanks") {
    auto p = partition_periods(win, 1);
    CHECK(p.pre.start == p.pre.end);
    CHECK(p.pre.end.to_string() == "2020-02-29");
    CHECK(p.post.start == p.post.end);
    CHECK(p.post.start.to_string() == "2020-03-21");
  }
  SUBCASE("windows are contiguous and non-overlapping") {
    for (int span : {1, 30, 105}) {
      auto p = partition_periods(win, span);
      CHECK(p.pre.end + 1 == p.crash.start);
      CHECK(p.crash.end + 1 == p.post.start);
      CHECK(p.pre.length_days() == span);
      CHECK(p.post.length_days() == span);
    }
  }
  SUBCASE("invalid span") {
    CHECK_THROWS_AS(partition_periods(win, 0), ConfigError);
  }
}

TEST_CASE("spectrum and energy exports") {
  size_t n = 64;
  auto set = wrap_imfs({cosine(n, 4)});
  auto spec = hilbert_spectrum(set, 4, 0, date_axis(n));
  auto csv = spectrum_to_csv(spec);
  CHECK(csv.substr(0, 5) == "date,");
  CHECK(csv.find("2020-01-01") != std::string::npos);
  size_t lines = std::count(csv.begin(), csv.end(), '\n');
  CHECK(lines == n + 1);

  auto e = instantaneous_energy(spec);
  auto ecsv = energy_to_csv(e);
  CHECK(ecsv.substr(0, 12) == "date,energy\n");
  CHECK(std::count(ecsv.begin(), ecsv.end(), '\n') == n + 1);
}

TEST_CASE("crash report json") {
  CrashWindow win;
  win.peak_date = Date::parse("2017-12-17");
  win.trough_date = Date::parse("2018-02-05");
  win.trigger_date = Date::parse("2017-12-22");
  auto j = crash_report_json(win, partition_periods(win));
  CHECK(j.find("\"peak\": \"2017-12-17\"") != std::string::npos);
  CHECK(j.find("\"trough\": \"2018-02-05\"") != std::string::npos);
  CHECK(j.find("\"trigger\": \"2017-12-22\"") != std::string::npos);
  CHECK(j.find("\"pre\"") != std::string::npos);
  CHECK(j.find("2017-09-03") != std::string::npos);
}
