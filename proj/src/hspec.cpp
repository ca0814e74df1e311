#include "crashnet/hspec.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <mutex>
#include <numbers>
#include <sstream>

#include <fftw3.h>
#include <json.hpp>

#include "crashnet/errors.hpp"

namespace crashnet {

namespace {

constexpr double kPi = std::numbers::pi;

// FFTW plan creation is not thread-safe; execution of a ready plan is.
std::mutex& fftw_plan_mutex() {
  static std::mutex m;
  return m;
}

std::vector<std::complex<double>> fft(std::vector<std::complex<double>> data,
                                      int sign) {
  int n = int(data.size());
  std::vector<std::complex<double>> out(data.size());
  fftw_plan plan;
  {
    std::lock_guard<std::mutex> lock(fftw_plan_mutex());
    plan = fftw_plan_dft_1d(n, reinterpret_cast<fftw_complex*>(data.data()),
                            reinterpret_cast<fftw_complex*>(out.data()), sign,
                            FFTW_ESTIMATE);
  }
  fftw_execute(plan);
  {
    std::lock_guard<std::mutex> lock(fftw_plan_mutex());
    fftw_destroy_plan(plan);
  }
  return out;
}

}  // namespace

AnalyticSeries analytic_signal(const std::vector<double>& imf) {
  size_t n = imf.size();
  if (n < 8) {
    throw DataError("analytic_signal needs at least 8 samples, got " +
                    std::to_string(n));
  }
  for (double v : imf) {
    if (!std::isfinite(v)) {
      throw DataError("analytic_signal: input contains NaN or Inf");
    }
  }

  std::vector<std::complex<double>> buf(n);
  for (size_t t = 0; t < n; ++t) buf[t] = imf[t];
  auto freq = fft(std::move(buf), FFTW_FORWARD);

  // One-sided doubling: keep DC (and Nyquist when n is even), double the
  // positive frequencies, zero the negative ones.
  size_t pos_end = n / 2 + (n % 2) - 1;           // last strictly positive bin
  size_t neg_begin = (n + 1) / 2 + (n % 2 ? 0 : 1);  // first negative bin
  for (size_t k = 1; k <= pos_end; ++k) freq[k] *= 2.0;
  for (size_t k = neg_begin; k < n; ++k) freq[k] = 0.0;

  auto z = fft(std::move(freq), FFTW_BACKWARD);
  for (auto& v : z) v /= double(n);

  AnalyticSeries out;
  out.amplitude.resize(n);
  out.phase.resize(n);
  out.frequency.resize(n);

  double max_amp = 0.0;
  for (size_t t = 0; t < n; ++t) {
    out.amplitude[t] = std::abs(z[t]);
    max_amp = std::max(max_amp, out.amplitude[t]);
  }

  double offset = 0.0;
  for (size_t t = 0; t < n; ++t) {
    double raw = std::atan2(z[t].imag(), z[t].real());
    if (t > 0) {
      double prev = out.phase[t - 1];
      double cand = raw + offset;
      while (cand - prev > kPi) {
        offset -= 2.0 * kPi;
        cand = raw + offset;
      }
      while (cand - prev < -kPi) {
        offset += 2.0 * kPi;
        cand = raw + offset;
      }
    }
    out.phase[t] = raw + offset;
  }

  for (size_t t = 0; t < n; ++t) {
    if (out.amplitude[t] < 1e-8 * max_amp || max_amp == 0.0) {
      out.frequency[t] = 0.0;
    } else if (t == 0) {
      out.frequency[t] = out.phase[1] - out.phase[0];
    } else if (t == n - 1) {
      out.frequency[t] = out.phase[n - 1] - out.phase[n - 2];
    } else {
      out.frequency[t] = 0.5 * (out.phase[t + 1] - out.phase[t - 1]);
    }
  }
  return out;
}

HilbertSpectrum hilbert_spectrum(const ImfSet& set, size_t bins,
                                 size_t drop_slowest,
                                 const std::vector<Date>& dates) {
  if (bins < 2) {
    throw ConfigError("hilbert_spectrum needs at least 2 bins");
  }
  if (set.imfs.size() <= drop_slowest) {
    throw DataError("hilbert_spectrum: no modes to accumulate");
  }
  if (!dates.empty() && dates.size() != set.source_len) {
    throw DataError("hilbert_spectrum: date axis does not match series length");
  }

  size_t n_modes = set.imfs.size() - drop_slowest;
  std::vector<AnalyticSeries> analytic;
  analytic.reserve(n_modes);
  for (size_t i = 0; i < n_modes; ++i) {
    analytic.push_back(analytic_signal(set.imfs[i].values));
  }

  double w_max = 0.0;
  for (const auto& a : analytic) {
    for (double w : a.frequency) w_max = std::max(w_max, w);
  }
  if (w_max <= 0.0) w_max = kPi;

  HilbertSpectrum spec;
  spec.time_axis = dates;
  spec.freq_edges.resize(bins + 1);
  for (size_t b = 0; b <= bins; ++b) {
    spec.freq_edges[b] = w_max * double(b) / double(bins);
  }
  spec.power.assign(set.source_len * bins, 0.0);

  for (size_t i = 0; i < n_modes; ++i) {
    const auto& a = analytic[i];
    for (size_t t = 0; t < set.source_len; ++t) {
      double w = a.frequency[t];
      size_t b = 0;
      if (w > 0.0) {
        b = std::min(size_t(w / w_max * double(bins)), bins - 1);
      }
      spec.at(t, b) += a.amplitude[t] * a.amplitude[t];
    }
  }
  return spec;
}

EnergySeries instantaneous_energy(const HilbertSpectrum& spec) {
  EnergySeries out;
  out.dates = spec.time_axis;
  out.energy.resize(spec.num_times());
  for (size_t t = 0; t < spec.num_times(); ++t) {
    double sum = 0.0;
    for (size_t b = 0; b < spec.bins(); ++b) sum += spec.at(t, b);
    out.energy[t] = sum;
  }
  return out;
}

namespace {

double median_of(std::vector<double> v) {
  size_t n = v.size();
  std::sort(v.begin(), v.end());
  return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

}  // namespace

size_t trend_mode_count(const ImfSet& set, double max_period_days) {
  if (set.imfs.size() < 2) return 0;
  size_t count = 0;
  double limit = std::min(max_period_days, double(set.source_len) / 2.0);
  for (size_t i = set.imfs.size(); i-- > 0;) {
    double med_freq = median_of(analytic_signal(set.imfs[i].values).frequency);
    if (med_freq <= 0.0 || 2.0 * kPi / med_freq > limit) {
      ++count;
    } else {
      break;
    }
  }
  return std::min(count, set.imfs.size() - 1);
}

CrashWindow detect_crash(const EnergySeries& energy, const PriceSeries& prices,
                         const CrashConfig& cfg) {
  if (cfg.spike_k <= 0 || cfg.lookback_days < 0 || cfg.lookahead_days < 0) {
    throw ConfigError("crash config: spike_k must be positive, windows non-negative");
  }
  if (energy.dates.empty() || energy.dates != prices.dates) {
    throw DataError("detect_crash: energy and price series must share a date axis");
  }

  double med = median_of(energy.energy);
  std::vector<double> dev(energy.energy.size());
  for (size_t t = 0; t < dev.size(); ++t) {
    dev[t] = std::abs(energy.energy[t] - med);
  }
  double mad = median_of(std::move(dev));
  double threshold = med + cfg.spike_k * mad;

  size_t trigger = energy.energy.size();
  for (size_t t = 0; t < energy.energy.size(); ++t) {
    if (energy.energy[t] > threshold) {
      trigger = t;
      break;
    }
  }
  if (trigger == energy.energy.size()) {
    throw NoCrashDetected("no energy spike above median + " +
                          io::format_double(cfg.spike_k, io::FloatFormat::kSig6) +
                          "*MAD");
  }

  CrashWindow win;
  win.trigger_date = energy.dates[trigger];

  // earliest date wins ties in both searches
  Date lo = win.trigger_date - cfg.lookback_days;
  size_t peak = trigger;
  for (size_t t = 0; t <= trigger; ++t) {
    if (prices.dates[t] < lo) continue;
    if (prices.closes[t] > prices.closes[peak] ||
        (t < peak && prices.closes[t] == prices.closes[peak])) {
      peak = t;
    }
  }
  Date hi = win.trigger_date + cfg.lookahead_days;
  size_t trough = trigger;
  for (size_t t = trigger; t < prices.dates.size(); ++t) {
    if (prices.dates[t] > hi) break;
    if (prices.closes[t] < prices.closes[trough]) trough = t;
  }
  win.peak_date = prices.dates[peak];
  win.trough_date = prices.dates[trough];

  if (!(win.peak_date < win.trough_date) ||
      prices.closes[trough] >= prices.closes[peak]) {
    throw NotACrash("prices do not fall across the energy spike at " +
                    win.trigger_date.to_string());
  }
  return win;
}

PeriodPartition partition_periods(const CrashWindow& crash, int span_days) {
  if (span_days < 1) throw ConfigError("span_days must be at least 1");
  PeriodPartition p;
  p.pre = {crash.peak_date - span_days, crash.peak_date - 1};
  p.crash = {crash.peak_date, crash.trough_date};
  p.post = {crash.trough_date + 1, crash.trough_date + span_days};
  return p;
}

std::string spectrum_to_csv(const HilbertSpectrum& spec, io::FloatFormat fmt) {
  std::ostringstream ss;
  ss << "date";
  for (size_t b = 0; b < spec.bins(); ++b) {
    double center = 0.5 * (spec.freq_edges[b] + spec.freq_edges[b + 1]);
    ss << ',' << io::format_double(center, fmt);
  }
  ss << '\n';
  for (size_t t = 0; t < spec.num_times(); ++t) {
    if (spec.time_axis.empty()) {
      ss << t;
    } else {
      ss << spec.time_axis[t].to_string();
    }
    for (size_t b = 0; b < spec.bins(); ++b) {
      ss << ',' << io::format_double(spec.at(t, b), fmt);
    }
    ss << '\n';
  }
  return ss.str();
}

std::string energy_to_csv(const EnergySeries& energy, io::FloatFormat fmt) {
  std::ostringstream ss;
  ss << "date,energy\n";
  for (size_t t = 0; t < energy.energy.size(); ++t) {
    if (energy.dates.empty()) {
      ss << t;
    } else {
      ss << energy.dates[t].to_string();
    }
    ss << ',' << io::format_double(energy.energy[t], fmt) << '\n';
  }
  return ss.str();
}

std::string crash_report_json(const CrashWindow& crash,
                              const PeriodPartition& periods) {
  nlohmann::json j;
  j["trigger"] = crash.trigger_date.to_string();
  j["peak"] = crash.peak_date.to_string();
  j["trough"] = crash.trough_date.to_string();
  auto window = [](const DateWindow& w) {
    return nlohmann::json{{"start", w.start.to_string()},
                          {"end", w.end.to_string()}};
  };
  j["periods"] = {{"pre", window(periods.pre)},
                  {"crash", window(periods.crash)},
                  {"post", window(periods.post)}};
  return j.dump(2) + "\n";
}

}  // namespace crashnet
