#pragma once

#include <cstddef>
#include <limits>
#include <string>
#include <vector>

#include "crashnet/date.hpp"
#include "crashnet/emd.hpp"
#include "crashnet/ingest.hpp"
#include "crashnet/io.hpp"

namespace crashnet {

// Amplitude, unwrapped phase, and instantaneous frequency of one mode.
// Frequency is in rad/day (daily sampling).
struct AnalyticSeries {
  std::vector<double> amplitude;
  std::vector<double> phase;
  std::vector<double> frequency;
};

// Discrete analytic signal via the frequency domain: negative frequencies
// zeroed, positive doubled, DC and Nyquist kept. Phase is unwrapped;
// frequency is the centered difference of phase (one-sided at the ends).
// Samples whose amplitude is below 1e-8 of the series maximum report
// frequency 0, since phase is undefined there. Throws DataError for inputs
// shorter than 8 samples or containing NaN/Inf.
AnalyticSeries analytic_signal(const std::vector<double>& imf);

struct HilbertSpectrum {
  std::vector<Date> time_axis;     // empty when the input was undated
  std::vector<double> freq_edges;  // B+1 uniform edges over [0, w_max]
  std::vector<double> power;       // row-major T x B, K^2 sums

  size_t num_times() const { return power.size() / bins(); }
  size_t bins() const { return freq_edges.size() - 1; }
  double at(size_t t, size_t b) const { return power[t * bins() + b]; }
  double& at(size_t t, size_t b) { return power[t * bins() + b]; }
};

// Accumulates squared mode amplitudes into the frequency bin holding the
// mode's instantaneous frequency at each time, mode index ascending.
// Negative frequencies clamp to bin 0. The bin range tops out at the
// largest observed frequency (pi when no positive frequency exists).
// drop_slowest excludes that many of the lowest-frequency modes (the tail
// of the list); the residual is never included. Throws ConfigError for
// bins < 2 and DataError when no modes remain.
HilbertSpectrum hilbert_spectrum(const ImfSet& set, size_t bins,
                                 size_t drop_slowest = 0,
                                 const std::vector<Date>& dates = {});

// Number of trailing modes that are trend rather than oscillation: counted
// from the slowest mode upward while the median instantaneous frequency
// implies a period longer than the limit, which is half the series length
// capped at max_period_days. At least one mode is always kept. Useful as
// drop_slowest when the energy should reflect oscillatory structure only;
// slow trend modes otherwise dominate it through their envelopes.
size_t trend_mode_count(
    const ImfSet& set,
    double max_period_days = std::numeric_limits<double>::infinity());

struct EnergySeries {
  std::vector<Date> dates;
  std::vector<double> energy;
};

// Marginal of the spectrum over frequency: E(t) = sum_b power(t,b), bin
// index ascending, which equals the sum of squared mode amplitudes.
EnergySeries instantaneous_energy(const HilbertSpectrum& spec);

struct CrashConfig {
  double spike_k = 4.0;    // threshold: median + spike_k * MAD
  int lookback_days = 60;   // peak search window before the trigger
  int lookahead_days = 60;  // trough search window after the trigger
};

struct CrashWindow {
  Date peak_date;     // highest close in the lookback window
  Date trough_date;   // lowest close in the lookahead window
  Date trigger_date;  // first energy spike above the threshold
};

// Finds the first date whose energy exceeds median + spike_k * MAD, then
// anchors the crash at the highest close within lookback_days before the
// trigger and the lowest close within lookahead_days after it (earliest
// date wins ties). Throws NoCrashDetected when no spike exists and
// NotACrash when prices do not fall across the window. The energy and
// price series must share their date axis exactly.
CrashWindow detect_crash(const EnergySeries& energy, const PriceSeries& prices,
                         const CrashConfig& cfg = {});

struct PeriodPartition {
  DateWindow pre;
  DateWindow crash;
  DateWindow post;
};

// pre = [peak - span_days, peak - 1], crash = [peak, trough],
// post = [trough + 1, trough + span_days]. Contiguous by construction.
PeriodPartition partition_periods(const CrashWindow& crash, int span_days = 105);

// CSV matrix: rows = dates (or sample index when undated), columns = bin
// centers.
std::string spectrum_to_csv(const HilbertSpectrum& spec,
                            io::FloatFormat fmt = io::FloatFormat::kSig6);

// Two columns: date,energy.
std::string energy_to_csv(const EnergySeries& energy,
                          io::FloatFormat fmt = io::FloatFormat::kSig6);

// JSON with the trigger/peak/trough dates and the three period windows.
std::string crash_report_json(const CrashWindow& crash,
                              const PeriodPartition& periods);

}  // namespace crashnet
