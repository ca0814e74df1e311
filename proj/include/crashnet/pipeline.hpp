#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "crashnet/costats.hpp"
#include "crashnet/hspec.hpp"
#include "crashnet/ingest.hpp"
#include "crashnet/netbuild.hpp"
#include "crashnet/netmetrics.hpp"

namespace crashnet {

// Detection flow shared by the library, the CLI, and the tests: decompose
// the log of the closes, build the spectrum without trend modes, trim the
// boundary transient of the energy, and run the spike detector. After each
// hit the scan resumes on the data past the trough, so one series can
// yield several candidate windows.
struct DetectConfig {
  size_t bins = 64;
  size_t edge_trim_days = 10;
  // Modes slower than this count as trend and are excluded from the
  // detection energy; multi-year swings otherwise drown the crash burst.
  double max_trend_period_days = 365.0;
  size_t max_windows = SIZE_MAX;
  CrashConfig crash;
};

struct DetectionResult {
  std::vector<CrashWindow> windows;  // disjoint, ascending; never empty
  EnergySeries energy;               // untrimmed, full axis
  size_t trend_modes_dropped = 0;
};

// Throws NoCrashDetected (or NotACrash) only when not a single window was
// found.
DetectionResult detect_crash_flow(const PriceSeries& prices,
                                  const DetectConfig& cfg = {});

struct RunConfig {
  std::string input_path;
  CsvLayout layout = CsvLayout::kWide;
  std::optional<DateWindow> panel_window;    // default: intersection of series
  std::vector<DateWindow> explicit_crashes;  // peak..trough overrides
  bool auto_detect = true;                   // exactly one mode active
  std::string reference_symbol;              // default: largest mean close
  ReturnKind return_kind = ReturnKind::kLog;
  double shrinkage_lambda = 1e-6;
  double percentile = 75.0;
  int span_days = 105;
  std::string output_dir = "crashnet-out";
  bool full_precision = false;
  int fill_max_gap = 5;  // negative: drop incomplete assets instead
  DetectConfig detect;
  bool drop_isolated = false;
  bool signed_threshold = false;

  // Throws ConfigError on contradictory or out-of-range settings.
  void validate() const;
};

struct PeriodResult {
  std::string period;  // pre | crash | post
  DateWindow window;
  double mean_pcorr = 0.0;
  double lambda_used = 0.0;
  MetricsReport metrics;
};

struct CrashResult {
  std::string crash_id;
  CrashWindow window;
  PeriodPartition partition;
  double theta = 0.0;  // pooled percentile threshold for this crash
  std::vector<PeriodResult> periods;
};

// An auto-detected window the pipeline could not analyze (typically a
// boundary or end-of-series hit whose periods have too little data).
struct SkippedWindow {
  CrashWindow window;
  std::string reason;
};

struct RunReport {
  std::string reference_symbol;
  AlignReport align;
  std::vector<CrashResult> crashes;
  std::vector<SkippedWindow> skipped;  // auto mode only
  std::vector<std::string> artifacts;  // every file written, in write order
};

// Full pipeline: load, align, find crash windows (auto or explicit),
// partition, and per crash and period emit pcorr.csv, network.dot,
// network.graphml, and metrics.json under <out>/<crash_id>/<period>/, plus
// summary.json and summary.csv under <out>/. In auto mode a window whose
// analysis fails (e.g. a period with too few rows) is recorded under
// skipped instead of aborting the run; explicit windows always propagate
// errors. Errors carry the failing stage in the message.
RunReport run_pipeline(const RunConfig& cfg);

// Summary serializations (also written by run_pipeline).
std::string summary_to_json(const RunReport& report);
std::string summary_to_csv(const RunReport& report,
                           io::FloatFormat fmt = io::FloatFormat::kSig6);

}  // namespace crashnet
