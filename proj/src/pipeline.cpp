#include "crashnet/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <sstream>
#include <utility>

#include <json.hpp>

#include "crashnet/emd.hpp"
#include "crashnet/errors.hpp"

namespace crashnet {

namespace {

// Rethrows stage failures with the stage name prefixed, preserving the
// error category (and so the exit code).
template <typename F>
auto stage(const char* name, F&& body) {
  try {
    return body();
  } catch (const ConfigError& e) {
    throw ConfigError(std::string(name) + ": " + e.what());
  } catch (const DataError& e) {
    throw DataError(std::string(name) + ": " + e.what());
  } catch (const NumericError& e) {
    throw NumericError(std::string(name) + ": " + e.what());
  }
}

// 6-significant-digit rounding for report values, unless full precision is
// requested; keeps JSON and CSV artifacts byte-deterministic and aligned.
double rounded(double v, io::FloatFormat fmt) {
  if (fmt == io::FloatFormat::kFull) return v;
  double out = 0.0;
  io::parse_double(io::format_double(v, fmt), out);
  return out;
}

}  // namespace

DetectionResult detect_crash_flow(const PriceSeries& prices,
                                  const DetectConfig& cfg) {
  size_t n = prices.closes.size();
  if (n < 2 * cfg.edge_trim_days + 8) {
    throw DataError("detect: series too short (" + std::to_string(n) +
                    " samples) for edge trim " +
                    std::to_string(cfg.edge_trim_days));
  }
  std::vector<double> logp(n);
  for (size_t t = 0; t < n; ++t) {
    if (!(prices.closes[t] > 0.0)) {
      throw DataError("detect: non-positive close in " + prices.symbol);
    }
    logp[t] = std::log(prices.closes[t]);
  }

  DetectionResult result;
  auto set = decompose(logp);
  if (set.imfs.empty()) {
    // nothing oscillates (constant series): zero energy, so the detector
    // reports no crash rather than failing on an empty spectrum
    result.energy.dates = prices.dates;
    result.energy.energy.assign(n, 0.0);
  } else {
    result.trend_modes_dropped =
        trend_mode_count(set, cfg.max_trend_period_days);
    auto spec = hilbert_spectrum(set, cfg.bins, result.trend_modes_dropped,
                                 prices.dates);
    result.energy = instantaneous_energy(spec);
  }

  size_t trim = cfg.edge_trim_days;
  EnergySeries energy;
  energy.dates.assign(result.energy.dates.begin() + trim,
                      result.energy.dates.end() - trim);
  energy.energy.assign(result.energy.energy.begin() + trim,
                       result.energy.energy.end() - trim);
  PriceSeries trimmed;
  trimmed.symbol = prices.symbol;
  trimmed.dates.assign(prices.dates.begin() + trim, prices.dates.end() - trim);
  trimmed.closes.assign(prices.closes.begin() + trim,
                        prices.closes.end() - trim);

  // Scan left to right, restarting past each detected trough; the threshold
  // is re-derived from the remaining data each time. A spike in a rising
  // market (NotACrash) skips ahead one lookahead span instead of aborting.
  std::string first_failure;
  bool first_was_nocrash = true;
  size_t m = energy.energy.size();
  size_t cursor = 0;
  while (cursor + 8 < m && result.windows.size() < cfg.max_windows) {
    EnergySeries es;
    es.dates.assign(energy.dates.begin() + cursor, energy.dates.end());
    es.energy.assign(energy.energy.begin() + cursor, energy.energy.end());
    PriceSeries ps;
    ps.symbol = trimmed.symbol;
    ps.dates.assign(trimmed.dates.begin() + cursor, trimmed.dates.end());
    ps.closes.assign(trimmed.closes.begin() + cursor, trimmed.closes.end());
    try {
      CrashWindow w = detect_crash(es, ps, cfg.crash);
      size_t next = cursor;
      while (next < m && !(w.trough_date < energy.dates[next])) ++next;
      cursor = std::max(next, cursor + 1);
      result.windows.push_back(std::move(w));
    } catch (const NoCrashDetected& e) {
      if (first_failure.empty()) first_failure = e.what();
      break;
    } catch (const NotACrash& e) {
      if (first_failure.empty()) {
        first_failure = e.what();
        first_was_nocrash = false;
      }
      cursor += size_t(std::max(cfg.crash.lookahead_days, 1));
    }
  }
  if (result.windows.empty()) {
    if (first_failure.empty()) {
      throw NoCrashDetected("no spike above the detection threshold");
    }
    if (first_was_nocrash) throw NoCrashDetected(first_failure);
    throw NotACrash(first_failure);
  }
  return result;
}

void RunConfig::validate() const {
  if (input_path.empty()) {
    throw ConfigError("config: input path is required");
  }
  if (output_dir.empty()) {
    throw ConfigError("config: output directory is required");
  }
  if (auto_detect && !explicit_crashes.empty()) {
    throw ConfigError(
        "config: explicit crash windows and auto-detect are mutually exclusive");
  }
  if (!auto_detect && explicit_crashes.empty()) {
    throw ConfigError(
        "config: either auto-detect or explicit crash windows must be active");
  }
  for (size_t i = 0; i < explicit_crashes.size(); ++i) {
    const auto& w = explicit_crashes[i];
    if (w.end < w.start) {
      throw ConfigError("config: crash window ends before it starts (" +
                        w.start.to_string() + ".." + w.end.to_string() + ")");
    }
    if (i > 0 && !(explicit_crashes[i - 1].end < w.start)) {
      throw ConfigError(
          "config: explicit crash windows must be disjoint and ascending");
    }
  }
  if (detect.max_windows < 1) {
    throw ConfigError("config: max_windows must be at least 1");
  }
  if (!(percentile > 0.0 && percentile <= 100.0)) {
    throw ConfigError("config: percentile must be in (0, 100]");
  }
  if (!(shrinkage_lambda >= 0.0 && shrinkage_lambda <= 0.1)) {
    throw ConfigError("config: lambda must be in [0, 0.1]");
  }
  if (span_days < 1) {
    throw ConfigError("config: span_days must be at least 1");
  }
  if (detect.bins < 2) {
    throw ConfigError("config: spectrum bins must be at least 2");
  }
  if (!(detect.crash.spike_k > 0.0)) {
    throw ConfigError("config: spike_k must be positive");
  }
  if (detect.crash.lookback_days < 1 || detect.crash.lookahead_days < 1) {
    throw ConfigError("config: lookback and lookahead must be at least 1 day");
  }
}

namespace {

PriceSeries extract_series(const PricePanel& panel, size_t index) {
  PriceSeries s;
  s.symbol = panel.symbols[index];
  s.dates = panel.dates;
  s.closes = panel.column(index);
  return s;
}

std::string pick_reference(const PricePanel& panel) {
  size_t best = 0;
  double best_mean = -1.0;
  for (size_t a = 0; a < panel.num_assets(); ++a) {
    double sum = 0.0;
    for (size_t t = 0; t < panel.num_dates(); ++t) sum += panel.at(t, a);
    double mean = sum / double(panel.num_dates());
    if (mean > best_mean) {
      best_mean = mean;
      best = a;
    }
  }
  return panel.symbols[best];
}

DateWindow intersection_window(const std::vector<PriceSeries>& series) {
  if (series.empty()) {
    throw DataError("align: no series in input");
  }
  Date start = series[0].dates.front();
  Date end = series[0].dates.back();
  for (const auto& s : series) {
    if (s.dates.empty()) continue;
    start = std::max(start, s.dates.front());
    end = std::min(end, s.dates.back());
  }
  if (end < start) {
    throw DataError("align: input series have no common date range");
  }
  return {start, end};
}

DateWindow clip_window(const DateWindow& w, const PricePanel& panel,
                       const std::string& period) {
  Date start = std::max(w.start, panel.dates.front());
  Date end = std::min(w.end, panel.dates.back());
  if (end < start) {
    throw DataError("partition: " + period +
                    " period lies outside the loaded panel (" +
                    w.start.to_string() + ".." + w.end.to_string() + ")");
  }
  return {start, end};
}

}  // namespace

RunReport run_pipeline(const RunConfig& cfg) {
  cfg.validate();  // messages already carry the config: prefix

  io::FloatFormat fmt =
      cfg.full_precision ? io::FloatFormat::kFull : io::FloatFormat::kSig6;

  RunReport report;
  PricePanel panel;
  stage("ingest", [&] {
    auto series = load_price_csv(cfg.input_path, cfg.layout);
    DateWindow window =
        cfg.panel_window ? *cfg.panel_window : intersection_window(series);
    MissingPolicy policy = cfg.fill_max_gap < 0
                               ? MissingPolicy::drop_asset()
                               : MissingPolicy::forward_fill(cfg.fill_max_gap);
    panel = align_panel(series, window, policy, &report.align);
    return 0;
  });

  stage("reference", [&] {
    report.reference_symbol = cfg.reference_symbol.empty()
                                  ? pick_reference(panel)
                                  : cfg.reference_symbol;
    if (!panel.symbol_index(report.reference_symbol)) {
      throw DataError("reference symbol " + report.reference_symbol +
                      " is not in the aligned panel");
    }
    return 0;
  });

  std::vector<CrashWindow> windows;
  if (cfg.auto_detect) {
    stage("detect", [&] {
      auto ref =
          extract_series(panel, *panel.symbol_index(report.reference_symbol));
      windows = detect_crash_flow(ref, cfg.detect).windows;
      return 0;
    });
  } else {
    for (const auto& w : cfg.explicit_crashes) {
      CrashWindow cw;
      cw.peak_date = w.start;
      cw.trough_date = w.end;
      cw.trigger_date = w.start;
      windows.push_back(cw);
    }
  }

  namespace fs = std::filesystem;
  for (const auto& win : windows) {
    CrashResult crash;
    // relative path -> body, buffered so a skipped window writes nothing
    std::vector<std::pair<std::string, std::string>> files;
    try {
      crash.crash_id = "crash-" + win.peak_date.to_string();
      crash.window = win;
      crash.partition = partition_periods(win, cfg.span_days);

      struct PeriodInput {
        std::string name;
        DateWindow window;
        PartialCorrelationMatrix pcorr;
      };
      std::vector<PeriodInput> inputs;
      stage("correlate", [&] {
        for (auto& [name, window] :
             {std::pair<std::string, DateWindow>{"pre", crash.partition.pre},
              {"crash", crash.partition.crash},
              {"post", crash.partition.post}}) {
          auto clipped = clip_window(window, panel, name);
          auto slice = slice_period(panel, clipped);
          auto returns = daily_returns(slice, cfg.return_kind);
          auto pcorr = partial_corr_matrix(pearson_matrix(returns),
                                           cfg.shrinkage_lambda);
          inputs.push_back({name, clipped, std::move(pcorr)});
        }
        return 0;
      });

      stage("network", [&] {
        // one threshold per crash, pooled over the three periods, so period
        // densities are comparable
        std::vector<double> pooled;
        for (const auto& in : inputs) {
          size_t n = in.pcorr.size();
          for (size_t p = 0; p < n; ++p) {
            for (size_t q = p + 1; q < n; ++q) {
              pooled.push_back(std::fabs(in.pcorr.at(p, q)));
            }
          }
        }
        crash.theta =
            nearest_rank_percentile(std::move(pooled), cfg.percentile);

        for (const auto& in : inputs) {
          auto net = build_network(in.pcorr, crash.theta, cfg.drop_isolated,
                                   cfg.signed_threshold);
          PeriodResult period;
          period.period = in.name;
          period.window = in.window;
          period.mean_pcorr = rounded(mean_offdiagonal(in.pcorr), fmt);
          period.lambda_used = in.pcorr.shrinkage_lambda;
          period.metrics = metrics_report(net);
          period.metrics.degree_density =
              rounded(period.metrics.degree_density, fmt);
          period.metrics.avg_clustering =
              rounded(period.metrics.avg_clustering, fmt);
          if (period.metrics.avg_path_length) {
            period.metrics.avg_path_length =
                rounded(*period.metrics.avg_path_length, fmt);
          }
          period.metrics.reachable_pair_fraction =
              rounded(period.metrics.reachable_pair_fraction, fmt);

          fs::path dir = fs::path(crash.crash_id) / in.name;
          files.emplace_back((dir / "pcorr.csv").string(),
                             correlation_to_csv(in.pcorr, fmt));
          files.emplace_back((dir / "network.dot").string(),
                             network_to_dot(net, fmt));
          files.emplace_back((dir / "network.graphml").string(),
                             network_to_graphml(net, fmt));
          files.emplace_back((dir / "metrics.json").string(),
                             metrics_to_json(period.metrics));
          crash.periods.push_back(std::move(period));
        }
        return 0;
      });
      files.emplace_back(
          (fs::path(crash.crash_id) / "crash.json").string(),
          crash_report_json(win, crash.partition));
    } catch (const Error& e) {
      if (!cfg.auto_detect) throw;
      report.skipped.push_back({win, e.what()});
      continue;
    }

    stage("report", [&] {
      for (const auto& [rel, body] : files) {
        std::string path = (fs::path(cfg.output_dir) / rel).string();
        io::write_file(path, body);
        report.artifacts.push_back(path);
      }
      return 0;
    });
    report.crashes.push_back(std::move(crash));
  }

  if (cfg.auto_detect && report.crashes.empty()) {
    throw DataError(
        "detect: every detected window was skipped (first reason: " +
        report.skipped.front().reason + ")");
  }

  stage("report", [&] {
    std::string jpath = (fs::path(cfg.output_dir) / "summary.json").string();
    io::write_file(jpath, summary_to_json(report));
    report.artifacts.push_back(jpath);
    std::string cpath = (fs::path(cfg.output_dir) / "summary.csv").string();
    io::write_file(cpath, summary_to_csv(report, fmt));
    report.artifacts.push_back(cpath);
    return 0;
  });
  return report;
}

std::string summary_to_json(const RunReport& report) {
  nlohmann::ordered_json doc;
  doc["reference_symbol"] = report.reference_symbol;
  doc["crashes"] = nlohmann::ordered_json::array();
  for (const auto& crash : report.crashes) {
    nlohmann::ordered_json c;
    c["crash_id"] = crash.crash_id;
    c["trigger_date"] = crash.window.trigger_date.to_string();
    c["peak_date"] = crash.window.peak_date.to_string();
    c["trough_date"] = crash.window.trough_date.to_string();
    c["theta"] = crash.theta;
    c["periods"] = nlohmann::ordered_json::array();
    for (const auto& p : crash.periods) {
      nlohmann::ordered_json row;
      row["period"] = p.period;
      row["start"] = p.window.start.to_string();
      row["end"] = p.window.end.to_string();
      row["mean_pcorr"] = p.mean_pcorr;
      row["lambda_used"] = p.lambda_used;
      row["n_nodes"] = p.metrics.n_nodes;
      row["n_edges"] = p.metrics.n_edges;
      row["n_components"] = p.metrics.n_components;
      row["degree_density"] = p.metrics.degree_density;
      row["avg_clustering"] = p.metrics.avg_clustering;
      if (p.metrics.avg_path_length) {
        row["avg_path_length"] = *p.metrics.avg_path_length;
      } else {
        row["avg_path_length"] = nullptr;
      }
      row["reachable_pair_fraction"] = p.metrics.reachable_pair_fraction;
      c["periods"].push_back(std::move(row));
    }
    doc["crashes"].push_back(std::move(c));
  }
  doc["skipped"] = nlohmann::ordered_json::array();
  for (const auto& s : report.skipped) {
    nlohmann::ordered_json row;
    row["peak_date"] = s.window.peak_date.to_string();
    row["trough_date"] = s.window.trough_date.to_string();
    row["reason"] = s.reason;
    doc["skipped"].push_back(std::move(row));
  }
  return doc.dump(2) + "\n";
}

std::string summary_to_csv(const RunReport& report, io::FloatFormat fmt) {
  std::ostringstream out;
  out << "crash_id,period,start,end,mean_pcorr,degree_density,avg_clustering,"
         "avg_path_length,reachable_pair_fraction,n_nodes,n_edges,"
         "n_components,theta\n";
  for (const auto& crash : report.crashes) {
    for (const auto& p : crash.periods) {
      out << crash.crash_id << ',' << p.period << ','
          << p.window.start.to_string() << ',' << p.window.end.to_string()
          << ',' << io::format_double(p.mean_pcorr, fmt) << ','
          << io::format_double(p.metrics.degree_density, fmt) << ','
          << io::format_double(p.metrics.avg_clustering, fmt) << ',';
      if (p.metrics.avg_path_length) {
        out << io::format_double(*p.metrics.avg_path_length, fmt);
      }
      out << ',' << io::format_double(p.metrics.reachable_pair_fraction, fmt)
          << ',' << p.metrics.n_nodes << ',' << p.metrics.n_edges << ','
          << p.metrics.n_components << ','
          << io::format_double(crash.theta, fmt) << '\n';
    }
  }
  return out.str();
}

}  // namespace crashnet
