// crashnet command line tool. Every pipeline stage is its own subcommand
// reading and writing the library's file formats, plus `run` for the whole
// flow and `config dump` for provenance.

#include <CLI11.hpp>

#include <algorithm>
#include <cstdlib>
#include <iostream>
#include <limits>
#include <memory>
#include <sstream>
#include <string>
#include <vector>

#include "crashnet/costats.hpp"
#include "crashnet/date.hpp"
#include "crashnet/emd.hpp"
#include "crashnet/errors.hpp"
#include "crashnet/hspec.hpp"
#include "crashnet/ingest.hpp"
#include "crashnet/io.hpp"
#include "crashnet/netbuild.hpp"
#include "crashnet/netmetrics.hpp"
#include "crashnet/pipeline.hpp"
#include "crashnet/synth.hpp"

namespace {

using namespace crashnet;

// Empty path means stdout.
void emit(const std::string& path, const std::string& text) {
  if (path.empty()) {
    std::cout << text;
    return;
  }
  io::write_file(path, text);
}

std::string trimmed(const std::string& s) {
  auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

CsvLayout parse_layout(const std::string& s) {
  if (s == "wide") return CsvLayout::kWide;
  if (s == "long") return CsvLayout::kLong;
  throw ConfigError("layout must be wide or long, got '" + s + "'");
}

ReturnKind parse_returns(const std::string& s) {
  if (s == "log") return ReturnKind::kLog;
  if (s == "simple") return ReturnKind::kSimple;
  throw ConfigError("returns must be log or simple, got '" + s + "'");
}

// Reads one numeric series out of a CSV. Accepts a bare value column, a
// t/date + value pair, or any headered layout with --column naming the
// value column. Dates or sample indices in the first column are ignored;
// decomposition only needs the values.
std::vector<double> load_series(const std::string& path,
                                const std::string& column) {
  auto lines = io::split_lines(io::read_file(path));
  if (lines.empty()) throw DataError(path + ": empty input");

  auto header = io::split_csv_line(lines[0]);
  size_t ncols = header.size();
  double probe = 0.0;
  bool has_header = false;
  for (const auto& f : header) {
    if (!io::parse_double(f, probe)) has_header = true;
  }

  size_t col = 0;
  if (!column.empty()) {
    if (!has_header) throw DataError(path + ": --column needs a header row");
    auto it = std::find(header.begin(), header.end(), column);
    if (it == header.end()) {
      throw DataError(path + ": no column named '" + column + "'");
    }
    col = size_t(it - header.begin());
  } else if (ncols == 1) {
    col = 0;
  } else if (ncols == 2) {
    col = 1;  // t,value or date,value
  } else {
    throw DataError(path + ": input has " + std::to_string(ncols) +
                    " columns; pick one with --column");
  }

  std::vector<double> values;
  for (size_t i = has_header ? 1 : 0; i < lines.size(); ++i) {
    if (lines[i].empty()) continue;
    auto fields = io::split_csv_line(lines[i]);
    if (fields.size() != ncols) {
      throw DataError(path + ": row " + std::to_string(i + 1) + " has " +
                      std::to_string(fields.size()) + " fields, expected " +
                      std::to_string(ncols));
    }
    double v = 0.0;
    if (!io::parse_double(fields[col], v)) {
      throw DataError(path + ": bad number '" + fields[col] + "' in row " +
                      std::to_string(i + 1));
    }
    values.push_back(v);
  }
  return values;
}

// Largest common date range of the loaded series.
DateWindow intersection_window(const std::vector<PriceSeries>& series) {
  bool any = false;
  DateWindow w;
  for (const auto& s : series) {
    if (s.dates.empty()) continue;
    if (!any) {
      w = {s.dates.front(), s.dates.back()};
      any = true;
      continue;
    }
    w.start = std::max(w.start, s.dates.front());
    w.end = std::min(w.end, s.dates.back());
  }
  if (!any) throw DataError("no observations in the input");
  if (w.end < w.start) {
    throw DataError("the input series share no common dates");
  }
  return w;
}

// Series with the largest mean close, the detection default.
const PriceSeries& pick_reference(const std::vector<PriceSeries>& series,
                                  const std::string& symbol) {
  if (!symbol.empty()) {
    for (const auto& s : series) {
      if (s.symbol == symbol) return s;
    }
    throw ConfigError("reference symbol '" + symbol + "' not in the input");
  }
  const PriceSeries* best = nullptr;
  double best_mean = -1.0;
  for (const auto& s : series) {
    if (s.closes.empty()) continue;
    double mean = 0.0;
    for (double c : s.closes) mean += c;
    mean /= double(s.closes.size());
    if (mean > best_mean) {
      best_mean = mean;
      best = &s;
    }
  }
  if (!best) throw DataError("no observations in the input");
  return *best;
}

io::FloatFormat pick_format(bool full) {
  return full ? io::FloatFormat::kFull : io::FloatFormat::kSig6;
}

// ---------------------------------------------------------------------------
// run configuration file: `key = value` per line, '#' comments, empty value
// keeps the current setting. Keys match `crashnet config dump` output.

void apply_config_key(RunConfig& cfg, const std::string& key,
                      const std::string& value, const std::string& where) {
  auto bad = [&](const std::string& what) {
    return ConfigError(where + ": " + what + " for key '" + key + "': '" +
                       value + "'");
  };
  auto as_double = [&] {
    double v = 0.0;
    if (!io::parse_double(value, v)) throw bad("expected a number");
    return v;
  };
  auto as_int = [&] {
    double v = as_double();
    if (v != double(long(v))) throw bad("expected an integer");
    return int(v);
  };
  auto as_bool = [&] {
    if (value == "true" || value == "1") return true;
    if (value == "false" || value == "0") return false;
    throw bad("expected true or false");
  };

  if (key == "input") {
    cfg.input_path = value;
  } else if (key == "layout") {
    cfg.layout = parse_layout(value);
  } else if (key == "window") {
    cfg.panel_window = parse_window(value);
  } else if (key == "crash") {
    cfg.explicit_crashes.push_back(parse_window(value));
  } else if (key == "auto") {
    cfg.auto_detect = as_bool();
  } else if (key == "reference") {
    cfg.reference_symbol = value;
  } else if (key == "returns") {
    cfg.return_kind = parse_returns(value);
  } else if (key == "lambda") {
    cfg.shrinkage_lambda = as_double();
  } else if (key == "percentile") {
    cfg.percentile = as_double();
  } else if (key == "span_days") {
    cfg.span_days = as_int();
  } else if (key == "output_dir") {
    cfg.output_dir = value;
  } else if (key == "full_precision") {
    cfg.full_precision = as_bool();
  } else if (key == "fill_max_gap") {
    cfg.fill_max_gap = as_int();
  } else if (key == "bins") {
    cfg.detect.bins = size_t(as_int());
  } else if (key == "edge_trim_days") {
    cfg.detect.edge_trim_days = size_t(as_int());
  } else if (key == "max_trend_period_days") {
    cfg.detect.max_trend_period_days = as_double();
  } else if (key == "max_windows") {
    int n = as_int();  // 0 means no limit
    cfg.detect.max_windows = n == 0 ? SIZE_MAX : size_t(n);
  } else if (key == "spike_k") {
    cfg.detect.crash.spike_k = as_double();
  } else if (key == "lookback_days") {
    cfg.detect.crash.lookback_days = as_int();
  } else if (key == "lookahead_days") {
    cfg.detect.crash.lookahead_days = as_int();
  } else if (key == "drop_isolated") {
    cfg.drop_isolated = as_bool();
  } else if (key == "signed_threshold") {
    cfg.signed_threshold = as_bool();
  } else {
    throw ConfigError(where + ": unknown key '" + key + "'");
  }
}

void apply_config_file(RunConfig& cfg, const std::string& path) {
  auto lines = io::split_lines(io::read_file(path));
  for (size_t i = 0; i < lines.size(); ++i) {
    std::string line = lines[i];
    auto hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    line = trimmed(line);
    if (line.empty()) continue;
    std::string where = path + ":" + std::to_string(i + 1);
    auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw ConfigError(where + ": expected key = value");
    }
    std::string key = trimmed(line.substr(0, eq));
    std::string value = trimmed(line.substr(eq + 1));
    if (key.empty()) throw ConfigError(where + ": missing key");
    if (value.empty()) continue;
    apply_config_key(cfg, key, value, where);
  }
}

std::string default_config_text() {
  RunConfig d;
  auto fmt = [](double v) {
    return io::format_double(v, io::FloatFormat::kFull);
  };
  auto onoff = [](bool b) { return b ? "true" : "false"; };
  std::ostringstream ss;
  ss << "# crashnet run configuration, one `key = value` per line.\n"
     << "# '#' starts a comment; an empty value keeps the built-in default;\n"
     << "# command line flags override everything here.\n"
     << "input = " << d.input_path << "\n"
     << "layout = " << (d.layout == CsvLayout::kWide ? "wide" : "long") << "\n"
     << "# window = 2019-01-01:2019-12-31 "
        "(panel date range; default: intersection of the input series)\n"
     << "# crash = 2019-06-01:2019-07-15 "
        "(repeatable; explicit crash windows replace auto detection)\n"
     << "auto = " << onoff(d.auto_detect) << "\n"
     << "reference = " << d.reference_symbol << "\n"
     << "returns = " << (d.return_kind == ReturnKind::kLog ? "log" : "simple")
     << "\n"
     << "lambda = " << fmt(d.shrinkage_lambda) << "\n"
     << "percentile = " << fmt(d.percentile) << "\n"
     << "span_days = " << d.span_days << "\n"
     << "output_dir = " << d.output_dir << "\n"
     << "full_precision = " << onoff(d.full_precision) << "\n"
     << "fill_max_gap = " << d.fill_max_gap << "\n"
     << "bins = " << d.detect.bins << "\n"
     << "edge_trim_days = " << d.detect.edge_trim_days << "\n"
     << "max_trend_period_days = " << fmt(d.detect.max_trend_period_days)
     << "\n"
     << "max_windows = "
     << (d.detect.max_windows == SIZE_MAX ? 0 : d.detect.max_windows)
     << "  # 0 means no limit\n"
     << "spike_k = " << fmt(d.detect.crash.spike_k) << "\n"
     << "lookback_days = " << d.detect.crash.lookback_days << "\n"
     << "lookahead_days = " << d.detect.crash.lookahead_days << "\n"
     << "drop_isolated = " << onoff(d.drop_isolated) << "\n"
     << "signed_threshold = " << onoff(d.signed_threshold) << "\n";
  return ss.str();
}

// ---------------------------------------------------------------------------
// subcommands

void setup_decompose(CLI::App& app) {
  struct Opts {
    std::string input, output, column;
    SiftConfig sift;
  };
  auto o = std::make_shared<Opts>();
  auto* cmd = app.add_subcommand(
      "decompose", "Empirical mode decomposition of one series");
  cmd->add_option("-i,--input", o->input,
                  "series CSV: a value column, t/date + value, or any "
                  "headered layout with --column")
      ->required();
  cmd->add_option("-o,--output", o->output,
                  "IMF dump CSV (t,imf_1..imf_k,residual); default stdout");
  cmd->add_option("--column", o->column, "value column to decompose");
  cmd->add_option("--sd-threshold", o->sift.sd_threshold,
                  "Cauchy sifting stop")
      ->capture_default_str();
  cmd->add_option("--max-sift-iters", o->sift.max_sift_iters,
                  "sifting iteration cap per mode")
      ->capture_default_str();
  cmd->add_option("--max-imfs", o->sift.max_imfs, "mode count cap")
      ->capture_default_str();
  cmd->add_option("--envelope-tol", o->sift.envelope_tol,
                  "relative mean-envelope smallness for mode acceptance")
      ->capture_default_str();
  cmd->callback([o] {
    auto set = decompose(load_series(o->input, o->column), o->sift);
    emit(o->output, imfset_to_csv(set));
  });
}

void setup_spectrum(CLI::App& app) {
  struct Opts {
    std::string input, output, energy;
    size_t bins = 64;
    size_t drop_slowest = 0;
    double max_trend = 365.0;
    bool full = false;
  };
  auto o = std::make_shared<Opts>();
  auto* cmd = app.add_subcommand(
      "spectrum", "Hilbert spectrum and instantaneous energy of an IMF dump");
  cmd->add_option("-i,--input", o->input, "IMF dump CSV from decompose")
      ->required();
  cmd->add_option("-o,--output", o->output,
                  "spectrum CSV (rows = samples, cols = bin centers); "
                  "default stdout");
  cmd->add_option("--energy", o->energy, "also write the energy CSV here");
  cmd->add_option("--bins", o->bins, "frequency bin count")
      ->capture_default_str();
  auto* drop = cmd->add_option("--drop-slowest", o->drop_slowest,
                               "exclude this many of the slowest modes")
                   ->capture_default_str();
  cmd->add_option("--max-trend-period", o->max_trend,
                  "instead drop modes slower than this period in days")
      ->excludes(drop);
  cmd->add_flag("--full-precision", o->full, "full float precision");
  cmd->callback([o, cmd] {
    auto set = imfset_from_csv(io::read_file(o->input));
    size_t drop_n = o->drop_slowest;
    if (cmd->count("--max-trend-period")) {
      drop_n = trend_mode_count(set, o->max_trend);
    }
    auto spec = hilbert_spectrum(set, o->bins, drop_n);
    auto fmt = pick_format(o->full);
    emit(o->output, spectrum_to_csv(spec, fmt));
    if (!o->energy.empty()) {
      io::write_file(o->energy, energy_to_csv(instantaneous_energy(spec), fmt));
    }
  });
}

void setup_detect(CLI::App& app) {
  struct Opts {
    std::string input, output, energy, layout = "wide", symbol;
    DetectConfig detect;
    int span_days = 105;
    bool full = false;
  };
  auto o = std::make_shared<Opts>();
  auto* cmd = app.add_subcommand(
      "detect", "Find the first crash window in a price series");
  cmd->add_option("-i,--input", o->input, "price CSV")->required();
  cmd->add_option("--layout", o->layout, "CSV layout")
      ->check(CLI::IsMember({"wide", "long"}))
      ->capture_default_str();
  cmd->add_option("--symbol", o->symbol,
                  "series to analyze (default: largest mean close)");
  cmd->add_option("-o,--output", o->output,
                  "crash report JSON; default stdout");
  cmd->add_option("--energy", o->energy,
                  "also write the detection energy CSV here");
  cmd->add_option("--bins", o->detect.bins, "frequency bin count")
      ->capture_default_str();
  cmd->add_option("--edge-trim", o->detect.edge_trim_days,
                  "days trimmed from each end of the energy")
      ->capture_default_str();
  cmd->add_option("--max-trend-period", o->detect.max_trend_period_days,
                  "modes slower than this period in days are trend")
      ->capture_default_str();
  cmd->add_option("--spike-k", o->detect.crash.spike_k,
                  "trigger threshold: median + k * MAD")
      ->capture_default_str();
  cmd->add_option("--lookback", o->detect.crash.lookback_days,
                  "peak search days before the trigger")
      ->capture_default_str();
  cmd->add_option("--lookahead", o->detect.crash.lookahead_days,
                  "trough search days after the trigger")
      ->capture_default_str();
  cmd->add_option("--span-days", o->span_days,
                  "pre/post period length in the report")
      ->capture_default_str();
  cmd->add_flag("--full-precision", o->full, "full float precision");
  cmd->callback([o] {
    auto series = load_price_csv(o->input, parse_layout(o->layout));
    const auto& ref = pick_reference(series, o->symbol);
    auto result = detect_crash_flow(ref, o->detect);
    const auto& first = result.windows.front();
    emit(o->output,
         crash_report_json(first, partition_periods(first, o->span_days)));
    if (!o->energy.empty()) {
      io::write_file(o->energy,
                     energy_to_csv(result.energy, pick_format(o->full)));
    }
  });
}

void setup_correlate(CLI::App& app) {
  struct Opts {
    std::string input, output, layout = "wide", window, returns = "log";
    double lambda = 1e-6;
    int fill_max_gap = 5;
    bool pearson = false;
    bool full = false;
  };
  auto o = std::make_shared<Opts>();
  auto* cmd = app.add_subcommand(
      "correlate", "Partial correlation matrix of a price panel");
  cmd->add_option("-i,--input", o->input, "price CSV")->required();
  cmd->add_option("--layout", o->layout, "CSV layout")
      ->check(CLI::IsMember({"wide", "long"}))
      ->capture_default_str();
  cmd->add_option("--window", o->window,
                  "date range START:END (default: intersection of series)");
  cmd->add_option("--returns", o->returns, "return kind")
      ->check(CLI::IsMember({"log", "simple"}))
      ->capture_default_str();
  cmd->add_option("--lambda", o->lambda, "correlation shrinkage")
      ->capture_default_str();
  cmd->add_option("--fill-max-gap", o->fill_max_gap,
                  "forward-fill gaps up to this many days; negative drops "
                  "incomplete assets")
      ->capture_default_str();
  cmd->add_flag("--pearson", o->pearson,
                "emit the plain Pearson matrix instead");
  cmd->add_flag("--full-precision", o->full, "full float precision");
  cmd->add_option("-o,--output", o->output,
                  "heatmap CSV (symbol header row and column); default "
                  "stdout");
  cmd->callback([o] {
    auto series = load_price_csv(o->input, parse_layout(o->layout));
    DateWindow window = o->window.empty() ? intersection_window(series)
                                          : parse_window(o->window);
    MissingPolicy policy = o->fill_max_gap < 0
                               ? MissingPolicy::drop_asset()
                               : MissingPolicy::forward_fill(o->fill_max_gap);
    auto panel = align_panel(series, window, policy);
    auto returns = daily_returns(panel, parse_returns(o->returns));
    auto corr = pearson_matrix(returns);
    auto fmt = pick_format(o->full);
    if (o->pearson) {
      emit(o->output, correlation_to_csv(corr, fmt));
    } else {
      emit(o->output,
           correlation_to_csv(partial_corr_matrix(corr, o->lambda), fmt));
    }
  });
}

void setup_network(CLI::App& app) {
  struct Opts {
    std::string input, output, format = "dot";
    double theta = 0.0;
    double percentile = 75.0;
    bool drop_isolated = false;
    bool signed_threshold = false;
  };
  auto o = std::make_shared<Opts>();
  auto* cmd = app.add_subcommand(
      "network", "Threshold network from a correlation heatmap CSV");
  cmd->add_option("-i,--input", o->input, "heatmap CSV from correlate")
      ->required();
  auto* theta = cmd->add_option("--theta", o->theta,
                                "absolute edge threshold in [0, 1]");
  cmd->add_option("--percentile", o->percentile,
                  "threshold at this percentile of |C*| instead")
      ->capture_default_str()
      ->excludes(theta);
  cmd->add_flag("--drop-isolated", o->drop_isolated,
                "remove nodes without edges");
  cmd->add_flag("--signed", o->signed_threshold,
                "threshold the signed value, not |C*|");
  cmd->add_option("--format", o->format, "output format")
      ->check(CLI::IsMember({"dot", "graphml"}))
      ->capture_default_str();
  cmd->add_option("-o,--output", o->output, "network file; default stdout");
  cmd->callback([o, cmd] {
    auto pcorr = correlation_from_csv(io::read_file(o->input));
    double theta_v = cmd->count("--theta")
                         ? o->theta
                         : percentile_threshold(pcorr, o->percentile);
    auto net =
        build_network(pcorr, theta_v, o->drop_isolated, o->signed_threshold);
    emit(o->output, o->format == "dot" ? network_to_dot(net)
                                       : network_to_graphml(net));
  });
}

void setup_metrics(CLI::App& app) {
  struct Opts {
    std::string input, output;
  };
  auto o = std::make_shared<Opts>();
  auto* cmd = app.add_subcommand(
      "metrics", "Topology metrics of a DOT or GraphML network");
  cmd->add_option("-i,--input", o->input, "network file (format sniffed)")
      ->required();
  cmd->add_option("-o,--output", o->output, "metrics JSON; default stdout");
  cmd->callback([o] {
    auto text = io::read_file(o->input);
    auto pos = text.find_first_not_of(" \t\r\n");
    bool xml = pos != std::string::npos && text[pos] == '<';
    auto net = xml ? parse_graphml(text) : parse_dot(text);
    emit(o->output, metrics_to_json(metrics_report(net)));
  });
}

void setup_synth(CLI::App& app) {
  struct Opts {
    RegimeSpec spec;
    std::string output, start_date;
  };
  auto o = std::make_shared<Opts>();
  auto* cmd = app.add_subcommand(
      "synth", "Synthetic three-regime price panel (pre / crash / post)");
  cmd->add_option("-n,--assets", o->spec.n_assets, "asset count")
      ->capture_default_str();
  cmd->add_option("--pre-days", o->spec.pre_days, "pre segment length")
      ->capture_default_str();
  cmd->add_option("--crash-days", o->spec.crash_days, "crash segment length")
      ->capture_default_str();
  cmd->add_option("--post-days", o->spec.post_days, "post segment length")
      ->capture_default_str();
  cmd->add_option("--rho-pre", o->spec.rho_pre, "pre correlation")
      ->capture_default_str();
  cmd->add_option("--rho-crash", o->spec.rho_crash, "crash correlation")
      ->capture_default_str();
  cmd->add_option("--rho-post", o->spec.rho_post, "post correlation")
      ->capture_default_str();
  cmd->add_option("--drift-pre", o->spec.drift_pre, "pre per-day log drift")
      ->capture_default_str();
  cmd->add_option("--drift-post", o->spec.drift_post, "post per-day log drift")
      ->capture_default_str();
  cmd->add_option("--volatility", o->spec.volatility,
                  "per-day return standard deviation")
      ->capture_default_str();
  cmd->add_option("--drawdown", o->spec.drawdown, "total crash loss fraction")
      ->capture_default_str();
  cmd->add_option("--seed", o->spec.seed, "generator seed")
      ->capture_default_str();
  cmd->add_option("--start-date", o->start_date, "first date, YYYY-MM-DD");
  cmd->add_option("-o,--output", o->output,
                  "wide price CSV; default stdout");
  cmd->callback([o] {
    if (!o->start_date.empty()) {
      o->spec.start_date = Date::parse(o->start_date);
    }
    emit(o->output, panel_to_csv(generate_panel(o->spec)));
  });
}

void setup_run(CLI::App& app) {
  struct Opts {
    std::string config, input, layout, window, reference, returns, output_dir;
    std::vector<std::string> crashes;
    double lambda = 0, percentile = 0, max_trend = 0, spike_k = 0;
    int span_days = 0, fill_max_gap = 0, lookback = 0, lookahead = 0;
    size_t bins = 0, edge_trim = 0, max_windows = 0;
    bool auto_detect = false, full = false, drop_isolated = false;
    bool signed_threshold = false;
  };
  auto o = std::make_shared<Opts>();
  auto* cmd = app.add_subcommand(
      "run",
      "Full pipeline: ingest, detect, partition, correlate, network, "
      "metrics, reports");
  cmd->add_option("--config", o->config,
                  "key = value config file; flags override it");
  cmd->add_option("-i,--input", o->input, "price CSV");
  cmd->add_option("--layout", o->layout, "CSV layout: wide or long")
      ->check(CLI::IsMember({"wide", "long"}));
  cmd->add_option("--window", o->window, "panel date range START:END");
  cmd->add_option("--crash", o->crashes,
                  "explicit crash window START:END (repeatable; replaces "
                  "auto detection)");
  cmd->add_flag("--auto", o->auto_detect, "force auto detection");
  cmd->add_option("--reference", o->reference,
                  "detection symbol (default: largest mean close)");
  cmd->add_option("--returns", o->returns, "return kind: log or simple")
      ->check(CLI::IsMember({"log", "simple"}));
  cmd->add_option("--lambda", o->lambda, "correlation shrinkage");
  cmd->add_option("--percentile", o->percentile,
                  "edge threshold percentile of pooled |C*|");
  cmd->add_option("--span-days", o->span_days, "pre/post period length");
  cmd->add_option("--output-dir", o->output_dir,
                  "artifact directory (env CRASHNET_OUT overrides the "
                  "default)");
  cmd->add_flag("--full-precision", o->full, "full float precision");
  cmd->add_option("--fill-max-gap", o->fill_max_gap,
                  "forward-fill gaps up to this many days; negative drops "
                  "incomplete assets");
  cmd->add_option("--bins", o->bins, "frequency bin count");
  cmd->add_option("--edge-trim", o->edge_trim,
                  "days trimmed from each end of the energy");
  cmd->add_option("--max-trend-period", o->max_trend,
                  "modes slower than this period in days are trend");
  cmd->add_option("--max-windows", o->max_windows,
                  "stop after this many detected windows (0: no limit)");
  cmd->add_option("--spike-k", o->spike_k,
                  "trigger threshold: median + k * MAD");
  cmd->add_option("--lookback", o->lookback,
                  "peak search days before the trigger");
  cmd->add_option("--lookahead", o->lookahead,
                  "trough search days after the trigger");
  cmd->add_flag("--drop-isolated", o->drop_isolated,
                "remove nodes without edges");
  cmd->add_flag("--signed", o->signed_threshold,
                "threshold the signed value, not |C*|");
  cmd->callback([o, cmd] {
    RunConfig cfg;
    if (cmd->count("--config")) apply_config_file(cfg, o->config);
    if (const char* env = std::getenv("CRASHNET_OUT")) {
      if (*env) cfg.output_dir = env;
    }
    if (cmd->count("--input")) cfg.input_path = o->input;
    if (cmd->count("--layout")) cfg.layout = parse_layout(o->layout);
    if (cmd->count("--window")) cfg.panel_window = parse_window(o->window);
    if (cmd->count("--crash")) {
      cfg.explicit_crashes.clear();
      for (const auto& w : o->crashes) {
        cfg.explicit_crashes.push_back(parse_window(w));
      }
    }
    if (cmd->count("--reference")) cfg.reference_symbol = o->reference;
    if (cmd->count("--returns")) cfg.return_kind = parse_returns(o->returns);
    if (cmd->count("--lambda")) cfg.shrinkage_lambda = o->lambda;
    if (cmd->count("--percentile")) cfg.percentile = o->percentile;
    if (cmd->count("--span-days")) cfg.span_days = o->span_days;
    if (cmd->count("--output-dir")) cfg.output_dir = o->output_dir;
    if (cmd->count("--full-precision")) cfg.full_precision = true;
    if (cmd->count("--fill-max-gap")) cfg.fill_max_gap = o->fill_max_gap;
    if (cmd->count("--bins")) cfg.detect.bins = o->bins;
    if (cmd->count("--edge-trim")) cfg.detect.edge_trim_days = o->edge_trim;
    if (cmd->count("--max-trend-period")) {
      cfg.detect.max_trend_period_days = o->max_trend;
    }
    if (cmd->count("--max-windows")) {
      cfg.detect.max_windows = o->max_windows == 0 ? SIZE_MAX : o->max_windows;
    }
    if (cmd->count("--spike-k")) cfg.detect.crash.spike_k = o->spike_k;
    if (cmd->count("--lookback")) cfg.detect.crash.lookback_days = o->lookback;
    if (cmd->count("--lookahead")) {
      cfg.detect.crash.lookahead_days = o->lookahead;
    }
    if (cmd->count("--drop-isolated")) cfg.drop_isolated = true;
    if (cmd->count("--signed")) cfg.signed_threshold = true;

    // Explicit windows switch off auto detection unless --auto insists,
    // in which case validation reports the contradiction.
    if (cmd->count("--auto")) {
      cfg.auto_detect = true;
    } else if (!cfg.explicit_crashes.empty()) {
      cfg.auto_detect = false;
    }

    auto report = run_pipeline(cfg);
    std::cout << "reference: " << report.reference_symbol << "\n";
    for (const auto& c : report.crashes) {
      std::cout << c.crash_id << ": peak " << c.window.peak_date.to_string()
                << " trough " << c.window.trough_date.to_string() << " theta "
                << io::format_double(c.theta, io::FloatFormat::kSig6) << "\n";
    }
    for (const auto& s : report.skipped) {
      std::cout << "skipped " << s.window.peak_date.to_string() << " .. "
                << s.window.trough_date.to_string() << ": " << s.reason
                << "\n";
    }
    std::cout << report.artifacts.size() << " artifacts under "
              << cfg.output_dir << "\n";
  });
}

void setup_config(CLI::App& app) {
  auto* cmd = app.add_subcommand("config", "Configuration helpers");
  cmd->require_subcommand(1);
  auto* dump = cmd->add_subcommand(
      "dump", "Print the default run configuration as a config file");
  dump->callback([] { std::cout << default_config_text(); });
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{
      "Crash detection and correlation-network analysis for daily price "
      "panels",
      "crashnet"};
  app.require_subcommand(1);
  app.set_version_flag("--version", "crashnet 0.1.0");

  setup_decompose(app);
  setup_spectrum(app);
  setup_detect(app);
  setup_correlate(app);
  setup_network(app);
  setup_metrics(app);
  setup_synth(app);
  setup_run(app);
  setup_config(app);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? 0 : 2;
  } catch (const ConfigError& e) {
    std::cerr << "crashnet: " << e.what() << "\n";
    return 2;
  } catch (const DataError& e) {
    std::cerr << "crashnet: " << e.what() << "\n";
    return 3;
  } catch (const NumericError& e) {
    std::cerr << "crashnet: " << e.what() << "\n";
    return 4;
  } catch (const std::exception& e) {
    std::cerr << "crashnet: unexpected error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
