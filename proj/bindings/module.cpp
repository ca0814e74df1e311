// Python bindings: numpy in, numpy out. Structs stay on the C++ side;
// callers see arrays, tuples of arrays, and plain dicts.

#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <algorithm>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "crashnet/costats.hpp"
#include "crashnet/emd.hpp"
#include "crashnet/errors.hpp"
#include "crashnet/hspec.hpp"
#include "crashnet/ingest.hpp"
#include "crashnet/netbuild.hpp"
#include "crashnet/netmetrics.hpp"
#include "crashnet/pipeline.hpp"
#include "crashnet/synth.hpp"

namespace py = pybind11;
using namespace crashnet;

namespace {

using DoubleArray =
    py::array_t<double, py::array::c_style | py::array::forcecast>;
using ByteArray =
    py::array_t<uint8_t, py::array::c_style | py::array::forcecast>;

std::vector<double> to_vector(const DoubleArray& a, const char* what) {
  if (a.ndim() != 1) {
    throw ConfigError(std::string(what) + ": expected a 1-d array");
  }
  return {a.data(), a.data() + a.shape(0)};
}

struct Matrix {
  size_t rows = 0, cols = 0;
  std::vector<double> values;  // row-major
};

Matrix to_matrix(const DoubleArray& a, const char* what) {
  if (a.ndim() != 2) {
    throw ConfigError(std::string(what) + ": expected a 2-d array");
  }
  Matrix m;
  m.rows = size_t(a.shape(0));
  m.cols = size_t(a.shape(1));
  m.values.assign(a.data(), a.data() + m.rows * m.cols);
  return m;
}

py::array_t<double> make_array(const std::vector<double>& v) {
  py::array_t<double> out(py::ssize_t(v.size()));
  std::copy(v.begin(), v.end(), out.mutable_data());
  return out;
}

py::array_t<double> make_matrix(const std::vector<double>& v, size_t rows,
                                size_t cols) {
  py::array_t<double> out({py::ssize_t(rows), py::ssize_t(cols)});
  std::copy(v.begin(), v.end(), out.mutable_data());
  return out;
}

// Zero-padded so lexicographic symbol order matches array order even
// where the library sorts nodes by name.
std::vector<std::string> synthetic_symbols(size_t n) {
  size_t width = std::to_string(n ? n - 1 : 0).size();
  std::vector<std::string> out;
  for (size_t i = 0; i < n; ++i) {
    std::string digits = std::to_string(i);
    out.push_back("a" + std::string(width - digits.size(), '0') + digits);
  }
  return out;
}

ImfSet set_from_matrix(const Matrix& m) {
  ImfSet set;
  set.source_len = m.cols;
  set.residual.assign(m.cols, 0.0);
  for (size_t i = 0; i < m.rows; ++i) {
    Imf imf;
    imf.values.assign(m.values.begin() + py::ssize_t(i * m.cols),
                      m.values.begin() + py::ssize_t((i + 1) * m.cols));
    set.imfs.push_back(std::move(imf));
  }
  return set;
}

ReturnMatrix returns_from_matrix(const Matrix& m) {
  ReturnMatrix rm;
  rm.symbols = synthetic_symbols(m.cols);
  rm.values = m.values;
  for (size_t t = 0; t < m.rows; ++t) {
    rm.dates.push_back(Date(2000, 1, 1) + int(t));
  }
  return rm;
}

PartialCorrelationMatrix pcorr_from_matrix(const Matrix& m) {
  if (m.rows != m.cols) {
    throw ConfigError("correlation matrix must be square");
  }
  PartialCorrelationMatrix pc;
  pc.symbols = synthetic_symbols(m.rows);
  pc.values = m.values;
  return pc;
}

std::vector<Date> parse_dates(const std::vector<std::string>& iso) {
  std::vector<Date> out;
  out.reserve(iso.size());
  for (const auto& s : iso) out.push_back(Date::parse(s));
  return out;
}

py::dict window_dict(const CrashWindow& w) {
  py::dict d;
  d["peak"] = w.peak_date.to_string();
  d["trough"] = w.trough_date.to_string();
  d["trigger"] = w.trigger_date.to_string();
  return d;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() =
      "Crash detection and correlation-network analysis for daily price "
      "panels";
  m.attr("__version__") = "0.1.0";

  auto base = py::register_exception<Error>(m, "Error");
  py::register_exception<ConfigError>(m, "ConfigError", base);
  py::register_exception<DataError>(m, "DataError", base);
  py::register_exception<NumericError>(m, "NumericError", base);

  m.def(
      "decompose",
      [](const DoubleArray& values, double sd_threshold, int max_sift_iters,
         int max_imfs, double envelope_tol) {
        SiftConfig cfg{sd_threshold, max_sift_iters, max_imfs, envelope_tol};
        auto set = decompose(to_vector(values, "values"), cfg);
        size_t t_len = set.source_len;
        std::vector<double> flat(set.imfs.size() * t_len);
        for (size_t i = 0; i < set.imfs.size(); ++i) {
          std::copy(set.imfs[i].values.begin(), set.imfs[i].values.end(),
                    flat.begin() + py::ssize_t(i * t_len));
        }
        return py::make_tuple(make_matrix(flat, set.imfs.size(), t_len),
                              make_array(set.residual));
      },
      py::arg("values"), py::arg("sd_threshold") = 0.2,
      py::arg("max_sift_iters") = 100, py::arg("max_imfs") = 12,
      py::arg("envelope_tol") = 1e-2,
      "Empirical mode decomposition. Returns (imfs, residual) where imfs\n"
      "has one row per mode, highest frequency first, and\n"
      "imfs.sum(axis=0) + residual reconstructs the input.");

  m.def(
      "analytic_signal",
      [](const DoubleArray& values) {
        auto a = analytic_signal(to_vector(values, "values"));
        return py::make_tuple(make_array(a.amplitude), make_array(a.phase),
                              make_array(a.frequency));
      },
      py::arg("values"),
      "Hilbert analytic signal of one mode. Returns (amplitude,\n"
      "unwrapped phase, instantaneous frequency in rad/sample).");

  m.def(
      "hilbert_spectrum",
      [](const DoubleArray& imfs, size_t bins, size_t drop_slowest) {
        auto set = set_from_matrix(to_matrix(imfs, "imfs"));
        auto spec = hilbert_spectrum(set, bins, drop_slowest);
        return py::make_tuple(
            make_matrix(spec.power, spec.num_times(), spec.bins()),
            make_array(spec.freq_edges));
      },
      py::arg("imfs"), py::arg("bins") = 64, py::arg("drop_slowest") = 0,
      "Time-frequency power of a mode matrix (rows = modes). Returns\n"
      "(power[t, b], freq_edges) with bins + 1 uniform edges.");

  m.def(
      "instantaneous_energy",
      [](const DoubleArray& imfs, size_t bins, size_t drop_slowest) {
        auto set = set_from_matrix(to_matrix(imfs, "imfs"));
        auto spec = hilbert_spectrum(set, bins, drop_slowest);
        return make_array(instantaneous_energy(spec).energy);
      },
      py::arg("imfs"), py::arg("bins") = 64, py::arg("drop_slowest") = 0,
      "Per-sample energy: the frequency marginal of the Hilbert spectrum.");

  m.def(
      "detect_crashes",
      [](const std::vector<std::string>& dates, const DoubleArray& closes,
         size_t bins, size_t edge_trim_days, double max_trend_period_days,
         size_t max_windows, double spike_k, int lookback_days,
         int lookahead_days) {
        PriceSeries series;
        series.symbol = "ref";
        series.dates = parse_dates(dates);
        series.closes = to_vector(closes, "closes");
        DetectConfig cfg;
        cfg.bins = bins;
        cfg.edge_trim_days = edge_trim_days;
        cfg.max_trend_period_days = max_trend_period_days;
        cfg.max_windows = max_windows == 0 ? SIZE_MAX : max_windows;
        cfg.crash = CrashConfig{spike_k, lookback_days, lookahead_days};
        auto result = detect_crash_flow(series, cfg);
        py::list out;
        for (const auto& w : result.windows) out.append(window_dict(w));
        return out;
      },
      py::arg("dates"), py::arg("closes"), py::arg("bins") = 64,
      py::arg("edge_trim_days") = 10, py::arg("max_trend_period_days") = 365.0,
      py::arg("max_windows") = 0, py::arg("spike_k") = 4.0,
      py::arg("lookback_days") = 60, py::arg("lookahead_days") = 60,
      "Scan one dated close series for crash windows. Returns a list of\n"
      "dicts with peak/trough/trigger ISO dates, earliest first. Raises\n"
      "DataError when no window is found.");

  m.def(
      "daily_returns",
      [](const DoubleArray& closes, const std::string& kind) {
        auto mat = to_matrix(closes, "closes");
        PricePanel panel;
        panel.symbols = synthetic_symbols(mat.cols);
        panel.values = mat.values;
        for (size_t t = 0; t < mat.rows; ++t) {
          panel.dates.push_back(Date(2000, 1, 1) + int(t));
        }
        ReturnKind rk = kind == "log"      ? ReturnKind::kLog
                        : kind == "simple" ? ReturnKind::kSimple
                                           : throw ConfigError(
                                                 "kind must be log or simple");
        auto rm = daily_returns(panel, rk);
        return make_matrix(rm.values, rm.num_days(), rm.num_assets());
      },
      py::arg("closes"), py::arg("kind") = "log",
      "Per-asset daily returns of a close matrix (rows = days). One row\n"
      "fewer than the input.");

  m.def(
      "pearson",
      [](const DoubleArray& returns) {
        auto corr = pearson_matrix(returns_from_matrix(to_matrix(returns,
                                                                 "returns")));
        return make_matrix(corr.values, corr.size(), corr.size());
      },
      py::arg("returns"),
      "Pearson correlation matrix of a return matrix (rows = days).");

  m.def(
      "partial_correlation",
      [](const DoubleArray& returns, double shrinkage_lambda) {
        auto corr = pearson_matrix(returns_from_matrix(to_matrix(returns,
                                                                 "returns")));
        auto pc = partial_corr_matrix(corr, shrinkage_lambda);
        return make_matrix(pc.values, pc.size(), pc.size());
      },
      py::arg("returns"), py::arg("shrinkage_lambda") = 1e-6,
      "Partial correlation matrix of a return matrix via the inverse of\n"
      "the shrunk Pearson matrix.");

  m.def(
      "percentile_threshold",
      [](const DoubleArray& pcorr, double percentile) {
        return percentile_threshold(pcorr_from_matrix(to_matrix(pcorr,
                                                                "pcorr")),
                                    percentile);
      },
      py::arg("pcorr"), py::arg("percentile") = 75.0,
      "Nearest-rank percentile of the off-diagonal magnitudes.");

  m.def(
      "threshold_network",
      [](const DoubleArray& pcorr, double theta, bool signed_threshold) {
        auto net = build_network(pcorr_from_matrix(to_matrix(pcorr, "pcorr")),
                                 theta, false, signed_threshold);
        size_t n = net.size();
        py::array_t<uint8_t> out({py::ssize_t(n), py::ssize_t(n)});
        std::copy(net.adjacency.begin(), net.adjacency.end(),
                  out.mutable_data());
        return out;
      },
      py::arg("pcorr"), py::arg("theta"), py::arg("signed_threshold") = false,
      "0/1 adjacency matrix with an edge where |C*| >= theta (or the\n"
      "signed value with signed_threshold). Row order matches the input.");

  m.def(
      "network_metrics",
      [](const ByteArray& adjacency) {
        if (adjacency.ndim() != 2 || adjacency.shape(0) != adjacency.shape(1)) {
          throw ConfigError("adjacency must be a square 2-d array");
        }
        size_t n = size_t(adjacency.shape(0));
        ThresholdNetwork net;
        net.nodes = synthetic_symbols(n);
        net.adjacency.assign(adjacency.data(), adjacency.data() + n * n);
        net.weight.assign(n * n, 0.0);
        for (auto& v : net.adjacency) v = v ? 1 : 0;
        for (size_t i = 0; i < n; ++i) {
          if (net.adjacency[i * n + i]) {
            throw DataError("adjacency has a self-loop at node " +
                            std::to_string(i));
          }
          for (size_t j = i + 1; j < n; ++j) {
            if (net.adjacency[i * n + j] != net.adjacency[j * n + i]) {
              throw DataError("adjacency must be symmetric");
            }
          }
        }
        auto r = metrics_report(net);
        py::dict d;
        d["n_nodes"] = r.n_nodes;
        d["n_edges"] = r.n_edges;
        d["n_components"] = r.n_components;
        d["degree_density"] = r.degree_density;
        d["avg_clustering"] = r.avg_clustering;
        if (r.avg_path_length) {
          d["avg_path_length"] = *r.avg_path_length;
        } else {
          d["avg_path_length"] = py::none();
        }
        d["reachable_pair_fraction"] = r.reachable_pair_fraction;
        return d;
      },
      py::arg("adjacency"),
      "Topology metrics of an undirected 0/1 adjacency matrix.\n"
      "avg_path_length is None when the graph has no edges.");

  m.def(
      "generate_panel",
      [](size_t n_assets, size_t pre_days, size_t crash_days, size_t post_days,
         double rho_pre, double rho_crash, double rho_post, double drift_pre,
         double drift_post, double volatility, double drawdown, uint64_t seed,
         const std::string& start_date) {
        RegimeSpec spec;
        spec.n_assets = n_assets;
        spec.pre_days = pre_days;
        spec.crash_days = crash_days;
        spec.post_days = post_days;
        spec.rho_pre = rho_pre;
        spec.rho_crash = rho_crash;
        spec.rho_post = rho_post;
        spec.drift_pre = drift_pre;
        spec.drift_post = drift_post;
        spec.volatility = volatility;
        spec.drawdown = drawdown;
        spec.seed = seed;
        spec.start_date = Date::parse(start_date);
        auto panel = generate_panel(spec);
        std::vector<std::string> dates;
        for (const auto& d : panel.dates) dates.push_back(d.to_string());
        return py::make_tuple(dates, panel.symbols,
                              make_matrix(panel.values, panel.num_dates(),
                                          panel.num_assets()));
      },
      py::arg("n_assets") = 20, py::arg("pre_days") = 250,
      py::arg("crash_days") = 30, py::arg("post_days") = 250,
      py::arg("rho_pre") = 0.15, py::arg("rho_crash") = 0.8,
      py::arg("rho_post") = 0.25, py::arg("drift_pre") = 0.0,
      py::arg("drift_post") = 0.0, py::arg("volatility") = 0.01,
      py::arg("drawdown") = 0.4, py::arg("seed") = 1,
      py::arg("start_date") = "2019-01-01",
      "Synthetic three-regime price panel. Returns (dates, symbols,\n"
      "closes[t, n]); deterministic for a given seed.");

  m.def(
      "run_pipeline",
      [](const std::string& input, const std::string& output_dir,
         const std::vector<std::pair<std::string, std::string>>& crash_windows,
         const std::string& reference, const std::string& layout,
         const std::string& returns, double shrinkage_lambda,
         double percentile, int span_days, bool full_precision,
         int fill_max_gap, size_t bins, size_t edge_trim_days,
         double max_trend_period_days, size_t max_windows, double spike_k,
         int lookback_days, int lookahead_days, bool drop_isolated,
         bool signed_threshold,
         const std::optional<std::pair<std::string, std::string>>& window) {
        RunConfig cfg;
        cfg.input_path = input;
        cfg.output_dir = output_dir;
        for (const auto& [start, end] : crash_windows) {
          cfg.explicit_crashes.push_back(
              {Date::parse(start), Date::parse(end)});
        }
        cfg.auto_detect = cfg.explicit_crashes.empty();
        cfg.reference_symbol = reference;
        cfg.layout = layout == "wide"   ? CsvLayout::kWide
                     : layout == "long" ? CsvLayout::kLong
                                        : throw ConfigError(
                                              "layout must be wide or long");
        cfg.return_kind = returns == "log"      ? ReturnKind::kLog
                          : returns == "simple" ? ReturnKind::kSimple
                                                : throw ConfigError(
                                                      "returns must be log "
                                                      "or simple");
        cfg.shrinkage_lambda = shrinkage_lambda;
        cfg.percentile = percentile;
        cfg.span_days = span_days;
        cfg.full_precision = full_precision;
        cfg.fill_max_gap = fill_max_gap;
        cfg.detect.bins = bins;
        cfg.detect.edge_trim_days = edge_trim_days;
        cfg.detect.max_trend_period_days = max_trend_period_days;
        cfg.detect.max_windows = max_windows == 0 ? SIZE_MAX : max_windows;
        cfg.detect.crash = CrashConfig{spike_k, lookback_days, lookahead_days};
        cfg.drop_isolated = drop_isolated;
        cfg.signed_threshold = signed_threshold;
        if (window) {
          cfg.panel_window = {Date::parse(window->first),
                              Date::parse(window->second)};
        }
        auto report = run_pipeline(cfg);
        return py::module_::import("json").attr("loads")(
            summary_to_json(report));
      },
      py::arg("input"), py::arg("output_dir") = "crashnet-out",
      py::arg("crash_windows") =
          std::vector<std::pair<std::string, std::string>>{},
      py::arg("reference") = "", py::arg("layout") = "wide",
      py::arg("returns") = "log", py::arg("shrinkage_lambda") = 1e-6,
      py::arg("percentile") = 75.0, py::arg("span_days") = 105,
      py::arg("full_precision") = false, py::arg("fill_max_gap") = 5,
      py::arg("bins") = 64, py::arg("edge_trim_days") = 10,
      py::arg("max_trend_period_days") = 365.0, py::arg("max_windows") = 0,
      py::arg("spike_k") = 4.0, py::arg("lookback_days") = 60,
      py::arg("lookahead_days") = 60, py::arg("drop_isolated") = false,
      py::arg("signed_threshold") = false, py::arg("window") = py::none(),
      "Full pipeline on a price CSV: detect (or take explicit\n"
      "crash_windows as (start, end) ISO pairs), partition, correlate,\n"
      "build networks, emit artifacts under output_dir. Returns the\n"
      "summary document as a dict.");
}
