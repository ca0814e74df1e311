#include "crashnet/ingest.hpp"

#include <algorithm>
#include <map>
#include <set>
#include <sstream>

#include <json.hpp>

#include "crashnet/errors.hpp"

namespace crashnet {

namespace {

using DateMap = std::map<Date, double>;

void check_series(const PriceSeries& s) {
  if (s.dates.size() != s.closes.size()) {
    throw DataError("series " + s.symbol + ": dates and closes differ in length");
  }
  for (size_t i = 0; i < s.dates.size(); ++i) {
    if (i > 0 && !(s.dates[i - 1] < s.dates[i])) {
      throw DataError("series " + s.symbol + ": dates not strictly increasing at " +
                      s.dates[i].to_string());
    }
    if (!(s.closes[i] > 0.0)) {
      throw DataError("series " + s.symbol + ": non-positive close on " +
                      s.dates[i].to_string());
    }
  }
}

double parse_close(const std::string& field, size_t line_no,
                   const std::string& symbol, const Date& date) {
  double v = 0.0;
  if (!io::parse_double(field, v)) {
    throw DataError("line " + std::to_string(line_no) + ": unparsable close '" +
                    field + "' for " + symbol);
  }
  if (v <= 0.0) {
    throw DataError("non-positive close for " + symbol + " on " +
                    date.to_string() + " (line " + std::to_string(line_no) + ")");
  }
  return v;
}

Date parse_row_date(const std::string& field, size_t line_no) {
  auto d = Date::try_parse(field);
  if (!d) {
    throw DataError("line " + std::to_string(line_no) + ": unparsable date '" +
                    field + "'");
  }
  return *d;
}

std::vector<PriceSeries> finish_series(std::map<std::string, DateMap>& by_symbol) {
  std::vector<PriceSeries> out;
  out.reserve(by_symbol.size());
  for (auto& [symbol, obs] : by_symbol) {
    PriceSeries s;
    s.symbol = symbol;
    s.dates.reserve(obs.size());
    s.closes.reserve(obs.size());
    for (const auto& [date, close] : obs) {
      s.dates.push_back(date);
      s.closes.push_back(close);
    }
    out.push_back(std::move(s));
  }
  return out;
}

}  // namespace

std::vector<double> PricePanel::column(size_t n) const {
  std::vector<double> col(dates.size());
  for (size_t t = 0; t < dates.size(); ++t) col[t] = at(t, n);
  return col;
}

std::optional<size_t> PricePanel::symbol_index(std::string_view symbol) const {
  for (size_t n = 0; n < symbols.size(); ++n) {
    if (symbols[n] == symbol) return n;
  }
  return std::nullopt;
}

std::vector<PriceSeries> load_price_csv(const std::string& path, CsvLayout layout) {
  auto lines = io::split_lines(io::read_file(path));
  if (lines.empty()) throw DataError(path + ": empty file");

  auto header = io::split_csv_line(lines[0]);
  std::map<std::string, DateMap> by_symbol;

  if (layout == CsvLayout::kLong) {
    if (header != std::vector<std::string>{"date", "symbol", "close"}) {
      throw DataError(path + ": long layout requires header 'date,symbol,close'");
    }
    for (size_t i = 1; i < lines.size(); ++i) {
      if (lines[i].empty()) continue;
      auto fields = io::split_csv_line(lines[i]);
      if (fields.size() != 3) {
        throw DataError(path + " line " + std::to_string(i + 1) +
                        ": expected 3 fields, got " + std::to_string(fields.size()));
      }
      Date date = parse_row_date(fields[0], i + 1);
      const std::string& symbol = fields[1];
      if (symbol.empty()) {
        throw DataError(path + " line " + std::to_string(i + 1) + ": empty symbol");
      }
      double close = parse_close(fields[2], i + 1, symbol, date);
      auto [it, inserted] = by_symbol[symbol].emplace(date, close);
      if (!inserted) {
        throw DataError(path + ": duplicate observation for " + symbol + " on " +
                        date.to_string());
      }
    }
  } else {
    if (header.size() < 2 || header[0] != "date") {
      throw DataError(path + ": wide layout requires header 'date,<sym1>,<sym2>,...'");
    }
    std::vector<std::string> symbols(header.begin() + 1, header.end());
    std::set<std::string> seen;
    for (const auto& s : symbols) {
      if (s.empty()) throw DataError(path + ": empty symbol in header");
      if (!seen.insert(s).second) {
        throw DataError(path + ": duplicate symbol '" + s + "' in header");
      }
    }
    for (size_t i = 1; i < lines.size(); ++i) {
      if (lines[i].empty()) continue;
      auto fields = io::split_csv_line(lines[i]);
      if (fields.size() != header.size()) {
        throw DataError(path + " line " + std::to_string(i + 1) + ": expected " +
                        std::to_string(header.size()) + " fields, got " +
                        std::to_string(fields.size()));
      }
      Date date = parse_row_date(fields[0], i + 1);
      for (size_t c = 0; c < symbols.size(); ++c) {
        const std::string& cell = fields[c + 1];
        if (cell.empty()) continue;  // missing observation
        double close = parse_close(cell, i + 1, symbols[c], date);
        auto [it, inserted] = by_symbol[symbols[c]].emplace(date, close);
        if (!inserted) {
          throw DataError(path + ": duplicate observation for " + symbols[c] +
                          " on " + date.to_string());
        }
      }
    }
  }
  return finish_series(by_symbol);
}

PricePanel align_panel(const std::vector<PriceSeries>& series,
                       const DateWindow& window, const MissingPolicy& policy,
                       AlignReport* report) {
  if (series.size() < 2) {
    throw DataError("align_panel needs at least 2 series, got " +
                    std::to_string(series.size()));
  }
  if (policy.kind == MissingPolicyKind::kForwardFill && policy.max_gap < 1) {
    throw ConfigError("forward_fill requires max_gap >= 1");
  }

  AlignReport rep;
  rep.requested = window;

  std::set<std::string> names;
  for (const auto& s : series) {
    check_series(s);
    if (!names.insert(s.symbol).second) {
      throw DataError("align_panel: duplicate series for symbol " + s.symbol);
    }
  }

  // Per-asset observations inside the window, forward-filled first if asked.
  std::map<std::string, DateMap> obs;
  for (const auto& s : series) {
    DateMap m;
    for (size_t i = 0; i < s.dates.size(); ++i) {
      if (window.contains(s.dates[i])) m.emplace(s.dates[i], s.closes[i]);
      if (policy.kind == MissingPolicyKind::kForwardFill && i + 1 < s.dates.size()) {
        int gap = s.dates[i].days_until(s.dates[i + 1]) - 1;
        if (gap >= 1 && gap <= policy.max_gap) {
          for (int k = 1; k <= gap; ++k) {
            Date filled = s.dates[i] + k;
            if (window.contains(filled)) {
              m.emplace(filled, s.closes[i]);
              ++rep.filled_cells;
            }
          }
        }
      }
    }
    obs.emplace(s.symbol, std::move(m));
  }

  // Drop assets, most missing cells first, until every survivor covers the
  // union of surviving dates.
  while (true) {
    std::set<Date> axis;
    for (const auto& [symbol, m] : obs) {
      for (const auto& [date, close] : m) axis.insert(date);
    }
    if (axis.empty()) {
      throw DataError("align_panel: no observations inside window " +
                      window.start.to_string() + ".." + window.end.to_string());
    }

    std::string worst;
    size_t worst_missing = 0;
    for (const auto& [symbol, m] : obs) {
      size_t missing = axis.size() - m.size();
      if (missing > worst_missing ||
          (missing == worst_missing && missing > 0 && symbol > worst)) {
        worst = symbol;
        worst_missing = missing;
      }
    }

    if (worst_missing == 0) {
      if (axis.size() < 3) {
        throw DataError("align_panel: axis has " + std::to_string(axis.size()) +
                        " dates; need at least 3");
      }
      PricePanel panel;
      panel.dates.assign(axis.begin(), axis.end());
      for (const auto& [symbol, m] : obs) panel.symbols.push_back(symbol);
      panel.values.resize(panel.dates.size() * panel.symbols.size());
      size_t n = 0;
      for (const auto& [symbol, m] : obs) {
        size_t t = 0;
        for (const auto& [date, close] : m) panel.at(t++, n) = close;
        ++n;
      }
      rep.retained = panel.symbols;
      if (report) *report = std::move(rep);
      return panel;
    }

    rep.dropped.push_back({worst, "missing " + std::to_string(worst_missing) +
                                      " of " + std::to_string(axis.size()) +
                                      " dates in window"});
    obs.erase(worst);
    if (obs.size() < 2) {
      throw DataError("align_panel: fewer than 2 assets survive alignment "
                      "(last drop: " + worst + ")");
    }
  }
}

PricePanel slice_period(const PricePanel& panel, const DateWindow& window) {
  PricePanel out;
  out.symbols = panel.symbols;
  for (size_t t = 0; t < panel.num_dates(); ++t) {
    if (window.contains(panel.dates[t])) {
      out.dates.push_back(panel.dates[t]);
      for (size_t n = 0; n < panel.num_assets(); ++n) {
        out.values.push_back(panel.at(t, n));
      }
    }
  }
  if (out.dates.empty()) {
    throw DataError("slice " + window.start.to_string() + ".." +
                    window.end.to_string() + " is empty; panel covers " +
                    panel.dates.front().to_string() + ".." +
                    panel.dates.back().to_string());
  }
  if (out.dates.size() < 3) {
    throw DataError("slice " + window.start.to_string() + ".." +
                    window.end.to_string() + " has only " +
                    std::to_string(out.dates.size()) + " dates; need at least 3");
  }
  return out;
}

std::string panel_to_csv(const PricePanel& panel, io::FloatFormat fmt) {
  std::ostringstream ss;
  ss << "date";
  for (const auto& s : panel.symbols) ss << ',' << s;
  ss << '\n';
  for (size_t t = 0; t < panel.num_dates(); ++t) {
    ss << panel.dates[t].to_string();
    for (size_t n = 0; n < panel.num_assets(); ++n) {
      ss << ',' << io::format_double(panel.at(t, n), fmt);
    }
    ss << '\n';
  }
  return ss.str();
}

void write_panel_csv(const PricePanel& panel, const std::string& path,
                     io::FloatFormat fmt) {
  io::write_file(path, panel_to_csv(panel, fmt));
}

std::string align_report_json(const AlignReport& report) {
  nlohmann::json j;
  j["window"] = {{"start", report.requested.start.to_string()},
                 {"end", report.requested.end.to_string()}};
  j["retained"] = report.retained;
  j["dropped"] = nlohmann::json::array();
  for (const auto& d : report.dropped) {
    j["dropped"].push_back({{"symbol", d.symbol}, {"reason", d.reason}});
  }
  j["filled_cells"] = report.filled_cells;
  return j.dump(2) + "\n";
}

}  // namespace crashnet
