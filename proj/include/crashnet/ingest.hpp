#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "crashnet/date.hpp"
#include "crashnet/io.hpp"

namespace crashnet {

// Daily closing prices for one asset. Dates are strictly increasing and all
// closes are positive and finite.
struct PriceSeries {
  std::string symbol;
  std::vector<Date> dates;
  std::vector<double> closes;
};

// Rectangular price panel: shared date axis, no missing cells.
struct PricePanel {
  std::vector<Date> dates;            // length T, strictly increasing
  std::vector<std::string> symbols;   // length N, sorted, distinct
  std::vector<double> values;         // row-major T x N

  size_t num_dates() const { return dates.size(); }
  size_t num_assets() const { return symbols.size(); }

  double at(size_t t, size_t n) const { return values[t * symbols.size() + n]; }
  double& at(size_t t, size_t n) { return values[t * symbols.size() + n]; }

  std::vector<double> column(size_t n) const;
  std::optional<size_t> symbol_index(std::string_view symbol) const;

  bool operator==(const PricePanel&) const = default;
};

enum class MissingPolicyKind { kDropAsset, kForwardFill };

struct MissingPolicy {
  MissingPolicyKind kind = MissingPolicyKind::kDropAsset;
  int max_gap = 0;  // forward_fill only: longest run of missing days to fill

  static MissingPolicy drop_asset() { return {}; }
  static MissingPolicy forward_fill(int max_gap) {
    return {MissingPolicyKind::kForwardFill, max_gap};
  }
};

struct DroppedAsset {
  std::string symbol;
  std::string reason;
};

// What align_panel did: which assets survived, which were dropped and why,
// and how many cells were forward-filled.
struct AlignReport {
  DateWindow requested;
  std::vector<std::string> retained;
  std::vector<DroppedAsset> dropped;
  size_t filled_cells = 0;
};

enum class CsvLayout { kLong, kWide };

// Loads price data from CSV. Long layout: header `date,symbol,close`, one
// observation per row. Wide layout: header `date,<sym1>,<sym2>,...`; empty
// cells mean no observation for that asset on that date. Returns one series
// per symbol, sorted by symbol, rows sorted by date. Throws DataError on
// malformed input, duplicate (date,symbol) pairs, or non-positive prices.
std::vector<PriceSeries> load_price_csv(const std::string& path, CsvLayout layout);

// Builds a complete panel from possibly ragged series. Observations outside
// the window are ignored (except as forward-fill sources). Under
// forward_fill, gaps of at most max_gap consecutive missing days are filled
// with the prior close before anything is dropped. Assets are then dropped
// greedily, most missing cells first (ties drop the lexicographically
// greatest symbol), until every retained asset covers the union of retained
// dates. Throws DataError when fewer than 2 assets survive or the axis has
// fewer than 3 dates. Fills *report when non-null.
PricePanel align_panel(const std::vector<PriceSeries>& series,
                       const DateWindow& window, const MissingPolicy& policy,
                       AlignReport* report = nullptr);

// Restricts the panel to dates inside the window; symbols unchanged.
// Throws DataError when fewer than 3 dates remain.
PricePanel slice_period(const PricePanel& panel, const DateWindow& window);

// Writes the wide CSV layout understood by load_price_csv. The default full
// precision format makes the round trip bit-exact.
std::string panel_to_csv(const PricePanel& panel,
                         io::FloatFormat fmt = io::FloatFormat::kFull);
void write_panel_csv(const PricePanel& panel, const std::string& path,
                     io::FloatFormat fmt = io::FloatFormat::kFull);

// JSON document describing an alignment run.
std::string align_report_json(const AlignReport& report);

}  // namespace crashnet
