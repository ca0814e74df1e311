#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "crashnet/costats.hpp"
#include "crashnet/io.hpp"

namespace crashnet {

// Undirected threshold graph over the asset set. Nodes are kept in sorted
// symbol order; weight holds the partial correlation behind each edge (0
// where there is no edge).
struct ThresholdNetwork {
  std::vector<std::string> nodes;
  std::vector<uint8_t> adjacency;  // row-major N x N, 0/1, false diagonal
  std::vector<double> weight;      // row-major N x N, C* where adjacent
  double theta = 0.0;
  bool isolated_retained = true;
  std::vector<std::string> dropped_nodes;  // removed by drop_isolated

  size_t size() const { return nodes.size(); }
  bool edge(size_t m, size_t n) const { return adjacency[m * nodes.size() + n] != 0; }
  double weight_at(size_t m, size_t n) const { return weight[m * nodes.size() + n]; }
  size_t num_edges() const;
  size_t degree(size_t m) const;
};

// Nearest-rank percentile of an arbitrary multiset: rank =
// ceil(pct/100 * count) into the ascending sort. pct = 100 gives the
// maximum. pct must lie in (0, 100]; the multiset must be non-empty.
double nearest_rank_percentile(std::vector<double> values, double pct);

// Nearest-rank percentile of {|C*_pq| : p < q}.
double percentile_threshold(const PartialCorrelationMatrix& pcorr,
                            double pct = 75.0);

// Edge (m,n) present iff |C*_mn| >= theta (m != n); with signed_threshold
// the comparison uses the signed value instead. Isolated nodes are retained
// unless drop_isolated, in which case they are removed and recorded in
// dropped_nodes. theta must lie in [0, 1].
ThresholdNetwork build_network(const PartialCorrelationMatrix& pcorr,
                               double theta, bool drop_isolated = false,
                               bool signed_threshold = false);

// DOT / GraphML renderings: node id = symbol, edge attribute = the partial
// correlation, theta and the isolated-node flag carried as graph attributes.
// Both use the full round-trip float format by default so a parse restores
// the exact network.
std::string network_to_dot(const ThresholdNetwork& net,
                           io::FloatFormat fmt = io::FloatFormat::kFull);
std::string network_to_graphml(const ThresholdNetwork& net,
                               io::FloatFormat fmt = io::FloatFormat::kFull);

// Parsers for the dialect the exporters above write (not general-purpose
// readers). Throw DataError on malformed input.
ThresholdNetwork parse_dot(const std::string& text);
ThresholdNetwork parse_graphml(const std::string& text);

}  // namespace crashnet
