#pragma once

#include <cstddef>
#include <optional>
#include <string>

#include "crashnet/netbuild.hpp"

namespace crashnet {

struct PathLengthSummary {
  std::optional<double> value;    // empty when no pair is reachable
  double reachable_pair_fraction = 0.0;
  size_t reachable_pairs = 0;
};

struct MetricsReport {
  double degree_density = 0.0;
  double avg_clustering = 0.0;
  std::optional<double> avg_path_length;
  double reachable_pair_fraction = 0.0;
  size_t n_nodes = 0;
  size_t n_edges = 0;
  size_t n_components = 0;
};

// Number of direct neighbors. The node is addressed by symbol; unknown
// symbols are an error.
size_t degree_centrality(const ThresholdNetwork& net, const std::string& node);

// 2E / (N(N-1)); requires at least 2 nodes.
double degree_density(const ThresholdNetwork& net);

// Mean over unordered reachable pairs of BFS shortest-path lengths, plus
// the fraction of pairs that are reachable at all. value is empty when the
// graph has no edges. Requires at least 2 nodes.
PathLengthSummary average_path_length(const ThresholdNetwork& net);

// 2u / (v(v-1)) with v the degree and u the edge count among neighbors;
// 0 when the degree is below 2.
double clustering_coefficient(const ThresholdNetwork& net, const std::string& node);

// Mean clustering over all nodes, isolated ones included as 0. Requires a
// non-empty graph.
double average_clustering(const ThresholdNetwork& net);

// Every metric in one pass, plus node/edge/component counts.
MetricsReport metrics_report(const ThresholdNetwork& net);

std::string metrics_to_json(const MetricsReport& report);

}  // namespace crashnet
