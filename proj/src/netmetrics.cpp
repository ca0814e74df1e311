#include "crashnet/netmetrics.hpp"

#include <queue>
#include <vector>

#include <json.hpp>

#include "crashnet/errors.hpp"

namespace crashnet {

namespace {

size_t node_index(const ThresholdNetwork& net, const std::string& node) {
  for (size_t i = 0; i < net.size(); ++i) {
    if (net.nodes[i] == node) return i;
  }
  throw DataError("netmetrics: unknown node " + node);
}

// BFS distances from src; unreachable nodes stay SIZE_MAX.
std::vector<size_t> bfs_distances(const ThresholdNetwork& net, size_t src) {
  std::vector<size_t> dist(net.size(), SIZE_MAX);
  std::queue<size_t> frontier;
  dist[src] = 0;
  frontier.push(src);
  while (!frontier.empty()) {
    size_t cur = frontier.front();
    frontier.pop();
    for (size_t next = 0; next < net.size(); ++next) {
      if (net.edge(cur, next) && dist[next] == SIZE_MAX) {
        dist[next] = dist[cur] + 1;
        frontier.push(next);
      }
    }
  }
  return dist;
}

double clustering_at(const ThresholdNetwork& net, size_t j) {
  std::vector<size_t> neighbors;
  for (size_t q = 0; q < net.size(); ++q) {
    if (net.edge(j, q)) neighbors.push_back(q);
  }
  size_t v = neighbors.size();
  if (v < 2) return 0.0;
  size_t u = 0;
  for (size_t a = 0; a < v; ++a) {
    for (size_t b = a + 1; b < v; ++b) {
      if (net.edge(neighbors[a], neighbors[b])) ++u;
    }
  }
  return 2.0 * double(u) / (double(v) * double(v - 1));
}

}  // namespace

size_t degree_centrality(const ThresholdNetwork& net, const std::string& node) {
  return net.degree(node_index(net, node));
}

double degree_density(const ThresholdNetwork& net) {
  size_t n = net.size();
  if (n < 2) {
    throw DataError("degree_density: need at least 2 nodes");
  }
  return 2.0 * double(net.num_edges()) / (double(n) * double(n - 1));
}

PathLengthSummary average_path_length(const ThresholdNetwork& net) {
  size_t n = net.size();
  if (n < 2) {
    throw DataError("average_path_length: need at least 2 nodes");
  }
  size_t reachable = 0;
  size_t total_pairs = n * (n - 1) / 2;
  double sum = 0.0;
  for (size_t src = 0; src < n; ++src) {
    auto dist = bfs_distances(net, src);
    for (size_t dst = src + 1; dst < n; ++dst) {
      if (dist[dst] != SIZE_MAX) {
        ++reachable;
        sum += double(dist[dst]);
      }
    }
  }
  PathLengthSummary out;
  out.reachable_pairs = reachable;
  out.reachable_pair_fraction = double(reachable) / double(total_pairs);
  if (reachable > 0) out.value = sum / double(reachable);
  return out;
}

double clustering_coefficient(const ThresholdNetwork& net, const std::string& node) {
  return clustering_at(net, node_index(net, node));
}

double average_clustering(const ThresholdNetwork& net) {
  size_t n = net.size();
  if (n == 0) {
    throw DataError("average_clustering: empty graph");
  }
  double sum = 0.0;
  for (size_t j = 0; j < n; ++j) sum += clustering_at(net, j);
  return sum / double(n);
}

MetricsReport metrics_report(const ThresholdNetwork& net) {
  MetricsReport report;
  report.n_nodes = net.size();
  report.n_edges = net.num_edges();
  report.degree_density = degree_density(net);
  report.avg_clustering = average_clustering(net);
  auto paths = average_path_length(net);
  report.avg_path_length = paths.value;
  report.reachable_pair_fraction = paths.reachable_pair_fraction;

  std::vector<char> seen(net.size(), 0);
  for (size_t src = 0; src < net.size(); ++src) {
    if (seen[src]) continue;
    ++report.n_components;
    auto dist = bfs_distances(net, src);
    for (size_t i = 0; i < net.size(); ++i) {
      if (dist[i] != SIZE_MAX) seen[i] = 1;
    }
  }
  return report;
}

std::string metrics_to_json(const MetricsReport& report) {
  nlohmann::ordered_json j;
  j["n_nodes"] = report.n_nodes;
  j["n_edges"] = report.n_edges;
  j["n_components"] = report.n_components;
  j["degree_density"] = report.degree_density;
  j["avg_clustering"] = report.avg_clustering;
  if (report.avg_path_length) {
    j["avg_path_length"] = *report.avg_path_length;
  } else {
    j["avg_path_length"] = nullptr;
  }
  j["reachable_pair_fraction"] = report.reachable_pair_fraction;
  return j.dump(2) + "\n";
}

}  // namespace crashnet
