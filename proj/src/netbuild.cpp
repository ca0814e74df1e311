#include "crashnet/netbuild.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include "crashnet/errors.hpp"

namespace crashnet {

size_t ThresholdNetwork::num_edges() const {
  size_t n = nodes.size();
  size_t count = 0;
  for (size_t p = 0; p < n; ++p) {
    for (size_t q = p + 1; q < n; ++q) {
      if (edge(p, q)) ++count;
    }
  }
  return count;
}

size_t ThresholdNetwork::degree(size_t m) const {
  size_t n = nodes.size();
  size_t count = 0;
  for (size_t q = 0; q < n; ++q) {
    if (edge(m, q)) ++count;
  }
  return count;
}

double nearest_rank_percentile(std::vector<double> values, double pct) {
  if (values.empty()) {
    throw DataError("nearest_rank_percentile: empty multiset");
  }
  if (!(pct > 0.0 && pct <= 100.0)) {
    throw ConfigError("nearest_rank_percentile: pct must be in (0, 100], got " +
                      std::to_string(pct));
  }
  std::sort(values.begin(), values.end());
  size_t rank = size_t(std::ceil(pct / 100.0 * double(values.size())));
  if (rank < 1) rank = 1;
  if (rank > values.size()) rank = values.size();
  return values[rank - 1];
}

double percentile_threshold(const PartialCorrelationMatrix& pcorr, double pct) {
  size_t n = pcorr.size();
  if (n < 2) {
    throw DataError("percentile_threshold: need at least 2 assets");
  }
  std::vector<double> mags;
  mags.reserve(n * (n - 1) / 2);
  for (size_t p = 0; p < n; ++p) {
    for (size_t q = p + 1; q < n; ++q) {
      mags.push_back(std::fabs(pcorr.at(p, q)));
    }
  }
  return nearest_rank_percentile(std::move(mags), pct);
}

ThresholdNetwork build_network(const PartialCorrelationMatrix& pcorr,
                               double theta, bool drop_isolated,
                               bool signed_threshold) {
  if (!(theta >= 0.0 && theta <= 1.0)) {
    throw ConfigError("build_network: theta must be in [0, 1], got " +
                      std::to_string(theta));
  }
  size_t n = pcorr.size();

  std::vector<size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](size_t a, size_t b) {
    return pcorr.symbols[a] < pcorr.symbols[b];
  });

  ThresholdNetwork net;
  net.theta = theta;
  net.isolated_retained = !drop_isolated;
  for (size_t i = 0; i < n; ++i) net.nodes.push_back(pcorr.symbols[order[i]]);
  net.adjacency.assign(n * n, 0);
  net.weight.assign(n * n, 0.0);
  for (size_t p = 0; p < n; ++p) {
    for (size_t q = p + 1; q < n; ++q) {
      double v = pcorr.at(order[p], order[q]);
      bool pass = signed_threshold ? v >= theta : std::fabs(v) >= theta;
      if (!pass) continue;
      net.adjacency[p * n + q] = 1;
      net.adjacency[q * n + p] = 1;
      net.weight[p * n + q] = v;
      net.weight[q * n + p] = v;
    }
  }

  if (drop_isolated) {
    std::vector<size_t> kept;
    for (size_t p = 0; p < n; ++p) {
      if (net.degree(p) > 0) {
        kept.push_back(p);
      } else {
        net.dropped_nodes.push_back(net.nodes[p]);
      }
    }
    if (kept.size() < n) {
      ThresholdNetwork pruned;
      pruned.theta = theta;
      pruned.isolated_retained = false;
      pruned.dropped_nodes = std::move(net.dropped_nodes);
      size_t m = kept.size();
      for (size_t i = 0; i < m; ++i) pruned.nodes.push_back(net.nodes[kept[i]]);
      pruned.adjacency.assign(m * m, 0);
      pruned.weight.assign(m * m, 0.0);
      for (size_t p = 0; p < m; ++p) {
        for (size_t q = 0; q < m; ++q) {
          pruned.adjacency[p * m + q] = net.adjacency[kept[p] * n + kept[q]];
          pruned.weight[p * m + q] = net.weight[kept[p] * n + kept[q]];
        }
      }
      return pruned;
    }
  }
  return net;
}

namespace {

std::string xml_escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      case '\'': out += "&apos;"; break;
      default: out += c;
    }
  }
  return out;
}

std::string xml_unescape(const std::string& s) {
  std::string out;
  for (size_t i = 0; i < s.size();) {
    if (s[i] != '&') {
      out += s[i++];
      continue;
    }
    size_t end = s.find(';', i);
    if (end == std::string::npos) throw DataError("graphml: bad entity");
    std::string ent = s.substr(i, end - i + 1);
    if (ent == "&amp;") out += '&';
    else if (ent == "&lt;") out += '<';
    else if (ent == "&gt;") out += '>';
    else if (ent == "&quot;") out += '"';
    else if (ent == "&apos;") out += '\'';
    else throw DataError("graphml: unknown entity " + ent);
    i = end + 1;
  }
  return out;
}

}  // namespace

std::string network_to_dot(const ThresholdNetwork& net, io::FloatFormat fmt) {
  std::ostringstream out;
  out << "graph crashnet {\n";
  out << "  graph [theta=" << io::format_double(net.theta, fmt)
      << " isolated_retained=" << (net.isolated_retained ? 1 : 0) << "];\n";
  size_t n = net.size();
  for (size_t p = 0; p < n; ++p) {
    out << "  \"" << net.nodes[p] << "\";\n";
  }
  for (size_t p = 0; p < n; ++p) {
    for (size_t q = p + 1; q < n; ++q) {
      if (!net.edge(p, q)) continue;
      out << "  \"" << net.nodes[p] << "\" -- \"" << net.nodes[q]
          << "\" [pcorr=" << io::format_double(net.weight_at(p, q), fmt)
          << "];\n";
    }
  }
  out << "}\n";
  return out.str();
}

std::string network_to_graphml(const ThresholdNetwork& net, io::FloatFormat fmt) {
  std::ostringstream out;
  out << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
  out << "<graphml xmlns=\"http://graphml.graphdrawing.org/xmlns\">\n";
  out << "  <key id=\"w\" for=\"edge\" attr.name=\"pcorr\" attr.type=\"double\"/>\n";
  out << "  <key id=\"theta\" for=\"graph\" attr.name=\"theta\" attr.type=\"double\"/>\n";
  out << "  <key id=\"iso\" for=\"graph\" attr.name=\"isolated_retained\""
         " attr.type=\"boolean\"/>\n";
  out << "  <graph id=\"crashnet\" edgedefault=\"undirected\">\n";
  out << "    <data key=\"theta\">" << io::format_double(net.theta, fmt)
      << "</data>\n";
  out << "    <data key=\"iso\">" << (net.isolated_retained ? "true" : "false")
      << "</data>\n";
  size_t n = net.size();
  for (size_t p = 0; p < n; ++p) {
    out << "    <node id=\"" << xml_escape(net.nodes[p]) << "\"/>\n";
  }
  for (size_t p = 0; p < n; ++p) {
    for (size_t q = p + 1; q < n; ++q) {
      if (!net.edge(p, q)) continue;
      out << "    <edge source=\"" << xml_escape(net.nodes[p])
          << "\" target=\"" << xml_escape(net.nodes[q])
          << "\"><data key=\"w\">"
          << io::format_double(net.weight_at(p, q), fmt) << "</data></edge>\n";
    }
  }
  out << "  </graph>\n";
  out << "</graphml>\n";
  return out.str();
}

namespace {

struct EdgeSpec {
  std::string a;
  std::string b;
  double weight;
};

// Assembles a network from parsed parts, resolving node indices.
ThresholdNetwork assemble(std::vector<std::string> nodes,
                          const std::vector<EdgeSpec>& edges, double theta,
                          bool isolated_retained, const char* what) {
  ThresholdNetwork net;
  net.theta = theta;
  net.isolated_retained = isolated_retained;
  net.nodes = std::move(nodes);
  size_t n = net.nodes.size();
  net.adjacency.assign(n * n, 0);
  net.weight.assign(n * n, 0.0);
  auto index_of = [&](const std::string& name) {
    for (size_t i = 0; i < n; ++i) {
      if (net.nodes[i] == name) return i;
    }
    throw DataError(std::string(what) + ": edge references unknown node " + name);
  };
  for (const auto& e : edges) {
    size_t p = index_of(e.a);
    size_t q = index_of(e.b);
    if (p == q) throw DataError(std::string(what) + ": self-loop on " + e.a);
    net.adjacency[p * n + q] = 1;
    net.adjacency[q * n + p] = 1;
    net.weight[p * n + q] = e.weight;
    net.weight[q * n + p] = e.weight;
  }
  return net;
}

// Extracts the text between the first quote pair at or after pos; advances
// pos past the closing quote.
std::string quoted(const std::string& line, size_t& pos, const char* what) {
  size_t open = line.find('"', pos);
  if (open == std::string::npos) throw DataError(std::string(what) + ": expected quote");
  size_t close = line.find('"', open + 1);
  if (close == std::string::npos) throw DataError(std::string(what) + ": unterminated quote");
  pos = close + 1;
  return line.substr(open + 1, close - open - 1);
}

double parse_num(std::string_view text, const std::string& what) {
  double v = 0.0;
  if (!io::parse_double(text, v)) {
    throw DataError(what + ": bad number '" + std::string(text) + "'");
  }
  return v;
}

double attr_value(const std::string& line, const std::string& key,
                  const char* what) {
  size_t at = line.find(key + "=");
  if (at == std::string::npos) {
    throw DataError(std::string(what) + ": missing attribute " + key);
  }
  size_t start = at + key.size() + 1;
  size_t end = line.find_first_of(" ];", start);
  return parse_num(line.substr(start, end == std::string::npos ? std::string::npos
                                                               : end - start),
                   std::string(what) + " " + key);
}

}  // namespace

ThresholdNetwork parse_dot(const std::string& text) {
  auto lines = io::split_lines(text);
  if (lines.empty() || lines[0].find("graph") != 0) {
    throw DataError("dot: expected a graph header");
  }
  std::vector<std::string> nodes;
  std::vector<EdgeSpec> edges;
  double theta = 0.0;
  bool isolated_retained = true;
  bool saw_meta = false;
  for (size_t i = 1; i < lines.size(); ++i) {
    std::string line = lines[i];
    size_t first = line.find_first_not_of(" \t");
    if (first == std::string::npos) continue;
    line = line.substr(first);
    if (line == "}") break;
    if (line.rfind("graph [", 0) == 0) {
      theta = attr_value(line, "theta", "dot");
      isolated_retained = attr_value(line, "isolated_retained", "dot") != 0.0;
      saw_meta = true;
      continue;
    }
    if (line.find("--") != std::string::npos) {
      size_t pos = 0;
      EdgeSpec e;
      e.a = quoted(line, pos, "dot");
      e.b = quoted(line, pos, "dot");
      e.weight = attr_value(line, "pcorr", "dot");
      edges.push_back(std::move(e));
    } else {
      size_t pos = 0;
      nodes.push_back(quoted(line, pos, "dot"));
    }
  }
  if (!saw_meta) throw DataError("dot: missing graph attribute line");
  return assemble(std::move(nodes), edges, theta, isolated_retained, "dot");
}

ThresholdNetwork parse_graphml(const std::string& text) {
  auto lines = io::split_lines(text);
  std::vector<std::string> nodes;
  std::vector<EdgeSpec> edges;
  double theta = 0.0;
  bool isolated_retained = true;
  bool saw_graph = false;
  auto xml_attr = [](const std::string& line, const std::string& key,
                     const char* what) {
    size_t at = line.find(key + "=\"");
    if (at == std::string::npos) {
      throw DataError(std::string(what) + ": missing attribute " + key);
    }
    size_t start = at + key.size() + 2;
    size_t end = line.find('"', start);
    if (end == std::string::npos) {
      throw DataError(std::string(what) + ": unterminated attribute " + key);
    }
    return xml_unescape(line.substr(start, end - start));
  };
  auto data_value = [](const std::string& line, const char* what) {
    size_t open = line.find('>', line.find("<data"));
    size_t close = line.find("</data>", open);
    if (open == std::string::npos || close == std::string::npos) {
      throw DataError(std::string(what) + ": malformed data element");
    }
    return line.substr(open + 1, close - open - 1);
  };
  for (const auto& raw : lines) {
    size_t first = raw.find_first_not_of(" \t");
    if (first == std::string::npos) continue;
    std::string line = raw.substr(first);
    if (line.rfind("<graph ", 0) == 0) {
      saw_graph = true;
    } else if (line.rfind("<data key=\"theta\">", 0) == 0) {
      theta = parse_num(data_value(line, "graphml"), "graphml theta");
    } else if (line.rfind("<data key=\"iso\">", 0) == 0) {
      isolated_retained = data_value(line, "graphml") == "true";
    } else if (line.rfind("<node ", 0) == 0) {
      nodes.push_back(xml_attr(line, "id", "graphml"));
    } else if (line.rfind("<edge ", 0) == 0) {
      EdgeSpec e;
      e.a = xml_attr(line, "source", "graphml");
      e.b = xml_attr(line, "target", "graphml");
      e.weight = parse_num(data_value(line, "graphml"), "graphml pcorr");
      edges.push_back(std::move(e));
    }
  }
  if (!saw_graph) throw DataError("graphml: missing graph element");
  return assemble(std::move(nodes), edges, theta, isolated_retained, "graphml");
}

}  // namespace crashnet
