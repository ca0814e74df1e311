#include "crashnet/costats.hpp"

#include <cmath>
#include <sstream>

#include <Eigen/Dense>

#include "crashnet/errors.hpp"

namespace crashnet {

ReturnMatrix daily_returns(const PricePanel& panel, ReturnKind kind) {
  size_t rows = panel.dates.size();
  size_t n = panel.symbols.size();
  if (rows < 3) {
    throw DataError("daily_returns: need at least 3 price rows, have " +
                    std::to_string(rows));
  }
  ReturnMatrix out;
  out.symbols = panel.symbols;
  out.dates.assign(panel.dates.begin() + 1, panel.dates.end());
  out.values.resize((rows - 1) * n);
  for (size_t t = 1; t < rows; ++t) {
    for (size_t a = 0; a < n; ++a) {
      double prev = panel.at(t - 1, a);
      double cur = panel.at(t, a);
      if (!(prev > 0.0) || !(cur > 0.0)) {
        throw DataError("daily_returns: non-positive price for " +
                        panel.symbols[a] + " near " +
                        panel.dates[t].to_string());
      }
      double ratio = cur / prev;
      out.at(t - 1, a) =
          kind == ReturnKind::kLog ? std::log(ratio) : ratio - 1.0;
    }
  }
  return out;
}

CorrelationMatrix pearson_matrix(const ReturnMatrix& returns) {
  size_t rows = returns.num_days();
  size_t n = returns.num_assets();
  if (rows < 3) {
    throw DataError("pearson_matrix: need at least 3 return rows, have " +
                    std::to_string(rows));
  }
  if (n < 2) {
    throw DataError("pearson_matrix: need at least 2 assets");
  }

  std::vector<double> mean(n, 0.0);
  for (size_t t = 0; t < rows; ++t) {
    for (size_t a = 0; a < n; ++a) mean[a] += returns.at(t, a);
  }
  for (size_t a = 0; a < n; ++a) mean[a] /= double(rows);

  std::vector<double> sd(n, 0.0);
  for (size_t t = 0; t < rows; ++t) {
    for (size_t a = 0; a < n; ++a) {
      double d = returns.at(t, a) - mean[a];
      sd[a] += d * d;
    }
  }
  for (size_t a = 0; a < n; ++a) {
    sd[a] = std::sqrt(sd[a] / double(rows));
    if (sd[a] == 0.0) {
      throw DataError("pearson_matrix: zero variance for " +
                      returns.symbols[a]);
    }
  }

  CorrelationMatrix out;
  out.symbols = returns.symbols;
  out.values.assign(n * n, 0.0);
  for (size_t p = 0; p < n; ++p) {
    out.at(p, p) = 1.0;
    for (size_t q = p + 1; q < n; ++q) {
      double cov = 0.0;
      for (size_t t = 0; t < rows; ++t) {
        cov += (returns.at(t, p) - mean[p]) * (returns.at(t, q) - mean[q]);
      }
      cov /= double(rows);
      double c = cov / (sd[p] * sd[q]);
      if (c > 1.0) c = 1.0;
      if (c < -1.0) c = -1.0;
      out.at(p, q) = c;
      out.at(q, p) = c;
    }
  }
  return out;
}

namespace {

// One shrink-and-invert attempt; returns false when the shrunk matrix is
// not numerically positive definite or yields an out-of-range result.
bool try_partial(const CorrelationMatrix& corr, double lambda,
                 PartialCorrelationMatrix& out) {
  size_t n = corr.size();
  Eigen::MatrixXd shrunk(n, n);
  for (size_t p = 0; p < n; ++p) {
    for (size_t q = 0; q < n; ++q) {
      double v = (1.0 - lambda) * corr.at(p, q);
      if (p == q) v += lambda;
      shrunk(Eigen::Index(p), Eigen::Index(q)) = v;
    }
  }

  Eigen::LLT<Eigen::MatrixXd> llt(shrunk);
  if (llt.info() != Eigen::Success) return false;
  Eigen::MatrixXd inv =
      llt.solve(Eigen::MatrixXd::Identity(Eigen::Index(n), Eigen::Index(n)));

  out.symbols = corr.symbols;
  out.shrinkage_lambda = lambda;
  out.values.assign(n * n, 0.0);
  for (size_t p = 0; p < n; ++p) {
    double dpp = inv(Eigen::Index(p), Eigen::Index(p));
    if (!std::isfinite(dpp) || dpp <= 0.0) return false;
    out.at(p, p) = 1.0;
  }
  for (size_t p = 0; p < n; ++p) {
    for (size_t q = p + 1; q < n; ++q) {
      double v = -inv(Eigen::Index(p), Eigen::Index(q)) /
                 std::sqrt(inv(Eigen::Index(p), Eigen::Index(p)) *
                           inv(Eigen::Index(q), Eigen::Index(q)));
      if (!std::isfinite(v) || std::fabs(v) > 1.0 + 1e-10) return false;
      if (v > 1.0) v = 1.0;
      if (v < -1.0) v = -1.0;
      out.at(p, q) = v;
      out.at(q, p) = v;
    }
  }
  return true;
}

}  // namespace

PartialCorrelationMatrix partial_corr_matrix(const CorrelationMatrix& corr,
                                             double lambda) {
  if (!(lambda >= 0.0 && lambda <= 0.1)) {
    throw ConfigError("partial_corr_matrix: lambda must be in [0, 0.1], got " +
                      std::to_string(lambda));
  }
  if (corr.size() < 2) {
    throw DataError("partial_corr_matrix: need at least 2 assets");
  }
  for (double v : corr.values) {
    if (!std::isfinite(v)) {
      throw DataError("partial_corr_matrix: correlation matrix has non-finite entries");
    }
  }

  PartialCorrelationMatrix out;
  if (try_partial(corr, lambda, out)) return out;
  constexpr double kEscalated = 1e-3;
  if (lambda < kEscalated && try_partial(corr, kEscalated, out)) return out;
  throw SingularCorrelation(
      "partial_corr_matrix: correlation matrix is singular even at lambda=1e-3");
}

namespace {

double upper_triangle_mean(const std::vector<std::string>& symbols,
                           const std::vector<double>& values) {
  size_t n = symbols.size();
  if (n < 2) {
    throw DataError("mean_offdiagonal: need at least 2 assets");
  }
  double sum = 0.0;
  for (size_t p = 0; p < n; ++p) {
    for (size_t q = p + 1; q < n; ++q) sum += values[p * n + q];
  }
  return sum / (double(n) * double(n - 1) / 2.0);
}

std::string matrix_csv(const std::vector<std::string>& symbols,
                       const std::vector<double>& values,
                       io::FloatFormat fmt) {
  size_t n = symbols.size();
  std::ostringstream out;
  out << "symbol";
  for (const auto& s : symbols) out << ',' << s;
  out << '\n';
  for (size_t p = 0; p < n; ++p) {
    out << symbols[p];
    for (size_t q = 0; q < n; ++q) {
      out << ',' << io::format_double(values[p * n + q], fmt);
    }
    out << '\n';
  }
  return out.str();
}

}  // namespace

double mean_offdiagonal(const CorrelationMatrix& m) {
  return upper_triangle_mean(m.symbols, m.values);
}

double mean_offdiagonal(const PartialCorrelationMatrix& m) {
  return upper_triangle_mean(m.symbols, m.values);
}

std::string correlation_to_csv(const CorrelationMatrix& m, io::FloatFormat fmt) {
  return matrix_csv(m.symbols, m.values, fmt);
}

std::string correlation_to_csv(const PartialCorrelationMatrix& m,
                               io::FloatFormat fmt) {
  return matrix_csv(m.symbols, m.values, fmt);
}

PartialCorrelationMatrix correlation_from_csv(const std::string& text) {
  auto lines = io::split_lines(text);
  if (lines.empty()) {
    throw DataError("correlation csv: empty input");
  }
  auto header = io::split_csv_line(lines[0]);
  if (header.size() < 3 || header[0] != "symbol") {
    throw DataError("correlation csv: expected 'symbol,<names...>' header");
  }
  PartialCorrelationMatrix m;
  m.symbols.assign(header.begin() + 1, header.end());
  size_t n = m.symbols.size();
  m.values.assign(n * n, 0.0);

  size_t row = 0;
  for (size_t i = 1; i < lines.size(); ++i) {
    if (lines[i].empty()) continue;
    auto fields = io::split_csv_line(lines[i]);
    if (row >= n) {
      throw DataError("correlation csv: more rows than symbols");
    }
    if (fields.size() != n + 1) {
      throw DataError("correlation csv: line " + std::to_string(i + 1) +
                      " has " + std::to_string(fields.size()) +
                      " fields, expected " + std::to_string(n + 1));
    }
    if (fields[0] != m.symbols[row]) {
      throw DataError("correlation csv: row label '" + fields[0] +
                      "' does not match header symbol '" + m.symbols[row] + "'");
    }
    for (size_t q = 0; q < n; ++q) {
      double v = 0.0;
      if (!io::parse_double(fields[q + 1], v)) {
        throw DataError("correlation csv: bad number '" + fields[q + 1] +
                        "' on line " + std::to_string(i + 1));
      }
      m.at(row, q) = v;
    }
    ++row;
  }
  if (row != n) {
    throw DataError("correlation csv: " + std::to_string(row) +
                    " rows for " + std::to_string(n) + " symbols");
  }
  for (size_t p = 0; p < n; ++p) {
    for (size_t q = p + 1; q < n; ++q) {
      if (std::fabs(m.at(p, q) - m.at(q, p)) > 1e-6) {
        throw DataError("correlation csv: asymmetric at " + m.symbols[p] +
                        "/" + m.symbols[q]);
      }
    }
  }
  return m;
}

}  // namespace crashnet
