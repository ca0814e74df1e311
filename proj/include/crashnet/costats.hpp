#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "crashnet/date.hpp"
#include "crashnet/ingest.hpp"
#include "crashnet/io.hpp"

namespace crashnet {

enum class ReturnKind { kLog, kSimple };

// Daily returns per asset. Row t corresponds to the move into dates[t],
// so there is one row fewer than the source panel.
struct ReturnMatrix {
  std::vector<Date> dates;
  std::vector<std::string> symbols;
  std::vector<double> values;  // row-major (T-1) x N

  size_t num_days() const { return dates.size(); }
  size_t num_assets() const { return symbols.size(); }
  double at(size_t t, size_t n) const { return values[t * symbols.size() + n]; }
  double& at(size_t t, size_t n) { return values[t * symbols.size() + n]; }
};

struct CorrelationMatrix {
  std::vector<std::string> symbols;
  std::vector<double> values;  // row-major N x N

  size_t size() const { return symbols.size(); }
  double at(size_t p, size_t q) const { return values[p * symbols.size() + q]; }
  double& at(size_t p, size_t q) { return values[p * symbols.size() + q]; }
};

struct PartialCorrelationMatrix {
  std::vector<std::string> symbols;
  std::vector<double> values;  // row-major N x N, diagonal 1 by convention
  double shrinkage_lambda = 0.0;  // the lambda actually applied

  size_t size() const { return symbols.size(); }
  double at(size_t p, size_t q) const { return values[p * symbols.size() + q]; }
  double& at(size_t p, size_t q) { return values[p * symbols.size() + q]; }
};

// log: R(t) = ln(P(t)/P(t-1)); simple: R(t) = P(t)/P(t-1) - 1.
// Requires at least 3 rows and positive prices.
ReturnMatrix daily_returns(const PricePanel& panel, ReturnKind kind = ReturnKind::kLog);

// Pearson correlation with population normalization (moments divided by the
// window length). Exactly symmetric with a unit diagonal. Requires at least
// 3 return rows; a zero-variance column is an error naming the asset.
CorrelationMatrix pearson_matrix(const ReturnMatrix& returns);

// Partial correlation through the inverse of the shrunk correlation matrix
// C' = (1-lambda)*C + lambda*I:
//
//   C*_pq = -C'^{-1}_pq / sqrt(C'^{-1}_pp * C'^{-1}_qq)
//
// Diagonal reported as 1. If C' is not positive definite (or the result is
// not a valid correlation) the shrinkage escalates to 1e-3 once; failure
// after that raises SingularCorrelation. shrinkage_lambda records the value
// actually used, so callers can detect the escalation. lambda must lie in
// [0, 0.1].
PartialCorrelationMatrix partial_corr_matrix(const CorrelationMatrix& corr,
                                             double lambda = 1e-6);

// Arithmetic mean of the N(N-1)/2 upper-triangle entries.
double mean_offdiagonal(const CorrelationMatrix& m);
double mean_offdiagonal(const PartialCorrelationMatrix& m);

// CSV heatmap: header row of symbols, then one row per symbol with its
// matrix entries.
std::string correlation_to_csv(const CorrelationMatrix& m,
                               io::FloatFormat fmt = io::FloatFormat::kSig6);
std::string correlation_to_csv(const PartialCorrelationMatrix& m,
                               io::FloatFormat fmt = io::FloatFormat::kSig6);

// Reads the heatmap layout back. The matrix must be square, symmetric
// within 1e-6, and carry finite entries; row labels must repeat the header.
// Returned as a partial correlation matrix since that is what downstream
// stages consume (shrinkage_lambda is reported as 0).
PartialCorrelationMatrix correlation_from_csv(const std::string& text);

}  // namespace crashnet
