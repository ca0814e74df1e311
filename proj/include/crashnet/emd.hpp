#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "crashnet/io.hpp"

namespace crashnet {

// Natural cubic spline through strictly increasing knots. Two knots fall
// back to linear interpolation. Queries outside the knot range extrapolate
// with the boundary segment.
class CubicSpline {
 public:
  CubicSpline(std::vector<double> xs, std::vector<double> ys);
  double operator()(double x) const;

 private:
  std::vector<double> xs_, ys_, m2_;  // m2_: second derivatives at the knots
};

struct Extrema {
  std::vector<size_t> maxima;
  std::vector<size_t> minima;
  size_t count() const { return maxima.size() + minima.size(); }
};

// Interior local extrema. A flat plateau that is a local extremum
// contributes a single index at its midpoint (rounded down). Endpoints are
// never extrema. Throws DataError for series shorter than 3.
Extrema find_extrema(const std::vector<double>& x);

// Number of sign changes along the series; runs of exact zeros between
// opposite signs count once.
size_t count_zero_crossings(const std::vector<double>& x);

struct SiftConfig {
  double sd_threshold = 0.2;  // Cauchy stopping criterion
  int max_sift_iters = 100;
  int max_imfs = 12;
  double envelope_tol = 1e-2;  // mean-envelope smallness relative to the mode

  void validate() const;  // throws ConfigError unless every field is positive
};

struct Imf {
  std::vector<double> values;
  int sift_count = 0;  // number of h -= mean updates applied

  bool operator==(const Imf&) const = default;
};

struct ImfSet {
  std::vector<Imf> imfs;  // highest frequency first
  std::vector<double> residual;
  size_t source_len = 0;

  bool operator==(const ImfSet&) const = default;
};

// Mean of the upper and lower envelopes: natural cubic splines through the
// maxima resp. minima after mirroring up to two extrema of each kind about
// both series ends. Throws NotEnoughExtrema when either envelope has no
// support points at all.
std::vector<double> envelope_mean(const std::vector<double>& x,
                                  const std::vector<size_t>& maxima,
                                  const std::vector<size_t>& minima);

// One sifting pass: h_k = h_{k-1} - m_{k-1} until the mode conditions hold
// (|#extrema - #zero crossings| <= 1 and the mean envelope is small), the
// Cauchy criterion sum((h_{k-1}-h_k)^2)/sum(h_{k-1}^2) drops below
// sd_threshold, or max_sift_iters is reached. Throws NotEnoughExtrema only
// when the very first envelope cannot be built; a later failure returns the
// series as sifted so far.
Imf sift(const std::vector<double>& x, const SiftConfig& cfg = {});

// Full decomposition: extracts modes from the running residual until the
// residual has fewer than 2 interior extrema or max_imfs is reached.
// Throws DataError for inputs shorter than 8 samples or containing
// NaN/Inf. The modes plus the residual telescope back to the input.
ImfSet decompose(const std::vector<double>& x, const SiftConfig& cfg = {});

// CSV dump with columns t,imf_1..imf_k,residual.
std::string imfset_to_csv(const ImfSet& set,
                          io::FloatFormat fmt = io::FloatFormat::kFull);

// Parses the imfset_to_csv format back. Throws DataError on malformed
// input. Sift counts are not part of the dump and come back as 0.
ImfSet imfset_from_csv(const std::string& text);

}  // namespace crashnet
