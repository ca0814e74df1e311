#include "crashnet/emd.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "crashnet/errors.hpp"

namespace crashnet {

CubicSpline::CubicSpline(std::vector<double> xs, std::vector<double> ys)
    : xs_(std::move(xs)), ys_(std::move(ys)) {
  size_t n = xs_.size();
  if (n < 2 || ys_.size() != n) {
    throw NumericError("spline needs at least 2 knots with matching values");
  }
  for (size_t i = 1; i < n; ++i) {
    if (!(xs_[i - 1] < xs_[i])) {
      throw NumericError("spline knots must be strictly increasing");
    }
  }
  m2_.assign(n, 0.0);
  if (n == 2) return;  // linear

  // Natural spline: solve the tridiagonal system for interior second
  // derivatives with the Thomas algorithm; m2 at the ends stays 0.
  std::vector<double> diag(n), upper(n), rhs(n);
  for (size_t i = 1; i + 1 < n; ++i) {
    double h0 = xs_[i] - xs_[i - 1];
    double h1 = xs_[i + 1] - xs_[i];
    diag[i] = 2.0 * (h0 + h1);
    upper[i] = h1;
    rhs[i] = 6.0 * ((ys_[i + 1] - ys_[i]) / h1 - (ys_[i] - ys_[i - 1]) / h0);
  }
  for (size_t i = 2; i + 1 < n; ++i) {
    double lower = xs_[i] - xs_[i - 1];
    double w = lower / diag[i - 1];
    diag[i] -= w * upper[i - 1];
    rhs[i] -= w * rhs[i - 1];
  }
  for (size_t i = n - 2; i >= 1; --i) {
    m2_[i] = (rhs[i] - upper[i] * m2_[i + 1]) / diag[i];
  }
}

double CubicSpline::operator()(double x) const {
  size_t n = xs_.size();
  // segment index: the last i with xs_[i] <= x, clamped to a valid segment
  size_t i = std::upper_bound(xs_.begin(), xs_.end(), x) - xs_.begin();
  i = (i == 0) ? 0 : i - 1;
  if (i + 1 >= n) i = n - 2;

  double h = xs_[i + 1] - xs_[i];
  double a = (xs_[i + 1] - x) / h;
  double b = (x - xs_[i]) / h;
  return a * ys_[i] + b * ys_[i + 1] +
         ((a * a * a - a) * m2_[i] + (b * b * b - b) * m2_[i + 1]) * h * h / 6.0;
}

Extrema find_extrema(const std::vector<double>& x) {
  size_t n = x.size();
  if (n < 3) {
    throw DataError("find_extrema needs at least 3 samples, got " +
                    std::to_string(n));
  }
  Extrema ext;
  size_t start = 0;
  while (start < n) {
    size_t end = start;
    while (end + 1 < n && x[end + 1] == x[start]) ++end;
    if (start > 0 && end + 1 < n) {
      double v = x[start], left = x[start - 1], right = x[end + 1];
      size_t mid = (start + end) / 2;
      if (v > left && v > right) ext.maxima.push_back(mid);
      if (v < left && v < right) ext.minima.push_back(mid);
    }
    start = end + 1;
  }
  return ext;
}

size_t count_zero_crossings(const std::vector<double>& x) {
  size_t crossings = 0;
  int last_sign = 0;
  for (double v : x) {
    int sign = (v > 0.0) - (v < 0.0);
    if (sign != 0) {
      if (last_sign != 0 && sign != last_sign) ++crossings;
      last_sign = sign;
    }
  }
  return crossings;
}

void SiftConfig::validate() const {
  if (!(sd_threshold > 0.0) || max_sift_iters < 1 || max_imfs < 1 ||
      !(envelope_tol > 0.0)) {
    throw ConfigError("sift config fields must all be positive");
  }
}

namespace {

// Envelope support: the extrema themselves plus up to two mirrored about
// each end. Interior indices are in [1, n-2], so the mirrored knots stay
// strictly outside [0, n-1] and the spline covers every sample.
CubicSpline envelope_spline(const std::vector<double>& x,
                            const std::vector<size_t>& idx) {
  size_t n = x.size();
  size_t k = std::min<size_t>(2, idx.size());
  std::vector<double> xs, ys;
  xs.reserve(idx.size() + 2 * k);
  ys.reserve(idx.size() + 2 * k);
  for (size_t j = k; j-- > 0;) {
    xs.push_back(-double(idx[j]));
    ys.push_back(x[idx[j]]);
  }
  for (size_t j = 0; j < idx.size(); ++j) {
    xs.push_back(double(idx[j]));
    ys.push_back(x[idx[j]]);
  }
  for (size_t j = 0; j < k; ++j) {
    size_t src = idx.size() - 1 - j;
    xs.push_back(2.0 * double(n - 1) - double(idx[src]));
    ys.push_back(x[idx[src]]);
  }
  return CubicSpline(std::move(xs), std::move(ys));
}

double max_abs(const std::vector<double>& v) {
  double m = 0.0;
  for (double x : v) m = std::max(m, std::abs(x));
  return m;
}

}  // namespace

std::vector<double> envelope_mean(const std::vector<double>& x,
                                  const std::vector<size_t>& maxima,
                                  const std::vector<size_t>& minima) {
  if (maxima.empty() || minima.empty()) {
    throw NotEnoughExtrema("envelope needs at least one maximum and one minimum");
  }
  CubicSpline upper = envelope_spline(x, maxima);
  CubicSpline lower = envelope_spline(x, minima);
  std::vector<double> m(x.size());
  for (size_t t = 0; t < x.size(); ++t) {
    m[t] = 0.5 * (upper(double(t)) + lower(double(t)));
  }
  return m;
}

Imf sift(const std::vector<double>& x, const SiftConfig& cfg) {
  cfg.validate();
  Imf imf;
  imf.values = x;
  auto& h = imf.values;

  for (int k = 0; k < cfg.max_sift_iters; ++k) {
    Extrema ext = find_extrema(h);
    std::vector<double> m;
    try {
      m = envelope_mean(h, ext.maxima, ext.minima);
    } catch (const NotEnoughExtrema&) {
      if (k == 0) throw;
      return imf;  // later iterations: as sifted as this series gets
    }

    size_t zc = count_zero_crossings(h);
    size_t ne = ext.count();
    size_t gap = ne > zc ? ne - zc : zc - ne;
    if (gap <= 1 && max_abs(m) <= cfg.envelope_tol * max_abs(h)) {
      return imf;
    }

    double num = 0.0, den = 0.0;
    for (size_t t = 0; t < h.size(); ++t) {
      num += m[t] * m[t];
      den += h[t] * h[t];
    }
    for (size_t t = 0; t < h.size(); ++t) h[t] -= m[t];
    ++imf.sift_count;
    if (den == 0.0) return imf;
    if (num / den < cfg.sd_threshold) {
      // Accept the Cauchy exit only once the extrema/zero-crossing counts
      // of the updated series agree; a plain SD cut under-sifts noisy data.
      Extrema ext2 = find_extrema(h);
      size_t zc2 = count_zero_crossings(h);
      size_t ne2 = ext2.count();
      size_t gap2 = ne2 > zc2 ? ne2 - zc2 : zc2 - ne2;
      if (gap2 <= 1) return imf;
    }
  }
  return imf;
}

ImfSet decompose(const std::vector<double>& x, const SiftConfig& cfg) {
  cfg.validate();
  if (x.size() < 8) {
    throw DataError("decompose needs at least 8 samples, got " +
                    std::to_string(x.size()));
  }
  for (double v : x) {
    if (!std::isfinite(v)) throw DataError("decompose: input contains NaN or Inf");
  }

  ImfSet out;
  out.source_len = x.size();
  // Modes below this amplitude are floating-point debris, not structure;
  // extracting them would let cancellation noise masquerade as extrema and
  // the loop would grind on until max_imfs.
  const double negligible = 1e-12 * max_abs(x);
  std::vector<double> residual = x;
  while (int(out.imfs.size()) < cfg.max_imfs) {
    if (find_extrema(residual).count() < 2) break;
    Imf imf;
    try {
      imf = sift(residual, cfg);
    } catch (const NotEnoughExtrema&) {
      break;
    }
    if (max_abs(imf.values) <= negligible) break;
    for (size_t t = 0; t < residual.size(); ++t) residual[t] -= imf.values[t];
    out.imfs.push_back(std::move(imf));
  }
  out.residual = std::move(residual);
  return out;
}

std::string imfset_to_csv(const ImfSet& set, io::FloatFormat fmt) {
  std::ostringstream ss;
  ss << 't';
  for (size_t i = 0; i < set.imfs.size(); ++i) ss << ",imf_" << (i + 1);
  ss << ",residual\n";
  for (size_t t = 0; t < set.source_len; ++t) {
    ss << t;
    for (const auto& imf : set.imfs) {
      ss << ',' << io::format_double(imf.values[t], fmt);
    }
    ss << ',' << io::format_double(set.residual[t], fmt) << '\n';
  }
  return ss.str();
}

ImfSet imfset_from_csv(const std::string& text) {
  auto lines = io::split_lines(text);
  if (lines.empty()) throw DataError("imf csv: empty input");
  auto header = io::split_csv_line(lines[0]);
  if (header.size() < 2 || header.front() != "t" ||
      header.back() != "residual") {
    throw DataError("imf csv: expected header t,imf_1..imf_k,residual");
  }
  size_t k = header.size() - 2;
  for (size_t i = 0; i < k; ++i) {
    if (header[i + 1] != "imf_" + std::to_string(i + 1)) {
      throw DataError("imf csv: unexpected column " + header[i + 1]);
    }
  }

  ImfSet set;
  set.imfs.resize(k);
  for (size_t row = 1; row < lines.size(); ++row) {
    if (lines[row].empty()) continue;
    auto fields = io::split_csv_line(lines[row]);
    if (fields.size() != header.size()) {
      throw DataError("imf csv: row " + std::to_string(row) + " has " +
                      std::to_string(fields.size()) + " fields, expected " +
                      std::to_string(header.size()));
    }
    double t = 0.0;
    if (!io::parse_double(fields[0], t) || t != double(set.source_len)) {
      throw DataError("imf csv: rows must carry t = 0,1,2,... (row " +
                      std::to_string(row) + ")");
    }
    for (size_t i = 0; i <= k; ++i) {
      double v = 0.0;
      if (!io::parse_double(fields[i + 1], v)) {
        throw DataError("imf csv: bad number '" + fields[i + 1] + "' in row " +
                        std::to_string(row));
      }
      if (i < k) {
        set.imfs[i].values.push_back(v);
      } else {
        set.residual.push_back(v);
      }
    }
    ++set.source_len;
  }
  if (set.source_len == 0) throw DataError("imf csv: no data rows");
  return set;
}

}  // namespace crashnet
