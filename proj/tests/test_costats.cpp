#include <doctest.h>

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "crashnet/costats.hpp"
#include "crashnet/errors.hpp"

using namespace crashnet;

namespace {

uint64_t splitmix64(uint64_t& state) {
  state += 0x9e3779b97f4a7c15ULL;
  uint64_t z = state;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

double uniform01(uint64_t& state) {
  return double(splitmix64(state) >> 11) * 0x1.0p-53;
}

PricePanel make_panel(std::vector<std::string> symbols,
                      std::vector<std::vector<double>> columns) {
  PricePanel p;
  p.symbols = std::move(symbols);
  size_t rows = columns[0].size();
  Date d = Date::parse("2021-01-01");
  for (size_t t = 0; t < rows; ++t) p.dates.push_back(d + int(t));
  p.values.resize(rows * p.symbols.size());
  for (size_t t = 0; t < rows; ++t) {
    for (size_t a = 0; a < p.symbols.size(); ++a) {
      p.values[t * p.symbols.size() + a] = columns[a][t];
    }
  }
  return p;
}

ReturnMatrix make_returns(std::vector<std::string> symbols,
                          std::vector<std::vector<double>> columns) {
  ReturnMatrix r;
  r.symbols = std::move(symbols);
  size_t rows = columns[0].size();
  Date d = Date::parse("2021-01-02");
  for (size_t t = 0; t < rows; ++t) r.dates.push_back(d + int(t));
  r.values.resize(rows * r.symbols.size());
  for (size_t t = 0; t < rows; ++t) {
    for (size_t a = 0; a < r.symbols.size(); ++a) {
      r.at(t, a) = columns[a][t];
    }
  }
  return r;
}

CorrelationMatrix equicorrelated(size_t n, double rho) {
  CorrelationMatrix c;
  for (size_t i = 0; i < n; ++i) c.symbols.push_back("A" + std::to_string(i));
  c.values.assign(n * n, rho);
  for (size_t i = 0; i < n; ++i) c.at(i, i) = 1.0;
  return c;
}

double pearson_of(const std::vector<double>& x, const std::vector<double>& y) {
  size_t n = x.size();
  double mx = 0.0, my = 0.0;
  for (size_t i = 0; i < n; ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= double(n);
  my /= double(n);
  double sxx = 0.0, syy = 0.0, sxy = 0.0;
  for (size_t i = 0; i < n; ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    syy += (y[i] - my) * (y[i] - my);
    sxy += (x[i] - mx) * (y[i] - my);
  }
  return sxy / std::sqrt(sxx * syy);
}

// Solves A x = b by Gaussian elimination with partial pivoting. Kept free of
// any linear-algebra library so the oracle is an independent route.
std::vector<double> solve_dense(std::vector<std::vector<double>> a,
                                std::vector<double> b) {
  size_t n = b.size();
  for (size_t col = 0; col < n; ++col) {
    size_t pivot = col;
    for (size_t r = col + 1; r < n; ++r) {
      if (std::fabs(a[r][col]) > std::fabs(a[pivot][col])) pivot = r;
    }
    std::swap(a[col], a[pivot]);
    std::swap(b[col], b[pivot]);
    if (a[col][col] == 0.0) throw std::runtime_error("singular oracle system");
    for (size_t r = col + 1; r < n; ++r) {
      double f = a[r][col] / a[col][col];
      for (size_t c = col; c < n; ++c) a[r][c] -= f * a[col][c];
      b[r] -= f * b[col];
    }
  }
  std::vector<double> x(n, 0.0);
  for (size_t r = n; r-- > 0;) {
    double s = b[r];
    for (size_t c = r + 1; c < n; ++c) s -= a[r][c] * x[c];
    x[r] = s / a[r][r];
  }
  return x;
}

// Least-squares residual of y against the given predictor columns plus an
// intercept, via the normal equations.
std::vector<double> regression_residual(const std::vector<double>& y,
                                        const std::vector<std::vector<double>>& preds) {
  size_t rows = y.size();
  size_t k = preds.size() + 1;
  auto design = [&](size_t t, size_t j) {
    return j == 0 ? 1.0 : preds[j - 1][t];
  };
  std::vector<std::vector<double>> xtx(k, std::vector<double>(k, 0.0));
  std::vector<double> xty(k, 0.0);
  for (size_t t = 0; t < rows; ++t) {
    for (size_t i = 0; i < k; ++i) {
      xty[i] += design(t, i) * y[t];
      for (size_t j = 0; j < k; ++j) xtx[i][j] += design(t, i) * design(t, j);
    }
  }
  auto beta = solve_dense(std::move(xtx), std::move(xty));
  std::vector<double> resid(rows);
  for (size_t t = 0; t < rows; ++t) {
    double fit = 0.0;
    for (size_t j = 0; j < k; ++j) fit += beta[j] * design(t, j);
    resid[t] = y[t] - fit;
  }
  return resid;
}

// Partial correlation of assets p and q: correlate their residuals after
// regressing each on every other asset.
double partial_corr_oracle(const ReturnMatrix& r, size_t p, size_t q) {
  size_t n = r.num_assets();
  std::vector<std::vector<double>> controls;
  for (size_t a = 0; a < n; ++a) {
    if (a == p || a == q) continue;
    std::vector<double> col(r.num_days());
    for (size_t t = 0; t < col.size(); ++t) col[t] = r.at(t, a);
    controls.push_back(std::move(col));
  }
  std::vector<double> yp(r.num_days()), yq(r.num_days());
  for (size_t t = 0; t < yp.size(); ++t) {
    yp[t] = r.at(t, p);
    yq[t] = r.at(t, q);
  }
  return pearson_of(regression_residual(yp, controls),
                    regression_residual(yq, controls));
}

}  // namespace

TEST_CASE("constant prices give zero returns") {
  auto panel = make_panel({"AAA", "BBB"}, {{50, 50, 50, 50}, {7, 7, 7, 7}});
  for (auto kind : {ReturnKind::kLog, ReturnKind::kSimple}) {
    auto r = daily_returns(panel, kind);
    CHECK(r.num_days() == 3);
    CHECK(r.num_assets() == 2);
    for (double v : r.values) CHECK(v == 0.0);
  }
}

TEST_CASE("return arithmetic on a known move") {
  auto panel = make_panel({"AAA"}, {{100, 110, 110}});
  auto simple = daily_returns(panel, ReturnKind::kSimple);
  CHECK(simple.at(0, 0) == doctest::Approx(0.10).epsilon(1e-12));
  auto logr = daily_returns(panel, ReturnKind::kLog);
  CHECK(logr.at(0, 0) == doctest::Approx(std::log(1.1)).epsilon(1e-12));
  CHECK(logr.dates[0] == Date::parse("2021-01-02"));
}

TEST_CASE("uniform rescaling of one asset leaves its returns unchanged") {
  std::vector<double> a = {100, 104, 97, 101, 99};
  std::vector<double> b = {20, 21, 19, 22, 20};
  std::vector<double> b2(b.size());
  for (size_t i = 0; i < b.size(); ++i) b2[i] = 2.0 * b[i];
  auto r1 = daily_returns(make_panel({"AAA", "BBB"}, {a, b}));
  auto r2 = daily_returns(make_panel({"AAA", "BBB"}, {a, b2}));
  for (size_t t = 0; t < r1.num_days(); ++t) {
    CHECK(r1.at(t, 1) == r2.at(t, 1));
  }
}

TEST_CASE("returns input validation") {
  auto short_panel = make_panel({"AAA"}, {{100, 101}});
  CHECK_THROWS_AS(daily_returns(short_panel), DataError);

  auto bad = make_panel({"AAA", "BBB"}, {{100, 101, 102}, {5, -1, 5}});
  CHECK_THROWS_WITH_AS(daily_returns(bad),
                       doctest::Contains("non-positive price for BBB"),
                       DataError);
}

TEST_CASE("perfect linear dependence gives correlation one") {
  uint64_t rng = 42;
  std::vector<double> rp(64), rq(64), neg(64);
  for (size_t t = 0; t < rp.size(); ++t) {
    rp[t] = uniform01(rng) - 0.5;
    rq[t] = 2.0 * rp[t] + 0.01;
    neg[t] = -rp[t];
  }
  auto c = pearson_matrix(make_returns({"P", "Q", "N"}, {rp, rq, neg}));
  CHECK(c.at(0, 1) == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(c.at(0, 2) == doctest::Approx(-1.0).epsilon(1e-12));
  CHECK(c.at(0, 0) == 1.0);
  CHECK(c.at(1, 1) == 1.0);
}

TEST_CASE("independent columns decorrelate at large samples") {
  uint64_t rng = 7;
  size_t t_len = 100000;
  std::vector<double> a(t_len), b(t_len);
  for (size_t t = 0; t < t_len; ++t) {
    a[t] = uniform01(rng) - 0.5;
    b[t] = uniform01(rng) - 0.5;
  }
  auto c = pearson_matrix(make_returns({"A", "B"}, {a, b}));
  CHECK(std::fabs(c.at(0, 1)) < 0.02);
}

TEST_CASE("pearson matrix is symmetric with a unit diagonal") {
  uint64_t rng = 99;
  std::vector<std::vector<double>> cols(4, std::vector<double>(50));
  for (auto& col : cols) {
    for (auto& v : col) v = uniform01(rng) - 0.5;
  }
  auto c = pearson_matrix(make_returns({"A", "B", "C", "D"}, cols));
  for (size_t p = 0; p < 4; ++p) {
    CHECK(c.at(p, p) == 1.0);
    for (size_t q = 0; q < 4; ++q) {
      CHECK(c.at(p, q) == c.at(q, p));
      CHECK(std::fabs(c.at(p, q)) <= 1.0);
    }
  }
}

TEST_CASE("correlation is invariant under per-asset affine transforms") {
  uint64_t rng = 5;
  std::vector<std::vector<double>> cols(3, std::vector<double>(80));
  for (auto& col : cols) {
    for (auto& v : col) v = uniform01(rng) - 0.5;
  }
  auto base = pearson_matrix(make_returns({"A", "B", "C"}, cols));

  std::vector<std::vector<double>> scaled = cols;
  double a_mult[3] = {3.5, 0.2, 11.0};
  double b_add[3] = {-0.4, 0.0, 2.0};
  for (size_t a = 0; a < 3; ++a) {
    for (auto& v : scaled[a]) v = a_mult[a] * v + b_add[a];
  }
  auto moved = pearson_matrix(make_returns({"A", "B", "C"}, scaled));
  for (size_t i = 0; i < base.values.size(); ++i) {
    CHECK(moved.values[i] == doctest::Approx(base.values[i]).epsilon(1e-10));
  }
}

TEST_CASE("zero variance column is reported by name") {
  auto r = make_returns({"LIVE", "DEAD"}, {{0.1, -0.2, 0.3, 0.1}, {0, 0, 0, 0}});
  CHECK_THROWS_WITH_AS(pearson_matrix(r), doctest::Contains("DEAD"), DataError);
}

TEST_CASE("pearson matrix needs enough rows") {
  auto r = make_returns({"A", "B"}, {{0.1, 0.2}, {0.3, -0.1}});
  CHECK_THROWS_AS(pearson_matrix(r), DataError);
}

TEST_CASE("identity correlation has zero partial correlations") {
  auto c = equicorrelated(4, 0.0);
  auto pc = partial_corr_matrix(c, 0.0);
  CHECK(pc.shrinkage_lambda == 0.0);
  for (size_t p = 0; p < 4; ++p) {
    for (size_t q = 0; q < 4; ++q) {
      CHECK(pc.at(p, q) == (p == q ? 1.0 : 0.0));
    }
  }
}

TEST_CASE("equicorrelated partial correlations match the closed form") {
  // inverting the equicorrelated matrix gives rho / (1 + (N-2) rho) for
  // every off-diagonal pair
  auto check_closed_form = [](size_t n, double rho) {
    auto pc = partial_corr_matrix(equicorrelated(n, rho), 0.0);
    double expected = rho / (1.0 + double(n - 2) * rho);
    for (size_t p = 0; p < n; ++p) {
      for (size_t q = 0; q < n; ++q) {
        if (p == q) continue;
        CHECK(pc.at(p, q) == doctest::Approx(expected).epsilon(1e-9));
      }
    }
  };
  check_closed_form(3, 0.5);  // 1/3
  check_closed_form(5, 0.3);
  check_closed_form(6, 0.8);
}

TEST_CASE("partial correlations match the regression-residual oracle") {
  // factor-structured returns so partial and plain correlations differ
  uint64_t rng = 2024;
  size_t t_len = 500;
  for (size_t n : {2, 4, 6}) {
    std::vector<std::vector<double>> cols(n, std::vector<double>(t_len));
    for (size_t t = 0; t < t_len; ++t) {
      double f1 = uniform01(rng) - 0.5;
      double f2 = uniform01(rng) - 0.5;
      for (size_t a = 0; a < n; ++a) {
        double w = double(a + 1) / double(n);
        cols[a][t] = w * f1 + (1.0 - w) * f2 + 0.4 * (uniform01(rng) - 0.5);
      }
    }
    std::vector<std::string> symbols;
    for (size_t a = 0; a < n; ++a) symbols.push_back("A" + std::to_string(a));
    auto returns = make_returns(symbols, cols);
    auto pc = partial_corr_matrix(pearson_matrix(returns), 0.0);
    for (size_t p = 0; p < n; ++p) {
      for (size_t q = p + 1; q < n; ++q) {
        double want = partial_corr_oracle(returns, p, q);
        CHECK(pc.at(p, q) == doctest::Approx(want).epsilon(1e-8));
      }
    }
  }
}

TEST_CASE("duplicate assets still produce a usable matrix") {
  uint64_t rng = 31;
  std::vector<double> a(60), c(60);
  for (size_t t = 0; t < a.size(); ++t) {
    a[t] = uniform01(rng) - 0.5;
    c[t] = uniform01(rng) - 0.5;
  }
  auto returns = make_returns({"A", "ACOPY", "C"}, {a, a, c});
  auto pc = partial_corr_matrix(pearson_matrix(returns), 0.0);
  CHECK(pc.shrinkage_lambda <= 1e-3);
  CHECK(pc.at(0, 1) > 0.9);  // the duplicated pair stays strongly linked
  for (double v : pc.values) CHECK(std::isfinite(v));
}

TEST_CASE("an exactly singular matrix escalates the shrinkage") {
  CorrelationMatrix c;
  c.symbols = {"A", "ACOPY", "B"};
  c.values = {1.0, 1.0, 0.3,
              1.0, 1.0, 0.3,
              0.3, 0.3, 1.0};  // duplicate row, determinant exactly 0
  auto pc = partial_corr_matrix(c, 0.0);
  CHECK(pc.shrinkage_lambda == 1e-3);
  CHECK(pc.at(0, 1) > 0.9);
}

TEST_CASE("invalid correlation input is rejected") {
  CorrelationMatrix bad;
  bad.symbols = {"A", "B"};
  bad.values = {1.0, 2.0, 2.0, 1.0};  // indefinite, no valid shrinkage
  CHECK_THROWS_AS(partial_corr_matrix(bad, 1e-6), SingularCorrelation);

  auto c = equicorrelated(3, 0.5);
  CHECK_THROWS_AS(partial_corr_matrix(c, -0.1), ConfigError);
  CHECK_THROWS_AS(partial_corr_matrix(c, 0.5), ConfigError);
}

TEST_CASE("mean of the off-diagonal upper triangle") {
  auto id = equicorrelated(4, 0.0);
  CHECK(mean_offdiagonal(id) == 0.0);

  auto crash_level = equicorrelated(5, 0.769);
  CHECK(mean_offdiagonal(crash_level) == doctest::Approx(0.769).epsilon(1e-12));

  CorrelationMatrix three;
  three.symbols = {"A", "B", "C"};
  three.values = {1.0, 0.1, 0.2, 0.1, 1.0, 0.3, 0.2, 0.3, 1.0};
  CHECK(mean_offdiagonal(three) == doctest::Approx(0.2).epsilon(1e-12));
}

TEST_CASE("mean_offdiagonal ignores symbol ordering") {
  uint64_t rng = 12;
  std::vector<std::vector<double>> cols(4, std::vector<double>(40));
  for (auto& col : cols) {
    for (auto& v : col) v = uniform01(rng) - 0.5;
  }
  auto c = pearson_matrix(make_returns({"A", "B", "C", "D"}, cols));

  // permute assets (rotate by one) and rebuild
  std::vector<std::vector<double>> rot = {cols[1], cols[2], cols[3], cols[0]};
  auto c2 = pearson_matrix(make_returns({"B", "C", "D", "A"}, rot));
  CHECK(mean_offdiagonal(c) == doctest::Approx(mean_offdiagonal(c2)).epsilon(1e-12));
}

TEST_CASE("heatmap csv layout") {
  CorrelationMatrix c;
  c.symbols = {"AAA", "BBB"};
  c.values = {1.0, 0.25, 0.25, 1.0};
  CHECK(correlation_to_csv(c) ==
        "symbol,AAA,BBB\n"
        "AAA,1,0.25\n"
        "BBB,0.25,1\n");

  PartialCorrelationMatrix pc;
  pc.symbols = {"AAA", "BBB"};
  pc.values = {1.0, -0.5, -0.5, 1.0};
  pc.shrinkage_lambda = 1e-6;
  CHECK(correlation_to_csv(pc) ==
        "symbol,AAA,BBB\n"
        "AAA,1,-0.5\n"
        "BBB,-0.5,1\n");
}
