#include "crashnet/synth.hpp"

#include <cmath>
#include <numbers>
#include <string>
#include <vector>

#include "crashnet/errors.hpp"

namespace crashnet {

namespace {

uint64_t splitmix64(uint64_t& state) {
  state += 0x9e3779b97f4a7c15ULL;
  uint64_t z = state;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

// Distinct, well-separated state per stream index.
uint64_t substream(uint64_t seed, uint64_t index) {
  uint64_t s = seed ^ (0xd1342543de82ef95ULL * (index + 1));
  splitmix64(s);
  splitmix64(s);
  return s;
}

struct Gaussian {
  uint64_t state;
  explicit Gaussian(uint64_t s) : state(s) {}

  double next() {
    double a = double(splitmix64(state) >> 11) * 0x1.0p-53;
    double b = double(splitmix64(state) >> 11) * 0x1.0p-53;
    if (a < 1e-300) a = 1e-300;
    return std::sqrt(-2.0 * std::log(a)) *
           std::cos(2.0 * std::numbers::pi * b);
  }
};

}  // namespace

void RegimeSpec::validate() const {
  if (n_assets < 2) {
    throw ConfigError("synth: n_assets must be at least 2");
  }
  if (pre_days < 10 || crash_days < 10 || post_days < 10) {
    throw ConfigError("synth: every segment needs at least 10 days");
  }
  for (double rho : {rho_pre, rho_crash, rho_post}) {
    if (!(rho >= 0.0 && rho < 1.0)) {
      throw ConfigError("synth: rho must lie in [0, 1), got " +
                        std::to_string(rho));
    }
  }
  if (!(drawdown > 0.0 && drawdown < 1.0)) {
    throw ConfigError("synth: drawdown must lie in (0, 1), got " +
                      std::to_string(drawdown));
  }
  if (!(volatility > 0.0) || !std::isfinite(volatility)) {
    throw ConfigError("synth: volatility must be positive");
  }
  if (!std::isfinite(drift_pre) || !std::isfinite(drift_post)) {
    throw ConfigError("synth: drifts must be finite");
  }
}

PricePanel generate_panel(const RegimeSpec& spec) {
  spec.validate();
  size_t days = spec.total_days();
  size_t n = spec.n_assets;
  double crash_drift = std::log(1.0 - spec.drawdown) / double(spec.crash_days);

  // segment parameters per day
  std::vector<double> drift(days), sqrt_rho(days), sqrt_rest(days);
  for (size_t t = 0; t < days; ++t) {
    double rho;
    if (t < spec.pre_days) {
      rho = spec.rho_pre;
      drift[t] = spec.drift_pre;
    } else if (t < spec.pre_days + spec.crash_days) {
      rho = spec.rho_crash;
      drift[t] = crash_drift;
    } else {
      rho = spec.rho_post;
      drift[t] = spec.drift_post;
    }
    sqrt_rho[t] = std::sqrt(rho);
    sqrt_rest[t] = std::sqrt(1.0 - rho);
  }

  Gaussian factor(substream(spec.seed, 0));
  std::vector<double> common(days);
  for (size_t t = 0; t < days; ++t) common[t] = factor.next();

  PricePanel panel;
  panel.dates.reserve(days);
  for (size_t t = 0; t < days; ++t) panel.dates.push_back(spec.start_date + int(t));

  int width = 1;
  for (size_t v = n - 1; v >= 10; v /= 10) ++width;
  for (size_t a = 0; a < n; ++a) {
    std::string id = std::to_string(a);
    panel.symbols.push_back("A" + std::string(size_t(width) - id.size(), '0') + id);
  }

  panel.values.resize(days * n);
  for (size_t a = 0; a < n; ++a) {
    Gaussian noise(substream(spec.seed, a + 1));
    double log_price = 0.0;
    for (size_t t = 0; t < days; ++t) {
      double shock = sqrt_rho[t] * common[t] + sqrt_rest[t] * noise.next();
      log_price += drift[t] + spec.volatility * shock;
      panel.values[t * n + a] = 100.0 * std::exp(log_price);
    }
  }
  return panel;
}

}  // namespace crashnet
