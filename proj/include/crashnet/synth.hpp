#pragma once

#include <cstddef>
#include <cstdint>

#include "crashnet/date.hpp"
#include "crashnet/ingest.hpp"

namespace crashnet {

// Three-regime synthetic market: a pre segment, a crash segment whose drift
// delivers the requested total drawdown, and a post segment. Returns within
// a segment follow the one-factor equicorrelation model
//
//   r_i(t) = drift + vol * (sqrt(rho) * f(t) + sqrt(1-rho) * eps_i(t))
//
// with standard normal f and eps, so the cross-asset correlation inside a
// segment is exactly rho and the partial correlation has the closed form
// rho / (1 + (N-2) rho).
struct RegimeSpec {
  size_t n_assets = 20;
  size_t pre_days = 250;
  size_t crash_days = 30;
  size_t post_days = 250;
  double rho_pre = 0.15;
  double rho_crash = 0.8;
  double rho_post = 0.25;
  double drift_pre = 0.0;    // per-day log drift outside the crash
  double drift_post = 0.0;
  double volatility = 0.01;  // per-day log return standard deviation
  double drawdown = 0.4;     // total crash loss fraction, sets the crash drift
  uint64_t seed = 1;
  Date start_date = Date(2019, 1, 1);

  size_t total_days() const { return pre_days + crash_days + post_days; }
  // Throws ConfigError when a field is out of range.
  void validate() const;
};

// Deterministic for a given spec: the generator is a fixed splitmix64 +
// Box-Muller construction with one substream per asset (plus one for the
// common factor), so panels are bit-identical across platforms and safe to
// regenerate in parallel. Prices start at 100 and stay positive.
PricePanel generate_panel(const RegimeSpec& spec);

}  // namespace crashnet
