#pragma once

#include <cstdint>
#include <span>
#include <vector>

namespace modnav::train {

struct GaeResult {
  std::vector<double> advantages;
  std::vector<double> returns;
};

// Backward recursion  delta_t = r_t + gamma*V_{t+1}*(1-done_t) - V_t,
// A_t = delta_t + gamma*lambda*(1-done_t)*A_{t+1}, returns = A + V.
// V_{T} is `bootstrap_value`.
GaeResult compute_gae(std::span<const double> rewards,
                      std::span<const double> values,
                      std::span<const uint8_t> terminals,
                      double bootstrap_value, double gamma, double lambda);

// In-place zero-mean unit-std normalization (1e-8 floor on the std).
void normalize_advantages(std::span<double> advantages);

}  // namespace modnav::train
