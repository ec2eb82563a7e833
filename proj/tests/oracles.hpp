/*
 *     Copyright 2026 The rml authors
 *
 *   Licensed under the Apache License, Version 2.0 (the "License");
 *   you may not use this file except in compliance with the License.
 *   You may obtain a copy of the License at
 *
 *       http://www.apache.org/licenses/LICENSE-2.0
 *
 *   Unless required by applicable law or agreed to in writing, software
 *   distributed under the License is distributed on an "AS IS" BASIS,
 *   WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 *   See the License for the specific language governing permissions and
 *   limitations under the License.
 */

#pragma once

// Independent reference evaluations in long double. These deliberately do
// not call into the library.

#include <cmath>
#include <numbers>

namespace oracle {

inline long double ex1_g(long double x) {
  const long double u = x - 2.0L * std::numbers::pi_v<long double> / 3.0L;
  return 1.0L - 4.5L * u * u;
}

inline long double ex1_log_marginal(long double x) {
  const long double r = ex1_g(x) - 0.8L;
  return -0.5L * (x - 1.9L) * (x - 1.9L) / 0.1L - 0.5L * r * r / 0.01L;
}

inline long double ex1_log_joint(long double gamma, long double x, long double d) {
  const long double r1 = ex1_g(x) - d;
  const long double r2 = d - 0.8L;
  return -0.5L * (x - 1.9L) * (x - 1.9L) / 0.1L -
         r1 * r1 / (2.0L * gamma * 0.01L) - r2 * r2 / (2.0L * (1.0L - gamma) * 0.01L);
}

inline long double ex2_g(long double x1, long double x2) {
  constexpr long double w[4][2] = {
      {0.62L, -0.09L}, {0.17L, -0.04L}, {-0.76L, 0.16L}, {-0.89L, 0.78L}};
  long double s = 0.0L;
  for (const auto& c : w) {
    const long double a = x1 - c[0];
    const long double b = x2 - c[1];
    s += std::exp(-(a * a + b * b) / (2.0L * 0.05L));
  }
  return s;
}

// Standard normal CDF through erfc, accurate in the tails.
inline long double phi_cdf(long double z) {
  return 0.5L * std::erfc(-z / std::numbers::sqrt2_v<long double>);
}

// Normal score of a unit exponential variate.
inline long double exp_to_z(long double x) {
  const long double p = -std::expm1(-x);
  // bisection on phi_cdf, independent of any library inverse
  long double lo = -40.0L, hi = 40.0L;
  for (int i = 0; i < 200; ++i) {
    const long double mid = 0.5L * (lo + hi);
    (phi_cdf(mid) < p ? lo : hi) = mid;
  }
  return 0.5L * (lo + hi);
}

// Latent z to the exponential variate: -log(1 - Phi(z)).
inline long double z_to_exp(long double z) { return -std::log(phi_cdf(-z)); }

}  // namespace oracle
