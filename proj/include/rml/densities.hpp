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

#include "rml/model.hpp"

// Unnormalized log-densities. Normalizing constants are dropped everywhere;
// they cancel in every Metropolis-Hastings ratio built from these.

namespace rml {

// gamma: share of C_d attributed to modelization error in the joint target.
// rho:   the matching split used inside the proposal's minimization.
struct HyperParams {
  double gamma = 0.01;
  double rho = 0.5;

  // Both must lie strictly inside (0, 1).
  void validate() const;
};

// -1/2 |x - mu|^2_{C_x} - 1/2 |g(x) - d_obs|^2_{C_d}
double log_target_marginal(const ProblemSpec& p, const Vector& x);

// -1/2 |x - mu|^2_{C_x} - 1/(2 gamma) |g(x) - d|^2_{C_d}
//   - 1/(2 (1 - gamma)) |d - d_obs|^2_{C_d}
double log_target_joint(const ProblemSpec& p, const HyperParams& h,
                        const Vector& x, const Vector& d);

// Log-density of the unconditional draw (x_uc, d_uc) ~ N(mu, C_x) x N(d_obs, C_d).
double log_prior_joint(const ProblemSpec& p, const Vector& x_uc,
                       const Vector& d_uc);

}  // namespace rml
