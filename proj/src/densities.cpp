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

#include "rml/densities.hpp"

#include <cmath>

namespace rml {

void HyperParams::validate() const {
  RML_REQUIRE(std::isfinite(gamma) && gamma > 0.0 && gamma < 1.0,
              ErrorCode::InvalidArgument, "gamma must lie strictly in (0, 1)");
  RML_REQUIRE(std::isfinite(rho) && rho > 0.0 && rho < 1.0,
              ErrorCode::InvalidArgument, "rho must lie strictly in (0, 1)");
}

double log_target_marginal(const ProblemSpec& p, const Vector& x) {
  require_size(x, p.dim_x(), "x");
  const Vector r = p.forward().eval(x) - p.obs();
  return -0.5 * p.prior_quad(x - p.prior_mean()) - 0.5 * p.obs_quad(r);
}

double log_target_joint(const ProblemSpec& p, const HyperParams& h,
                        const Vector& x, const Vector& d) {
  require_size(x, p.dim_x(), "x");
  require_size(d, p.dim_d(), "d");
  const Vector model_misfit = p.forward().eval(x) - d;
  return -0.5 * p.prior_quad(x - p.prior_mean()) -
         p.obs_quad(model_misfit) / (2.0 * h.gamma) -
         p.obs_quad(d - p.obs()) / (2.0 * (1.0 - h.gamma));
}

double log_prior_joint(const ProblemSpec& p, const Vector& x_uc,
                       const Vector& d_uc) {
  require_size(x_uc, p.dim_x(), "x_uc");
  require_size(d_uc, p.dim_d(), "d_uc");
  return -0.5 * p.prior_quad(x_uc - p.prior_mean()) -
         0.5 * p.obs_quad(d_uc - p.obs());
}

}  // namespace rml
