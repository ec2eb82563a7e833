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

#include "rml/densities.hpp"

#include <utility>

namespace rml {

struct OptSettings {
  int max_iters = 200;
  double grad_tol = 1e-8;    // sup-norm of the gradient
  double step_tol = 1e-12;   // relative step-size floor
  double lm_lambda0 = 1e-3;
  double lm_shrink = 0.33;
  double lm_grow = 3.0;
  // Take the Newton step (Gauss-Newton matrix plus the residual-weighted
  // second-derivative term) whenever it is positive definite.
  bool exact_hessian = true;

  void validate() const;
};

struct OptResult {
  Vector x_star;
  Vector d_star;
  bool converged = false;
  int iters = 0;
  double final_grad_norm = 0.0;
  double objective_value = 0.0;
};

// 1/2 |x - x_uc|^2_{C_x} + 1/(2 rho) |g(x) - d|^2_{C_d}
//   + 1/(2 (1 - rho)) |d - d_uc|^2_{C_d}
double augmented_objective(const ProblemSpec& p, const HyperParams& h,
                           const Vector& x, const Vector& d, const Vector& x_uc,
                           const Vector& d_uc);

// Gradient of augmented_objective, stacked as [d/dx; d/dd].
Vector augmented_gradient(const ProblemSpec& p, const HyperParams& h,
                          const Vector& x, const Vector& d, const Vector& x_uc,
                          const Vector& d_uc);

// Exact minimizer over d for fixed x: rho d_uc + (1 - rho) g(x).
Vector eliminate_d(const ProblemSpec& p, const HyperParams& h, const Vector& x,
                   const Vector& d_uc);

// Residuals of the two stationarity conditions at (x, d):
//   x - x_uc + (1/rho) C_x G^T C_d^{-1} (g(x) - d)
//   d - rho d_uc - (1 - rho) g(x)
std::pair<Vector, Vector> stationarity_residuals(const ProblemSpec& p,
                                                 const HyperParams& h,
                                                 const Vector& x,
                                                 const Vector& d,
                                                 const Vector& x_uc,
                                                 const Vector& d_uc);

// Minimizes augmented_objective from x0 = x_uc, d0 = eliminate_d(x_uc).
// The search runs in x only, with d eliminated exactly; the reduced
// objective is 1/2 |x - x_uc|^2_{C_x} + 1/2 |g(x) - d_uc|^2_{C_d}.
// Non-convergence is reported in the result, not thrown.
OptResult minimize(const ProblemSpec& p, const HyperParams& h,
                   const OptSettings& s, const Vector& x_uc,
                   const Vector& d_uc);

// Same minimization carried out jointly over (x, d), without elimination.
OptResult minimize_joint(const ProblemSpec& p, const HyperParams& h,
                         const OptSettings& s, const Vector& x_uc,
                         const Vector& d_uc);

// Minimizer of the model-only misfit
//   1/2 |x - x_uc|^2_{C_x} + 1/2 |g(x) - d_uc|^2_{C_d}
// as used by the marginal sampler. d_star is set to d_uc.
OptResult minimize_model_misfit(const ProblemSpec& p, const OptSettings& s,
                                const Vector& x_uc, const Vector& d_uc);

}  // namespace rml
