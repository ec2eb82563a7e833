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

#include "rml/sampler.hpp"

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

// Property checks shared by the `validate` subcommand and the tests.

namespace rml {

struct CheckResult {
  std::string name;
  bool passed = false;
  double value = 0.0;      // measured quantity
  double tolerance = 0.0;  // pass threshold for value
  std::string detail;
};

// Worst relative error ||J - J_fd|| / (||J|| + 1e-8) of the Jacobian
// against central differences of eval, at n_points prior draws.
CheckResult check_jacobian_fd(const std::string& label, const ProblemSpec& p,
                              int n_points, std::uint64_t seed, double tol = 1e-5);

// Same for the second derivatives against differences of the Jacobian.
CheckResult check_hessian_fd(const std::string& label, const ProblemSpec& p,
                             int n_points, std::uint64_t seed, double tol = 1e-4);

// Sup-norm of (x_uc, d_uc) - inverse_transform(minimize(x_uc, d_uc)) over
// n_draws converged proposals.
CheckResult check_roundtrip(const std::string& label, const ProblemSpec& p,
                            const HyperParams& h, const OptSettings& s, int n_draws,
                            std::uint64_t seed, double tol = 1e-6);

// Largest |z - to_gaussian(to_original(z))| over z in [-5, 5].
CheckResult check_anamorphosis_roundtrip(double tol = 1e-8);

// exp(log|det J|) for scalar linear problems against (1/rho)(1 + G^2 C_x / C_d).
CheckResult check_scalar_determinant(double tol = 1e-10);

// Largest difference of x* between rho values for the same unconditional
// draws, minimizing jointly over (x, d).
CheckResult check_rho_invariance(const std::string& label, const ProblemSpec& p,
                                 const OptSettings& s, int n_draws, std::uint64_t seed,
                                 double tol = 1e-6);

// Relative change of the normalizer when the grid resolution is doubled.
CheckResult check_quadrature_convergence(const std::string& label, const ProblemSpec& p,
                                         double tol = 1e-6);

// Mean of the first n_batches * floor(size / n_batches) values and its
// batch-means standard error, for autocorrelated chain output.
std::pair<double, double> batch_mean(const std::vector<double>& v, int n_batches = 50);

// Chain on the 1-D Gauss-linear toy: chain mean and variance within 4
// batch-means standard errors of the conjugate posterior.
CheckResult check_gauss_linear_exactness(std::int64_t n_steps, std::uint64_t seed,
                                         int workers = 1);

// Acceptance rates of example 2 at rho = 0.35 and 0.60 within one percentage point.
CheckResult check_example2_rho_sweep(std::int64_t n_steps, std::uint64_t seed,
                                     int workers = 1);

struct ValidateOptions {
  int fd_points = 100;
  int roundtrip_draws = 1000;
  std::int64_t chain_steps = 100000;
  std::uint64_t seed = 2024;
  int workers = 1;
  bool rate_checks = false;  // adds check_example2_rho_sweep
};

std::vector<CheckResult> run_validation_suite(const ValidateOptions& o);

}  // namespace rml
