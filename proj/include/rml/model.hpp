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

#include "rml/types.hpp"

#include <Eigen/Cholesky>

#include <functional>
#include <memory>
#include <optional>
#include <random>
#include <string>
#include <string_view>

namespace rml {

enum class HessianSource { Analytic, FiniteDifference, Unavailable };

/**
 * Observation operator g: R^dim_x -> R^dim_d with its Jacobian and, when
 * available, its second derivatives.
 *
 * Closures must be pure: they are called concurrently from sampler workers.
 * When no analytic second derivative is supplied, it can be synthesized by
 * central differences of the Jacobian (with_finite_difference_hessians()).
 */
class ForwardModel {
 public:
  using EvalFn = std::function<Vector(const Vector&)>;
  using JacobianFn = std::function<Matrix(const Vector&)>;
  using HessianFn = std::function<ResponseHessians(const Vector&)>;

  ForwardModel(Eigen::Index dim_x, Eigen::Index dim_d, EvalFn eval,
               JacobianFn jacobian, HessianFn hessians = {});

  // Copy with second derivatives synthesized from the Jacobian, step
  // h_k = 1e-5 * (1 + |x_k|). No-op if analytic ones are present.
  ForwardModel with_finite_difference_hessians() const;

  Eigen::Index dim_x() const noexcept { return dim_x_; }
  Eigen::Index dim_d() const noexcept { return dim_d_; }
  HessianSource hessian_source() const noexcept { return source_; }

  Vector eval(const Vector& x) const;
  Matrix jacobian(const Vector& x) const;
  // Throws ErrorCode::Unsupported when hessian_source() is Unavailable.
  ResponseHessians hessians(const Vector& x) const;

 private:
  Eigen::Index dim_x_;
  Eigen::Index dim_d_;
  EvalFn eval_;
  JacobianFn jacobian_;
  HessianFn hessians_;
  HessianSource source_;
};

// Central-difference approximations used by finite-difference synthesis
// and by the consistency checks.
Matrix fd_jacobian(const ForwardModel::EvalFn& f, const Vector& x,
                   double rel_step = 1e-6);
ResponseHessians fd_hessians(const ForwardModel::JacobianFn& jac,
                             const Vector& x, Eigen::Index dim_d,
                             double rel_step = 1e-5);

/**
 * One inverse problem: Gaussian prior N(prior_mean, prior_cov), data
 * obs = g(x) + e with e ~ N(0, obs_cov).
 *
 * Cholesky factors of both covariances are computed once at construction;
 * every quadratic form below goes through them.
 */
class ProblemSpec {
 public:
  ProblemSpec(std::string name, Vector prior_mean, Matrix prior_cov, Vector obs,
              Matrix obs_cov, std::shared_ptr<const ForwardModel> forward);

  const std::string& name() const noexcept { return name_; }
  Eigen::Index dim_x() const noexcept { return prior_mean_.size(); }
  Eigen::Index dim_d() const noexcept { return obs_.size(); }

  const Vector& prior_mean() const noexcept { return prior_mean_; }
  const Matrix& prior_cov() const noexcept { return prior_cov_; }
  const Vector& obs() const noexcept { return obs_; }
  const Matrix& obs_cov() const noexcept { return obs_cov_; }
  const ForwardModel& forward() const noexcept { return *forward_; }
  std::shared_ptr<const ForwardModel> forward_ptr() const { return forward_; }

  // v^T C_x^{-1} v and r^T C_d^{-1} r.
  double prior_quad(const Vector& v) const;
  double obs_quad(const Vector& r) const;
  // C_x^{-1} v and C_d^{-1} r.
  Vector solve_prior(const Vector& v) const;
  Vector solve_obs(const Vector& r) const;
  // Lower Cholesky factors.
  Matrix prior_chol() const { return prior_llt_.matrixL(); }
  Matrix obs_chol() const { return obs_llt_.matrixL(); }

  Vector sample_prior(std::mt19937_64& rng) const;
  Vector sample_obs_noise(std::mt19937_64& rng) const;

  // Same prior and data, different operator (used for fixtures and checks).
  ProblemSpec with_forward(std::shared_ptr<const ForwardModel> forward) const;

 private:
  std::string name_;
  Vector prior_mean_;
  Matrix prior_cov_;
  Vector obs_;
  Matrix obs_cov_;
  std::shared_ptr<const ForwardModel> forward_;
  Eigen::LLT<Matrix> prior_llt_;
  Eigen::LLT<Matrix> obs_llt_;
};

/**
 * Scalar Gaussian anamorphosis z = F_z^{-1}(F_x(x)) between a non-Gaussian
 * variable x and a standard normal z.
 */
struct Anamorphosis {
  std::function<double(double)> forward_cdf;  // F_x
  std::function<double(double)> inverse_cdf;  // F_x^{-1}

  static double gauss_cdf(double z);
  static double gauss_inv_cdf(double p);

  // Probabilities are clamped to [1e-15, 1 - 1e-15] before inversion.
  double to_gaussian(double x) const;
  double to_original(double z) const;

  // Exponential distribution with the given mean.
  static Anamorphosis exponential(double mean);
};

struct TransformedProblem {
  ProblemSpec problem;
  Anamorphosis anamorphosis;
};

// Bimodal 1-D problem: mu = 1.9, d_obs = 0.8, var_x = 0.1, var_d = 0.01,
// g(x) = 1 - 9 (x - 2 pi / 3)^2 / 2.
ProblemSpec make_example1();

// 2-D problem with a sum of four Gaussian kernels as observation operator.
ProblemSpec make_example2();

// Exponential(1) prior observed directly with N(0, 0.36) noise, d_obs = 1,
// reparametrized as a standard normal latent z with g(z) = F_x^{-1}(Phi(z)).
TransformedProblem make_example3_transformed();

// mu = 0, C_x = 1, g(x) = x, d_obs = 0, C_d = 1.
ProblemSpec make_gauss_linear_toy();

// Linear operator g(x) = G x.
ProblemSpec make_linear(std::string name, Vector prior_mean, Matrix prior_cov,
                        Matrix G, Vector obs, Matrix obs_cov);

// "example1", "example2", "example3", "gauss-linear".
ProblemSpec make_builtin(std::string_view name);

// Exact log-density (up to a constant) of the untransformed example-3
// posterior in x: -x - (x - 1)^2 / (2 * 0.36) for x >= 0.
double example3_log_posterior_original(double x);

}  // namespace rml
