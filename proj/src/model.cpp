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

#include "rml/model.hpp"

#include "rml/normal.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <numbers>

namespace rml {

const char* to_string(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::InvalidArgument: return "invalid argument";
    case ErrorCode::DimensionMismatch: return "dimension mismatch";
    case ErrorCode::NotPositiveDefinite: return "not positive definite";
    case ErrorCode::Unsupported: return "unsupported";
    case ErrorCode::Singular: return "singular";
    case ErrorCode::Evaluation: return "evaluation failure";
    case ErrorCode::Initialization: return "initialization failure";
    case ErrorCode::Io: return "i/o failure";
    case ErrorCode::Config: return "invalid configuration";
  }
  return "unknown error";
}

// ---------------------------------------------------------------------------
// ForwardModel

ForwardModel::ForwardModel(Eigen::Index dim_x, Eigen::Index dim_d, EvalFn eval,
                           JacobianFn jacobian, HessianFn hessians)
    : dim_x_(dim_x),
      dim_d_(dim_d),
      eval_(std::move(eval)),
      jacobian_(std::move(jacobian)),
      hessians_(std::move(hessians)),
      source_(hessians_ ? HessianSource::Analytic : HessianSource::Unavailable) {
  RML_REQUIRE(dim_x > 0 && dim_d > 0, ErrorCode::InvalidArgument,
              "forward model dimensions must be positive");
  RML_REQUIRE(eval_ && jacobian_, ErrorCode::InvalidArgument,
              "forward model needs eval and jacobian");
}

ForwardModel ForwardModel::with_finite_difference_hessians() const {
  if (source_ != HessianSource::Unavailable) return *this;
  ForwardModel out = *this;
  const JacobianFn jac = jacobian_;
  const Eigen::Index nd = dim_d_;
  out.hessians_ = [jac, nd](const Vector& x) { return fd_hessians(jac, x, nd); };
  out.source_ = HessianSource::FiniteDifference;
  return out;
}

Vector ForwardModel::eval(const Vector& x) const {
  require_size(x, dim_x_, "forward model input");
  Vector y = eval_(x);
  RML_REQUIRE(y.size() == dim_d_, ErrorCode::Evaluation,
              "forward model returned wrong output length");
  RML_REQUIRE(y.allFinite(), ErrorCode::Evaluation,
              "forward model returned a non-finite value");
  return y;
}

Matrix ForwardModel::jacobian(const Vector& x) const {
  require_size(x, dim_x_, "forward model input");
  Matrix G = jacobian_(x);
  RML_REQUIRE(G.rows() == dim_d_ && G.cols() == dim_x_, ErrorCode::Evaluation,
              "forward model jacobian has wrong shape");
  RML_REQUIRE(G.allFinite(), ErrorCode::Evaluation,
              "forward model jacobian is not finite");
  return G;
}

ResponseHessians ForwardModel::hessians(const Vector& x) const {
  RML_REQUIRE(source_ != HessianSource::Unavailable, ErrorCode::Unsupported,
              "forward model has no second derivatives; provide them "
              "analytically or enable finite-difference synthesis");
  require_size(x, dim_x_, "forward model input");
  ResponseHessians h = hessians_(x);
  RML_REQUIRE(static_cast<Eigen::Index>(h.size()) == dim_d_,
              ErrorCode::Evaluation, "second-derivative tensor has wrong shape");
  for (const auto& s : h) {
    RML_REQUIRE(s.rows() == dim_x_ && s.cols() == dim_x_,
                ErrorCode::Evaluation, "second-derivative slice has wrong shape");
  }
  return h;
}

Matrix fd_jacobian(const ForwardModel::EvalFn& f, const Vector& x,
                   double rel_step) {
  const Vector f0 = f(x);
  Matrix J(f0.size(), x.size());
  Vector xp = x;
  for (Eigen::Index k = 0; k < x.size(); ++k) {
    const double h = rel_step * (1.0 + std::abs(x(k)));
    xp(k) = x(k) + h;
    const Vector fp = f(xp);
    xp(k) = x(k) - h;
    const Vector fm = f(xp);
    xp(k) = x(k);
    J.col(k) = (fp - fm) / (2.0 * h);
  }
  return J;
}

ResponseHessians fd_hessians(const ForwardModel::JacobianFn& jac,
                             const Vector& x, Eigen::Index dim_d,
                             double rel_step) {
  const Eigen::Index n = x.size();
  ResponseHessians out(static_cast<std::size_t>(dim_d), Matrix::Zero(n, n));
  Vector xp = x;
  for (Eigen::Index b = 0; b < n; ++b) {
    const double h = rel_step * (1.0 + std::abs(x(b)));
    xp(b) = x(b) + h;
    const Matrix Gp = jac(xp);
    xp(b) = x(b) - h;
    const Matrix Gm = jac(xp);
    xp(b) = x(b);
    const Matrix dG = (Gp - Gm) / (2.0 * h);
    for (Eigen::Index i = 0; i < dim_d; ++i) {
      out[static_cast<std::size_t>(i)].col(b) = dG.row(i).transpose();
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// ProblemSpec

namespace {

bool is_symmetric(const Matrix& m) {
  return m.rows() == m.cols() &&
         (m - m.transpose()).cwiseAbs().maxCoeff() <=
             1e-12 * (1.0 + m.cwiseAbs().maxCoeff());
}

Vector standard_normal(std::mt19937_64& rng, Eigen::Index n) {
  std::normal_distribution<double> nd(0.0, 1.0);
  Vector z(n);
  for (Eigen::Index i = 0; i < n; ++i) z(i) = nd(rng);
  return z;
}

}  // namespace

ProblemSpec::ProblemSpec(std::string name, Vector prior_mean, Matrix prior_cov,
                         Vector obs, Matrix obs_cov,
                         std::shared_ptr<const ForwardModel> forward)
    : name_(std::move(name)),
      prior_mean_(std::move(prior_mean)),
      prior_cov_(std::move(prior_cov)),
      obs_(std::move(obs)),
      obs_cov_(std::move(obs_cov)),
      forward_(std::move(forward)) {
  RML_REQUIRE(forward_ != nullptr, ErrorCode::InvalidArgument,
              "problem needs a forward model");
  RML_REQUIRE(prior_mean_.size() > 0 && obs_.size() > 0,
              ErrorCode::InvalidArgument, "problem dimensions must be positive");
  RML_REQUIRE(prior_cov_.rows() == dim_x() && prior_cov_.cols() == dim_x(),
              ErrorCode::DimensionMismatch, "prior covariance shape");
  RML_REQUIRE(obs_cov_.rows() == dim_d() && obs_cov_.cols() == dim_d(),
              ErrorCode::DimensionMismatch, "observation covariance shape");
  RML_REQUIRE(forward_->dim_x() == dim_x() && forward_->dim_d() == dim_d(),
              ErrorCode::DimensionMismatch,
              "forward model dimensions do not match the problem");
  RML_REQUIRE(prior_mean_.allFinite() && obs_.allFinite(),
              ErrorCode::InvalidArgument, "non-finite prior mean or data");
  RML_REQUIRE(is_symmetric(prior_cov_), ErrorCode::NotPositiveDefinite,
              "prior covariance is not symmetric");
  RML_REQUIRE(is_symmetric(obs_cov_), ErrorCode::NotPositiveDefinite,
              "observation covariance is not symmetric");
  prior_llt_.compute(prior_cov_);
  RML_REQUIRE(prior_llt_.info() == Eigen::Success, ErrorCode::NotPositiveDefinite,
              "prior covariance is not positive definite");
  obs_llt_.compute(obs_cov_);
  RML_REQUIRE(obs_llt_.info() == Eigen::Success, ErrorCode::NotPositiveDefinite,
              "observation covariance is not positive definite");
}

double ProblemSpec::prior_quad(const Vector& v) const {
  const Vector w = prior_llt_.matrixL().solve(v);
  return w.squaredNorm();
}

double ProblemSpec::obs_quad(const Vector& r) const {
  const Vector w = obs_llt_.matrixL().solve(r);
  return w.squaredNorm();
}

Vector ProblemSpec::solve_prior(const Vector& v) const {
  return prior_llt_.solve(v);
}

Vector ProblemSpec::solve_obs(const Vector& r) const {
  return obs_llt_.solve(r);
}

Vector ProblemSpec::sample_prior(std::mt19937_64& rng) const {
  return prior_mean_ + prior_llt_.matrixL() * standard_normal(rng, dim_x());
}

Vector ProblemSpec::sample_obs_noise(std::mt19937_64& rng) const {
  return obs_llt_.matrixL() * standard_normal(rng, dim_d());
}

ProblemSpec ProblemSpec::with_forward(
    std::shared_ptr<const ForwardModel> forward) const {
  return ProblemSpec(name_, prior_mean_, prior_cov_, obs_, obs_cov_,
                     std::move(forward));
}

// ---------------------------------------------------------------------------
// Anamorphosis

double Anamorphosis::gauss_cdf(double z) { return normal::cdf(z); }

double Anamorphosis::gauss_inv_cdf(double p) { return normal::inv_cdf(p); }

double Anamorphosis::to_gaussian(double x) const {
  return gauss_inv_cdf(forward_cdf(x));
}

double Anamorphosis::to_original(double z) const {
  const double p =
      std::clamp(gauss_cdf(z), normal::kProbFloor, 1.0 - normal::kProbFloor);
  return inverse_cdf(p);
}

Anamorphosis Anamorphosis::exponential(double mean) {
  RML_REQUIRE(mean > 0.0, ErrorCode::InvalidArgument,
              "exponential mean must be positive");
  Anamorphosis a;
  a.forward_cdf = [mean](double x) {
    return x <= 0.0 ? 0.0 : -std::expm1(-x / mean);
  };
  a.inverse_cdf = [mean](double p) {
    p = std::clamp(p, normal::kProbFloor, 1.0 - normal::kProbFloor);
    return -mean * std::log1p(-p);
  };
  return a;
}

// ---------------------------------------------------------------------------
// Builtin problems

ProblemSpec make_example1() {
  constexpr double c = 2.0 * std::numbers::pi / 3.0;
  auto fwd = std::make_shared<ForwardModel>(
      1, 1,
      [](const Vector& x) {
        const double u = x(0) - c;
        return Vector::Constant(1, 1.0 - 4.5 * u * u);
      },
      [](const Vector& x) { return Matrix::Constant(1, 1, -9.0 * (x(0) - c)); },
      [](const Vector&) { return ResponseHessians{Matrix::Constant(1, 1, -9.0)}; });
  return ProblemSpec("example1", Vector::Constant(1, 1.9),
                     Matrix::Constant(1, 1, 0.1), Vector::Constant(1, 0.8),
                     Matrix::Constant(1, 1, 0.01), std::move(fwd));
}

namespace {

constexpr std::array<std::array<double, 2>, 4> kCenters = {
    {{0.62, -0.09}, {0.17, -0.04}, {-0.76, 0.16}, {-0.89, 0.78}}};
constexpr double kKernelWidth = 0.05;

}  // namespace

ProblemSpec make_example2() {
  auto kernel = [](const Vector& x, const std::array<double, 2>& w,
                   Eigen::Vector2d& u) {
    u << x(0) - w[0], x(1) - w[1];
    return std::exp(-u.squaredNorm() / (2.0 * kKernelWidth));
  };
  auto fwd = std::make_shared<ForwardModel>(
      2, 1,
      [kernel](const Vector& x) {
        Eigen::Vector2d u;
        double s = 0.0;
        for (const auto& w : kCenters) s += kernel(x, w, u);
        return Vector::Constant(1, s);
      },
      [kernel](const Vector& x) {
        Eigen::Vector2d u;
        Matrix G = Matrix::Zero(1, 2);
        for (const auto& w : kCenters) {
          const double e = kernel(x, w, u);
          G.row(0) -= (e / kKernelWidth) * u.transpose();
        }
        return G;
      },
      [kernel](const Vector& x) {
        Eigen::Vector2d u;
        Matrix H = Matrix::Zero(2, 2);
        for (const auto& w : kCenters) {
          const double e = kernel(x, w, u);
          H += e * (u * u.transpose() / (kKernelWidth * kKernelWidth) -
                    Matrix::Identity(2, 2) / kKernelWidth);
        }
        return ResponseHessians{H};
      });
  return ProblemSpec("example2", Vector::Zero(2), Matrix::Identity(2, 2),
                     Vector::Constant(1, 1.1), Matrix::Constant(1, 1, 0.05),
                     std::move(fwd));
}

TransformedProblem make_example3_transformed() {
  // g(z) = F_x^{-1}(Phi(z)) = -log(1 - Phi(z)) = -log Phi(-z) for the unit
  // exponential. With m(z) = phi(z) / Phi(-z): g' = m, g'' = m (m - z).
  auto mills = [](double z) { return normal::pdf(z) / normal::survival(z); };
  auto fwd = std::make_shared<ForwardModel>(
      1, 1,
      [](const Vector& z) {
        return Vector::Constant(1, -std::log(normal::survival(z(0))));
      },
      [mills](const Vector& z) { return Matrix::Constant(1, 1, mills(z(0))); },
      [mills](const Vector& z) {
        const double m = mills(z(0));
        return ResponseHessians{Matrix::Constant(1, 1, m * (m - z(0)))};
      });
  ProblemSpec p("example3", Vector::Zero(1), Matrix::Identity(1, 1),
                Vector::Constant(1, 1.0), Matrix::Constant(1, 1, 0.36),
                std::move(fwd));
  return TransformedProblem{std::move(p), Anamorphosis::exponential(1.0)};
}

double example3_log_posterior_original(double x) {
  if (x < 0.0) return -std::numeric_limits<double>::infinity();
  return -x - (x - 1.0) * (x - 1.0) / (2.0 * 0.36);
}

ProblemSpec make_linear(std::string name, Vector prior_mean, Matrix prior_cov,
                        Matrix G, Vector obs, Matrix obs_cov) {
  const Eigen::Index nx = prior_mean.size();
  const Eigen::Index nd = obs.size();
  RML_REQUIRE(G.rows() == nd && G.cols() == nx, ErrorCode::DimensionMismatch,
              "linear operator must be dim_d x dim_x");
  auto fwd = std::make_shared<ForwardModel>(
      nx, nd, [G](const Vector& x) -> Vector { return G * x; },
      [G](const Vector&) { return G; },
      [nx, nd](const Vector&) {
        return ResponseHessians(static_cast<std::size_t>(nd), Matrix::Zero(nx, nx));
      });
  return ProblemSpec(std::move(name), std::move(prior_mean),
                     std::move(prior_cov), std::move(obs), std::move(obs_cov),
                     std::move(fwd));
}

ProblemSpec make_gauss_linear_toy() {
  return make_linear("gauss-linear", Vector::Zero(1), Matrix::Identity(1, 1),
                     Matrix::Identity(1, 1), Vector::Zero(1),
                     Matrix::Identity(1, 1));
}

ProblemSpec make_builtin(std::string_view name) {
  if (name == "example1") return make_example1();
  if (name == "example2") return make_example2();
  if (name == "example3") return make_example3_transformed().problem;
  if (name == "gauss-linear") return make_gauss_linear_toy();
  throw Error(ErrorCode::InvalidArgument,
              "unknown problem '" + std::string(name) +
                  "' (expected example1, example2, example3 or gauss-linear)");
}

}  // namespace rml
