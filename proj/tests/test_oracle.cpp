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

#include "oracles.hpp"
#include "rml/oracle.hpp"
#include "rml/validate.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <memory>

using rml::GridAxis;
using rml::Matrix;
using rml::Vector;

namespace {

Vector v1(double a) { return Vector::Constant(1, a); }

}  // namespace

TEST(Grid, Example1Normalizer) {
  const auto g = rml::grid_marginal(rml::make_example1(), {GridAxis{0.8, 3.0, 2048}});
  EXPECT_NEAR(std::exp(g.log_normalizer), 1.0 / 4.567, 1e-3);
  EXPECT_NEAR(g.integral(), 1.0, 1e-8);
  EXPECT_EQ(rml::find_modes(g).size(), 2u);
}

TEST(Grid, Example1NormalizerAgainstOracle) {
  // fine Simpson rule on the long double oracle
  const int n = 20001;
  const long double lo = 0.8L, hi = 3.0L, h = (hi - lo) / (n - 1);
  long double s = 0.0L;
  for (int i = 0; i < n; ++i) {
    const long double w = (i == 0 || i == n - 1) ? 1.0L : (i % 2 ? 4.0L : 2.0L);
    s += w * std::exp(oracle::ex1_log_marginal(lo + i * h));
  }
  s *= h / 3.0L;
  const auto g = rml::grid_marginal(rml::make_example1(), {GridAxis{0.8, 3.0, 4001}});
  EXPECT_NEAR(std::exp(g.log_normalizer), double(s), 1e-6);
}

TEST(Grid, VanishingLikelihoodIsThePrior) {
  const auto p = rml::make_linear("flat", v1(0), Matrix::Identity(1, 1),
                                  Matrix::Zero(1, 1), v1(0), Matrix::Identity(1, 1));
  const auto g = rml::grid_marginal(p, {GridAxis{-6, 6, 401}});
  EXPECT_LT(std::abs(g.mean()(0)), g.axes[0].step());
  EXPECT_NEAR(g.covariance()(0, 0), 1.0, 1e-3);
}

TEST(Grid, RejectsHighDimension) {
  const auto p = rml::make_linear("three", Vector::Zero(3), Matrix::Identity(3, 3),
                                  Matrix::Identity(1, 3), v1(0), Matrix::Identity(1, 1));
  EXPECT_THROW(rml::grid_marginal(p, rml::default_axes(p)), rml::Error);
}

TEST(Conjugate, TextbookUpdate) {
  const auto post = rml::conjugate_posterior(v1(0), Matrix::Identity(1, 1),
                                             Matrix::Identity(1, 1), v1(2),
                                             Matrix::Identity(1, 1));
  EXPECT_NEAR(post.mean(0), 1.0, 1e-14);
  EXPECT_NEAR(post.cov(0, 0), 0.5, 1e-14);
  const auto wide = rml::conjugate_posterior(v1(0), Matrix::Identity(1, 1),
                                             Matrix::Identity(1, 1), v1(2),
                                             Matrix::Constant(1, 1, 1e6));
  EXPECT_NEAR(wide.cov(0, 0), 1.0, 1e-5);
  const auto none = rml::conjugate_posterior(v1(0.3), Matrix::Constant(1, 1, 2.0),
                                             Matrix::Zero(1, 1), v1(5),
                                             Matrix::Identity(1, 1));
  EXPECT_NEAR(none.mean(0), 0.3, 1e-14);
  EXPECT_NEAR(none.cov(0, 0), 2.0, 1e-14);
}

TEST(Conjugate, AgreesWithGrid) {
  const auto p = rml::make_linear("lin", v1(0.5), Matrix::Constant(1, 1, 2.0),
                                  Matrix::Constant(1, 1, 1.5), v1(1.0),
                                  Matrix::Constant(1, 1, 0.5));
  const auto post = rml::conjugate_posterior(p.prior_mean(), p.prior_cov(),
                                             Matrix::Constant(1, 1, 1.5), p.obs(),
                                             p.obs_cov());
  const double sd = std::sqrt(post.cov(0, 0));
  const auto g = rml::grid_marginal(
      p, {GridAxis{post.mean(0) - 12 * sd, post.mean(0) + 12 * sd, 20001}});
  EXPECT_NEAR(g.mean()(0), post.mean(0), 1e-6);
  EXPECT_NEAR(g.covariance()(0, 0), post.cov(0, 0), 1e-6);
}

TEST(Compare, GridSelfConsistency1D) {
  const auto g = rml::grid_marginal(rml::make_example1(), {GridAxis{0.8, 3.0, 2049}});
  std::mt19937_64 rng(1);
  const auto s = rml::sample_from_grid(g, 1000000, rng);
  const auto rep = rml::compare_samples_to_grid(s, g, 64);
  EXPECT_LT(rep.tv_distance, 0.01);
}

TEST(Compare, GridSelfConsistency2D) {
  const auto p = rml::make_example2();
  const auto g = rml::grid_marginal(p, {GridAxis{-4, 4, 401}, GridAxis{-4, 4, 401}});
  std::mt19937_64 rng(2);
  const auto s = rml::sample_from_grid(g, 1000000, rng);
  EXPECT_LT(rml::compare_samples_to_grid(s, g, 50).tv_distance, 0.01);
}

TEST(Compare, PointMassIsFarFromSpreadDensity) {
  const auto g = rml::grid_marginal(rml::make_gauss_linear_toy(), {GridAxis{-6, 6, 401}});
  const std::vector<Vector> s(1000, v1(3.0));
  EXPECT_GT(rml::compare_samples_to_grid(s, g, 64).tv_distance, 0.95);
  EXPECT_THROW(rml::compare_samples_to_grid({}, g, 64), rml::Error);
}

TEST(Modes, Example2Basins) {
  const auto g = rml::grid_marginal(rml::make_example2(),
                                    {GridAxis{-4, 4, 401}, GridAxis{-4, 4, 401}});
  const auto b = rml::basins(g);
  ASSERT_GE(b.masses.size(), 2u);
  double total = 0.0;
  for (double m : b.masses) total += m;
  EXPECT_NEAR(total, 1.0, 1e-8);
  for (std::size_t i = 1; i < b.masses.size(); ++i) EXPECT_GE(b.masses[i - 1], b.masses[i]);
}

TEST(JointGrid, GammaDependence) {
  // d = 2x toy: the conditional spread of d given x is sqrt(gamma (1 - gamma) C_d),
  // and the x-d correlation weakens as gamma grows
  const auto p = rml::make_linear("toy2x", v1(0), Matrix::Identity(1, 1),
                                  Matrix::Constant(1, 1, 2.0), v1(1.0), Matrix::Identity(1, 1));
  double last_corr = 1.0;
  for (double gamma : {0.02, 0.4, 0.9}) {
    rml::HyperParams h;
    h.gamma = gamma;
    const auto g = rml::grid_joint(p, h, GridAxis{-3, 3, 401}, GridAxis{-6, 7, 801});
    EXPECT_NEAR(rml::mean_conditional_sd(g), std::sqrt(gamma * (1 - gamma)), 2e-3) << gamma;
    const double c = std::abs(rml::grid_correlation(g));
    EXPECT_LT(c, last_corr);
    last_corr = c;
  }
}

TEST(ProposalGrid, XMarginalIsPosteriorForLinear) {
  const auto p = rml::make_gauss_linear_toy();
  rml::HyperParams h;
  h.rho = 0.5;
  const auto g = rml::grid_proposal(p, h, GridAxis{-5, 5, 401}, GridAxis{-8, 8, 401});
  EXPECT_NEAR(g.integral(), 1.0, 1e-8);
  EXPECT_NEAR(g.mean()(0), 0.0, 1e-6);
  EXPECT_NEAR(g.covariance()(0, 0), 0.5, 1e-3);
}

TEST(Validate, CorruptedJacobianFails) {
  const auto good = rml::make_example1();
  auto bad_fwd = std::make_shared<rml::ForwardModel>(
      1, 1, [good](const Vector& x) { return good.forward().eval(x); },
      [good](const Vector& x) -> Matrix { return -good.forward().jacobian(x); },
      [good](const Vector& x) { return good.forward().hessians(x); });
  const auto bad = good.with_forward(bad_fwd);
  EXPECT_TRUE(rml::check_jacobian_fd("good", good, 100, 1).passed);
  EXPECT_FALSE(rml::check_jacobian_fd("bad", bad, 100, 1).passed);
}

TEST(Validate, KernelChecks) {
  EXPECT_TRUE(rml::check_scalar_determinant().passed);
  EXPECT_TRUE(rml::check_anamorphosis_roundtrip().passed);
  for (const char* name : {"example1", "example2", "example3"}) {
    const auto p = rml::make_builtin(name);
    EXPECT_TRUE(rml::check_jacobian_fd(name, p, 100, 3, 1e-4).passed) << name;
    EXPECT_TRUE(rml::check_hessian_fd(name, p, 50, 3).passed) << name;
    EXPECT_TRUE(rml::check_quadrature_convergence(name, p).passed) << name;
  }
}

TEST(Validate, BatchMean) {
  std::vector<double> v(1000);
  for (std::size_t i = 0; i < v.size(); ++i) v[i] = (i % 2) ? 1.0 : -1.0;
  const auto [m, se] = rml::batch_mean(v, 50);
  EXPECT_NEAR(m, 0.0, 1e-15);
  EXPECT_NEAR(se, 0.0, 1e-15);
}
