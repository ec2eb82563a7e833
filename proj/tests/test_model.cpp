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
#include "rml/model.hpp"
#include "rml/normal.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

using rml::Matrix;
using rml::Vector;

namespace {

Vector v1(double a) { return Vector::Constant(1, a); }
Vector v2(double a, double b) {
  Vector v(2);
  v << a, b;
  return v;
}

}  // namespace

TEST(Example1Model, VertexValueAndSlope) {
  const auto p = rml::make_example1();
  const double c = 2.0 * std::numbers::pi / 3.0;
  EXPECT_NEAR(p.forward().eval(v1(c))(0), 1.0, 1e-15);
  EXPECT_NEAR(p.forward().jacobian(v1(c))(0, 0), 0.0, 1e-15);
}

TEST(Example1Model, MatchesOracle) {
  const auto p = rml::make_example1();
  for (double x : {0.8, 1.5, 1.9, 2.3, 3.0}) {
    EXPECT_NEAR(p.forward().eval(v1(x))(0), double(oracle::ex1_g(x)), 1e-13) << x;
  }
  // the quoted six-digit value
  EXPECT_NEAR(p.forward().eval(v1(1.9))(0), 0.829941, 1e-5);
}

TEST(Example2Model, CenteredTermAndFarField) {
  const auto p = rml::make_example2();
  EXPECT_GE(p.forward().eval(v2(0.62, -0.09))(0), 1.0);
  EXPECT_LT(p.forward().eval(v2(10, 10))(0), 1e-12);
}

TEST(Example2Model, MatchesOracle) {
  const auto p = rml::make_example2();
  const Vector pts[] = {v2(0.62, -0.09), v2(0, 0), v2(-0.5, 0.4), v2(0.3, 0.9)};
  for (const auto& x : pts) {
    EXPECT_NEAR(p.forward().eval(x)(0), double(oracle::ex2_g(x(0), x(1))), 1e-13);
  }
  // sum of the four kernels at the first center
  EXPECT_NEAR(p.forward().eval(v2(0.62, -0.09))(0), 1.1287349065, 1e-9);
}

TEST(Example3Model, AnamorphosisMedian) {
  const auto a = rml::make_example3_transformed().anamorphosis;
  EXPECT_NEAR(a.to_gaussian(std::log(2.0)), 0.0, 1e-12);
  EXPECT_NEAR(a.to_original(0.0), 0.693147, 1e-6);
}

TEST(Example3Model, AnamorphosisAgainstOracle) {
  const auto a = rml::make_example3_transformed().anamorphosis;
  const double x_at_one = double(oracle::z_to_exp(1.0L));
  EXPECT_NEAR(x_at_one, 1.8410216450, 1e-9);
  EXPECT_NEAR(a.to_gaussian(x_at_one), 1.0, 1e-10);
  for (double x : {0.01, 0.3, 1.0, 2.5, 6.0}) {
    EXPECT_NEAR(a.to_gaussian(x), double(oracle::exp_to_z(x)), 1e-10) << x;
  }
  for (double z : {-3.0, -1.0, 0.5, 2.0, 4.0}) {
    EXPECT_NEAR(a.to_original(z), double(oracle::z_to_exp(z)), 1e-10) << z;
  }
}

TEST(Example3Model, ForwardIsTheAnamorphosis) {
  const auto tp = rml::make_example3_transformed();
  for (double z : {-2.0, -1.0, 0.0, 0.5, 3.0}) {
    EXPECT_NEAR(tp.problem.forward().eval(v1(z))(0), tp.anamorphosis.to_original(z), 1e-10);
  }
  EXPECT_NEAR(tp.problem.forward().eval(v1(-1.0))(0), 0.172753779023, 1e-11);
  EXPECT_NEAR(tp.problem.forward().jacobian(v1(0.5))(0, 0), 1.14107777037, 1e-10);
  EXPECT_NEAR(tp.problem.forward().hessians(v1(0.5))[0](0, 0), 0.731519592844, 1e-10);
}

TEST(Normal, InverseCdf) {
  EXPECT_NEAR(rml::normal::inv_cdf(0.975), 1.95996398454, 1e-10);
  EXPECT_NEAR(rml::normal::inv_cdf(1e-10), -6.36134090240, 1e-9);
  for (double p : {1e-12, 1e-4, 0.2, 0.5, 0.9, 1 - 1e-9}) {
    EXPECT_NEAR(double(oracle::phi_cdf(rml::normal::inv_cdf(p))), p, 1e-12 + 1e-11 * p);
  }
}

TEST(ForwardModel, FiniteDifferenceJacobianAgrees) {
  for (const char* name : {"example1", "example2", "example3"}) {
    const auto p = rml::make_builtin(name);
    Vector x = p.prior_mean().array() + 0.3;
    const Matrix fd = rml::fd_jacobian(
        [&](const Vector& v) { return p.forward().eval(v); }, x);
    EXPECT_LT((fd - p.forward().jacobian(x)).norm(), 1e-6) << name;
  }
}

TEST(ProblemSpec, RejectsBadCovariance) {
  auto fwd = rml::make_gauss_linear_toy().forward_ptr();
  EXPECT_THROW(rml::ProblemSpec("bad", v1(0), Matrix::Constant(1, 1, -1.0), v1(0),
                                Matrix::Identity(1, 1), fwd),
               rml::Error);
  EXPECT_THROW(rml::make_builtin("nope"), rml::Error);
}

TEST(ProblemSpec, PriorSampleMean) {
  const auto p = rml::make_example1();
  std::mt19937_64 rng(7);
  const int n = 100000;
  double s = 0.0;
  for (int i = 0; i < n; ++i) s += p.sample_prior(rng)(0);
  EXPECT_LT(std::abs(s / n - 1.9), 4.0 * std::sqrt(0.1 / n));
}
