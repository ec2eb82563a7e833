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
#include "rml/io.hpp"
#include "rml/sampler.hpp"

#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <limits>
#include <memory>
#include <sstream>

using rml::ChainSettings;
using rml::JacobianMode;
using rml::Matrix;
using rml::Vector;

namespace {

Vector v1(double a) { return Vector::Constant(1, a); }

ChainSettings settings(double rho, std::int64_t n, std::uint64_t seed,
                       JacobianMode mode = JacobianMode::Full) {
  ChainSettings s;
  s.hyper.rho = rho;
  s.hyper.gamma = 0.01;
  s.n_steps = n;
  s.seed = seed;
  s.jacobian = mode;
  return s;
}

std::string trace(const rml::ChainRecord& r) {
  std::ostringstream os;
  rml::write_trace_csv(os, r);
  return os.str();
}

}  // namespace

TEST(Acceptance, ProbabilityFormula) {
  EXPECT_EQ(rml::mh_accept_prob(-1.0, 2.0, -1.0, 2.0), 1.0);
  EXPECT_NEAR(rml::mh_accept_prob(-2.0, 0.5, -1.0, 0.5), 0.367879441171, 1e-12);
  const double ninf = -std::numeric_limits<double>::infinity();
  EXPECT_EQ(rml::mh_accept_prob(ninf, 0.0, -1.0, 0.0), 0.0);
  EXPECT_EQ(rml::mh_accept_prob(3.0, 0.0, -1.0, 0.0), 1.0);
}

TEST(Acceptance, DetailedBalance) {
  // pi(a) q(b) alpha(a, b) = pi(b) q(a) alpha(b, a) for independence proposals
  const auto p = rml::make_example1();
  rml::HyperParams h;
  h.rho = 0.65;
  std::mt19937_64 rng(3);
  for (int i = 0; i < 50; ++i) {
    const auto a = rml::propose(p, h, {}, rng, JacobianMode::Full);
    const auto b = rml::propose(p, h, {}, rng, JacobianMode::Full);
    if (!a.valid() || !b.valid()) continue;
    const double ab = a.log_pi_joint + b.log_q +
                      std::log(rml::mh_accept_prob(b.log_pi_joint, b.log_q,
                                                   a.log_pi_joint, a.log_q));
    const double ba = b.log_pi_joint + a.log_q +
                      std::log(rml::mh_accept_prob(a.log_pi_joint, a.log_q,
                                                   b.log_pi_joint, b.log_q));
    EXPECT_NEAR(ab, ba, 1e-9 * (1.0 + std::abs(ab)));
  }
}

TEST(Init, GaussLinearFinite) {
  const auto p = rml::make_gauss_linear_toy();
  const auto st = rml::init_state(p, settings(0.5, 10, 1));
  EXPECT_TRUE(std::isfinite(st.log_pi_joint));
  EXPECT_TRUE(std::isfinite(st.log_q));
}

TEST(Init, SeededReproducible) {
  const auto p = rml::make_example1();
  const auto a = rml::init_state(p, settings(0.65, 10, 42));
  const auto b = rml::init_state(p, settings(0.65, 10, 42));
  EXPECT_EQ(a.x(0), b.x(0));
  EXPECT_EQ(a.d(0), b.d(0));
  EXPECT_EQ(a.log_q, b.log_q);
}

TEST(Init, Example2LandsInHighProbability) {
  const auto p = rml::make_example2();
  std::mt19937_64 rng(9);
  std::vector<double> prior_vals;
  for (int i = 0; i < 10000; ++i) {
    prior_vals.push_back(rml::log_target_marginal(p, p.sample_prior(rng)));
  }
  std::sort(prior_vals.begin(), prior_vals.end());
  const double p01 = prior_vals[prior_vals.size() / 100];
  for (std::uint64_t seed : {1, 2, 3, 4, 5}) {
    const auto st = rml::init_state(p, settings(0.35, 10, seed));
    EXPECT_GT(rml::log_target_marginal(p, st.x), p01) << seed;
  }
}

TEST(Chain, BookkeepingAndCachedValues) {
  const auto p = rml::make_example2();
  const auto s = settings(0.35, 2000, 17);
  const auto r = rml::run_chain(p, s);
  ASSERT_EQ(r.states.size(), 2000u);
  ASSERT_EQ(r.accept_flags.size(), 2000u);
  EXPECT_EQ(r.n_proposed, 2000);
  EXPECT_EQ(r.n_accepted, std::count(r.accept_flags.begin(), r.accept_flags.end(), 1));
  for (std::size_t i = 0; i < r.states.size(); i += 97) {
    const auto& st = r.states[i];
    EXPECT_NEAR(st.log_pi_joint, rml::log_target_joint(p, s.hyper, st.x, st.d), 1e-10);
    const auto c = rml::evaluate_candidate(p, s.hyper, st.x, st.d, JacobianMode::Full);
    EXPECT_NEAR(st.log_q, c.log_q, 1e-10);
  }
  // rejected steps repeat the previous state
  for (std::size_t i = 1; i < r.states.size(); ++i) {
    if (!r.accept_flags[i]) EXPECT_EQ(r.states[i].x, r.states[i - 1].x);
  }
}

TEST(Chain, IndependentOfWorkerCount) {
  const auto p = rml::make_example1();
  auto s = settings(0.65, 3000, 5);
  s.workers = 1;
  const auto a = rml::run_chain(p, s);
  s.workers = 4;
  const auto b = rml::run_chain(p, s);
  EXPECT_EQ(trace(a), trace(b));
}

TEST(Chain, DeterministicTrace) {
  const auto p = rml::make_example3_transformed().problem;
  const auto s = settings(0.25, 1500, 99);
  EXPECT_EQ(trace(rml::run_chain(p, s)), trace(rml::run_chain(p, s)));
  auto s2 = s;
  s2.seed = 100;
  EXPECT_NE(trace(rml::run_chain(p, s)), trace(rml::run_chain(p, s2)));
}

TEST(Chain, NoneModeAcceptsEveryValidProposal) {
  const auto p = rml::make_example2();
  const auto r = rml::run_chain(p, settings(0.35, 1000, 2, JacobianMode::None));
  EXPECT_EQ(r.acceptance_rate_valid(), 1.0);
}

TEST(Chain, RejectsBadSettings) {
  const auto p = rml::make_example1();
  auto s = settings(0.65, 0, 1);
  EXPECT_THROW(rml::run_chain(p, s), rml::Error);
  s = settings(1.5, 10, 1);
  EXPECT_THROW(rml::run_chain(p, s), rml::Error);
  s = settings(0.5, 10, 1);
  s.algorithm = rml::Algorithm::Legacy1D;
  EXPECT_THROW(rml::run_chain(rml::make_example2(), s), rml::Error);
}

TEST(Legacy, GaussLinearProposalIsPosterior) {
  // log q_m(x) - log N(x; 0, 1/2) is constant in x
  const auto p = rml::make_gauss_linear_toy();
  const rml::QuadSettings q;
  const double ref = rml::log_marginal_proposal_1d(p, 0.0, q);
  for (double x : {-2.0, -0.7, 0.3, 1.5}) {
    const double diff = rml::log_marginal_proposal_1d(p, x, q) + x * x;
    EXPECT_NEAR(diff, ref, 1e-8) << x;
  }
}

TEST(Legacy, GaussLinearAcceptsAll) {
  auto s = settings(0.5, 2000, 4);
  s.algorithm = rml::Algorithm::Legacy1D;
  const auto r = rml::run_chain(rml::make_gauss_linear_toy(), s);
  EXPECT_GE(r.acceptance_rate(), 0.999);
}

TEST(Legacy, ZeroProposalDensity) {
  // J = 1 + (C_x / C_d) (G^2 + H (g - d_uc)) is negative over the whole
  // quadrature range at x* = 0
  auto fwd = std::make_shared<rml::ForwardModel>(
      1, 1, [](const Vector& x) { return v1(-50.0 * x(0) * x(0)); },
      [](const Vector& x) { return Matrix::Constant(1, 1, -100.0 * x(0)); },
      [](const Vector&) { return rml::ResponseHessians{Matrix::Constant(1, 1, -100.0)}; });
  const rml::ProblemSpec p("neg", v1(0), Matrix::Identity(1, 1), v1(-10.0),
                           Matrix::Constant(1, 1, 0.01), fwd);
  EXPECT_EQ(rml::log_marginal_proposal_1d(p, 0.0, {}),
            -std::numeric_limits<double>::infinity());
}

TEST(Trace, HeaderAndRows) {
  const auto r = rml::run_chain(rml::make_example2(), settings(0.35, 5, 1));
  const std::string t = trace(r);
  EXPECT_EQ(t.substr(0, t.find('\n')), "step,accepted,x_1,x_2,d_1,log_pi_joint,log_q");
  EXPECT_EQ(std::count(t.begin(), t.end(), '\n'), 7);
}
