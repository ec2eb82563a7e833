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

#include "rml/sampler.hpp"

#include "rml/random.hpp"
#include "parallel.hpp"

#include <algorithm>
#include <cmath>
#include <iostream>
#include <limits>
#include <mutex>

namespace rml {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();
constexpr int kMaxInitAttempts = 100;
constexpr std::int64_t kBlock = 256;

std::mutex g_warning_mutex;
WarningHandler g_warning_handler;

void warn(const std::string& msg) {
  std::lock_guard<std::mutex> lock(g_warning_mutex);
  if (g_warning_handler) {
    g_warning_handler(msg);
  } else {
    std::cerr << "rml: warning: " << msg << '\n';
  }
}

// The density used for bookkeeping when the MH test is off. The
// Gauss-Newton determinant is rho^{-dim_d} det(I + C_x G^T C_d^{-1} G) > 0,
// so evaluation never rejects a converged candidate.
JacobianMode evaluation_mode(JacobianMode m) {
  return m == JacobianMode::None ? JacobianMode::GaussNewton : m;
}

ChainState to_state(const CandidateState& c, std::int64_t step) {
  return ChainState{c.x_star, c.d_star, c.log_pi_joint, c.log_q, step};
}

void tally_invalid(ChainRecord& rec, const OptResult& opt) {
  if (!opt.converged) {
    ++rec.n_optfail;
  } else {
    ++rec.n_degenerate;
  }
}

}  // namespace

const char* to_string(Algorithm a) noexcept {
  return a == Algorithm::Augmented ? "augmented" : "legacy-1d";
}

Algorithm parse_algorithm(std::string_view s) {
  if (s == "augmented") return Algorithm::Augmented;
  if (s == "legacy-1d") return Algorithm::Legacy1D;
  throw Error(ErrorCode::InvalidArgument,
              "algorithm must be \"augmented\" or \"legacy-1d\", got \"" +
                  std::string(s) + "\"");
}

void QuadSettings::validate() const {
  RML_REQUIRE(nodes >= 3, ErrorCode::InvalidArgument,
              "quadrature needs at least 3 nodes");
  RML_REQUIRE(half_width_sd > 0.0, ErrorCode::InvalidArgument,
              "quadrature half width must be positive");
}

void ChainSettings::validate() const {
  hyper.validate();
  opt.validate();
  quad.validate();
  RML_REQUIRE(n_steps >= 1, ErrorCode::InvalidArgument, "n_steps must be >= 1");
  RML_REQUIRE(workers >= 1, ErrorCode::InvalidArgument, "workers must be >= 1");
}

double ChainRecord::acceptance_rate() const {
  return n_proposed == 0 ? 0.0
                         : static_cast<double>(n_accepted) / static_cast<double>(n_proposed);
}

double ChainRecord::acceptance_rate_valid() const {
  const std::int64_t valid = n_proposed - n_optfail - n_degenerate;
  return valid == 0 ? 0.0 : static_cast<double>(n_accepted) / static_cast<double>(valid);
}

double mh_accept_prob(double log_pi_new, double log_q_new, double log_pi_cur,
                      double log_q_cur) {
  if (std::isnan(log_pi_new) || log_pi_new == kNegInf) return 0.0;
  if (log_pi_cur == kNegInf) return 1.0;
  const double log_ratio = log_pi_new + log_q_cur - log_pi_cur - log_q_new;
  if (std::isnan(log_ratio)) return 0.0;
  return log_ratio >= 0.0 ? 1.0 : std::exp(log_ratio);
}

void set_warning_handler(WarningHandler handler) {
  std::lock_guard<std::mutex> lock(g_warning_mutex);
  g_warning_handler = std::move(handler);
}

// ---------------------------------------------------------------------------
// Augmented state

ChainState init_state(const ProblemSpec& p, const ChainSettings& s) {
  s.validate();
  const JacobianMode mode = evaluation_mode(s.jacobian);
  for (int k = 0; k < kMaxInitAttempts; ++k) {
    auto rng = make_engine(s.seed, Stream::Init, static_cast<std::uint64_t>(k));
    const CandidateState c = propose(p, s.hyper, s.opt, rng, mode);
    if (c.valid()) return to_state(c, 0);
  }
  throw Error(ErrorCode::Initialization,
              "no valid proposal in " + std::to_string(kMaxInitAttempts) +
                  " attempts while initializing the chain");
}

ChainRecord run_chain_augmented(const ProblemSpec& p, const ChainSettings& s) {
  s.validate();
  ChainRecord rec;
  rec.settings = s;
  rec.seed = s.seed;
  rec.initial = init_state(p, s);
  rec.states.reserve(static_cast<std::size_t>(s.n_steps));
  rec.accept_flags.reserve(static_cast<std::size_t>(s.n_steps));

  const JacobianMode mode = evaluation_mode(s.jacobian);
  auto accept_rng = make_engine(s.seed, Stream::Accept, 0);
  std::uniform_real_distribution<double> unif(0.0, 1.0);

  ChainState cur = rec.initial;
  std::vector<CandidateState> block;
  for (std::int64_t first = 0; first < s.n_steps; first += kBlock) {
    const std::int64_t count = std::min(kBlock, s.n_steps - first);
    block.assign(static_cast<std::size_t>(count), CandidateState{});
    detail::parallel_for(first, count, s.workers, [&](std::int64_t i) {
      auto rng = make_engine(s.seed, Stream::Proposal, static_cast<std::uint64_t>(i));
      block[static_cast<std::size_t>(i - first)] = propose(p, s.hyper, s.opt, rng, mode);
    });

    for (std::int64_t k = 0; k < count; ++k) {
      const CandidateState& c = block[static_cast<std::size_t>(k)];
      const std::int64_t step = first + k + 1;
      const double u = unif(accept_rng);
      bool accept = false;
      if (!c.valid()) {
        tally_invalid(rec, c.opt);
      } else if (s.jacobian == JacobianMode::None) {
        accept = true;
      } else {
        accept = u < mh_accept_prob(c.log_pi_joint, c.log_q, cur.log_pi_joint, cur.log_q);
      }
      if (accept) {
        cur = to_state(c, step);
        ++rec.n_accepted;
      }
      cur.step_index = step;
      rec.states.push_back(cur);
      rec.accept_flags.push_back(accept ? 1 : 0);
      ++rec.n_proposed;
    }
  }
  return rec;
}

// ---------------------------------------------------------------------------
// Marginal 1-D sampler

double log_marginal_proposal_1d(const ProblemSpec& p, double x_star,
                                const QuadSettings& q) {
  RML_REQUIRE(p.dim_x() == 1 && p.dim_d() == 1, ErrorCode::Unsupported,
              "marginal proposal quadrature supports dim_x = dim_d = 1 only");
  q.validate();
  const double cx = p.prior_cov()(0, 0);
  const double cd = p.obs_cov()(0, 0);
  const double mu = p.prior_mean()(0);
  const double dobs = p.obs()(0);
  const Vector xv = Vector::Constant(1, x_star);
  const double g = p.forward().eval(xv)(0);
  const double G = p.forward().jacobian(xv)(0, 0);
  const double H = p.forward().hessians(xv)[0](0, 0);

  const double sd = std::sqrt(cd);
  const double lo = dobs - q.half_width_sd * sd;
  const double step = 2.0 * q.half_width_sd * sd / (q.nodes - 1);

  // Integrand exp(log f) * J on the nodes, accumulated in log space.
  std::vector<double> log_terms(static_cast<std::size_t>(q.nodes), kNegInf);
  double peak = kNegInf;
  for (int k = 0; k < q.nodes; ++k) {
    const double duc = lo + k * step;
    const double jac = 1.0 + (cx / cd) * (G * G + H * (g - duc));
    if (jac <= 0.0) continue;
    const double xuc = x_star + cx * G * (g - duc) / cd;
    const double log_f = -0.5 * (xuc - mu) * (xuc - mu) / cx -
                         0.5 * (duc - dobs) * (duc - dobs) / cd;
    const double w = (k == 0 || k == q.nodes - 1) ? 0.5 : 1.0;
    const double t = log_f + std::log(jac * w * step);
    log_terms[static_cast<std::size_t>(k)] = t;
    peak = std::max(peak, t);
  }
  if (peak == kNegInf) return kNegInf;
  double sum = 0.0;
  for (double t : log_terms) {
    if (t != kNegInf) sum += std::exp(t - peak);
  }
  return peak + std::log(sum);
}

namespace {

struct LegacyCandidate {
  ChainState state;
  bool converged = false;
  bool valid = false;
};

LegacyCandidate legacy_propose(const ProblemSpec& p, const ChainSettings& s,
                               std::mt19937_64& rng) {
  const Vector x_uc = p.sample_prior(rng);
  const Vector d_uc = p.obs() + p.sample_obs_noise(rng);
  const OptResult opt = minimize_model_misfit(p, s.opt, x_uc, d_uc);
  LegacyCandidate c;
  c.converged = opt.converged;
  c.state.x = opt.x_star;
  c.state.d = d_uc;
  if (!opt.converged) return c;
  c.state.log_q = log_marginal_proposal_1d(p, opt.x_star(0), s.quad);
  if (c.state.log_q == kNegInf) {
    warn("zero marginal proposal density at x* = " + std::to_string(opt.x_star(0)) +
         " (no positive-jacobian region); candidate rejected");
    return c;
  }
  c.state.log_pi_joint = log_target_marginal(p, opt.x_star);
  c.valid = true;
  return c;
}

}  // namespace

ChainRecord run_chain_legacy_1d(const ProblemSpec& p, const ChainSettings& s) {
  RML_REQUIRE(p.dim_x() == 1 && p.dim_d() == 1, ErrorCode::Unsupported,
              "the marginal (legacy-1d) sampler supports dim_x = dim_d = 1 only");
  s.validate();
  ChainRecord rec;
  rec.settings = s;
  rec.seed = s.seed;

  bool initialized = false;
  for (int k = 0; k < kMaxInitAttempts && !initialized; ++k) {
    auto rng = make_engine(s.seed, Stream::Init, static_cast<std::uint64_t>(k));
    LegacyCandidate c = legacy_propose(p, s, rng);
    if (c.valid) {
      rec.initial = c.state;
      initialized = true;
    }
  }
  RML_REQUIRE(initialized, ErrorCode::Initialization,
              "no valid proposal in 100 attempts while initializing the chain");

  auto accept_rng = make_engine(s.seed, Stream::Accept, 0);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  ChainState cur = rec.initial;
  std::vector<LegacyCandidate> block;
  for (std::int64_t first = 0; first < s.n_steps; first += kBlock) {
    const std::int64_t count = std::min(kBlock, s.n_steps - first);
    block.assign(static_cast<std::size_t>(count), LegacyCandidate{});
    detail::parallel_for(first, count, s.workers, [&](std::int64_t i) {
      auto rng = make_engine(s.seed, Stream::Proposal, static_cast<std::uint64_t>(i));
      block[static_cast<std::size_t>(i - first)] = legacy_propose(p, s, rng);
    });
    for (std::int64_t k = 0; k < count; ++k) {
      const LegacyCandidate& c = block[static_cast<std::size_t>(k)];
      const std::int64_t step = first + k + 1;
      const double u = unif(accept_rng);
      bool accept = false;
      if (!c.converged) {
        ++rec.n_optfail;
      } else if (!c.valid) {
        ++rec.n_degenerate;
      } else {
        accept = u < mh_accept_prob(c.state.log_pi_joint, c.state.log_q,
                                    cur.log_pi_joint, cur.log_q);
      }
      if (accept) {
        cur = c.state;
        ++rec.n_accepted;
      }
      cur.step_index = step;
      rec.states.push_back(cur);
      rec.accept_flags.push_back(accept ? 1 : 0);
      ++rec.n_proposed;
    }
  }
  return rec;
}

ChainRecord run_chain(const ProblemSpec& p, const ChainSettings& s) {
  return s.algorithm == Algorithm::Augmented ? run_chain_augmented(p, s)
                                             : run_chain_legacy_1d(p, s);
}

}  // namespace rml
