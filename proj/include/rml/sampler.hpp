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

#include "rml/proposal.hpp"

#include <cstdint>
#include <functional>
#include <string>
#include <string_view>
#include <vector>

namespace rml {

enum class Algorithm { Augmented, Legacy1D };

const char* to_string(Algorithm a) noexcept;
Algorithm parse_algorithm(std::string_view s);  // "augmented", "legacy-1d"

// Quadrature over d_uc for the marginal proposal density of the 1-D sampler.
struct QuadSettings {
  int nodes = 4097;
  double half_width_sd = 8.0;  // d_obs +- half_width_sd * sigma_d

  void validate() const;
};

struct ChainSettings {
  HyperParams hyper;
  OptSettings opt;
  std::int64_t n_steps = 1000;
  std::uint64_t seed = 1;
  JacobianMode jacobian = JacobianMode::Full;  // None: accept every valid proposal
  Algorithm algorithm = Algorithm::Augmented;
  QuadSettings quad;
  int workers = 1;  // threads precomputing proposals; results do not depend on it

  void validate() const;
};

struct ChainState {
  Vector x;
  Vector d;
  double log_pi_joint = 0.0;  // marginal log-target for the 1-D sampler
  double log_q = 0.0;         // marginal log-proposal for the 1-D sampler
  std::int64_t step_index = 0;
};

struct ChainRecord {
  ChainState initial;
  std::vector<ChainState> states;  // state after each step
  std::vector<char> accept_flags;
  std::int64_t n_proposed = 0;
  std::int64_t n_accepted = 0;
  std::int64_t n_optfail = 0;     // optimizer did not converge
  std::int64_t n_degenerate = 0;  // singular jacobian or zero proposal density
  std::uint64_t seed = 0;
  ChainSettings settings;

  double acceptance_rate() const;
  // Accepted over proposals that produced a valid candidate.
  double acceptance_rate_valid() const;
};

// min(1, pi_new q_cur / (pi_cur q_new)) in log space. A candidate with
// log_pi_new = -inf gets 0; a current state with log_pi_cur = -inf is left
// with probability 1.
double mh_accept_prob(double log_pi_new, double log_q_new, double log_pi_cur,
                      double log_q_cur);

// First valid proposal from the Init stream, adopted unconditionally.
// Throws ErrorCode::Initialization after 100 consecutive failures.
ChainState init_state(const ProblemSpec& p, const ChainSettings& s);

// Augmented-state independence sampler on (x, d).
ChainRecord run_chain_augmented(const ProblemSpec& p, const ChainSettings& s);

// Model-only sampler with the marginal proposal density obtained by
// quadrature over d_uc. Requires dim_x = dim_d = 1.
ChainRecord run_chain_legacy_1d(const ProblemSpec& p, const ChainSettings& s);

// Dispatches on s.algorithm.
ChainRecord run_chain(const ProblemSpec& p, const ChainSettings& s);

// log of the marginal proposal density of x* for the 1-D sampler, i.e. the
// integral over d_uc of the joint (x*, d_uc) proposal density restricted to
// where d x_uc / d x* > 0. Returns -inf if that region has no mass.
double log_marginal_proposal_1d(const ProblemSpec& p, double x_star,
                                const QuadSettings& q);

using WarningHandler = std::function<void(const std::string&)>;
// Receives sampler warnings; the default writes to stderr. Pass an empty
// handler to restore the default.
void set_warning_handler(WarningHandler handler);

}  // namespace rml
