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

#include "rml/optimizer.hpp"

#include <random>
#include <string_view>
#include <utility>

namespace rml {

// How the proposal density is evaluated.
//   Full:        exact Jacobian, including the second-derivative term.
//   GaussNewton: second-derivative term dropped.
//   None:        no density (candidate invalid, or no MH test in a run).
enum class JacobianMode { Full, GaussNewton, None };

const char* to_string(JacobianMode mode) noexcept;
JacobianMode parse_jacobian_mode(std::string_view s);  // "full", "gauss-newton", "none"

// Blocks of d(x_uc, d_uc) / d(x*, d*).
struct JacobianBlocks {
  Matrix dxuc_dxstar;  // dim_x x dim_x
  Matrix dxuc_ddstar;  // dim_x x dim_d
  Matrix dduc_dxstar;  // dim_d x dim_x
  Matrix dduc_ddstar;  // dim_d x dim_d

  Matrix assemble() const;
};

struct CandidateState {
  Vector x_uc;  // the unconditional draw that produced the candidate
  Vector d_uc;
  Vector x_star;
  Vector d_star;
  double log_q = 0.0;
  double log_pi_joint = 0.0;
  double log_abs_det_J = 0.0;
  JacobianMode jacobian_mode = JacobianMode::None;  // None: must be rejected
  OptResult opt;

  bool valid() const noexcept { return jacobian_mode != JacobianMode::None; }
};

// (x_uc, d_uc) recovered from a stationary point (x*, d*):
//   x_uc = x* + (1/rho) C_x G^T C_d^{-1} (g(x*) - d*)
//   d_uc = (1/rho) d* - ((1 - rho)/rho) g(x*)
std::pair<Vector, Vector> inverse_transform(const ProblemSpec& p,
                                            const HyperParams& h,
                                            const Vector& x_star,
                                            const Vector& d_star);

// mode must be Full or GaussNewton. Full needs second derivatives from the
// forward model.
JacobianBlocks jacobian_blocks(const ProblemSpec& p, const HyperParams& h,
                               const Vector& x_star, const Vector& d_star,
                               JacobianMode mode);

// log |det| of the assembled matrix from one pivoted LU. Throws
// ErrorCode::Singular if the matrix is exactly singular.
double log_abs_det_jacobian(const JacobianBlocks& b);

// Evaluates log q(x*, d*) and log pi(x*, d*) for a stationary point.
// Throws ErrorCode::Singular for a degenerate transformation.
CandidateState evaluate_candidate(const ProblemSpec& p, const HyperParams& h,
                                  const Vector& x_star, const Vector& d_star,
                                  JacobianMode mode);

// Draws (x_uc, d_uc) from the joint prior, minimizes, and evaluates the
// candidate. Non-convergence or a singular Jacobian yields an invalid
// candidate (jacobian_mode == None); mode must be Full or GaussNewton.
CandidateState propose(const ProblemSpec& p, const HyperParams& h,
                       const OptSettings& s, std::mt19937_64& rng,
                       JacobianMode mode);

// Same, from a given unconditional draw.
CandidateState propose_from(const ProblemSpec& p, const HyperParams& h,
                            const OptSettings& s, const Vector& x_uc,
                            const Vector& d_uc, JacobianMode mode);

}  // namespace rml
