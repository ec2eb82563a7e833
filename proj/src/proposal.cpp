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

#include "rml/proposal.hpp"

#include <Eigen/LU>

#include <cmath>
#include <string>

namespace rml {

const char* to_string(JacobianMode mode) noexcept {
  switch (mode) {
    case JacobianMode::Full: return "full";
    case JacobianMode::GaussNewton: return "gauss-newton";
    case JacobianMode::None: return "none";
  }
  return "none";
}

JacobianMode parse_jacobian_mode(std::string_view s) {
  if (s == "full") return JacobianMode::Full;
  if (s == "gauss-newton") return JacobianMode::GaussNewton;
  if (s == "none") return JacobianMode::None;
  throw Error(ErrorCode::InvalidArgument,
              "jacobian must be \"full\", \"gauss-newton\" or \"none\", got \"" +
                  std::string(s) + "\"");
}

Matrix JacobianBlocks::assemble() const {
  const Eigen::Index nx = dxuc_dxstar.rows();
  const Eigen::Index nd = dduc_ddstar.rows();
  Matrix J(nx + nd, nx + nd);
  J.topLeftCorner(nx, nx) = dxuc_dxstar;
  J.topRightCorner(nx, nd) = dxuc_ddstar;
  J.bottomLeftCorner(nd, nx) = dduc_dxstar;
  J.bottomRightCorner(nd, nd) = dduc_ddstar;
  return J;
}

std::pair<Vector, Vector> inverse_transform(const ProblemSpec& p,
                                            const HyperParams& h,
                                            const Vector& x_star,
                                            const Vector& d_star) {
  require_size(x_star, p.dim_x(), "x*");
  require_size(d_star, p.dim_d(), "d*");
  const Vector g = p.forward().eval(x_star);
  const Matrix G = p.forward().jacobian(x_star);
  Vector x_uc = x_star + p.prior_cov() * (G.transpose() * p.solve_obs(g - d_star)) / h.rho;
  Vector d_uc = d_star / h.rho - ((1.0 - h.rho) / h.rho) * g;
  return {std::move(x_uc), std::move(d_uc)};
}

JacobianBlocks jacobian_blocks(const ProblemSpec& p, const HyperParams& h,
                               const Vector& x_star, const Vector& d_star,
                               JacobianMode mode) {
  RML_REQUIRE(mode != JacobianMode::None, ErrorCode::InvalidArgument,
              "jacobian_blocks needs mode full or gauss-newton");
  require_size(x_star, p.dim_x(), "x*");
  require_size(d_star, p.dim_d(), "d*");
  const Eigen::Index nx = p.dim_x();
  const Eigen::Index nd = p.dim_d();
  const double rho = h.rho;
  const Matrix& Cx = p.prior_cov();
  const Matrix G = p.forward().jacobian(x_star);
  // C_d^{-1} G and C_d^{-1} as solves against the cached factor.
  Matrix cdG(nd, nx);
  for (Eigen::Index k = 0; k < nx; ++k) cdG.col(k) = p.solve_obs(G.col(k));
  Matrix cd_inv(nd, nd);
  for (Eigen::Index k = 0; k < nd; ++k) cd_inv.col(k) = p.solve_obs(Vector::Unit(nd, k));

  Matrix inner = G.transpose() * cdG;  // G^T C_d^{-1} G
  if (mode == JacobianMode::Full) {
    const Vector w = p.solve_obs(p.forward().eval(x_star) - d_star);
    const ResponseHessians H = p.forward().hessians(x_star);
    for (Eigen::Index i = 0; i < nd; ++i) {
      // H[i](c, b) = dG(i, c)/dx(b): sum_{i,j} dG^{ic}/dx^b [C_d^{-1}]^{ij} r^j
      inner += w(i) * H[static_cast<std::size_t>(i)];
    }
  }

  JacobianBlocks b;
  b.dxuc_dxstar = Matrix::Identity(nx, nx) + Cx * inner / rho;
  b.dxuc_ddstar = -(Cx * G.transpose() * cd_inv) / rho;
  b.dduc_dxstar = -((1.0 - rho) / rho) * G;
  b.dduc_ddstar = Matrix::Identity(nd, nd) / rho;
  return b;
}

double log_abs_det_jacobian(const JacobianBlocks& b) {
  const Matrix J = b.assemble();
  RML_REQUIRE(J.allFinite(), ErrorCode::Singular, "jacobian is not finite");
  const Eigen::PartialPivLU<Matrix> lu(J);
  const Matrix& U = lu.matrixLU();
  double log_det = 0.0;
  for (Eigen::Index i = 0; i < U.rows(); ++i) {
    const double u = std::abs(U(i, i));
    RML_REQUIRE(u > 0.0, ErrorCode::Singular,
                "degenerate proposal: jacobian is singular");
    log_det += std::log(u);
  }
  return log_det;
}

CandidateState evaluate_candidate(const ProblemSpec& p, const HyperParams& h,
                                  const Vector& x_star, const Vector& d_star,
                                  JacobianMode mode) {
  CandidateState c;
  c.x_star = x_star;
  c.d_star = d_star;
  auto [x_uc, d_uc] = inverse_transform(p, h, x_star, d_star);
  c.log_abs_det_J = log_abs_det_jacobian(jacobian_blocks(p, h, x_star, d_star, mode));
  c.log_q = log_prior_joint(p, x_uc, d_uc) + c.log_abs_det_J;
  c.log_pi_joint = log_target_joint(p, h, x_star, d_star);
  c.x_uc = std::move(x_uc);
  c.d_uc = std::move(d_uc);
  c.jacobian_mode = mode;
  return c;
}

CandidateState propose_from(const ProblemSpec& p, const HyperParams& h,
                            const OptSettings& s, const Vector& x_uc,
                            const Vector& d_uc, JacobianMode mode) {
  RML_REQUIRE(mode != JacobianMode::None, ErrorCode::InvalidArgument,
              "propose needs mode full or gauss-newton");
  OptResult opt = minimize(p, h, s, x_uc, d_uc);
  CandidateState c;
  if (opt.converged) {
    try {
      c = evaluate_candidate(p, h, opt.x_star, opt.d_star, mode);
    } catch (const Error& e) {
      if (e.code() != ErrorCode::Singular && e.code() != ErrorCode::Evaluation) throw;
      c = CandidateState{};
      c.x_star = opt.x_star;
      c.d_star = opt.d_star;
    }
  } else {
    c.x_star = opt.x_star;
    c.d_star = opt.d_star;
  }
  if (!c.valid()) {
    c.x_uc = x_uc;
    c.d_uc = d_uc;
  }
  c.opt = std::move(opt);
  return c;
}

CandidateState propose(const ProblemSpec& p, const HyperParams& h,
                       const OptSettings& s, std::mt19937_64& rng,
                       JacobianMode mode) {
  const Vector x_uc = p.sample_prior(rng);
  const Vector d_uc = p.obs() + p.sample_obs_noise(rng);
  return propose_from(p, h, s, x_uc, d_uc, mode);
}

}  // namespace rml
