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

#include "rml/optimizer.hpp"

#include <Eigen/Cholesky>

#include <cmath>
#include <functional>
#include <optional>

namespace rml {

void OptSettings::validate() const {
  RML_REQUIRE(max_iters >= 1, ErrorCode::InvalidArgument,
              "optimizer max_iters must be >= 1");
  RML_REQUIRE(grad_tol > 0.0 && step_tol > 0.0, ErrorCode::InvalidArgument,
              "optimizer tolerances must be positive");
  RML_REQUIRE(lm_lambda0 > 0.0, ErrorCode::InvalidArgument,
              "optimizer lm_lambda0 must be positive");
  RML_REQUIRE(lm_shrink > 0.0 && lm_shrink < 1.0 && lm_grow > 1.0,
              ErrorCode::InvalidArgument,
              "optimizer damping schedule needs lm_shrink < 1 < lm_grow");
}

double augmented_objective(const ProblemSpec& p, const HyperParams& h,
                           const Vector& x, const Vector& d, const Vector& x_uc,
                           const Vector& d_uc) {
  require_size(x, p.dim_x(), "x");
  require_size(d, p.dim_d(), "d");
  require_size(x_uc, p.dim_x(), "x_uc");
  require_size(d_uc, p.dim_d(), "d_uc");
  const Vector g = p.forward().eval(x);
  return 0.5 * p.prior_quad(x - x_uc) + p.obs_quad(g - d) / (2.0 * h.rho) +
         p.obs_quad(d - d_uc) / (2.0 * (1.0 - h.rho));
}

Vector augmented_gradient(const ProblemSpec& p, const HyperParams& h,
                          const Vector& x, const Vector& d, const Vector& x_uc,
                          const Vector& d_uc) {
  const Vector g = p.forward().eval(x);
  const Matrix G = p.forward().jacobian(x);
  const Vector w = p.solve_obs(g - d) / h.rho;
  Vector grad(p.dim_x() + p.dim_d());
  grad.head(p.dim_x()) = p.solve_prior(x - x_uc) + G.transpose() * w;
  grad.tail(p.dim_d()) = -w + p.solve_obs(d - d_uc) / (1.0 - h.rho);
  return grad;
}

Vector eliminate_d(const ProblemSpec& p, const HyperParams& h, const Vector& x,
                   const Vector& d_uc) {
  require_size(d_uc, p.dim_d(), "d_uc");
  return h.rho * d_uc + (1.0 - h.rho) * p.forward().eval(x);
}

std::pair<Vector, Vector> stationarity_residuals(const ProblemSpec& p,
                                                 const HyperParams& h,
                                                 const Vector& x,
                                                 const Vector& d,
                                                 const Vector& x_uc,
                                                 const Vector& d_uc) {
  const Vector g = p.forward().eval(x);
  const Matrix G = p.forward().jacobian(x);
  Vector rx = x - x_uc +
              p.prior_cov() * (G.transpose() * p.solve_obs(g - d)) / h.rho;
  Vector rd = d - h.rho * d_uc - (1.0 - h.rho) * g;
  return {std::move(rx), std::move(rd)};
}

namespace {

// Nonlinear least squares 1/2 |r(z)|^2.
struct LeastSquares {
  // Fills r and J at z. May throw Error(Evaluation).
  std::function<void(const Vector& z, Vector& r, Matrix& J)> residual;
  // sum_k r_k * Hess(r_k), or empty when second derivatives are not used.
  std::function<Matrix(const Vector& z, const Vector& r)> second_order;
};

struct LmOutcome {
  Vector z;
  bool converged = false;
  int iters = 0;
};

double sup_norm(const Vector& v) {
  return v.size() == 0 ? 0.0 : v.cwiseAbs().maxCoeff();
}

LmOutcome levenberg_marquardt(const LeastSquares& ls, Vector z,
                              const OptSettings& s) {
  Vector r;
  Matrix J;
  ls.residual(z, r, J);
  double f = 0.5 * r.squaredNorm();
  Vector grad = J.transpose() * r;
  double lambda = s.lm_lambda0;

  LmOutcome out;
  for (int iter = 0;; ++iter) {
    out.iters = iter;
    if (sup_norm(grad) <= s.grad_tol) {
      out.converged = true;
      break;
    }
    if (iter >= s.max_iters) break;

    Matrix B = J.transpose() * J;
    if (s.exact_hessian && ls.second_order) {
      Matrix full = B + ls.second_order(z, r);
      Eigen::LLT<Matrix> llt(full);
      if (llt.info() == Eigen::Success) B = std::move(full);
    }
    const Vector diag = B.diagonal().cwiseMax(1e-12 * (1.0 + B.diagonal().maxCoeff()));

    bool accepted = false;
    Vector step;
    while (!accepted) {
      if (lambda > 1e20) break;
      Matrix A = B;
      A.diagonal() += lambda * diag;
      Eigen::LLT<Matrix> llt(A);
      if (llt.info() != Eigen::Success) {
        lambda *= s.lm_grow;
        continue;
      }
      step = -llt.solve(grad);
      const double pred = -(grad.dot(step) + 0.5 * step.dot(B * step));

      Vector zt = z + step;
      Vector rt;
      Matrix Jt;
      try {
        ls.residual(zt, rt, Jt);
      } catch (const Error& e) {
        if (e.code() != ErrorCode::Evaluation) throw;
        lambda *= s.lm_grow;
        continue;
      }
      const double ft = 0.5 * rt.squaredNorm();
      const Vector gradt = Jt.transpose() * rt;
      // Below this the change in f is not resolvable in double precision,
      // so progress is judged by the gradient instead.
      const bool roundoff = pred <= 1e-12 * std::abs(f);
      if (std::isfinite(ft) &&
          (roundoff ? sup_norm(gradt) < sup_norm(grad) : (pred > 0.0 && ft < f))) {
        z = std::move(zt);
        r = std::move(rt);
        J = std::move(Jt);
        f = ft;
        grad = gradt;
        lambda = std::max(lambda * s.lm_shrink, 1e-15);
        accepted = true;
      } else {
        lambda *= s.lm_grow;
      }
    }
    if (!accepted) {
      out.converged = sup_norm(grad) <= s.grad_tol;
      break;
    }
    if (step.norm() <= s.step_tol * (z.norm() + s.step_tol)) {
      out.iters = iter + 1;
      out.converged = sup_norm(grad) <= s.grad_tol;
      break;
    }
  }
  out.z = std::move(z);
  return out;
}

// Residual for the x-reduced objective:
//   r = [L_x^{-1} (x - x_uc); L_d^{-1} (g(x) - d_uc)].
LeastSquares reduced_problem(const ProblemSpec& p, const Vector& x_uc,
                             const Vector& d_uc) {
  const Matrix Lx = p.prior_chol();
  const Matrix Ld = p.obs_chol();
  const Eigen::Index nx = p.dim_x();
  const Eigen::Index nd = p.dim_d();
  LeastSquares ls;
  ls.residual = [&p, Lx, Ld, x_uc, d_uc, nx, nd](const Vector& x, Vector& r,
                                                   Matrix& J) {
    const Vector g = p.forward().eval(x);
    const Matrix G = p.forward().jacobian(x);
    r.resize(nx + nd);
    J.resize(nx + nd, nx);
    r.head(nx) = Lx.triangularView<Eigen::Lower>().solve(x - x_uc);
    r.tail(nd) = Ld.triangularView<Eigen::Lower>().solve(g - d_uc);
    J.topRows(nx) = Lx.triangularView<Eigen::Lower>().solve(Matrix::Identity(nx, nx));
    J.bottomRows(nd) = Ld.triangularView<Eigen::Lower>().solve(G);
  };
  if (p.forward().hessian_source() != HessianSource::Unavailable) {
    ls.second_order = [&p, Ld, nx, nd](const Vector& x, const Vector& r) {
      // sum_i (C_d^{-1} (g - d_uc))_i H_i, using L_d^{-T} r_data.
      const Vector w = Ld.transpose().triangularView<Eigen::Upper>().solve(
          Vector(r.tail(nd)));
      const ResponseHessians H = p.forward().hessians(x);
      Matrix S = Matrix::Zero(nx, nx);
      for (Eigen::Index i = 0; i < nd; ++i) S += w(i) * H[static_cast<std::size_t>(i)];
      return S;
    };
  }
  return ls;
}

OptResult finish(const ProblemSpec& p, const HyperParams& h, Vector x, Vector d,
                 const Vector& x_uc, const Vector& d_uc, bool converged,
                 int iters, double grad_tol) {
  OptResult res;
  res.final_grad_norm = sup_norm(augmented_gradient(p, h, x, d, x_uc, d_uc));
  res.objective_value = augmented_objective(p, h, x, d, x_uc, d_uc);
  res.converged = converged && res.final_grad_norm <= grad_tol;
  res.iters = iters;
  res.x_star = std::move(x);
  res.d_star = std::move(d);
  return res;
}

}  // namespace

OptResult minimize(const ProblemSpec& p, const HyperParams& h,
                   const OptSettings& s, const Vector& x_uc,
                   const Vector& d_uc) {
  require_size(x_uc, p.dim_x(), "x_uc");
  require_size(d_uc, p.dim_d(), "d_uc");
  const LmOutcome lm = levenberg_marquardt(reduced_problem(p, x_uc, d_uc), x_uc, s);
  Vector d = eliminate_d(p, h, lm.z, d_uc);
  return finish(p, h, lm.z, std::move(d), x_uc, d_uc, lm.converged, lm.iters,
                s.grad_tol);
}

OptResult minimize_joint(const ProblemSpec& p, const HyperParams& h,
                         const OptSettings& s, const Vector& x_uc,
                         const Vector& d_uc) {
  require_size(x_uc, p.dim_x(), "x_uc");
  require_size(d_uc, p.dim_d(), "d_uc");
  const Matrix Lx = p.prior_chol();
  const Matrix Ld = p.obs_chol();
  const Eigen::Index nx = p.dim_x();
  const Eigen::Index nd = p.dim_d();
  const double a = 1.0 / std::sqrt(h.rho);
  const double b = 1.0 / std::sqrt(1.0 - h.rho);

  // r = [L_x^{-1}(x - x_uc); a L_d^{-1}(g - d); b L_d^{-1}(d - d_uc)]
  LeastSquares ls;
  ls.residual = [&p, Lx, Ld, x_uc, d_uc, nx, nd, a, b](const Vector& z,
                                                         Vector& r, Matrix& J) {
    const Vector x = z.head(nx);
    const Vector d = z.tail(nd);
    const Vector g = p.forward().eval(x);
    const Matrix G = p.forward().jacobian(x);
    const auto lx = Lx.triangularView<Eigen::Lower>();
    const auto ld = Ld.triangularView<Eigen::Lower>();
    r.resize(nx + 2 * nd);
    r.segment(0, nx) = lx.solve(x - x_uc);
    r.segment(nx, nd) = a * ld.solve(g - d);
    r.segment(nx + nd, nd) = b * ld.solve(d - d_uc);
    const Matrix ld_inv = ld.solve(Matrix::Identity(nd, nd));
    J = Matrix::Zero(nx + 2 * nd, nx + nd);
    J.block(0, 0, nx, nx) = lx.solve(Matrix::Identity(nx, nx));
    J.block(nx, 0, nd, nx) = a * ld.solve(G);
    J.block(nx, nx, nd, nd) = -a * ld_inv;
    J.block(nx + nd, nx, nd, nd) = b * ld_inv;
  };
  if (p.forward().hessian_source() != HessianSource::Unavailable) {
    ls.second_order = [&p, Ld, nx, nd, a](const Vector& z, const Vector& r) {
      const Vector w = a * Ld.transpose().triangularView<Eigen::Upper>().solve(
                               Vector(r.segment(nx, nd)));
      const ResponseHessians H = p.forward().hessians(z.head(nx));
      Matrix S = Matrix::Zero(nx + nd, nx + nd);
      for (Eigen::Index i = 0; i < nd; ++i)
        S.topLeftCorner(nx, nx) += w(i) * H[static_cast<std::size_t>(i)];
      return S;
    };
  }
  Vector z0(nx + nd);
  z0.head(nx) = x_uc;
  z0.tail(nd) = eliminate_d(p, h, x_uc, d_uc);
  const LmOutcome lm = levenberg_marquardt(ls, std::move(z0), s);
  return finish(p, h, lm.z.head(nx), lm.z.tail(nd), x_uc, d_uc, lm.converged,
                lm.iters, s.grad_tol);
}

OptResult minimize_model_misfit(const ProblemSpec& p, const OptSettings& s,
                                const Vector& x_uc, const Vector& d_uc) {
  require_size(x_uc, p.dim_x(), "x_uc");
  require_size(d_uc, p.dim_d(), "d_uc");
  const LmOutcome lm = levenberg_marquardt(reduced_problem(p, x_uc, d_uc), x_uc, s);
  OptResult res;
  const Vector g = p.forward().eval(lm.z);
  const Matrix G = p.forward().jacobian(lm.z);
  const Vector grad = p.solve_prior(lm.z - x_uc) + G.transpose() * p.solve_obs(g - d_uc);
  res.final_grad_norm = sup_norm(grad);
  res.objective_value = 0.5 * p.prior_quad(lm.z - x_uc) + 0.5 * p.obs_quad(g - d_uc);
  res.converged = lm.converged && res.final_grad_norm <= s.grad_tol;
  res.iters = lm.iters;
  res.x_star = lm.z;
  res.d_star = d_uc;
  return res;
}

}  // namespace rml
