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

#include "rml/validate.hpp"

#include "rml/oracle.hpp"
#include "rml/random.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <sstream>

namespace rml {

namespace {

CheckResult make_result(std::string name, double value, double tol, std::string detail = {}) {
  CheckResult r;
  r.name = std::move(name);
  r.value = value;
  r.tolerance = tol;
  r.passed = std::isfinite(value) && value <= tol;
  r.detail = std::move(detail);
  return r;
}

double rel_err(const Matrix& a, const Matrix& b) {
  return (a - b).norm() / (a.norm() + 1e-8);
}

}  // namespace

std::pair<double, double> batch_mean(const std::vector<double>& v, int n_batches) {
  RML_REQUIRE(n_batches >= 2 && v.size() >= static_cast<std::size_t>(n_batches),
              ErrorCode::InvalidArgument, "need at least one value per batch");
  const std::size_t len = v.size() / static_cast<std::size_t>(n_batches);
  std::vector<double> means(static_cast<std::size_t>(n_batches), 0.0);
  for (std::size_t b = 0; b < means.size(); ++b) {
    for (std::size_t i = b * len; i < (b + 1) * len; ++i) means[b] += v[i];
    means[b] /= static_cast<double>(len);
  }
  double m = 0.0;
  for (double x : means) m += x;
  m /= n_batches;
  double s2 = 0.0;
  for (double x : means) s2 += (x - m) * (x - m);
  s2 /= n_batches - 1;
  return {m, std::sqrt(s2 / n_batches)};
}

CheckResult check_jacobian_fd(const std::string& label, const ProblemSpec& p,
                              int n_points, std::uint64_t seed, double tol) {
  auto rng = make_engine(seed, Stream::Test, 1);
  const ForwardModel& f = p.forward();
  const auto eval = [&f](const Vector& x) { return f.eval(x); };
  double worst = 0.0;
  for (int k = 0; k < n_points; ++k) {
    const Vector x = p.sample_prior(rng);
    worst = std::max(worst, rel_err(f.jacobian(x), fd_jacobian(eval, x)));
  }
  return make_result("jacobian-fd/" + label, worst, tol);
}

CheckResult check_hessian_fd(const std::string& label, const ProblemSpec& p,
                             int n_points, std::uint64_t seed, double tol) {
  auto rng = make_engine(seed, Stream::Test, 2);
  const ForwardModel& f = p.forward();
  const auto jac = [&f](const Vector& x) { return f.jacobian(x); };
  double worst = 0.0;
  for (int k = 0; k < n_points; ++k) {
    const Vector x = p.sample_prior(rng);
    const ResponseHessians a = f.hessians(x);
    const ResponseHessians b = fd_hessians(jac, x, p.dim_d());
    double num = 0.0, den = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
      num += (a[i] - b[i]).squaredNorm();
      den += a[i].squaredNorm();
    }
    worst = std::max(worst, std::sqrt(num) / (std::sqrt(den) + 1e-8));
  }
  return make_result("hessian-fd/" + label, worst, tol);
}

CheckResult check_roundtrip(const std::string& label, const ProblemSpec& p,
                            const HyperParams& h, const OptSettings& s, int n_draws,
                            std::uint64_t seed, double tol) {
  double worst = 0.0;
  int failed = 0;
  for (int k = 0; k < n_draws; ++k) {
    auto rng = make_engine(seed, Stream::Test, 1000 + static_cast<std::uint64_t>(k));
    const Vector x_uc = p.sample_prior(rng);
    const Vector d_uc = p.obs() + p.sample_obs_noise(rng);
    const OptResult opt = minimize(p, h, s, x_uc, d_uc);
    if (!opt.converged) {
      ++failed;
      continue;
    }
    const auto [xb, db] = inverse_transform(p, h, opt.x_star, opt.d_star);
    worst = std::max({worst, (xb - x_uc).lpNorm<Eigen::Infinity>(),
                      (db - d_uc).lpNorm<Eigen::Infinity>()});
  }
  std::ostringstream os;
  os << failed << " of " << n_draws << " minimizations did not converge";
  return make_result("roundtrip/" + label, worst, tol, os.str());
}

CheckResult check_anamorphosis_roundtrip(double tol) {
  const Anamorphosis a = Anamorphosis::exponential(1.0);
  double worst = 0.0;
  for (int k = 0; k <= 1000; ++k) {
    const double z = -5.0 + 0.01 * k;
    worst = std::max(worst, std::abs(a.to_gaussian(a.to_original(z)) - z));
  }
  return make_result("anamorphosis-roundtrip", worst, tol);
}

CheckResult check_scalar_determinant(double tol) {
  struct Case { double G, cx, cd, rho; };
  const std::array<Case, 4> cases{{{1.0, 1.0, 1.0, 0.5},
                                   {2.0, 0.1, 0.01, 0.65},
                                   {-3.0, 2.0, 0.5, 0.2},
                                   {0.5, 1.0, 4.0, 0.9}}};
  double worst = 0.0;
  for (const Case& c : cases) {
    const ProblemSpec p = make_linear("scalar", Vector::Zero(1), Matrix::Constant(1, 1, c.cx),
                                      Matrix::Constant(1, 1, c.G), Vector::Zero(1),
                                      Matrix::Constant(1, 1, c.cd));
    HyperParams h;
    h.rho = c.rho;
    const double got = std::exp(log_abs_det_jacobian(jacobian_blocks(
        p, h, Vector::Constant(1, 0.3), Vector::Constant(1, -0.2), JacobianMode::Full)));
    const double want = (1.0 + c.G * c.G * c.cx / c.cd) / c.rho;
    worst = std::max(worst, std::abs(got - want) / want);
  }
  return make_result("scalar-determinant", worst, tol);
}

CheckResult check_rho_invariance(const std::string& label, const ProblemSpec& p,
                                 const OptSettings& s, int n_draws, std::uint64_t seed,
                                 double tol) {
  HyperParams lo, hi;
  lo.rho = 0.2;
  hi.rho = 0.8;
  // A stationary point found jointly at one rho must remain stationary at
  // the other once d is re-eliminated. Comparing end points directly would
  // mix in the choice of local minimum on multimodal problems.
  double worst = 0.0;
  int compared = 0, same = 0;
  for (int k = 0; k < n_draws; ++k) {
    auto rng = make_engine(seed, Stream::Test, 5000 + static_cast<std::uint64_t>(k));
    const Vector x_uc = p.sample_prior(rng);
    const Vector d_uc = p.obs() + p.sample_obs_noise(rng);
    const OptResult a = minimize_joint(p, lo, s, x_uc, d_uc);
    const OptResult b = minimize_joint(p, hi, s, x_uc, d_uc);
    if (!a.converged || !b.converged) continue;
    ++compared;
    if ((a.x_star - b.x_star).lpNorm<Eigen::Infinity>() < 1e-6) ++same;
    for (const auto& [from, to] : {std::pair{&a, &hi}, std::pair{&b, &lo}}) {
      const Vector d = eliminate_d(p, *to, from->x_star, d_uc);
      const auto [rx, rd] = stationarity_residuals(p, *to, from->x_star, d, x_uc, d_uc);
      worst = std::max({worst, rx.lpNorm<Eigen::Infinity>(), rd.lpNorm<Eigen::Infinity>()});
    }
  }
  std::ostringstream os;
  os << compared << " of " << n_draws << " draws converged at both rho; " << same
     << " reached the same x*";
  return make_result("rho-invariance/" + label, worst, tol, os.str());
}

CheckResult check_quadrature_convergence(const std::string& label, const ProblemSpec& p,
                                         double tol) {
  const int n = p.dim_x() == 1 ? 2049 : 201;
  const GridDensity a = grid_marginal(p, default_axes(p, n));
  const GridDensity b = grid_marginal(p, default_axes(p, 2 * n - 1));
  const double change = std::abs(std::expm1(b.log_normalizer - a.log_normalizer));
  return make_result("quadrature-convergence/" + label, change, tol);
}

CheckResult check_gauss_linear_exactness(std::int64_t n_steps, std::uint64_t seed,
                                         int workers) {
  const ProblemSpec p = make_gauss_linear_toy();
  ChainSettings s;
  s.n_steps = n_steps;
  s.seed = seed;
  s.workers = workers;
  const ChainRecord rec = run_chain(p, s);
  const Matrix G = p.forward().jacobian(p.prior_mean());
  const GaussianPosterior post =
      conjugate_posterior(p.prior_mean(), p.prior_cov(), G, p.obs(), p.obs_cov());
  std::vector<double> xs;
  xs.reserve(rec.states.size());
  for (const auto& st : rec.states) xs.push_back(st.x(0));
  const auto [mean, se_mean] = batch_mean(xs);
  std::vector<double> sq;
  sq.reserve(xs.size());
  for (double x : xs) sq.push_back((x - mean) * (x - mean));
  const auto [var, se_var] = batch_mean(sq);
  const double z_mean = std::abs(mean - post.mean(0)) / se_mean;
  const double z_var = std::abs(var - post.cov(0, 0)) / se_var;
  std::ostringstream os;
  os << "mean " << mean << " (exact " << post.mean(0) << "), var " << var << " (exact "
     << post.cov(0, 0) << "), acceptance " << rec.acceptance_rate();
  return make_result("gauss-linear-exactness", std::max(z_mean, z_var), 4.0, os.str());
}

CheckResult check_example2_rho_sweep(std::int64_t n_steps, std::uint64_t seed, int workers) {
  const ProblemSpec p = make_example2();
  std::array<double, 2> rate{};
  const std::array<double, 2> rhos{0.35, 0.60};
  for (std::size_t k = 0; k < 2; ++k) {
    ChainSettings s;
    s.hyper.rho = rhos[k];
    s.n_steps = n_steps;
    s.seed = seed;
    s.workers = workers;
    rate[k] = run_chain(p, s).acceptance_rate();
  }
  std::ostringstream os;
  os << "acceptance " << rate[0] << " at rho=0.35, " << rate[1] << " at rho=0.60";
  return make_result("example2-rho-sweep", std::abs(rate[0] - rate[1]), 0.01, os.str());
}

std::vector<CheckResult> run_validation_suite(const ValidateOptions& o) {
  std::vector<CheckResult> out;
  const std::array<const char*, 4> names{"example1", "example2", "example3", "gauss-linear"};
  for (const char* name : names) {
    const ProblemSpec p = make_builtin(name);
    out.push_back(check_jacobian_fd(name, p, o.fd_points, o.seed));
    out.push_back(check_hessian_fd(name, p, o.fd_points, o.seed));
    out.push_back(check_roundtrip(name, p, HyperParams{}, OptSettings{}, o.roundtrip_draws,
                                  o.seed));
    out.push_back(check_rho_invariance(name, p, OptSettings{}, 100, o.seed));
    out.push_back(check_quadrature_convergence(name, p));
  }
  out.push_back(check_anamorphosis_roundtrip());
  out.push_back(check_scalar_determinant());
  out.push_back(check_gauss_linear_exactness(o.chain_steps, o.seed, o.workers));
  if (o.rate_checks) out.push_back(check_example2_rho_sweep(40000, o.seed, o.workers));
  return out;
}

}  // namespace rml
