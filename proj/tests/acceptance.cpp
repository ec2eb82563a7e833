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

// Acceptance checks. Prints one PASS/FAIL line per criterion and exits
// nonzero if any criterion fails.

#include "rml/densities.hpp"
#include "rml/io.hpp"
#include "rml/oracle.hpp"
#include "rml/random.hpp"
#include "rml/sampler.hpp"
#include "rml/validate.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

using namespace rml;

namespace {

int g_workers = 1;
int g_failed = 0;

void report(int id, bool ok, const std::string& detail) {
  std::printf("criterion %2d: %s  %s\n", id, ok ? "PASS" : "FAIL", detail.c_str());
  std::fflush(stdout);
  if (!ok) ++g_failed;
}

std::string fmt(const char* f, double a) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, a);
  return buf;
}

ChainSettings settings(double rho, std::int64_t n, std::uint64_t seed,
                       JacobianMode mode = JacobianMode::Full,
                       Algorithm alg = Algorithm::Augmented) {
  ChainSettings s;
  s.hyper.rho = rho;
  s.hyper.gamma = 0.01;
  s.n_steps = n;
  s.seed = seed;
  s.jacobian = mode;
  s.algorithm = alg;
  s.workers = g_workers;
  return s;
}

double prefix_rate(const ChainRecord& r, std::size_t n) {
  n = std::min(n, r.accept_flags.size());
  return double(std::count(r.accept_flags.begin(), r.accept_flags.begin() + n, 1)) / n;
}

std::vector<Vector> xs(const ChainRecord& r) {
  std::vector<Vector> out;
  out.reserve(r.states.size());
  for (const auto& s : r.states) out.push_back(s.x);
  return out;
}

bool in(double v, double lo, double hi) { return v >= lo && v <= hi; }

std::string trace(const ChainRecord& r) {
  std::ostringstream os;
  write_trace_csv(os, r);
  return os.str();
}

const ProblemSpec kEx1 = make_example1();
const ProblemSpec kEx2 = make_example2();

void criteria_1_to_3() {
  const auto r65 = run_chain(kEx1, settings(0.65, 40000, 1));
  const double a65 = r65.acceptance_rate();
  report(1, in(a65, 0.60, 0.66), "example1 rho=0.65 acceptance " + fmt("%.4f", a65) +
                                     " (target [0.60, 0.66])");

  const double a50 = run_chain(kEx1, settings(0.5, 40000, 1)).acceptance_rate();
  const double a80 = run_chain(kEx1, settings(0.8, 40000, 1)).acceptance_rate();
  report(2, in(a50, 0.60, 0.66) && in(a80, 0.60, 0.66),
         "example1 acceptance rho=0.5 " + fmt("%.4f", a50) + ", rho=0.8 " +
             fmt("%.4f", a80) + " (target [0.60, 0.66])");

  const auto g = grid_marginal(kEx1, {GridAxis{0.8, 3.0, 2049}}, g_workers);
  const auto rep = compare_samples_to_grid(xs(r65), g, 64);
  const std::size_t modes = find_modes(g).size();
  report(3, rep.tv_distance < 0.05 && modes == 2,
         "example1 TV " + fmt("%.4f", rep.tv_distance) + " (< 0.05), grid modes " +
             std::to_string(modes) + " (== 2)");
}

void criteria_4_to_6() {
  const auto r35 = run_chain(kEx2, settings(0.35, 40000, 1));
  const double a4k = prefix_rate(r35, 4000);
  const double a40k = r35.acceptance_rate();
  const double a60 = run_chain(kEx2, settings(0.60, 40000, 1)).acceptance_rate();
  const bool ok4 = in(a4k, 0.09, 0.13) && in(a40k, 0.09, 0.13) && std::abs(a40k - a60) < 0.01;
  report(4, ok4, "example2 full rho=0.35 acceptance " + fmt("%.4f", a4k) + " @4000, " +
                     fmt("%.4f", a40k) + " @40000 (target 0.11 +- 0.02); rho=0.60 " +
                     fmt("%.4f", a60) + ", diff " + fmt("%.4f", std::abs(a40k - a60)) +
                     " (< 0.01)");

  const auto gn = run_chain(kEx2, settings(0.35, 40000, 1, JacobianMode::GaussNewton));
  const double agn = gn.acceptance_rate();
  report(5, in(agn, 0.50, 0.60),
         "example2 gauss-newton acceptance " + fmt("%.4f", agn) + " (target 0.55 +- 0.05)");

  const auto g = grid_marginal(kEx2, {GridAxis{-4, 4, 401}, GridAxis{-4, 4, 401}}, g_workers);
  const auto b = basins(g);
  const auto none = run_chain(kEx2, settings(0.35, 40000, 1, JacobianMode::None));
  const auto occ_full = basin_occupation(b, g, xs(r35));
  const auto occ_none = basin_occupation(b, g, xs(none));
  double dev_full = 0.0, dev_none = 0.0;
  std::string masses, of, on;
  for (std::size_t k = 0; k < b.masses.size(); ++k) {
    if (b.masses[k] < 1e-3) continue;
    dev_full = std::max(dev_full, std::abs(occ_full[k] - b.masses[k]));
    dev_none = std::max(dev_none, std::abs(occ_none[k] - b.masses[k]));
    masses += fmt(" %.3f", b.masses[k]);
    of += fmt(" %.3f", occ_full[k]);
    on += fmt(" %.3f", occ_none[k]);
  }
  report(6, dev_full <= 0.05 && dev_none > 0.05,
         "example2 basin masses" + masses + "; full" + of + " (max dev " +
             fmt("%.3f", dev_full) + " <= 0.05); none" + on + " (max dev " +
             fmt("%.3f", dev_none) + " > 0.05)");
}

void criterion_7() {
  const auto tp = make_example3_transformed();
  const auto r = run_chain(tp.problem, settings(0.25, 40000, 1));
  const double a = r.acceptance_rate();
  std::vector<Vector> orig;
  for (const auto& s : r.states) orig.push_back(Vector::Constant(1, tp.anamorphosis.to_original(s.x(0))));
  const auto g = grid_from_function({GridAxis{0.0, 8.0, 4001}},
                                    [](const Vector& x) { return example3_log_posterior_original(x(0)); });
  const double tv = compare_samples_to_grid(orig, g, 64).tv_distance;
  report(7, in(a, 0.70, 0.78) && tv < 0.05,
         "example3 rho=0.25 acceptance " + fmt("%.4f", a) + " (target 0.74 +- 0.04), TV " +
             fmt("%.4f", tv) + " (< 0.05)");
}

void criterion_8() {
  const double a1 =
      run_chain(kEx1, settings(0.5, 40000, 1, JacobianMode::Full, Algorithm::Legacy1D))
          .acceptance_rate();
  const double a2 = run_chain(make_gauss_linear_toy(),
                              settings(0.5, 40000, 1, JacobianMode::Full, Algorithm::Legacy1D))
                        .acceptance_rate();
  report(8, in(a1, 0.72, 0.80) && a2 >= 0.999,
         "legacy example1 acceptance " + fmt("%.4f", a1) + " (target 0.76 +- 0.04), gauss-linear " +
             fmt("%.4f", a2) + " (>= 0.999)");
}

void criterion_9() {
  const auto p = make_gauss_linear_toy();
  const auto post = conjugate_posterior(p.prior_mean(), p.prior_cov(), Matrix::Identity(1, 1),
                                        p.obs(), p.obs_cov());
  const double m = post.mean(0), v = post.cov(0, 0);
  const int n = 100000;

  // proposals: independent draws
  HyperParams h;
  h.rho = 0.5;
  auto rng = make_engine(2024, Stream::Test, 9);
  std::vector<double> px(n);
  for (int i = 0; i < n; ++i) px[i] = propose(p, h, {}, rng, JacobianMode::Full).x_star(0);
  double pm = 0.0, pv = 0.0;
  for (double x : px) pm += x;
  pm /= n;
  for (double x : px) pv += (x - pm) * (x - pm);
  pv /= n - 1;
  const double zpm = std::abs(pm - m) / std::sqrt(v / n);
  const double zpv = std::abs(pv - v) / (v * std::sqrt(2.0 / (n - 1)));

  // chain: batch-means standard errors
  const auto r = run_chain(p, settings(0.5, n, 2024));
  std::vector<double> cx, cx2;
  for (const auto& s : r.states) {
    cx.push_back(s.x(0));
    cx2.push_back((s.x(0) - m) * (s.x(0) - m));
  }
  const auto [cm, cm_se] = batch_mean(cx);
  const auto [cv, cv_se] = batch_mean(cx2);
  const double zcm = std::abs(cm - m) / cm_se;
  const double zcv = std::abs(cv - v) / cv_se;
  const double worst = std::max({zpm, zpv, zcm, zcv});
  report(9, worst < 4.0,
         "gauss-linear z-scores: proposal mean " + fmt("%.2f", zpm) + ", var " + fmt("%.2f", zpv) +
             "; chain mean " + fmt("%.2f", zcm) + ", var " + fmt("%.2f", zcv) + " (all < 4)");
}

// Relative error of the assembled transform Jacobian against central
// differences of inverse_transform, worst over n random points.
double transform_jacobian_error(const ProblemSpec& p, const HyperParams& h, int n) {
  const Eigen::Index nx = p.dim_x(), nd = p.dim_d();
  auto rng = make_engine(77, Stream::Test, 10);
  double worst = 0.0;
  for (int i = 0; i < n; ++i) {
    const Vector xs = p.sample_prior(rng);
    const Vector ds = p.obs() + p.sample_obs_noise(rng);
    const Matrix J = jacobian_blocks(p, h, xs, ds, JacobianMode::Full).assemble();
    Matrix fd(nx + nd, nx + nd);
    for (Eigen::Index k = 0; k < nx + nd; ++k) {
      Vector xp = xs, xm = xs, dp = ds, dm = ds;
      const double base = k < nx ? xs(k) : ds(k - nx);
      const double eps = 1e-6 * std::max(1.0, std::abs(base));
      if (k < nx) {
        xp(k) += eps;
        xm(k) -= eps;
      } else {
        dp(k - nx) += eps;
        dm(k - nx) -= eps;
      }
      const auto [a1, b1] = inverse_transform(p, h, xp, dp);
      const auto [a2, b2] = inverse_transform(p, h, xm, dm);
      fd.col(k) << (a1 - a2) / (2 * eps), (b1 - b2) / (2 * eps);
    }
    worst = std::max(worst, (J - fd).norm() / (J.norm() + 1e-8));
  }
  return worst;
}

void criterion_10() {
  bool ok = true;
  std::string detail;
  const char* names[] = {"example1", "example2", "example3"};
  const double rhos[] = {0.65, 0.35, 0.25};
  for (int i = 0; i < 3; ++i) {
    const auto p = make_builtin(names[i]);
    HyperParams h;
    h.rho = rhos[i];
    const auto fwd = check_jacobian_fd(names[i], p, 100, 2024, 1e-4);
    const double tj = transform_jacobian_error(p, h, 100);
    const auto rt = check_roundtrip(names[i], p, h, {}, 1000, 2024, 1e-6);
    ok = ok && fwd.passed && tj <= 1e-4 && rt.passed;
    detail += std::string(names[i]) + " fd " + fmt("%.1e", fwd.value) + "/" + fmt("%.1e", tj) +
              " roundtrip " + fmt("%.1e", rt.value) + "; ";
  }
  const auto det = check_scalar_determinant(1e-10);
  ok = ok && det.passed;
  detail += "scalar det " + fmt("%.1e", det.value);
  report(10, ok, detail + " (fd <= 1e-4, roundtrip <= 1e-6, det <= 1e-10)");
}

void criterion_11() {
  bool same = true;
  for (const auto& [p, rho] : {std::pair{kEx1, 0.65}, std::pair{kEx2, 0.35}}) {
    auto s = settings(rho, 5000, 31337);
    const std::string a = trace(run_chain(p, s));
    s.workers = 1;
    const std::string b = trace(run_chain(p, s));
    same = same && a == b && !a.empty();
  }
  report(11, same, std::string("trace CSVs ") + (same ? "byte-identical" : "differ") +
                       " across repeated runs and worker counts");
}

}  // namespace

int main() {
  g_workers = std::max(1u, std::min(8u, std::thread::hardware_concurrency()));
  set_warning_handler([](const std::string&) {});
  try {
    criteria_1_to_3();
    criteria_4_to_6();
    criterion_7();
    criterion_8();
    criterion_9();
    criterion_10();
    criterion_11();
  } catch (const std::exception& e) {
    std::printf("aborted: %s\n", e.what());
    return 2;
  }
  std::printf("%d criterion(s) failed\n", g_failed);
  return g_failed == 0 ? 0 : 1;
}
