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

#include "rml/rml.h"

#include "rml/io.hpp"
#include "rml/oracle.hpp"
#include "rml/sampler.hpp"
#include "rml/validate.hpp"

#include <algorithm>
#include <fstream>
#include <new>
#include <optional>
#include <string>

struct rml_problem {
  rml::ProblemSpec spec;
  std::optional<rml::Anamorphosis> anamorphosis;
};

struct rml_chain {
  rml::ChainRecord record;
  std::optional<rml::Anamorphosis> anamorphosis;
};

struct rml_grid {
  rml::GridDensity grid;
};

namespace {

thread_local std::string t_last_error;

rml_status fail(rml_status s, const std::string& msg) {
  t_last_error = msg;
  return s;
}

template <typename Fn>
rml_status guard(Fn&& fn) {
  try {
    t_last_error.clear();
    fn();
    return RML_OK;
  } catch (const rml::Error& e) {
    return fail(static_cast<rml_status>(e.code()), e.what());
  } catch (const std::bad_alloc&) {
    return fail(RML_E_INTERNAL, "out of memory");
  } catch (const std::exception& e) {
    return fail(RML_E_INTERNAL, e.what());
  } catch (...) {
    return fail(RML_E_INTERNAL, "unknown error");
  }
}

void require_ptr(const void* p, const char* what) {
  RML_REQUIRE(p != nullptr, rml::ErrorCode::InvalidArgument,
              std::string(what) + " must not be null");
}

rml::Vector vec(const double* v, int n) {
  return Eigen::Map<const rml::Vector>(v, n);
}

rml::Matrix mat(const double* v, int rows, int cols) {
  return Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>(
      v, rows, cols);
}

rml::GridAxis axis(const rml_axis& a) { return rml::GridAxis{a.lo, a.hi, a.n}; }

rml::ChainSettings to_settings(const rml_chain_settings& c) {
  rml::ChainSettings s;
  s.hyper.rho = c.rho;
  s.hyper.gamma = c.gamma;
  s.n_steps = c.n_steps;
  s.seed = c.seed;
  RML_REQUIRE(c.jacobian >= 0 && c.jacobian <= 2, rml::ErrorCode::InvalidArgument,
              "unknown jacobian mode");
  s.jacobian = static_cast<rml::JacobianMode>(c.jacobian);
  RML_REQUIRE(c.algorithm == 0 || c.algorithm == 1, rml::ErrorCode::InvalidArgument,
              "unknown algorithm");
  s.algorithm = static_cast<rml::Algorithm>(c.algorithm);
  s.workers = c.workers;
  s.opt.max_iters = c.max_iters;
  s.opt.grad_tol = c.grad_tol;
  s.opt.step_tol = c.step_tol;
  s.opt.lm_lambda0 = c.lm_lambda0;
  s.opt.exact_hessian = c.exact_hessian != 0;
  s.quad.nodes = c.quad_nodes;
  s.quad.half_width_sd = c.quad_half_width_sd;
  return s;
}

std::ofstream open_out(const char* path) {
  require_ptr(path, "path");
  std::ofstream os(path, std::ios::binary);
  RML_REQUIRE(os.good(), rml::ErrorCode::Io, std::string("cannot open ") + path);
  return os;
}

void finish_out(std::ofstream& os, const char* path) {
  os.flush();
  RML_REQUIRE(os.good(), rml::ErrorCode::Io, std::string("write failed: ") + path);
}

std::vector<rml::Vector> chain_samples(const rml_chain* c, std::int64_t discard,
                                       bool to_original) {
  RML_REQUIRE(discard >= 0 && discard < static_cast<std::int64_t>(c->record.states.size()),
              rml::ErrorCode::InvalidArgument, "discard must leave at least one state");
  RML_REQUIRE(!to_original || c->anamorphosis.has_value(), rml::ErrorCode::Unsupported,
              "problem has no anamorphosis");
  std::vector<rml::Vector> out;
  out.reserve(c->record.states.size() - static_cast<std::size_t>(discard));
  for (std::size_t k = static_cast<std::size_t>(discard); k < c->record.states.size(); ++k) {
    rml::Vector x = c->record.states[k].x;
    if (to_original) x(0) = c->anamorphosis->to_original(x(0));
    out.push_back(std::move(x));
  }
  return out;
}

}  // namespace

extern "C" {

const char* rml_last_error(void) { return t_last_error.c_str(); }

const char* rml_status_string(rml_status s) {
  if (s == RML_OK) return "ok";
  if (s == RML_E_INTERNAL) return "internal error";
  if (s >= RML_E_INVALID_ARGUMENT && s <= RML_E_CONFIG) {
    return rml::to_string(static_cast<rml::ErrorCode>(s));
  }
  return "unknown status";
}

const char* rml_version(void) { return "0.1.0"; }

rml_status rml_problem_builtin(const char* name, rml_problem** out) {
  return guard([&] {
    require_ptr(name, "name");
    require_ptr(out, "out");
    *out = nullptr;
    const std::string n(name);
    if (n == "example3") {
      auto t = rml::make_example3_transformed();
      *out = new rml_problem{std::move(t.problem), std::move(t.anamorphosis)};
    } else {
      *out = new rml_problem{rml::make_builtin(n), std::nullopt};
    }
  });
}

rml_status rml_problem_linear(const char* name, int dim_x, int dim_d,
                              const double* prior_mean, const double* prior_cov,
                              const double* G, const double* obs, const double* obs_cov,
                              rml_problem** out) {
  return guard([&] {
    require_ptr(out, "out");
    *out = nullptr;
    RML_REQUIRE(dim_x >= 1 && dim_d >= 1, rml::ErrorCode::InvalidArgument,
                "dimensions must be positive");
    for (const double* ptr : {prior_mean, prior_cov, G, obs, obs_cov}) require_ptr(ptr, "matrix");
    *out = new rml_problem{
        rml::make_linear(name ? name : "linear", vec(prior_mean, dim_x),
                         mat(prior_cov, dim_x, dim_x), mat(G, dim_d, dim_x), vec(obs, dim_d),
                         mat(obs_cov, dim_d, dim_d)),
        std::nullopt};
  });
}

void rml_problem_free(rml_problem* p) { delete p; }

int rml_problem_dim_x(const rml_problem* p) {
  return p ? static_cast<int>(p->spec.dim_x()) : 0;
}

int rml_problem_dim_d(const rml_problem* p) {
  return p ? static_cast<int>(p->spec.dim_d()) : 0;
}

int rml_problem_has_anamorphosis(const rml_problem* p) {
  return p && p->anamorphosis.has_value() ? 1 : 0;
}

rml_status rml_problem_to_original(const rml_problem* p, double z, double* x) {
  return guard([&] {
    require_ptr(p, "problem");
    require_ptr(x, "x");
    RML_REQUIRE(p->anamorphosis.has_value(), rml::ErrorCode::Unsupported,
                "problem has no anamorphosis");
    *x = p->anamorphosis->to_original(z);
  });
}

rml_status rml_log_target_marginal(const rml_problem* p, const double* x, double* out) {
  return guard([&] {
    require_ptr(p, "problem");
    require_ptr(x, "x");
    require_ptr(out, "out");
    *out = rml::log_target_marginal(p->spec, vec(x, static_cast<int>(p->spec.dim_x())));
  });
}

rml_status rml_log_target_joint(const rml_problem* p, double gamma, const double* x,
                                const double* d, double* out) {
  return guard([&] {
    require_ptr(p, "problem");
    require_ptr(x, "x");
    require_ptr(d, "d");
    require_ptr(out, "out");
    rml::HyperParams h;
    h.gamma = gamma;
    h.validate();
    *out = rml::log_target_joint(p->spec, h, vec(x, static_cast<int>(p->spec.dim_x())),
                                 vec(d, static_cast<int>(p->spec.dim_d())));
  });
}

rml_status rml_log_prior_joint(const rml_problem* p, const double* x_uc, const double* d_uc,
                               double* out) {
  return guard([&] {
    require_ptr(p, "problem");
    require_ptr(x_uc, "x_uc");
    require_ptr(d_uc, "d_uc");
    require_ptr(out, "out");
    *out = rml::log_prior_joint(p->spec, vec(x_uc, static_cast<int>(p->spec.dim_x())),
                                vec(d_uc, static_cast<int>(p->spec.dim_d())));
  });
}

void rml_chain_settings_default(rml_chain_settings* s) {
  if (!s) return;
  const rml::ChainSettings d;
  s->rho = d.hyper.rho;
  s->gamma = d.hyper.gamma;
  s->n_steps = d.n_steps;
  s->seed = d.seed;
  s->jacobian = static_cast<int>(d.jacobian);
  s->algorithm = static_cast<int>(d.algorithm);
  s->workers = d.workers;
  s->max_iters = d.opt.max_iters;
  s->grad_tol = d.opt.grad_tol;
  s->step_tol = d.opt.step_tol;
  s->lm_lambda0 = d.opt.lm_lambda0;
  s->exact_hessian = d.opt.exact_hessian ? 1 : 0;
  s->quad_nodes = d.quad.nodes;
  s->quad_half_width_sd = d.quad.half_width_sd;
}

void rml_set_warning_callback(rml_warning_callback cb, void* user) {
  if (cb == nullptr) {
    rml::set_warning_handler({});
  } else {
    rml::set_warning_handler([cb, user](const std::string& m) { cb(m.c_str(), user); });
  }
}

rml_status rml_chain_run(const rml_problem* p, const rml_chain_settings* s, rml_chain** out) {
  return guard([&] {
    require_ptr(p, "problem");
    require_ptr(s, "settings");
    require_ptr(out, "out");
    *out = nullptr;
    auto c = std::make_unique<rml_chain>();
    c->record = rml::run_chain(p->spec, to_settings(*s));
    c->anamorphosis = p->anamorphosis;
    *out = c.release();
  });
}

void rml_chain_free(rml_chain* c) { delete c; }

rml_status rml_chain_summary_get(const rml_chain* c, rml_chain_summary* out) {
  return guard([&] {
    require_ptr(c, "chain");
    require_ptr(out, "out");
    const auto& r = c->record;
    out->n_proposed = r.n_proposed;
    out->n_accepted = r.n_accepted;
    out->n_optfail = r.n_optfail;
    out->n_degenerate = r.n_degenerate;
    out->acceptance_rate = r.acceptance_rate();
    out->acceptance_rate_valid = r.acceptance_rate_valid();
    out->seed = r.seed;
  });
}

rml_status rml_chain_acceptance_prefix(const rml_chain* c, int64_t n_steps, double* rate) {
  return guard([&] {
    require_ptr(c, "chain");
    require_ptr(rate, "rate");
    const auto& flags = c->record.accept_flags;
    RML_REQUIRE(n_steps >= 1 && n_steps <= static_cast<int64_t>(flags.size()),
                rml::ErrorCode::InvalidArgument, "prefix length out of range");
    const auto n = std::count(flags.begin(), flags.begin() + n_steps, 1);
    *rate = static_cast<double>(n) / static_cast<double>(n_steps);
  });
}

rml_status rml_chain_state(const rml_chain* c, int64_t step, double* x, double* d,
                           double* log_pi, double* log_q, int* accepted) {
  return guard([&] {
    require_ptr(c, "chain");
    const auto& r = c->record;
    RML_REQUIRE(step >= 0 && step <= static_cast<int64_t>(r.states.size()),
                rml::ErrorCode::InvalidArgument, "step out of range");
    const rml::ChainState& s =
        step == 0 ? r.initial : r.states[static_cast<std::size_t>(step - 1)];
    if (x) std::copy(s.x.data(), s.x.data() + s.x.size(), x);
    if (d) std::copy(s.d.data(), s.d.data() + s.d.size(), d);
    if (log_pi) *log_pi = s.log_pi_joint;
    if (log_q) *log_q = s.log_q;
    if (accepted) *accepted = step == 0 ? 1 : r.accept_flags[static_cast<std::size_t>(step - 1)];
  });
}

rml_status rml_chain_write_trace(const rml_chain* c, const char* path) {
  return guard([&] {
    require_ptr(c, "chain");
    auto os = open_out(path);
    rml::write_trace_csv(os, c->record);
    finish_out(os, path);
  });
}

rml_status rml_grid_marginal(const rml_problem* p, const rml_axis* axes, int workers,
                             rml_grid** out) {
  return guard([&] {
    require_ptr(p, "problem");
    require_ptr(out, "out");
    *out = nullptr;
    std::vector<rml::GridAxis> ax;
    if (axes == nullptr) {
      ax = rml::default_axes(p->spec);
    } else {
      for (Eigen::Index k = 0; k < p->spec.dim_x(); ++k) ax.push_back(axis(axes[k]));
    }
    *out = new rml_grid{rml::grid_marginal(p->spec, ax, workers)};
  });
}

rml_status rml_problem_default_axes(const rml_problem* p, int n, rml_axis* axes) {
  return guard([&] {
    require_ptr(p, "problem");
    require_ptr(axes, "axes");
    const auto ax = rml::default_axes(p->spec, n);
    for (std::size_t k = 0; k < ax.size(); ++k) axes[k] = rml_axis{ax[k].lo, ax[k].hi, ax[k].n};
  });
}

rml_status rml_grid_joint(const rml_problem* p, double gamma, rml_axis x_axis,
                          rml_axis d_axis, int workers, rml_grid** out) {
  return guard([&] {
    require_ptr(p, "problem");
    require_ptr(out, "out");
    *out = nullptr;
    rml::HyperParams h;
    h.gamma = gamma;
    *out = new rml_grid{rml::grid_joint(p->spec, h, axis(x_axis), axis(d_axis), workers)};
  });
}

rml_status rml_grid_proposal(const rml_problem* p, double rho, int jacobian, rml_axis x_axis,
                             rml_axis d_axis, int workers, rml_grid** out) {
  return guard([&] {
    require_ptr(p, "problem");
    require_ptr(out, "out");
    *out = nullptr;
    RML_REQUIRE(jacobian == RML_JACOBIAN_FULL || jacobian == RML_JACOBIAN_GAUSS_NEWTON,
                rml::ErrorCode::InvalidArgument, "proposal grids need full or gauss-newton");
    rml::HyperParams h;
    h.rho = rho;
    *out = new rml_grid{rml::grid_proposal(p->spec, h, axis(x_axis), axis(d_axis),
                                           static_cast<rml::JacobianMode>(jacobian), workers)};
  });
}

rml_status rml_grid_original(const rml_problem* p, rml_axis ax, rml_grid** out) {
  return guard([&] {
    require_ptr(p, "problem");
    require_ptr(out, "out");
    *out = nullptr;
    RML_REQUIRE(p->anamorphosis.has_value() && p->spec.name() == "example3",
                rml::ErrorCode::Unsupported,
                "original-variable posterior is only available for example3");
    *out = new rml_grid{rml::grid_from_function(
        {axis(ax)},
        [](const rml::Vector& x) { return rml::example3_log_posterior_original(x(0)); })};
  });
}

void rml_grid_free(rml_grid* g) { delete g; }

int rml_grid_dims(const rml_grid* g) { return g ? static_cast<int>(g->grid.dims()) : 0; }

size_t rml_grid_size(const rml_grid* g) { return g ? g->grid.size() : 0; }

double rml_grid_log_normalizer(const rml_grid* g) { return g ? g->grid.log_normalizer : 0.0; }

rml_status rml_grid_write_csv(const rml_grid* g, const char* path) {
  return guard([&] {
    require_ptr(g, "grid");
    auto os = open_out(path);
    rml::write_grid_csv(os, g->grid);
    finish_out(os, path);
  });
}

rml_status rml_grid_modes(const rml_grid* g, double* coords, size_t capacity,
                          size_t* n_modes) {
  return guard([&] {
    require_ptr(g, "grid");
    require_ptr(n_modes, "n_modes");
    const auto modes = rml::find_modes(g->grid);
    *n_modes = modes.size();
    if (coords == nullptr) return;
    const std::size_t dims = g->grid.dims();
    for (std::size_t k = 0; k < std::min(capacity, modes.size()); ++k) {
      const rml::Vector x = g->grid.point(modes[k]);
      std::copy(x.data(), x.data() + dims, coords + k * dims);
    }
  });
}

rml_status rml_grid_basin_masses(const rml_grid* g, double* masses, size_t capacity,
                                 size_t* n_basins) {
  return guard([&] {
    require_ptr(g, "grid");
    require_ptr(n_basins, "n_basins");
    const auto b = rml::basins(g->grid);
    *n_basins = b.masses.size();
    if (masses) std::copy_n(b.masses.begin(), std::min(capacity, b.masses.size()), masses);
  });
}

rml_status rml_grid_mean_conditional_sd(const rml_grid* g, double* out) {
  return guard([&] {
    require_ptr(g, "grid");
    require_ptr(out, "out");
    *out = rml::mean_conditional_sd(g->grid);
  });
}

rml_status rml_grid_correlation(const rml_grid* g, double* out) {
  return guard([&] {
    require_ptr(g, "grid");
    require_ptr(out, "out");
    *out = rml::grid_correlation(g->grid);
  });
}

rml_status rml_chain_compare_grid(const rml_chain* c, const rml_grid* g, int bins,
                                  int64_t discard, int to_original, const char* hist_path,
                                  rml_comparison* out) {
  return guard([&] {
    require_ptr(c, "chain");
    require_ptr(g, "grid");
    require_ptr(out, "out");
    const auto samples = chain_samples(c, discard, to_original != 0);
    const rml::SampleReport r = rml::compare_samples_to_grid(samples, g->grid, bins);
    *out = rml_comparison{};
    out->tv_distance = r.tv_distance;
    out->outside_fraction = r.outside_fraction;
    for (Eigen::Index k = 0; k < std::min<Eigen::Index>(2, r.mean_error.size()); ++k) {
      out->mean_error[k] = r.mean_error(k);
      out->variance_error[k] = r.variance_error(k);
    }
    if (hist_path) {
      auto os = open_out(hist_path);
      rml::write_histogram_csv(os, g->grid, r, bins);
      finish_out(os, hist_path);
    }
  });
}

rml_status rml_chain_basin_occupation(const rml_chain* c, const rml_grid* g, int64_t discard,
                                      double* occupation, size_t capacity, size_t* n_basins) {
  return guard([&] {
    require_ptr(c, "chain");
    require_ptr(g, "grid");
    require_ptr(n_basins, "n_basins");
    const auto b = rml::basins(g->grid);
    const auto occ = rml::basin_occupation(b, g->grid, chain_samples(c, discard, false));
    *n_basins = occ.size();
    if (occupation) std::copy_n(occ.begin(), std::min(capacity, occ.size()), occupation);
  });
}

void rml_validate_options_default(rml_validate_options* o) {
  if (!o) return;
  const rml::ValidateOptions d;
  o->fd_points = d.fd_points;
  o->roundtrip_draws = d.roundtrip_draws;
  o->chain_steps = d.chain_steps;
  o->seed = d.seed;
  o->workers = d.workers;
  o->rate_checks = d.rate_checks ? 1 : 0;
}

rml_status rml_validate(const rml_validate_options* o, rml_check_callback cb, void* user,
                        int* n_failed) {
  return guard([&] {
    rml::ValidateOptions opt;
    if (o) {
      opt.fd_points = o->fd_points;
      opt.roundtrip_draws = o->roundtrip_draws;
      opt.chain_steps = o->chain_steps;
      opt.seed = o->seed;
      opt.workers = o->workers;
      opt.rate_checks = o->rate_checks != 0;
    }
    int failed = 0;
    for (const auto& r : rml::run_validation_suite(opt)) {
      if (!r.passed) ++failed;
      if (cb) cb(r.name.c_str(), r.passed ? 1 : 0, r.value, r.tolerance, r.detail.c_str(), user);
    }
    if (n_failed) *n_failed = failed;
  });
}

}  // extern "C"
