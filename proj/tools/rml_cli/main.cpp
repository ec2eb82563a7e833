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

// rml: run chains, emit quadrature references, and run the property suite.

#include "config.hpp"

#include "rml/rml.h"

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <thread>
#include <vector>

namespace fs = std::filesystem;
using nlohmann::ordered_json;

namespace {

struct ApiError : std::runtime_error {
  rml_status status;
  ApiError(rml_status s, const std::string& what)
      : std::runtime_error(what + ": " + rml_last_error()), status(s) {}
};

void check(rml_status s, const std::string& what) {
  if (s != RML_OK) throw ApiError(s, what);
}

struct ProblemDeleter {
  void operator()(rml_problem* p) const { rml_problem_free(p); }
};
struct ChainDeleter {
  void operator()(rml_chain* c) const { rml_chain_free(c); }
};
struct GridDeleter {
  void operator()(rml_grid* g) const { rml_grid_free(g); }
};
using ProblemPtr = std::unique_ptr<rml_problem, ProblemDeleter>;
using ChainPtr = std::unique_ptr<rml_chain, ChainDeleter>;
using GridPtr = std::unique_ptr<rml_grid, GridDeleter>;

ProblemPtr make_problem(const rmlcli::RunConfig& c) {
  rml_problem* p = nullptr;
  if (c.linear) {
    const auto& l = *c.linear;
    check(rml_problem_linear("linear", l.dim_x(), l.dim_d(), l.prior_mean.data(),
                             l.prior_cov.data(), l.G.data(), l.obs.data(), l.obs_cov.data(), &p),
          "building the linear problem");
  } else {
    check(rml_problem_builtin(c.problem.c_str(), &p), "building problem " + c.problem);
  }
  return ProblemPtr(p);
}

// Same splitmix derivation as the library: chain 0 keeps the base seed.
std::uint64_t mix64(std::uint64_t z) {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

std::uint64_t chain_seed(std::uint64_t base, std::uint64_t chain) {
  constexpr std::uint64_t kChainStream = 4;
  return chain == 0 ? base : mix64(mix64(mix64(base) ^ kChainStream) ^ chain);
}

GridPtr marginal_grid(rml_problem* p, const rmlcli::RunConfig& c) {
  const int dim = rml_problem_dim_x(p);
  std::vector<rml_axis> axes(static_cast<std::size_t>(dim));
  if (c.grid.empty()) {
    check(rml_problem_default_axes(p, c.grid_nodes, axes.data()), "grid extents");
  } else {
    if (static_cast<int>(c.grid.size()) != dim) {
      throw std::runtime_error("output.grid_lo/grid_hi need " + std::to_string(dim) +
                               " entries for this problem");
    }
    for (int k = 0; k < dim; ++k) {
      axes[static_cast<std::size_t>(k)] = {c.grid[static_cast<std::size_t>(k)].lo,
                                           c.grid[static_cast<std::size_t>(k)].hi, c.grid_nodes};
    }
  }
  rml_grid* g = nullptr;
  check(rml_grid_marginal(p, axes.data(), c.chain.workers, &g), "grid quadrature");
  return GridPtr(g);
}

struct ChainOutcome {
  ordered_json summary;
  bool ok = true;
};

ChainOutcome run_one(const rmlcli::RunConfig& cfg, const fs::path& dir) {
  fs::create_directories(dir);
  ChainOutcome out;
  ordered_json& s = out.summary;
  const rml_chain_settings& cs = cfg.chain;
  s["status"] = "ok";
  s["problem"] = cfg.problem;
  s["algorithm"] = rmlcli::algorithm_name(cs.algorithm);
  s["seed"] = cs.seed;
  s["rho"] = cs.rho;
  s["gamma"] = cs.gamma;
  s["jacobian_mode"] = rmlcli::jacobian_name(cs.jacobian);
  s["n_steps"] = cs.n_steps;

  const auto t0 = std::chrono::steady_clock::now();
  try {
    ProblemPtr problem = make_problem(cfg);
    rml_chain* raw = nullptr;
    check(rml_chain_run(problem.get(), &cs, &raw), "running the chain");
    ChainPtr chain(raw);
    s["wall_seconds"] =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

    rml_chain_summary sum{};
    check(rml_chain_summary_get(chain.get(), &sum), "summarizing");
    s["acceptance_rate"] = sum.acceptance_rate;
    s["acceptance_rate_valid"] = sum.acceptance_rate_valid;
    s["n_accepted"] = sum.n_accepted;
    s["n_optfail"] = sum.n_optfail;
    s["n_degenerate"] = sum.n_degenerate;
    if (cs.n_steps > 4000) {
      double r4000 = 0.0;
      check(rml_chain_acceptance_prefix(chain.get(), 4000, &r4000), "acceptance prefix");
      s["acceptance_rate_first_4000"] = r4000;
    }
    check(rml_chain_write_trace(chain.get(), (dir / "trace.csv").string().c_str()),
          "writing trace.csv");

    const int dim = rml_problem_dim_x(problem.get());
    if (dim <= 2) {
      GridPtr grid = marginal_grid(problem.get(), cfg);
      check(rml_grid_write_csv(grid.get(), (dir / "grid.csv").string().c_str()),
            "writing grid.csv");
      rml_comparison cmp{};
      check(rml_chain_compare_grid(chain.get(), grid.get(), cfg.resolved_bins(dim),
                                   cfg.discard_prefix, 0,
                                   (dir / "histogram.csv").string().c_str(), &cmp),
            "writing histogram.csv");
      s["tv_distance"] = cmp.tv_distance;
      if (rml_problem_has_anamorphosis(problem.get())) {
        rml_grid* og = nullptr;
        check(rml_grid_original(problem.get(), {0.0, 8.0, 4001}, &og), "original-variable grid");
        GridPtr orig(og);
        check(rml_grid_write_csv(orig.get(), (dir / "grid_original.csv").string().c_str()),
              "writing grid_original.csv");
        check(rml_chain_compare_grid(chain.get(), orig.get(), cfg.resolved_bins(1),
                                     cfg.discard_prefix, 1,
                                     (dir / "histogram_original.csv").string().c_str(), &cmp),
              "writing histogram_original.csv");
        s["tv_distance_original"] = cmp.tv_distance;
      }
    }
  } catch (const std::exception& e) {
    out.ok = false;
    s["status"] = "error";
    s["error"] = e.what();
    s["wall_seconds"] =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  }
  s["discard_prefix"] = cfg.discard_prefix;
  s["config"] = ordered_json::parse(rmlcli::to_json(cfg));
  s["config_toml"] = rmlcli::to_toml(cfg);
  std::ofstream os(dir / "summary.json", std::ios::binary);
  os << s.dump(2) << '\n';
  if (!os) {
    out.ok = false;
    std::cerr << "rml: cannot write " << (dir / "summary.json").string() << '\n';
  }
  return out;
}

int cmd_run(const std::string& config_path, std::optional<std::uint64_t> seed,
            std::optional<std::string> out_dir, int n_chains, std::optional<int> workers) {
  rmlcli::RunConfig cfg = rmlcli::load_config(config_path);
  if (seed) cfg.chain.seed = *seed;
  if (out_dir) cfg.out_dir = *out_dir;
  if (workers) cfg.chain.workers = *workers;

  std::vector<rmlcli::RunConfig> configs;
  std::vector<fs::path> dirs;
  for (int k = 0; k < n_chains; ++k) {
    rmlcli::RunConfig c = cfg;
    c.chain.seed = chain_seed(cfg.chain.seed, static_cast<std::uint64_t>(k));
    c.out_dir = n_chains == 1 ? cfg.out_dir : (fs::path(cfg.out_dir) / ("chain_" + std::to_string(k))).string();
    dirs.emplace_back(c.out_dir);
    configs.push_back(std::move(c));
  }

  std::vector<ChainOutcome> outcomes(configs.size());
  std::vector<std::thread> threads;
  for (std::size_t k = 0; k < configs.size(); ++k) {
    threads.emplace_back([&, k] { outcomes[k] = run_one(configs[k], dirs[k]); });
  }
  for (auto& t : threads) t.join();

  int rc = 0;
  for (std::size_t k = 0; k < outcomes.size(); ++k) {
    const auto& s = outcomes[k].summary;
    if (!outcomes[k].ok) {
      std::cerr << "rml: chain " << k << " failed: " << s.value("error", std::string("?")) << '\n';
      rc = 1;
      continue;
    }
    std::cout << dirs[k].string() << ": seed " << s["seed"].get<std::uint64_t>()
              << ", acceptance " << std::setprecision(4) << s["acceptance_rate"].get<double>()
              << " (" << s["n_accepted"].get<std::int64_t>() << "/" << s["n_steps"].get<std::int64_t>()
              << "), optimizer failures " << s["n_optfail"].get<std::int64_t>() << '\n';
  }
  return rc;
}

int cmd_oracle(const std::string& config_path, std::optional<std::string> out_dir) {
  rmlcli::RunConfig cfg = rmlcli::load_config(config_path);
  if (out_dir) cfg.out_dir = *out_dir;
  const fs::path dir(cfg.out_dir);
  fs::create_directories(dir);
  ProblemPtr problem = make_problem(cfg);
  const int dim = rml_problem_dim_x(problem.get());
  if (dim > 2) {
    std::cerr << "rml: oracle grids support dim_x <= 2; this problem has dim_x = " << dim << '\n';
    return 2;
  }
  ordered_json report;
  report["problem"] = cfg.problem;

  GridPtr grid = marginal_grid(problem.get(), cfg);
  check(rml_grid_write_csv(grid.get(), (dir / "grid.csv").string().c_str()), "writing grid.csv");
  report["log_normalizer"] = rml_grid_log_normalizer(grid.get());
  std::size_t n_modes = 0;
  check(rml_grid_modes(grid.get(), nullptr, 0, &n_modes), "mode search");
  std::vector<double> coords(n_modes * static_cast<std::size_t>(dim));
  check(rml_grid_modes(grid.get(), coords.data(), n_modes, &n_modes), "mode search");
  std::size_t n_basins = 0;
  check(rml_grid_basin_masses(grid.get(), nullptr, 0, &n_basins), "basins");
  std::vector<double> masses(n_basins);
  check(rml_grid_basin_masses(grid.get(), masses.data(), n_basins, &n_basins), "basins");
  ordered_json modes = ordered_json::array();
  for (std::size_t k = 0; k < n_modes; ++k) {
    modes.push_back(std::vector<double>(coords.begin() + static_cast<long>(k) * dim,
                                        coords.begin() + static_cast<long>(k + 1) * dim));
  }
  report["n_modes"] = n_modes;
  report["modes"] = modes;
  report["basin_masses"] = masses;
  std::cout << cfg.problem << ": " << n_modes << " mode(s) on the marginal grid\n";

  const bool one_d = dim == 1 && rml_problem_dim_d(problem.get()) == 1;
  if ((!cfg.oracle.gammas.empty() || !cfg.oracle.rhos.empty()) && !one_d) {
    std::cerr << "rml: joint and proposal grids need dim_x = dim_d = 1\n";
    return 2;
  }
  const rmlcli::AxisRange xr = cfg.oracle.x_range.value_or(rmlcli::AxisRange{-3.0, 3.0});
  const rmlcli::AxisRange dr = cfg.oracle.d_range.value_or(rmlcli::AxisRange{-6.0, 6.0});
  const rml_axis xa{xr.lo, xr.hi, cfg.oracle.nodes};
  const rml_axis da{dr.lo, dr.hi, cfg.oracle.nodes};
  ordered_json joint = ordered_json::array();
  for (double gamma : cfg.oracle.gammas) {
    rml_grid* g = nullptr;
    check(rml_grid_joint(problem.get(), gamma, xa, da, cfg.chain.workers, &g), "joint grid");
    GridPtr gp(g);
    char name[64];
    std::snprintf(name, sizeof name, "joint_gamma_%g.csv", gamma);
    check(rml_grid_write_csv(gp.get(), (dir / name).string().c_str()), name);
    double sd = 0.0;
    check(rml_grid_mean_conditional_sd(gp.get(), &sd), "conditional spread");
    double corr = 0.0;
    check(rml_grid_correlation(gp.get(), &corr), "correlation");
    joint.push_back({{"gamma", gamma},
                     {"file", name},
                     {"mean_conditional_sd", sd},
                     {"correlation", corr}});
    std::cout << "  gamma " << gamma << ": corr(x, d) " << corr
              << ", mean conditional sd of d given x " << sd << '\n';
  }
  ordered_json proposal = ordered_json::array();
  for (double rho : cfg.oracle.rhos) {
    rml_grid* g = nullptr;
    check(rml_grid_proposal(problem.get(), rho, RML_JACOBIAN_FULL, xa, da, cfg.chain.workers, &g),
          "proposal grid");
    GridPtr gp(g);
    char name[64];
    std::snprintf(name, sizeof name, "proposal_rho_%g.csv", rho);
    check(rml_grid_write_csv(gp.get(), (dir / name).string().c_str()), name);
    double sd = 0.0;
    check(rml_grid_mean_conditional_sd(gp.get(), &sd), "conditional spread");
    double corr = 0.0;
    check(rml_grid_correlation(gp.get(), &corr), "correlation");
    proposal.push_back(
        {{"rho", rho}, {"file", name}, {"mean_conditional_sd", sd}, {"correlation", corr}});
  }
  report["joint"] = joint;
  report["proposal"] = proposal;
  std::ofstream os(dir / "oracle.json", std::ios::binary);
  os << report.dump(2) << '\n';
  return os ? 0 : 1;
}

int cmd_validate(bool quick, bool rates, int workers) {
  rml_validate_options o;
  rml_validate_options_default(&o);
  o.workers = workers;
  o.rate_checks = rates ? 1 : 0;
  if (quick) {
    o.fd_points = 20;
    o.roundtrip_draws = 100;
    o.chain_steps = 20000;
  }
  std::cout << std::left << std::setw(36) << "check" << std::setw(6) << "result" << std::right
            << std::setw(14) << "value" << std::setw(12) << "tolerance" << "  detail\n";
  int failed = 0;
  const auto cb = [](const char* name, int passed, double value, double tol, const char* detail,
                     void*) {
    std::cout << std::left << std::setw(36) << name << std::setw(6) << (passed ? "pass" : "FAIL")
              << std::right << std::setw(14) << std::setprecision(4) << value << std::setw(12)
              << tol << "  " << detail << '\n';
  };
  check(rml_validate(&o, cb, nullptr, &failed), "validation suite");
  std::cout << (failed == 0 ? "all checks passed\n" : std::to_string(failed) + " check(s) failed\n");
  return failed == 0 ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Augmented-state randomized maximum likelihood sampler"};
  app.require_subcommand(1);

  std::string config;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> out;
  std::optional<int> workers;
  int chains = 1;
  auto* run = app.add_subcommand("run", "run one or more chains from a config file");
  run->add_option("--config", config, "TOML config, or a summary.json to replay")->required();
  run->add_option("--seed", seed, "override chain.seed");
  run->add_option("--out", out, "override output.dir");
  run->add_option("--chains", chains, "number of chains (seeds derived from the base seed)")
      ->check(CLI::PositiveNumber);
  run->add_option("--workers", workers, "proposal threads per chain")->check(CLI::PositiveNumber);

  auto* oracle = app.add_subcommand("oracle", "write quadrature grids for a problem");
  oracle->add_option("--config", config, "TOML config")->required();
  oracle->add_option("--out", out, "override output.dir");

  bool quick = false;
  bool rates = false;
  int vworkers = 1;
  auto* validate = app.add_subcommand("validate", "run the property suite");
  validate->add_flag("--quick", quick, "fewer points and a shorter chain");
  validate->add_flag("--rates", rates, "also check the example 2 rho sweep");
  validate->add_option("--workers", vworkers, "threads for chain checks")->check(CLI::PositiveNumber);

  CLI11_PARSE(app, argc, argv);

  try {
    if (run->parsed()) return cmd_run(config, seed, out, chains, workers);
    if (oracle->parsed()) return cmd_oracle(config, out);
    if (validate->parsed()) return cmd_validate(quick, rates, vworkers);
  } catch (const rmlcli::ConfigError& e) {
    std::cerr << "rml: invalid config: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "rml: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
