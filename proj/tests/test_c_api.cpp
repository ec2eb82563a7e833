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

#include <gtest/gtest.h>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

namespace {

struct ProblemPtr {
  rml_problem* p = nullptr;
  ~ProblemPtr() { rml_problem_free(p); }
};
struct ChainPtr {
  rml_chain* c = nullptr;
  ~ChainPtr() { rml_chain_free(c); }
};
struct GridPtr {
  rml_grid* g = nullptr;
  ~GridPtr() { rml_grid_free(g); }
};

std::string slurp(const std::filesystem::path& path) {
  std::ifstream in(path);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

TEST(CApi, BuiltinProblems) {
  ProblemPtr p;
  ASSERT_EQ(rml_problem_builtin("example2", &p.p), RML_OK);
  EXPECT_EQ(rml_problem_dim_x(p.p), 2);
  EXPECT_EQ(rml_problem_dim_d(p.p), 1);
  EXPECT_EQ(rml_problem_has_anamorphosis(p.p), 0);
  const double x[2] = {0.0, 0.0};
  double v = 0.0;
  ASSERT_EQ(rml_log_target_marginal(p.p, x, &v), RML_OK);
  EXPECT_NEAR(v, -1.16098959269, 1e-10);

  ProblemPtr e3;
  ASSERT_EQ(rml_problem_builtin("example3", &e3.p), RML_OK);
  EXPECT_EQ(rml_problem_has_anamorphosis(e3.p), 1);
  double orig = 0.0;
  ASSERT_EQ(rml_problem_to_original(e3.p, 0.0, &orig), RML_OK);
  EXPECT_NEAR(orig, std::log(2.0), 1e-12);
}

TEST(CApi, Errors) {
  rml_problem* p = nullptr;
  EXPECT_EQ(rml_problem_builtin("nope", &p), RML_E_INVALID_ARGUMENT);
  EXPECT_EQ(p, nullptr);
  EXPECT_NE(std::string(rml_last_error()).find("nope"), std::string::npos);
  EXPECT_EQ(rml_problem_builtin(nullptr, &p), RML_E_INVALID_ARGUMENT);
  const double m = 0, bad_cov = -1, G = 1, obs = 0, ocov = 1;
  EXPECT_EQ(rml_problem_linear("lin", 1, 1, &m, &bad_cov, &G, &obs, &ocov, &p),
            RML_E_NOT_POSITIVE_DEFINITE);
  EXPECT_STREQ(rml_status_string(RML_OK), "ok");
}

TEST(CApi, LinearProblemDensities) {
  ProblemPtr p;
  const double m = 0, cov = 1, G = 1, obs = 0, ocov = 1;
  ASSERT_EQ(rml_problem_linear("lin", 1, 1, &m, &cov, &G, &obs, &ocov, &p.p), RML_OK);
  const double xuc = 1.0, duc = 2.0;
  double v = 0.0;
  ASSERT_EQ(rml_log_prior_joint(p.p, &xuc, &duc, &v), RML_OK);
  EXPECT_DOUBLE_EQ(v, -2.5);
  const double zero = 0.0;
  ASSERT_EQ(rml_log_target_joint(p.p, 0.4, &zero, &zero, &v), RML_OK);
  EXPECT_EQ(v, 0.0);
  EXPECT_EQ(rml_log_target_joint(p.p, 1.5, &zero, &zero, &v), RML_E_INVALID_ARGUMENT);
}

TEST(CApi, ChainRunAndGrid) {
  ProblemPtr p;
  ASSERT_EQ(rml_problem_builtin("example1", &p.p), RML_OK);
  rml_chain_settings s;
  rml_chain_settings_default(&s);
  s.rho = 0.65;
  s.n_steps = 5000;
  s.seed = 3;
  ChainPtr c;
  ASSERT_EQ(rml_chain_run(p.p, &s, &c.c), RML_OK);
  rml_chain_summary sum;
  ASSERT_EQ(rml_chain_summary_get(c.c, &sum), RML_OK);
  EXPECT_EQ(sum.n_proposed, 5000);
  EXPECT_EQ(sum.seed, 3u);
  EXPECT_GT(sum.acceptance_rate, 0.5);
  double prefix = 0.0;
  ASSERT_EQ(rml_chain_acceptance_prefix(c.c, 5000, &prefix), RML_OK);
  EXPECT_DOUBLE_EQ(prefix, sum.acceptance_rate);
  EXPECT_EQ(rml_chain_acceptance_prefix(c.c, 6000, &prefix), RML_E_INVALID_ARGUMENT);

  double x = 0, d = 0, lp = 0, lq = 0;
  int acc = -1;
  ASSERT_EQ(rml_chain_state(c.c, 0, &x, &d, &lp, &lq, &acc), RML_OK);
  EXPECT_TRUE(std::isfinite(lp));
  ASSERT_EQ(rml_chain_state(c.c, 5000, &x, nullptr, nullptr, nullptr, &acc), RML_OK);
  EXPECT_EQ(rml_chain_state(c.c, 5001, &x, nullptr, nullptr, nullptr, nullptr),
            RML_E_INVALID_ARGUMENT);

  GridPtr g;
  const rml_axis ax{0.8, 3.0, 2049};
  ASSERT_EQ(rml_grid_marginal(p.p, &ax, 2, &g.g), RML_OK);
  EXPECT_EQ(rml_grid_dims(g.g), 1);
  EXPECT_EQ(rml_grid_size(g.g), 2049u);
  EXPECT_NEAR(std::exp(rml_grid_log_normalizer(g.g)), 1.0 / 4.567, 1e-3);
  double modes[4];
  size_t n_modes = 0;
  ASSERT_EQ(rml_grid_modes(g.g, modes, 4, &n_modes), RML_OK);
  EXPECT_EQ(n_modes, 2u);

  rml_comparison cmp;
  ASSERT_EQ(rml_chain_compare_grid(c.c, g.g, 64, 0, 0, nullptr, &cmp), RML_OK);
  EXPECT_LT(cmp.tv_distance, 0.1);

  const auto dir = std::filesystem::temp_directory_path() / "rml_capi_test";
  std::filesystem::create_directories(dir);
  ASSERT_EQ(rml_chain_write_trace(c.c, (dir / "a.csv").c_str()), RML_OK);
  ChainPtr again;
  ASSERT_EQ(rml_chain_run(p.p, &s, &again.c), RML_OK);
  ASSERT_EQ(rml_chain_write_trace(again.c, (dir / "b.csv").c_str()), RML_OK);
  EXPECT_EQ(slurp(dir / "a.csv"), slurp(dir / "b.csv"));
  EXPECT_EQ(rml_chain_write_trace(c.c, "/nonexistent/dir/t.csv"), RML_E_IO);
  std::filesystem::remove_all(dir);
}

TEST(CApi, JointGridNeedsScalarProblem) {
  ProblemPtr p;
  ASSERT_EQ(rml_problem_builtin("example2", &p.p), RML_OK);
  rml_grid* g = nullptr;
  EXPECT_NE(rml_grid_joint(p.p, 0.1, {-1, 1, 11}, {-1, 1, 11}, 1, &g), RML_OK);
  EXPECT_EQ(g, nullptr);
}

TEST(CApi, ValidateReportsThroughCallback) {
  rml_validate_options o;
  rml_validate_options_default(&o);
  o.fd_points = 10;
  o.roundtrip_draws = 20;
  o.chain_steps = 2000;
  std::vector<std::string> names;
  int failed = -1;
  auto cb = [](const char* name, int, double, double, const char*, void* user) {
    static_cast<std::vector<std::string>*>(user)->push_back(name);
  };
  ASSERT_EQ(rml_validate(&o, cb, &names, &failed), RML_OK);
  EXPECT_FALSE(names.empty());
  EXPECT_GE(failed, 0);
}

TEST(CApi, WarningCallback) {
  rml_set_warning_callback([](const char*, void*) {}, nullptr);
  rml_set_warning_callback(nullptr, nullptr);
  SUCCEED();
}
