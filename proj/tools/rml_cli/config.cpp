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

#include "config.hpp"

#include <nlohmann/json.hpp>
#include <toml.hpp>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <functional>
#include <map>
#include <set>
#include <sstream>

namespace rmlcli {

namespace {

// Every accepted key, by section.
const std::map<std::string, std::set<std::string>>& schema() {
  static const std::map<std::string, std::set<std::string>> s{
      {"problem", {"name", "prior_mean", "prior_cov", "G", "obs", "obs_cov"}},
      {"hyperparams", {"rho", "gamma"}},
      {"optimizer", {"max_iters", "grad_tol", "step_tol", "lm_lambda0", "exact_hessian"}},
      {"chain",
       {"n_steps", "seed", "jacobian", "algorithm", "workers", "discard_prefix", "quad_nodes",
        "quad_half_width_sd"}},
      {"output", {"dir", "bins", "grid_nodes", "grid_lo", "grid_hi"}},
      {"oracle", {"gammas", "rhos", "x_range", "d_range", "nodes"}},
  };
  return s;
}

class Reader {
 public:
  Reader(const toml::table& root, std::string source) : root_(root), source_(std::move(source)) {}

  [[noreturn]] void fail(const toml::node* n, const std::string& msg) const {
    std::ostringstream os;
    os << source_;
    if (n != nullptr && n->source().begin.line > 0) os << ':' << n->source().begin.line;
    os << ": " << msg;
    throw ConfigError(os.str());
  }

  void check_schema() const {
    for (const auto& [key, node] : root_) {
      const std::string section(key.str());
      const auto it = schema().find(section);
      if (it == schema().end()) fail(&node, "unknown section [" + section + "]");
      const toml::table* t = node.as_table();
      if (t == nullptr) fail(&node, "[" + section + "] must be a table");
      for (const auto& [k, v] : *t) {
        if (!it->second.count(std::string(k.str()))) {
          fail(&v, "unknown key '" + std::string(k.str()) + "' in [" + section + "]");
        }
      }
    }
  }

  const toml::node* get(const char* section, const char* key) const {
    const toml::table* t = root_[section].as_table();
    return t ? t->get(key) : nullptr;
  }

  template <typename T>
  void read(const char* section, const char* key, T& out) const {
    const toml::node* n = get(section, key);
    if (n == nullptr) return;
    out = as<T>(n, std::string(section) + "." + key);
  }

  template <typename T>
  T as(const toml::node* n, const std::string& what) const {
    if constexpr (std::is_same_v<T, bool>) {
      if (auto v = n->value_exact<bool>()) return *v;
      fail(n, what + " must be a boolean");
    } else if constexpr (std::is_same_v<T, std::string>) {
      if (auto v = n->value_exact<std::string>()) return *v;
      fail(n, what + " must be a string");
    } else if constexpr (std::is_floating_point_v<T>) {
      if (auto v = n->value_exact<double>()) return *v;
      if (auto v = n->value_exact<std::int64_t>()) return static_cast<double>(*v);
      fail(n, what + " must be a number");
    } else {
      if (auto v = n->value_exact<std::int64_t>()) {
        if (*v < static_cast<std::int64_t>(std::numeric_limits<T>::min()) ||
            static_cast<long double>(*v) > static_cast<long double>(std::numeric_limits<T>::max())) {
          fail(n, what + " is out of range");
        }
        return static_cast<T>(*v);
      }
      fail(n, what + " must be an integer");
    }
  }

  std::vector<double> numbers(const toml::node* n, const std::string& what) const {
    const toml::array* a = n->as_array();
    if (a == nullptr) fail(n, what + " must be an array of numbers");
    std::vector<double> out;
    for (const auto& e : *a) out.push_back(as<double>(&e, what + " entry"));
    return out;
  }

  // Row-major matrix given either as an array of rows or as a flat array.
  std::vector<double> matrix(const toml::node* n, int rows, int cols,
                             const std::string& what) const {
    const toml::array* a = n->as_array();
    if (a == nullptr) fail(n, what + " must be an array");
    std::vector<double> out;
    if (!a->empty() && (*a)[0].is_array()) {
      if (static_cast<int>(a->size()) != rows) {
        fail(n, what + " must have " + std::to_string(rows) + " rows");
      }
      for (const auto& row : *a) {
        const auto r = numbers(&row, what + " row");
        if (static_cast<int>(r.size()) != cols) {
          fail(&row, what + " rows must have " + std::to_string(cols) + " entries");
        }
        out.insert(out.end(), r.begin(), r.end());
      }
    } else {
      out = numbers(n, what);
      if (static_cast<int>(out.size()) != rows * cols) {
        fail(n, what + " must have " + std::to_string(rows * cols) + " entries (" +
                    std::to_string(rows) + "x" + std::to_string(cols) + ", row-major)");
      }
    }
    return out;
  }

  AxisRange range(const toml::node* n, const std::string& what) const {
    const auto v = numbers(n, what);
    if (v.size() != 2 || !(v[0] < v[1])) fail(n, what + " must be [lo, hi] with lo < hi");
    return {v[0], v[1]};
  }

  // Node for error positions of a key, or the section, or nothing.
  const toml::node* locate(const char* section, const char* key) const {
    if (const toml::node* n = get(section, key)) return n;
    return root_.get(section);
  }

 private:
  const toml::table& root_;
  std::string source_;
};

void require(const Reader& r, bool ok, const char* section, const char* key,
             const std::string& msg) {
  if (!ok) r.fail(r.locate(section, key), std::string(section) + "." + key + " " + msg);
}

std::string read_file(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw ConfigError(path + ": cannot open file");
  std::ostringstream os;
  os << is.rdbuf();
  return os.str();
}

int parse_enum(const Reader& r, const char* section, const char* key, const std::string& v,
               const std::vector<std::string>& names) {
  const auto it = std::find(names.begin(), names.end(), v);
  if (it == names.end()) {
    std::string all;
    for (const auto& n : names) all += (all.empty() ? "" : ", ") + n;
    r.fail(r.locate(section, key),
           std::string(section) + "." + key + " must be one of " + all + ", got '" + v + "'");
  }
  return static_cast<int>(it - names.begin());
}

const std::vector<std::string> kJacobians{"full", "gauss-newton", "none"};
const std::vector<std::string> kAlgorithms{"augmented", "legacy-1d"};
const std::vector<std::string> kBuiltins{"example1", "example2", "example3", "gauss-linear",
                                         "linear"};

toml::array to_array(const std::vector<double>& v) {
  toml::array a;
  for (double x : v) a.push_back(x);
  return a;
}

toml::array to_rows(const std::vector<double>& v, int rows, int cols) {
  toml::array a;
  for (int i = 0; i < rows; ++i) {
    toml::array row;
    for (int j = 0; j < cols; ++j) row.push_back(v[static_cast<std::size_t>(i * cols + j)]);
    a.push_back(std::move(row));
  }
  return a;
}

toml::table to_table(const RunConfig& c) {
  toml::table problem{{"name", c.problem}};
  if (c.linear) {
    const LinearProblem& l = *c.linear;
    problem.insert("prior_mean", to_array(l.prior_mean));
    problem.insert("prior_cov", to_rows(l.prior_cov, l.dim_x(), l.dim_x()));
    problem.insert("G", to_rows(l.G, l.dim_d(), l.dim_x()));
    problem.insert("obs", to_array(l.obs));
    problem.insert("obs_cov", to_rows(l.obs_cov, l.dim_d(), l.dim_d()));
  }
  const rml_chain_settings& s = c.chain;
  toml::table out{{"dir", c.out_dir}, {"bins", c.bins}, {"grid_nodes", c.grid_nodes}};
  if (!c.grid.empty()) {
    std::vector<double> lo, hi;
    for (const auto& a : c.grid) {
      lo.push_back(a.lo);
      hi.push_back(a.hi);
    }
    out.insert("grid_lo", to_array(lo));
    out.insert("grid_hi", to_array(hi));
  }
  toml::table oracle{{"gammas", to_array(c.oracle.gammas)},
                     {"rhos", to_array(c.oracle.rhos)},
                     {"nodes", c.oracle.nodes}};
  if (c.oracle.x_range) oracle.insert("x_range", to_array({c.oracle.x_range->lo, c.oracle.x_range->hi}));
  if (c.oracle.d_range) oracle.insert("d_range", to_array({c.oracle.d_range->lo, c.oracle.d_range->hi}));
  return toml::table{
      {"problem", std::move(problem)},
      {"hyperparams", toml::table{{"rho", s.rho}, {"gamma", s.gamma}}},
      {"optimizer", toml::table{{"max_iters", s.max_iters},
                                {"grad_tol", s.grad_tol},
                                {"step_tol", s.step_tol},
                                {"lm_lambda0", s.lm_lambda0},
                                {"exact_hessian", s.exact_hessian != 0}}},
      {"chain", toml::table{{"n_steps", s.n_steps},
                            {"seed", static_cast<std::int64_t>(s.seed)},
                            {"jacobian", jacobian_name(s.jacobian)},
                            {"algorithm", algorithm_name(s.algorithm)},
                            {"workers", s.workers},
                            {"discard_prefix", c.discard_prefix},
                            {"quad_nodes", s.quad_nodes},
                            {"quad_half_width_sd", s.quad_half_width_sd}}},
      {"output", std::move(out)},
      {"oracle", std::move(oracle)},
  };
}

}  // namespace

RunConfig::RunConfig() { rml_chain_settings_default(&chain); }

const char* jacobian_name(int mode) {
  return mode >= 0 && mode < 3 ? kJacobians[static_cast<std::size_t>(mode)].c_str() : "?";
}

const char* algorithm_name(int algorithm) {
  return algorithm >= 0 && algorithm < 2 ? kAlgorithms[static_cast<std::size_t>(algorithm)].c_str()
                                         : "?";
}

RunConfig parse_config(const std::string& text, const std::string& source_name) {
  toml::table root;
  try {
    root = toml::parse(text, source_name);
  } catch (const toml::parse_error& e) {
    std::ostringstream os;
    os << source_name << ':' << e.source().begin.line << ": " << e.description();
    throw ConfigError(os.str());
  }
  const Reader r(root, source_name);
  r.check_schema();

  RunConfig c;
  rml_chain_settings& s = c.chain;

  r.read("problem", "name", c.problem);
  parse_enum(r, "problem", "name", c.problem, kBuiltins);
  const bool has_matrices = r.get("problem", "prior_mean") || r.get("problem", "prior_cov") ||
                            r.get("problem", "G") || r.get("problem", "obs") ||
                            r.get("problem", "obs_cov");
  if (c.problem == "linear") {
    for (const char* k : {"prior_mean", "prior_cov", "G", "obs", "obs_cov"}) {
      require(r, r.get("problem", k) != nullptr, "problem", k,
              "is required for a linear problem");
    }
    LinearProblem l;
    l.prior_mean = r.numbers(r.get("problem", "prior_mean"), "problem.prior_mean");
    l.obs = r.numbers(r.get("problem", "obs"), "problem.obs");
    require(r, !l.prior_mean.empty(), "problem", "prior_mean", "must not be empty");
    require(r, !l.obs.empty(), "problem", "obs", "must not be empty");
    l.prior_cov = r.matrix(r.get("problem", "prior_cov"), l.dim_x(), l.dim_x(), "problem.prior_cov");
    l.G = r.matrix(r.get("problem", "G"), l.dim_d(), l.dim_x(), "problem.G");
    l.obs_cov = r.matrix(r.get("problem", "obs_cov"), l.dim_d(), l.dim_d(), "problem.obs_cov");
    c.linear = std::move(l);
  } else {
    require(r, !has_matrices, "problem", "name",
            "must be \"linear\" when matrices are given");
  }

  r.read("hyperparams", "rho", s.rho);
  r.read("hyperparams", "gamma", s.gamma);
  require(r, s.rho > 0.0 && s.rho < 1.0, "hyperparams", "rho", "must lie strictly in (0, 1)");
  require(r, s.gamma > 0.0 && s.gamma < 1.0, "hyperparams", "gamma",
          "must lie strictly in (0, 1)");

  r.read("optimizer", "max_iters", s.max_iters);
  r.read("optimizer", "grad_tol", s.grad_tol);
  r.read("optimizer", "step_tol", s.step_tol);
  r.read("optimizer", "lm_lambda0", s.lm_lambda0);
  bool exact = s.exact_hessian != 0;
  r.read("optimizer", "exact_hessian", exact);
  s.exact_hessian = exact ? 1 : 0;
  require(r, s.max_iters >= 1, "optimizer", "max_iters", "must be >= 1");
  require(r, s.grad_tol > 0.0, "optimizer", "grad_tol", "must be positive");
  require(r, s.step_tol > 0.0, "optimizer", "step_tol", "must be positive");
  require(r, s.lm_lambda0 > 0.0, "optimizer", "lm_lambda0", "must be positive");

  r.read("chain", "n_steps", s.n_steps);
  std::int64_t seed = static_cast<std::int64_t>(s.seed);
  r.read("chain", "seed", seed);
  require(r, seed >= 0, "chain", "seed", "must be non-negative");
  s.seed = static_cast<std::uint64_t>(seed);
  std::string jac = jacobian_name(s.jacobian);
  r.read("chain", "jacobian", jac);
  s.jacobian = parse_enum(r, "chain", "jacobian", jac, kJacobians);
  std::string alg = algorithm_name(s.algorithm);
  r.read("chain", "algorithm", alg);
  s.algorithm = parse_enum(r, "chain", "algorithm", alg, kAlgorithms);
  r.read("chain", "workers", s.workers);
  r.read("chain", "discard_prefix", c.discard_prefix);
  r.read("chain", "quad_nodes", s.quad_nodes);
  r.read("chain", "quad_half_width_sd", s.quad_half_width_sd);
  require(r, s.n_steps >= 1, "chain", "n_steps", "must be >= 1");
  require(r, s.workers >= 1, "chain", "workers", "must be >= 1");
  require(r, c.discard_prefix >= 0 && c.discard_prefix < s.n_steps, "chain", "discard_prefix",
          "must lie in [0, n_steps)");
  require(r, s.quad_nodes >= 3, "chain", "quad_nodes", "must be >= 3");
  require(r, s.quad_half_width_sd > 0.0, "chain", "quad_half_width_sd", "must be positive");
  if (s.algorithm == RML_ALGORITHM_LEGACY_1D) {
    const bool one_d = c.linear ? (c.linear->dim_x() == 1 && c.linear->dim_d() == 1)
                                : c.problem != "example2";
    require(r, one_d, "chain", "algorithm", "legacy-1d needs a problem with dim_x = dim_d = 1");
  }

  r.read("output", "dir", c.out_dir);
  r.read("output", "bins", c.bins);
  r.read("output", "grid_nodes", c.grid_nodes);
  require(r, !c.out_dir.empty(), "output", "dir", "must not be empty");
  require(r, c.bins >= 0, "output", "bins", "must be >= 0 (0 selects the default)");
  require(r, c.grid_nodes >= 3, "output", "grid_nodes", "must be >= 3");
  const toml::node* lo = r.get("output", "grid_lo");
  const toml::node* hi = r.get("output", "grid_hi");
  require(r, (lo == nullptr) == (hi == nullptr), "output", lo ? "grid_lo" : "grid_hi",
          "needs its counterpart (grid_lo and grid_hi go together)");
  if (lo != nullptr) {
    const auto l = r.numbers(lo, "output.grid_lo");
    const auto h = r.numbers(hi, "output.grid_hi");
    require(r, l.size() == h.size() && !l.empty() && l.size() <= 2, "output", "grid_hi",
            "must have the same length (1 or 2) as output.grid_lo");
    for (std::size_t k = 0; k < l.size(); ++k) {
      require(r, l[k] < h[k], "output", "grid_hi", "must exceed output.grid_lo componentwise");
      c.grid.push_back({l[k], h[k]});
    }
  }

  if (const toml::node* n = r.get("oracle", "gammas")) {
    c.oracle.gammas = r.numbers(n, "oracle.gammas");
    for (double g : c.oracle.gammas) {
      require(r, g > 0.0 && g < 1.0, "oracle", "gammas", "entries must lie in (0, 1)");
    }
  }
  if (const toml::node* n = r.get("oracle", "rhos")) {
    c.oracle.rhos = r.numbers(n, "oracle.rhos");
    for (double v : c.oracle.rhos) {
      require(r, v > 0.0 && v < 1.0, "oracle", "rhos", "entries must lie in (0, 1)");
    }
  }
  if (const toml::node* n = r.get("oracle", "x_range")) c.oracle.x_range = r.range(n, "oracle.x_range");
  if (const toml::node* n = r.get("oracle", "d_range")) c.oracle.d_range = r.range(n, "oracle.d_range");
  r.read("oracle", "nodes", c.oracle.nodes);
  require(r, c.oracle.nodes >= 3, "oracle", "nodes", "must be >= 3");
  return c;
}

RunConfig load_config(const std::string& path) {
  const std::string text = read_file(path);
  const auto first = text.find_first_not_of(" \t\r\n");
  if (first != std::string::npos && text[first] == '{') {
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
      throw ConfigError(path + ": invalid JSON: " + e.what());
    }
    if (!j.contains("config_toml") || !j["config_toml"].is_string()) {
      throw ConfigError(path + ": JSON input must be a run summary with a config_toml field");
    }
    return parse_config(j["config_toml"].get<std::string>(), path + "#config_toml");
  }
  return parse_config(text, path);
}

std::string to_toml(const RunConfig& c) {
  std::ostringstream os;
  os << to_table(c) << '\n';
  return os.str();
}

std::string to_json(const RunConfig& c) {
  std::ostringstream os;
  os << toml::json_formatter{to_table(c)};
  return os.str();
}

}  // namespace rmlcli
