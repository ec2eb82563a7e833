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

#include "rml/rml.h"

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace rmlcli {

// Raised for any invalid configuration; what() carries "path:line: message".
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct LinearProblem {
  std::vector<double> prior_mean;
  std::vector<double> prior_cov;  // row-major
  std::vector<double> G;          // row-major, dim_d x dim_x
  std::vector<double> obs;
  std::vector<double> obs_cov;    // row-major

  int dim_x() const { return static_cast<int>(prior_mean.size()); }
  int dim_d() const { return static_cast<int>(obs.size()); }
};

struct AxisRange {
  double lo = 0.0;
  double hi = 1.0;
};

struct OracleSection {
  std::vector<double> gammas;  // joint (x, d) grids, 1-D problems
  std::vector<double> rhos;    // proposal grids, 1-D problems
  std::optional<AxisRange> x_range;
  std::optional<AxisRange> d_range;
  int nodes = 201;
};

struct RunConfig {
  std::string problem = "example1";  // builtin name, or "linear"
  std::optional<LinearProblem> linear;
  rml_chain_settings chain{};
  std::int64_t discard_prefix = 0;
  std::string out_dir = "rml-out";
  int bins = 0;          // 0: 64 in 1-D, 50 in 2-D
  int grid_nodes = 401;  // per axis
  std::vector<AxisRange> grid;  // empty: prior mean +- 6 sd
  OracleSection oracle;

  RunConfig();
  int resolved_bins(int dim) const { return bins > 0 ? bins : (dim == 1 ? 64 : 50); }
};

// Parses a TOML file. A JSON run summary is accepted too: its embedded
// configuration echo is parsed instead.
RunConfig load_config(const std::string& path);
RunConfig parse_config(const std::string& text, const std::string& source_name);

// Canonical TOML rendering of every resolved setting; parse_config of the
// result yields the same configuration.
std::string to_toml(const RunConfig& c);
// The same content as a JSON object text.
std::string to_json(const RunConfig& c);

const char* jacobian_name(int mode);
const char* algorithm_name(int algorithm);

}  // namespace rmlcli
