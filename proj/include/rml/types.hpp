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

#include <Eigen/Core>

#include <stdexcept>
#include <string>
#include <vector>

namespace rml {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

// Second derivatives of the forward model: one dim_x x dim_x matrix per
// observation component, slice[i](c, b) = d G(i, c) / d x(b).
using ResponseHessians = std::vector<Matrix>;

enum class ErrorCode {
  InvalidArgument = 1,
  DimensionMismatch = 2,
  NotPositiveDefinite = 3,
  Unsupported = 4,
  Singular = 5,
  Evaluation = 6,
  Initialization = 7,
  Io = 8,
  Config = 9,
};

const char* to_string(ErrorCode code) noexcept;

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

#define RML_REQUIRE(cond, code, msg)                  \
  do {                                                \
    if (!(cond)) throw ::rml::Error((code), (msg));   \
  } while (0)

inline void require_size(const Vector& v, Eigen::Index n, const char* what) {
  RML_REQUIRE(v.size() == n, ErrorCode::DimensionMismatch,
              std::string(what) + ": expected length " + std::to_string(n) +
                  ", got " + std::to_string(v.size()));
}

}  // namespace rml
