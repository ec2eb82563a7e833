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

// Standard normal distribution functions.

namespace rml::normal {

inline constexpr double kProbFloor = 1e-15;

double pdf(double z) noexcept;

// P(Z <= z), via erfc so the lower tail keeps full relative precision.
double cdf(double z) noexcept;

// P(Z > z) = cdf(-z).
double survival(double z) noexcept;

// Inverse CDF. Acklam's rational approximation (relative error < 1.15e-9)
// followed by one Halley correction against erfc. p is clamped to
// [kProbFloor, 1 - kProbFloor].
double inv_cdf(double p) noexcept;

}  // namespace rml::normal
