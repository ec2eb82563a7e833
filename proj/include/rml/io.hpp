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

#include "rml/oracle.hpp"
#include "rml/sampler.hpp"

#include <ostream>
#include <string>

// CSV output. Reals are written locale-independently with 17 significant
// digits so that files round-trip exactly.

namespace rml {

std::string format_real(double v);

// step,accepted,x_1..x_n,d_1..d_m,log_pi_joint,log_q. Row 0 is the
// initial state (accepted = 1).
void write_trace_csv(std::ostream& os, const ChainRecord& rec);

// axis columns then density (normalized).
void write_grid_csv(std::ostream& os, const GridDensity& g);

// Chain histogram against the grid on bins_per_axis bins:
// bin,lo_1,hi_1[,lo_2,hi_2],sample_prob,grid_prob.
void write_histogram_csv(std::ostream& os, const GridDensity& g, const SampleReport& r,
                         int bins_per_axis);

}  // namespace rml
