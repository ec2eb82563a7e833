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

#include "rml/io.hpp"

#include <array>
#include <charconv>

namespace rml {

std::string format_real(double v) {
  std::array<char, 64> buf{};
  const auto res = std::to_chars(buf.data(), buf.data() + buf.size(), v,
                                 std::chars_format::general, 17);
  return std::string(buf.data(), res.ptr);
}

namespace {

void write_state(std::ostream& os, std::int64_t step, bool accepted, const ChainState& s) {
  os << step << ',' << (accepted ? 1 : 0);
  for (Eigen::Index i = 0; i < s.x.size(); ++i) os << ',' << format_real(s.x(i));
  for (Eigen::Index i = 0; i < s.d.size(); ++i) os << ',' << format_real(s.d(i));
  os << ',' << format_real(s.log_pi_joint) << ',' << format_real(s.log_q) << '\n';
}

}  // namespace

void write_trace_csv(std::ostream& os, const ChainRecord& rec) {
  os << "step,accepted";
  for (Eigen::Index i = 0; i < rec.initial.x.size(); ++i) os << ",x_" << i + 1;
  for (Eigen::Index i = 0; i < rec.initial.d.size(); ++i) os << ",d_" << i + 1;
  os << ",log_pi_joint,log_q\n";
  write_state(os, 0, true, rec.initial);
  for (std::size_t k = 0; k < rec.states.size(); ++k) {
    write_state(os, rec.states[k].step_index, rec.accept_flags[k] != 0, rec.states[k]);
  }
}

void write_grid_csv(std::ostream& os, const GridDensity& g) {
  for (std::size_t k = 0; k < g.dims(); ++k) os << "x_" << k + 1 << ',';
  os << "density\n";
  for (std::size_t i = 0; i < g.size(); ++i) {
    const Vector x = g.point(i);
    for (Eigen::Index k = 0; k < x.size(); ++k) os << format_real(x(k)) << ',';
    os << format_real(g.density(i)) << '\n';
  }
}

void write_histogram_csv(std::ostream& os, const GridDensity& g, const SampleReport& r,
                         int bins_per_axis) {
  const int b = bins_per_axis;
  os << "bin";
  for (std::size_t k = 0; k < g.dims(); ++k) os << ",lo_" << k + 1 << ",hi_" << k + 1;
  os << ",sample_prob,grid_prob\n";
  for (std::size_t bin = 0; bin < r.hist.size(); ++bin) {
    os << bin;
    std::array<int, 2> idx{static_cast<int>(bin), 0};
    if (g.dims() == 2) idx = {static_cast<int>(bin) / b, static_cast<int>(bin) % b};
    for (std::size_t k = 0; k < g.dims(); ++k) {
      const double w = (g.axes[k].hi - g.axes[k].lo) / b;
      os << ',' << format_real(g.axes[k].lo + idx[k] * w) << ','
         << format_real(g.axes[k].lo + (idx[k] + 1) * w);
    }
    os << ',' << format_real(r.hist[bin]) << ',' << format_real(r.expected[bin]) << '\n';
  }
}

}  // namespace rml
