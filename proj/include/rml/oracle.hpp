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

#include "rml/proposal.hpp"

#include <cstddef>
#include <functional>
#include <random>
#include <utility>
#include <vector>

// Reference answers on a grid: quadrature of the target densities, mode and
// basin detection, and histogram comparison for chain output.

namespace rml {

struct GridAxis {
  double lo = 0.0;
  double hi = 1.0;
  int n = 2;

  double step() const noexcept { return (hi - lo) / (n - 1); }
  double at(int i) const noexcept { return lo + i * step(); }
  void validate() const;
};

// Densities over 1 or 2 axes, row-major with the first axis slowest.
struct GridDensity {
  std::vector<GridAxis> axes;
  std::vector<double> log_values;  // unnormalized
  double log_normalizer = 0.0;     // log of the trapezoid integral

  std::size_t dims() const noexcept { return axes.size(); }
  std::size_t size() const noexcept { return log_values.size(); }
  std::vector<int> unflatten(std::size_t flat) const;
  Vector point(std::size_t flat) const;
  // Normalized density at a grid node.
  double density(std::size_t flat) const;
  // Trapezoid weight (cell volume share) of a node.
  double weight(std::size_t flat) const;
  // Trapezoid integral of the normalized density; 1 up to roundoff.
  double integral() const;
  Vector mean() const;
  Matrix covariance() const;
  // Nearest node to x, clamped to the grid.
  std::size_t nearest(const Vector& x) const;
};

using LogDensityFn = std::function<double(const Vector&)>;

// Evaluates log_f on every node (in parallel when workers > 1) and
// normalizes. Non-finite values other than -inf are an error.
GridDensity grid_from_function(const std::vector<GridAxis>& axes,
                               const LogDensityFn& log_f, int workers = 1);

// Prior mean +- half_width prior standard deviations, n nodes per axis.
std::vector<GridAxis> default_axes(const ProblemSpec& p, int n = 401,
                                   double half_width = 6.0);

// Marginal target on the grid. dim_x must be 1 or 2.
GridDensity grid_marginal(const ProblemSpec& p, const std::vector<GridAxis>& axes,
                          int workers = 1);

// Joint target over (x, d) for a problem with dim_x = dim_d = 1.
GridDensity grid_joint(const ProblemSpec& p, const HyperParams& h,
                       const GridAxis& x_axis, const GridAxis& d_axis,
                       int workers = 1);

// Proposal density q(x*, d*) for a problem with dim_x = dim_d = 1, by the
// change of variables through the inverse transform.
GridDensity grid_proposal(const ProblemSpec& p, const HyperParams& h,
                          const GridAxis& x_axis, const GridAxis& d_axis,
                          JacobianMode mode = JacobianMode::Full, int workers = 1);

// Average over x (weighted by its marginal) of the standard deviation of
// the second coordinate given the first. Needs a 2-D grid.
double mean_conditional_sd(const GridDensity& g);

// Correlation between the two coordinates of a 2-D grid density.
double grid_correlation(const GridDensity& g);

// Strict discrete maxima (2 neighbours in 1-D, 8 in 2-D) whose density is
// above floor_rel * max density.
std::vector<std::size_t> find_modes(const GridDensity& g, double floor_rel = 1e-6);

struct BasinPartition {
  std::vector<std::size_t> modes;  // terminal nodes, by decreasing mass
  std::vector<double> masses;      // probability mass of each basin
  std::vector<int> label;          // per node: index into modes
};

// Steepest-ascent partition of the grid into basins of attraction.
BasinPartition basins(const GridDensity& g);

// Fraction of samples falling into each basin (by nearest node).
std::vector<double> basin_occupation(const BasinPartition& b, const GridDensity& g,
                                     const std::vector<Vector>& samples);

struct SampleReport {
  double tv_distance = 0.0;
  double outside_fraction = 0.0;  // samples beyond the grid
  Vector mean_error;              // sample mean - grid mean
  Vector variance_error;          // sample variance - grid variance
  std::vector<double> hist;       // sample probability per bin
  std::vector<double> expected;   // grid probability per bin
};

// Histogram of samples on bins_per_axis equal bins across the grid, compared
// with the grid probabilities of the same bins. 1-D bins are integrated
// exactly under the piecewise linear density; in 2-D, (n - 1) must be a
// multiple of bins_per_axis so that bins are unions of grid cells.
SampleReport compare_samples_to_grid(const std::vector<Vector>& samples,
                                     const GridDensity& g, int bins_per_axis);

// Exact draws from the piecewise linear (1-D) or cellwise (2-D) density.
std::vector<Vector> sample_from_grid(const GridDensity& g, std::size_t n,
                                     std::mt19937_64& rng);

struct GaussianPosterior {
  Vector mean;
  Matrix cov;
};

// cov = (C_x^{-1} + G^T C_d^{-1} G)^{-1}, mean = mu + cov G^T C_d^{-1} (d_obs - G mu).
GaussianPosterior conjugate_posterior(const Vector& prior_mean, const Matrix& prior_cov,
                                      const Matrix& G, const Vector& obs,
                                      const Matrix& obs_cov);

}  // namespace rml
