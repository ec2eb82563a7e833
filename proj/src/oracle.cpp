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

#include "rml/oracle.hpp"

#include "parallel.hpp"

#include <Eigen/Cholesky>

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numeric>

namespace rml {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

double log_sum_exp(const std::vector<double>& v) {
  double peak = kNegInf;
  for (double t : v) peak = std::max(peak, t);
  if (peak == kNegInf) return kNegInf;
  double s = 0.0;
  for (double t : v) s += std::exp(t - peak);
  return peak + std::log(s);
}

double trap_weight(const GridAxis& a, int i) {
  return (i == 0 || i == a.n - 1) ? 0.5 * a.step() : a.step();
}

void require_grid_dims(const GridDensity& g) {
  RML_REQUIRE(g.dims() == 1 || g.dims() == 2, ErrorCode::Unsupported,
              "grids must have 1 or 2 axes");
}

// Flat indices of the (up to 8) neighbours of a node.
std::vector<std::size_t> neighbours(const GridDensity& g, std::size_t flat) {
  std::vector<std::size_t> out;
  const auto idx = g.unflatten(flat);
  if (g.dims() == 1) {
    if (idx[0] > 0) out.push_back(flat - 1);
    if (idx[0] < g.axes[0].n - 1) out.push_back(flat + 1);
    return out;
  }
  const int n1 = g.axes[1].n;
  for (int di = -1; di <= 1; ++di) {
    for (int dj = -1; dj <= 1; ++dj) {
      if (di == 0 && dj == 0) continue;
      const int i = idx[0] + di;
      const int j = idx[1] + dj;
      if (i < 0 || j < 0 || i >= g.axes[0].n || j >= n1) continue;
      out.push_back(static_cast<std::size_t>(i) * n1 + j);
    }
  }
  return out;
}

// Cell masses of a 1-D grid under the piecewise linear density.
std::vector<double> cell_masses_1d(const GridDensity& g) {
  const GridAxis& a = g.axes[0];
  std::vector<double> m(static_cast<std::size_t>(a.n - 1));
  for (int i = 0; i + 1 < a.n; ++i) {
    m[static_cast<std::size_t>(i)] =
        0.5 * a.step() * (g.density(static_cast<std::size_t>(i)) +
                          g.density(static_cast<std::size_t>(i + 1)));
  }
  return m;
}

// Cell masses of a 2-D grid, mean of the four corners times the cell area.
std::vector<double> cell_masses_2d(const GridDensity& g) {
  const int n0 = g.axes[0].n;
  const int n1 = g.axes[1].n;
  const double area = g.axes[0].step() * g.axes[1].step();
  std::vector<double> m(static_cast<std::size_t>(n0 - 1) * (n1 - 1));
  for (int i = 0; i + 1 < n0; ++i) {
    for (int j = 0; j + 1 < n1; ++j) {
      const auto f = [&](int a, int b) {
        return g.density(static_cast<std::size_t>(a) * n1 + b);
      };
      m[static_cast<std::size_t>(i) * (n1 - 1) + j] =
          0.25 * area * (f(i, j) + f(i + 1, j) + f(i, j + 1) + f(i + 1, j + 1));
    }
  }
  return m;
}

// Integral of the normalized 1-D density from the grid start to t.
double cdf_1d(const GridDensity& g, const std::vector<double>& cum, double t) {
  const GridAxis& a = g.axes[0];
  if (t <= a.lo) return 0.0;
  if (t >= a.hi) return cum.back();
  const double h = a.step();
  const int i = std::min(static_cast<int>((t - a.lo) / h), a.n - 2);
  const double s = t - a.at(i);
  const double fa = g.density(static_cast<std::size_t>(i));
  const double fb = g.density(static_cast<std::size_t>(i + 1));
  return cum[static_cast<std::size_t>(i)] + fa * s + (fb - fa) * s * s / (2.0 * h);
}

}  // namespace

void GridAxis::validate() const {
  RML_REQUIRE(n >= 2, ErrorCode::InvalidArgument, "grid axis needs at least 2 nodes");
  RML_REQUIRE(std::isfinite(lo) && std::isfinite(hi) && hi > lo,
              ErrorCode::InvalidArgument, "grid axis needs finite lo < hi");
}

std::vector<int> GridDensity::unflatten(std::size_t flat) const {
  if (dims() == 1) return {static_cast<int>(flat)};
  const auto n1 = static_cast<std::size_t>(axes[1].n);
  return {static_cast<int>(flat / n1), static_cast<int>(flat % n1)};
}

Vector GridDensity::point(std::size_t flat) const {
  const auto idx = unflatten(flat);
  Vector x(static_cast<Eigen::Index>(dims()));
  for (std::size_t k = 0; k < dims(); ++k) x(static_cast<Eigen::Index>(k)) = axes[k].at(idx[k]);
  return x;
}

double GridDensity::density(std::size_t flat) const {
  const double lv = log_values[flat];
  return lv == kNegInf ? 0.0 : std::exp(lv - log_normalizer);
}

double GridDensity::weight(std::size_t flat) const {
  const auto idx = unflatten(flat);
  double w = 1.0;
  for (std::size_t k = 0; k < dims(); ++k) w *= trap_weight(axes[k], idx[k]);
  return w;
}

double GridDensity::integral() const {
  double s = 0.0;
  for (std::size_t i = 0; i < size(); ++i) s += weight(i) * density(i);
  return s;
}

Vector GridDensity::mean() const {
  Vector m = Vector::Zero(static_cast<Eigen::Index>(dims()));
  for (std::size_t i = 0; i < size(); ++i) m += weight(i) * density(i) * point(i);
  return m;
}

Matrix GridDensity::covariance() const {
  const Vector m = mean();
  const auto n = static_cast<Eigen::Index>(dims());
  Matrix c = Matrix::Zero(n, n);
  for (std::size_t i = 0; i < size(); ++i) {
    const Vector r = point(i) - m;
    c += weight(i) * density(i) * r * r.transpose();
  }
  return c;
}

std::size_t GridDensity::nearest(const Vector& x) const {
  std::size_t flat = 0;
  for (std::size_t k = 0; k < dims(); ++k) {
    const GridAxis& a = axes[k];
    const double t = std::round((x(static_cast<Eigen::Index>(k)) - a.lo) / a.step());
    const int i = static_cast<int>(std::clamp(t, 0.0, static_cast<double>(a.n - 1)));
    flat = flat * static_cast<std::size_t>(a.n) + static_cast<std::size_t>(i);
  }
  return flat;
}

GridDensity grid_from_function(const std::vector<GridAxis>& axes,
                               const LogDensityFn& log_f, int workers) {
  RML_REQUIRE(axes.size() == 1 || axes.size() == 2, ErrorCode::Unsupported,
              "grid quadrature supports 1 or 2 dimensions only");
  for (const auto& a : axes) a.validate();
  GridDensity g;
  g.axes = axes;
  std::size_t total = 1;
  for (const auto& a : axes) total *= static_cast<std::size_t>(a.n);
  g.log_values.assign(total, kNegInf);
  detail::parallel_for(0, static_cast<std::int64_t>(total), workers, [&](std::int64_t i) {
    const auto flat = static_cast<std::size_t>(i);
    const double v = log_f(g.point(flat));
    RML_REQUIRE(!std::isnan(v) && v != std::numeric_limits<double>::infinity(),
                ErrorCode::Evaluation, "log-density is not finite on the grid");
    g.log_values[flat] = v;
  });
  std::vector<double> terms(total);
  for (std::size_t i = 0; i < total; ++i) terms[i] = g.log_values[i] + std::log(g.weight(i));
  g.log_normalizer = log_sum_exp(terms);
  RML_REQUIRE(std::isfinite(g.log_normalizer), ErrorCode::Evaluation,
              "density has no mass on the grid");
  return g;
}

std::vector<GridAxis> default_axes(const ProblemSpec& p, int n, double half_width) {
  std::vector<GridAxis> axes;
  for (Eigen::Index k = 0; k < p.dim_x(); ++k) {
    const double sd = std::sqrt(p.prior_cov()(k, k));
    axes.push_back({p.prior_mean()(k) - half_width * sd, p.prior_mean()(k) + half_width * sd, n});
  }
  return axes;
}

GridDensity grid_marginal(const ProblemSpec& p, const std::vector<GridAxis>& axes,
                          int workers) {
  RML_REQUIRE(p.dim_x() <= 2, ErrorCode::Unsupported,
              "grid quadrature supports dim_x <= 2 only");
  RML_REQUIRE(static_cast<Eigen::Index>(axes.size()) == p.dim_x(),
              ErrorCode::DimensionMismatch, "need one grid axis per model dimension");
  return grid_from_function(
      axes, [&](const Vector& x) { return log_target_marginal(p, x); }, workers);
}

GridDensity grid_joint(const ProblemSpec& p, const HyperParams& h,
                       const GridAxis& x_axis, const GridAxis& d_axis, int workers) {
  RML_REQUIRE(p.dim_x() == 1 && p.dim_d() == 1, ErrorCode::Unsupported,
              "joint (x, d) grids need dim_x = dim_d = 1");
  h.validate();
  return grid_from_function(
      {x_axis, d_axis},
      [&](const Vector& v) {
        return log_target_joint(p, h, v.head(1), v.tail(1));
      },
      workers);
}

GridDensity grid_proposal(const ProblemSpec& p, const HyperParams& h,
                          const GridAxis& x_axis, const GridAxis& d_axis,
                          JacobianMode mode, int workers) {
  RML_REQUIRE(p.dim_x() == 1 && p.dim_d() == 1, ErrorCode::Unsupported,
              "proposal grids need dim_x = dim_d = 1");
  h.validate();
  return grid_from_function(
      {x_axis, d_axis},
      [&](const Vector& v) {
        try {
          return evaluate_candidate(p, h, v.head(1), v.tail(1), mode).log_q;
        } catch (const Error& e) {
          if (e.code() != ErrorCode::Singular) throw;
          return kNegInf;
        }
      },
      workers);
}

double mean_conditional_sd(const GridDensity& g) {
  RML_REQUIRE(g.dims() == 2, ErrorCode::DimensionMismatch,
              "conditional spread needs a 2-D grid");
  const int n0 = g.axes[0].n;
  const int n1 = g.axes[1].n;
  double total = 0.0;
  double acc = 0.0;
  for (int i = 0; i < n0; ++i) {
    double m0 = 0.0, m1 = 0.0, m2 = 0.0;
    for (int j = 0; j < n1; ++j) {
      const double w = trap_weight(g.axes[1], j) *
                       g.density(static_cast<std::size_t>(i) * n1 + j);
      const double y = g.axes[1].at(j);
      m0 += w;
      m1 += w * y;
      m2 += w * y * y;
    }
    if (m0 <= 0.0) continue;
    const double mean = m1 / m0;
    const double var = std::max(m2 / m0 - mean * mean, 0.0);
    const double wx = trap_weight(g.axes[0], i) * m0;
    acc += wx * std::sqrt(var);
    total += wx;
  }
  RML_REQUIRE(total > 0.0, ErrorCode::Evaluation, "grid has no mass");
  return acc / total;
}

double grid_correlation(const GridDensity& g) {
  RML_REQUIRE(g.dims() == 2, ErrorCode::DimensionMismatch, "correlation needs a 2-D grid");
  const Matrix c = g.covariance();
  return c(0, 1) / std::sqrt(c(0, 0) * c(1, 1));
}

std::vector<std::size_t> find_modes(const GridDensity& g, double floor_rel) {
  require_grid_dims(g);
  const double peak = *std::max_element(g.log_values.begin(), g.log_values.end());
  const double floor = peak + std::log(floor_rel);
  std::vector<std::size_t> modes;
  for (std::size_t i = 0; i < g.size(); ++i) {
    const double v = g.log_values[i];
    if (v <= floor) continue;
    bool is_max = true;
    for (std::size_t j : neighbours(g, i)) {
      if (g.log_values[j] >= v) {
        is_max = false;
        break;
      }
    }
    if (is_max) modes.push_back(i);
  }
  return modes;
}

BasinPartition basins(const GridDensity& g) {
  require_grid_dims(g);
  const std::size_t n = g.size();
  // Uphill pointer of each node; a node with no higher neighbour points at itself.
  std::vector<std::size_t> up(n);
  for (std::size_t i = 0; i < n; ++i) {
    std::size_t best = i;
    for (std::size_t j : neighbours(g, i)) {
      if (g.log_values[j] > g.log_values[best]) best = j;
    }
    up[i] = best;
  }
  std::vector<std::size_t> top(n);
  for (std::size_t i = 0; i < n; ++i) {
    std::size_t k = i;
    while (up[k] != k) k = up[k];
    top[i] = k;
  }
  std::map<std::size_t, double> mass;
  for (std::size_t i = 0; i < n; ++i) mass[top[i]] += g.weight(i) * g.density(i);

  BasinPartition b;
  for (const auto& [node, m] : mass) {
    b.modes.push_back(node);
    b.masses.push_back(m);
  }
  std::vector<std::size_t> order(b.modes.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t c) { return b.masses[a] > b.masses[c]; });
  BasinPartition sorted;
  std::map<std::size_t, int> rank;
  for (std::size_t r = 0; r < order.size(); ++r) {
    sorted.modes.push_back(b.modes[order[r]]);
    sorted.masses.push_back(b.masses[order[r]]);
    rank[b.modes[order[r]]] = static_cast<int>(r);
  }
  sorted.label.resize(n);
  for (std::size_t i = 0; i < n; ++i) sorted.label[i] = rank[top[i]];
  return sorted;
}

std::vector<double> basin_occupation(const BasinPartition& b, const GridDensity& g,
                                     const std::vector<Vector>& samples) {
  RML_REQUIRE(!samples.empty(), ErrorCode::InvalidArgument, "no samples");
  std::vector<double> occ(b.modes.size(), 0.0);
  for (const auto& x : samples) {
    require_size(x, static_cast<Eigen::Index>(g.dims()), "sample");
    occ[static_cast<std::size_t>(b.label[g.nearest(x)])] += 1.0;
  }
  for (double& o : occ) o /= static_cast<double>(samples.size());
  return occ;
}

SampleReport compare_samples_to_grid(const std::vector<Vector>& samples,
                                     const GridDensity& g, int bins_per_axis) {
  require_grid_dims(g);
  RML_REQUIRE(!samples.empty(), ErrorCode::InvalidArgument,
              "cannot compare an empty sample set");
  RML_REQUIRE(bins_per_axis >= 1, ErrorCode::InvalidArgument, "need at least one bin");
  const auto dim = static_cast<Eigen::Index>(g.dims());
  const int b = bins_per_axis;

  SampleReport r;
  std::size_t n_bins = 1;
  for (std::size_t k = 0; k < g.dims(); ++k) n_bins *= static_cast<std::size_t>(b);
  r.hist.assign(n_bins, 0.0);
  r.expected.assign(n_bins, 0.0);

  if (g.dims() == 1) {
    const auto cells = cell_masses_1d(g);
    std::vector<double> cum(cells.size() + 1, 0.0);
    std::partial_sum(cells.begin(), cells.end(), cum.begin() + 1);
    const GridAxis& a = g.axes[0];
    const double w = (a.hi - a.lo) / b;
    for (int k = 0; k < b; ++k) {
      r.expected[static_cast<std::size_t>(k)] =
          cdf_1d(g, cum, a.lo + (k + 1) * w) - cdf_1d(g, cum, a.lo + k * w);
    }
  } else {
    const int c0 = g.axes[0].n - 1;
    const int c1 = g.axes[1].n - 1;
    RML_REQUIRE(c0 % b == 0 && c1 % b == 0, ErrorCode::InvalidArgument,
                "2-D bins must be unions of grid cells: (n - 1) % bins_per_axis != 0");
    const auto cells = cell_masses_2d(g);
    const int f0 = c0 / b;
    const int f1 = c1 / b;
    for (int i = 0; i < c0; ++i) {
      for (int j = 0; j < c1; ++j) {
        r.expected[static_cast<std::size_t>(i / f0) * b + j / f1] +=
            cells[static_cast<std::size_t>(i) * c1 + j];
      }
    }
  }

  Vector sum = Vector::Zero(dim);
  Vector sum2 = Vector::Zero(dim);
  std::size_t outside = 0;
  for (const auto& x : samples) {
    require_size(x, dim, "sample");
    sum += x;
    sum2 += x.cwiseProduct(x);
    std::size_t bin = 0;
    bool inside = true;
    for (std::size_t k = 0; k < g.dims(); ++k) {
      const GridAxis& a = g.axes[k];
      const double t = (x(static_cast<Eigen::Index>(k)) - a.lo) / (a.hi - a.lo) * b;
      if (!(t >= 0.0 && t <= b)) {
        inside = false;
        break;
      }
      bin = bin * static_cast<std::size_t>(b) +
            static_cast<std::size_t>(std::min(static_cast<int>(t), b - 1));
    }
    if (inside) {
      r.hist[bin] += 1.0;
    } else {
      ++outside;
    }
  }
  const auto n = static_cast<double>(samples.size());
  double tv = 0.0;
  for (std::size_t k = 0; k < n_bins; ++k) {
    r.hist[k] /= n;
    tv += std::abs(r.hist[k] - r.expected[k]);
  }
  // The grid puts no mass outside its extent.
  r.outside_fraction = static_cast<double>(outside) / n;
  r.tv_distance = 0.5 * (tv + r.outside_fraction);

  const Vector m = sum / n;
  const Vector var = sum2 / n - m.cwiseProduct(m);
  r.mean_error = m - g.mean();
  r.variance_error = var - g.covariance().diagonal();
  return r;
}

std::vector<Vector> sample_from_grid(const GridDensity& g, std::size_t n,
                                     std::mt19937_64& rng) {
  require_grid_dims(g);
  const auto cells = g.dims() == 1 ? cell_masses_1d(g) : cell_masses_2d(g);
  std::discrete_distribution<std::size_t> pick(cells.begin(), cells.end());
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  std::vector<Vector> out;
  out.reserve(n);
  for (std::size_t s = 0; s < n; ++s) {
    const std::size_t c = pick(rng);
    if (g.dims() == 1) {
      // Inverse CDF of the linear density between the two nodes.
      const auto i = static_cast<int>(c);
      const double fa = g.density(static_cast<std::size_t>(i));
      const double fb = g.density(static_cast<std::size_t>(i + 1));
      const double u = unif(rng);
      double t;
      if (std::abs(fb - fa) < 1e-12 * std::max(fa, fb)) {
        t = u;
      } else {
        const double target = u * 0.5 * (fa + fb);
        t = (-fa + std::sqrt(fa * fa + 2.0 * (fb - fa) * target)) / (fb - fa);
      }
      out.push_back(Vector::Constant(1, g.axes[0].at(i) + t * g.axes[0].step()));
    } else {
      const auto c1 = static_cast<std::size_t>(g.axes[1].n - 1);
      const int i = static_cast<int>(c / c1);
      const int j = static_cast<int>(c % c1);
      Vector x(2);
      x << g.axes[0].at(i) + unif(rng) * g.axes[0].step(),
          g.axes[1].at(j) + unif(rng) * g.axes[1].step();
      out.push_back(std::move(x));
    }
  }
  return out;
}

GaussianPosterior conjugate_posterior(const Vector& prior_mean, const Matrix& prior_cov,
                                      const Matrix& G, const Vector& obs,
                                      const Matrix& obs_cov) {
  const Eigen::Index nx = prior_mean.size();
  const Eigen::Index nd = obs.size();
  RML_REQUIRE(prior_cov.rows() == nx && prior_cov.cols() == nx && G.rows() == nd &&
                  G.cols() == nx && obs_cov.rows() == nd && obs_cov.cols() == nd,
              ErrorCode::DimensionMismatch, "conjugate_posterior: inconsistent shapes");
  const Eigen::LLT<Matrix> cx(prior_cov);
  const Eigen::LLT<Matrix> cd(obs_cov);
  RML_REQUIRE(cx.info() == Eigen::Success && cd.info() == Eigen::Success,
              ErrorCode::NotPositiveDefinite, "covariances must be positive definite");
  const Matrix precision = cx.solve(Matrix::Identity(nx, nx)) + G.transpose() * cd.solve(G);
  const Eigen::LLT<Matrix> pf(precision);
  RML_REQUIRE(pf.info() == Eigen::Success, ErrorCode::Singular,
              "normal-equations matrix is singular");
  GaussianPosterior post;
  post.cov = pf.solve(Matrix::Identity(nx, nx));
  post.mean = prior_mean + post.cov * G.transpose() * cd.solve(obs - G * prior_mean);
  return post;
}

}  // namespace rml
