// Copyright 2026 The abcgibbs Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "abcg/diagnostics.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <utility>

#include "abcg/errors.hpp"
#include "abcg/quantile.hpp"

namespace abcg {
namespace {

using Weighted = std::vector<std::pair<double, double>>;

Weighted normalized(std::span<const double> x, std::span<const double> w) {
  if (x.empty()) throw EmptySample("wasserstein1: empty sample");
  if (!w.empty() && w.size() != x.size()) throw InvalidParameter("wasserstein1: weight count mismatch");
  Weighted out;
  out.reserve(x.size());
  double total = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double wi = w.empty() ? 1.0 : w[i];
    if (wi < 0.0) throw InvalidParameter("wasserstein1: negative weight");
    if (wi == 0.0) continue;
    out.emplace_back(x[i], wi);
    total += wi;
  }
  if (!(total > 0.0)) throw EmptySample("wasserstein1: all weights are zero");
  for (auto& p : out) p.second /= total;
  std::sort(out.begin(), out.end());
  return out;
}

/// Integral of |c - g(t)| for g linear from g0 to g1 over an interval of length len.
double abs_linear_integral(double c, double g0, double g1, double len) {
  const double d0 = g0 - c;
  const double d1 = g1 - c;
  if (d0 * d1 >= 0.0) return 0.5 * len * (std::abs(d0) + std::abs(d1));
  return 0.5 * len * (d0 * d0 + d1 * d1) / (std::abs(d0) + std::abs(d1));
}

}  // namespace

double wasserstein1_weighted(std::span<const double> a, std::span<const double> wa, std::span<const double> b,
                             std::span<const double> wb) {
  const Weighted pa = normalized(a, wa);
  const Weighted pb = normalized(b, wb);
  std::size_t i = 0;
  std::size_t j = 0;
  double fa = 0.0;
  double fb = 0.0;
  double total = 0.0;
  double prev = std::min(pa.front().first, pb.front().first);
  while (i < pa.size() || j < pb.size()) {
    const double next = std::min(i < pa.size() ? pa[i].first : INFINITY, j < pb.size() ? pb[j].first : INFINITY);
    total += std::abs(fa - fb) * (next - prev);
    while (i < pa.size() && pa[i].first == next) fa += pa[i++].second;
    while (j < pb.size() && pb[j].first == next) fb += pb[j++].second;
    prev = next;
  }
  return total;
}

double wasserstein1(std::span<const double> a, std::span<const double> b) {
  return wasserstein1_weighted(a, {}, b, {});
}

double wasserstein1_weighted(std::span<const double> a, std::span<const double> wa, const DensityGrid& grid) {
  if (grid.size() < 2) throw InvalidParameter("wasserstein1: grid needs at least two points");
  const Weighted s = normalized(a, wa);
  Eigen::VectorXd cdf = grid.cdf();
  if (!(cdf[cdf.size() - 1] > 0.0)) throw NumericalError("wasserstein1: grid has no mass");
  cdf /= cdf[cdf.size() - 1];

  const double h = grid.step();
  auto grid_cdf = [&](double x) {
    if (x <= grid.lo) return 0.0;
    if (x >= grid.hi) return 1.0;
    const double pos = (x - grid.lo) / h;
    const auto k = std::min<Eigen::Index>(static_cast<Eigen::Index>(pos), grid.size() - 2);
    const double f = pos - static_cast<double>(k);
    return (1.0 - f) * cdf[k] + f * cdf[k + 1];
  };

  std::vector<double> breaks;
  breaks.reserve(s.size() + static_cast<std::size_t>(grid.size()));
  for (const auto& p : s) breaks.push_back(p.first);
  for (Eigen::Index k = 0; k < grid.size(); ++k) breaks.push_back(grid.x(k));
  std::sort(breaks.begin(), breaks.end());
  breaks.erase(std::unique(breaks.begin(), breaks.end()), breaks.end());

  double total = 0.0;
  double fs = 0.0;  // sample CDF at the current left break
  std::size_t next = 0;
  for (std::size_t k = 0; k + 1 < breaks.size(); ++k) {
    const double p = breaks[k];
    const double q = breaks[k + 1];
    while (next < s.size() && s[next].first <= p) fs += s[next++].second;
    total += abs_linear_integral(fs, grid_cdf(p), grid_cdf(q), q - p);
  }
  return total;
}

double wasserstein1(std::span<const double> a, const DensityGrid& grid) {
  return wasserstein1_weighted(a, {}, grid);
}

std::size_t default_bins(std::size_t n) {
  const auto sturges = static_cast<std::size_t>(std::ceil(std::log2(static_cast<double>(std::max<std::size_t>(n, 1))))) + 1;
  return std::max<std::size_t>(sturges, 20);
}

double tv_histogram(std::span<const double> a, std::span<const double> b, std::size_t bins) {
  if (a.empty() || b.empty()) throw EmptySample("tv_histogram: empty sample");
  if (bins == 0) bins = default_bins(std::max(a.size(), b.size()));
  if (bins < 2) throw InvalidParameter("tv_histogram: need at least 2 bins");
  const auto [amin, amax] = std::minmax_element(a.begin(), a.end());
  const auto [bmin, bmax] = std::minmax_element(b.begin(), b.end());
  const double lo = std::min(*amin, *bmin);
  const double hi = std::max(*amax, *bmax);
  if (!(hi > lo)) return 0.0;

  auto histogram = [&](std::span<const double> x) {
    Eigen::VectorXd h = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(bins));
    for (double v : x) {
      const auto k = static_cast<Eigen::Index>((v - lo) / (hi - lo) * static_cast<double>(bins));
      h[std::clamp<Eigen::Index>(k, 0, h.size() - 1)] += 1.0;
    }
    return Eigen::VectorXd(h / static_cast<double>(x.size()));
  };
  return 0.5 * (histogram(a) - histogram(b)).lpNorm<1>();
}

DensityGrid kde_grid(std::span<const double> sample, Eigen::Index resolution, double bandwidth) {
  if (sample.empty()) throw EmptySample("kde_grid: empty sample");
  if (resolution < 2) throw InvalidParameter("kde_grid: resolution must be >= 2");
  const Eigen::Map<const Eigen::VectorXd> x(sample.data(), static_cast<Eigen::Index>(sample.size()));
  const auto n = static_cast<double>(x.size());
  double h = bandwidth;
  if (!(h > 0.0)) {
    const double sd = x.size() > 1 ? std::sqrt((x.array() - x.mean()).square().sum() / (n - 1.0)) : 0.0;
    const auto q = empirical_quantiles(sample, std::vector<double>{0.25, 0.75});
    const double iqr = (q[1] - q[0]) / 1.34;
    double spread = std::min(sd, iqr);
    if (!(spread > 0.0)) spread = std::max(sd, iqr);
    if (!(spread > 0.0)) spread = 1e-6 * std::max(1.0, std::abs(x.mean()));
    h = 0.9 * spread * std::pow(n, -0.2);
  }
  DensityGrid g;
  g.lo = x.minCoeff() - 3.0 * h;
  g.hi = x.maxCoeff() + 3.0 * h;
  g.values.resize(resolution);
  const Eigen::VectorXd pts = g.points();
  for (Eigen::Index i = 0; i < resolution; ++i) {
    g.values[i] = (-0.5 * ((x.array() - pts[i]) / h).square()).exp().sum();
  }
  g.values /= n * h * std::sqrt(2.0 * std::numbers::pi);
  g.normalize();
  return g;
}

std::vector<Eigen::VectorXd> scalar_grid(double lo, double hi, std::size_t points) {
  if (points < 2) throw InvalidParameter("scalar_grid: need at least 2 points");
  std::vector<Eigen::VectorXd> out;
  const Eigen::VectorXd v = Eigen::VectorXd::LinSpaced(static_cast<Eigen::Index>(points), lo, hi);
  for (Eigen::Index i = 0; i < v.size(); ++i) out.emplace_back(Eigen::VectorXd::Constant(1, v[i]));
  return out;
}

ProbeResult contraction_probe(const ModelSpec& model, const Dataset& observed, const ParamState& base,
                              const ProbeOptions& options, RngStream& rng) {
  model.validate();
  if (options.grid.size() < 2) throw InvalidParameter("contraction_probe: grid needs at least 2 cells");
  if (options.draws_per_cell < 4) throw InvalidParameter("contraction_probe: need at least 4 draws per cell");
  if (options.block >= model.block_count() || options.conditioning >= model.block_count() ||
      options.block == options.conditioning) {
    throw InvalidParameter("contraction_probe: invalid block pair");
  }
  validate(options.rule);

  ProbeResult out;
  const std::size_t cells = options.grid.size();
  std::vector<std::vector<double>> draws(cells);
  const StepOptions step{.exact = false, .max_attempts = options.max_attempts};
  for (std::size_t c = 0; c < cells; ++c) {
    ParamState state = base;
    state[options.conditioning] = options.grid[c];
    RngStream r = rng.split(c);
    draws[c].reserve(options.draws_per_cell);
    for (std::size_t k = 0; k < options.draws_per_cell; ++k) {
      const StepResult res = abc_conditional_step(model, observed, options.block, state, options.rule, r, out.budget, step);
      draws[c].push_back(res.value[0]);
    }
    const std::size_t half = options.draws_per_cell / 2;
    const std::span<const double> all(draws[c]);
    out.margin = std::max(out.margin, tv_histogram(all.first(half), all.subspan(half), options.bins));
  }

  out.pairwise = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(cells), static_cast<Eigen::Index>(cells));
  for (std::size_t a = 0; a < cells; ++a) {
    for (std::size_t b = a + 1; b < cells; ++b) {
      const double tv = tv_histogram(draws[a], draws[b], options.bins);
      out.pairwise(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(b)) = tv;
      out.pairwise(static_cast<Eigen::Index>(b), static_cast<Eigen::Index>(a)) = tv;
      if (tv > out.kappa) {
        out.kappa = tv;
        out.arg_a = a;
        out.arg_b = b;
      }
    }
  }
  out.pass = out.kappa < 0.5;
  return out;
}

PredictiveDistance posterior_predictive_distance(const ModelSpec& model, const Dataset& observed,
                                                 const Eigen::MatrixXd& samples, std::size_t reps, RngStream& rng,
                                                 std::optional<BlockIndex> block) {
  model.validate();
  if (samples.rows() == 0) throw EmptySample("posterior_predictive_distance: empty chain");
  if (reps == 0) throw InvalidParameter("posterior_predictive_distance: reps must be >= 1");
  if (block && *block >= model.block_count()) throw InvalidParameter("posterior_predictive_distance: block");
  const Eigen::VectorXd observed_summary = model.summary(observed);

  std::vector<double> d;
  d.reserve(static_cast<std::size_t>(samples.rows()) * reps);
  BudgetCounter budget;
  for (Eigen::Index r = 0; r < samples.rows(); ++r) {
    const ParamState theta = model.unflatten(samples.row(r).transpose());
    RngStream rr = rng.split(static_cast<std::uint64_t>(r));
    for (std::size_t k = 0; k < reps; ++k) {
      const Dataset x = simulate(model, theta, rr, budget);
      if (block) {
        d.push_back(model.block_distance(*block, model.block_summary(*block, x, theta),
                                         model.block_summary(*block, observed, theta)));
      } else {
        d.push_back(model.distance(model.summary(x), observed_summary));
      }
    }
  }
  const Eigen::Map<const Eigen::VectorXd> v(d.data(), static_cast<Eigen::Index>(d.size()));
  PredictiveDistance out;
  out.count = d.size();
  out.mean = v.mean();
  if (d.size() > 1) {
    const double var = (v.array() - out.mean).square().sum() / static_cast<double>(d.size() - 1);
    out.se = std::sqrt(var / static_cast<double>(d.size()));
  }
  return out;
}

PredictiveDistance posterior_predictive_distance(const ModelSpec& model, const Dataset& observed,
                                                 const ChainOutput& chain, std::size_t reps, RngStream& rng,
                                                 std::optional<BlockIndex> block) {
  return posterior_predictive_distance(model, observed, chain.samples, reps, rng, block);
}

}  // namespace abcg
