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

#ifndef ABCG_DIAGNOSTICS_HPP
#define ABCG_DIAGNOSTICS_HPP

#include <Eigen/Dense>
#include <optional>
#include <span>
#include <vector>

#include "abcg/density_grid.hpp"
#include "abcg/model.hpp"
#include "abcg/samplers.hpp"

namespace abcg {

/// 1-D Wasserstein-1 distance, the integral of |F_a - F_b|. Throws EmptySample.
double wasserstein1(std::span<const double> a, std::span<const double> b);

/// Against a tabulated density; its CDF is the trapezoid cumulative integral, linear between nodes.
double wasserstein1(std::span<const double> a, const DensityGrid& grid);

/// Weighted sample against a tabulated density.
double wasserstein1_weighted(std::span<const double> a, std::span<const double> wa, const DensityGrid& grid);

/// Weighted samples (weights need not be normalised; zero weights are ignored).
double wasserstein1_weighted(std::span<const double> a, std::span<const double> wa, std::span<const double> b,
                             std::span<const double> wb);

/// ceil(log2 n) + 1, at least 20.
std::size_t default_bins(std::size_t n);

/// Half the L1 distance between histograms on the pooled range. bins = 0 uses
/// default_bins of the larger sample.
double tv_histogram(std::span<const double> a, std::span<const double> b, std::size_t bins = 0);

/// Gaussian kernel density estimate on `resolution` points over the sample
/// range padded by 3 bandwidths. Silverman's rule unless bandwidth > 0.
DensityGrid kde_grid(std::span<const double> sample, Eigen::Index resolution = 512, double bandwidth = 0.0);

struct ProbeOptions {
  /// Block whose ABC conditional is probed (component 0 is histogrammed).
  BlockIndex block = 0;
  /// Block set to each grid value in turn.
  BlockIndex conditioning = 0;
  std::vector<Eigen::VectorXd> grid;
  ToleranceRule rule = BestOfN{1};
  std::size_t draws_per_cell = 2000;
  std::size_t bins = 0;
  std::uint64_t max_attempts = 1'000'000;
};

struct ProbeResult {
  /// Max pairwise histogram TV between grid cells.
  double kappa = 0.0;
  /// Largest TV between the two halves of one cell's draws (noise floor).
  double margin = 0.0;
  bool pass = false;
  std::size_t arg_a = 0;
  std::size_t arg_b = 0;
  Eigen::MatrixXd pairwise;
  BudgetCounter budget;
};

/// Empirical sup over grid pairs of the TV between ABC conditionals of
/// `block` given two values of `conditioning`; other blocks are held at `base`.
/// Cell c draws from rng.split(c). pass iff kappa < 1/2.
ProbeResult contraction_probe(const ModelSpec& model, const Dataset& observed, const ParamState& base,
                              const ProbeOptions& options, RngStream& rng);

/// `points` values per dimension spread evenly over [lo, hi] (single block component).
std::vector<Eigen::VectorXd> scalar_grid(double lo, double hi, std::size_t points);

struct PredictiveDistance {
  double mean = 0.0;
  /// Standard error of the mean.
  double se = 0.0;
  std::size_t count = 0;
};

/// For each sample row and each of `reps` replicates: simulate a fresh dataset
/// and measure its distance to the observed data, either with the global
/// summary or with block j's summary. Row r draws from rng.split(r).
PredictiveDistance posterior_predictive_distance(const ModelSpec& model, const Dataset& observed,
                                                 const Eigen::MatrixXd& samples, std::size_t reps, RngStream& rng,
                                                 std::optional<BlockIndex> block = std::nullopt);

PredictiveDistance posterior_predictive_distance(const ModelSpec& model, const Dataset& observed,
                                                 const ChainOutput& chain, std::size_t reps, RngStream& rng,
                                                 std::optional<BlockIndex> block = std::nullopt);

}  // namespace abcg

#endif  // ABCG_DIAGNOSTICS_HPP
