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

#ifndef ABCG_SAMPLERS_HPP
#define ABCG_SAMPLERS_HPP

#include <Eigen/Dense>
#include <cstdint>
#include <string>
#include <vector>

#include "abcg/model.hpp"
#include "abcg/rng.hpp"

namespace abcg {

/// Output of every chain-style sampler.
///
/// `samples` holds one flattened ParamState per row (blocks in index order);
/// `distances` holds the accepted distance of each block update, one column
/// per block (vanilla samplers use a single column). Exact block updates
/// record a distance of 0.
struct ChainOutput {
  Eigen::MatrixXd samples;
  Eigen::MatrixXd distances;
  BudgetCounter budget;
  std::vector<std::uint64_t> attempts;
  /// Retention sampler only: whether iteration i accepted its proposal.
  std::vector<bool> accepted;

  std::vector<std::string> block_names;
  std::vector<Eigen::Index> block_dims;

  [[nodiscard]] Eigen::Index rows() const noexcept { return samples.rows(); }
  /// Column of component c of block j.
  [[nodiscard]] Eigen::Index column(BlockIndex j, Eigen::Index c = 0) const;
  /// Copy without the first `burn_in` rows.
  [[nodiscard]] ChainOutput drop_first(Eigen::Index burn_in) const;
};

struct StepOptions {
  /// Use the model's exact conditional instead of an ABC step.
  bool exact = false;
  /// Cap on simulations per accepted draw for Fixed rules.
  std::uint64_t max_attempts = 1'000'000;
};

struct StepResult {
  Eigen::VectorXd value;
  double distance = 0.0;
  std::uint64_t attempts = 0;
};

/// Draw block j from its ABC conditional pi_eps_j{. | s_j(x*, theta_-j)}.
///
/// Unit blocks of a declared hierarchy simulate only their own data row;
/// hyper blocks simulate fresh unit parameters and compare the level summary
/// against the current unit values. Everything else simulates a full dataset.
StepResult abc_conditional_step(const ModelSpec& model, const Dataset& observed, BlockIndex j,
                                const ParamState& state, const ToleranceRule& rule, RngStream& rng,
                                BudgetCounter& budget, const StepOptions& options = {});

/// Per-chain settings shared by the Gibbs-type samplers.
struct GibbsOptions {
  /// One rule per block.
  std::vector<ToleranceRule> rules;
  /// Blocks updated with the exact conditional; empty means none.
  std::vector<bool> exact;
  std::uint64_t max_attempts = 1'000'000;
  /// Iteration i draws from rng.split(first_iteration + i); set it to resume a chain.
  std::uint64_t first_iteration = 0;
};

/// Fixed(eps): N accepted prior-predictive draws. BestOfN(n): N independent
/// best-of-n tables.
ChainOutput vanilla_abc(const ModelSpec& model, const Dataset& observed, std::size_t n, const ToleranceRule& rule,
                        RngStream& rng, std::uint64_t max_attempts = 1'000'000);

/// One reference table of `table_size` prior-predictive draws; keeps the
/// `keep` smallest distances (rows ordered by distance, ties by table index).
ChainOutput vanilla_abc_table(const ModelSpec& model, const Dataset& observed, std::size_t table_size,
                              std::size_t keep, RngStream& rng);

/// Systematic-scan ABC-Gibbs over blocks 0..n-1.
ChainOutput abc_gibbs(const ModelSpec& model, const Dataset& observed, std::size_t n, const GibbsOptions& options,
                      const ParamState& init, RngStream& rng);

/// ABC-Gibbs for hierarchical models: per level, every unit block then the
/// hyper block; blocks outside the hierarchy follow in index order.
ChainOutput hierarchical_abc_gibbs(const ModelSpec& model, const Dataset& observed, std::size_t n,
                                   const GibbsOptions& options, const ParamState& init, RngStream& rng);

/// Retention-kernel variant for a single-level hierarchy with exact unit
/// conditionals. A proposal (alpha^c, mu^c) is kept iff the level summaries
/// of a fresh unit draw under alpha^c and of mu^c are within eps_alpha;
/// otherwise the previous state is retained.
ChainOutput hierarchical_abc_gibbs_retention(const ModelSpec& model, const Dataset& observed, std::size_t n,
                                             double eps_alpha, RngStream& rng);

// ---------------------------------------------------------------------------
// SMC-ABC

enum class MoveKernel {
  /// Repeat Gaussian proposals until one pseudo-statistic falls under eps.
  RepeatUntilHit,
  /// One Gaussian proposal per particle accepted with probability
  /// min(1, pi(theta*) #hits* / (pi(theta) #hits)); requires log_prior.
  MetropolisHastings,
};

struct SmcOptions {
  std::size_t particles = 1000;
  std::size_t pseudo_per_particle = 1;  // M
  std::size_t steps = 30;               // T
  double alpha_quality = 0.9;
  /// Resample when ESS falls below this; 0 means particles / 2.
  std::size_t min_ess = 0;
  MoveKernel kernel = MoveKernel::RepeatUntilHit;
  std::uint64_t max_move_attempts = 10'000;
  double bisection_tol = 1e-6;
  int bisection_max_iter = 100;
  bool keep_trajectory = true;
};

/// Weighted particle population with per-particle distance caches.
struct ParticleSystem {
  std::vector<ParamState> particles;
  Eigen::VectorXd weights;
  /// N x M distances of each particle's pseudo-statistics to the observed statistic.
  Eigen::MatrixXd cache;
  double epsilon = 0.0;
};

struct SmcStepRecord {
  double epsilon = 0.0;
  double ess_after_reweight = 0.0;
  bool resampled = false;
  double ess_after_resample = 0.0;
  std::size_t zero_weight_particles = 0;
  std::size_t stalled_moves = 0;
  std::size_t accepted_moves = 0;
};

struct SmcOutput {
  /// Population after initialisation (index 0) and after each step, when kept.
  std::vector<ParticleSystem> trajectory;
  ParticleSystem final;
  std::vector<SmcStepRecord> steps;
  BudgetCounter budget;
};

SmcOutput smc_abc(const ModelSpec& model, const Dataset& observed, const SmcOptions& options, RngStream& rng);

/// Multinomial resampling of indices 0..N-1 by weight.
std::vector<std::size_t> multinomial_resample(const Eigen::VectorXd& weights, std::size_t count, RngStream& rng);

}  // namespace abcg

#endif  // ABCG_SAMPLERS_HPP
