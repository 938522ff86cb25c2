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

#ifndef ABCG_MODEL_HPP
#define ABCG_MODEL_HPP

#include <Eigen/Dense>
#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "abcg/rng.hpp"

namespace abcg {

/// Observations or pseudo-observations. Hierarchical models store one unit per row.
using Dataset = Eigen::MatrixXd;

/// Position of a parameter block in a model's block list (0-based).
using BlockIndex = std::size_t;

/// Parameter value split into blocks, one real vector per block.
struct ParamState {
  std::vector<Eigen::VectorXd> blocks;

  [[nodiscard]] std::size_t block_count() const noexcept { return blocks.size(); }
  [[nodiscard]] Eigen::Index dimension() const noexcept;
  [[nodiscard]] Eigen::VectorXd flatten() const;

  const Eigen::VectorXd& operator[](BlockIndex j) const { return blocks.at(j); }
  Eigen::VectorXd& operator[](BlockIndex j) { return blocks.at(j); }

  bool operator==(const ParamState& other) const;
};

/// Accept a draw when its distance is strictly below epsilon.
struct Fixed {
  double epsilon = 0.0;
};

/// Simulate a table of n draws and keep the one with the smallest distance.
struct BestOfN {
  std::size_t n = 1;
};

using ToleranceRule = std::variant<Fixed, BestOfN>;

/// Throws InvalidParameter when epsilon < 0 (or NaN) or n == 0.
void validate(const ToleranceRule& rule);

/// Simulation budget ledger. Both counters only grow.
struct BudgetCounter {
  std::uint64_t simulations = 0;
  std::uint64_t elementary_draws = 0;

  void book(std::uint64_t draws) noexcept {
    ++simulations;
    elementary_draws += draws;
  }
  BudgetCounter& operator+=(const BudgetCounter& other) noexcept {
    simulations += other.simulations;
    elementary_draws += other.elementary_draws;
    return *this;
  }
  bool operator==(const BudgetCounter&) const = default;
};

/// One hyper-parameter block and the unit blocks it governs. Unit `u` of a
/// level owns row `u` of the dataset.
struct HierarchyLevel {
  BlockIndex hyper = 0;
  std::vector<BlockIndex> units;
};

/// Optional hierarchical declaration (x_u | unit params, unit params | hyper, hyper).
///
/// With it, a unit block's ABC step simulates only that unit's row, and a
/// hyper block's ABC step simulates unit parameters instead of data.
struct Hierarchy {
  std::vector<HierarchyLevel> levels;

  /// Data row of unit `u` given the unit parameters held in the state.
  std::function<Eigen::RowVectorXd(std::size_t unit, const ParamState&, RngStream&)> simulate_unit;
  /// Elementary draws used by one simulate_unit call.
  std::function<std::uint64_t(std::size_t unit, const ParamState&)> unit_cost;
  /// s_j(x_u, theta) for unit block j evaluated on a single data row.
  std::function<Eigen::VectorXd(BlockIndex, const Eigen::RowVectorXd&, const ParamState&)> unit_summary;
  /// s_hyper of the level's unit values held in the state.
  std::function<Eigen::VectorXd(std::size_t level, const ParamState&)> hyper_summary;
  /// Elementary draws used to refresh all unit values of a level once.
  std::function<std::uint64_t(std::size_t level)> hyper_cost;

  /// Level and unit position of block j if it is a unit block.
  [[nodiscard]] std::optional<std::pair<std::size_t, std::size_t>> unit_of(BlockIndex j) const;
  /// Level whose hyper block is j.
  [[nodiscard]] std::optional<std::size_t> level_of_hyper(BlockIndex j) const;
};

/// The pluggable description every sampler runs against.
///
/// Required: block layout, `prior`, `conditional_prior`, `simulator`,
/// `sim_cost`, `block_summary`, `block_distance`, `summary`, `distance`.
/// `exact_conditional`, `log_prior` and `hierarchy` are optional.
struct ModelSpec {
  std::string name;
  std::vector<std::string> block_names;
  std::vector<Eigen::Index> block_dims;

  /// Joint prior draw.
  std::function<ParamState(RngStream&)> prior;
  /// Draw block j from pi(theta_j | theta_-j) (pi(mu_j | alpha) or pi(alpha) in hierarchies).
  std::function<Eigen::VectorXd(BlockIndex, const ParamState&, RngStream&)> conditional_prior;
  /// x ~ f(. | theta).
  std::function<Dataset(const ParamState&, RngStream&)> simulator;
  /// Elementary variates consumed by one `simulator` call.
  std::function<std::uint64_t(const ParamState&)> sim_cost;
  /// s_j(x, theta_-j).
  std::function<Eigen::VectorXd(BlockIndex, const Dataset&, const ParamState&)> block_summary;
  /// d_j; must be a pseudo-metric.
  std::function<double(BlockIndex, const Eigen::VectorXd&, const Eigen::VectorXd&)> block_distance;
  /// Whole-data statistic and distance used by vanilla ABC and SMC-ABC.
  std::function<Eigen::VectorXd(const Dataset&)> summary;
  std::function<double(const Eigen::VectorXd&, const Eigen::VectorXd&)> distance;

  /// Exact draw from pi(theta_j | theta_-j, x); nullopt when unavailable for j.
  std::function<std::optional<Eigen::VectorXd>(BlockIndex, const ParamState&, const Dataset&, RngStream&)>
      exact_conditional;
  /// Joint log prior density, -inf outside the support (needed by the SMC MH move).
  std::function<double(const ParamState&)> log_prior;

  std::optional<Hierarchy> hierarchy;

  [[nodiscard]] std::size_t block_count() const noexcept { return block_names.size(); }
  [[nodiscard]] Eigen::Index dimension() const;
  /// Offset of block j in a flattened state.
  [[nodiscard]] Eigen::Index offset(BlockIndex j) const;
  [[nodiscard]] ParamState unflatten(const Eigen::Ref<const Eigen::VectorXd>& flat) const;

  /// Throws InvalidParameter when a required member is missing or the layout is inconsistent.
  void validate() const;
};

/// Simulate and book exactly sim_cost(state) elementary draws.
Dataset simulate(const ModelSpec& model, const ParamState& state, RngStream& rng, BudgetCounter& budget);

/// Normal-Normal vanilla cost N_V * n * (1 + K).
std::uint64_t budget_vanilla(std::uint64_t n_vanilla, std::uint64_t n_units, std::uint64_t obs_per_unit);

/// Normal-Normal ABC-Gibbs cost N * n * N_alpha * (1 + K) with N_alpha = N_mu.
std::uint64_t budget_gibbs(std::uint64_t iterations, std::uint64_t n_units, std::uint64_t n_alpha,
                           std::uint64_t obs_per_unit);

}  // namespace abcg

#endif  // ABCG_MODEL_HPP
