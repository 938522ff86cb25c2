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

#ifndef ABCG_HARNESS_EXPERIMENT_HPP
#define ABCG_HARNESS_EXPERIMENT_HPP

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "abcg/diagnostics.hpp"
#include "abcg/harness/config.hpp"
#include "abcg/models/normal_normal.hpp"

namespace abcg::harness {

/// Model plus what the harness needs besides the ModelSpec.
struct BuiltModel {
  ModelSpec model;
  /// Set for normal_normal (exact posterior available).
  std::optional<models::NormalNormalSpec> normal_normal;
};

struct ExperimentData {
  Dataset observed;
  std::optional<ParamState> truth;
  std::vector<std::string> warnings;
};

/// Builds the model and its observed data. Stream layout: rng.split(0) data, rng.split(1) MA(2) pilot table.
std::pair<BuiltModel, ExperimentData> prepare_experiment(const ExperimentConfig& config, const RngStream& rng);

struct SamplerReplicate {
  BudgetCounter budget;
  /// Rows kept after burn-in (or particles for SMC).
  Eigen::MatrixXd samples;
  /// Particle weights (SMC only; empty otherwise).
  Eigen::VectorXd weights;
  std::optional<std::size_t> table_size;
  /// W1 to the exact posterior per reported column name.
  std::map<std::string, double> w1_oracle;
  /// Posterior (mean, sd) per reported column.
  std::map<std::string, std::pair<double, double>> moments;
  std::optional<PredictiveDistance> ppd;
  std::optional<double> final_epsilon;
  std::optional<double> acceptance_rate;
  double seconds = 0.0;
};

struct RunSummary {
  /// Deterministic record written as summary.json.
  nlohmann::json summary;
  /// Wall-clock seconds, written separately as timing.json.
  nlohmann::json timing;
  std::map<std::string, std::vector<SamplerReplicate>> samplers;
  std::vector<std::string> column_names;
};

/// Runs every sampler on every replicate. Replicate r uses rng.split(100 + r);
/// sampler s inside it uses split(s) for the chain, split(500 + s) for the
/// initial state, split(1000 + s) for posterior-predictive draws and
/// split(2000 + s) to resample weighted particles. Replicates run on up to
/// `workers` threads; results do not depend on the worker count.
/// Writes outputs under out_dir unless it is empty.
RunSummary run_experiment(const ExperimentConfig& config, const RngStream& rng,
                          const std::filesystem::path& out_dir = {}, std::size_t workers = 1);

/// Contraction probe described by config.probe, around the true (or a prior) state.
nlohmann::json run_probe(const ExperimentConfig& config, const RngStream& rng,
                         const std::filesystem::path& out_dir = {});

/// Exact posterior grids (normal_normal only) for every block.
nlohmann::json run_oracle(const ExperimentConfig& config, const RngStream& rng,
                          const std::filesystem::path& out_dir = {});

/// Column labels of a flattened state: block name, with _c suffix for multi-component blocks.
std::vector<std::string> column_names(const ModelSpec& model);

}  // namespace abcg::harness

#endif  // ABCG_HARNESS_EXPERIMENT_HPP
