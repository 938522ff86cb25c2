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

#ifndef ABCG_HARNESS_CONFIG_HPP
#define ABCG_HARNESS_CONFIG_HPP

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "abcg/model.hpp"
#include "abcg/samplers.hpp"

namespace abcg::harness {

struct SamplerConfig {
  /// Output key; defaults to `kind`.
  std::string label;
  /// vanilla | abc_gibbs | hierarchical | retention | smc
  std::string kind;
  /// Output rows (Gibbs iterations, vanilla draws kept).
  std::size_t N = 1000;

  // vanilla: per-draw `rule`, or a reference table (`table_size`, or matched to a Gibbs sampler).
  std::optional<ToleranceRule> rule;
  std::optional<std::size_t> table_size;
  bool matched = false;
  /// Label of the Gibbs-type sampler whose budget is matched; empty = first one.
  std::string match_to;

  // abc_gibbs / hierarchical: rule lookup keys are block names, "hyper", "units", "default".
  std::map<std::string, ToleranceRule> rules;
  /// Block names (or "units", "all") updated with exact conditionals.
  std::vector<std::string> exact;
  /// Flattened initial state; prior draw when absent.
  std::optional<std::vector<double>> init;
  std::uint64_t max_attempts = 1'000'000;

  // retention
  double eps_alpha = 0.1;

  // smc
  SmcOptions smc;
};

struct DataConfig {
  /// synthetic | file | inline
  std::string source = "synthetic";
  /// Flattened true parameter for synthetic data; prior draw when absent.
  std::optional<std::vector<double>> truth;
  std::filesystem::path path;
  /// Observed rows for the inline source.
  std::vector<std::vector<double>> observed;
};

struct OutputConfig {
  bool samples_csv = true;
  bool density_csv = true;
  bool summary_json = true;
  Eigen::Index density_resolution = 256;
};

struct DiagnosticsConfig {
  /// Compare with the exact posterior when the model has one.
  bool oracle = true;
  Eigen::Index oracle_resolution = 2001;
  /// Posterior-predictive replicates per retained row; 0 disables.
  std::size_t ppd_reps = 1;
  /// Blocks reported in densities and oracle distances; empty = first four.
  std::vector<std::string> blocks;
};

struct ProbeConfig {
  std::string block;
  std::string conditioning;
  double lo = -4.0;
  double hi = 4.0;
  std::size_t points = 9;
  ToleranceRule rule = BestOfN{30};
  std::size_t draws_per_cell = 2000;
  std::size_t bins = 0;
};

struct ExperimentConfig {
  std::string name = "experiment";
  /// normal_normal | gk | ma2 | heat | mixture
  std::string model;
  /// Model parameters as given in the file (validated by the model factory).
  nlohmann::json model_params = nlohmann::json::object();
  DataConfig data;
  std::vector<SamplerConfig> samplers;
  std::size_t replicates = 1;
  std::uint64_t seed = 0;
  std::size_t burn_in = 5;
  /// MA(2) pilot table size for the pooled-distance scales.
  std::size_t pilot_size = 100'000;
  OutputConfig outputs;
  DiagnosticsConfig diagnostics;
  std::optional<ProbeConfig> probe;
};

/// Tolerance rule from {"epsilon": e} or {"best_of": n}.
ToleranceRule parse_rule(const nlohmann::json& j);

/// Throws InvalidParameter with the offending key on schema errors.
ExperimentConfig parse_config(const nlohmann::json& j);
ExperimentConfig load_config(const std::filesystem::path& path);

}  // namespace abcg::harness

#endif  // ABCG_HARNESS_CONFIG_HPP
