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

#include <CLI11.hpp>

#include <exception>
#include <iostream>
#include <optional>
#include <thread>

#include "abcg/harness/config.hpp"
#include "abcg/harness/experiment.hpp"

namespace {

struct Common {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::string out_dir;
  std::optional<std::size_t> replicates;
  std::size_t jobs = 0;
};

void add_common(CLI::App* sub, Common& c) {
  sub->add_option("config", c.config, "Experiment config (JSON)")->required()->check(CLI::ExistingFile);
  sub->add_option("--seed", c.seed, "Override the config seed");
  sub->add_option("--out-dir", c.out_dir, "Output directory (default: out/<name>)");
  sub->add_option("--replicates", c.replicates, "Override the replicate count")->check(CLI::PositiveNumber);
  sub->add_option("-j,--jobs", c.jobs, "Worker threads for replicates (0: hardware concurrency)");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"ABC-Gibbs experiment runner"};
  app.require_subcommand(1);
  Common run_opts, probe_opts, oracle_opts;
  CLI::App* run = app.add_subcommand("run", "Run every configured sampler");
  CLI::App* probe = app.add_subcommand("probe", "Contraction probe of one ABC conditional");
  CLI::App* oracle = app.add_subcommand("oracle", "Exact posterior grids (normal_normal)");
  add_common(run, run_opts);
  add_common(probe, probe_opts);
  add_common(oracle, oracle_opts);
  CLI11_PARSE(app, argc, argv);

  try {
    const Common& c = run->parsed() ? run_opts : probe->parsed() ? probe_opts : oracle_opts;
    abcg::harness::ExperimentConfig config = abcg::harness::load_config(c.config);
    if (c.seed) config.seed = *c.seed;
    if (c.replicates) config.replicates = *c.replicates;
    const std::filesystem::path out = c.out_dir.empty() ? std::filesystem::path("out") / config.name : std::filesystem::path(c.out_dir);
    const abcg::RngStream rng(config.seed);

    if (run->parsed()) {
      const std::size_t jobs = c.jobs ? c.jobs : std::max(1u, std::thread::hardware_concurrency());
      const auto summary = abcg::harness::run_experiment(config, rng, out, jobs);
      for (const auto& [label, reps] : summary.samplers) {
        std::cout << label << ":";
        const auto& sj = summary.summary["samplers"][label]["replicates"];
        for (std::size_t r = 0; r < reps.size(); ++r) {
          std::cout << " [rep " << r << " draws=" << reps[r].budget.elementary_draws;
          if (sj[r].contains("ppd")) std::cout << " ppd=" << reps[r].ppd->mean;
          for (const auto& [col, w] : reps[r].w1_oracle) std::cout << " W1(" << col << ")=" << w;
          std::cout << "]";
        }
        std::cout << "\n";
      }
    } else if (probe->parsed()) {
      std::cout << abcg::harness::run_probe(config, rng, out).dump(2) << "\n";
    } else {
      std::cout << abcg::harness::run_oracle(config, rng, out).dump(2) << "\n";
    }
    std::cout << "outputs: " << out.string() << "\n";
  } catch (const std::exception& e) {
    std::cerr << "abcg: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
