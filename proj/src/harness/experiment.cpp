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

#include "abcg/harness/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <exception>
#include <thread>

#include "abcg/errors.hpp"
#include "abcg/harness/output.hpp"
#include "abcg/harness/stellar.hpp"
#include "abcg/models/gk.hpp"
#include "abcg/models/heat.hpp"
#include "abcg/models/ma2.hpp"
#include "abcg/models/mixture.hpp"

namespace abcg::harness {
namespace {

using nlohmann::json;

template <class T>
T param(const json& p, const char* key, T fallback) {
  if (!p.contains(key)) return fallback;
  try {
    return p.at(key).get<T>();
  } catch (const json::exception& e) {
    throw InvalidParameter(std::string("model parameter '") + key + "': " + e.what());
  }
}

models::NormalNormalSpec nn_spec(const json& p) {
  models::NormalNormalSpec s;
  s.n = param(p, "n", s.n);
  s.K = param(p, "K", s.K);
  s.sigma = param(p, "sigma", s.sigma);
  s.varsigma = param(p, "varsigma", s.varsigma);
  s.alpha_lo = param(p, "alpha_lo", s.alpha_lo);
  s.alpha_hi = param(p, "alpha_hi", s.alpha_hi);
  return s;
}

models::GKSpec gk_spec(const json& p) {
  models::GKSpec s;
  s.n = param(p, "n", s.n);
  s.obs_per_unit = param(p, "obs_per_unit", s.obs_per_unit);
  s.c = param(p, "c", s.c);
  s.alpha_lo = param(p, "alpha_lo", s.alpha_lo);
  s.alpha_hi = param(p, "alpha_hi", s.alpha_hi);
  if (param(p, "doubly", false)) {
    s.known.reset();
  } else if (p.contains("known")) {
    const json& k = p.at("known");
    s.known = models::GkParams{param(k, "B", 1.0), param(k, "g", 2.0), param(k, "k", 0.5)};
  }
  return s;
}

models::HeatEqSpec heat_spec(const json& p) {
  models::HeatEqSpec s;
  s.n = param(p, "n", s.n);
  s.delta = param(p, "delta", s.delta);
  s.steps = param(p, "steps", s.steps);
  s.noise_sd = param(p, "noise_sd", s.noise_sd);
  if (p.contains("y0")) {
    const auto y0 = p.at("y0").get<std::vector<double>>();
    s.y0 = Eigen::Map<const Eigen::VectorXd>(y0.data(), static_cast<Eigen::Index>(y0.size()));
  }
  return s;
}

models::MixtureUniformSpec mixture_spec(const json& p) {
  models::MixtureUniformSpec s;
  s.lo = param(p, "lo", s.lo);
  s.hi = param(p, "hi", s.hi);
  s.gap = param(p, "gap", s.gap);
  return s;
}

ParamState state_from(const ModelSpec& model, const std::vector<double>& flat, const char* what) {
  if (static_cast<Eigen::Index>(flat.size()) != model.dimension()) {
    throw InvalidParameter(std::string(what) + ": expected " + std::to_string(model.dimension()) + " values");
  }
  return model.unflatten(Eigen::Map<const Eigen::VectorXd>(flat.data(), static_cast<Eigen::Index>(flat.size())));
}

BlockIndex block_index(const ModelSpec& model, const std::string& name) {
  for (BlockIndex j = 0; j < model.block_count(); ++j) {
    if (model.block_names[j] == name) return j;
  }
  throw InvalidParameter("model '" + model.name + "' has no block '" + name + "'");
}

bool is_gibbs(const std::string& kind) { return kind == "abc_gibbs" || kind == "hierarchical" || kind == "retention"; }

GibbsOptions gibbs_options(const ModelSpec& model, const SamplerConfig& s) {
  GibbsOptions o;
  o.max_attempts = s.max_attempts;
  const auto& h = model.hierarchy;
  for (BlockIndex j = 0; j < model.block_count(); ++j) {
    const std::string& name = model.block_names[j];
    std::vector<std::string> keys{name};
    if (h && h->level_of_hyper(j)) keys.emplace_back("hyper");
    if (h && h->unit_of(j)) keys.emplace_back("units");
    keys.emplace_back("default");
    bool found = false;
    for (const auto& k : keys) {
      if (auto it = s.rules.find(k); it != s.rules.end()) {
        o.rules.push_back(it->second);
        found = true;
        break;
      }
    }
    if (!found) throw InvalidParameter("sampler '" + s.label + "': no rule for block '" + name + "'");
  }
  if (!s.exact.empty()) {
    o.exact.assign(model.block_count(), false);
    for (const auto& e : s.exact) {
      if (e == "all") {
        o.exact.assign(model.block_count(), true);
      } else if (e == "units") {
        if (!h) throw InvalidParameter("exact 'units' needs a hierarchical model");
        for (const auto& level : h->levels) {
          for (BlockIndex u : level.units) o.exact[u] = true;
        }
      } else {
        o.exact[block_index(model, e)] = true;
      }
    }
  }
  return o;
}

/// Reported columns: configured blocks or the first four, every component.
std::vector<Eigen::Index> reported_columns(const ModelSpec& model, const std::vector<std::string>& blocks) {
  std::vector<BlockIndex> idx;
  if (blocks.empty()) {
    for (BlockIndex j = 0; j < std::min<std::size_t>(4, model.block_count()); ++j) idx.push_back(j);
  } else {
    for (const auto& b : blocks) idx.push_back(block_index(model, b));
  }
  std::vector<Eigen::Index> cols;
  for (BlockIndex j : idx) {
    for (Eigen::Index c = 0; c < model.block_dims[j]; ++c) cols.push_back(model.offset(j) + c);
  }
  return cols;
}

std::optional<DensityGrid> oracle_grid(const models::NnPosterior& post, Eigen::Index col) {
  if (col == 0) return post.alpha;
  if (col >= 1 && col <= static_cast<Eigen::Index>(post.mu.size())) return post.mu[static_cast<std::size_t>(col - 1)];
  return std::nullopt;
}

std::string dataset_csv(const Dataset& x) {
  std::string text;
  for (Eigen::Index r = 0; r < x.rows(); ++r) {
    for (Eigen::Index c = 0; c < x.cols(); ++c) {
      if (c) text += ',';
      text += format_double(x(r, c));
    }
    text += '\n';
  }
  return text;
}

json budget_json(const BudgetCounter& b) {
  return {{"simulations", b.simulations}, {"elementary_draws", b.elementary_draws}};
}

}  // namespace

std::vector<std::string> column_names(const ModelSpec& model) {
  std::vector<std::string> out;
  for (BlockIndex j = 0; j < model.block_count(); ++j) {
    for (Eigen::Index c = 0; c < model.block_dims[j]; ++c) {
      out.push_back(model.block_dims[j] == 1 ? model.block_names[j] : model.block_names[j] + "_" + std::to_string(c));
    }
  }
  return out;
}

std::pair<BuiltModel, ExperimentData> prepare_experiment(const ExperimentConfig& config, const RngStream& rng) {
  const json& p = config.model_params;
  BuiltModel built;
  ExperimentData data;
  std::optional<models::MA2HierSpec> ma2;

  if (config.data.source == "file" && config.model != "ma2") {
    throw InvalidParameter("file data is only supported for the ma2 model");
  }
  if (config.model == "normal_normal") {
    built.normal_normal = nn_spec(p);
    built.model = models::make_normal_normal(*built.normal_normal);
  } else if (config.model == "gk") {
    built.model = models::make_gk(gk_spec(p));
  } else if (config.model == "heat") {
    built.model = models::make_heat(heat_spec(p));
  } else if (config.model == "mixture") {
    built.model = models::make_mixture(mixture_spec(p));
  } else if (config.model == "ma2") {
    ma2 = models::MA2HierSpec{param(p, "n", std::size_t{5}), param(p, "T", std::size_t{100})};
    if (config.data.source == "file") {
      StellarFlux flux = load_stellar_flux(config.data.path, ma2->n);
      data.observed = std::move(flux.data);
      data.warnings = std::move(flux.warnings);
      ma2->T = static_cast<std::size_t>(data.observed.cols());
    }
    if (config.data.source == "inline") ma2->T = config.data.observed.front().size();
    built.model = models::make_ma2(*ma2);
  } else {
    throw InvalidParameter("unknown model '" + config.model + "'");
  }

  if (config.data.source == "inline") {
    const auto& rows = config.data.observed;
    data.observed.resize(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(rows.front().size()));
    for (std::size_t r = 0; r < rows.size(); ++r) {
      for (std::size_t c = 0; c < rows[r].size(); ++c) {
        data.observed(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = rows[r][c];
      }
    }
    if (config.data.truth) data.truth = state_from(built.model, *config.data.truth, "data.truth");
  }
  if (config.data.source == "synthetic") {
    RngStream r = rng.split(0);
    data.truth = config.data.truth ? state_from(built.model, *config.data.truth, "data.truth") : built.model.prior(r);
    data.observed = built.model.simulator(*data.truth, r);
  }
  if (ma2) {
    RngStream r = rng.split(1);
    built.model = models::make_ma2(*ma2, models::ma2_pilot_normalizers(*ma2, data.observed, config.pilot_size, r));
  }
  return {std::move(built), std::move(data)};
}

RunSummary run_experiment(const ExperimentConfig& config, const RngStream& rng, const std::filesystem::path& out_dir,
                          std::size_t workers) {
  auto [built, data] = prepare_experiment(config, rng);
  const ModelSpec& model = built.model;
  const bool write = !out_dir.empty();

  RunSummary run;
  run.column_names = column_names(model);
  const std::vector<Eigen::Index> report = reported_columns(model, config.diagnostics.blocks);

  std::optional<models::NnPosterior> oracle;
  if (config.diagnostics.oracle && built.normal_normal) {
    oracle = models::nn_exact_posterior_oracle(*built.normal_normal, data.observed, config.diagnostics.oracle_resolution);
  }

  json& summary = run.summary;
  summary["name"] = config.name;
  summary["model"] = config.model;
  summary["seed"] = config.seed;
  summary["replicates"] = config.replicates;
  summary["burn_in"] = config.burn_in;
  summary["observed"] = {{"rows", data.observed.rows()}, {"cols", data.observed.cols()}};
  if (data.truth) {
    const Eigen::VectorXd t = data.truth->flatten();
    summary["truth"] = std::vector<double>(t.begin(), t.end());
  }
  summary["warnings"] = data.warnings;
  if (write) write_text(out_dir / "observed.csv", dataset_csv(data.observed));

  RngStream cost_rng = rng.split(2);
  const std::uint64_t vanilla_cost = model.sim_cost(data.truth ? *data.truth : model.prior(cost_rng));

  const auto run_replicate = [&](std::size_t rep) {
    const RngStream rep_rng = rng.split(100 + rep);
    std::vector<SamplerReplicate> results;
    results.reserve(config.samplers.size());
    std::map<std::string, const SamplerReplicate*> done;
    std::map<std::string, std::size_t> iterations;

    for (std::size_t si = 0; si < config.samplers.size(); ++si) {
      const SamplerConfig& sc = config.samplers[si];
      RngStream chain_rng = rep_rng.split(si);
      SamplerReplicate out;
      const auto t0 = std::chrono::steady_clock::now();

      std::size_t burn = 0;
      if (sc.kind == "vanilla") {
        ChainOutput chain;
        if (sc.rule) {
          chain = vanilla_abc(model, data.observed, sc.N, *sc.rule, chain_rng, sc.max_attempts);
        } else {
          std::size_t table = sc.table_size.value_or(0);
          if (sc.matched) {
            std::string target = sc.match_to;
            if (target.empty()) {
              for (std::size_t k = 0; k < si; ++k) {
                if (is_gibbs(config.samplers[k].kind)) {
                  target = config.samplers[k].label;
                  break;
                }
              }
            }
            const auto it = done.find(target);
            if (target.empty() || it == done.end()) {
              throw InvalidParameter("matched vanilla '" + sc.label + "' must follow the Gibbs sampler it matches");
            }
            const std::uint64_t gibbs = it->second->budget.elementary_draws;
            table = static_cast<std::size_t>(std::llround(static_cast<double>(gibbs) / static_cast<double>(vanilla_cost)));
            const double per_iteration = static_cast<double>(gibbs) / static_cast<double>(iterations.at(target));
            if (std::abs(static_cast<double>(table * vanilla_cost) - static_cast<double>(gibbs)) > per_iteration) {
              throw InvalidParameter("budget mismatch for matched vanilla '" + sc.label + "'");
            }
          }
          if (table == 0) throw InvalidParameter("vanilla '" + sc.label + "': empty reference table");
          chain = vanilla_abc_table(model, data.observed, table, std::min(sc.N, table), chain_rng);
          out.table_size = table;
        }
        out.budget = chain.budget;
        out.samples = chain.samples;
      } else if (sc.kind == "abc_gibbs" || sc.kind == "hierarchical") {
        RngStream init_rng = rep_rng.split(500 + si);
        const ParamState init = sc.init ? state_from(model, *sc.init, "init") : model.prior(init_rng);
        const GibbsOptions opts = gibbs_options(model, sc);
        const ChainOutput chain = sc.kind == "abc_gibbs"
                                      ? abc_gibbs(model, data.observed, sc.N, opts, init, chain_rng)
                                      : hierarchical_abc_gibbs(model, data.observed, sc.N, opts, init, chain_rng);
        burn = config.burn_in;
        out.budget = chain.budget;
        out.samples = chain.drop_first(static_cast<Eigen::Index>(burn)).samples;
      } else if (sc.kind == "retention") {
        const ChainOutput chain = hierarchical_abc_gibbs_retention(model, data.observed, sc.N, sc.eps_alpha, chain_rng);
        burn = config.burn_in;
        out.budget = chain.budget;
        out.samples = chain.drop_first(static_cast<Eigen::Index>(burn)).samples;
        const auto acc = std::count(chain.accepted.begin(), chain.accepted.end(), true);
        out.acceptance_rate = static_cast<double>(acc) / static_cast<double>(chain.accepted.size());
      } else {
        const SmcOutput smc = smc_abc(model, data.observed, sc.smc, chain_rng);
        out.budget = smc.budget;
        out.samples.resize(static_cast<Eigen::Index>(smc.final.particles.size()), model.dimension());
        for (std::size_t i = 0; i < smc.final.particles.size(); ++i) {
          out.samples.row(static_cast<Eigen::Index>(i)) = smc.final.particles[i].flatten().transpose();
        }
        out.weights = smc.final.weights;
        out.final_epsilon = smc.final.epsilon;
      }
      out.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
      iterations[sc.label] = sc.N;

      // Equal-weight rows for predictive checks and densities.
      Eigen::MatrixXd rows = out.samples;
      if (out.weights.size() > 0) {
        RngStream rs = rep_rng.split(2000 + si);
        const auto idx = multinomial_resample(out.weights, static_cast<std::size_t>(out.weights.size()), rs);
        for (std::size_t i = 0; i < idx.size(); ++i) {
          rows.row(static_cast<Eigen::Index>(i)) = out.samples.row(static_cast<Eigen::Index>(idx[i]));
        }
      }

      const std::span<const double> w(out.weights.data(), static_cast<std::size_t>(out.weights.size()));
      for (Eigen::Index col : report) {
        const Eigen::VectorXd values = out.samples.col(col);
        const std::span<const double> v(values.data(), static_cast<std::size_t>(values.size()));
        const std::string& name = run.column_names[static_cast<std::size_t>(col)];
        const Eigen::VectorXd wn = out.weights.size() > 0 ? Eigen::VectorXd(out.weights / out.weights.sum())
                                                          : Eigen::VectorXd::Constant(values.size(), 1.0 / values.size());
        const double m = wn.dot(values);
        out.moments[name] = {m, std::sqrt(std::max(0.0, wn.dot((values.array() - m).square().matrix())))};
        if (oracle) {
          if (auto g = oracle_grid(*oracle, col)) {
            out.w1_oracle[name] = wasserstein1_weighted(v, w, *g);
          }
        }
        if (write && config.outputs.density_csv) {
          const Eigen::VectorXd rv = rows.col(col);
          emit_density(std::span<const double>(rv.data(), static_cast<std::size_t>(rv.size())),
                       config.outputs.density_resolution,
                       out_dir / "densities" /
                           (sc.label + "_rep" + std::to_string(rep) + "_" +
                            run.column_names[static_cast<std::size_t>(col)] + ".csv"));
        }
      }
      if (config.diagnostics.ppd_reps > 0) {
        RngStream pr = rep_rng.split(1000 + si);
        out.ppd = posterior_predictive_distance(model, data.observed, rows, config.diagnostics.ppd_reps, pr);
      }
      if (write && config.outputs.samples_csv) {
        write_samples_csv(out_dir / "samples" / (sc.label + "_rep" + std::to_string(rep) + ".csv"), out.samples,
                          model.block_names, model.block_dims, burn);
        if (out.weights.size() > 0) {
          std::string text = "particle,weight\n";
          for (Eigen::Index i = 0; i < out.weights.size(); ++i) {
            text += std::to_string(i) + "," + format_double(out.weights[i]) + "\n";
          }
          write_text(out_dir / "samples" / (sc.label + "_rep" + std::to_string(rep) + "_weights.csv"), text);
        }
      }

      results.push_back(std::move(out));
      done[sc.label] = &results.back();
    }
    return results;
  };

  std::vector<std::vector<SamplerReplicate>> reps(config.replicates);
  std::vector<std::exception_ptr> errors(config.replicates);
  if (write) {
    std::filesystem::create_directories(out_dir / "samples");
    std::filesystem::create_directories(out_dir / "densities");
  }
  std::atomic<std::size_t> next{0};
  const auto worker = [&] {
    for (std::size_t rep; (rep = next.fetch_add(1)) < config.replicates;) {
      try {
        reps[rep] = run_replicate(rep);
      } catch (...) {
        errors[rep] = std::current_exception();
      }
    }
  };
  std::vector<std::thread> pool;
  for (std::size_t t = 1; t < std::min(std::max<std::size_t>(workers, 1), config.replicates); ++t) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();
  for (const auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }

  for (std::size_t rep = 0; rep < config.replicates; ++rep) {
    for (std::size_t si = 0; si < config.samplers.size(); ++si) {
      const SamplerConfig& sc = config.samplers[si];
      SamplerReplicate& out = reps[rep][si];
      json rj;
      rj["budget"] = budget_json(out.budget);
      rj["rows"] = out.samples.rows();
      if (out.table_size) rj["table_size"] = *out.table_size;
      for (const auto& [name, ms] : out.moments) rj["posterior"][name] = {{"mean", ms.first}, {"sd", ms.second}};
      if (!out.w1_oracle.empty()) rj["w1_oracle"] = out.w1_oracle;
      if (out.ppd) rj["ppd"] = {{"mean", out.ppd->mean}, {"se", out.ppd->se}, {"count", out.ppd->count}};
      if (out.final_epsilon) rj["final_epsilon"] = *out.final_epsilon;
      if (out.acceptance_rate) rj["acceptance_rate"] = *out.acceptance_rate;
      json& sj = summary["samplers"][sc.label];
      sj["kind"] = sc.kind;
      sj["replicates"].push_back(rj);
      run.timing[sc.label].push_back(out.seconds);
      run.samplers[sc.label].push_back(std::move(out));
    }
  }

  if (write && config.outputs.summary_json) {
    write_text(out_dir / "summary.json", summary.dump(2) + "\n");
    write_text(out_dir / "timing.json", run.timing.dump(2) + "\n");
  }
  return run;
}

json run_probe(const ExperimentConfig& config, const RngStream& rng, const std::filesystem::path& out_dir) {
  if (!config.probe) throw InvalidParameter("config has no 'probe' section");
  const ProbeConfig& pc = *config.probe;
  auto [built, data] = prepare_experiment(config, rng);
  const ModelSpec& model = built.model;

  ProbeOptions opts;
  opts.block = block_index(model, pc.block);
  opts.conditioning = block_index(model, pc.conditioning);
  opts.grid = scalar_grid(pc.lo, pc.hi, pc.points);
  opts.rule = pc.rule;
  opts.draws_per_cell = pc.draws_per_cell;
  opts.bins = pc.bins;
  RngStream base_rng = rng.split(3);
  const ParamState base = data.truth ? *data.truth : model.prior(base_rng);
  RngStream probe_rng = rng.split(4);
  const ProbeResult res = contraction_probe(model, data.observed, base, opts, probe_rng);

  json j;
  j["name"] = config.name;
  j["block"] = pc.block;
  j["conditioning"] = pc.conditioning;
  j["grid"] = {pc.lo, pc.hi, pc.points};
  j["kappa"] = res.kappa;
  j["margin"] = res.margin;
  j["pass"] = res.pass;
  j["argmax"] = {opts.grid[res.arg_a][0], opts.grid[res.arg_b][0]};
  j["budget"] = budget_json(res.budget);
  if (!out_dir.empty()) write_text(out_dir / "probe.json", j.dump(2) + "\n");
  return j;
}

json run_oracle(const ExperimentConfig& config, const RngStream& rng, const std::filesystem::path& out_dir) {
  auto [built, data] = prepare_experiment(config, rng);
  if (!built.normal_normal) throw InvalidParameter("no exact posterior for model '" + config.model + "'");
  const models::NnPosterior post =
      models::nn_exact_posterior_oracle(*built.normal_normal, data.observed, config.diagnostics.oracle_resolution);
  json j;
  j["name"] = config.name;
  j["alpha_mean"] = post.alpha.mean();
  std::vector<double> mu_means;
  for (const auto& g : post.mu) mu_means.push_back(g.mean());
  j["mu_means"] = mu_means;
  if (!out_dir.empty()) {
    write_density_csv(out_dir / "oracle" / "alpha.csv", post.alpha);
    for (std::size_t i = 0; i < post.mu.size(); ++i) {
      write_density_csv(out_dir / "oracle" / ("mu" + std::to_string(i + 1) + ".csv"), post.mu[i]);
    }
    write_text(out_dir / "oracle.json", j.dump(2) + "\n");
  }
  return j;
}

}  // namespace abcg::harness
