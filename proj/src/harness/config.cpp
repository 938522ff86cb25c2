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

#include "abcg/harness/config.hpp"

#include <fstream>
#include <set>

#include "abcg/errors.hpp"

namespace abcg::harness {
namespace {

using nlohmann::json;

void check_keys(const json& j, const std::string& where, std::initializer_list<const char*> allowed) {
  if (!j.is_object()) throw InvalidParameter(where + ": expected an object");
  const std::set<std::string> ok(allowed.begin(), allowed.end());
  for (const auto& [key, _] : j.items()) {
    if (!ok.contains(key)) throw InvalidParameter(where + ": unknown key '" + key + "'");
  }
}

template <class T>
T get_or(const json& j, const char* key, T fallback) {
  if (!j.contains(key)) return fallback;
  try {
    return j.at(key).get<T>();
  } catch (const json::exception& e) {
    throw InvalidParameter(std::string("config key '") + key + "': " + e.what());
  }
}

SmcOptions parse_smc(const json& j, SmcOptions o) {
  o.particles = get_or(j, "particles", o.particles);
  o.pseudo_per_particle = get_or(j, "M", o.pseudo_per_particle);
  o.steps = get_or(j, "steps", o.steps);
  o.alpha_quality = get_or(j, "alpha_quality", o.alpha_quality);
  o.min_ess = get_or(j, "min_ess", o.min_ess);
  o.max_move_attempts = get_or(j, "max_move_attempts", o.max_move_attempts);
  const auto kernel = get_or<std::string>(j, "kernel", "repeat");
  if (kernel == "repeat") {
    o.kernel = MoveKernel::RepeatUntilHit;
  } else if (kernel == "mh") {
    o.kernel = MoveKernel::MetropolisHastings;
  } else {
    throw InvalidParameter("smc kernel must be 'repeat' or 'mh'");
  }
  o.keep_trajectory = false;
  return o;
}

SamplerConfig parse_sampler(const json& j) {
  check_keys(j, "sampler",
             {"label", "kind", "N", "rule", "table_size", "matched", "match_to", "rules", "exact", "init",
              "max_attempts", "eps_alpha", "particles", "M", "steps", "alpha_quality", "min_ess", "kernel",
              "max_move_attempts"});
  SamplerConfig s;
  s.kind = get_or<std::string>(j, "kind", "");
  static const std::set<std::string> kinds{"vanilla", "abc_gibbs", "hierarchical", "retention", "smc"};
  if (!kinds.contains(s.kind)) throw InvalidParameter("unknown sampler kind '" + s.kind + "'");
  s.label = get_or(j, "label", s.kind);
  s.N = get_or(j, "N", s.N);
  if (j.contains("rule")) s.rule = parse_rule(j.at("rule"));
  if (j.contains("table_size")) s.table_size = j.at("table_size").get<std::size_t>();
  s.matched = get_or(j, "matched", false);
  s.match_to = get_or<std::string>(j, "match_to", "");
  if (j.contains("rules")) {
    for (const auto& [key, value] : j.at("rules").items()) s.rules.emplace(key, parse_rule(value));
  }
  s.exact = get_or(j, "exact", std::vector<std::string>{});
  if (j.contains("init")) s.init = j.at("init").get<std::vector<double>>();
  s.max_attempts = get_or(j, "max_attempts", s.max_attempts);
  s.eps_alpha = get_or(j, "eps_alpha", s.eps_alpha);
  s.smc = parse_smc(j, s.smc);
  if (s.N == 0) throw InvalidParameter("sampler '" + s.label + "': N must be >= 1");
  if (s.kind == "vanilla" && !s.rule && !s.table_size && !s.matched) {
    throw InvalidParameter("vanilla sampler '" + s.label + "' needs rule, table_size or matched");
  }
  return s;
}

}  // namespace

ToleranceRule parse_rule(const json& j) {
  check_keys(j, "rule", {"epsilon", "best_of"});
  if (j.contains("epsilon") == j.contains("best_of")) {
    throw InvalidParameter("rule needs exactly one of 'epsilon' or 'best_of'");
  }
  ToleranceRule r = j.contains("epsilon") ? ToleranceRule{Fixed{j.at("epsilon").get<double>()}}
                                          : ToleranceRule{BestOfN{j.at("best_of").get<std::size_t>()}};
  validate(r);
  return r;
}

ExperimentConfig parse_config(const json& j) {
  check_keys(j, "config",
             {"name", "model", "data", "samplers", "replicates", "seed", "burn_in", "pilot_size", "outputs",
              "diagnostics", "probe"});
  ExperimentConfig c;
  c.name = get_or(j, "name", c.name);
  if (!j.contains("model")) throw InvalidParameter("config: missing 'model'");
  const json& model = j.at("model");
  if (!model.contains("id")) throw InvalidParameter("model: missing 'id'");
  c.model = model.at("id").get<std::string>();
  c.model_params = model;
  c.model_params.erase("id");

  if (j.contains("data")) {
    const json& d = j.at("data");
    check_keys(d, "data", {"source", "truth", "path", "observed"});
    c.data.source = get_or<std::string>(d, "source", "synthetic");
    if (d.contains("truth")) c.data.truth = d.at("truth").get<std::vector<double>>();
    c.data.path = get_or<std::string>(d, "path", "");
    if (d.contains("observed")) c.data.observed = d.at("observed").get<std::vector<std::vector<double>>>();
    if (c.data.source != "synthetic" && c.data.source != "file" && c.data.source != "inline") {
      throw InvalidParameter("data source must be 'synthetic', 'file' or 'inline'");
    }
    if (c.data.source == "inline") {
      if (c.data.observed.empty()) throw InvalidParameter("data: inline source needs 'observed'");
      for (const auto& row : c.data.observed) {
        if (row.size() != c.data.observed.front().size() || row.empty()) {
          throw InvalidParameter("data: inline rows must be non-empty and of equal length");
        }
      }
    }
    if (c.data.source == "file" && c.data.path.empty()) throw InvalidParameter("data: file source needs 'path'");
  }
  if (j.contains("samplers")) {
    for (const auto& s : j.at("samplers")) c.samplers.push_back(parse_sampler(s));
  }
  std::set<std::string> labels;
  for (const auto& s : c.samplers) {
    if (!labels.insert(s.label).second) throw InvalidParameter("duplicate sampler label '" + s.label + "'");
  }
  c.replicates = get_or(j, "replicates", c.replicates);
  c.seed = get_or(j, "seed", c.seed);
  c.burn_in = get_or(j, "burn_in", c.burn_in);
  c.pilot_size = get_or(j, "pilot_size", c.pilot_size);
  if (c.replicates == 0) throw InvalidParameter("replicates must be >= 1");

  if (j.contains("outputs")) {
    const json& o = j.at("outputs");
    check_keys(o, "outputs", {"samples_csv", "density_csv", "summary_json", "density_resolution"});
    c.outputs.samples_csv = get_or(o, "samples_csv", c.outputs.samples_csv);
    c.outputs.density_csv = get_or(o, "density_csv", c.outputs.density_csv);
    c.outputs.summary_json = get_or(o, "summary_json", c.outputs.summary_json);
    c.outputs.density_resolution = get_or(o, "density_resolution", c.outputs.density_resolution);
  }
  if (j.contains("diagnostics")) {
    const json& d = j.at("diagnostics");
    check_keys(d, "diagnostics", {"oracle", "oracle_resolution", "ppd_reps", "blocks"});
    c.diagnostics.oracle = get_or(d, "oracle", c.diagnostics.oracle);
    c.diagnostics.oracle_resolution = get_or(d, "oracle_resolution", c.diagnostics.oracle_resolution);
    c.diagnostics.ppd_reps = get_or(d, "ppd_reps", c.diagnostics.ppd_reps);
    c.diagnostics.blocks = get_or(d, "blocks", c.diagnostics.blocks);
  }
  if (j.contains("probe")) {
    const json& p = j.at("probe");
    check_keys(p, "probe", {"block", "conditioning", "lo", "hi", "points", "rule", "draws_per_cell", "bins"});
    ProbeConfig pc;
    pc.block = get_or<std::string>(p, "block", "");
    pc.conditioning = get_or<std::string>(p, "conditioning", "");
    pc.lo = get_or(p, "lo", pc.lo);
    pc.hi = get_or(p, "hi", pc.hi);
    pc.points = get_or(p, "points", pc.points);
    if (p.contains("rule")) pc.rule = parse_rule(p.at("rule"));
    pc.draws_per_cell = get_or(p, "draws_per_cell", pc.draws_per_cell);
    pc.bins = get_or(p, "bins", pc.bins);
    c.probe = pc;
  }
  return c;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw InvalidParameter("cannot open config '" + path.string() + "'");
  json j;
  try {
    j = json::parse(in, nullptr, true, true);
  } catch (const json::parse_error& e) {
    throw InvalidParameter("config '" + path.string() + "': " + e.what());
  }
  ExperimentConfig c = parse_config(j);
  if (c.data.source == "file" && c.data.path.is_relative()) c.data.path = path.parent_path() / c.data.path;
  return c;
}

}  // namespace abcg::harness
