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

#include "abcg/model.hpp"

#include <cmath>
#include <numeric>

#include "abcg/errors.hpp"

namespace abcg {

Eigen::Index ParamState::dimension() const noexcept {
  Eigen::Index d = 0;
  for (const auto& b : blocks) d += b.size();
  return d;
}

Eigen::VectorXd ParamState::flatten() const {
  Eigen::VectorXd out(dimension());
  Eigen::Index pos = 0;
  for (const auto& b : blocks) {
    out.segment(pos, b.size()) = b;
    pos += b.size();
  }
  return out;
}

bool ParamState::operator==(const ParamState& other) const {
  if (blocks.size() != other.blocks.size()) return false;
  for (std::size_t j = 0; j < blocks.size(); ++j) {
    if (blocks[j].size() != other.blocks[j].size() || blocks[j] != other.blocks[j]) return false;
  }
  return true;
}

void validate(const ToleranceRule& rule) {
  if (const auto* f = std::get_if<Fixed>(&rule)) {
    if (std::isnan(f->epsilon) || f->epsilon < 0.0) throw InvalidParameter("Fixed tolerance must be >= 0");
  } else if (std::get<BestOfN>(rule).n == 0) {
    throw InvalidParameter("BestOfN table size must be >= 1");
  }
}

std::optional<std::pair<std::size_t, std::size_t>> Hierarchy::unit_of(BlockIndex j) const {
  for (std::size_t l = 0; l < levels.size(); ++l) {
    const auto& units = levels[l].units;
    for (std::size_t u = 0; u < units.size(); ++u) {
      if (units[u] == j) return std::pair{l, u};
    }
  }
  return std::nullopt;
}

std::optional<std::size_t> Hierarchy::level_of_hyper(BlockIndex j) const {
  for (std::size_t l = 0; l < levels.size(); ++l) {
    if (levels[l].hyper == j) return l;
  }
  return std::nullopt;
}

Eigen::Index ModelSpec::dimension() const {
  return std::accumulate(block_dims.begin(), block_dims.end(), Eigen::Index{0});
}

Eigen::Index ModelSpec::offset(BlockIndex j) const {
  Eigen::Index pos = 0;
  for (BlockIndex k = 0; k < j; ++k) pos += block_dims.at(k);
  return pos;
}

ParamState ModelSpec::unflatten(const Eigen::Ref<const Eigen::VectorXd>& flat) const {
  if (flat.size() != dimension()) throw InvalidParameter("unflatten: dimension mismatch");
  ParamState s;
  s.blocks.reserve(block_count());
  Eigen::Index pos = 0;
  for (auto d : block_dims) {
    s.blocks.emplace_back(flat.segment(pos, d));
    pos += d;
  }
  return s;
}

void ModelSpec::validate() const {
  if (block_names.empty()) throw InvalidParameter("model '" + name + "' declares no blocks");
  if (block_dims.size() != block_names.size()) throw InvalidParameter("block_dims/block_names size mismatch");
  for (auto d : block_dims) {
    if (d < 1) throw InvalidParameter("block dimension must be >= 1");
  }
  if (!prior || !conditional_prior || !simulator || !sim_cost || !block_summary || !block_distance || !summary ||
      !distance) {
    throw InvalidParameter("model '" + name + "' is missing a required callback");
  }
  if (hierarchy) {
    const auto& h = *hierarchy;
    if (!h.simulate_unit || !h.unit_cost || !h.unit_summary || !h.hyper_summary || !h.hyper_cost) {
      throw InvalidParameter("hierarchy of '" + name + "' is missing a callback");
    }
    for (const auto& level : h.levels) {
      if (level.hyper >= block_count()) throw InvalidParameter("hierarchy hyper block out of range");
      for (auto u : level.units) {
        if (u >= block_count()) throw InvalidParameter("hierarchy unit block out of range");
      }
    }
  }
}

Dataset simulate(const ModelSpec& model, const ParamState& state, RngStream& rng, BudgetCounter& budget) {
  budget.book(model.sim_cost(state));
  return model.simulator(state, rng);
}

std::uint64_t budget_vanilla(std::uint64_t n_vanilla, std::uint64_t n_units, std::uint64_t obs_per_unit) {
  return n_vanilla * n_units * (1 + obs_per_unit);
}

std::uint64_t budget_gibbs(std::uint64_t iterations, std::uint64_t n_units, std::uint64_t n_alpha,
                           std::uint64_t obs_per_unit) {
  return iterations * n_units * n_alpha * (1 + obs_per_unit);
}

}  // namespace abcg
