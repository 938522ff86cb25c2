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

#include "abcg/models/gk.hpp"

#include <algorithm>
#include <numbers>
#include <string>
#include <vector>

#include "abcg/errors.hpp"
#include "abcg/quantile.hpp"

namespace abcg::models {
namespace {

constexpr std::array<double, 9> kOctileLevels{0.0, 0.125, 0.25, 0.375, 0.5, 0.625, 0.75, 0.875, 1.0};

Eigen::VectorXd octile_vector(std::span<const double> sample) {
  const auto q = gk_octiles(sample);
  return Eigen::Map<const Eigen::VectorXd>(q.data(), 9);
}

Eigen::VectorXd row_octiles(const Eigen::RowVectorXd& row) {
  return octile_vector(std::span<const double>(row.data(), static_cast<std::size_t>(row.size())));
}

Eigen::VectorXd all_octiles(const Dataset& x) {
  Eigen::VectorXd s(9 * x.rows());
  for (Eigen::Index u = 0; u < x.rows(); ++u) s.segment(9 * u, 9) = row_octiles(x.row(u));
  return s;
}

double l1(const Eigen::VectorXd& a, const Eigen::VectorXd& b) { return (a - b).lpNorm<1>(); }

Eigen::VectorXd scalar(double v) { return Eigen::VectorXd::Constant(1, v); }

}  // namespace

double gk_inverse_cdf(double x, double mu, double B, double g, double k, double c) {
  if (!(x > 0.0 && x < 1.0)) throw DomainError("gk_inverse_cdf: x must lie in (0, 1)");
  return gk_quantile_at_z(std_normal_quantile(x), mu, B, g, k, c);
}

Eigen::RowVectorXd gk_sample(double mu, const GkParams& p, double c, Eigen::Index m, RngStream& rng) {
  Eigen::RowVectorXd out(m);
  for (Eigen::Index i = 0; i < m; ++i) out[i] = gk_inverse_cdf(rng.uniform_open(), mu, p.B, p.g, p.k, c);
  return out;
}

std::array<double, 9> gk_octiles(std::span<const double> sample) {
  if (sample.empty()) throw EmptySample("gk_octiles: empty sample");
  std::vector<double> sorted(sample.begin(), sample.end());
  std::sort(sorted.begin(), sorted.end());
  std::array<double, 9> q{};
  for (std::size_t i = 0; i < 9; ++i) q[i] = sorted_quantile(sorted, kOctileLevels[i]);
  return q;
}

double gk_octile_distance(std::span<const double> x1, std::span<const double> x2) {
  const auto q1 = gk_octiles(x1);
  const auto q2 = gk_octiles(x2);
  double d = 0.0;
  for (std::size_t i = 0; i < 9; ++i) d += std::abs(q1[i] - q2[i]);
  return d;
}

void validate(const GKSpec& spec) {
  if (spec.n < 1 || spec.obs_per_unit < 1) throw InvalidParameter("GKSpec: n and obs_per_unit must be >= 1");
  if (!(spec.c > 0.0 && spec.c < 1.0)) throw InvalidParameter("GKSpec: c must lie in (0, 1)");
  if (spec.known && !(spec.known->B > 0.0)) throw InvalidParameter("GKSpec: B must be > 0");
  if (!(spec.alpha_lo < spec.alpha_hi)) throw InvalidParameter("GKSpec: empty alpha range");
  if (!(spec.unit_sd > 0.0)) throw InvalidParameter("GKSpec: unit_sd must be > 0");
}

ModelSpec make_gk(const GKSpec& spec) {
  validate(spec);
  const std::size_t n = spec.n;
  const bool free_bgk = !spec.known;
  const BlockIndex first_unit = free_bgk ? 4 : 1;
  const auto m_obs = static_cast<Eigen::Index>(spec.obs_per_unit);

  ModelSpec m;
  m.name = free_bgk ? "gk_doubly_hierarchical" : "gk_simple";
  m.block_names.push_back("alpha");
  if (free_bgk) {
    for (const char* s : {"B", "g", "k"}) m.block_names.emplace_back(s);
  }
  for (std::size_t j = 1; j <= n; ++j) m.block_names.push_back("mu" + std::to_string(j));
  m.block_dims.assign(m.block_names.size(), 1);

  auto params_of = [spec, free_bgk](const ParamState& s) {
    if (!free_bgk) return *spec.known;
    return GkParams{s[1][0], s[2][0], s[3][0]};
  };
  auto mu_values = [first_unit](const ParamState& s) {
    std::vector<double> mu;
    mu.reserve(s.block_count() - first_unit);
    for (BlockIndex j = first_unit; j < s.block_count(); ++j) mu.push_back(s[j][0]);
    return mu;
  };

  m.conditional_prior = [spec, first_unit](BlockIndex j, const ParamState& s, RngStream& rng) {
    if (j == 0) return scalar(rng.uniform(spec.alpha_lo, spec.alpha_hi));
    if (j < first_unit) return scalar(rng.uniform());
    return scalar(rng.normal(s[0][0], spec.unit_sd));
  };
  m.prior = [cp = m.conditional_prior, count = m.block_names.size()](RngStream& rng) {
    ParamState s;
    s.blocks.assign(count, Eigen::VectorXd::Zero(1));
    for (BlockIndex j = 0; j < count; ++j) s[j] = cp(j, s, rng);
    return s;
  };
  m.simulator = [spec, params_of, first_unit, m_obs](const ParamState& s, RngStream& rng) {
    const GkParams p = params_of(s);
    Dataset x(static_cast<Eigen::Index>(spec.n), m_obs);
    for (Eigen::Index u = 0; u < x.rows(); ++u) {
      x.row(u) = gk_sample(s[first_unit + static_cast<BlockIndex>(u)][0], p, spec.c, m_obs, rng);
    }
    return x;
  };
  m.sim_cost = [n, per = spec.obs_per_unit](const ParamState&) { return static_cast<std::uint64_t>(n + n * per); };

  m.block_summary = [mu_values, first_unit](BlockIndex j, const Dataset& x, const ParamState& s) {
    if (j == 0) {
      const auto mu = mu_values(s);
      return octile_vector(mu);
    }
    if (j < first_unit) return all_octiles(x);
    return Eigen::VectorXd(row_octiles(x.row(static_cast<Eigen::Index>(j - first_unit))));
  };
  m.block_distance = [](BlockIndex, const Eigen::VectorXd& a, const Eigen::VectorXd& b) { return l1(a, b); };
  m.summary = all_octiles;
  m.distance = l1;

  m.log_prior = [spec, params_of, first_unit, free_bgk](const ParamState& s) {
    constexpr double kNegInf = -std::numeric_limits<double>::infinity();
    const double a = s[0][0];
    if (!(a >= spec.alpha_lo && a <= spec.alpha_hi)) return kNegInf;
    if (free_bgk) {
      const GkParams p = params_of(s);
      for (double v : {p.B, p.g, p.k}) {
        if (!(v >= 0.0 && v <= 1.0)) return kNegInf;
      }
    }
    double lp = -std::log(spec.alpha_hi - spec.alpha_lo);
    const double var = spec.unit_sd * spec.unit_sd;
    for (BlockIndex j = first_unit; j < s.block_count(); ++j) {
      const double r = s[j][0] - a;
      lp += -0.5 * r * r / var - 0.5 * std::log(2.0 * std::numbers::pi * var);
    }
    return lp;
  };

  Hierarchy h;
  h.levels.push_back({0, {}});
  for (BlockIndex j = first_unit; j < first_unit + n; ++j) h.levels[0].units.push_back(j);
  h.simulate_unit = [spec, params_of, first_unit, m_obs](std::size_t u, const ParamState& s, RngStream& rng) {
    return gk_sample(s[first_unit + u][0], params_of(s), spec.c, m_obs, rng);
  };
  h.unit_cost = [per = spec.obs_per_unit](std::size_t, const ParamState&) { return static_cast<std::uint64_t>(per); };
  h.unit_summary = [](BlockIndex, const Eigen::RowVectorXd& row, const ParamState&) { return row_octiles(row); };
  h.hyper_summary = [mu_values](std::size_t, const ParamState& s) {
    const auto mu = mu_values(s);
    return octile_vector(mu);
  };
  h.hyper_cost = [n](std::size_t) { return static_cast<std::uint64_t>(n); };
  m.hierarchy = std::move(h);
  return m;
}

}  // namespace abcg::models
