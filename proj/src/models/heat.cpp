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

#include "abcg/models/heat.hpp"

#include <numbers>
#include <string>

namespace abcg::models {

void validate(const HeatEqSpec& spec) {
  if (spec.n < 3) throw InvalidParameter("HeatEqSpec: n must be >= 3");
  if (!(spec.delta > 0.0)) throw InvalidParameter("HeatEqSpec: delta must be > 0");
  if (spec.steps < 1) throw InvalidParameter("HeatEqSpec: steps must be >= 1");
  if (!(spec.noise_sd >= 0.0)) throw InvalidParameter("HeatEqSpec: noise_sd must be >= 0");
  if (spec.y0.size() != 0 && spec.y0.size() != static_cast<Eigen::Index>(spec.n)) {
    throw InvalidParameter("HeatEqSpec: y0 must have n entries");
  }
}

Eigen::VectorXd heat_initial_condition(const HeatEqSpec& spec) {
  if (spec.y0.size() != 0) return spec.y0;
  const auto n = static_cast<Eigen::Index>(spec.n);
  Eigen::VectorXd y(n);
  for (Eigen::Index j = 0; j < n; ++j) y[j] = std::sin(2.0 * std::numbers::pi * static_cast<double>(j) / static_cast<double>(n));
  return y;
}

Eigen::MatrixXd heat_trajectory(const HeatEqSpec& spec, const Eigen::Ref<const Eigen::VectorXd>& theta) {
  validate(spec);
  if (theta.size() != static_cast<Eigen::Index>(spec.n)) throw InvalidParameter("heat_trajectory: theta size");
  const CyclicHeatSolver<double> solver(theta, spec.delta);
  Eigen::MatrixXd out(theta.size(), static_cast<Eigen::Index>(spec.steps));
  Eigen::VectorXd y = heat_initial_condition(spec);
  Eigen::VectorXd work(y.size());
  for (Eigen::Index t = 0; t < out.cols(); ++t) {
    solver.advance(y, work);
    out.col(t) = y;
  }
  return out;
}

Dataset heat_simulate(const HeatEqSpec& spec, const Eigen::Ref<const Eigen::VectorXd>& theta, RngStream& rng) {
  Dataset x = heat_trajectory(spec, theta);
  if (spec.noise_sd > 0.0) {
    for (Eigen::Index i = 0; i < x.rows(); ++i) {
      for (Eigen::Index t = 0; t < x.cols(); ++t) x(i, t) += spec.noise_sd * rng.normal();
    }
  }
  return x;
}

Eigen::VectorXd heat_local_summary(std::ptrdiff_t m, const Dataset& data) {
  const Eigen::Index n = data.rows();
  const Eigen::Index T = data.cols();
  Eigen::VectorXd s(4 * T);
  for (Eigen::Index r = 0; r < 4; ++r) {
    const Eigen::Index row = (((m - 2 + r) % n) + n) % n;
    s.segment(r * T, T) = data.row(row).transpose();
  }
  return s;
}

ModelSpec make_heat(const HeatEqSpec& spec) {
  validate(spec);
  ModelSpec m;
  m.name = "heat";
  for (std::size_t j = 1; j <= spec.n; ++j) m.block_names.push_back("theta" + std::to_string(j));
  m.block_dims.assign(spec.n, 1);

  m.conditional_prior = [](BlockIndex, const ParamState&, RngStream& rng) {
    return Eigen::VectorXd::Constant(1, rng.uniform());
  };
  m.prior = [n = spec.n](RngStream& rng) {
    ParamState s;
    for (std::size_t j = 0; j < n; ++j) s.blocks.push_back(Eigen::VectorXd::Constant(1, rng.uniform()));
    return s;
  };
  m.simulator = [spec](const ParamState& s, RngStream& rng) { return heat_simulate(spec, s.flatten(), rng); };
  m.sim_cost = [cost = spec.n * spec.steps](const ParamState&) { return static_cast<std::uint64_t>(cost); };
  m.block_summary = [](BlockIndex j, const Dataset& x, const ParamState&) {
    return heat_local_summary(static_cast<std::ptrdiff_t>(j), x);
  };
  m.block_distance = [](BlockIndex, const Eigen::VectorXd& a, const Eigen::VectorXd& b) { return (a - b).norm(); };
  m.summary = [](const Dataset& x) { return Eigen::VectorXd(x.reshaped()); };
  m.distance = [](const Eigen::VectorXd& a, const Eigen::VectorXd& b) { return (a - b).norm(); };
  m.log_prior = [](const ParamState& s) {
    for (const auto& b : s.blocks) {
      if (!(b[0] >= 0.0 && b[0] <= 1.0)) return -std::numeric_limits<double>::infinity();
    }
    return 0.0;
  };
  return m;
}

}  // namespace abcg::models
