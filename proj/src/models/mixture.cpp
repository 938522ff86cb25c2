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

#include "abcg/models/mixture.hpp"

#include <algorithm>
#include <cmath>

#include "abcg/errors.hpp"

namespace abcg::models {

void validate(const MixtureUniformSpec& spec) {
  if (!(spec.lo < spec.hi)) throw InvalidParameter("MixtureUniformSpec: empty domain");
  if (!(spec.gap >= 0.0) || !(spec.gap < spec.hi - spec.lo)) {
    throw InvalidParameter("MixtureUniformSpec: gap must lie in [0, hi - lo)");
  }
}

bool mixture_in_prior_support(const MixtureUniformSpec& spec, double theta1, double theta2) {
  return theta1 >= spec.lo && theta1 <= spec.hi && theta2 >= spec.lo && theta2 <= spec.hi &&
         std::abs(theta1 - theta2) > spec.gap;
}

std::pair<double, double> mixture_prior_sample(const MixtureUniformSpec& spec, RngStream& rng,
                                               std::uint64_t* tries) {
  std::uint64_t count = 0;
  for (;;) {
    ++count;
    const double a = rng.uniform(spec.lo, spec.hi);
    const double b = rng.uniform(spec.lo, spec.hi);
    if (std::abs(a - b) > spec.gap) {
      if (tries) *tries = count;
      return {a, b};
    }
  }
}

double mixture_simulate(double theta1, double theta2, RngStream& rng) {
  const double base = rng.uniform() < 0.5 ? theta1 : theta2;
  return base + rng.uniform();
}

double mixture_conditional_prior(const MixtureUniformSpec& spec, double other, RngStream& rng) {
  const double left = std::max(0.0, std::min(spec.hi, other - spec.gap) - spec.lo);
  const double right_start = std::max(spec.lo, other + spec.gap);
  const double right = std::max(0.0, spec.hi - right_start);
  if (left + right <= 0.0) throw DomainError("mixture_conditional_prior: empty conditional support");
  const double u = rng.uniform() * (left + right);
  return u < left ? spec.lo + u : right_start + (u - left);
}

bool mixture_in_posterior_support(const MixtureUniformSpec& spec, double theta1, double theta2, double x) {
  if (!mixture_in_prior_support(spec, theta1, theta2)) return false;
  return (x >= theta1 && x <= theta1 + 1.0) || (x >= theta2 && x <= theta2 + 1.0);
}

ModelSpec make_mixture(const MixtureUniformSpec& spec) {
  validate(spec);
  ModelSpec m;
  m.name = "mixture";
  m.block_names = {"theta1", "theta2"};
  m.block_dims = {1, 1};

  m.prior = [spec](RngStream& rng) {
    const auto [a, b] = mixture_prior_sample(spec, rng);
    ParamState s;
    s.blocks = {Eigen::VectorXd::Constant(1, a), Eigen::VectorXd::Constant(1, b)};
    return s;
  };
  m.conditional_prior = [spec](BlockIndex j, const ParamState& s, RngStream& rng) {
    return Eigen::VectorXd::Constant(1, mixture_conditional_prior(spec, s[1 - j][0], rng));
  };
  m.simulator = [](const ParamState& s, RngStream& rng) {
    return Dataset::Constant(1, 1, mixture_simulate(s[0][0], s[1][0], rng));
  };
  m.sim_cost = [](const ParamState&) { return std::uint64_t{2}; };
  m.block_summary = [](BlockIndex, const Dataset& x, const ParamState&) { return Eigen::VectorXd::Constant(1, x(0, 0)); };
  m.block_distance = [](BlockIndex, const Eigen::VectorXd& a, const Eigen::VectorXd& b) { return std::abs(a[0] - b[0]); };
  m.summary = [](const Dataset& x) { return Eigen::VectorXd::Constant(1, x(0, 0)); };
  m.distance = [](const Eigen::VectorXd& a, const Eigen::VectorXd& b) { return std::abs(a[0] - b[0]); };
  m.log_prior = [spec](const ParamState& s) {
    if (!mixture_in_prior_support(spec, s[0][0], s[1][0])) return -std::numeric_limits<double>::infinity();
    const double w = spec.hi - spec.lo - spec.gap;
    return -std::log(w * w);
  };
  return m;
}

}  // namespace abcg::models
