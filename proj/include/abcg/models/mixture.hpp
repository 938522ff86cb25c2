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

#ifndef ABCG_MODELS_MIXTURE_HPP
#define ABCG_MODELS_MIXTURE_HPP

#include <Eigen/Dense>
#include <utility>

#include "abcg/model.hpp"

namespace abcg::models {

/// x ~ U(theta1, theta1 + 1) / 2 + U(theta2, theta2 + 1) / 2 with
/// (theta1, theta2) uniform on A = [0, 10]^2 minus |theta1 - theta2| <= gap.
struct MixtureUniformSpec {
  double lo = 0.0;
  double hi = 10.0;
  double gap = 2.0;
};

void validate(const MixtureUniformSpec& spec);

bool mixture_in_prior_support(const MixtureUniformSpec& spec, double theta1, double theta2);

/// Rejection from the square; `tries` (if given) receives the number of square draws used.
std::pair<double, double> mixture_prior_sample(const MixtureUniformSpec& spec, RngStream& rng,
                                               std::uint64_t* tries = nullptr);

double mixture_simulate(double theta1, double theta2, RngStream& rng);

/// theta_j | theta_other: uniform on [lo, hi] minus [other - gap, other + gap].
double mixture_conditional_prior(const MixtureUniformSpec& spec, double other, RngStream& rng);

/// Support of the exact posterior given one observation x.
bool mixture_in_posterior_support(const MixtureUniformSpec& spec, double theta1, double theta2, double x);

/// Blocks theta1, theta2; data is a 1 x 1 matrix.
ModelSpec make_mixture(const MixtureUniformSpec& spec);

}  // namespace abcg::models

#endif  // ABCG_MODELS_MIXTURE_HPP
