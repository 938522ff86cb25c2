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

#ifndef ABCG_DISTRIBUTIONS_HPP
#define ABCG_DISTRIBUTIONS_HPP

#include <Eigen/Dense>
#include <variant>

#include "abcg/rng.hpp"

namespace abcg {

struct Normal {
  double mean = 0.0;
  double sd = 1.0;
};

struct Uniform {
  double lo = 0.0;
  double hi = 1.0;
};

/// Inverse gamma with density proportional to x^(-shape-1) exp(-scale/x).
struct InverseGamma {
  double shape = 1.0;
  double scale = 1.0;
};

struct Dirichlet {
  Eigen::VectorXd concentration;
};

struct Exponential {
  double rate = 1.0;
};

struct HalfCauchy {
  double scale = 1.0;
};

using Distribution = std::variant<Normal, Uniform, InverseGamma, Dirichlet, Exponential, HalfCauchy>;

/// Throws InvalidParameter if the distribution's parameters are out of domain.
void validate(const Distribution& dist);

/// Dimension of a draw (1 for scalar families, K for Dirichlet).
Eigen::Index dimension(const Distribution& dist);

/// One draw; scalar families return a length-1 vector.
Eigen::VectorXd sample(const Distribution& dist, RngStream& rng);

/// One scalar draw; throws InvalidParameter for Dirichlet.
double sample_scalar(const Distribution& dist, RngStream& rng);

/// Log density at x, -infinity outside the support.
double log_density(const Distribution& dist, const Eigen::Ref<const Eigen::VectorXd>& x);

}  // namespace abcg

#endif  // ABCG_DISTRIBUTIONS_HPP
