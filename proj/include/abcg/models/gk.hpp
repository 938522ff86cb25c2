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

#ifndef ABCG_MODELS_GK_HPP
#define ABCG_MODELS_GK_HPP

#include <Eigen/Dense>
#include <array>
#include <cmath>
#include <optional>
#include <span>

#include "abcg/model.hpp"

namespace abcg::models {

/// G&K quantile function at standard normal quantile z.
template <class Scalar>
Scalar gk_quantile_at_z(Scalar z, Scalar mu, Scalar B, Scalar g, Scalar k, Scalar c) {
  using std::pow;
  using std::tanh;
  // (1 - e^{-gz}) / (1 + e^{-gz}) == tanh(gz / 2)
  return mu + B * (Scalar(1) + c * tanh(g * z / Scalar(2))) * pow(Scalar(1) + z * z, k) * z;
}

/// F^{-1}(x; mu, B, g, k, c). Throws DomainError unless 0 < x < 1.
double gk_inverse_cdf(double x, double mu, double B, double g, double k, double c = 0.8);

struct GkParams {
  double B = 1.0;
  double g = 2.0;
  double k = 0.5;
};

/// `m` draws by inversion of uniform variates.
Eigen::RowVectorXd gk_sample(double mu, const GkParams& p, double c, Eigen::Index m, RngStream& rng);

/// Quantiles at levels 0, 1/8, ..., 1.
std::array<double, 9> gk_octiles(std::span<const double> sample);

/// Sum over the 9 octile levels of absolute quantile differences. Throws EmptySample.
double gk_octile_distance(std::span<const double> x1, std::span<const double> x2);

/// Simple model: (B, g, k) known. Doubly hierarchical model: B, g, k ~ U(0, 1) too.
struct GKSpec {
  std::size_t n = 10;
  std::size_t obs_per_unit = 100;
  double c = 0.8;
  std::optional<GkParams> known = GkParams{};
  double alpha_lo = -10.0;
  double alpha_hi = 10.0;
  double unit_sd = 1.0;
};

void validate(const GKSpec& spec);

/// Blocks: alpha, then B, g, k when not known, then mu_1..mu_n.
ModelSpec make_gk(const GKSpec& spec);

}  // namespace abcg::models

#endif  // ABCG_MODELS_GK_HPP
