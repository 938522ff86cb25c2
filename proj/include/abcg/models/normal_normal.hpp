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

#ifndef ABCG_MODELS_NORMAL_NORMAL_HPP
#define ABCG_MODELS_NORMAL_NORMAL_HPP

#include <Eigen/Dense>
#include <vector>

#include "abcg/density_grid.hpp"
#include "abcg/model.hpp"

namespace abcg::models {

/// mu_j ~ N(alpha, varsigma^2), x_jk ~ N(mu_j, sigma^2), alpha ~ U[alpha_lo, alpha_hi].
struct NormalNormalSpec {
  std::size_t n = 20;
  std::size_t K = 10;
  double sigma = 1.0;
  double varsigma = 1.0;
  double alpha_lo = -4.0;
  double alpha_hi = 4.0;
};

/// Throws InvalidParameter. sigma = 0 is allowed (noise-free data).
void validate(const NormalNormalSpec& spec);

/// Block 0 is alpha, block j (1..n) is mu_j; each of dimension 1.
ModelSpec make_normal_normal(const NormalNormalSpec& spec);

/// State from alpha and the n unit means.
ParamState nn_state(double alpha, const Eigen::Ref<const Eigen::VectorXd>& mu);

/// n x K observations given the mu blocks of `params`.
Dataset nn_simulate(const NormalNormalSpec& spec, const ParamState& params, RngStream& rng);

/// Per-unit empirical means (s_mu for every unit).
Eigen::VectorXd nn_unit_means(const Dataset& data);

/// Mean and variance of mu_j | alpha, x_j for a unit with K observations of mean xbar.
/// K = 0 gives the prior N(alpha, varsigma^2).
std::pair<double, double> nn_conditional_mu_moments(const NormalNormalSpec& spec, double alpha, double xbar,
                                                    std::size_t K);

double nn_exact_conditional_mu(const NormalNormalSpec& spec, double alpha,
                               const Eigen::Ref<const Eigen::RowVectorXd>& unit_data, RngStream& rng);

/// alpha | mu: N(mean(mu), varsigma^2 / n) truncated to the prior range, by inversion.
double nn_exact_conditional_alpha(const NormalNormalSpec& spec, const Eigen::Ref<const Eigen::VectorXd>& mu,
                                  RngStream& rng);

/// N(mean, sd^2) restricted to [lo, hi], sampled by inversion.
double truncated_normal(double mean, double sd, double lo, double hi, RngStream& rng);

struct NnPosterior {
  DensityGrid alpha;
  /// One grid per unit, each centred on the unit's marginal range.
  std::vector<DensityGrid> mu;
};

/// Exact posterior marginals by quadrature on `resolution` grid points.
NnPosterior nn_exact_posterior_oracle(const NormalNormalSpec& spec, const Dataset& observed,
                                      Eigen::Index resolution = 2001);

}  // namespace abcg::models

#endif  // ABCG_MODELS_NORMAL_NORMAL_HPP
