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

#ifndef ABCG_MODELS_MA2_HPP
#define ABCG_MODELS_MA2_HPP

#include <Eigen/Dense>
#include <utility>

#include "abcg/model.hpp"

namespace abcg::models {

/// n series of length T: x_j ~ MA2(mu_j, sigma2_j), mu_j from Dir(alpha) via the
/// simplex map, sigma2_j ~ IG(varsigma1, varsigma2), alpha ~ Exp(1)^3,
/// varsigma ~ HalfCauchy^2.
struct MA2HierSpec {
  std::size_t n = 5;
  std::size_t T = 100;
};

void validate(const MA2HierSpec& spec);

/// x(t) = y_t + mu1 y_{t-1} + mu2 y_{t-2}, y ~ N(0, sigma2), t = 1..T.
Eigen::RowVectorXd ma2_simulate(double mu1, double mu2, double sigma2, std::size_t T, RngStream& rng);

/// Lag-l sample autocorrelation. Throws NumericalError for a constant series.
double ma2_autocorrelation(const Eigen::Ref<const Eigen::RowVectorXd>& x, Eigen::Index lag);

/// (rho1, rho2, thinned sum of squares over floor(T/3)) of one series.
struct Ma2UnitStats {
  double rho1 = 0.0;
  double rho2 = 0.0;
  double thinned_ss = 0.0;
};

Ma2UnitStats ma2_stats(const Eigen::Ref<const Eigen::RowVectorXd>& x);

/// Autocorrelation distance w and thinned-variance distance v.
double ma2_w(const Ma2UnitStats& x, const Ma2UnitStats& observed);
double ma2_v(const Ma2UnitStats& x, const Ma2UnitStats& observed);

/// Per-unit scales q_j (for w) and q'_j (for v) of the pooled distance.
struct Ma2Normalizers {
  Eigen::VectorXd q_w;
  Eigen::VectorXd q_v;
};

/// sum_j w_j / q_j + v_j / q'_j.
double ma2_delta(const Dataset& x, const Dataset& observed, const Ma2Normalizers& q);

/// (beta1, beta2) -> (beta1 - beta2, 2 (beta1 + beta2) - 1). Throws DomainError off the simplex.
std::pair<double, double> ma2_dirichlet_reparam(double beta1, double beta2);
std::pair<double, double> ma2_dirichlet_inverse(double mu1, double mu2);

/// n x 2 unit parameters -> (sum log beta1, sum log beta2, sum log beta3). Throws DomainError on the boundary.
Eigen::Vector3d ma2_hyper_summary_mu(const Eigen::Ref<const Eigen::MatrixX2d>& mu);
/// sigma2 vector -> (sum log sigma2, sum 1 / sigma2).
Eigen::Vector2d ma2_hyper_summary_sigma2(const Eigen::Ref<const Eigen::VectorXd>& sigma2);

/// Block layout: 0 alpha (3), 1 varsigma (2), 2..n+1 mu_j (2), n+2..2n+1 sigma2_j (1).
struct Ma2Layout {
  std::size_t n;
  [[nodiscard]] BlockIndex alpha() const { return 0; }
  [[nodiscard]] BlockIndex varsigma() const { return 1; }
  [[nodiscard]] BlockIndex mu(std::size_t j) const { return 2 + j; }
  [[nodiscard]] BlockIndex sigma2(std::size_t j) const { return 2 + n + j; }
};

/// State from hyper-parameters and unit parameters (mu as n x 2).
ParamState ma2_state(const Eigen::Vector3d& alpha, const Eigen::Vector2d& varsigma,
                     const Eigen::Ref<const Eigen::MatrixX2d>& mu, const Eigen::Ref<const Eigen::VectorXd>& sigma2);

/// Budget unit is one simulated series of T + 2 innovations; parameter draws are free.
/// Without normalizers the pooled distance uses q = q' = 1.
ModelSpec make_ma2(const MA2HierSpec& spec, Ma2Normalizers normalizers = {});

/// 0.1% quantiles of w_j and v_j over a prior-predictive pilot table.
Ma2Normalizers ma2_pilot_normalizers(const MA2HierSpec& spec, const Dataset& observed, std::size_t pilot_size,
                                     RngStream& rng, double level = 0.001);

}  // namespace abcg::models

#endif  // ABCG_MODELS_MA2_HPP
