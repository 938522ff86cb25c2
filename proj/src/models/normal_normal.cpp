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

#include "abcg/models/normal_normal.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "abcg/errors.hpp"
#include "abcg/quantile.hpp"

namespace abcg::models {
namespace {

double scalar_abs_distance(BlockIndex, const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
  return (a - b).norm();
}

Eigen::VectorXd mu_vector(const ParamState& s) {
  Eigen::VectorXd mu(static_cast<Eigen::Index>(s.block_count() - 1));
  for (Eigen::Index j = 0; j < mu.size(); ++j) mu[j] = s[static_cast<BlockIndex>(j + 1)][0];
  return mu;
}

Eigen::VectorXd scalar(double v) { return Eigen::VectorXd::Constant(1, v); }

}  // namespace

void validate(const NormalNormalSpec& spec) {
  if (spec.n < 1 || spec.K < 1) throw InvalidParameter("NormalNormalSpec: n and K must be >= 1");
  if (!(spec.sigma >= 0.0) || !(spec.varsigma > 0.0)) {
    throw InvalidParameter("NormalNormalSpec: need sigma >= 0 and varsigma > 0");
  }
  if (!(spec.alpha_lo < spec.alpha_hi)) throw InvalidParameter("NormalNormalSpec: empty alpha range");
}

ParamState nn_state(double alpha, const Eigen::Ref<const Eigen::VectorXd>& mu) {
  ParamState s;
  s.blocks.reserve(static_cast<std::size_t>(mu.size()) + 1);
  s.blocks.push_back(scalar(alpha));
  for (Eigen::Index j = 0; j < mu.size(); ++j) s.blocks.push_back(scalar(mu[j]));
  return s;
}

Dataset nn_simulate(const NormalNormalSpec& spec, const ParamState& params, RngStream& rng) {
  Dataset x(static_cast<Eigen::Index>(spec.n), static_cast<Eigen::Index>(spec.K));
  for (Eigen::Index j = 0; j < x.rows(); ++j) {
    const double mu = params[static_cast<BlockIndex>(j + 1)][0];
    for (Eigen::Index k = 0; k < x.cols(); ++k) x(j, k) = rng.normal(mu, spec.sigma);
  }
  return x;
}

Eigen::VectorXd nn_unit_means(const Dataset& data) { return data.rowwise().mean(); }

std::pair<double, double> nn_conditional_mu_moments(const NormalNormalSpec& spec, double alpha, double xbar,
                                                    std::size_t K) {
  const double prior_prec = 1.0 / (spec.varsigma * spec.varsigma);
  if (K == 0) return {alpha, 1.0 / prior_prec};
  if (spec.sigma == 0.0) return {xbar, 0.0};
  const double data_prec = static_cast<double>(K) / (spec.sigma * spec.sigma);
  const double v = 1.0 / (prior_prec + data_prec);
  return {v * (alpha * prior_prec + xbar * data_prec), v};
}

double nn_exact_conditional_mu(const NormalNormalSpec& spec, double alpha,
                               const Eigen::Ref<const Eigen::RowVectorXd>& unit_data, RngStream& rng) {
  const auto K = static_cast<std::size_t>(unit_data.size());
  const double xbar = K == 0 ? 0.0 : unit_data.mean();
  const auto [m, v] = nn_conditional_mu_moments(spec, alpha, xbar, K);
  return rng.normal(m, std::sqrt(v));
}

double truncated_normal(double mean, double sd, double lo, double hi, RngStream& rng) {
  if (!(lo < hi)) throw InvalidParameter("truncated_normal: empty interval");
  if (sd == 0.0) return std::clamp(mean, lo, hi);
  double a = (lo - mean) / sd;
  double b = (hi - mean) / sd;
  // Work on the side where Phi keeps relative accuracy.
  const bool flip = a + b > 0.0;
  if (flip) {
    std::tie(a, b) = std::pair{-b, -a};
  }
  const double pa = normal_cdf(a);
  const double pb = normal_cdf(b);
  double z = b;
  if (pb > pa) {
    const double u = pa + rng.uniform_open() * (pb - pa);
    z = std::clamp(std_normal_quantile(u), a, b);
  }
  if (flip) z = -z;
  return std::clamp(mean + sd * z, lo, hi);
}

double nn_exact_conditional_alpha(const NormalNormalSpec& spec, const Eigen::Ref<const Eigen::VectorXd>& mu,
                                  RngStream& rng) {
  const double sd = spec.varsigma / std::sqrt(static_cast<double>(mu.size()));
  return truncated_normal(mu.mean(), sd, spec.alpha_lo, spec.alpha_hi, rng);
}

ModelSpec make_normal_normal(const NormalNormalSpec& spec) {
  validate(spec);
  const std::size_t n = spec.n;
  const auto K = static_cast<std::uint64_t>(spec.K);

  ModelSpec m;
  m.name = "normal_normal";
  m.block_names.push_back("alpha");
  for (std::size_t j = 1; j <= n; ++j) m.block_names.push_back("mu" + std::to_string(j));
  m.block_dims.assign(n + 1, 1);

  m.prior = [spec](RngStream& rng) {
    ParamState s;
    s.blocks.push_back(scalar(rng.uniform(spec.alpha_lo, spec.alpha_hi)));
    for (std::size_t j = 0; j < spec.n; ++j) s.blocks.push_back(scalar(rng.normal(s[0][0], spec.varsigma)));
    return s;
  };
  m.conditional_prior = [spec](BlockIndex j, const ParamState& s, RngStream& rng) {
    if (j == 0) return scalar(rng.uniform(spec.alpha_lo, spec.alpha_hi));
    return scalar(rng.normal(s[0][0], spec.varsigma));
  };
  m.simulator = [spec](const ParamState& s, RngStream& rng) { return nn_simulate(spec, s, rng); };
  // n unit means plus n K observations per prior-predictive draw.
  m.sim_cost = [n, K](const ParamState&) { return n + n * K; };

  m.block_summary = [](BlockIndex j, const Dataset& x, const ParamState& s) {
    if (j == 0) return scalar(mu_vector(s).mean());
    return scalar(x.row(static_cast<Eigen::Index>(j - 1)).mean());
  };
  m.block_distance = scalar_abs_distance;
  m.summary = [](const Dataset& x) { return nn_unit_means(x); };
  m.distance = [](const Eigen::VectorXd& a, const Eigen::VectorXd& b) { return (a - b).norm(); };

  m.exact_conditional = [spec](BlockIndex j, const ParamState& s, const Dataset& x,
                               RngStream& rng) -> std::optional<Eigen::VectorXd> {
    if (j == 0) return scalar(nn_exact_conditional_alpha(spec, mu_vector(s), rng));
    return scalar(nn_exact_conditional_mu(spec, s[0][0], x.row(static_cast<Eigen::Index>(j - 1)), rng));
  };
  m.log_prior = [spec](const ParamState& s) {
    const double a = s[0][0];
    if (!(a >= spec.alpha_lo && a <= spec.alpha_hi)) return -std::numeric_limits<double>::infinity();
    double lp = -std::log(spec.alpha_hi - spec.alpha_lo);
    const double v = spec.varsigma * spec.varsigma;
    for (std::size_t j = 1; j < s.block_count(); ++j) {
      const double r = s[j][0] - a;
      lp += -0.5 * r * r / v - 0.5 * std::log(2.0 * std::numbers::pi * v);
    }
    return lp;
  };

  Hierarchy h;
  h.levels.push_back({0, {}});
  for (BlockIndex j = 1; j <= n; ++j) h.levels[0].units.push_back(j);
  h.simulate_unit = [spec](std::size_t u, const ParamState& s, RngStream& rng) {
    Eigen::RowVectorXd row(static_cast<Eigen::Index>(spec.K));
    const double mu = s[u + 1][0];
    for (Eigen::Index k = 0; k < row.size(); ++k) row[k] = rng.normal(mu, spec.sigma);
    return row;
  };
  h.unit_cost = [K](std::size_t, const ParamState&) { return K; };
  h.unit_summary = [](BlockIndex, const Eigen::RowVectorXd& row, const ParamState&) { return scalar(row.mean()); };
  h.hyper_summary = [](std::size_t, const ParamState& s) { return scalar(mu_vector(s).mean()); };
  h.hyper_cost = [n](std::size_t) { return static_cast<std::uint64_t>(n); };
  m.hierarchy = std::move(h);
  return m;
}

NnPosterior nn_exact_posterior_oracle(const NormalNormalSpec& spec, const Dataset& observed,
                                      Eigen::Index resolution) {
  validate(spec);
  if (spec.sigma == 0.0) throw InvalidParameter("nn_exact_posterior_oracle: needs sigma > 0");
  if (resolution < 3) throw InvalidParameter("nn_exact_posterior_oracle: resolution must be >= 3");
  if (observed.rows() < 1 || observed.cols() < 1) throw InvalidParameter("nn_exact_posterior_oracle: empty data");

  const Eigen::VectorXd xbar = nn_unit_means(observed);
  const auto K = static_cast<std::size_t>(observed.cols());
  const double tau2 = spec.varsigma * spec.varsigma + spec.sigma * spec.sigma / static_cast<double>(K);

  NnPosterior out;
  out.alpha.lo = spec.alpha_lo;
  out.alpha.hi = spec.alpha_hi;
  const Eigen::VectorXd alphas = Eigen::VectorXd::LinSpaced(resolution, spec.alpha_lo, spec.alpha_hi);
  Eigen::VectorXd logp(resolution);
  for (Eigen::Index i = 0; i < resolution; ++i) {
    logp[i] = -0.5 * (xbar.array() - alphas[i]).square().sum() / tau2;
  }
  out.alpha.values = (logp.array() - logp.maxCoeff()).exp();
  out.alpha.normalize();

  // Trapezoid weights of the alpha posterior; negligible nodes are skipped.
  Eigen::VectorXd weight = out.alpha.values * out.alpha.step();
  weight[0] *= 0.5;
  weight[resolution - 1] *= 0.5;
  const double cutoff = 1e-14 * weight.maxCoeff();

  out.mu.reserve(static_cast<std::size_t>(xbar.size()));
  for (Eigen::Index j = 0; j < xbar.size(); ++j) {
    const double v = nn_conditional_mu_moments(spec, 0.0, xbar[j], K).second;
    const double sd = std::sqrt(v);
    double mlo = std::numeric_limits<double>::infinity();
    double mhi = -mlo;
    for (Eigen::Index i = 0; i < resolution; ++i) {
      if (weight[i] <= cutoff) continue;
      const double m = nn_conditional_mu_moments(spec, alphas[i], xbar[j], K).first;
      mlo = std::min(mlo, m);
      mhi = std::max(mhi, m);
    }
    DensityGrid g;
    g.lo = mlo - 8.0 * sd;
    g.hi = mhi + 8.0 * sd;
    g.values = Eigen::VectorXd::Zero(resolution);
    const Eigen::VectorXd pts = g.points();
    for (Eigen::Index i = 0; i < resolution; ++i) {
      if (weight[i] <= cutoff) continue;
      const double m = nn_conditional_mu_moments(spec, alphas[i], xbar[j], K).first;
      g.values += weight[i] * (-0.5 * (pts.array() - m).square() / v).exp().matrix();
    }
    g.values /= std::sqrt(2.0 * std::numbers::pi * v);
    g.normalize();
    out.mu.push_back(std::move(g));
  }
  return out;
}

}  // namespace abcg::models
