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

#include "abcg/models/ma2.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <vector>

#include "abcg/distributions.hpp"
#include "abcg/errors.hpp"
#include "abcg/quantile.hpp"

namespace abcg::models {
namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();
/// Floor for log(beta) inside the samplers' level summary; exact zeros come from underflow.
constexpr double kBetaFloor = 1e-300;

double autocorr_or_nan(const Eigen::Ref<const Eigen::RowVectorXd>& x, Eigen::Index lag) {
  const Eigen::Index T = x.size();
  const Eigen::RowVectorXd c = x.array() - x.mean();
  const double denom = c.squaredNorm();
  if (!(denom > 0.0) || !std::isfinite(denom)) return kNaN;
  return c.head(T - lag).dot(c.tail(T - lag)) / denom;
}

double thinned_ss(const Eigen::Ref<const Eigen::RowVectorXd>& x) {
  const Eigen::Index m = x.size() / 3;
  Eigen::VectorXd thin(m);
  for (Eigen::Index t = 0; t < m; ++t) thin[t] = x[3 * t + 2];
  return (thin.array() - thin.mean()).square().sum() / static_cast<double>(m);
}

Ma2UnitStats stats_or_nan(const Eigen::Ref<const Eigen::RowVectorXd>& x) {
  return {autocorr_or_nan(x, 1), autocorr_or_nan(x, 2), thinned_ss(x)};
}

Eigen::VectorXd pack(const Dataset& x) {
  Eigen::VectorXd s(3 * x.rows());
  for (Eigen::Index u = 0; u < x.rows(); ++u) {
    const Ma2UnitStats st = stats_or_nan(x.row(u));
    s.segment<3>(3 * u) << st.rho1, st.rho2, st.thinned_ss;
  }
  return s;
}

Ma2UnitStats unpack(const Eigen::VectorXd& s, Eigen::Index u) { return {s[3 * u], s[3 * u + 1], s[3 * u + 2]}; }

Eigen::Vector3d dirichlet_stat_floored(const ParamState& s, const Ma2Layout& lay) {
  Eigen::Vector3d out = Eigen::Vector3d::Zero();
  for (std::size_t j = 0; j < lay.n; ++j) {
    const auto& mu = s[lay.mu(j)];
    const double b1 = (mu[1] + 2.0 * mu[0] + 1.0) / 4.0;
    const double b2 = (mu[1] - 2.0 * mu[0] + 1.0) / 4.0;
    out[0] += std::log(std::max(b1, kBetaFloor));
    out[1] += std::log(std::max(b2, kBetaFloor));
    out[2] += std::log(std::max(1.0 - b1 - b2, kBetaFloor));
  }
  return out;
}

Eigen::Vector2d gamma_stat(const ParamState& s, const Ma2Layout& lay) {
  Eigen::Vector2d out = Eigen::Vector2d::Zero();
  for (std::size_t j = 0; j < lay.n; ++j) {
    const double v = s[lay.sigma2(j)][0];
    out[0] += std::log(v);
    out[1] += 1.0 / v;
  }
  return out;
}

Eigen::VectorXd draw_mu(const Eigen::VectorXd& alpha, RngStream& rng) {
  const Eigen::VectorXd beta = sample(Dirichlet{alpha}, rng);
  return Eigen::Vector2d(beta[0] - beta[1], 2.0 * (beta[0] + beta[1]) - 1.0);
}

double draw_sigma2(const Eigen::VectorXd& varsigma, RngStream& rng) {
  const double shape = varsigma[0];
  const double log_g = shape < 1.0 ? std::log(rng.gamma(shape + 1.0)) + std::log(rng.uniform_open()) / shape
                                   : std::log(rng.gamma(shape));
  return std::exp(std::log(varsigma[1]) - log_g);
}

}  // namespace

void validate(const MA2HierSpec& spec) {
  if (spec.n < 1) throw InvalidParameter("MA2HierSpec: n must be >= 1");
  if (spec.T < 3) throw InvalidParameter("MA2HierSpec: T must be >= 3");
}

Eigen::RowVectorXd ma2_simulate(double mu1, double mu2, double sigma2, std::size_t T, RngStream& rng) {
  if (T < 3) throw InvalidParameter("ma2_simulate: T must be >= 3");
  if (!(sigma2 > 0.0)) throw InvalidParameter("ma2_simulate: sigma2 must be > 0");
  const double sd = std::sqrt(sigma2);
  double y2 = rng.normal();  // y_{-1}
  double y1 = rng.normal();  // y_0
  Eigen::RowVectorXd x(static_cast<Eigen::Index>(T));
  for (Eigen::Index t = 0; t < x.size(); ++t) {
    const double y = rng.normal();
    x[t] = sd * (y + mu1 * y1 + mu2 * y2);
    y2 = y1;
    y1 = y;
  }
  return x;
}

double ma2_autocorrelation(const Eigen::Ref<const Eigen::RowVectorXd>& x, Eigen::Index lag) {
  if (lag < 0 || lag >= x.size()) throw InvalidParameter("ma2_autocorrelation: lag out of range");
  const double r = autocorr_or_nan(x, lag);
  if (std::isnan(r)) throw NumericalError("ma2_autocorrelation: degenerate series");
  return r;
}

Ma2UnitStats ma2_stats(const Eigen::Ref<const Eigen::RowVectorXd>& x) {
  if (x.size() < 3) throw InvalidParameter("ma2_stats: series shorter than 3");
  return {ma2_autocorrelation(x, 1), ma2_autocorrelation(x, 2), thinned_ss(x)};
}

double ma2_w(const Ma2UnitStats& x, const Ma2UnitStats& observed) {
  return std::hypot(x.rho1 - observed.rho1, x.rho2 - observed.rho2);
}

double ma2_v(const Ma2UnitStats& x, const Ma2UnitStats& observed) {
  return std::abs(x.thinned_ss - observed.thinned_ss);
}

double ma2_delta(const Dataset& x, const Dataset& observed, const Ma2Normalizers& q) {
  if (x.rows() != observed.rows()) throw InvalidParameter("ma2_delta: unit count mismatch");
  double d = 0.0;
  for (Eigen::Index j = 0; j < x.rows(); ++j) {
    const Ma2UnitStats a = ma2_stats(x.row(j));
    const Ma2UnitStats b = ma2_stats(observed.row(j));
    d += ma2_w(a, b) / q.q_w[j] + ma2_v(a, b) / q.q_v[j];
  }
  return d;
}

std::pair<double, double> ma2_dirichlet_reparam(double beta1, double beta2) {
  if (!(beta1 >= 0.0 && beta2 >= 0.0 && beta1 + beta2 <= 1.0)) {
    throw DomainError("ma2_dirichlet_reparam: (beta1, beta2) off the simplex");
  }
  return {beta1 - beta2, 2.0 * (beta1 + beta2) - 1.0};
}

std::pair<double, double> ma2_dirichlet_inverse(double mu1, double mu2) {
  const double b1 = (mu2 + 2.0 * mu1 + 1.0) / 4.0;
  const double b2 = (mu2 - 2.0 * mu1 + 1.0) / 4.0;
  constexpr double tol = 1e-12;
  if (!(b1 >= -tol && b2 >= -tol && b1 + b2 <= 1.0 + tol)) {
    throw DomainError("ma2_dirichlet_inverse: mu maps off the simplex");
  }
  return {b1, b2};
}

Eigen::Vector3d ma2_hyper_summary_mu(const Eigen::Ref<const Eigen::MatrixX2d>& mu) {
  Eigen::Vector3d out = Eigen::Vector3d::Zero();
  for (Eigen::Index j = 0; j < mu.rows(); ++j) {
    const auto [b1, b2] = ma2_dirichlet_inverse(mu(j, 0), mu(j, 1));
    const double b3 = 1.0 - b1 - b2;
    if (!(b1 > 0.0 && b2 > 0.0 && b3 > 0.0)) throw DomainError("ma2_hyper_summary_mu: beta on the boundary");
    out += Eigen::Vector3d(std::log(b1), std::log(b2), std::log(b3));
  }
  return out;
}

Eigen::Vector2d ma2_hyper_summary_sigma2(const Eigen::Ref<const Eigen::VectorXd>& sigma2) {
  if (!(sigma2.array() > 0.0).all()) throw DomainError("ma2_hyper_summary_sigma2: sigma2 must be > 0");
  return {sigma2.array().log().sum(), sigma2.array().inverse().sum()};
}

ParamState ma2_state(const Eigen::Vector3d& alpha, const Eigen::Vector2d& varsigma,
                     const Eigen::Ref<const Eigen::MatrixX2d>& mu, const Eigen::Ref<const Eigen::VectorXd>& sigma2) {
  if (mu.rows() != sigma2.size()) throw InvalidParameter("ma2_state: unit count mismatch");
  ParamState s;
  s.blocks.emplace_back(alpha);
  s.blocks.emplace_back(varsigma);
  for (Eigen::Index j = 0; j < mu.rows(); ++j) s.blocks.emplace_back(mu.row(j).transpose());
  for (Eigen::Index j = 0; j < sigma2.size(); ++j) s.blocks.emplace_back(Eigen::VectorXd::Constant(1, sigma2[j]));
  return s;
}

ModelSpec make_ma2(const MA2HierSpec& spec, Ma2Normalizers normalizers) {
  validate(spec);
  const Ma2Layout lay{spec.n};
  const auto n = static_cast<Eigen::Index>(spec.n);
  if (normalizers.q_w.size() == 0) normalizers.q_w = Eigen::VectorXd::Ones(n);
  if (normalizers.q_v.size() == 0) normalizers.q_v = Eigen::VectorXd::Ones(n);
  if (normalizers.q_w.size() != n || normalizers.q_v.size() != n) {
    throw InvalidParameter("make_ma2: normalizers need one entry per series");
  }
  if (!(normalizers.q_w.array() > 0.0).all() || !(normalizers.q_v.array() > 0.0).all()) {
    throw InvalidParameter("make_ma2: normalizers must be > 0");
  }

  ModelSpec m;
  m.name = "ma2";
  m.block_names = {"alpha", "varsigma"};
  for (std::size_t j = 1; j <= spec.n; ++j) m.block_names.push_back("mu" + std::to_string(j));
  for (std::size_t j = 1; j <= spec.n; ++j) m.block_names.push_back("sigma2_" + std::to_string(j));
  m.block_dims = {3, 2};
  m.block_dims.insert(m.block_dims.end(), spec.n, 2);
  m.block_dims.insert(m.block_dims.end(), spec.n, 1);

  m.conditional_prior = [lay](BlockIndex j, const ParamState& s, RngStream& rng) -> Eigen::VectorXd {
    if (j == lay.alpha()) {
      Eigen::VectorXd a(3);
      for (Eigen::Index i = 0; i < 3; ++i) a[i] = sample_scalar(Exponential{1.0}, rng);
      return a;
    }
    if (j == lay.varsigma()) {
      Eigen::VectorXd v(2);
      for (Eigen::Index i = 0; i < 2; ++i) v[i] = sample_scalar(HalfCauchy{1.0}, rng);
      return v;
    }
    if (j < lay.sigma2(0)) return draw_mu(s[lay.alpha()], rng);
    return Eigen::VectorXd::Constant(1, draw_sigma2(s[lay.varsigma()], rng));
  };
  m.prior = [cp = m.conditional_prior, dims = m.block_dims](RngStream& rng) {
    ParamState s;
    for (auto d : dims) s.blocks.emplace_back(Eigen::VectorXd::Zero(d));
    for (BlockIndex j = 0; j < dims.size(); ++j) s[j] = cp(j, s, rng);
    return s;
  };
  auto unit_series = [lay, T = spec.T](std::size_t u, const ParamState& s, RngStream& rng) -> Eigen::RowVectorXd {
    const auto& mu = s[lay.mu(u)];
    const double sigma2 = s[lay.sigma2(u)][0];
    if (!(sigma2 > 0.0) || !std::isfinite(sigma2)) {
      return Eigen::RowVectorXd::Constant(static_cast<Eigen::Index>(T), kNaN);
    }
    return ma2_simulate(mu[0], mu[1], sigma2, T, rng);
  };
  m.simulator = [unit_series, lay, T = spec.T](const ParamState& s, RngStream& rng) {
    Dataset x(static_cast<Eigen::Index>(lay.n), static_cast<Eigen::Index>(T));
    for (std::size_t u = 0; u < lay.n; ++u) x.row(static_cast<Eigen::Index>(u)) = unit_series(u, s, rng);
    return x;
  };
  m.sim_cost = [cost = spec.n * (spec.T + 2)](const ParamState&) { return static_cast<std::uint64_t>(cost); };

  auto unit_summary = [lay](BlockIndex j, const Eigen::RowVectorXd& row, const ParamState&) -> Eigen::VectorXd {
    if (j < lay.sigma2(0)) return Eigen::Vector2d(autocorr_or_nan(row, 1), autocorr_or_nan(row, 2));
    return Eigen::VectorXd::Constant(1, thinned_ss(row));
  };
  m.block_summary = [lay, unit_summary](BlockIndex j, const Dataset& x, const ParamState& s) -> Eigen::VectorXd {
    if (j == lay.alpha()) return dirichlet_stat_floored(s, lay);
    if (j == lay.varsigma()) return gamma_stat(s, lay);
    const auto u = static_cast<Eigen::Index>(j < lay.sigma2(0) ? j - lay.mu(0) : j - lay.sigma2(0));
    return unit_summary(j, x.row(u), s);
  };
  m.block_distance = [](BlockIndex, const Eigen::VectorXd& a, const Eigen::VectorXd& b) { return (a - b).norm(); };
  m.summary = pack;
  m.distance = [normalizers](const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
    double d = 0.0;
    for (Eigen::Index u = 0; u < normalizers.q_w.size(); ++u) {
      const Ma2UnitStats sa = unpack(a, u);
      const Ma2UnitStats sb = unpack(b, u);
      d += ma2_w(sa, sb) / normalizers.q_w[u] + ma2_v(sa, sb) / normalizers.q_v[u];
    }
    return d;
  };
  m.log_prior = [lay](const ParamState& s) {
    constexpr double kNegInf = -std::numeric_limits<double>::infinity();
    const auto& alpha = s[lay.alpha()];
    const auto& vs = s[lay.varsigma()];
    if ((alpha.array() <= 0.0).any() || (vs.array() <= 0.0).any()) return kNegInf;
    double lp = 0.0;
    for (Eigen::Index i = 0; i < 3; ++i) lp += log_density(Exponential{1.0}, alpha.segment<1>(i));
    for (Eigen::Index i = 0; i < 2; ++i) lp += log_density(HalfCauchy{1.0}, vs.segment<1>(i));
    const Dirichlet dir{alpha};
    const InverseGamma ig{vs[0], vs[1]};
    for (std::size_t j = 0; j < lay.n; ++j) {
      const auto& mu = s[lay.mu(j)];
      const double b1 = (mu[1] + 2.0 * mu[0] + 1.0) / 4.0;
      const double b2 = (mu[1] - 2.0 * mu[0] + 1.0) / 4.0;
      // |d beta / d mu| = 1/4
      lp += log_density(dir, Eigen::Vector3d(b1, b2, 1.0 - b1 - b2)) - std::log(4.0);
      lp += log_density(ig, s[lay.sigma2(j)]);
    }
    return std::isnan(lp) ? kNegInf : lp;
  };

  Hierarchy h;
  h.levels.push_back({lay.alpha(), {}});
  h.levels.push_back({lay.varsigma(), {}});
  for (std::size_t j = 0; j < spec.n; ++j) {
    h.levels[0].units.push_back(lay.mu(j));
    h.levels[1].units.push_back(lay.sigma2(j));
  }
  h.simulate_unit = unit_series;
  h.unit_cost = [c = spec.T + 2](std::size_t, const ParamState&) { return static_cast<std::uint64_t>(c); };
  h.unit_summary = unit_summary;
  h.hyper_summary = [lay](std::size_t level, const ParamState& s) -> Eigen::VectorXd {
    if (level == 0) return dirichlet_stat_floored(s, lay);
    return gamma_stat(s, lay);
  };
  h.hyper_cost = [](std::size_t) { return std::uint64_t{0}; };
  m.hierarchy = std::move(h);
  return m;
}

Ma2Normalizers ma2_pilot_normalizers(const MA2HierSpec& spec, const Dataset& observed, std::size_t pilot_size,
                                     RngStream& rng, double level) {
  validate(spec);
  if (pilot_size == 0) throw InvalidParameter("ma2_pilot_normalizers: empty pilot table");
  if (observed.rows() != static_cast<Eigen::Index>(spec.n)) {
    throw InvalidParameter("ma2_pilot_normalizers: observed must have n rows");
  }
  const ModelSpec model = make_ma2(spec);
  const auto n = static_cast<std::size_t>(spec.n);
  std::vector<Ma2UnitStats> obs(n);
  for (std::size_t j = 0; j < n; ++j) obs[j] = ma2_stats(observed.row(static_cast<Eigen::Index>(j)));

  std::vector<std::vector<double>> w(n, std::vector<double>(pilot_size));
  std::vector<std::vector<double>> v(n, std::vector<double>(pilot_size));
  constexpr double kInf = std::numeric_limits<double>::infinity();
  for (std::size_t k = 0; k < pilot_size; ++k) {
    RngStream r = rng.split(k);
    const ParamState theta = model.prior(r);
    const Dataset x = model.simulator(theta, r);
    for (std::size_t j = 0; j < n; ++j) {
      const Ma2UnitStats st = stats_or_nan(x.row(static_cast<Eigen::Index>(j)));
      const double wj = ma2_w(st, obs[j]);
      const double vj = ma2_v(st, obs[j]);
      w[j][k] = std::isnan(wj) ? kInf : wj;
      v[j][k] = std::isnan(vj) ? kInf : vj;
    }
  }
  Ma2Normalizers q{Eigen::VectorXd(spec.n), Eigen::VectorXd(spec.n)};
  for (std::size_t j = 0; j < n; ++j) {
    const auto jj = static_cast<Eigen::Index>(j);
    q.q_w[jj] = empirical_quantile(w[j], level);
    q.q_v[jj] = empirical_quantile(v[j], level);
    if (!(q.q_w[jj] > 0.0 && std::isfinite(q.q_w[jj]) && q.q_v[jj] > 0.0 && std::isfinite(q.q_v[jj]))) {
      throw NumericalError("ma2_pilot_normalizers: degenerate pilot quantile");
    }
  }
  return q;
}

}  // namespace abcg::models
