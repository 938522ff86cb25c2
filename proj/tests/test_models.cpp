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

#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

#include "abcg/errors.hpp"
#include "abcg/models/gk.hpp"
#include "abcg/models/heat.hpp"
#include "abcg/models/ma2.hpp"
#include "abcg/models/mixture.hpp"
#include "abcg/models/normal_normal.hpp"
#include "abcg/quantile.hpp"

using namespace abcg;
using namespace abcg::models;

namespace {

double draw_from_grid(const DensityGrid& g, double u) {
  const Eigen::VectorXd c = g.cdf() / g.cdf()[g.size() - 1];
  const auto it = std::lower_bound(c.begin(), c.end(), u);
  const auto k = std::max<Eigen::Index>(1, std::distance(c.begin(), it));
  const double f = (u - c[k - 1]) / std::max(c[k] - c[k - 1], 1e-300);
  return g.x(k - 1) + f * g.step();
}

// High-precision evaluation of the g-and-k quantile: z by bisection on erfc in long double.
long double gk_reference(long double x, long double mu, long double B, long double g, long double k, long double c) {
  long double lo = -10, hi = 10;
  for (int i = 0; i < 200; ++i) {
    const long double mid = (lo + hi) / 2;
    (0.5L * std::erfc(-mid / std::sqrt(2.0L)) < x ? lo : hi) = mid;
  }
  const long double z = (lo + hi) / 2;
  const long double e = std::exp(-g * z);
  return mu + B * (1 + c * (1 - e) / (1 + e)) * std::pow(1 + z * z, k) * z;
}

}  // namespace

// ---------------------------------------------------------------- Normal-Normal

TEST_CASE("normal-normal simulation and summaries") {
  const NormalNormalSpec spec{.n = 3, .K = 4, .sigma = 0.0};
  RngStream r(1);
  const ParamState s = nn_state(0.2, Eigen::Vector3d(1.0, -2.0, 0.5));
  const Dataset x = nn_simulate(spec, s, r);
  CHECK(x.rows() == 3);
  CHECK(x.cols() == 4);
  for (Eigen::Index j = 0; j < 3; ++j) CHECK((x.row(j).array() == s[j + 1][0]).all());
  CHECK(nn_unit_means(x) == Eigen::Vector3d(1.0, -2.0, 0.5));

  const ModelSpec m = make_normal_normal(spec);
  CHECK(m.block_summary(2, x, s)[0] == -2.0);
  CHECK(m.block_summary(0, x, s)[0] == doctest::Approx((1.0 - 2.0 + 0.5) / 3));
}

TEST_CASE("unit means are unbiased") {
  const NormalNormalSpec spec{.n = 1, .K = 10};
  RngStream r(2);
  const ParamState s = nn_state(0.0, Eigen::VectorXd::Constant(1, 2.0));
  double total = 0.0;
  const int reps = 1'000'000;
  for (int i = 0; i < reps; ++i) total += nn_simulate(spec, s, r).row(0).mean();
  CHECK(std::abs(total / reps - 2.0) < 0.003);
}

TEST_CASE("conjugate conditional of mu") {
  const auto [m0, v0] = nn_conditional_mu_moments({.sigma = 1.0, .varsigma = 1.0}, 0.0, 2.0, 1);
  CHECK(m0 == doctest::Approx(1.0));
  CHECK(v0 == doctest::Approx(0.5));

  const auto [m1, v1] = nn_conditional_mu_moments({.sigma = 1.0, .varsigma = 1.0}, 0.7, 123.0, 0);
  CHECK(m1 == doctest::Approx(0.7));
  CHECK(v1 == doctest::Approx(1.0));

  const auto [m2, v2] = nn_conditional_mu_moments({.sigma = 1.0, .varsigma = 1e6}, 0.0, 3.0, 5);
  CHECK(m2 == doctest::Approx(3.0).epsilon(1e-9));

  // 1-D quadrature of prior x likelihood for (alpha=0, varsigma=sigma=1, K=1, x=2).
  double z = 0, m = 0, q = 0;
  for (int i = -20000; i <= 20000; ++i) {
    const double mu = i * 1e-3;
    const double w = std::exp(-0.5 * mu * mu - 0.5 * (2.0 - mu) * (2.0 - mu));
    z += w;
    m += w * mu;
    q += w * mu * mu;
  }
  CHECK(m / z == doctest::Approx(m0).epsilon(1e-9));
  CHECK(q / z - (m / z) * (m / z) == doctest::Approx(v0).epsilon(1e-6));

  RngStream r(3);
  double s = 0, s2 = 0;
  const int n = 200000;
  for (int i = 0; i < n; ++i) {
    const double d = nn_exact_conditional_mu({.sigma = 1.0, .varsigma = 1.0}, 0.0, Eigen::RowVectorXd::Constant(1, 2.0), r);
    s += d;
    s2 += d * d;
  }
  CHECK(s / n == doctest::Approx(1.0).epsilon(0.01));
  CHECK(s2 / n - (s / n) * (s / n) == doctest::Approx(0.5).epsilon(0.01));
}

TEST_CASE("truncated normal stays inside its interval") {
  RngStream r(4);
  for (int i = 0; i < 10000; ++i) {
    const double a = truncated_normal(10.0, 1.0, -4.0, 4.0, r);
    CHECK((a >= -4.0 && a <= 4.0));
  }
}

TEST_CASE("exact posterior oracle") {
  const NormalNormalSpec spec{.n = 6, .K = 10};
  RngStream r(5);
  const ModelSpec m = make_normal_normal(spec);
  const Dataset obs = m.simulator(m.prior(r), r);
  const NnPosterior post = nn_exact_posterior_oracle(spec, obs);
  CHECK(post.alpha.integral() == doctest::Approx(1.0).epsilon(1e-6));
  for (const auto& g : post.mu) CHECK(g.integral() == doctest::Approx(1.0).epsilon(1e-6));

  // Importance sampling from the uniform prior.
  const Eigen::VectorXd xbar = nn_unit_means(obs);
  const double tau2 = spec.varsigma * spec.varsigma + spec.sigma * spec.sigma / double(spec.K);
  std::vector<double> a(1'000'000), lw(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    a[i] = r.uniform(spec.alpha_lo, spec.alpha_hi);
    lw[i] = -0.5 * (xbar.array() - a[i]).square().sum() / tau2;
  }
  const double mx = *std::max_element(lw.begin(), lw.end());
  double num = 0, den = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double w = std::exp(lw[i] - mx);
    num += w * a[i];
    den += w;
  }
  CHECK(std::abs(post.alpha.mean() - num / den) < 0.005);
}

TEST_CASE("oracle concentrates at zero for a symmetric single unit") {
  const NormalNormalSpec spec{.n = 1, .K = 100000};
  const NnPosterior post = nn_exact_posterior_oracle(spec, Dataset::Zero(1, spec.K));
  Eigen::Index mode = 0;
  post.alpha.values.maxCoeff(&mode);
  CHECK(std::abs(post.alpha.x(mode)) < 1e-2);
  CHECK(std::abs(post.alpha.mean()) < 1e-6);
}

TEST_CASE("conjugate draws agree with the oracle marginals (chi-square)") {
  const NormalNormalSpec spec{.n = 4, .K = 5};
  RngStream r(6);
  const ModelSpec m = make_normal_normal(spec);
  const Dataset obs = m.simulator(m.prior(r), r);
  const NnPosterior post = nn_exact_posterior_oracle(spec, obs);

  const int draws = 100000, bins = 50;
  std::vector<double> mu1(draws);
  for (auto& v : mu1) {
    const double alpha = draw_from_grid(post.alpha, r.uniform_open());
    v = nn_exact_conditional_mu(spec, alpha, obs.row(0), r);
  }
  // Equiprobable bins under the oracle mu_1 marginal.
  std::vector<double> edges;
  for (int b = 1; b < bins; ++b) edges.push_back(draw_from_grid(post.mu[0], double(b) / bins));
  std::vector<int> counts(bins, 0);
  for (double v : mu1) ++counts[std::upper_bound(edges.begin(), edges.end(), v) - edges.begin()];
  const double expected = double(draws) / bins;
  double chi2 = 0;
  for (int c : counts) chi2 += (c - expected) * (c - expected) / expected;
  CHECK(chi2 < 85.35);  // 0.999 quantile of chi-square with 49 degrees of freedom
}

// ---------------------------------------------------------------- g-and-k

TEST_CASE("g-and-k quantile function") {
  RngStream r(7);
  for (int i = 0; i < 1000; ++i) {
    const double mu = r.uniform(-10, 10), B = r.uniform(0.1, 5), g = r.uniform(-5, 5), k = r.uniform(-0.4, 3);
    CHECK(gk_inverse_cdf(0.5, mu, B, g, k) == mu);
  }
  for (double x : {0.01, 0.3, 0.9}) {
    CHECK(gk_inverse_cdf(x, 1.5, 2.0, 0.0, 0.0) == doctest::Approx(1.5 + 2.0 * std_normal_quantile(x)));
  }
  const double ref = double(gk_reference(0.975L, 0, 1, 2, 0.5L, 0.8L));
  CHECK(gk_inverse_cdf(0.975, 0, 1, 2, 0.5) == doctest::Approx(ref).epsilon(1e-10));

  const Eigen::RowVectorXd x = gk_sample(0.0, GkParams{1, 2, 0.5}, 0.8, 10'000'000, r);
  CHECK(std::abs(empirical_quantile({x.data(), std::size_t(x.size())}, 0.975) - ref) < 0.01);

  CHECK_THROWS_AS(gk_inverse_cdf(0.0, 0, 1, 2, 0.5), DomainError);
  CHECK_THROWS_AS(gk_inverse_cdf(1.0, 0, 1, 2, 0.5), DomainError);
}

TEST_CASE("g-and-k inversion draws are uniform on the quantile grid") {
  RngStream r(8);
  const GkParams p{1.3, -1.5, 0.8};
  const Eigen::RowVectorXd x = gk_sample(2.0, p, 0.8, 1'000'000, r);
  std::vector<double> s(x.begin(), x.end());
  std::sort(s.begin(), s.end());
  double ks = 0;
  for (int i = 1; i < 1000; ++i) {
    const double u = i / 1000.0;
    const double q = gk_inverse_cdf(u, 2.0, p.B, p.g, p.k);
    const double frac = double(std::upper_bound(s.begin(), s.end(), q) - s.begin()) / double(s.size());
    ks = std::max(ks, std::abs(frac - u));
  }
  CHECK(ks < 0.002);
}

TEST_CASE("g-and-k quantile is increasing") {
  // Negative k is only safe for small |g|: g = 2, k = -0.2 already folds over.
  for (double g : {-4.0, 0.0, 2.0, 6.0}) {
    for (double k : {g == 0.0 ? -0.45 : 0.0, 0.5, 2.0}) {
      double prev = -std::numeric_limits<double>::infinity();
      for (int i = 1; i < 2000; ++i) {
        const double q = gk_inverse_cdf(i / 2000.0, 0.0, 1.0, g, k);
        CHECK(q > prev);
        prev = q;
      }
    }
  }
}

TEST_CASE("octile distance") {
  std::vector<double> a{3, 1, 4, 1, 5, 9, 2, 6, 5, 3};
  CHECK(gk_octile_distance(a, a) == 0.0);
  std::vector<double> b = a;
  for (auto& v : b) v += 0.75;
  CHECK(gk_octile_distance(a, b) == doctest::Approx(9 * 0.75));
  std::vector<double> up{1, 2, 3, 4, 5, 6, 7, 8, 9}, down(up.rbegin(), up.rend());
  CHECK(gk_octile_distance(up, down) == 0.0);
  CHECK_THROWS_AS(gk_octile_distance(std::vector<double>{}, up), EmptySample);
}

TEST_CASE("g-and-k model layout") {
  const ModelSpec known = make_gk({.n = 3});
  CHECK(known.block_count() == 4);
  const ModelSpec doubly = make_gk({.n = 3, .known = std::nullopt});
  CHECK(doubly.block_count() == 7);
  RngStream r(9);
  const ParamState s = doubly.prior(r);
  const Dataset x = doubly.simulator(s, r);
  CHECK(x.rows() == 3);
  CHECK(doubly.distance(doubly.summary(x), doubly.summary(x)) == 0.0);
}

// ---------------------------------------------------------------- MA(2)

TEST_CASE("MA(2) autocorrelations") {
  RngStream r(10);
  const Eigen::RowVectorXd w = ma2_simulate(0.0, 0.0, 1.0, 100000, r);
  CHECK(std::abs(ma2_autocorrelation(w, 1)) < 0.02);
  CHECK(std::abs(ma2_autocorrelation(w, 2)) < 0.02);

  const double m1 = 0.6, m2 = 0.2, d = 1 + m1 * m1 + m2 * m2;
  const Eigen::RowVectorXd x = ma2_simulate(m1, m2, 2.0, 1'000'000, r);
  CHECK(std::abs(ma2_autocorrelation(x, 1) - m1 * (1 + m2) / d) < 0.01);
  CHECK(std::abs(ma2_autocorrelation(x, 2) - m2 / d) < 0.01);

  CHECK_THROWS_AS(ma2_autocorrelation(Eigen::RowVectorXd::Constant(50, 1.0), 1), NumericalError);
}

TEST_CASE("MA(2) distances vanish on the observed data") {
  RngStream r(11);
  Dataset obs(3, 100);
  for (Eigen::Index j = 0; j < 3; ++j) obs.row(j) = ma2_simulate(0.3, -0.2, 1.5, 100, r);
  const Ma2UnitStats s = ma2_stats(obs.row(0));
  CHECK(ma2_w(s, s) == 0.0);
  CHECK(ma2_v(s, s) == 0.0);
  const Ma2Normalizers q{Eigen::Vector3d::Constant(0.1), Eigen::Vector3d::Constant(0.2)};
  CHECK(ma2_delta(obs, obs, q) == 0.0);
}

TEST_CASE("Dirichlet reparameterisation") {
  const auto [a, b] = ma2_dirichlet_reparam(1.0 / 3, 1.0 / 3);
  CHECK(a == doctest::Approx(0.0));
  CHECK(b == doctest::Approx(1.0 / 3));
  const auto [z1, z2] = ma2_dirichlet_reparam(0.0, 0.0);
  CHECK(z1 == 0.0);
  CHECK(z2 == -1.0);
  const auto [b1, b2] = ma2_dirichlet_inverse(0.0, -1.0);
  CHECK(b1 == 0.0);
  CHECK(b2 == 0.0);

  RngStream r(12);
  for (int i = 0; i < 1000; ++i) {
    double u = r.uniform(), v = r.uniform();
    if (u + v > 1) {
      u = 1 - u;
      v = 1 - v;
    }
    const auto [m1, m2] = ma2_dirichlet_reparam(u, v);
    const auto [c1, c2] = ma2_dirichlet_inverse(m1, m2);
    CHECK(std::abs(c1 - u) < 1e-12);
    CHECK(std::abs(c2 - v) < 1e-12);
  }
  CHECK_THROWS_AS(ma2_dirichlet_reparam(0.8, 0.4), DomainError);
  CHECK_THROWS_AS(ma2_dirichlet_reparam(-0.1, 0.4), DomainError);
}

TEST_CASE("MA(2) hyper summaries") {
  Eigen::MatrixX2d mu(1, 2);
  mu << 0.0, 1.0 / 3;
  const Eigen::Vector3d s = ma2_hyper_summary_mu(mu);
  for (int i = 0; i < 3; ++i) CHECK(s[i] == doctest::Approx(std::log(1.0 / 3)));

  const Eigen::Vector3d sig(0.5, 2.0, 3.5);
  const double c = 4.0;
  CHECK(ma2_hyper_summary_sigma2(c * sig)[0] == doctest::Approx(ma2_hyper_summary_sigma2(sig)[0] + 3 * std::log(c)));

  Eigen::MatrixX2d many(3, 2);
  many << 0.1, 0.2, -0.3, 0.1, 0.3, -0.2;
  Eigen::MatrixX2d perm(3, 2);
  perm << many.row(2), many.row(0), many.row(1);
  CHECK(ma2_hyper_summary_mu(many).isApprox(ma2_hyper_summary_mu(perm)));
  CHECK(ma2_hyper_summary_sigma2(sig).isApprox(ma2_hyper_summary_sigma2(Eigen::Vector3d(3.5, 0.5, 2.0))));

  Eigen::MatrixX2d edge(1, 2);
  edge << 0.0, -1.0;
  CHECK_THROWS(ma2_hyper_summary_mu(edge));
}

TEST_CASE("MA(2) model layout and costs") {
  const MA2HierSpec spec{.n = 3, .T = 50};
  const ModelSpec m = make_ma2(spec);
  const Ma2Layout L{spec.n};
  CHECK(m.block_count() == 2 + 2 * spec.n);
  CHECK(m.block_names[L.mu(1)] == "mu2");
  CHECK(m.block_names[L.sigma2(0)] == "sigma2_1");
  RngStream r(13);
  const ParamState s = m.prior(r);
  const Dataset x = m.simulator(s, r);
  CHECK(x.rows() == 3);
  CHECK(x.cols() == 50);
  CHECK(m.sim_cost(s) == spec.n * (spec.T + 2));
}

// ---------------------------------------------------------------- heat

TEST_CASE("heat scheme conserves mass and matches a dense solve") {
  RngStream r(14);
  const Eigen::Index n = 20;
  const double delta = 0.1;
  for (int trial = 0; trial < 1000; ++trial) {
    Eigen::VectorXd theta(n), y(n);
    for (Eigen::Index i = 0; i < n; ++i) {
      theta[i] = r.uniform(0.01, 1.0);
      y[i] = r.normal();
    }
    const Eigen::VectorXd next = heat_fem_step<double>(theta, y, delta);
    CHECK(std::abs(next.sum() - y.sum()) < 1e-10);

    const Eigen::MatrixXd A = heat_system_matrix<double>(theta, delta);
    const Eigen::VectorXd dense = A.partialPivLu().solve(heat_mass_matrix<double>(n, delta) * y);
    CHECK((next - dense).cwiseAbs().maxCoeff() < 1e-10);
  }
}

TEST_CASE("constant profiles are fixed points") {
  RngStream r(15);
  Eigen::VectorXd theta(9);
  for (auto& t : theta) t = r.uniform();
  const Eigen::VectorXd y = Eigen::VectorXd::Constant(9, 2.5);
  CHECK((heat_fem_step<double>(theta, y, 0.1) - y).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("in-place and allocating steps agree") {
  RngStream r(16);
  Eigen::VectorXd theta(11), y(11), work(11);
  for (Eigen::Index i = 0; i < 11; ++i) {
    theta[i] = r.uniform();
    y[i] = r.normal();
  }
  const CyclicHeatSolver<double> solver(theta, 0.05);
  const Eigen::VectorXd a = solver.step(y);
  solver.advance(y, work);
  CHECK((a - y).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("heat simulation and local summaries") {
  HeatEqSpec spec;
  spec.n = 7;
  spec.steps = 6;
  spec.noise_sd = 0.0;
  RngStream r(17);
  Eigen::VectorXd theta(7);
  for (auto& t : theta) t = r.uniform();
  const Dataset x = heat_simulate(spec, theta, r);
  CHECK(x == heat_trajectory(spec, theta));

  for (std::ptrdiff_t m = 0; m < 7; ++m) CHECK(heat_local_summary(m, x) == heat_local_summary(m + 7, x));
  const Eigen::VectorXd s0 = heat_local_summary(0, x);
  CHECK(s0.head(6) == x.row(5).transpose());
  CHECK(s0.tail(6) == x.row(1).transpose());

  const ModelSpec model = make_heat(spec);
  CHECK(model.distance(model.summary(x), model.summary(x)) == 0.0);
  CHECK(model.block_distance(3, model.block_summary(3, x, {}), model.block_summary(3, x, {})) == 0.0);
}

TEST_CASE("heat spec validation") {
  HeatEqSpec spec;
  spec.delta = 0.0;
  CHECK_THROWS_AS(validate(spec), InvalidParameter);
  spec = HeatEqSpec{};
  spec.y0 = Eigen::VectorXd::Zero(3);
  CHECK_THROWS_AS(validate(spec), InvalidParameter);
}

// ---------------------------------------------------------------- mixture

TEST_CASE("mixture of uniforms") {
  const MixtureUniformSpec spec;
  RngStream r(18);
  std::uint64_t tries = 0, total = 0;
  const int n = 200000;
  for (int i = 0; i < n; ++i) {
    const auto [a, b] = mixture_prior_sample(spec, r, &tries);
    total += tries;
    CHECK(mixture_in_prior_support(spec, a, b));
    const double x = mixture_simulate(a, b, r);
    CHECK(x >= std::min(a, b));
    CHECK(x <= std::max(a, b) + 1.0);
  }
  CHECK(double(n) / double(total) == doctest::Approx(0.64).epsilon(0.01));

  // Posterior support for x = 5.
  CHECK(mixture_in_posterior_support(spec, 4.5, 1.0, 5.0));
  CHECK(mixture_in_posterior_support(spec, 8.0, 4.2, 5.0));
  CHECK_FALSE(mixture_in_posterior_support(spec, 4.5, 5.5, 5.0));
  CHECK_FALSE(mixture_in_posterior_support(spec, 6.0, 1.0, 5.0));
  for (int i = 0; i < 10000; ++i) {
    const double t1 = r.uniform(0, 10), t2 = r.uniform(0, 10);
    const bool expected = std::abs(t1 - t2) > 2 && ((t1 >= 4 && t1 <= 5) || (t2 >= 4 && t2 <= 5));
    CHECK(mixture_in_posterior_support(spec, t1, t2, 5.0) == expected);
  }
}

TEST_CASE("mixture conditional prior respects the gap") {
  const MixtureUniformSpec spec;
  RngStream r(19);
  for (int i = 0; i < 10000; ++i) {
    const double other = r.uniform(0, 10);
    const double v = mixture_conditional_prior(spec, other, r);
    CHECK(std::abs(v - other) > 2.0);
    CHECK((v >= 0.0 && v <= 10.0));
  }
}
