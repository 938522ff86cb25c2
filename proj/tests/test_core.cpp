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
#include <limits>
#include <numeric>
#include <vector>

#include "abcg/distributions.hpp"
#include "abcg/errors.hpp"
#include "abcg/quantile.hpp"
#include "abcg/rng.hpp"

using namespace abcg;

namespace {

// Inverse of normal_cdf by bisection, independent of the rational approximation.
double bisect_quantile(double p) {
  double lo = -40.0, hi = 40.0;
  for (int i = 0; i < 200; ++i) {
    const double mid = 0.5 * (lo + hi);
    (normal_cdf(mid) < p ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

}  // namespace

TEST_CASE("rng streams are reproducible and split is pure") {
  RngStream a(42), b(42);
  for (int i = 0; i < 100; ++i) CHECK(a() == b());

  const RngStream parent(7);
  RngStream s1 = parent.split(3);
  RngStream s2 = parent.split(3);
  RngStream other = parent.split(4);
  bool differs = false;
  for (int i = 0; i < 16; ++i) {
    const auto v = s1();
    CHECK(v == s2());
    differs |= v != other();
  }
  CHECK(differs);

  // Drawing from the parent does not change what its children produce.
  RngStream used(7);
  for (int i = 0; i < 10; ++i) (void)used();
  RngStream c1 = used.split(3);
  RngStream c2 = RngStream(7).split(3);
  CHECK(c1() == c2());
}

TEST_CASE("uniform draws stay in range and below() is unbiased enough") {
  RngStream r(1);
  std::vector<int> counts(7, 0);
  for (int i = 0; i < 70000; ++i) {
    const double u = r.uniform();
    CHECK((u >= 0.0 && u < 1.0));
    const double o = r.uniform_open();
    CHECK((o > 0.0 && o < 1.0));
    ++counts[r.below(7)];
  }
  for (int c : counts) CHECK(std::abs(c - 10000) < 500);
}

TEST_CASE("distribution samples and supports") {
  RngStream r(2);
  for (int i = 0; i < 1000; ++i) {
    const double x = sample_scalar(Uniform{2.0, 2.000001}, r);
    CHECK((x >= 2.0 && x <= 2.000001));
  }

  double sum = 0.0;
  const int n = 1'000'000;
  for (int i = 0; i < n; ++i) sum += sample_scalar(Normal{3.0, 1.0}, r);
  CHECK(std::abs(sum / n - 3.0) < 0.01);

  for (int i = 0; i < 1000; ++i) {
    const Eigen::VectorXd d = sample(Dirichlet{Eigen::Vector3d::Ones()}, r);
    CHECK((d.array() > 0.0).all());
    CHECK((d.array() < 1.0).all());
    CHECK(d.sum() == doctest::Approx(1.0).epsilon(1e-12));
  }
}

TEST_CASE("small Dirichlet concentrations do not underflow to NaN") {
  RngStream r(3);
  for (int i = 0; i < 2000; ++i) {
    const Eigen::VectorXd d = sample(Dirichlet{Eigen::Vector3d::Constant(0.01)}, r);
    CHECK(d.allFinite());
    CHECK(d.sum() == doctest::Approx(1.0).epsilon(1e-12));
  }
}

TEST_CASE("gamma and inverse-gamma moments") {
  RngStream r(4);
  for (double shape : {0.3, 1.0, 4.5}) {
    double s = 0.0, s2 = 0.0;
    const int n = 400000;
    for (int i = 0; i < n; ++i) {
      const double g = r.gamma(shape);
      s += g;
      s2 += g * g;
    }
    const double mean = s / n;
    const double var = s2 / n - mean * mean;
    CHECK(mean == doctest::Approx(shape).epsilon(0.01));
    CHECK(var == doctest::Approx(shape).epsilon(0.03));
  }
  double s = 0.0;
  const int n = 400000;
  for (int i = 0; i < n; ++i) s += sample_scalar(InverseGamma{5.0, 8.0}, r);
  CHECK(s / n == doctest::Approx(2.0).epsilon(0.01));  // scale / (shape - 1)
}

TEST_CASE("log densities") {
  CHECK(log_density(Normal{0, 1}, Eigen::VectorXd::Zero(1)) == doctest::Approx(-0.5 * std::log(2 * M_PI)));
  CHECK(log_density(Uniform{0, 4}, Eigen::VectorXd::Constant(1, 1.0)) == doctest::Approx(-std::log(4.0)));
  CHECK(std::isinf(log_density(Uniform{0, 4}, Eigen::VectorXd::Constant(1, 5.0))));
  CHECK(log_density(Dirichlet{Eigen::Vector3d::Ones()}, Eigen::Vector3d::Constant(1.0 / 3)) ==
        doctest::Approx(std::log(2.0)));
}

TEST_CASE("invalid distribution parameters are rejected") {
  CHECK_THROWS_AS(validate(Normal{0, -1}), InvalidParameter);
  CHECK_THROWS_AS(validate(Uniform{1, 0}), InvalidParameter);
  CHECK_THROWS_AS(validate(InverseGamma{0, 1}), InvalidParameter);
  CHECK_THROWS_AS(validate(Dirichlet{Eigen::Vector2d(1, -1)}), InvalidParameter);
}

TEST_CASE("standard normal quantile") {
  CHECK(std_normal_quantile(0.5) == doctest::Approx(0.0).epsilon(1e-15));
  CHECK(std_normal_quantile(0.975) == doctest::Approx(1.959964).epsilon(1e-6));
  CHECK(std_normal_quantile(0.025) == doctest::Approx(-1.959964).epsilon(1e-6));
  for (double p : {1e-12, 1e-6, 0.01, 0.2, 0.5, 0.7, 0.99}) {
    CHECK(std_normal_quantile(p) == doctest::Approx(bisect_quantile(p)).epsilon(1e-9));
    CHECK(normal_cdf(std_normal_quantile(p)) == doctest::Approx(p).epsilon(1e-12));
  }
  for (double p : {1e-9, 1e-4, 0.3}) CHECK(std_normal_quantile(1 - p) == doctest::Approx(-std_normal_quantile(p)).epsilon(1e-7));
  CHECK_THROWS_AS(std_normal_quantile(0.0), DomainError);
  CHECK_THROWS_AS(std_normal_quantile(1.0), DomainError);
}

TEST_CASE("empirical quantiles use linear interpolation") {
  const std::vector<double> a{4, 1, 3, 2};
  CHECK(empirical_quantile(a, 0.0) == 1.0);
  CHECK(empirical_quantile(a, 1.0) == 4.0);
  const std::vector<double> b{1, 2, 3, 4};
  CHECK(empirical_quantile(b, 0.5) == 2.5);
  const std::vector<double> c(9, 3.25);
  for (double p : {0.0, 0.13, 0.5, 1.0}) CHECK(empirical_quantile(c, p) == 3.25);
  CHECK_THROWS_AS(empirical_quantile(std::vector<double>{}, 0.5), EmptySample);
  CHECK_THROWS_AS(empirical_quantile(b, 1.5), DomainError);
}

TEST_CASE("empirical quantiles are monotone in the level") {
  RngStream r(5);
  std::vector<double> x(257);
  for (auto& v : x) v = r.normal();
  std::vector<double> levels(101);
  std::iota(levels.begin(), levels.end(), 0.0);
  for (auto& l : levels) l /= 100.0;
  const auto q = empirical_quantiles(x, levels);
  CHECK(std::is_sorted(q.begin(), q.end()));
}

TEST_CASE("effective sample size") {
  CHECK(ess(std::vector<double>(50, 0.02)) == doctest::Approx(50.0));
  std::vector<double> one(10, 0.0);
  one[3] = 1.0;
  CHECK(ess(one) == doctest::Approx(1.0));
  CHECK(ess(std::vector<double>{0.5, 0.25, 0.25}) == doctest::Approx(1.0 / 0.375));

  RngStream r(6);
  for (int t = 0; t < 100; ++t) {
    std::vector<double> w(20);
    for (auto& v : w) v = r.uniform() < 0.3 ? 0.0 : r.uniform();
    w[0] = 0.1;
    const double total = std::accumulate(w.begin(), w.end(), 0.0);
    for (auto& v : w) v /= total;
    const double e = ess(w);
    CHECK(e >= 1.0 - 1e-12);
    CHECK(e <= 20.0 + 1e-12);
  }
}
