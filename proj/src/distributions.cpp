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

#include "abcg/distributions.hpp"

#include <cmath>
#include <limits>
#include <numbers>

#include "abcg/errors.hpp"

namespace abcg {
namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

bool positive_finite(double x) { return std::isfinite(x) && x > 0.0; }

}  // namespace

void validate(const Distribution& dist) {
  const bool ok = std::visit(
      Overloaded{
          [](const Normal& d) { return std::isfinite(d.mean) && positive_finite(d.sd); },
          [](const Uniform& d) { return std::isfinite(d.lo) && std::isfinite(d.hi) && d.lo < d.hi; },
          [](const InverseGamma& d) { return positive_finite(d.shape) && positive_finite(d.scale); },
          [](const Dirichlet& d) {
            return d.concentration.size() >= 2 && d.concentration.allFinite() &&
                   (d.concentration.array() > 0.0).all();
          },
          [](const Exponential& d) { return positive_finite(d.rate); },
          [](const HalfCauchy& d) { return positive_finite(d.scale); },
      },
      dist);
  if (!ok) throw InvalidParameter("distribution parameters outside their domain");
}

Eigen::Index dimension(const Distribution& dist) {
  if (const auto* d = std::get_if<Dirichlet>(&dist)) return d->concentration.size();
  return 1;
}

double sample_scalar(const Distribution& dist, RngStream& rng) {
  validate(dist);
  return std::visit(
      Overloaded{
          [&](const Normal& d) { return rng.normal(d.mean, d.sd); },
          [&](const Uniform& d) { return rng.uniform(d.lo, d.hi); },
          [&](const InverseGamma& d) { return d.scale / rng.gamma(d.shape); },
          [](const Dirichlet&) -> double {
            throw InvalidParameter("Dirichlet draws are vectors");
          },
          [&](const Exponential& d) { return -std::log(rng.uniform_open()) / d.rate; },
          [&](const HalfCauchy& d) {
            return std::abs(d.scale * std::tan(std::numbers::pi * (rng.uniform_open() - 0.5)));
          },
      },
      dist);
}

Eigen::VectorXd sample(const Distribution& dist, RngStream& rng) {
  if (const auto* d = std::get_if<Dirichlet>(&dist)) {
    validate(dist);
    // Log-space gammas: U^(1/a) underflows for small concentrations.
    Eigen::VectorXd lg(d->concentration.size());
    for (Eigen::Index i = 0; i < lg.size(); ++i) {
      const double a = d->concentration[i];
      lg[i] = a < 1.0 ? std::log(rng.gamma(a + 1.0)) + std::log(rng.uniform_open()) / a : std::log(rng.gamma(a));
    }
    const Eigen::VectorXd g = (lg.array() - lg.maxCoeff()).exp();
    return g / g.sum();
  }
  return Eigen::VectorXd::Constant(1, sample_scalar(dist, rng));
}

double log_density(const Distribution& dist, const Eigen::Ref<const Eigen::VectorXd>& x) {
  if (x.size() != dimension(dist)) throw InvalidParameter("log_density: dimension mismatch");
  const double v = x[0];
  return std::visit(
      Overloaded{
          [&](const Normal& d) {
            const double z = (v - d.mean) / d.sd;
            return -0.5 * z * z - std::log(d.sd) - 0.5 * std::log(2.0 * std::numbers::pi);
          },
          [&](const Uniform& d) { return (v >= d.lo && v <= d.hi) ? -std::log(d.hi - d.lo) : kNegInf; },
          [&](const InverseGamma& d) {
            if (v <= 0.0) return kNegInf;
            return d.shape * std::log(d.scale) - std::lgamma(d.shape) - (d.shape + 1.0) * std::log(v) -
                   d.scale / v;
          },
          [&](const Dirichlet& d) {
            if ((x.array() <= 0.0).any() || std::abs(x.sum() - 1.0) > 1e-9) return kNegInf;
            double out = std::lgamma(d.concentration.sum());
            for (Eigen::Index i = 0; i < x.size(); ++i) {
              out += (d.concentration[i] - 1.0) * std::log(x[i]) - std::lgamma(d.concentration[i]);
            }
            return out;
          },
          [&](const Exponential& d) { return v < 0.0 ? kNegInf : std::log(d.rate) - d.rate * v; },
          [&](const HalfCauchy& d) {
            if (v < 0.0) return kNegInf;
            const double r = v / d.scale;
            return std::log(2.0 / (std::numbers::pi * d.scale)) - std::log1p(r * r);
          },
      },
      dist);
}

}  // namespace abcg
