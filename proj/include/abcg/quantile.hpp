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

#ifndef ABCG_QUANTILE_HPP
#define ABCG_QUANTILE_HPP

#include <span>
#include <vector>

namespace abcg {

/// Standard normal CDF, computed through erfc so both tails keep relative accuracy.
double normal_cdf(double x) noexcept;

/// Inverse of the standard normal CDF. Throws DomainError unless 0 < p < 1.
///
/// Acklam's rational approximation followed by one Halley step on
/// erfc, which brings the absolute error well below 1e-12 on (1e-300, 1).
double std_normal_quantile(double p);

/// Continuous order-statistic quantile (Hyndman-Fan type 7): with the sample
/// sorted ascending, h = p (n - 1) and the result interpolates linearly
/// between x[floor(h)] and x[ceil(h)].
double empirical_quantile(std::span<const double> sample, double p);

/// Same convention on an already sorted sample; no copy.
double sorted_quantile(std::span<const double> sorted, double p);

/// Several levels at once (one sort).
std::vector<double> empirical_quantiles(std::span<const double> sample, std::span<const double> levels);

/// Effective sample size 1 / sum w_i^2 of a normalized weight vector.
double ess(std::span<const double> weights);

}  // namespace abcg

#endif  // ABCG_QUANTILE_HPP
