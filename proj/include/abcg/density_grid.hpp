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

#ifndef ABCG_DENSITY_GRID_HPP
#define ABCG_DENSITY_GRID_HPP

#include <Eigen/Dense>

namespace abcg {

/// Density tabulated on a uniform grid over [lo, hi] (values at both ends included).
struct DensityGrid {
  double lo = 0.0;
  double hi = 1.0;
  Eigen::VectorXd values;

  [[nodiscard]] Eigen::Index size() const noexcept { return values.size(); }
  [[nodiscard]] double step() const noexcept { return (hi - lo) / static_cast<double>(values.size() - 1); }
  [[nodiscard]] double x(Eigen::Index i) const noexcept { return lo + static_cast<double>(i) * step(); }
  [[nodiscard]] Eigen::VectorXd points() const;

  /// Trapezoid integral of the values.
  [[nodiscard]] double integral() const;
  /// Rescale so the trapezoid integral is 1. Throws NumericalError if it is not positive and finite.
  void normalize();
  /// Trapezoid cumulative integral at each grid point (0 at lo).
  [[nodiscard]] Eigen::VectorXd cdf() const;
  /// Trapezoid mean.
  [[nodiscard]] double mean() const;
};

}  // namespace abcg

#endif  // ABCG_DENSITY_GRID_HPP
