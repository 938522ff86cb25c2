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

#include "abcg/density_grid.hpp"

#include <cmath>

#include "abcg/errors.hpp"

namespace abcg {

Eigen::VectorXd DensityGrid::points() const { return Eigen::VectorXd::LinSpaced(size(), lo, hi); }

double DensityGrid::integral() const {
  if (size() < 2) throw InvalidParameter("DensityGrid needs at least two points");
  return step() * (values.sum() - 0.5 * (values[0] + values[size() - 1]));
}

void DensityGrid::normalize() {
  const double total = integral();
  if (!(total > 0.0) || !std::isfinite(total)) throw NumericalError("DensityGrid: cannot normalize");
  values /= total;
}

Eigen::VectorXd DensityGrid::cdf() const {
  Eigen::VectorXd out(size());
  out[0] = 0.0;
  const double h = step();
  for (Eigen::Index i = 1; i < size(); ++i) out[i] = out[i - 1] + 0.5 * h * (values[i - 1] + values[i]);
  return out;
}

double DensityGrid::mean() const {
  const Eigen::VectorXd xs = points();
  const Eigen::VectorXd f = xs.cwiseProduct(values);
  return step() * (f.sum() - 0.5 * (f[0] + f[size() - 1])) / integral();
}

}  // namespace abcg
