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

#ifndef ABCG_MODELS_HEAT_HPP
#define ABCG_MODELS_HEAT_HPP

#include <Eigen/Dense>
#include <cmath>

#include "abcg/errors.hpp"
#include "abcg/model.hpp"

namespace abcg::models {

/// Dense (M / delta + S) for piecewise-constant conductivity theta on n cyclic cells.
template <class Scalar>
Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic> heat_system_matrix(
    const Eigen::Ref<const Eigen::Matrix<Scalar, Eigen::Dynamic, 1>>& theta, Scalar delta) {
  const Eigen::Index n = theta.size();
  Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic> a =
      Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>::Zero(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const Eigen::Index prev = (i + n - 1) % n;
    const Eigen::Index next = (i + 1) % n;
    a(i, i) += Scalar(1) / (Scalar(3) * delta) + theta[i] + theta[next];
    a(i, prev) += Scalar(1) / (Scalar(6) * delta) - theta[i];
    a(i, next) += Scalar(1) / (Scalar(6) * delta) - theta[next];
  }
  return a;
}

/// Dense M / delta (1/3 diagonal, 1/6 cyclic neighbours).
template <class Scalar>
Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic> heat_mass_matrix(Eigen::Index n, Scalar delta) {
  Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic> m =
      Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>::Zero(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    m(i, i) += Scalar(1) / (Scalar(3) * delta);
    m(i, (i + n - 1) % n) += Scalar(1) / (Scalar(6) * delta);
    m(i, (i + 1) % n) += Scalar(1) / (Scalar(6) * delta);
  }
  return m;
}

/// Implicit step (M / delta + S) y_{t+1} = (M / delta) y_t, solved as a cyclic
/// tridiagonal system (tridiagonal elimination plus a rank-one correction).
/// Factorised once per theta.
template <class Scalar>
class CyclicHeatSolver {
 public:
  using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

  CyclicHeatSolver(const Eigen::Ref<const Vector>& theta, Scalar delta) : delta_{delta} {
    const Eigen::Index n = theta.size();
    if (n < 3) throw InvalidParameter("heat solver: need at least 3 cells");
    if (!(delta > Scalar(0))) throw InvalidParameter("heat solver: delta must be > 0");
    diag_.resize(n);
    sub_.resize(n);
    sup_.resize(n);
    for (Eigen::Index i = 0; i < n; ++i) {
      const Eigen::Index next = (i + 1) % n;
      diag_[i] = Scalar(1) / (Scalar(3) * delta) + theta[i] + theta[next];
      sub_[i] = Scalar(1) / (Scalar(6) * delta) - theta[i];
      sup_[i] = Scalar(1) / (Scalar(6) * delta) - theta[next];
    }
    corner_top_ = sub_[0];       // a(0, n-1)
    corner_bottom_ = sup_[n - 1];  // a(n-1, 0)
    gamma_ = -diag_[0];

    Vector d = diag_;
    d[0] -= gamma_;
    d[n - 1] -= corner_bottom_ * corner_top_ / gamma_;
    // Thomas forward sweep coefficients for the modified tridiagonal part.
    cprime_.resize(n);
    denom_.resize(n);
    denom_[0] = d[0];
    for (Eigen::Index i = 1; i < n; ++i) {
      cprime_[i - 1] = sup_[i - 1] / denom_[i - 1];
      denom_[i] = d[i] - sub_[i] * cprime_[i - 1];
    }
    inv_denom_ = denom_.cwiseInverse();
    Vector u = Vector::Zero(n);
    u[0] = gamma_;
    u[n - 1] = corner_bottom_;
    z_ = tridiagonal_solve(u);
    correction_denom_ = Scalar(1) + z_[0] + corner_top_ * z_[n - 1] / gamma_;
    if (!std::isfinite(static_cast<double>(correction_denom_)) || correction_denom_ == Scalar(0)) {
      throw NumericalError("heat solver: singular system");
    }
  }

  [[nodiscard]] Vector solve(const Eigen::Ref<const Vector>& rhs) const {
    const Eigen::Index n = rhs.size();
    Vector x = tridiagonal_solve(rhs);
    const Scalar fact = (x[0] + corner_top_ * x[n - 1] / gamma_) / correction_denom_;
    x -= fact * z_;
    if (!x.allFinite()) throw NumericalError("heat solver: non-finite solution");
    return x;
  }

  /// y_{t+1} from y_t.
  [[nodiscard]] Vector step(const Eigen::Ref<const Vector>& y) const {
    Vector out = y;
    Vector work(y.size());
    advance(out, work);
    return out;
  }

  /// In-place step; `work` is scratch of the same size.
  void advance(Eigen::Ref<Vector> y, Eigen::Ref<Vector> work) const {
    const Eigen::Index n = y.size();
    const Scalar third = Scalar(1) / (Scalar(3) * delta_);
    const Scalar sixth = Scalar(1) / (Scalar(6) * delta_);
    work[0] = third * y[0] + sixth * (y[n - 1] + y[1]);
    for (Eigen::Index i = 1; i + 1 < n; ++i) work[i] = third * y[i] + sixth * (y[i - 1] + y[i + 1]);
    work[n - 1] = third * y[n - 1] + sixth * (y[n - 2] + y[0]);
    forward_backward(work, y);
    const Scalar fact = (y[0] + corner_top_ * y[n - 1] / gamma_) / correction_denom_;
    y -= fact * z_;
    if (!y.allFinite()) throw NumericalError("heat solver: non-finite solution");
  }

 private:
  [[nodiscard]] Vector tridiagonal_solve(const Eigen::Ref<const Vector>& r) const {
    Vector x(r.size());
    forward_backward(r, x);
    return x;
  }

  void forward_backward(const Eigen::Ref<const Vector>& r, Eigen::Ref<Vector> x) const {
    const Eigen::Index n = r.size();
    x[0] = r[0] * inv_denom_[0];
    for (Eigen::Index i = 1; i < n; ++i) x[i] = (r[i] - sub_[i] * x[i - 1]) * inv_denom_[i];
    for (Eigen::Index i = n - 2; i >= 0; --i) x[i] -= cprime_[i] * x[i + 1];
  }

  Scalar delta_;
  Vector diag_, sub_, sup_, cprime_, denom_, inv_denom_, z_;
  Scalar corner_top_{}, corner_bottom_{}, gamma_{}, correction_denom_{};
};

/// One implicit step; refactorises every call.
template <class Scalar>
Eigen::Matrix<Scalar, Eigen::Dynamic, 1> heat_fem_step(
    const Eigen::Ref<const Eigen::Matrix<Scalar, Eigen::Dynamic, 1>>& theta,
    const Eigen::Ref<const Eigen::Matrix<Scalar, Eigen::Dynamic, 1>>& y, Scalar delta) {
  if (theta.size() != y.size()) throw InvalidParameter("heat_fem_step: size mismatch");
  return CyclicHeatSolver<Scalar>(theta, delta).step(y);
}

struct HeatEqSpec {
  std::size_t n = 20;
  double delta = 0.1;
  std::size_t steps = 50;
  /// Initial condition on the n nodes; empty means sin(2 pi j / n).
  Eigen::VectorXd y0;
  double noise_sd = 0.1;
};

void validate(const HeatEqSpec& spec);

/// The initial condition in use (default filled in).
Eigen::VectorXd heat_initial_condition(const HeatEqSpec& spec);

/// Noise-free n x steps trajectory y_1..y_T.
Eigen::MatrixXd heat_trajectory(const HeatEqSpec& spec, const Eigen::Ref<const Eigen::VectorXd>& theta);

/// Trajectory plus N(0, noise_sd^2) on every entry.
Dataset heat_simulate(const HeatEqSpec& spec, const Eigen::Ref<const Eigen::VectorXd>& theta, RngStream& rng);

/// Rows m-2, m-1, m, m+1 (mod n), flattened row by row.
Eigen::VectorXd heat_local_summary(std::ptrdiff_t m, const Dataset& data);

/// Block j is theta_{j+1}, dimension 1, prior U[0, 1].
ModelSpec make_heat(const HeatEqSpec& spec);

}  // namespace abcg::models

#endif  // ABCG_MODELS_HEAT_HPP
