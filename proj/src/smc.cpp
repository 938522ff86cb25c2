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

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "abcg/errors.hpp"
#include "abcg/quantile.hpp"
#include "abcg/samplers.hpp"

namespace abcg {
namespace {

std::size_t hits_below(const Eigen::MatrixXd& cache, Eigen::Index row, double eps) {
  return static_cast<std::size_t>((cache.row(row).array() < eps).count());
}

/// w_i proportional to w_prev_i * hits(eps) / hits(eps_prev). Returns false when every weight vanishes.
bool reweight(const Eigen::VectorXd& prev, const Eigen::MatrixXd& cache, double eps, double eps_prev,
              Eigen::VectorXd& out) {
  out.resize(prev.size());
  for (Eigen::Index i = 0; i < prev.size(); ++i) {
    const auto denom = hits_below(cache, i, eps_prev);
    out[i] = (denom == 0 || prev[i] == 0.0)
                 ? 0.0
                 : prev[i] * static_cast<double>(hits_below(cache, i, eps)) / static_cast<double>(denom);
  }
  const double total = out.sum();
  if (total <= 0.0) return false;
  out /= total;
  return true;
}

double weights_ess(const Eigen::VectorXd& w) {
  return ess(std::span<const double>(w.data(), static_cast<std::size_t>(w.size())));
}

Eigen::MatrixXd kernel_factor(const std::vector<ParamState>& particles, const Eigen::VectorXd& weights) {
  const auto n = static_cast<Eigen::Index>(particles.size());
  const Eigen::Index dim = particles.front().dimension();
  Eigen::MatrixXd x(n, dim);
  for (Eigen::Index i = 0; i < n; ++i) x.row(i) = particles[static_cast<std::size_t>(i)].flatten().transpose();
  const Eigen::RowVectorXd mean = weights.transpose() * x;
  const Eigen::MatrixXd centred = x.rowwise() - mean;
  Eigen::MatrixXd cov = 2.0 * centred.transpose() * weights.asDiagonal() * centred;

  double jitter = 1e-12 * std::max(1.0, cov.diagonal().cwiseAbs().maxCoeff());
  for (int tries = 0; tries < 20; ++tries) {
    Eigen::LLT<Eigen::MatrixXd> llt(cov);
    if (llt.info() == Eigen::Success) return llt.matrixL();
    cov.diagonal().array() += jitter;
    jitter *= 10.0;
  }
  throw NumericalError("smc_abc: kernel covariance is not positive definite");
}

}  // namespace

std::vector<std::size_t> multinomial_resample(const Eigen::VectorXd& weights, std::size_t count, RngStream& rng) {
  std::vector<double> cumulative(static_cast<std::size_t>(weights.size()));
  std::partial_sum(weights.data(), weights.data() + weights.size(), cumulative.begin());
  const double total = cumulative.back();
  if (!(total > 0.0)) throw InvalidParameter("multinomial_resample: weights sum to zero");
  std::vector<std::size_t> out(count);
  for (auto& idx : out) {
    const double u = rng.uniform() * total;
    const auto it = std::upper_bound(cumulative.begin(), cumulative.end(), u);
    idx = std::min<std::size_t>(static_cast<std::size_t>(it - cumulative.begin()), cumulative.size() - 1);
    // Skip zero-weight entries that share the same cumulative value.
    while (weights[static_cast<Eigen::Index>(idx)] == 0.0 && idx + 1 < cumulative.size()) ++idx;
  }
  return out;
}

SmcOutput smc_abc(const ModelSpec& model, const Dataset& observed, const SmcOptions& options, RngStream& rng) {
  model.validate();
  const std::size_t n = options.particles;
  const std::size_t m = options.pseudo_per_particle;
  const std::size_t min_ess = options.min_ess == 0 ? n / 2 : options.min_ess;
  if (n < 2) throw InvalidParameter("smc_abc: need at least 2 particles");
  if (m < 1) throw InvalidParameter("smc_abc: need M >= 1");
  if (min_ess > n) throw InvalidParameter("smc_abc: N_min must not exceed N");
  if (!(options.alpha_quality > 0.0 && options.alpha_quality < 1.0)) {
    throw InvalidParameter("smc_abc: alpha_quality must lie in (0, 1)");
  }
  if (options.kernel == MoveKernel::MetropolisHastings && !model.log_prior) {
    throw InvalidParameter("smc_abc: the Metropolis-Hastings move needs log_prior");
  }

  const Eigen::VectorXd observed_summary = model.summary(observed);
  SmcOutput out;

  auto pseudo_distances = [&](const ParamState& theta, RngStream& r, auto&& dest) {
    for (std::size_t k = 0; k < m; ++k) {
      const Dataset x = simulate(model, theta, r, out.budget);
      const double d = model.distance(model.summary(x), observed_summary);
      dest[static_cast<Eigen::Index>(k)] = std::isnan(d) ? std::numeric_limits<double>::infinity() : d;
    }
  };

  ParticleSystem ps;
  ps.particles.resize(n);
  ps.cache.resize(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(m));
  {
    RngStream init = rng.split(0);
    for (std::size_t i = 0; i < n; ++i) {
      RngStream r = init.split(i);
      ps.particles[i] = model.prior(r);
      pseudo_distances(ps.particles[i], r, ps.cache.row(static_cast<Eigen::Index>(i)));
    }
  }
  // Strict "<" comparisons: nudge so every finite initial statistic counts as a hit.
  const double largest = ps.cache.array().isFinite().select(ps.cache.array(), -1.0).maxCoeff();
  if (largest < 0.0) throw NumericalError("smc_abc: no finite initial distance");
  ps.epsilon = std::nextafter(largest, std::numeric_limits<double>::infinity());
  ps.weights = Eigen::VectorXd::Constant(static_cast<Eigen::Index>(n), 1.0 / static_cast<double>(n));
  if (options.keep_trajectory) out.trajectory.push_back(ps);

  const Eigen::Index dim = model.dimension();
  Eigen::VectorXd w;
  for (std::size_t t = 1; t <= options.steps; ++t) {
    SmcStepRecord rec;
    const double eps_prev = ps.epsilon;
    const double target = options.alpha_quality * weights_ess(ps.weights);

    // Smallest epsilon in [0, eps_prev] whose reweighted ESS still reaches the target.
    double lo = 0.0;
    double hi = eps_prev;
    for (int it = 0; it < options.bisection_max_iter && hi - lo > options.bisection_tol; ++it) {
      const double mid = 0.5 * (lo + hi);
      if (reweight(ps.weights, ps.cache, mid, eps_prev, w) && weights_ess(w) >= target) {
        hi = mid;
      } else {
        lo = mid;
      }
    }
    if (!reweight(ps.weights, ps.cache, hi, eps_prev, w)) {
      // Unattainable target: keep the previous threshold.
      hi = eps_prev;
      reweight(ps.weights, ps.cache, hi, eps_prev, w);
    }
    ps.epsilon = hi;
    ps.weights = w;
    rec.epsilon = hi;
    rec.ess_after_reweight = weights_ess(ps.weights);
    rec.zero_weight_particles = static_cast<std::size_t>((ps.weights.array() == 0.0).count());

    RngStream step_rng = rng.split(t);
    if (rec.ess_after_reweight < static_cast<double>(min_ess)) {
      RngStream rs = step_rng.split(n);
      const auto idx = multinomial_resample(ps.weights, n, rs);
      std::vector<ParamState> particles(n);
      Eigen::MatrixXd cache(ps.cache.rows(), ps.cache.cols());
      for (std::size_t i = 0; i < n; ++i) {
        particles[i] = ps.particles[idx[i]];
        cache.row(static_cast<Eigen::Index>(i)) = ps.cache.row(static_cast<Eigen::Index>(idx[i]));
      }
      ps.particles = std::move(particles);
      ps.cache = std::move(cache);
      ps.weights.setConstant(1.0 / static_cast<double>(n));
      rec.resampled = true;
    }
    rec.ess_after_resample = weights_ess(ps.weights);

    const Eigen::MatrixXd factor = kernel_factor(ps.particles, ps.weights);
    Eigen::RowVectorXd proposal_cache(static_cast<Eigen::Index>(m));
    for (std::size_t i = 0; i < n; ++i) {
      const auto row = static_cast<Eigen::Index>(i);
      if (ps.weights[row] == 0.0) continue;
      RngStream r = step_rng.split(i);
      const Eigen::VectorXd current = ps.particles[i].flatten();

      auto propose = [&]() {
        Eigen::VectorXd z(dim);
        for (Eigen::Index d = 0; d < dim; ++d) z[d] = r.normal();
        return model.unflatten(current + factor * z);
      };
      auto in_support = [&](const ParamState& s, double& lp) {
        lp = model.log_prior ? model.log_prior(s) : 0.0;
        return std::isfinite(lp);
      };

      if (options.kernel == MoveKernel::RepeatUntilHit) {
        bool moved = false;
        for (std::uint64_t a = 0; a < options.max_move_attempts && !moved; ++a) {
          ParamState candidate = propose();
          double lp = 0.0;
          if (!in_support(candidate, lp)) continue;
          pseudo_distances(candidate, r, proposal_cache);
          if ((proposal_cache.array() < ps.epsilon).any()) {
            ps.particles[i] = std::move(candidate);
            ps.cache.row(row) = proposal_cache;
            moved = true;
          }
        }
        if (moved) {
          ++rec.accepted_moves;
        } else {
          ++rec.stalled_moves;
        }
      } else {
        ParamState candidate = propose();
        double lp_new = 0.0;
        if (!in_support(candidate, lp_new)) continue;
        pseudo_distances(candidate, r, proposal_cache);
        const auto hits_new = static_cast<double>((proposal_cache.array() < ps.epsilon).count());
        if (hits_new == 0.0) continue;
        const double lp_old = model.log_prior(ps.particles[i]);
        const auto hits_old = static_cast<double>(hits_below(ps.cache, row, ps.epsilon));
        const double ratio = hits_old == 0.0 ? 1.0 : std::exp(lp_new - lp_old) * hits_new / hits_old;
        if (r.uniform() < ratio) {
          ps.particles[i] = std::move(candidate);
          ps.cache.row(row) = proposal_cache;
          ++rec.accepted_moves;
        }
      }
    }

    out.steps.push_back(rec);
    if (options.keep_trajectory) out.trajectory.push_back(ps);
  }
  out.final = std::move(ps);
  return out;
}

}  // namespace abcg
