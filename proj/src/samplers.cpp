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
#include <queue>
#include <tuple>

#include "abcg/errors.hpp"
#include "abcg/samplers.hpp"

namespace abcg {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

/// NaN distances (degenerate pseudo-data) never win a comparison.
double finite_or_inf(double d) { return std::isnan(d) ? kInf : d; }

ChainOutput make_output(const ModelSpec& model, std::size_t rows, Eigen::Index distance_cols) {
  ChainOutput out;
  out.samples.resize(static_cast<Eigen::Index>(rows), model.dimension());
  out.distances.resize(static_cast<Eigen::Index>(rows), distance_cols);
  out.attempts.assign(static_cast<std::size_t>(distance_cols), 0);
  out.block_names = model.block_names;
  out.block_dims = model.block_dims;
  return out;
}

void check_state(const ModelSpec& model, const ParamState& state) {
  if (state.block_count() != model.block_count()) throw InvalidParameter("state has the wrong number of blocks");
  for (std::size_t j = 0; j < state.block_count(); ++j) {
    if (state[j].size() != model.block_dims[j]) throw InvalidParameter("state block has the wrong dimension");
  }
}

void check_options(const ModelSpec& model, const GibbsOptions& options) {
  if (options.rules.size() != model.block_count()) throw InvalidParameter("need one tolerance rule per block");
  for (const auto& r : options.rules) validate(r);
  if (!options.exact.empty() && options.exact.size() != model.block_count()) {
    throw InvalidParameter("exact flags must be empty or one per block");
  }
}

bool wants_exact(const GibbsOptions& options, BlockIndex j) {
  return !options.exact.empty() && options.exact[j];
}

/// Draws one candidate for block j and returns its distance to the observed statistic.
class CandidateSource {
 public:
  CandidateSource(const ModelSpec& model, const Dataset& observed, BlockIndex j, const ParamState& state)
      : model_{model}, observed_{observed}, j_{j}, candidate_{state} {
    if (const auto& h = model.hierarchy) {
      if (auto unit = h->unit_of(j)) {
        mode_ = Mode::Unit;
        unit_ = unit->second;
        observed_summary_ = h->unit_summary(j, observed.row(static_cast<Eigen::Index>(unit_)), state);
        return;
      }
      if (auto level = h->level_of_hyper(j)) {
        mode_ = Mode::Hyper;
        level_ = *level;
        observed_summary_ = h->hyper_summary(level_, state);
        return;
      }
    }
    observed_summary_ = model.block_summary(j, observed, state);
  }

  double draw(RngStream& rng, BudgetCounter& budget) {
    candidate_[j_] = model_.conditional_prior(j_, candidate_, rng);
    Eigen::VectorXd s;
    switch (mode_) {
      case Mode::Unit: {
        const auto& h = *model_.hierarchy;
        budget.book(h.unit_cost(unit_, candidate_));
        const Eigen::RowVectorXd row = h.simulate_unit(unit_, candidate_, rng);
        s = h.unit_summary(j_, row, candidate_);
        break;
      }
      case Mode::Hyper: {
        const auto& h = *model_.hierarchy;
        for (BlockIndex k : h.levels[level_].units) candidate_[k] = model_.conditional_prior(k, candidate_, rng);
        budget.book(h.hyper_cost(level_));
        s = h.hyper_summary(level_, candidate_);
        break;
      }
      case Mode::Full: {
        const Dataset x = simulate(model_, candidate_, rng, budget);
        s = model_.block_summary(j_, x, candidate_);
        break;
      }
    }
    return finite_or_inf(model_.block_distance(j_, s, observed_summary_));
  }

  [[nodiscard]] const Eigen::VectorXd& value() const { return candidate_[j_]; }

 private:
  enum class Mode { Full, Unit, Hyper };
  const ModelSpec& model_;
  const Dataset& observed_;
  BlockIndex j_;
  ParamState candidate_;
  Mode mode_ = Mode::Full;
  std::size_t unit_ = 0;
  std::size_t level_ = 0;
  Eigen::VectorXd observed_summary_;
};

void record_row(ChainOutput& out, Eigen::Index row, const ParamState& state) {
  out.samples.row(row) = state.flatten().transpose();
}

}  // namespace

Eigen::Index ChainOutput::column(BlockIndex j, Eigen::Index c) const {
  Eigen::Index pos = 0;
  for (BlockIndex k = 0; k < j; ++k) pos += block_dims.at(k);
  if (c >= block_dims.at(j)) throw InvalidParameter("component index out of range");
  return pos + c;
}

ChainOutput ChainOutput::drop_first(Eigen::Index burn_in) const {
  ChainOutput out = *this;
  const Eigen::Index keep = std::max<Eigen::Index>(0, rows() - burn_in);
  out.samples = samples.bottomRows(keep);
  out.distances = distances.bottomRows(keep);
  if (!accepted.empty()) out.accepted.assign(accepted.end() - keep, accepted.end());
  return out;
}

StepResult abc_conditional_step(const ModelSpec& model, const Dataset& observed, BlockIndex j,
                                const ParamState& state, const ToleranceRule& rule, RngStream& rng,
                                BudgetCounter& budget, const StepOptions& options) {
  if (j >= model.block_count()) throw InvalidParameter("block index out of range");
  if (options.exact) {
    std::optional<Eigen::VectorXd> v;
    if (model.exact_conditional) v = model.exact_conditional(j, state, observed, rng);
    if (!v) throw InvalidParameter("no exact conditional registered for block '" + model.block_names[j] + "'");
    return {std::move(*v), 0.0, 0};
  }
  validate(rule);

  CandidateSource source{model, observed, j, state};
  StepResult result;
  if (const auto* fixed = std::get_if<Fixed>(&rule)) {
    for (std::uint64_t attempt = 1; attempt <= options.max_attempts; ++attempt) {
      const double d = source.draw(rng, budget);
      if (d < fixed->epsilon) {
        result.value = source.value();
        result.distance = d;
        result.attempts = attempt;
        return result;
      }
    }
    throw BudgetExceeded("block '" + model.block_names[j] + "': no acceptance within the attempt cap");
  }

  const std::size_t n = std::get<BestOfN>(rule).n;
  result.distance = kInf;
  for (std::size_t k = 0; k < n; ++k) {
    const double d = source.draw(rng, budget);
    if (k == 0 || d < result.distance) {
      result.distance = d;
      result.value = source.value();
    }
  }
  result.attempts = n;
  return result;
}

ChainOutput vanilla_abc(const ModelSpec& model, const Dataset& observed, std::size_t n, const ToleranceRule& rule,
                        RngStream& rng, std::uint64_t max_attempts) {
  model.validate();
  validate(rule);
  const Eigen::VectorXd observed_summary = model.summary(observed);
  ChainOutput out = make_output(model, n, 1);

  auto draw = [&](RngStream& r, ParamState& theta) {
    theta = model.prior(r);
    const Dataset x = simulate(model, theta, r, out.budget);
    return finite_or_inf(model.distance(model.summary(x), observed_summary));
  };

  for (std::size_t i = 0; i < n; ++i) {
    RngStream r = rng.split(i);
    ParamState theta;
    ParamState best;
    double best_d = kInf;
    if (const auto* fixed = std::get_if<Fixed>(&rule)) {
      bool done = false;
      for (std::uint64_t a = 0; a < max_attempts && !done; ++a) {
        ++out.attempts[0];
        best_d = draw(r, theta);
        done = best_d < fixed->epsilon;
      }
      if (!done) throw BudgetExceeded("vanilla ABC: no acceptance within the attempt cap");
      best = std::move(theta);
    } else {
      const std::size_t table = std::get<BestOfN>(rule).n;
      for (std::size_t k = 0; k < table; ++k) {
        ++out.attempts[0];
        const double d = draw(r, theta);
        if (k == 0 || d < best_d) {
          best_d = d;
          best = theta;
        }
      }
    }
    record_row(out, static_cast<Eigen::Index>(i), best);
    out.distances(static_cast<Eigen::Index>(i), 0) = best_d;
  }
  return out;
}

ChainOutput vanilla_abc_table(const ModelSpec& model, const Dataset& observed, std::size_t table_size,
                              std::size_t keep, RngStream& rng) {
  model.validate();
  if (keep == 0 || keep > table_size) throw InvalidParameter("vanilla_abc_table: need 1 <= keep <= table_size");
  const Eigen::VectorXd observed_summary = model.summary(observed);

  // Max-heap on (distance, index) holding the best `keep` rows seen so far.
  using Entry = std::tuple<double, std::size_t, Eigen::VectorXd>;
  auto cmp = [](const Entry& a, const Entry& b) {
    return std::tie(std::get<0>(a), std::get<1>(a)) < std::tie(std::get<0>(b), std::get<1>(b));
  };
  std::priority_queue<Entry, std::vector<Entry>, decltype(cmp)> best(cmp);

  BudgetCounter budget;
  for (std::size_t k = 0; k < table_size; ++k) {
    RngStream r = rng.split(k);
    const ParamState theta = model.prior(r);
    const Dataset x = simulate(model, theta, r, budget);
    const double d = finite_or_inf(model.distance(model.summary(x), observed_summary));
    if (best.size() < keep) {
      best.emplace(d, k, theta.flatten());
    } else if (std::tie(d, k) < std::tie(std::get<0>(best.top()), std::get<1>(best.top()))) {
      best.pop();
      best.emplace(d, k, theta.flatten());
    }
  }

  ChainOutput out = make_output(model, keep, 1);
  out.budget = budget;
  out.attempts[0] = table_size;
  for (auto row = static_cast<Eigen::Index>(keep) - 1; row >= 0; --row) {
    out.samples.row(row) = std::get<2>(best.top()).transpose();
    out.distances(row, 0) = std::get<0>(best.top());
    best.pop();
  }
  return out;
}

ChainOutput abc_gibbs(const ModelSpec& model, const Dataset& observed, std::size_t n, const GibbsOptions& options,
                      const ParamState& init, RngStream& rng) {
  model.validate();
  check_options(model, options);
  check_state(model, init);

  ChainOutput out = make_output(model, n, static_cast<Eigen::Index>(model.block_count()));
  ParamState state = init;
  StepOptions step{.exact = false, .max_attempts = options.max_attempts};
  for (std::size_t i = 0; i < n; ++i) {
    RngStream r = rng.split(options.first_iteration + i);
    for (BlockIndex j = 0; j < model.block_count(); ++j) {
      step.exact = wants_exact(options, j);
      StepResult res = abc_conditional_step(model, observed, j, state, options.rules[j], r, out.budget, step);
      state[j] = std::move(res.value);
      out.distances(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = res.distance;
      out.attempts[j] += res.attempts;
    }
    record_row(out, static_cast<Eigen::Index>(i), state);
  }
  return out;
}

ChainOutput hierarchical_abc_gibbs(const ModelSpec& model, const Dataset& observed, std::size_t n,
                                   const GibbsOptions& options, const ParamState& init, RngStream& rng) {
  model.validate();
  if (!model.hierarchy) throw InvalidParameter("model '" + model.name + "' declares no hierarchy");
  check_options(model, options);
  check_state(model, init);

  // Scan order: units then hyper of each level, then the remaining blocks.
  std::vector<BlockIndex> order;
  std::vector<bool> seen(model.block_count(), false);
  for (const auto& level : model.hierarchy->levels) {
    for (BlockIndex u : level.units) order.push_back(u);
    order.push_back(level.hyper);
  }
  for (BlockIndex j : order) seen[j] = true;
  for (BlockIndex j = 0; j < model.block_count(); ++j) {
    if (!seen[j]) order.push_back(j);
  }

  ChainOutput out = make_output(model, n, static_cast<Eigen::Index>(model.block_count()));
  ParamState state = init;
  StepOptions step{.exact = false, .max_attempts = options.max_attempts};
  for (std::size_t i = 0; i < n; ++i) {
    RngStream r = rng.split(options.first_iteration + i);
    for (BlockIndex j : order) {
      step.exact = wants_exact(options, j);
      StepResult res = abc_conditional_step(model, observed, j, state, options.rules[j], r, out.budget, step);
      state[j] = std::move(res.value);
      out.distances(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = res.distance;
      out.attempts[j] += res.attempts;
    }
    record_row(out, static_cast<Eigen::Index>(i), state);
  }
  return out;
}

ChainOutput hierarchical_abc_gibbs_retention(const ModelSpec& model, const Dataset& observed, std::size_t n,
                                             double eps_alpha, RngStream& rng) {
  model.validate();
  if (!model.hierarchy || model.hierarchy->levels.size() != 1) {
    throw InvalidParameter("retention sampler needs a single-level hierarchy");
  }
  if (!model.exact_conditional) throw InvalidParameter("retention sampler needs exact unit conditionals");
  if (std::isnan(eps_alpha) || eps_alpha < 0.0) throw InvalidParameter("eps_alpha must be >= 0");
  const auto& h = *model.hierarchy;
  const auto& level = h.levels.front();

  RngStream init_rng = rng.split(0);
  ParamState state = model.prior(init_rng);

  ChainOutput out = make_output(model, n, 1);
  out.accepted.assign(n, false);
  for (std::size_t i = 0; i < n; ++i) {
    RngStream r = rng.split(i + 1);
    // mu^c ~ pi(. | alpha^(i-1), x*), exactly.
    ParamState exact_state = state;
    for (BlockIndex k : level.units) {
      auto v = model.exact_conditional(k, state, observed, r);
      if (!v) throw InvalidParameter("retention sampler: unit block without exact conditional");
      exact_state[k] = std::move(*v);
    }
    // alpha^c ~ pi, mu~ ~ pi(. | alpha^c).
    ParamState proposal = state;
    proposal[level.hyper] = model.conditional_prior(level.hyper, proposal, r);
    for (BlockIndex k : level.units) proposal[k] = model.conditional_prior(k, proposal, r);
    out.budget.book(h.hyper_cost(0));

    const double d =
        model.block_distance(level.hyper, h.hyper_summary(0, proposal), h.hyper_summary(0, exact_state));
    ++out.attempts[0];
    if (d < eps_alpha) {
      exact_state[level.hyper] = proposal[level.hyper];
      state = std::move(exact_state);
      out.accepted[i] = true;
    }
    out.distances(static_cast<Eigen::Index>(i), 0) = d;
    record_row(out, static_cast<Eigen::Index>(i), state);
  }
  return out;
}

}  // namespace abcg
