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
#include <memory>
#include <limits>
#include <vector>

#include "abcg/diagnostics.hpp"
#include "abcg/errors.hpp"
#include "abcg/models/mixture.hpp"
#include "abcg/models/normal_normal.hpp"
#include "abcg/quantile.hpp"
#include "abcg/samplers.hpp"

using namespace abcg;
using models::NormalNormalSpec;

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Two-sample Kolmogorov-Smirnov statistic.
double ks(std::vector<double> a, std::vector<double> b) {
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  std::size_t i = 0, j = 0;
  double d = 0.0;
  while (i < a.size() && j < b.size()) {
    const double x = std::min(a[i], b[j]);
    while (i < a.size() && a[i] <= x) ++i;
    while (j < b.size() && b[j] <= x) ++j;
    d = std::max(d, std::abs(double(i) / a.size() - double(j) / b.size()));
  }
  return d;
}

std::vector<double> column(const Eigen::MatrixXd& m, Eigen::Index c) { return {m.col(c).begin(), m.col(c).end()}; }

// Counts simulator calls; one-block Gaussian location model.
struct CountingModel {
  std::shared_ptr<std::uint64_t> calls = std::make_shared<std::uint64_t>(0);
  ModelSpec spec;
  CountingModel() {
    spec.name = "counting";
    spec.block_names = {"theta"};
    spec.block_dims = {1};
    spec.prior = [](RngStream& r) { return ParamState{{Eigen::VectorXd::Constant(1, r.normal())}}; };
    spec.conditional_prior = [](BlockIndex, const ParamState&, RngStream& r) {
      return Eigen::VectorXd::Constant(1, r.normal());
    };
    spec.simulator = [c = calls](const ParamState& s, RngStream& r) {
      ++*c;
      return Dataset::Constant(1, 1, s[0][0] + r.normal());
    };
    spec.sim_cost = [](const ParamState&) { return std::uint64_t{1}; };
    spec.block_summary = [](BlockIndex, const Dataset& x, const ParamState&) { return Eigen::VectorXd::Constant(1, x(0, 0)); };
    spec.block_distance = [](BlockIndex, const Eigen::VectorXd& a, const Eigen::VectorXd& b) { return std::abs(a[0] - b[0]); };
    spec.summary = [](const Dataset& x) { return Eigen::VectorXd::Constant(1, x(0, 0)); };
    spec.distance = [](const Eigen::VectorXd& a, const Eigen::VectorXd& b) { return std::abs(a[0] - b[0]); };
    spec.log_prior = [](const ParamState& s) { return -0.5 * s[0][0] * s[0][0]; };
  }
};

}  // namespace

TEST_CASE("tolerance rules are validated") {
  CHECK_THROWS_AS(validate(ToleranceRule{Fixed{-1.0}}), InvalidParameter);
  CHECK_THROWS_AS(validate(ToleranceRule{Fixed{std::nan("")}}), InvalidParameter);
  CHECK_THROWS_AS(validate(ToleranceRule{BestOfN{0}}), InvalidParameter);
  CHECK_NOTHROW(validate(ToleranceRule{Fixed{kInf}}));
}

TEST_CASE("analytic budget formulas") {
  CHECK(budget_vanilla(10000, 20, 10) == 2'200'000);
  CHECK(budget_vanilla(1, 1, 1) == 2);
  CHECK(budget_vanilla(77, 20, 0) == 77 * 20);
  CHECK(budget_gibbs(333, 20, 30, 10) == 2'197'800);
  CHECK(budget_gibbs(1, 1, 1, 1) == 2);
  CHECK(budget_gibbs(100, 20, 30, 10) == budget_gibbs(50, 20, 60, 10));
  const auto gap = budget_vanilla(10000, 20, 10) - budget_gibbs(333, 20, 30, 10);
  CHECK(gap <= 30u * 20u * 11u);
}

TEST_CASE("state flatten and unflatten round trip") {
  const ModelSpec m = models::make_normal_normal({.n = 4, .K = 3});
  RngStream r(1);
  const ParamState s = m.prior(r);
  CHECK(m.dimension() == 5);
  CHECK(m.offset(2) == 2);
  CHECK(m.unflatten(s.flatten()) == s);
  CHECK_NOTHROW(m.validate());
}

TEST_CASE("vanilla ABC with an infinite tolerance reproduces the prior") {
  const NormalNormalSpec spec{.n = 3, .K = 2};
  const ModelSpec m = models::make_normal_normal(spec);
  RngStream r(2);
  const Dataset obs = m.simulator(m.prior(r), r);
  RngStream ra(3), rb(4), rp(5);
  const ChainOutput fixed = vanilla_abc(m, obs, 10000, Fixed{kInf}, ra);
  const ChainOutput best1 = vanilla_abc(m, obs, 10000, BestOfN{1}, rb);
  std::vector<double> prior;
  for (int i = 0; i < 10000; ++i) prior.push_back(m.prior(rp)[0][0]);
  CHECK(ks(column(fixed.samples, 0), prior) < 0.03);
  CHECK(ks(column(best1.samples, 0), prior) < 0.03);
  CHECK(fixed.budget.simulations == 10000);
}

TEST_CASE("vanilla ABC with a tight tolerance approaches the exact posterior") {
  const NormalNormalSpec spec{.n = 1, .K = 5};
  // Unit mean is sufficient for a single unit, so the summary only needs the mean.
  ModelSpec m = models::make_normal_normal(spec);
  m.summary = [](const Dataset& x) { return Eigen::VectorXd::Constant(1, x.row(0).mean()); };
  RngStream r(6);
  const Dataset obs = m.simulator(models::nn_state(0.5, Eigen::VectorXd::Constant(1, 1.0)), r);
  const ChainOutput out = vanilla_abc_table(m, obs, 400000, 4000, r);
  const auto oracle = models::nn_exact_posterior_oracle(spec, obs);
  const auto a = column(out.samples, 0);
  const auto mu = column(out.samples, 1);
  CHECK(wasserstein1(a, oracle.alpha) < 0.05);
  CHECK(wasserstein1(mu, oracle.mu[0]) < 0.05);
}

TEST_CASE("conditional step accounting") {
  CountingModel cm;
  RngStream r(7);
  const Dataset obs = Dataset::Constant(1, 1, 0.3);
  const ParamState s{{Eigen::VectorXd::Constant(1, 0.0)}};

  BudgetCounter budget;
  const StepResult res = abc_conditional_step(cm.spec, obs, 0, s, BestOfN{25}, r, budget);
  CHECK(*cm.calls == 25);
  CHECK(budget.simulations == 25);
  CHECK(budget.elementary_draws == 25);
  CHECK(res.attempts == 25);

  // Recorded distance is the minimum of the table: replay the same stream.
  RngStream replay(7);
  double best = kInf;
  for (int i = 0; i < 25; ++i) {
    const double theta = replay.normal();
    const double x = theta + replay.normal();
    best = std::min(best, std::abs(x - 0.3));
  }
  CHECK(res.distance == doctest::Approx(best));
}

TEST_CASE("exact conditional steps consume no simulations") {
  const NormalNormalSpec spec{.n = 5, .K = 4};
  const ModelSpec m = models::make_normal_normal(spec);
  RngStream r(8);
  const ParamState s = m.prior(r);
  const Dataset obs = m.simulator(s, r);
  BudgetCounter budget;
  for (BlockIndex j = 0; j < m.block_count(); ++j) {
    (void)abc_conditional_step(m, obs, j, s, BestOfN{10}, r, budget, StepOptions{.exact = true});
  }
  CHECK(budget.simulations == 0);
  CHECK(budget.elementary_draws == 0);
}

TEST_CASE("one-iteration cost of hierarchical ABC-Gibbs on Normal-Normal") {
  const NormalNormalSpec spec{.n = 6, .K = 4};
  const ModelSpec m = models::make_normal_normal(spec);
  RngStream r(9);
  const ParamState init = m.prior(r);
  const Dataset obs = m.simulator(init, r);
  GibbsOptions opts;
  const std::size_t na = 7, nm = 3;
  opts.rules.assign(m.block_count(), BestOfN{nm});
  opts.rules[0] = BestOfN{na};
  const ChainOutput out = hierarchical_abc_gibbs(m, obs, 10, opts, init, r);
  CHECK(out.budget.elementary_draws == 10 * (na * spec.n + nm * spec.n * spec.K));
  CHECK(out.rows() == 10);
}

TEST_CASE("hierarchical ABC-Gibbs alpha step with a single unit and no tolerance returns prior draws") {
  const NormalNormalSpec spec{.n = 1, .K = 3};
  const ModelSpec m = models::make_normal_normal(spec);
  RngStream r(10);
  const ParamState init = m.prior(r);
  const Dataset obs = m.simulator(init, r);
  GibbsOptions opts;
  opts.rules = {Fixed{kInf}, BestOfN{1}};
  const ChainOutput out = hierarchical_abc_gibbs(m, obs, 5000, opts, init, r);
  std::vector<double> prior;
  RngStream rp(11);
  for (int i = 0; i < 5000; ++i) prior.push_back(rp.uniform(spec.alpha_lo, spec.alpha_hi));
  CHECK(ks(column(out.samples, 0), prior) < 0.04);
}

TEST_CASE("one-block ABC-Gibbs matches repeated vanilla best-of-N") {
  CountingModel cm;
  const Dataset obs = Dataset::Constant(1, 1, 1.5);
  RngStream ra(12), rb(13);
  GibbsOptions opts;
  opts.rules = {BestOfN{20}};
  const ChainOutput gibbs = abc_gibbs(cm.spec, obs, 5000, opts, ParamState{{Eigen::VectorXd::Zero(1)}}, ra);
  const ChainOutput vanilla = vanilla_abc(cm.spec, obs, 5000, BestOfN{20}, rb);
  CHECK(ks(column(gibbs.samples, 0), column(vanilla.samples, 0)) < 0.04);
  CHECK(gibbs.budget == vanilla.budget);
}

TEST_CASE("Gibbs chains are reproducible and resumable") {
  const NormalNormalSpec spec{.n = 4, .K = 3};
  const ModelSpec m = models::make_normal_normal(spec);
  RngStream r(14);
  const ParamState init = m.prior(r);
  const Dataset obs = m.simulator(init, r);
  GibbsOptions opts;
  opts.rules.assign(m.block_count(), BestOfN{5});
  RngStream a(15), b(15);
  const ChainOutput full = hierarchical_abc_gibbs(m, obs, 20, opts, init, a);
  const ChainOutput again = hierarchical_abc_gibbs(m, obs, 20, opts, init, b);
  CHECK(full.samples == again.samples);

  // Markov replay: restart from row 9 with iteration offset 10.
  GibbsOptions tail = opts;
  tail.first_iteration = 10;
  RngStream c(15);
  const ChainOutput resumed =
      hierarchical_abc_gibbs(m, obs, 10, tail, m.unflatten(full.samples.row(9).transpose()), c);
  CHECK(resumed.samples == full.samples.bottomRows(10));
}

TEST_CASE("exact Gibbs on Normal-Normal matches the quadrature posterior") {
  const NormalNormalSpec spec{.n = 5, .K = 10};
  const ModelSpec m = models::make_normal_normal(spec);
  RngStream r(16);
  const ParamState truth = m.prior(r);
  const Dataset obs = m.simulator(truth, r);
  GibbsOptions opts;
  opts.rules.assign(m.block_count(), BestOfN{1});
  opts.exact.assign(m.block_count(), true);
  const ChainOutput out = abc_gibbs(m, obs, 5000, opts, truth, r).drop_first(5);
  const auto oracle = models::nn_exact_posterior_oracle(spec, obs);
  CHECK(out.budget.simulations == 0);
  CHECK(wasserstein1(column(out.samples, 0), oracle.alpha) < 0.05);
  for (std::size_t j = 0; j < spec.n; ++j) {
    CHECK(wasserstein1(column(out.samples, Eigen::Index(j + 1)), oracle.mu[j]) < 0.05);
  }
}

TEST_CASE("retention kernel limits") {
  const NormalNormalSpec spec{.n = 4, .K = 5};
  const ModelSpec m = models::make_normal_normal(spec);
  RngStream r(17);
  const Dataset obs = m.simulator(m.prior(r), r);

  RngStream a(18);
  const ChainOutput all = hierarchical_abc_gibbs_retention(m, obs, 3000, kInf, a);
  CHECK(std::all_of(all.accepted.begin(), all.accepted.end(), [](bool b) { return b; }));
  std::vector<double> prior;
  RngStream rp(19);
  for (int i = 0; i < 3000; ++i) prior.push_back(rp.uniform(spec.alpha_lo, spec.alpha_hi));
  CHECK(ks(column(all.samples, 0), prior) < 0.05);

  RngStream b(20);
  const ChainOutput none = hierarchical_abc_gibbs_retention(m, obs, 200, 0.0, b);
  CHECK(std::none_of(none.accepted.begin(), none.accepted.end(), [](bool v) { return v; }));
  for (Eigen::Index i = 1; i < none.rows(); ++i) CHECK(none.samples.row(i) == none.samples.row(0));
}

TEST_CASE("retention kernel agrees with hierarchical ABC-Gibbs at a small tolerance") {
  const NormalNormalSpec spec{.n = 5, .K = 10};
  const ModelSpec m = models::make_normal_normal(spec);
  RngStream r(21);
  const ParamState truth = m.prior(r);
  const Dataset obs = m.simulator(truth, r);
  RngStream a(22), b(23);
  const ChainOutput ret = hierarchical_abc_gibbs_retention(m, obs, 20000, 0.05, a).drop_first(200);

  GibbsOptions opts;
  opts.rules.assign(m.block_count(), BestOfN{1});
  opts.rules[0] = Fixed{0.05};
  opts.exact.assign(m.block_count(), true);
  opts.exact[0] = false;
  const ChainOutput hier = hierarchical_abc_gibbs(m, obs, 5000, opts, truth, b).drop_first(5);
  CHECK(wasserstein1(column(ret.samples, 0), column(hier.samples, 0)) < 0.1);
}

TEST_CASE("mixture chain stays in its branch") {
  const models::MixtureUniformSpec spec;
  const ModelSpec m = models::make_mixture(spec);
  const Dataset obs = Dataset::Constant(1, 1, 5.0);
  GibbsOptions opts;
  opts.rules = {Fixed{0.5}, Fixed{0.5}};
  RngStream r(24);
  const ParamState init{{Eigen::VectorXd::Constant(1, 4.5), Eigen::VectorXd::Constant(1, 1.0)}};
  const ChainOutput out = abc_gibbs(m, obs, 10000, opts, init, r);
  for (Eigen::Index i = 0; i < out.rows(); ++i) {
    CHECK(std::abs(out.samples(i, 0) - out.samples(i, 1)) > 2.0);
    CHECK(std::abs(out.samples(i, 0) - 4.5) < 1.0);
    CHECK(std::abs(out.samples(i, 1) - 4.5) > 1.0);
  }
}

TEST_CASE("SMC-ABC invariants") {
  const NormalNormalSpec spec{.n = 2, .K = 5};
  const ModelSpec m = models::make_normal_normal(spec);
  RngStream r(25);
  const Dataset obs = m.simulator(m.prior(r), r);
  for (MoveKernel kernel : {MoveKernel::RepeatUntilHit, MoveKernel::MetropolisHastings}) {
    SmcOptions o;
    o.particles = 300;
    o.pseudo_per_particle = 3;
    o.steps = 12;
    o.kernel = kernel;
    RngStream rs(26);
    const SmcOutput out = smc_abc(m, obs, o, rs);
    REQUIRE(out.steps.size() == o.steps);
    double prev = kInf;
    for (std::size_t t = 0; t < out.steps.size(); ++t) {
      const auto& st = out.steps[t];
      CHECK(st.epsilon <= prev);
      prev = st.epsilon;
      CHECK(st.ess_after_reweight >= 1.0 - 1e-9);
      CHECK(st.ess_after_reweight <= double(o.particles) + 1e-9);
      if (st.resampled) CHECK(st.ess_after_resample == doctest::Approx(double(o.particles)));
    }
    // Particles with an empty cache below epsilon carry no weight.
    const auto& fin = out.final;
    for (std::size_t i = 0; i < fin.particles.size(); ++i) {
      const bool hit = (fin.cache.row(Eigen::Index(i)).array() < fin.epsilon).any();
      if (!hit) CHECK(fin.weights[Eigen::Index(i)] == 0.0);
    }
    CHECK(fin.weights.sum() == doctest::Approx(1.0));
  }
}

TEST_CASE("SMC-ABC is reproducible") {
  const ModelSpec m = models::make_normal_normal({.n = 2, .K = 3});
  RngStream r(27);
  const Dataset obs = m.simulator(m.prior(r), r);
  SmcOptions o;
  o.particles = 100;
  o.steps = 5;
  RngStream a(28), b(28);
  const SmcOutput x = smc_abc(m, obs, o, a);
  const SmcOutput y = smc_abc(m, obs, o, b);
  CHECK(x.final.weights == y.final.weights);
  CHECK(x.final.epsilon == y.final.epsilon);
  CHECK(x.budget == y.budget);
}

TEST_CASE("multinomial resampling follows the weights") {
  RngStream r(29);
  const Eigen::Vector4d w(0.1, 0.0, 0.6, 0.3);
  const auto idx = multinomial_resample(w, 100000, r);
  std::vector<int> counts(4, 0);
  for (auto i : idx) ++counts[i];
  CHECK(counts[1] == 0);
  CHECK(counts[2] == doctest::Approx(60000).epsilon(0.02));
  CHECK(counts[0] == doctest::Approx(10000).epsilon(0.05));
}
