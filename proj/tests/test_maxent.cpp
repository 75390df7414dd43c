#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "lka/errors.hpp"
#include "lka/maxent.hpp"
#include "lka/rng.hpp"
#include "lka/tilted.hpp"
#include "lka/tv.hpp"
#include "oracles.hpp"

using namespace lka;

namespace {

Rect seg(double a, double b) {
  Rect r;
  r.sides.push_back({a, b});
  return r;
}

// two worlds, one binary feature
struct TwoWorld {
  WorldSpace space = WorldSpace::finite(2);
  BeliefMeasure prior = BeliefMeasure::uniform(space);
  FeatureSet features = FeatureSet::finite(space, 1, {0.0, 1.0});
};

FeatureSet random_binary_features(int d, int n, RngStream& rng) {
  std::vector<double> F(size_t(d) * size_t(n));
  for (auto& v : F) v = rng.bernoulli(0.5) ? 1.0 : 0.0;
  return FeatureSet::finite(WorldSpace::finite(d), n, std::move(F));
}

}  // namespace

TEST_CASE("log partition basics") {
  TwoWorld w;
  GibbsPosterior zero{w.prior, w.features, {0.0}, "none"};
  CHECK(log_partition(zero, TruthSet::whole(w.space)) == doctest::Approx(0.0).epsilon(1e-14));

  GibbsPosterior g{w.prior, w.features, {std::log(4.0)}, "none"};
  CHECK(log_partition(g, TruthSet::of_indices(w.space, {1})) ==
        doctest::Approx(std::log(2.0)).epsilon(1e-14));
  CHECK(log_partition(g, TruthSet::of_indices(w.space, {})) == -HUGE_VAL);
}

TEST_CASE("log partition under the sum-to-n exponential gauge") {
  // ten interval indicators with sum e^{lambda_i} = n makes Z exactly one
  const auto space = WorldSpace::cube(1);
  std::vector<CoordFeature> fs;
  std::vector<double> mu_hat{0.05, 0.15, 0.08, 0.12, 0.1, 0.1, 0.06, 0.14, 0.11, 0.09};
  std::vector<double> lam(10);
  for (int i = 0; i < 10; ++i) {
    fs.push_back(CoordFeature::box_indicator(seg(i / 10.0, (i + 1) / 10.0)));
    lam[size_t(i)] = std::log(10.0 * mu_hat[size_t(i)]);
  }
  GibbsPosterior g{BeliefMeasure::uniform(space), FeatureSet::cube(space, fs), lam, "none"};
  CHECK(std::fabs(log_partition(g, TruthSet::whole(space))) <= 1e-12);
}

TEST_CASE("moments") {
  const auto space = WorldSpace::finite(10);
  std::vector<double> F(10, 0.0);
  for (int k = 6; k < 10; ++k) F[size_t(k)] = 1.0;
  const auto features = FeatureSet::finite(space, 1, F);
  CHECK(moments(BeliefMeasure::uniform(space), features)[0] == doctest::Approx(0.4).epsilon(1e-14));

  // point mass reproduces the feature value
  std::vector<double> delta(10, 0.0);
  delta[7] = 1.0;
  CHECK(moments(BeliefMeasure::finite_vec(space, delta), features)[0] == doctest::Approx(1.0));

  // one-tilt mean formula against the independent integrator
  for (double lam : {-7.0, -0.5, 1e-6, 0.3, 4.0, 30.0}) {
    const double closed = one_tilt_mean(lam);
    const double z = oracles::integrate(
        [&](double x) { return std::exp(lam * x); }, 0.0, 1.0);
    const double m = oracles::integrate(
        [&](double x) { return x * std::exp(lam * x); }, 0.0, 1.0);
    CHECK(std::fabs(closed - m / z) <= 1e-10);
  }
}

TEST_CASE("fit on two worlds inverts the logit") {
  TwoWorld w;
  auto [g, rep] = fit_lambda(w.prior, w.features, {0.8});
  CHECK(rep.feasibility == Feasibility::Interior);
  CHECK(std::fabs(g.lambda[0] - 1.3862943611198906) <= 1e-9);
  CHECK(rep.final_grad_norm <= 1e-10);

  // prior is its own projection
  auto [g0, rep0] = fit_lambda(w.prior, w.features, {0.5});
  CHECK(std::fabs(g0.lambda[0]) <= 1e-9);
  CHECK(measure_of(g0.to_measure(), TruthSet::of_indices(w.space, {0})) ==
        doctest::Approx(0.5).epsilon(1e-12));
}

TEST_CASE("poll closed form via the generic fit") {
  const auto space = WorldSpace::finite(10);
  std::vector<double> F(10, 0.0);
  for (int k = 6; k < 10; ++k) F[size_t(k)] = 1.0;
  const auto features = FeatureSet::finite(space, 1, F);
  const auto prior = BeliefMeasure::uniform(space);

  SUBCASE("interior target") {
    auto [g, rep] = fit_lambda(prior, features, {0.7});
    const auto q = g.to_measure();
    for (int k = 0; k < 10; ++k)
      CHECK(q.p[size_t(k)] ==
            doctest::Approx(k < 6 ? 0.3 / 6.0 : 0.7 / 4.0).epsilon(1e-10));
  }
  SUBCASE("boundary target mu = 1") {
    auto [g, rep] = fit_lambda(prior, features, {1.0});
    CHECK(rep.feasibility == Feasibility::Boundary);
    const auto q = g.to_measure();
    CHECK(q.p[7] == doctest::Approx(0.25).epsilon(1e-11));
    CHECK(measure_of(q, TruthSet::of_indices(space, {6, 7, 8, 9})) >= 1.0 - 1e-9);
    CHECK(rep.achieved_moments[0] >= 1.0 - 1e-9);
  }
  SUBCASE("infeasible target") {
    auto [g, rep] = fit_lambda(prior, features, {1.5});
    CHECK(rep.feasibility == Feasibility::Infeasible);
  }
}

TEST_CASE("gauge fixing for features that sum to one") {
  const auto space = WorldSpace::finite(4);
  std::vector<double> F(16, 0.0);
  for (int k = 0; k < 4; ++k) F[size_t(k * 4 + k)] = 1.0;
  const auto features = FeatureSet::finite(space, 4, F);
  const auto prior = BeliefMeasure::uniform(space);
  const std::vector<double> target{0.1, 0.2, 0.3, 0.4};
  auto [g, rep] = fit_lambda(prior, features, target);
  CHECK(rep.gauge == "zero-mean");
  CHECK(rep.final_grad_norm <= 1e-10);
  double mean = 0.0;
  for (double v : g.lambda) mean += v / 4.0;
  CHECK(std::fabs(mean) <= 1e-12);
  const auto q = g.to_measure();
  for (int k = 0; k < 4; ++k)
    CHECK(q.p[size_t(k)] == doctest::Approx(target[size_t(k)]).epsilon(1e-9));

  // adding a constant to every coefficient leaves the measure unchanged
  std::vector<double> shifted = g.lambda;
  for (auto& v : shifted) v += 3.7;
  GibbsPosterior gs{prior, features, shifted, "none"};
  CHECK(total_variation(g.to_measure(), gs.to_measure()) <= 1e-12);
}

TEST_CASE("dual convexity along random segments") {
  RngStream rng(2024, 5);
  const auto space = WorldSpace::finite(8);
  const auto prior = BeliefMeasure::uniform(space);
  for (int rep = 0; rep < 20; ++rep) {
    const auto features = random_binary_features(8, 3, rng);
    std::vector<double> la(3), lb(3), lm(3);
    for (int i = 0; i < 3; ++i) {
      la[size_t(i)] = 4.0 * (rng.uniform() - 0.5);
      lb[size_t(i)] = 4.0 * (rng.uniform() - 0.5);
      lm[size_t(i)] = 0.5 * (la[size_t(i)] + lb[size_t(i)]);
    }
    const auto whole = TruthSet::whole(space);
    const double za = log_partition({prior, features, la, "none"}, whole);
    const double zb = log_partition({prior, features, lb, "none"}, whole);
    const double zm = log_partition({prior, features, lm, "none"}, whole);
    CHECK(zm <= 0.5 * (za + zb) + 1e-12);
  }
}

TEST_CASE("maximum likelihood equals moment matching") {
  RngStream rng(7, 42);
  const auto space = WorldSpace::finite(4);
  const auto prior = BeliefMeasure::uniform(space);
  const auto features = FeatureSet::finite(space, 2, {0, 0, 0, 1, 1, 0, 1, 1});

  // degenerate sample concentrates on the matching cell
  {
    std::vector<World> sample(50, World::at(3));
    auto [g, rep] = mle_lambda(prior, features, sample);
    CHECK(rep.feasibility == Feasibility::Boundary);
    CHECK(g.to_measure().p[3] >= 1.0 - 1e-9);
  }

  // empirical moments equal to prior moments give lambda = 0
  {
    std::vector<World> sample{World::at(0), World::at(1), World::at(2), World::at(3)};
    auto [g, rep] = mle_lambda(prior, features, sample);
    for (double v : g.lambda) CHECK(std::fabs(v) <= 1e-9);
  }

  // equivalence with the explicit empirical-moment fit
  {
    const GibbsPosterior truth{prior, features, {0.8, -0.4}, "none"};
    const auto p = truth.to_measure();
    std::vector<double> cdf(4);
    double acc = 0.0;
    for (int k = 0; k < 4; ++k) { acc += p.p[size_t(k)]; cdf[size_t(k)] = acc; }
    std::vector<World> sample;
    for (int j = 0; j < 500; ++j) sample.push_back(World::at(rng.from_cdf(cdf)));
    auto [g1, r1] = mle_lambda(prior, features, sample);
    auto [g2, r2] = fit_lambda(prior, features, empirical_moments(features, sample));
    for (int i = 0; i < 2; ++i) CHECK(std::fabs(g1.lambda[size_t(i)] - g2.lambda[size_t(i)]) <= 1e-9);
  }
}

TEST_CASE("maximum likelihood error shrinks like one over root m") {
  RngStream seeder(7, 1000);
  const auto space = WorldSpace::finite(4);
  const auto prior = BeliefMeasure::uniform(space);
  const auto features = FeatureSet::finite(space, 2, {0, 0, 0, 1, 1, 0, 1, 1});
  const std::vector<double> lam_true{0.6, -0.9};
  const GibbsPosterior truth{prior, features, lam_true, "none"};
  const auto p = truth.to_measure();
  std::vector<double> cdf(4);
  double acc = 0.0;
  for (int k = 0; k < 4; ++k) { acc += p.p[size_t(k)]; cdf[size_t(k)] = acc; }

  std::vector<double> med_errs;
  for (long m : {100L, 1000L, 10000L}) {
    std::vector<double> errs;
    for (int rep = 0; rep < 31; ++rep) {
      RngStream rng(7, 2000, std::uint64_t(m), std::uint64_t(rep));
      std::vector<World> sample;
      for (long j = 0; j < m; ++j) sample.push_back(World::at(rng.from_cdf(cdf)));
      auto [g, r] = mle_lambda(prior, features, sample);
      if (r.feasibility != Feasibility::Interior) continue;
      double e = 0.0;
      for (int i = 0; i < 2; ++i)
        e = std::max(e, std::fabs(g.lambda[size_t(i)] - lam_true[size_t(i)]));
      errs.push_back(e);
    }
    std::sort(errs.begin(), errs.end());
    med_errs.push_back(errs[errs.size() / 2]);
  }
  const double slope = (std::log(med_errs[2]) - std::log(med_errs[0])) /
                       (std::log(10000.0) - std::log(100.0));
  CHECK(slope >= -0.6);
  CHECK(slope <= -0.4);
}

TEST_CASE("kl optimality against a constrained grid") {
  // d = 3, one feature: the feasible set is a segment in the simplex
  const auto space = WorldSpace::finite(3);
  const auto prior = BeliefMeasure::finite_vec(space, {0.5, 0.3, 0.2});
  const auto features = FeatureSet::finite(space, 1, {0.0, 0.5, 1.0});
  const double target = 0.4;
  auto [g, rep] = fit_lambda(prior, features, {target});
  const double fitted_kl = kl_divergence(g.to_measure(), prior);

  // parametrize q on the constraint line through the simplex
  double best = HUGE_VAL;
  const int grid = 200000;
  for (int i = 1; i < grid; ++i) {
    const double q2 = double(i) / grid;  // q = (q0, q1, q2)
    const double q1 = 2.0 * (target - q2);
    const double q0 = 1.0 - q1 - q2;
    if (q1 <= 0.0 || q0 <= 0.0) continue;
    const double kl = q0 * std::log(q0 / 0.5) + q1 * std::log(q1 / 0.3) +
                      q2 * std::log(q2 / 0.2);
    best = std::min(best, kl);
  }
  CHECK(fitted_kl <= best + 1e-6);
}

TEST_CASE("tilted marginal cdf") {
  CHECK(tilted_marginal_cdf(MarginalSpec::uniform(), 0.3) == doctest::Approx(0.3));
  // continuity at tiny tilts
  for (double lam : {1e-9, -1e-9, 1e-12}) {
    const auto m = MarginalSpec::one_tilt(lam);
    for (double x : {0.1, 0.5, 0.9})
      CHECK(std::fabs(tilted_marginal_cdf(m, x) - x) <= 1e-8);
  }
  CHECK(tilted_marginal_cdf(MarginalSpec::one_tilt(3.0), 0.0) == doctest::Approx(0.0));
  CHECK(tilted_marginal_cdf(MarginalSpec::one_tilt(3.0), 1.0) == doctest::Approx(1.0));

  // sharp two-tilt centered at 0.7: median sits at the mode
  const double c = 200.0, mu = 0.7;
  const auto tt = MarginalSpec::two_tilt(2.0 * mu * c, -c);
  CHECK(std::fabs(tilted_marginal_cdf(tt, 0.7) - 0.5) <= 2e-3);
  // against the independent integrator (exponent shifted by its mode value)
  auto f = [&](double t) { return std::exp(2.0 * mu * c * t - c * t * t - mu * mu * c); };
  const double z = oracles::integrate(f, 0.0, 1.0);
  const double part = oracles::integrate(f, 0.0, 0.55);
  CHECK(std::fabs(tilted_marginal_cdf(tt, 0.55) - part / z) <= 1e-9);
}

TEST_CASE("two-tilt fit reproduces tight posterior moments") {
  const auto space = WorldSpace::cube(1);
  const auto prior = BeliefMeasure::uniform(space);
  const auto features = FeatureSet::cube(
      space, {CoordFeature::linear(0), CoordFeature::quadratic(0)});
  const double x0 = 0.3;
  const long N = 10000;
  const double m1 = x0, m2 = x0 * x0 + x0 * (1.0 - x0) / double(N);
  auto [g, rep] = fit_lambda(prior, features, {m1, m2});
  CHECK(rep.final_grad_norm <= 1e-9);
  const auto post = g.to_measure();
  const auto mass = measure_of(post, TruthSet::rectangle(space, seg(x0 - 0.05, x0 + 0.05)));
  CHECK(mass >= 0.99);
  const auto mom = moments(post, features);
  CHECK(std::fabs(mom[0] - m1) <= 1e-9);
  CHECK(std::fabs(mom[1] - m2) <= 1e-9);
}

TEST_CASE("500 random interior fixtures meet the moment tolerance") {
  // small-scale version of the acceptance gate, for fast feedback
  RngStream rng(99, 77);
  const int trials = 60;
  for (int t = 0; t < trials; ++t) {
    const int d = 3 + int(rng.uniform() * 18);
    const int n = 1 + int(rng.uniform() * 3);
    std::vector<double> F(size_t(d) * size_t(n));
    for (auto& v : F) v = rng.uniform();
    const auto features = FeatureSet::finite(WorldSpace::finite(d), n, F);
    const auto prior = BeliefMeasure::uniform(features.space);
    std::vector<double> lam_star(static_cast<std::size_t>(n));
    for (auto& v : lam_star) v = 8.0 * (rng.uniform() - 0.5);
    GibbsPosterior star{prior, features, lam_star, "none"};
    const auto target = moments(star.to_measure(), features);
    auto [g, rep] = fit_lambda(prior, features, target);
    CHECK(rep.feasibility == Feasibility::Interior);
    CHECK(rep.iterations <= 200);
    double gap = 0.0;
    const auto got = moments(g.to_measure(), features);
    for (int i = 0; i < n; ++i) gap = std::max(gap, std::fabs(got[size_t(i)] - target[size_t(i)]));
    CHECK(gap <= 1e-9);
  }
}
