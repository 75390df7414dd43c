#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "lka/errors.hpp"
#include "lka/rng.hpp"
#include "lka/serialize.hpp"
#include "lka/worlds.hpp"
#include "oracles.hpp"

using namespace lka;

namespace {

BeliefMeasure example_poll_posterior(double mu_hat) {
  // d = 10, h = 6: (1 - mu)/h on the first six, mu/(d-h) on the rest
  std::vector<double> p(10);
  for (int k = 0; k < 10; ++k)
    p[size_t(k)] = k < 6 ? (1.0 - mu_hat) / 6.0 : mu_hat / 4.0;
  return BeliefMeasure::finite_vec(WorldSpace::finite(10), std::move(p));
}

Rect seg(double a, double b) {
  Rect r;
  r.sides.push_back({a, b});
  return r;
}

}  // namespace

TEST_CASE("measure_of on finite vectors") {
  const auto space = WorldSpace::finite(10);
  const auto uniform = BeliefMeasure::uniform(space);
  CHECK(measure_of(uniform, TruthSet::of_indices(space, {5})) == doctest::Approx(0.1).epsilon(1e-14));

  // poll posterior with all mass on the northern cities
  const auto post = example_poll_posterior(1.0);
  const auto northern = TruthSet::of_indices(space, {6, 7, 8, 9});
  CHECK(measure_of(post, northern) == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(post.p[7] == doctest::Approx(0.25).epsilon(1e-14));
}

TEST_CASE("measure_of on a tilted product marginal matches quadrature") {
  const auto space = WorldSpace::cube(1);
  const double lam = std::log(4.0);
  const auto mu = BeliefMeasure::product_tilted(space, {MarginalSpec::one_tilt(lam)});
  const auto upper = TruthSet::rectangle(space, seg(0.5, 1.0));
  // density lam e^{lam x} / (e^lam - 1); closed-form mass (4 - 2)/3
  const double direct = measure_of(mu, upper);
  CHECK(direct == doctest::Approx(2.0 / 3.0).epsilon(1e-12));
  const double quad = oracles::integrate(
      [&](double x) { return lam * std::exp(lam * x) / (std::exp(lam) - 1.0); }, 0.5, 1.0);
  CHECK(std::fabs(direct - quad) <= 1e-10);
}

TEST_CASE("whole-space mass is one for every measure form") {
  const auto fs = WorldSpace::finite(7);
  const auto cs = WorldSpace::cube(2);
  const auto c1 = WorldSpace::cube(1);

  std::vector<BeliefMeasure> forms;
  forms.push_back(BeliefMeasure::uniform(fs));
  forms.push_back(BeliefMeasure::product_tilted(
      cs, {MarginalSpec::one_tilt(2.5), MarginalSpec::two_tilt(1.0, -3.0)}));
  {
    std::vector<TruthSet> blocks{TruthSet::rectangle(c1, seg(0.0, 0.25)),
                                 TruthSet::rectangle(c1, seg(0.25, 1.0))};
    auto part = std::make_shared<Partition>(Partition::of(c1, std::move(blocks)));
    forms.push_back(BeliefMeasure::piecewise(part, {0.4, 0.6}));
  }
  forms.push_back(BeliefMeasure::atom_mixture(c1, 0.5, {{0.3, 0.2}, {0.7, 0.3}}));

  for (const auto& m : forms) {
    const auto whole = TruthSet::whole(m.space);
    CHECK(std::fabs(measure_of(m, whole) - 1.0) <= 1e-12);
  }
}

TEST_CASE("finite additivity over random disjoint sets") {
  RngStream rng(123, 99);
  const auto space = WorldSpace::finite(40);
  std::vector<double> p(40);
  double sum = 0.0;
  for (auto& v : p) { v = rng.uniform(); sum += v; }
  for (auto& v : p) v /= sum;
  const auto mu = BeliefMeasure::finite_vec(space, std::move(p));
  for (int rep = 0; rep < 50; ++rep) {
    std::vector<std::uint8_t> a(40, 0), b(40, 0);
    for (int k = 0; k < 40; ++k) {
      const double u = rng.uniform();
      if (u < 0.3) a[size_t(k)] = 1;
      else if (u < 0.6) b[size_t(k)] = 1;
    }
    std::vector<std::uint8_t> un(40);
    for (int k = 0; k < 40; ++k) un[size_t(k)] = a[size_t(k)] | b[size_t(k)];
    const double lhs = measure_of(mu, TruthSet::finite_subset(space, un));
    const double rhs = measure_of(mu, TruthSet::finite_subset(space, a)) +
                       measure_of(mu, TruthSet::finite_subset(space, b));
    CHECK(std::fabs(lhs - rhs) <= 1e-10);
  }

  // cube: adjacent rectangles against their union
  const auto cs = WorldSpace::cube(2);
  const auto pt = BeliefMeasure::product_tilted(
      cs, {MarginalSpec::one_tilt(1.0), MarginalSpec::one_tilt(-2.0)});
  Rect left, right, both;
  left.sides = {{0.1, 0.4}, {0.2, 0.9}};
  right.sides = {{0.4, 0.8}, {0.2, 0.9}};
  both.sides = {{0.1, 0.8}, {0.2, 0.9}};
  const double lhs = measure_of(pt, TruthSet::rectangle(cs, both));
  const double rhs = measure_of(pt, TruthSet::rectangle(cs, left)) +
                     measure_of(pt, TruthSet::rectangle(cs, right));
  CHECK(std::fabs(lhs - rhs) <= 1e-10);
}

TEST_CASE("conditional block expectations") {
  const auto space = WorldSpace::finite(4);
  const auto uniform = BeliefMeasure::uniform(space);
  const auto part = Partition::of(
      space, {TruthSet::of_indices(space, {0, 1}), TruthSet::of_indices(space, {2, 3})});

  const auto g = TruthSet::of_indices(space, {1});
  const auto cond = conditional_block_expectation(uniform, g, part);
  CHECK(cond[0] == doctest::Approx(0.5).epsilon(1e-14));
  CHECK(cond[1] == doctest::Approx(0.0));

  // whole space conditions to one everywhere
  const auto ones = conditional_block_expectation(uniform, TruthSet::whole(space), part);
  CHECK(ones[0] == doctest::Approx(1.0));
  CHECK(ones[1] == doctest::Approx(1.0));

  // a measure that is measurable wrt the partition and a set in its field:
  // conditionals are exact indicators
  auto ppart = std::make_shared<Partition>(part);
  const auto meas = BeliefMeasure::piecewise(ppart, {0.7, 0.3});
  const auto block_set = TruthSet::of_indices(space, {2, 3});
  const auto ind = conditional_block_expectation(meas, block_set, part);
  CHECK(ind[0] == doctest::Approx(0.0));
  CHECK(ind[1] == doctest::Approx(1.0));

  // tower property: sum of block mass times conditional equals the measure
  for (double mu_hat : {0.0, 0.3, 1.0}) {
    const auto post = example_poll_posterior(mu_hat);
    const auto sp10 = WorldSpace::finite(10);
    const auto p10 = Partition::of(sp10, {TruthSet::of_indices(sp10, {0, 1, 2, 3, 4, 5}),
                                          TruthSet::of_indices(sp10, {6, 7, 8, 9})});
    const auto probe = TruthSet::of_indices(sp10, {3, 6, 7});
    bool defined = true;
    std::vector<double> cond;
    try {
      cond = conditional_block_expectation(post, probe, p10);
    } catch (const error& e) {
      defined = false;  // mu_hat in {0,1} nulls one block
      CHECK(e.kind() == "ZeroBlockMass");
    }
    if (defined) {
      double total = 0.0;
      for (size_t b = 0; b < cond.size(); ++b)
        total += measure_of(post, p10.blocks[b]) * cond[b];
      CHECK(total == doctest::Approx(measure_of(post, probe)).epsilon(1e-14));
    }
  }
}

TEST_CASE("piecewise conditionals are uniform inside a block") {
  const auto c1 = WorldSpace::cube(1);
  std::vector<TruthSet> blocks{TruthSet::rectangle(c1, seg(0.0, 0.5)),
                               TruthSet::rectangle(c1, seg(0.5, 1.0))};
  auto part = std::make_shared<Partition>(Partition::of(c1, std::move(blocks)));
  const auto m = BeliefMeasure::piecewise(part, {0.8, 0.2});
  // inside [0, 0.5] the conditional of any sub-interval is its relative length
  const double sub = measure_of(m, TruthSet::rectangle(c1, seg(0.1, 0.2)));
  const double blk = measure_of(m, TruthSet::rectangle(c1, seg(0.0, 0.5)));
  CHECK(sub / blk == doctest::Approx(0.2).epsilon(1e-12));
}

TEST_CASE("balls") {
  const auto fs = WorldSpace::finite(5);
  const auto b1 = ball(fs, MetricKind::Discrete, World::at(2), 0.5, true);
  CHECK(b1.count() == 1);
  CHECK(b1.contains(World::at(2)));
  CHECK(ball(fs, MetricKind::Discrete, World::at(2), 1.0, true).count() == 5);
  CHECK(ball(fs, MetricKind::Discrete, World::at(2), 1.0, false).count() == 1);

  const auto cs = WorldSpace::cube(2);
  const auto b2 = ball(cs, MetricKind::SupNorm, World::at(std::vector<double>{0.5, 0.5}), 0.1, true);
  CHECK(b2.rects[0].sides[0].lo == doctest::Approx(0.4));
  CHECK(b2.rects[0].sides[1].hi == doctest::Approx(0.6));

  const auto c1 = WorldSpace::cube(1);
  const auto b3 = ball(c1, MetricKind::SupNorm, World::at(std::vector<double>{0.05}), 0.1, true);
  CHECK(b3.rects[0].sides[0].lo == doctest::Approx(0.0));
  CHECK(b3.rects[0].sides[0].hi == doctest::Approx(0.15));
}

TEST_CASE("partition validation catches overlaps and gaps") {
  const auto space = WorldSpace::finite(4);
  CHECK_THROWS_AS(Partition::of(space, {TruthSet::of_indices(space, {0, 1}),
                                        TruthSet::of_indices(space, {1, 2, 3})}),
                  error);
  CHECK_THROWS_AS(Partition::of(space, {TruthSet::of_indices(space, {0, 1}),
                                        TruthSet::of_indices(space, {2})}),
                  error);
  const auto c1 = WorldSpace::cube(1);
  CHECK_THROWS_AS(Partition::of(c1, {TruthSet::rectangle(c1, seg(0.0, 0.6)),
                                     TruthSet::rectangle(c1, seg(0.5, 1.0))}),
                  error);
}

TEST_CASE("point-mass detection by form") {
  const auto fs = WorldSpace::finite(4);
  std::vector<double> p{0.0, 1.0, 0.0, 0.0};
  CHECK(BeliefMeasure::finite_vec(fs, p).is_point_mass_at(World::at(1)));
  CHECK_FALSE(BeliefMeasure::finite_vec(fs, p).is_point_mass_at(World::at(2)));

  const auto c1 = WorldSpace::cube(1);
  const auto am = BeliefMeasure::atom_mixture(c1, 0.0, {{0.25, 1.0}});
  CHECK(am.is_point_mass_at(World::at(std::vector<double>{0.25})));
  CHECK_FALSE(BeliefMeasure::uniform(c1).is_point_mass_at(World::at(std::vector<double>{0.25})));
}

TEST_CASE("serialization round-trips with the documented field names") {
  const auto fs = WorldSpace::finite(3);
  const auto m1 = BeliefMeasure::finite_vec(fs, {0.2, 0.3, 0.5});
  const json j1 = to_json(m1);
  CHECK(j1.contains("p"));
  CHECK(j1["space"]["kind"] == "finite");
  CHECK(j1["space"].contains("d"));
  const auto back1 = measure_from_json(j1);
  CHECK(back1.p[2] == doctest::Approx(0.5));

  const auto c2 = WorldSpace::cube(2);
  const auto t = TruthSet::rectangle(c2, Rect{{{0.1, 0.4}, {0.0, 1.0}}});
  const json j2 = to_json(t);
  CHECK(j2.contains("intervals"));
  CHECK(j2["space"].contains("r"));
  const auto back2 = truthset_from_json(j2);
  CHECK(back2.rects[0].sides[0].hi == doctest::Approx(0.4));

  const auto c1 = WorldSpace::cube(1);
  const auto m2 = BeliefMeasure::product_tilted(c1, {MarginalSpec::two_tilt(1.0, -2.0)});
  const json j3 = to_json(m2);
  CHECK(j3.contains("marginals"));
  const auto back3 = measure_from_json(j3);
  CHECK(back3.marginals[0].lam2 == doctest::Approx(-2.0));

  const auto m3 = BeliefMeasure::atom_mixture(c1, 0.5, {{0.3, 0.5}});
  const json j4 = to_json(m3);
  CHECK(j4.contains("p0"));
  CHECK(j4.contains("atoms"));

  std::vector<TruthSet> blocks{TruthSet::rectangle(c1, seg(0.0, 0.5)),
                               TruthSet::rectangle(c1, seg(0.5, 1.0))};
  auto part = std::make_shared<Partition>(Partition::of(c1, std::move(blocks)));
  const auto m4 = BeliefMeasure::piecewise(part, {0.25, 0.75});
  const json j5 = to_json(m4);
  CHECK(j5.contains("blocks"));
  CHECK(j5.contains("blockProbs"));
  const auto back5 = measure_from_json(j5);
  CHECK(measure_of(back5, TruthSet::rectangle(c1, seg(0.5, 1.0))) == doctest::Approx(0.75));
}

TEST_CASE("space mismatch raises") {
  const auto a = WorldSpace::finite(3);
  const auto b = WorldSpace::finite(4);
  const auto mu = BeliefMeasure::uniform(a);
  CHECK_THROWS_AS(measure_of(mu, TruthSet::whole(b)), error);
}

TEST_CASE("partition serialization round-trips") {
  const auto c1 = WorldSpace::cube(1);
  std::vector<TruthSet> blocks{TruthSet::rectangle(c1, Rect{{{0.0, 0.3}}}),
                               TruthSet::rectangle(c1, Rect{{{0.3, 1.0}}})};
  const auto part = Partition::of(c1, std::move(blocks));
  const json j = to_json(part);
  CHECK(j.contains("blocks"));
  const auto back = partition_from_json(j, c1);
  CHECK(back.blocks.size() == 2);
  CHECK(back.blocks[1].rects[0].sides[0].lo == doctest::Approx(0.3));
}
