#include "lka/scenarios.hpp"

#include <algorithm>
#include <cmath>

#include "lka/errors.hpp"
#include "lka/rng.hpp"
#include "lka/tilted.hpp"

namespace lka {

// ---------------------------------------------------------------------------
// poll

void PollScenario::validate() const {
  require(h >= 1 && h < d, "ConfigInvalid", "h must be < d (and at least 1)");
  require(eps > 0.0 && eps < 1.0, "ConfigInvalid", "eps must lie in (0,1)");
  require(x0 >= 0 && x0 < d, "ConfigInvalid", "x0 must name a city");
  if (biased)
    require(delta >= 0.0 && delta < 0.5, "ConfigInvalid", "delta must lie in [0, 0.5)");
}

TruthSet PollScenario::northern_set() const {
  std::vector<std::uint8_t> mask(static_cast<std::size_t>(d), 0);
  for (int k = h; k < d; ++k) mask[size_t(k)] = 1;
  return TruthSet::finite_subset(space(), std::move(mask));
}

double poll_mu_hat(const PollScenario& s, const std::vector<int>& data) {
  bool saw1 = false, saw2 = false;
  for (int v : data) {
    require(v >= 0 && v <= 2, "ConfigInvalid", "poll outcomes are 0, 1 or 2");
    saw1 |= (v == 1);
    saw2 |= (v == 2);
  }
  require(!(saw1 && saw2), "InconsistentPollData",
          "the subject answered both southern and northern");
  if (saw2) return 1.0;
  if (saw1) return 0.0;
  return double(s.d - s.h) / double(s.d);
}

BeliefMeasure poll_posterior(const PollScenario& s, double mu_hat) {
  std::vector<double> p(static_cast<std::size_t>(s.d));
  for (int k = 0; k < s.d; ++k)
    p[size_t(k)] = s.northern(k) ? mu_hat / double(s.d - s.h)
                                 : (1.0 - mu_hat) / double(s.h);
  return BeliefMeasure::finite_vec(s.space(), std::move(p));
}

BeliefMeasure poll_biased_prior(const PollScenario& s) {
  // city sizes proportional to their index (1-based)
  std::vector<double> p(static_cast<std::size_t>(s.d));
  const double norm = double(s.d) * double(s.d + 1);
  for (int k = 0; k < s.d; ++k) p[size_t(k)] = 2.0 * double(k + 1) / norm;
  return BeliefMeasure::finite_vec(s.space(), std::move(p));
}

BeliefMeasure poll_biased_posterior(const PollScenario& s, double mu_tilde) {
  std::vector<double> p(static_cast<std::size_t>(s.d));
  const double dh = double(s.d - s.h), hh = double(s.h);
  for (int k = 0; k < s.d; ++k) {
    const double kk = double(k + 1);
    p[size_t(k)] = s.northern(k)
                       ? 2.0 * kk * mu_tilde / (dh * double(s.d + s.h + 1))
                       : 2.0 * kk * (1.0 - mu_tilde) / (hh * double(s.h + 1));
  }
  return BeliefMeasure::finite_vec(s.space(), std::move(p));
}

PollResult poll_simulate(const PollScenario& s, long N, std::uint64_t seed,
                         long replicate) {
  s.validate();
  require(N >= 1, "ConfigInvalid", "need at least one poll");
  RngStream rng(seed, std::uint64_t(StreamId::Poll), std::uint64_t(replicate));
  PollResult out;
  out.data.resize(static_cast<std::size_t>(N));
  const int answer = s.northern(s.x0) ? 2 : 1;  // truthful subject
  for (long k = 0; k < N; ++k)
    out.data[size_t(k)] = rng.bernoulli(s.eps) ? answer : 0;
  out.mu_hat = poll_mu_hat(s, out.data);
  out.posterior = poll_posterior(s, out.mu_hat);
  if (s.biased) {
    bool included = false;
    for (int v : out.data) included |= (v != 0);
    if (!included) out.mu_tilde = double(s.d - s.h) / double(s.d);
    else out.mu_tilde = (answer == 2) ? 1.0 - s.delta : s.delta;
    out.biased_posterior = poll_biased_posterior(s, out.mu_tilde);
  }
  return out;
}

// ---------------------------------------------------------------------------
// coins

void CoinCubeScenario::validate() const {
  require(r >= 1, "ConfigInvalid", "need at least one coordinate");
  require(features_per_coord == 1 || features_per_coord == 2, "ConfigInvalid",
          "featuresPerCoord must be 1 or 2");
  require(int(x0.size()) == r, "ConfigInvalid", "x0 needs one entry per coordinate");
  for (double v : x0)
    require(v >= 0.0 && v <= 1.0, "ConfigInvalid", "heads probabilities live in [0,1]");
  if (truth) {
    require(int(truth->sides.size()) == r, "ConfigInvalid", "truth rectangle dimension");
    for (const auto& iv : truth->sides)
      require(0.0 <= iv.lo && iv.lo <= iv.hi && iv.hi <= 1.0, "ConfigInvalid",
              "truth rectangle sides");
  }
}

FeatureSet CoinCubeScenario::features() const {
  std::vector<CoordFeature> fs;
  for (int i = 0; i < r; ++i) {
    fs.push_back(CoordFeature::linear(i));
    if (features_per_coord == 2) fs.push_back(CoordFeature::quadratic(i));
  }
  return FeatureSet::cube(space(), std::move(fs));
}

CoinResult coin_simulate(const CoinCubeScenario& s, long N, std::uint64_t seed,
                         long replicate) {
  s.validate();
  require(N >= 1, "ConfigInvalid", "need at least one flip");
  require(s.features_per_coord == 1 || N >= 2, "ConfigInvalid",
          "two features per coordinate need N >= 2");
  RngStream rng(seed, std::uint64_t(StreamId::Coin), std::uint64_t(replicate));
  CoinResult out;
  out.d_bar.assign(static_cast<std::size_t>(s.r), 0.0);
  for (long k = 0; k < N; ++k)
    for (int i = 0; i < s.r; ++i)
      out.d_bar[size_t(i)] += rng.bernoulli(s.x0[size_t(i)]) ? 1.0 : 0.0;
  for (double& v : out.d_bar) v /= double(N);

  for (int i = 0; i < s.r; ++i) {
    out.mu_hat.push_back(out.d_bar[size_t(i)]);
    if (s.features_per_coord == 2) {
      const double m = out.d_bar[size_t(i)];
      out.mu_hat.push_back(m * m + m * (1.0 - m) / double(N));
    }
  }
  auto [g, rep] = fit_lambda(BeliefMeasure::uniform(s.space()), s.features(), out.mu_hat);
  out.posterior = g.to_measure();
  out.fit = std::move(rep);
  return out;
}

BeliefMeasure coin_limit_posterior(const CoinCubeScenario& s) {
  s.validate();
  require(s.features_per_coord == 1, "NotSupported",
          "the two-feature limit is a point mass; use ball masses instead");
  std::vector<MarginalSpec> marg;
  for (int i = 0; i < s.r; ++i) {
    bool boundary = false;
    marg.push_back(
        MarginalSpec::one_tilt(one_tilt_solve_mean(s.x0[size_t(i)], 1e8, &boundary)));
  }
  return BeliefMeasure::product_tilted(s.space(), std::move(marg));
}

double one_tilt_sup_mass(double a, double b) {
  require(0.0 <= a && a < b && b <= 1.0, "ConfigInvalid", "need 0 <= a < b <= 1");
  if (a == 0.0 || b == 1.0) return 1.0;
  // unimodal in lambda; coarse grid then golden-section refinement
  auto mass = [&](double lam) { return one_tilt_mass(lam, a, b); };
  double best_lam = 0.0, best = mass(0.0);
  for (double lam = -2000.0; lam <= 2000.0; lam += 10.0)
    if (mass(lam) > best) {
      best = mass(lam);
      best_lam = lam;
    }
  double lo = best_lam - 10.0, hi = best_lam + 10.0;
  const double gr = 0.5 * (std::sqrt(5.0) - 1.0);
  double x1 = hi - gr * (hi - lo), x2 = lo + gr * (hi - lo);
  double f1 = mass(x1), f2 = mass(x2);
  for (int it = 0; it < 200 && hi - lo > 1e-10; ++it) {
    if (f1 < f2) {
      lo = x1; x1 = x2; f1 = f2;
      x2 = lo + gr * (hi - lo); f2 = mass(x2);
    } else {
      hi = x2; x2 = x1; f2 = f1;
      x1 = hi - gr * (hi - lo); f1 = mass(x1);
    }
  }
  return mass(0.5 * (lo + hi));
}

// ---------------------------------------------------------------------------
// decimal cells

void DecimalScenario::validate() const {
  require(n == 10 || n == 100, "ConfigInvalid", "n must be 10 or 100");
  require(x0 >= 0.0 && x0 < 1.0, "ConfigInvalid", "x0 must lie in [0,1)");
}

std::shared_ptr<const Partition> DecimalScenario::cells() const {
  std::vector<TruthSet> blocks;
  const WorldSpace sp = space();
  for (int i = 0; i < n; ++i) {
    Rect r;
    r.sides.push_back({double(i) / n, double(i + 1) / n});
    blocks.push_back(TruthSet::rectangle(sp, r));
  }
  return std::make_shared<Partition>(Partition::of(sp, std::move(blocks)));
}

FeatureSet DecimalScenario::features() const {
  std::vector<CoordFeature> fs;
  for (int i = 0; i < n; ++i) {
    Rect r;
    r.sides.push_back({double(i) / n, double(i + 1) / n});
    fs.push_back(CoordFeature::box_indicator(r));
  }
  return FeatureSet::cube(space(), std::move(fs));
}

TruthSet decimal_first_is(const WorldSpace& space, int digit) {
  Rect r;
  r.sides.push_back({digit / 10.0, (digit + 1) / 10.0});
  return TruthSet::rectangle(space, r);
}

TruthSet decimal_second_is(const WorldSpace& space, int digit) {
  std::vector<Rect> rs;
  for (int i = 0; i < 10; ++i) {
    Rect r;
    r.sides.push_back({(10 * i + digit) / 100.0, (10 * i + digit + 1) / 100.0});
    rs.push_back(r);
  }
  return TruthSet::rectangle_union(space, std::move(rs));
}

DecimalResult decimal_posterior(const DecimalScenario& s, long N, std::uint64_t seed,
                                long replicate) {
  s.validate();
  require(N >= 1, "ConfigInvalid", "need at least one flip");
  RngStream rng(seed, std::uint64_t(StreamId::Decimal), std::uint64_t(replicate));
  DecimalResult out;
  out.d_bar = double(rng.binomial(N, s.x0)) / double(N);

  auto part = s.cells();
  const int cell = std::min(int(out.d_bar * s.n), s.n - 1);
  out.mu_hat.assign(static_cast<std::size_t>(s.n), 0.0);
  out.mu_hat[size_t(cell)] = 1.0;
  out.posterior = BeliefMeasure::piecewise(part, out.mu_hat);

  const double scaled = out.d_bar * s.n;
  out.boundary_ambiguous =
      std::fabs(scaled - std::round(scaled)) / s.n < 1.0 / std::sqrt(double(N));

  const WorldSpace sp = s.space();
  const BeliefMeasure prior = BeliefMeasure::uniform(sp);
  const World x0 = World::at(std::vector<double>{s.x0});
  out.report_first = lka_verdict(prior, out.posterior, decimal_first_is(sp, 5), x0,
                                 MetricKind::SupNorm, default_eps_grid(sp));
  out.report_second = lka_verdict(prior, out.posterior, decimal_second_is(sp, 5), x0,
                                  MetricKind::SupNorm, default_eps_grid(sp));

  // exact-rational evaluation of the second-decimal active information:
  // each first-decimal cell holds exactly 1/10 of the target, so for n = 10
  // the posterior probability is 0.1 for every mu_hat and the information is
  // literally zero
  if (s.n == 10) {
    double pt = 0.0;
    for (int j = 0; j < s.n; ++j) pt += out.mu_hat[size_t(j)];
    pt *= 0.1;
    out.info_second_closed = std::log(pt) - std::log(0.1);
  } else {
    double pt = 0.0;
    for (int j = 0; j < s.n; ++j)
      if (j % 10 == 5) pt += out.mu_hat[size_t(j)];
    if (pt <= 0.0) out.info_second_closed = -HUGE_VAL;
    else out.info_second_closed = std::log(pt) - std::log(0.1);
  }

  // ball bound P(B_eps(x0)) <= 1/2 + n eps for eps < 1/(2n), valid when the
  // data landed in x0's own cell
  const int x0_cell = std::min(int(s.x0 * s.n), s.n - 1);
  if (x0_cell == cell) {
    for (double frac : {0.1, 0.3, 0.5, 0.7, 0.9}) {
      DecimalBallBound bb;
      bb.eps = frac / (2.0 * s.n);
      bb.ball_mass =
          measure_of(out.posterior, ball(sp, MetricKind::SupNorm, x0, bb.eps, false));
      bb.bound = 0.5 + s.n * bb.eps;
      out.ball_bounds.push_back(bb);
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// recursive binary tree

void TreeScenario::validate() const {
  require(r >= 1, "InvalidTree", "tree needs r >= 1");
  require(!nodes.empty(), "InvalidTree", "tree needs nodes");
  require(root >= 0 && root < int(nodes.size()), "InvalidTree", "bad root index");
  std::vector<int> state(nodes.size(), 0);
  // DFS: every node reachable at most once, children paired and in range
  std::vector<int> stack{root};
  int seen = 0;
  while (!stack.empty()) {
    const int t = stack.back();
    stack.pop_back();
    require(t >= 0 && t < int(nodes.size()), "InvalidTree", "child index out of range");
    require(state[size_t(t)] == 0, "InvalidTree", "node visited twice (cycle or share)");
    state[size_t(t)] = 1;
    ++seen;
    const TreeNode& nd = nodes[size_t(t)];
    const bool has_l = nd.left >= 0, has_r = nd.right >= 0;
    require(has_l == has_r, "InvalidTree", "interior nodes need exactly two children");
    if (has_l) {
      require(nd.split_coord >= 0 && nd.split_coord < r, "InvalidTree", "split coordinate");
      require(nd.split_point > 0.0 && nd.split_point < 1.0, "InvalidTree",
              "split point must lie in (0,1)");
      require(nd.split_prob > 0.0 && nd.split_prob < 1.0, "InvalidTree",
              "split probability must lie in (0,1)");
      stack.push_back(nd.left);
      stack.push_back(nd.right);
    }
  }
  require(seen == int(nodes.size()), "InvalidTree", "unreachable nodes present");
}

TreeResult tree_build(const TreeScenario& s) {
  s.validate();
  TreeResult out;
  const WorldSpace sp = WorldSpace::cube(s.r);

  // leaf recursion: weight multiplies q (right) or 1-q (left); the cell
  // splits its extent along the split coordinate in proportion (a, 1-a)
  struct Frame {
    int node;
    Rect rect;
    double weight;
  };
  std::vector<Frame> stack{{s.root, Rect::whole(s.r), 1.0}};
  while (!stack.empty()) {
    Frame f = stack.back();
    stack.pop_back();
    const TreeNode& nd = s.nodes[size_t(f.node)];
    if (nd.leaf()) {
      out.leaves.push_back(f.rect);
      out.volumes.push_back(f.rect.volume());
      out.mu_hat.push_back(f.weight);
      continue;
    }
    const auto& side = f.rect.sides[size_t(nd.split_coord)];
    const double cut = side.lo + nd.split_point * (side.hi - side.lo);
    Rect left = f.rect, right = f.rect;
    left.sides[size_t(nd.split_coord)] = {side.lo, cut};
    right.sides[size_t(nd.split_coord)] = {cut, side.hi};
    // right child first so leaves pop in left-to-right order
    stack.push_back({nd.right, right, f.weight * nd.split_prob});
    stack.push_back({nd.left, left, f.weight * (1.0 - nd.split_prob)});
  }

  double vol_sum = 0.0, mu_sum = 0.0;
  for (size_t i = 0; i < out.leaves.size(); ++i) {
    vol_sum += out.volumes[i];
    mu_sum += out.mu_hat[i];
  }
  require(std::fabs(vol_sum - 1.0) <= kProbTol, "InvalidTree",
          "leaf volumes do not tile the cube");
  require(std::fabs(mu_sum - 1.0) <= kProbTol, "InvalidTree",
          "leaf weights do not sum to one");

  for (size_t i = 0; i < out.leaves.size(); ++i)
    out.lambda.push_back(std::log(out.mu_hat[i] / out.volumes[i]));

  std::vector<TruthSet> blocks;
  for (const auto& r : out.leaves) blocks.push_back(TruthSet::rectangle(sp, r));
  out.partition = std::make_shared<Partition>(Partition::of(sp, std::move(blocks)));
  out.posterior = BeliefMeasure::piecewise(out.partition, out.mu_hat);

  const int n = int(out.leaves.size());
  out.diameter_lower_bound = std::pow(double(n), -1.0 / double(s.r));
  int widest = 0;
  for (int i = 0; i < n; ++i) {
    double diam = 0.0;
    for (const auto& side : out.leaves[size_t(i)].sides)
      diam = std::max(diam, side.length());
    if (diam > out.max_diameter) {
      out.max_diameter = diam;
      widest = i;
    }
  }
  require(out.max_diameter >= out.diameter_lower_bound - kProbTol, "InvalidTree",
          "diameter bound violated");

  std::vector<double> center;
  for (const auto& side : out.leaves[size_t(widest)].sides)
    center.push_back(0.5 * (side.lo + side.hi));
  out.witness_x0 = World::at(center);
  out.witness_eps = 0.49 * out.max_diameter;
  out.witness_ball_mass = measure_of(
      out.posterior, ball(sp, MetricKind::SupNorm, out.witness_x0, out.witness_eps, false));
  return out;
}

// ---------------------------------------------------------------------------
// spiky features

void SpikeScenario::validate() const {
  require(!atoms.empty(), "ConfigInvalid", "need at least one atom");
  require(delta > 0.0, "ConfigInvalid", "delta must be positive");
  require(weights.size() == atoms.size(), "ConfigInvalid",
          "one target weight per atom");
  double total = p0;
  require(p0 >= 0.0, "ConfigInvalid", "background weight must be nonnegative");
  for (double w : weights) {
    require(w >= 0.0, "ConfigInvalid", "atom weights must be nonnegative");
    total += w;
  }
  require(std::fabs(total - 1.0) <= kProbTol, "ConfigInvalid",
          "weights must sum to one");
  for (size_t i = 0; i < atoms.size(); ++i) {
    require(atoms[i] - delta / 2.0 > 0.0 && atoms[i] + delta / 2.0 < 1.0,
            "AtomsTooClose", "atom spike must fit inside (0,1)");
    for (size_t j = i + 1; j < atoms.size(); ++j)
      require(std::fabs(atoms[i] - atoms[j]) > delta, "AtomsTooClose",
              "atoms must be separated by more than delta");
  }
}

SpikeResult spike_posterior(const SpikeScenario& s) {
  s.validate();
  const int n = int(s.atoms.size());
  SpikeResult out;

  const double log_p0 = std::log(std::max(s.p0, 1e-300));
  double sum_e = 0.0;
  for (int i = 0; i < n; ++i) {
    const double li = s.weights[size_t(i)] > 0.0
                          ? std::log(s.weights[size_t(i)]) - log_p0
                          : -HUGE_VAL;
    out.lambda.push_back(std::clamp(li, -695.0, 695.0));
    sum_e += std::exp(out.lambda.back());
  }
  const double z = 1.0 - n * s.delta + sum_e;
  out.log_z = std::log(z);

  const WorldSpace sp = WorldSpace::cube(1);
  std::vector<TruthSet> blocks;
  std::vector<double> probs;
  std::vector<CoordFeature> feats;
  const double scale = std::log(1.0 / s.delta);
  std::vector<std::pair<double, double>> order;  // (atom, index)
  for (int i = 0; i < n; ++i) order.emplace_back(s.atoms[size_t(i)], i);
  std::sort(order.begin(), order.end());

  double cursor = 0.0;
  std::vector<Rect> gaps;
  for (const auto& [x, idx] : order) {
    (void)idx;
    Rect g;
    g.sides.push_back({cursor, x - s.delta / 2.0});
    if (g.sides[0].length() > 0.0) gaps.push_back(g);
    cursor = x + s.delta / 2.0;
  }
  {
    Rect g;
    g.sides.push_back({cursor, 1.0});
    if (g.sides[0].length() > 0.0) gaps.push_back(g);
  }

  for (int i = 0; i < n; ++i) {
    Rect box;
    box.sides.push_back({s.atoms[size_t(i)] - s.delta / 2.0,
                         s.atoms[size_t(i)] + s.delta / 2.0});
    blocks.push_back(TruthSet::rectangle(sp, box));
    probs.push_back(std::exp(out.lambda[size_t(i)]) / z);
    feats.push_back(CoordFeature::box_indicator(box, scale));
    out.gap.push_back(std::fabs(probs.back() - s.weights[size_t(i)]));
  }
  blocks.push_back(TruthSet::rectangle_union(sp, gaps));
  probs.push_back((1.0 - n * s.delta) / z);
  out.background_gap = std::fabs(probs.back() - s.p0);

  auto part = std::make_shared<Partition>(Partition::of(sp, std::move(blocks)));
  out.density = BeliefMeasure::piecewise(part, probs);

  std::vector<std::pair<double, double>> limit_atoms;
  const double denom = 1.0 + sum_e;
  for (int i = 0; i < n; ++i)
    limit_atoms.emplace_back(s.atoms[size_t(i)], std::exp(out.lambda[size_t(i)]) / denom);
  out.limit = BeliefMeasure::atom_mixture(sp, 1.0 / denom, std::move(limit_atoms));

  out.features = FeatureSet::cube(sp, std::move(feats));
  for (int i = 0; i < n; ++i) out.feature_targets.push_back(scale * probs[size_t(i)]);
  return out;
}

}  // namespace lka
