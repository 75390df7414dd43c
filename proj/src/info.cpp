#include "lka/info.hpp"

#include <algorithm>
#include <cmath>
#include <map>

#include "lka/errors.hpp"

namespace lka {

double active_info(const BeliefMeasure& p0, const BeliefMeasure& p,
                   const TruthSet& t) {
  require(p0.space.same_as(p.space) && p0.space.same_as(t.space), "SpaceMismatch",
          "measures and target must share a space");
  const double pt = measure_of(p, t);
  const double p0t = measure_of(p0, t);
  if (pt <= 0.0 && p0t <= 0.0) return 0.0;  // 0/0 = 0 by continuity
  if (pt <= 0.0) return -HUGE_VAL;
  if (p0t <= 0.0) return HUGE_VAL;
  return std::log(pt) - std::log(p0t);
}

std::vector<double> default_eps_grid(const WorldSpace& space) {
  std::vector<double> grid(12);
  const double lo = std::log(1e-4), hi = std::log(space.diameter());
  for (int i = 0; i < 12; ++i)
    grid[size_t(i)] = std::exp(lo + (hi - lo) * i / 11.0);
  return grid;
}

LkaReport lka_verdict(const BeliefMeasure& p0, const BeliefMeasure& p,
                      const TruthSet& t, const World& x0, MetricKind metric,
                      const std::vector<double>& eps_grid) {
  require(!eps_grid.empty(), "EmptyEpsGrid", "K2/K3 need at least one radius");
  for (size_t i = 0; i < eps_grid.size(); ++i) {
    require(eps_grid[i] > 0.0, "EmptyEpsGrid", "radii must be positive");
    require(i == 0 || eps_grid[i] > eps_grid[i - 1], "EmptyEpsGrid",
            "radii must be sorted increasing");
  }

  LkaReport rep;
  rep.p_T = measure_of(p, t);
  rep.p0_T = measure_of(p0, t);
  rep.p_x0 = p.point_prob(x0);
  rep.truth_value = t.contains(x0);
  rep.active_info = active_info(p0, p, t);

  if (rep.active_info == HUGE_VAL)
    rep.learned = rep.truth_value;
  else if (rep.active_info == -HUGE_VAL)
    rep.learned = !rep.truth_value;
  else
    rep.learned = (rep.active_info > 0.0 && rep.truth_value) ||
                  (rep.active_info < 0.0 && !rep.truth_value);

  rep.full_learning = rep.truth_value ? rep.p_T >= 1.0 - 1e-9 : rep.p_T <= 1e-9;

  rep.k2_support_contains_x0 = true;
  rep.k3_ball_info_nonneg = true;
  rep.k3_witness_eps = 0.0;
  for (double eps : eps_grid) {
    const TruthSet open_ball = ball(p.space, metric, x0, eps, false);
    if (measure_of(p, open_ball) <= 0.0) rep.k2_support_contains_x0 = false;
    const TruthSet closed_ball = ball(p.space, metric, x0, eps, true);
    const double info = active_info(p0, p, closed_ball);
    if (info < -kProbTol) rep.k3_ball_info_nonneg = false;
    if (info > kProbTol && rep.k3_witness_eps == 0.0) rep.k3_witness_eps = eps;
  }
  if (rep.k3_witness_eps == 0.0) rep.k3_ball_info_nonneg = false;  // needs strictness somewhere

  rep.knowledge_acquired =
      rep.learned && rep.k2_support_contains_x0 && rep.k3_ball_info_nonneg;
  rep.full_knowledge = p.is_point_mass_at(x0);
  return rep;
}

BiasReport bias(const TruthSet& t, const BeliefMeasure& p, const BeliefMeasure& p_tilde) {
  require(p.space.same_as(p_tilde.space) && p.space.same_as(t.space), "SpaceMismatch",
          "measures and target must share a space");
  BiasReport rep;
  const double pt = measure_of(p, t);
  const double ptt = measure_of(p_tilde, t);
  rep.log_p_T = pt > 0.0 ? std::log(pt) : -HUGE_VAL;
  rep.log_pt_T = ptt > 0.0 ? std::log(ptt) : -HUGE_VAL;
  if (pt <= 0.0 && ptt <= 0.0) {
    rep.zero_mass_target = true;
    rep.bias = std::nan("");
    return rep;
  }
  if (pt <= 0.0) rep.bias = HUGE_VAL;
  else if (ptt <= 0.0) rep.bias = -HUGE_VAL;
  else rep.bias = rep.log_pt_T - rep.log_p_T;
  return rep;
}

BiasReport bias_lambda(const TruthSet& t, const BeliefMeasure& prior,
                       const FeatureSet& features, const std::vector<double>& lam,
                       const std::vector<double>& lam_tilde) {
  GibbsPosterior g{prior, features, lam, "none"};
  GibbsPosterior gt{prior, features, lam_tilde, "none"};
  const TruthSet whole = TruthSet::whole(prior.space);
  const double zT = log_partition(g, t);
  const double ztT = log_partition(gt, t);
  const double zX = log_partition(g, whole);
  const double ztX = log_partition(gt, whole);
  BiasReport rep;
  rep.log_p_T = zT - zX;
  rep.log_pt_T = ztT - ztX;
  if (zT == -HUGE_VAL && ztT == -HUGE_VAL) {
    rep.zero_mass_target = true;
    rep.bias = std::nan("");
    return rep;
  }
  if (zT == -HUGE_VAL) rep.bias = HUGE_VAL;
  else if (ztT == -HUGE_VAL) rep.bias = -HUGE_VAL;
  else rep.bias = (ztT + zX) - (zT + ztX);
  return rep;
}

// ---------------------------------------------------------------------------

DiscernmentResult discernment_check(const BeliefMeasure& p0, const BeliefMeasure& p,
                                    const Partition& gA, const Partition& refinement,
                                    const std::vector<TruthSet>& probes) {
  require(p.space.kind == SpaceKind::Finite, "NotSupported",
          "discernment checks run on finite spaces");
  require(p0.space.same_as(p.space), "SpaceMismatch", "measures must share a space");

  // p must be measurable wrt gA: constant density within each block
  auto density = [&](const BeliefMeasure& m, int world) {
    if (m.form == BeliefMeasure::Form::FiniteVec) return m.p[size_t(world)];
    const int b = m.partition->locate(World::at(world));
    return m.blockProbs[size_t(b)] / double(m.partition->blocks[size_t(b)].count());
  };
  for (const auto& blk : gA.blocks) {
    double ref = -1.0;
    for (int k = 0; k < p.space.d; ++k) {
      if (!blk.mask[size_t(k)]) continue;
      const double v = density(p, k);
      if (ref < 0.0) ref = v;
      require(std::fabs(v - ref) <= kProbTol, "NotMeasurable",
              "posterior density varies within a discernment block");
    }
  }
  // the refinement must refine gA
  for (const auto& rb : refinement.blocks) {
    int parent = -1;
    for (int k = 0; k < p.space.d; ++k) {
      if (!rb.mask[size_t(k)]) continue;
      const int b = gA.locate(World::at(k));
      require(parent < 0 || parent == b, "InvalidPartition",
              "refinement blocks must nest inside the discernment blocks");
      parent = b;
    }
  }

  DiscernmentResult out;
  for (size_t pi = 0; pi < probes.size(); ++pi) {
    for (size_t bi = 0; bi < refinement.blocks.size(); ++bi) {
      const auto& blk = refinement.blocks[bi];
      const double m0 = measure_of(p0, blk);
      if (m0 <= 0.0) continue;
      const double mp = measure_of(p, blk);
      if (mp <= 0.0) continue;  // equality holds only P-a.s. on null blocks
      const double lhs = measure_of(p, blk.intersect(probes[pi])) / mp;
      const double rhs = measure_of(p0, blk.intersect(probes[pi])) / m0;
      if (std::fabs(lhs - rhs) > kProbTol) {
        out.ok = false;
        out.violations.push_back({int(pi), int(bi), lhs, rhs});
      }
    }
  }
  return out;
}

PartitionConditionsReport partition_conditions(const BeliefMeasure& p0,
                                               const Partition& part,
                                               const TruthSet& t, const World& x0) {
  require(p0.space.kind == SpaceKind::Finite, "NotSupported",
          "partition conditions are evaluated on finite spaces");
  for (const auto& b : part.blocks)
    require(measure_of(p0, b) > 0.0, "InvalidPartition",
            "every block needs positive prior mass");

  PartitionConditionsReport rep;
  const int nb = int(part.blocks.size());

  bool case_i = true, case_iii = true;
  for (int b = 0; b < nb; ++b) {
    const auto& blk = part.blocks[size_t(b)];
    const TruthSet inside = blk.intersect(t);
    const long in_count = inside.count();
    const long blk_count = blk.count();
    const bool subset_of_t = (in_count == blk_count);
    if (subset_of_t && rep.witness_full_true < 0) rep.witness_full_true = b;
    if (in_count == 0 && rep.witness_full_false < 0) rep.witness_full_false = b;
    // P0(A \ T) > 0?
    double mass_outside = measure_of(p0, blk) - measure_of(p0, inside);
    if (subset_of_t || mass_outside <= 0.0) case_i = false;
    if (in_count == 0 || measure_of(p0, inside) <= 0.0) case_iii = false;
  }
  rep.no_full_true_learning = case_i;
  rep.no_full_false_learning = case_iii;
  rep.full_true_learning = rep.witness_full_true >= 0;
  rep.full_false_learning = rep.witness_full_false >= 0;

  const int home = part.locate(x0);
  require(home >= 0, "InvalidWorld", "x0 is not covered by the partition");
  const auto& home_blk = part.blocks[size_t(home)];
  if (home_blk.count() == 1) {
    rep.full_knowledge = true;
  } else {
    std::vector<std::uint8_t> rest = home_blk.mask;
    rest[size_t(x0.index)] = 0;
    const double mass = measure_of(p0, TruthSet::finite_subset(p0.space, rest));
    if (mass > 0.0) {
      rep.no_full_knowledge = true;
      rep.witness_no_knowledge = home;
    }
  }

  auto block_indicator_measure = [&](int b) {
    std::vector<double> probs(static_cast<std::size_t>(nb), 0.0);
    probs[size_t(b)] = 1.0;
    auto part_copy = std::make_shared<Partition>(part);
    return BeliefMeasure::piecewise(part_copy, std::move(probs));
  };
  if (rep.full_true_learning) rep.p_full_true = block_indicator_measure(rep.witness_full_true);
  if (rep.full_false_learning) rep.p_full_false = block_indicator_measure(rep.witness_full_false);
  if (rep.full_knowledge) rep.p_full_knowledge = block_indicator_measure(home);
  return rep;
}

// ---------------------------------------------------------------------------

int bits_needed(int d) {
  require(d >= 2, "InvalidSpace", "need at least two worlds");
  int n = 0;
  while ((1 << n) < d) ++n;
  return std::max(n, 1);
}

FeatureSet binary_code_features(int d) {
  const int n = bits_needed(d);
  const WorldSpace space = WorldSpace::finite(d);
  std::vector<double> values(static_cast<std::size_t>(d) * size_t(n), 0.0);
  for (int k = 0; k < d; ++k)
    for (int i = 0; i < n; ++i)
      values[size_t(k) * size_t(n) + size_t(i)] = (k >> i) & 1 ? 1.0 : 0.0;
  return FeatureSet::finite(space, n, std::move(values));
}

std::vector<double> lambda_for_world(int d, int x0, double magnitude) {
  require(magnitude > 0.0, "InvalidMoment", "magnitude must be positive");
  require(x0 >= 0 && x0 < d, "InvalidWorld", "x0 out of range");
  const int n = bits_needed(d);
  std::vector<double> lam(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i)
    lam[size_t(i)] = ((x0 >> i) & 1) ? magnitude : -magnitude;
  return lam;
}

PigeonholeCertificate pigeonhole_certificate(const FeatureSet& features) {
  require(features.space.kind == SpaceKind::Finite && features.all_binary,
          "InvalidFeatures", "certificate needs binary features on a finite space");
  // worlds sharing a feature vector share a posterior cell for every lambda
  std::map<std::vector<int>, std::vector<int>> cells;
  for (int k = 0; k < features.space.d; ++k) {
    std::vector<int> key(static_cast<std::size_t>(features.n));
    for (int i = 0; i < features.n; ++i)
      key[size_t(i)] = int(features.finite_value(k, i));
    cells[key].push_back(k);
  }
  PigeonholeCertificate cert;
  for (const auto& [key, worlds] : cells) {
    (void)key;
    if (long(worlds.size()) > cert.cell_size) {
      cert.cell_size = long(worlds.size());
      cert.x0 = worlds[0];
      cert.cell = worlds;
    }
  }
  cert.bound = 1.0 / double(std::max<long>(cert.cell_size, 1));
  require(cert.cell_size >= 2, "InvalidFeatures",
          "every feature cell is a singleton; no bound applies");
  return cert;
}

}  // namespace lka
