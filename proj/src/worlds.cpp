#include "lka/worlds.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "lka/errors.hpp"
#include "lka/tilted.hpp"

namespace lka {

WorldSpace WorldSpace::finite(int d, std::vector<std::string> labels) {
  require(d >= 1, "InvalidSpace", "finite space needs d >= 1");
  require(labels.empty() || int(labels.size()) == d, "InvalidSpace",
          "label count must match d");
  WorldSpace s;
  s.kind = SpaceKind::Finite;
  s.d = d;
  s.labels = std::move(labels);
  return s;
}

WorldSpace WorldSpace::cube(int r) {
  require(r >= 1, "InvalidSpace", "cube space needs r >= 1");
  WorldSpace s;
  s.kind = SpaceKind::Cube;
  s.r = r;
  return s;
}

// ---------------------------------------------------------------------------

double Rect::volume() const {
  double v = 1.0;
  for (const auto& s : sides) v *= s.length();
  return v;
}

bool Rect::contains(const std::vector<double>& x) const {
  if (x.size() != sides.size()) return false;
  for (size_t i = 0; i < sides.size(); ++i)
    if (x[i] < sides[i].lo || x[i] > sides[i].hi) return false;
  return true;
}

bool Rect::contains_half_open(const std::vector<double>& x) const {
  if (x.size() != sides.size()) return false;
  for (size_t i = 0; i < sides.size(); ++i) {
    // half-open [lo, hi), except the face glued to the space boundary at 1
    const bool at_top = sides[i].hi >= 1.0;
    if (x[i] < sides[i].lo) return false;
    if (at_top ? x[i] > sides[i].hi : x[i] >= sides[i].hi) return false;
  }
  return true;
}

Rect Rect::intersect(const Rect& a, const Rect& b) {
  Rect out;
  const size_t r = a.sides.size();
  out.sides.resize(r);
  for (size_t i = 0; i < r; ++i) {
    out.sides[i].lo = std::max(a.sides[i].lo, b.sides[i].lo);
    out.sides[i].hi = std::min(a.sides[i].hi, b.sides[i].hi);
  }
  return out;
}

bool Rect::empty() const {
  for (const auto& s : sides)
    if (s.hi < s.lo) return true;
  return false;
}

Rect Rect::whole(int r) {
  Rect out;
  out.sides.assign(static_cast<std::size_t>(r), Interval{0.0, 1.0});
  return out;
}

// ---------------------------------------------------------------------------

static void check_rect(const WorldSpace& s, const Rect& r) {
  require(int(r.sides.size()) == s.r, "InvalidTruthSet",
          "rectangle dimension must match the cube");
  for (const auto& iv : r.sides)
    require(iv.lo >= 0.0 && iv.lo <= iv.hi && iv.hi <= 1.0, "InvalidTruthSet",
            "rectangle sides must satisfy 0 <= lo <= hi <= 1");
}

TruthSet TruthSet::finite_subset(const WorldSpace& s, std::vector<std::uint8_t> mask) {
  require(s.kind == SpaceKind::Finite, "InvalidTruthSet", "mask needs a finite space");
  require(int(mask.size()) == s.d, "InvalidTruthSet", "mask length must equal d");
  TruthSet t;
  t.space = s;
  t.body = Body::FiniteSubset;
  t.mask = std::move(mask);
  return t;
}

TruthSet TruthSet::of_indices(const WorldSpace& s, const std::vector<int>& idx) {
  std::vector<std::uint8_t> mask(static_cast<std::size_t>(s.d), 0);
  for (int k : idx) {
    require(k >= 0 && k < s.d, "InvalidTruthSet", "world index out of range");
    mask[size_t(k)] = 1;
  }
  return finite_subset(s, std::move(mask));
}

TruthSet TruthSet::rectangle(const WorldSpace& s, Rect r) {
  require(s.kind == SpaceKind::Cube, "InvalidTruthSet", "rectangle needs a cube space");
  check_rect(s, r);
  TruthSet t;
  t.space = s;
  t.body = Body::Rectangle;
  t.rects.push_back(std::move(r));
  return t;
}

TruthSet TruthSet::rectangle_union(const WorldSpace& s, std::vector<Rect> rs) {
  require(s.kind == SpaceKind::Cube, "InvalidTruthSet", "rectangle union needs a cube space");
  for (const auto& r : rs) check_rect(s, r);
  for (size_t i = 0; i < rs.size(); ++i)
    for (size_t j = i + 1; j < rs.size(); ++j) {
      Rect iv = Rect::intersect(rs[i], rs[j]);
      require(iv.empty() || iv.volume() <= kProbTol, "InvalidTruthSet",
              "rectangle union members must be pairwise disjoint");
    }
  TruthSet t;
  t.space = s;
  t.body = Body::RectangleUnion;
  t.rects = std::move(rs);
  return t;
}

TruthSet TruthSet::whole(const WorldSpace& s) {
  if (s.kind == SpaceKind::Finite)
    return finite_subset(s, std::vector<std::uint8_t>(static_cast<std::size_t>(s.d), 1));
  return rectangle(s, Rect::whole(s.r));
}

TruthSet TruthSet::empty_set(const WorldSpace& s) {
  if (s.kind == SpaceKind::Finite)
    return finite_subset(s, std::vector<std::uint8_t>(static_cast<std::size_t>(s.d), 0));
  TruthSet t;
  t.space = s;
  t.body = Body::RectangleUnion;
  return t;
}

long TruthSet::count() const {
  long c = 0;
  for (auto m : mask) c += m;
  return c;
}

double TruthSet::volume() const {
  double v = 0.0;
  for (const auto& r : rects) v += r.volume();
  return v;
}

bool TruthSet::contains(const World& x) const {
  if (space.kind == SpaceKind::Finite) {
    require(x.index >= 0 && x.index < space.d, "InvalidWorld", "index out of range");
    return mask[size_t(x.index)] != 0;
  }
  for (const auto& r : rects)
    if (r.contains(x.point)) return true;
  return false;
}

TruthSet TruthSet::complement() const {
  if (space.kind == SpaceKind::Finite) {
    std::vector<std::uint8_t> m(mask);
    for (auto& v : m) v = v ? 0 : 1;
    return finite_subset(space, std::move(m));
  }
  require(body == Body::Rectangle, "NotSupported",
          "cube complement is only available for a single rectangle");
  // slab decomposition: peel one coordinate at a time
  std::vector<Rect> out;
  const Rect& r = rects[0];
  for (int i = 0; i < space.r; ++i) {
    Rect below = r, above = r;
    for (int j = i; j < space.r; ++j) {
      below.sides[size_t(j)] = {0.0, 1.0};
      above.sides[size_t(j)] = {0.0, 1.0};
    }
    below.sides[size_t(i)] = {0.0, r.sides[size_t(i)].lo};
    above.sides[size_t(i)] = {r.sides[size_t(i)].hi, 1.0};
    if (below.sides[size_t(i)].length() > 0.0) out.push_back(below);
    if (above.sides[size_t(i)].length() > 0.0) out.push_back(above);
  }
  return rectangle_union(space, std::move(out));
}

TruthSet TruthSet::intersect(const TruthSet& o) const {
  require(space.same_as(o.space), "SpaceMismatch", "intersect needs one space");
  if (space.kind == SpaceKind::Finite) {
    std::vector<std::uint8_t> m(mask.size());
    for (size_t k = 0; k < m.size(); ++k) m[k] = mask[k] & o.mask[k];
    return finite_subset(space, std::move(m));
  }
  std::vector<Rect> out;
  for (const auto& a : rects)
    for (const auto& b : o.rects) {
      Rect iv = Rect::intersect(a, b);
      if (!iv.empty()) out.push_back(iv);
    }
  TruthSet t;
  t.space = space;
  t.body = Body::RectangleUnion;
  t.rects = std::move(out);
  return t;
}

bool TruthSet::is_empty() const {
  if (space.kind == SpaceKind::Finite) return count() == 0;
  return rects.empty();
}

// ---------------------------------------------------------------------------

Partition Partition::of(const WorldSpace& s, std::vector<TruthSet> blocks) {
  Partition p;
  p.space = s;
  p.blocks = std::move(blocks);
  p.validate();
  return p;
}

void Partition::validate() const {
  require(!blocks.empty(), "InvalidPartition", "partition needs blocks");
  for (const auto& b : blocks)
    require(b.space.same_as(space), "SpaceMismatch", "block on wrong space");
  if (space.kind == SpaceKind::Finite) {
    std::vector<int> cover(static_cast<std::size_t>(space.d), 0);
    for (const auto& b : blocks) {
      require(b.count() >= 1, "InvalidPartition", "empty block");
      for (int k = 0; k < space.d; ++k) cover[size_t(k)] += b.mask[size_t(k)];
    }
    for (int k = 0; k < space.d; ++k)
      require(cover[size_t(k)] == 1, "InvalidPartition",
              "blocks must cover each world exactly once");
    return;
  }
  double total = 0.0;
  for (size_t i = 0; i < blocks.size(); ++i) {
    const auto& b = blocks[i];
    const double v = b.volume();
    // zero volume is allowed only for an explicit atom (a degenerate point)
    if (v <= 0.0) {
      require(b.body == TruthSet::Body::Rectangle, "InvalidPartition",
              "zero-volume block must be a single point");
      for (const auto& s : b.rects[0].sides)
        require(s.length() == 0.0, "InvalidPartition",
                "zero-volume block must be a single point");
    }
    total += v;
    for (size_t j = i + 1; j < blocks.size(); ++j) {
      double overlap = 0.0;
      for (const auto& ra : b.rects)
        for (const auto& rb : blocks[j].rects) {
          Rect iv = Rect::intersect(ra, rb);
          if (!iv.empty()) overlap += iv.volume();
        }
      require(overlap <= kProbTol, "InvalidPartition", "blocks overlap");
    }
  }
  require(std::fabs(total - 1.0) <= kProbTol, "InvalidPartition",
          "block volumes must sum to 1");
}

int Partition::locate(const World& x) const {
  if (space.kind == SpaceKind::Finite) {
    for (size_t i = 0; i < blocks.size(); ++i)
      if (blocks[i].mask[size_t(x.index)]) return int(i);
    return -1;
  }
  for (size_t i = 0; i < blocks.size(); ++i)
    for (const auto& r : blocks[i].rects)
      if (r.contains_half_open(x.point)) return int(i);
  for (size_t i = 0; i < blocks.size(); ++i)  // boundary fallback
    for (const auto& r : blocks[i].rects)
      if (r.contains(x.point)) return int(i);
  return -1;
}

// ---------------------------------------------------------------------------

TruthSet ball(const WorldSpace& space, MetricKind metric, const World& x0,
              double eps, bool closed) {
  require(eps >= 0.0, "InvalidBall", "eps must be nonnegative");
  if (metric == MetricKind::Discrete) {
    require(space.kind == SpaceKind::Finite, "SpaceMismatch",
            "discrete metric lives on finite spaces");
    const bool whole = closed ? (eps >= 1.0) : (eps > 1.0);
    if (whole) return TruthSet::whole(space);
    return TruthSet::of_indices(space, {x0.index});
  }
  require(space.kind == SpaceKind::Cube, "SpaceMismatch",
          "sup-norm metric lives on cube spaces");
  require(int(x0.point.size()) == space.r, "InvalidWorld", "point dimension");
  Rect r;
  r.sides.resize(static_cast<std::size_t>(space.r));
  for (int i = 0; i < space.r; ++i) {
    r.sides[size_t(i)].lo = std::max(0.0, x0.point[size_t(i)] - eps);
    r.sides[size_t(i)].hi = std::min(1.0, x0.point[size_t(i)] + eps);
  }
  return TruthSet::rectangle(space, r);
}

// ---------------------------------------------------------------------------

MarginalSpec MarginalSpec::one_tilt(double lam) {
  MarginalSpec m;
  m.kind = Kind::OneTilt;
  m.lam = lam;
  return m;
}

MarginalSpec MarginalSpec::two_tilt(double l1, double l2) {
  MarginalSpec m;
  m.kind = Kind::TwoTilt;
  m.lam1 = l1;
  m.lam2 = l2;
  return m;
}

static double marginal_mass(const MarginalSpec& m, double a, double b) {
  a = std::clamp(a, 0.0, 1.0);
  b = std::clamp(b, 0.0, 1.0);
  if (b <= a) return 0.0;
  switch (m.kind) {
    case MarginalSpec::Kind::Uniform: return b - a;
    case MarginalSpec::Kind::OneTilt: return one_tilt_mass(m.lam, a, b);
    case MarginalSpec::Kind::TwoTilt: return two_tilt_mass(m.lam1, m.lam2, a, b);
  }
  return 0.0;
}

BeliefMeasure BeliefMeasure::finite_vec(const WorldSpace& s, std::vector<double> p) {
  require(s.kind == SpaceKind::Finite, "InvalidMeasure", "finite_vec needs a finite space");
  BeliefMeasure m;
  m.space = s;
  m.form = Form::FiniteVec;
  m.p = std::move(p);
  m.validate();
  return m;
}

BeliefMeasure BeliefMeasure::uniform(const WorldSpace& s) {
  if (s.kind == SpaceKind::Finite)
    return finite_vec(s, std::vector<double>(static_cast<std::size_t>(s.d), 1.0 / s.d));
  return product_tilted(s, std::vector<MarginalSpec>(static_cast<std::size_t>(s.r)));
}

BeliefMeasure BeliefMeasure::piecewise(std::shared_ptr<const Partition> part,
                                       std::vector<double> blockProbs) {
  require(part != nullptr, "InvalidMeasure", "piecewise needs a partition");
  BeliefMeasure m;
  m.space = part->space;
  m.form = Form::PiecewiseConstant;
  m.partition = std::move(part);
  m.blockProbs = std::move(blockProbs);
  m.validate();
  return m;
}

BeliefMeasure BeliefMeasure::product_tilted(const WorldSpace& s,
                                            std::vector<MarginalSpec> marginals) {
  require(s.kind == SpaceKind::Cube, "InvalidMeasure", "product form needs a cube");
  require(int(marginals.size()) == s.r, "InvalidMeasure", "one marginal per coordinate");
  BeliefMeasure m;
  m.space = s;
  m.form = Form::ProductTilted;
  m.marginals = std::move(marginals);
  m.validate();
  return m;
}

BeliefMeasure BeliefMeasure::atom_mixture(const WorldSpace& s, double p0,
                                          std::vector<std::pair<double, double>> atoms) {
  require(s.kind == SpaceKind::Cube && s.r == 1, "InvalidMeasure",
          "atom mixture lives on [0,1]");
  BeliefMeasure m;
  m.space = s;
  m.form = Form::AtomMixture;
  m.p0 = p0;
  m.atoms = std::move(atoms);
  m.validate();
  return m;
}

void BeliefMeasure::validate() const {
  switch (form) {
    case Form::FiniteVec: {
      require(int(p.size()) == space.d, "InvalidMeasure", "vector length != d");
      double sum = 0.0;
      for (double v : p) {
        require(v >= 0.0, "InvalidMeasure", "negative probability");
        sum += v;
      }
      require(std::fabs(sum - 1.0) <= kProbTol, "InvalidMeasure",
              "probabilities must sum to 1");
      break;
    }
    case Form::PiecewiseConstant: {
      require(blockProbs.size() == partition->blocks.size(), "InvalidMeasure",
              "one probability per block");
      double sum = 0.0;
      for (double v : blockProbs) {
        require(v >= -kProbTol, "InvalidMeasure", "negative block probability");
        sum += v;
      }
      require(std::fabs(sum - 1.0) <= kProbTol, "InvalidMeasure",
              "block probabilities must sum to 1");
      break;
    }
    case Form::ProductTilted: {
      for (const auto& m : marginals)
        if (m.kind == MarginalSpec::Kind::TwoTilt) {
          // quadrature self-consistency of the normalized marginal
          const double halves = two_tilt_mass(m.lam1, m.lam2, 0.0, 0.5) +
                                two_tilt_mass(m.lam1, m.lam2, 0.5, 1.0);
          require(std::fabs(halves - 1.0) <= kQuadTol, "InvalidMeasure",
                  "two-tilt marginal fails its normalization check");
        }
      break;
    }
    case Form::AtomMixture: {
      double sum = p0;
      require(p0 >= 0.0, "InvalidMeasure", "negative background weight");
      for (const auto& [x, w] : atoms) {
        require(x >= 0.0 && x <= 1.0, "InvalidMeasure", "atom outside [0,1]");
        require(w >= 0.0, "InvalidMeasure", "negative atom weight");
        sum += w;
      }
      require(std::fabs(sum - 1.0) <= kProbTol, "InvalidMeasure",
              "atom weights plus background must sum to 1");
      break;
    }
  }
}

double BeliefMeasure::point_prob(const World& x0) const {
  switch (form) {
    case Form::FiniteVec:
      return p[size_t(x0.index)];
    case Form::PiecewiseConstant: {
      if (space.kind == SpaceKind::Finite) return 0.0;  // diffuse inside blocks
      for (size_t i = 0; i < partition->blocks.size(); ++i) {
        const auto& b = partition->blocks[i];
        if (b.volume() == 0.0 && b.contains(x0))  // atom block
          return blockProbs[i];
      }
      return 0.0;
    }
    case Form::ProductTilted:
      return 0.0;
    case Form::AtomMixture:
      for (const auto& [x, w] : atoms)
        if (std::fabs(x - x0.point[0]) <= 1e-15) return w;
      return 0.0;
  }
  return 0.0;
}

bool BeliefMeasure::is_point_mass_at(const World& x0, double tol) const {
  // TV(P, delta_x0) = 1 - P({x0})
  if (form == Form::PiecewiseConstant && space.kind == SpaceKind::Finite) {
    const int blk = partition->locate(x0);
    if (blk < 0) return false;
    return partition->blocks[size_t(blk)].count() == 1 &&
           blockProbs[size_t(blk)] >= 1.0 - tol;
  }
  return point_prob(x0) >= 1.0 - tol;
}

// ---------------------------------------------------------------------------

static double piecewise_mass(const BeliefMeasure& mu, const TruthSet& set) {
  const Partition& part = *mu.partition;
  double total = 0.0;
  if (mu.space.kind == SpaceKind::Finite) {
    for (size_t i = 0; i < part.blocks.size(); ++i) {
      const auto& b = part.blocks[i];
      const long inter = b.intersect(set).count();
      if (inter > 0) total += mu.blockProbs[i] * double(inter) / double(b.count());
    }
    return total;
  }
  for (size_t i = 0; i < part.blocks.size(); ++i) {
    const auto& b = part.blocks[i];
    const double bv = b.volume();
    if (bv <= 0.0) {  // atom block: all-or-nothing
      const auto& pt = b.rects[0];
      std::vector<double> x(pt.sides.size());
      for (size_t j = 0; j < x.size(); ++j) x[j] = pt.sides[j].lo;
      if (set.contains(World::at(x))) total += mu.blockProbs[i];
      continue;
    }
    double inter = 0.0;
    for (const auto& rb : b.rects)
      for (const auto& rs : set.rects) {
        Rect iv = Rect::intersect(rb, rs);
        if (!iv.empty()) inter += iv.volume();
      }
    if (inter > 0.0) total += mu.blockProbs[i] * inter / bv;
  }
  return total;
}

double measure_of(const BeliefMeasure& mu, const TruthSet& set) {
  require(mu.space.same_as(set.space), "SpaceMismatch",
          "measure and set live on different spaces");
  switch (mu.form) {
    case BeliefMeasure::Form::FiniteVec: {
      double s = 0.0;
      for (int k = 0; k < mu.space.d; ++k)
        if (set.mask[size_t(k)]) s += mu.p[size_t(k)];
      return s;
    }
    case BeliefMeasure::Form::PiecewiseConstant:
      return piecewise_mass(mu, set);
    case BeliefMeasure::Form::ProductTilted: {
      double total = 0.0;
      for (const auto& r : set.rects) {
        double m = 1.0;
        for (int i = 0; i < mu.space.r && m > 0.0; ++i)
          m *= marginal_mass(mu.marginals[size_t(i)], r.sides[size_t(i)].lo,
                             r.sides[size_t(i)].hi);
        total += m;
      }
      return std::min(total, 1.0);
    }
    case BeliefMeasure::Form::AtomMixture: {
      double total = 0.0;
      for (const auto& r : set.rects) total += mu.p0 * r.sides[0].length();
      for (const auto& [x, w] : mu.atoms)
        for (const auto& r : set.rects)
          if (x >= r.sides[0].lo && x <= r.sides[0].hi) {
            total += w;
            break;
          }
      return std::min(total, 1.0);
    }
  }
  return 0.0;
}

std::vector<double> conditional_block_expectation(const BeliefMeasure& mu,
                                                  const TruthSet& g,
                                                  const Partition& part) {
  require(mu.space.kind == SpaceKind::Finite, "NotSupported",
          "conditional block expectations are computed on finite spaces");
  require(mu.space.same_as(g.space) && mu.space.same_as(part.space),
          "SpaceMismatch", "measure, set and partition must share a space");
  std::vector<double> out(part.blocks.size());
  for (size_t i = 0; i < part.blocks.size(); ++i) {
    const double pb = measure_of(mu, part.blocks[i]);
    require(pb > 0.0, "ZeroBlockMass",
            "conditional expectation undefined on a null block");
    out[i] = measure_of(mu, part.blocks[i].intersect(g)) / pb;
  }
  return out;
}

double kl_divergence(const BeliefMeasure& q, const BeliefMeasure& p) {
  require(q.form == BeliefMeasure::Form::FiniteVec &&
              p.form == BeliefMeasure::Form::FiniteVec,
          "NotSupported", "KL divergence is computed for finite vectors");
  require(q.space.same_as(p.space), "SpaceMismatch", "KL needs one space");
  double s = 0.0;
  for (size_t k = 0; k < q.p.size(); ++k) {
    if (q.p[k] == 0.0) continue;
    if (p.p[k] == 0.0) return HUGE_VAL;
    s += q.p[k] * std::log(q.p[k] / p.p[k]);
  }
  return s;
}

}  // namespace lka
