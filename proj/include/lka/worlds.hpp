#ifndef LKA_WORLDS_HPP
#define LKA_WORLDS_HPP

#include <cstdint>
#include <memory>
#include <string>
#include <utility>
#include <vector>

namespace lka {

// probability bookkeeping tolerance; quadrature-backed values use kQuadTol
inline constexpr double kProbTol = 1e-12;
inline constexpr double kQuadTol = 1e-10;

enum class SpaceKind { Finite, Cube };

// The parameter space housing the true world: either d indexed worlds
// 0..d-1, or the unit cube [0,1]^r.
struct WorldSpace {
  SpaceKind kind = SpaceKind::Finite;
  int d = 0;
  int r = 0;
  std::vector<std::string> labels;  // optional, finite case

  static WorldSpace finite(int d, std::vector<std::string> labels = {});
  static WorldSpace cube(int r);
  bool same_as(const WorldSpace& o) const {
    return kind == o.kind && d == o.d && r == o.r;
  }
  // diameter is 1 for both the discrete metric and the sup norm on [0,1]^r
  double diameter() const { return 1.0; }
};

// A point of a WorldSpace; exactly one of (index, point) is meaningful.
struct World {
  int index = -1;
  std::vector<double> point;
  static World at(int k) { World w; w.index = k; return w; }
  static World at(std::vector<double> x) { World w; w.point = std::move(x); return w; }
};

struct Interval {
  double lo = 0.0, hi = 0.0;
  double length() const { return hi > lo ? hi - lo : 0.0; }
};

// axis-aligned box in [0,1]^r; degenerate sides are allowed (atoms)
struct Rect {
  std::vector<Interval> sides;
  double volume() const;
  bool contains(const std::vector<double>& x) const;        // closed
  bool contains_half_open(const std::vector<double>& x) const;  // [lo,hi)
  // intersection; an empty result has some side with hi < lo
  static Rect intersect(const Rect& a, const Rect& b);
  bool empty() const;
  static Rect whole(int r);
};

// Worlds in which a proposition is true: a bitmask over a finite space, or a
// rectangle / disjoint rectangle union in the cube.
struct TruthSet {
  enum class Body { FiniteSubset, Rectangle, RectangleUnion };
  WorldSpace space;
  Body body = Body::FiniteSubset;
  std::vector<std::uint8_t> mask;  // finite: length d, entries 0/1
  std::vector<Rect> rects;

  static TruthSet finite_subset(const WorldSpace& s, std::vector<std::uint8_t> mask);
  static TruthSet of_indices(const WorldSpace& s, const std::vector<int>& idx);
  static TruthSet rectangle(const WorldSpace& s, Rect r);
  static TruthSet rectangle_union(const WorldSpace& s, std::vector<Rect> rs);
  static TruthSet whole(const WorldSpace& s);
  static TruthSet empty_set(const WorldSpace& s);

  long count() const;      // finite cardinality
  double volume() const;   // cube Lebesgue measure
  bool contains(const World& x) const;
  TruthSet complement() const;   // finite, or cube via slab decomposition
  TruthSet intersect(const TruthSet& o) const;  // finite masks only
  bool is_empty() const;
};

// A finite partition of the space into truth-set blocks (the generators of a
// discernment sigma-field). Cube blocks may be degenerate atoms.
struct Partition {
  WorldSpace space;
  std::vector<TruthSet> blocks;

  static Partition of(const WorldSpace& s, std::vector<TruthSet> blocks);
  void validate() const;  // disjoint, covering, nonempty blocks
  // index of the block containing x (half-open convention on interior faces)
  int locate(const World& x) const;
};

enum class MetricKind { Discrete, SupNorm };

// closed or open metric ball as a TruthSet
TruthSet ball(const WorldSpace& space, MetricKind metric, const World& x0,
              double eps, bool closed);

// ---------------------------------------------------------------------------
// belief measures

struct MarginalSpec {
  enum class Kind { Uniform, OneTilt, TwoTilt };
  Kind kind = Kind::Uniform;
  double lam = 0.0;             // OneTilt
  double lam1 = 0.0, lam2 = 0.0;  // TwoTilt
  static MarginalSpec uniform() { return {}; }
  static MarginalSpec one_tilt(double lam);
  static MarginalSpec two_tilt(double l1, double l2);
};

// A probability measure over a WorldSpace, in one of the structured families
// the framework produces: a finite probability vector, a piecewise-constant
// density over a rectangle partition, a product of tilted marginals, or a
// uniform background plus point atoms on [0,1].
struct BeliefMeasure {
  enum class Form { FiniteVec, PiecewiseConstant, ProductTilted, AtomMixture };
  WorldSpace space;
  Form form = Form::FiniteVec;

  std::vector<double> p;  // FiniteVec

  std::shared_ptr<const Partition> partition;  // PiecewiseConstant
  std::vector<double> blockProbs;

  std::vector<MarginalSpec> marginals;  // ProductTilted, one per coordinate

  double p0 = 0.0;                                // AtomMixture background
  std::vector<std::pair<double, double>> atoms;   // (point, weight)

  static BeliefMeasure finite_vec(const WorldSpace& s, std::vector<double> p);
  static BeliefMeasure uniform(const WorldSpace& s);
  static BeliefMeasure piecewise(std::shared_ptr<const Partition> part,
                                 std::vector<double> blockProbs);
  static BeliefMeasure product_tilted(const WorldSpace& s,
                                      std::vector<MarginalSpec> marginals);
  static BeliefMeasure atom_mixture(const WorldSpace& s, double p0,
                                    std::vector<std::pair<double, double>> atoms);
  void validate() const;

  // point mass at x0 within total variation 1e-9 (full-knowledge test)
  bool is_point_mass_at(const World& x0, double tol = 1e-9) const;
  // P({x0}): probability of the singleton (0 for purely continuous forms)
  double point_prob(const World& x0) const;
};

// P(set); exact for FiniteVec / PiecewiseConstant / AtomMixture, per-coordinate
// closed form or quadrature for ProductTilted.
double measure_of(const BeliefMeasure& mu, const TruthSet& set);

// E_mu[1_g | block] for every block of the partition (finite spaces)
std::vector<double> conditional_block_expectation(const BeliefMeasure& mu,
                                                  const TruthSet& g,
                                                  const Partition& part);

// KL divergence KL(q || p) between finite measures (nats)
double kl_divergence(const BeliefMeasure& q, const BeliefMeasure& p);

}  // namespace lka

#endif
