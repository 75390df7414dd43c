#include "lka/tv.hpp"

#include <algorithm>
#include <cmath>

#include "lka/errors.hpp"
#include "lka/tilted.hpp"

namespace lka {

namespace {

double marginal_density(const MarginalSpec& m, double x) {
  switch (m.kind) {
    case MarginalSpec::Kind::Uniform:
      return 1.0;
    case MarginalSpec::Kind::OneTilt: {
      const double lam = m.lam;
      if (std::fabs(lam) <= 1e-12) return 1.0 + lam * (x - 0.5);
      if (lam > 0.0) return lam * std::exp(lam * (x - 1.0)) / (-std::expm1(-lam));
      return -lam * std::exp(lam * x) / (-std::expm1(lam));
    }
    case MarginalSpec::Kind::TwoTilt: {
      const double logZ = two_tilt_log_integral(m.lam1, m.lam2, 0.0, 1.0);
      return std::exp(m.lam1 * x + m.lam2 * x * x - logZ);
    }
  }
  return 0.0;
}

// worlds vector of a finite-space measure
std::vector<double> finite_weights(const BeliefMeasure& m) {
  if (m.form == BeliefMeasure::Form::FiniteVec) return m.p;
  require(m.form == BeliefMeasure::Form::PiecewiseConstant, "NotSupported",
          "unsupported finite measure form");
  std::vector<double> w(static_cast<std::size_t>(m.space.d), 0.0);
  const auto& part = *m.partition;
  for (size_t b = 0; b < part.blocks.size(); ++b) {
    const double per = m.blockProbs[b] / double(part.blocks[b].count());
    for (int k = 0; k < m.space.d; ++k)
      if (part.blocks[b].mask[size_t(k)]) w[size_t(k)] += per;
  }
  return w;
}

// atoms of a cube measure: explicit atom-mixture atoms plus degenerate
// piecewise blocks
std::vector<std::pair<double, double>> cube_atoms(const BeliefMeasure& m) {
  std::vector<std::pair<double, double>> out;
  if (m.form == BeliefMeasure::Form::AtomMixture) out = m.atoms;
  if (m.form == BeliefMeasure::Form::PiecewiseConstant) {
    const auto& part = *m.partition;
    for (size_t b = 0; b < part.blocks.size(); ++b)
      if (part.blocks[b].volume() == 0.0)
        out.emplace_back(part.blocks[b].rects[0].sides[0].lo, m.blockProbs[b]);
  }
  return out;
}

}  // namespace

double density_at(const BeliefMeasure& m, const std::vector<double>& x) {
  switch (m.form) {
    case BeliefMeasure::Form::ProductTilted: {
      double d = 1.0;
      for (size_t i = 0; i < m.marginals.size(); ++i)
        d *= marginal_density(m.marginals[i], x[i]);
      return d;
    }
    case BeliefMeasure::Form::PiecewiseConstant: {
      const int b = m.partition->locate(World::at(x));
      if (b < 0) return 0.0;
      const double v = m.partition->blocks[size_t(b)].volume();
      return v > 0.0 ? m.blockProbs[size_t(b)] / v : 0.0;
    }
    case BeliefMeasure::Form::AtomMixture:
      return m.p0;
    default:
      fail("NotSupported", "density undefined for this measure form");
  }
}

double total_variation(const BeliefMeasure& a, const BeliefMeasure& b, int grid) {
  require(a.space.same_as(b.space), "SpaceMismatch", "TV needs one space");

  if (a.space.kind == SpaceKind::Finite) {
    const auto wa = finite_weights(a), wb = finite_weights(b);
    double s = 0.0;
    for (size_t k = 0; k < wa.size(); ++k) s += std::fabs(wa[k] - wb[k]);
    return 0.5 * s;
  }

  // exact overlay for two piecewise-constant densities
  if (a.form == BeliefMeasure::Form::PiecewiseConstant &&
      b.form == BeliefMeasure::Form::PiecewiseConstant) {
    double s = 0.0;
    for (size_t i = 0; i < a.partition->blocks.size(); ++i) {
      const auto& ba = a.partition->blocks[i];
      const double va = ba.volume();
      if (va <= 0.0) continue;
      const double da = a.blockProbs[i] / va;
      for (size_t j = 0; j < b.partition->blocks.size(); ++j) {
        const auto& bb = b.partition->blocks[j];
        const double vb = bb.volume();
        if (vb <= 0.0) continue;
        const double db = b.blockProbs[j] / vb;
        double inter = 0.0;
        for (const auto& ra : ba.rects)
          for (const auto& rb : bb.rects) {
            Rect iv = Rect::intersect(ra, rb);
            if (!iv.empty()) inter += iv.volume();
          }
        s += inter * std::fabs(da - db);
      }
    }
    const auto aa = cube_atoms(a), ab = cube_atoms(b);
    for (const auto& [x, w] : aa) {
      double other = 0.0;
      for (const auto& [y, v] : ab)
        if (std::fabs(x - y) <= 1e-15) other = v;
      s += std::fabs(w - other);
    }
    for (const auto& [y, v] : ab) {
      bool seen = false;
      for (const auto& [x, w] : aa)
        if (std::fabs(x - y) <= 1e-15) seen = true;
      if (!seen) s += v;
    }
    return 0.5 * s;
  }

  // fast tensor path for two product measures in one or two dimensions
  if (a.form == BeliefMeasure::Form::ProductTilted &&
      b.form == BeliefMeasure::Form::ProductTilted && a.space.r <= 2) {
    const int g = grid;
    const double h = 1.0 / g;
    if (a.space.r == 1) {
      double s = 0.0;
      for (int i = 0; i < g; ++i) {
        const double x = (i + 0.5) * h;
        s += std::fabs(marginal_density(a.marginals[0], x) -
                       marginal_density(b.marginals[0], x));
      }
      return 0.5 * s * h;
    }
    std::vector<double> a0(static_cast<std::size_t>(g)), a1(static_cast<std::size_t>(g)), b0(static_cast<std::size_t>(g)), b1(static_cast<std::size_t>(g));
    for (int i = 0; i < g; ++i) {
      const double x = (i + 0.5) * h;
      a0[size_t(i)] = marginal_density(a.marginals[0], x);
      a1[size_t(i)] = marginal_density(a.marginals[1], x);
      b0[size_t(i)] = marginal_density(b.marginals[0], x);
      b1[size_t(i)] = marginal_density(b.marginals[1], x);
    }
    double s = 0.0;
    for (int i = 0; i < g; ++i)
      for (int j = 0; j < g; ++j)
        s += std::fabs(a0[size_t(i)] * a1[size_t(j)] - b0[size_t(i)] * b1[size_t(j)]);
    return 0.5 * s * h * h;
  }

  // generic grid for mixed continuous forms (one or two dimensions)
  require(a.space.r <= 2, "NotSupported", "grid TV is limited to r <= 2");
  const int g = grid;
  const double h = 1.0 / g;
  double s = 0.0;
  if (a.space.r == 1) {
    std::vector<double> x(1);
    for (int i = 0; i < g; ++i) {
      x[0] = (i + 0.5) * h;
      s += std::fabs(density_at(a, x) - density_at(b, x)) * h;
    }
  } else {
    std::vector<double> x(2);
    for (int i = 0; i < g; ++i)
      for (int j = 0; j < g; ++j) {
        x[0] = (i + 0.5) * h;
        x[1] = (j + 0.5) * h;
        s += std::fabs(density_at(a, x) - density_at(b, x)) * h * h;
      }
  }
  const auto aa = cube_atoms(a), ab = cube_atoms(b);
  for (const auto& [xx, w] : aa) {
    double other = 0.0;
    for (const auto& [y, v] : ab)
      if (std::fabs(xx - y) <= 1e-15) other = v;
    s += std::fabs(w - other);
  }
  for (const auto& [y, v] : ab) {
    bool seen = false;
    for (const auto& [xx, w] : aa)
      if (std::fabs(xx - y) <= 1e-15) seen = true;
    if (!seen) s += v;
  }
  return 0.5 * s;
}

double tv_to_point_mass(const BeliefMeasure& p, const World& x0, double width,
                        int grid) {
  if (p.space.kind == SpaceKind::Finite) return 1.0 - p.point_prob(x0);
  // delta-approximant: uniform density on the sup ball of the given width
  const TruthSet b = ball(p.space, MetricKind::SupNorm, x0, width, true);
  const Rect& r = b.rects[0];
  const double vol = r.volume();
  require(vol > 0.0, "InvalidBall", "approximant ball has no volume");
  const double inside = 1.0 / vol;
  const double pb = measure_of(p, b);

  // TV = 1/2 [ integral_B |f - 1/vol| + (1 - P(B)) + atom mass ]
  double s = 1.0 - std::min(pb, 1.0);
  const int g = std::max(grid / 8, 64);
  if (p.space.r == 1) {
    const double h = r.sides[0].length() / g;
    std::vector<double> x(1);
    for (int i = 0; i < g; ++i) {
      x[0] = r.sides[0].lo + (i + 0.5) * h;
      s += std::fabs(density_at(p, x) - inside) * h;
    }
  } else {
    require(p.space.r == 2, "NotSupported", "point-mass proxy is limited to r <= 2");
    const double h0 = r.sides[0].length() / g, h1 = r.sides[1].length() / g;
    std::vector<double> x(2);
    for (int i = 0; i < g; ++i)
      for (int j = 0; j < g; ++j) {
        x[0] = r.sides[0].lo + (i + 0.5) * h0;
        x[1] = r.sides[1].lo + (j + 0.5) * h1;
        s += std::fabs(density_at(p, x) - inside) * h0 * h1;
      }
  }
  // atoms are singular wrt the approximant; those outside B are already in
  // 1 - P(B), those inside must be restored
  for (const auto& [x, w] : cube_atoms(p))
    if (x >= r.sides[0].lo && x <= r.sides[0].hi) s += w;
  return 0.5 * s;
}

}  // namespace lka
