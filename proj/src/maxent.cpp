#include "lka/maxent.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <map>

#include "lka/errors.hpp"
#include "lka/tilted.hpp"

namespace lka {

CoordFeature CoordFeature::linear(int coord) {
  CoordFeature f;
  f.kind = Kind::Linear;
  f.coord = coord;
  return f;
}

CoordFeature CoordFeature::quadratic(int coord) {
  CoordFeature f;
  f.kind = Kind::Quadratic;
  f.coord = coord;
  return f;
}

CoordFeature CoordFeature::box_indicator(Rect box, double scale) {
  CoordFeature f;
  f.kind = Kind::BoxIndicator;
  f.box = std::move(box);
  f.scale = scale;
  return f;
}

FeatureSet FeatureSet::finite(const WorldSpace& s, int n, std::vector<double> values) {
  require(s.kind == SpaceKind::Finite, "InvalidFeatures", "matrix features need a finite space");
  require(n >= 1, "InvalidFeatures", "need at least one feature");
  require(values.size() == size_t(s.d) * size_t(n), "InvalidFeatures",
          "value matrix must be d x n");
  FeatureSet f;
  f.space = s;
  f.n = n;
  f.values = std::move(values);
  f.all_binary = true;
  for (double v : f.values) {
    require(std::isfinite(v), "InvalidFeatures", "feature values must be finite");
    if (v != 0.0 && v != 1.0) f.all_binary = false;
  }
  return f;
}

FeatureSet FeatureSet::cube(const WorldSpace& s, std::vector<CoordFeature> feats) {
  require(s.kind == SpaceKind::Cube, "InvalidFeatures", "coordinate features need a cube");
  require(!feats.empty(), "InvalidFeatures", "need at least one feature");
  FeatureSet f;
  f.space = s;
  f.n = int(feats.size());
  f.cube_features = std::move(feats);
  f.all_binary = true;
  for (const auto& cf : f.cube_features) {
    if (cf.kind == CoordFeature::Kind::BoxIndicator) {
      require(std::isfinite(cf.scale), "InvalidFeatures", "indicator scale must be finite");
      require(int(cf.box.sides.size()) == s.r, "InvalidFeatures",
              "indicator box dimension must match the cube");
      if (cf.scale != 1.0) f.all_binary = false;
    } else {
      require(cf.coord >= 0 && cf.coord < s.r, "InvalidFeatures", "coordinate out of range");
      f.all_binary = false;
    }
  }
  return f;
}

void FeatureSet::eval_point(const std::vector<double>& x, std::vector<double>& out) const {
  out.assign(static_cast<std::size_t>(n), 0.0);
  for (int i = 0; i < n; ++i) {
    const auto& cf = cube_features[size_t(i)];
    switch (cf.kind) {
      case CoordFeature::Kind::Linear: out[size_t(i)] = x[size_t(cf.coord)]; break;
      case CoordFeature::Kind::Quadratic: {
        const double v = x[size_t(cf.coord)];
        out[size_t(i)] = v * v;
        break;
      }
      case CoordFeature::Kind::BoxIndicator:
        out[size_t(i)] = cf.box.contains(x) ? cf.scale : 0.0;
        break;
    }
  }
}

void FeatureSet::value_range(std::vector<double>& lo, std::vector<double>& hi) const {
  lo.assign(static_cast<std::size_t>(n), 0.0);
  hi.assign(static_cast<std::size_t>(n), 0.0);
  if (space.kind == SpaceKind::Finite) {
    for (int i = 0; i < n; ++i) {
      double mn = finite_value(0, i), mx = mn;
      for (int k = 1; k < space.d; ++k) {
        mn = std::min(mn, finite_value(k, i));
        mx = std::max(mx, finite_value(k, i));
      }
      lo[size_t(i)] = mn;
      hi[size_t(i)] = mx;
    }
    return;
  }
  for (int i = 0; i < n; ++i) {
    const auto& cf = cube_features[size_t(i)];
    switch (cf.kind) {
      case CoordFeature::Kind::Linear:
      case CoordFeature::Kind::Quadratic:
        lo[size_t(i)] = 0.0;
        hi[size_t(i)] = 1.0;
        break;
      case CoordFeature::Kind::BoxIndicator:
        lo[size_t(i)] = std::min(0.0, cf.scale);
        hi[size_t(i)] = std::max(0.0, cf.scale);
        break;
    }
  }
}

const char* feasibility_name(Feasibility f) {
  switch (f) {
    case Feasibility::Interior: return "interior";
    case Feasibility::Boundary: return "boundary";
    case Feasibility::Infeasible: return "infeasible";
  }
  return "interior";
}

// ---------------------------------------------------------------------------
// finite-space dual Newton

namespace {

double logsumexp(const std::vector<double>& v) {
  double mx = -HUGE_VAL;
  for (double x : v) mx = std::max(mx, x);
  if (mx == -HUGE_VAL) return -HUGE_VAL;
  double s = 0.0;
  for (double x : v)
    if (x != -HUGE_VAL) s += std::exp(x - mx);
  return mx + std::log(s);
}

struct FiniteProblem {
  int d = 0, n = 0;
  std::vector<double> logp0;  // -inf marks worlds outside the prior support
  const std::vector<double>* F = nullptr;

  double value(int k, int i) const { return (*F)[size_t(k) * n + i]; }

  void weights(const std::vector<double>& lam, std::vector<double>& q,
               double* logZ) const {
    std::vector<double> logits(static_cast<std::size_t>(d));
    for (int k = 0; k < d; ++k) {
      double l = logp0[size_t(k)];
      if (l != -HUGE_VAL)
        for (int i = 0; i < n; ++i) l += lam[size_t(i)] * value(k, i);
      logits[size_t(k)] = l;
    }
    const double z = logsumexp(logits);
    q.resize(static_cast<std::size_t>(d));
    for (int k = 0; k < d; ++k)
      q[size_t(k)] = (logits[size_t(k)] == -HUGE_VAL) ? 0.0 : std::exp(logits[size_t(k)] - z);
    if (logZ) *logZ = z;
  }
};

FitReport newton_fit(const FiniteProblem& prob, const std::vector<double>& target,
                     const SolverOptions& opts) {
  const int n = prob.n, d = prob.d;
  FitReport rep;
  rep.lambda.assign(static_cast<std::size_t>(n), 0.0);

  // feature ranges over the prior support
  std::vector<double> lo(static_cast<std::size_t>(n), HUGE_VAL), hi(static_cast<std::size_t>(n), -HUGE_VAL);
  for (int k = 0; k < d; ++k) {
    if (prob.logp0[size_t(k)] == -HUGE_VAL) continue;
    for (int i = 0; i < n; ++i) {
      lo[size_t(i)] = std::min(lo[size_t(i)], prob.value(k, i));
      hi[size_t(i)] = std::max(hi[size_t(i)], prob.value(k, i));
    }
  }
  // pinned coordinates sit at a feature's range edge; their lambda runs to
  // the cap, since the polytope face is only reached in the limit
  bool infeasible = false, at_range_boundary = false;
  std::vector<int> pinned(static_cast<std::size_t>(n), 0);
  for (int i = 0; i < n; ++i) {
    const double ti = target[size_t(i)];
    if (ti < lo[size_t(i)] - kProbTol || ti > hi[size_t(i)] + kProbTol) {
      infeasible = true;
    } else if (hi[size_t(i)] - lo[size_t(i)] > 2.0 * kProbTol) {
      if (ti >= hi[size_t(i)] - kProbTol) pinned[size_t(i)] = 1;
      else if (ti <= lo[size_t(i)] + kProbTol) pinned[size_t(i)] = -1;
      if (pinned[size_t(i)] != 0) at_range_boundary = true;
    }
  }

  // pointwise dependency sum_i f_i = 1 fixes the zero-mean gauge
  bool sum_to_one = true;
  for (int k = 0; k < d && sum_to_one; ++k) {
    if (prob.logp0[size_t(k)] == -HUGE_VAL) continue;
    double s = 0.0;
    for (int i = 0; i < n; ++i) s += prob.value(k, i);
    if (std::fabs(s - 1.0) > kProbTol) sum_to_one = false;
  }
  // pinned coordinates own their lambda; the gauge projection would move
  // them off the cap, so it only applies to fully interior targets
  const bool apply_gauge = sum_to_one && !at_range_boundary;
  if (apply_gauge) rep.gauge = "zero-mean";

  const double cap = opts.lambda_cap;
  std::vector<double> lam(static_cast<std::size_t>(n), 0.0), q;
  std::vector<double> mu(static_cast<std::size_t>(n), 0.0);
  double logZ = 0.0;
  for (int i = 0; i < n; ++i)
    if (pinned[size_t(i)] != 0) lam[size_t(i)] = pinned[size_t(i)] * cap;

  auto compute_mu = [&](const std::vector<double>& l, std::vector<double>& out,
                        double* z) {
    prob.weights(l, q, z);
    out.assign(static_cast<std::size_t>(n), 0.0);
    for (int k = 0; k < d; ++k) {
      if (q[size_t(k)] == 0.0) continue;
      for (int i = 0; i < n; ++i) out[size_t(i)] += q[size_t(k)] * prob.value(k, i);
    }
  };
  auto psi = [&](const std::vector<double>& l) {
    double z;
    prob.weights(l, q, &z);
    double dot = 0.0;
    for (int i = 0; i < n; ++i) dot += l[size_t(i)] * target[size_t(i)];
    return z - dot;
  };

  // convergence is judged on the unpinned coordinates; pinned ones keep a
  // residual of order e^{-cap} by construction
  auto grad_norm = [&]() {
    double g = 0.0;
    for (int i = 0; i < n; ++i)
      if (pinned[size_t(i)] == 0)
        g = std::max(g, std::fabs(mu[size_t(i)] - target[size_t(i)]));
    return g;
  };

  compute_mu(lam, mu, &logZ);
  double gn = grad_norm();

  int iter = 0;
  for (; iter < opts.max_iterations && gn > opts.gradient_tolerance; ++iter) {
    // Hessian of psi = feature covariance under the current Gibbs weights
    Eigen::MatrixXd H = Eigen::MatrixXd::Zero(n, n);
    for (int k = 0; k < d; ++k) {
      const double w = q[size_t(k)];
      if (w == 0.0) continue;
      for (int i = 0; i < n; ++i)
        for (int j = i; j < n; ++j)
          H(i, j) += w * prob.value(k, i) * prob.value(k, j);
    }
    for (int i = 0; i < n; ++i)
      for (int j = i; j < n; ++j) {
        H(i, j) -= mu[size_t(i)] * mu[size_t(j)];
        H(j, i) = H(i, j);
      }

    Eigen::VectorXd grad(n);
    for (int i = 0; i < n; ++i) grad(i) = mu[size_t(i)] - target[size_t(i)];

    // solve in the orthogonal complement of the covariance null space
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(H);
    const double emax = eig.eigenvalues().maxCoeff();
    Eigen::VectorXd step = Eigen::VectorXd::Zero(n);
    if (emax > 0.0) {
      const double thresh = 1e-12 * emax;
      for (int i = 0; i < n; ++i) {
        const double ev = eig.eigenvalues()(i);
        if (ev > thresh) {
          const Eigen::VectorXd v = eig.eigenvectors().col(i);
          step -= v * (v.dot(grad) / ev);
        }
      }
    }
    if (step.norm() == 0.0) step = -grad;  // Hessian solve failed
    // near-singular curvature can propose absurd steps; a trust region keeps
    // the damped phase short without touching quadratic local convergence
    const double step_norm = step.lpNorm<Eigen::Infinity>();
    if (step_norm > 15.0) step *= 15.0 / step_norm;

    // freeze pinned coordinates and any coordinate pushed past the cap
    bool movable = false;
    for (int i = 0; i < n; ++i) {
      if (pinned[size_t(i)] != 0 || (lam[size_t(i)] >= cap && step(i) > 0.0) ||
          (lam[size_t(i)] <= -cap && step(i) < 0.0))
        step(i) = 0.0;
      if (step(i) != 0.0) movable = true;
    }
    if (!movable) break;

    const double psi0 = logZ - [&] {
      double dot = 0.0;
      for (int i = 0; i < n; ++i) dot += lam[size_t(i)] * target[size_t(i)];
      return dot;
    }();
    const double slope = grad.dot(step);

    // sufficient decrease up to the rounding floor of psi itself; near the
    // optimum the true decrease sinks below double resolution and the full
    // Newton step must go through untouched
    const double rounding = 1e-13 * (1.0 + std::fabs(psi0));
    double t = 1.0;
    std::vector<double> cand(static_cast<std::size_t>(n));
    for (int ls = 0; ls < 80; ++ls) {
      for (int i = 0; i < n; ++i)
        cand[size_t(i)] = std::clamp(lam[size_t(i)] + t * step(i), -cap, cap);
      if (psi(cand) <= psi0 + opts.armijo_c * t * slope + rounding) break;
      t *= opts.backtrack;
    }
    lam = cand;
    if (apply_gauge) {  // project onto the zero-mean gauge slice
      double mean = 0.0;
      for (double v : lam) mean += v;
      mean /= n;
      for (auto& v : lam) v = std::clamp(v - mean, -cap, cap);
    }
    compute_mu(lam, mu, &logZ);
    gn = grad_norm();
  }

  bool unpinned_cap = false;
  for (int i = 0; i < n; ++i)
    if (pinned[size_t(i)] == 0 && std::fabs(lam[size_t(i)]) >= cap) unpinned_cap = true;

  rep.lambda = lam;
  rep.iterations = iter;
  rep.achieved_moments = mu;
  rep.final_grad_norm = 0.0;
  for (int i = 0; i < n; ++i)
    rep.final_grad_norm =
        std::max(rep.final_grad_norm, std::fabs(mu[size_t(i)] - target[size_t(i)]));
  if (infeasible)
    rep.feasibility = Feasibility::Infeasible;
  else if (at_range_boundary || unpinned_cap)
    rep.feasibility = Feasibility::Boundary;
  else if (gn <= opts.gradient_tolerance)
    rep.feasibility = Feasibility::Interior;
  else
    rep.feasibility = Feasibility::Infeasible;  // diverged below the cap: unreachable
  return rep;
}

// cube features must all be box indicators over pairwise-disjoint boxes;
// reduces the Gibbs problem to a finite one over the indicator cells plus a
// remainder cell
struct CellReduction {
  std::vector<Rect> boxes;        // cell j = box j for j < boxes.size()
  std::vector<double> volumes;    // per box
  double remainder = 0.0;         // leftover uniform mass
  std::vector<Rect> remainder_rects;  // explicit only in one dimension
  std::vector<double> scales;
};

CellReduction reduce_boxes(const FeatureSet& f) {
  CellReduction c;
  for (const auto& cf : f.cube_features) {
    require(cf.kind == CoordFeature::Kind::BoxIndicator, "NotSupported",
            "mixed feature families on the cube are not supported");
    c.boxes.push_back(cf.box);
    c.volumes.push_back(cf.box.volume());
    c.scales.push_back(cf.scale);
  }
  for (size_t i = 0; i < c.boxes.size(); ++i)
    for (size_t j = i + 1; j < c.boxes.size(); ++j) {
      Rect iv = Rect::intersect(c.boxes[i], c.boxes[j]);
      require(iv.empty() || iv.volume() <= kProbTol, "InvalidFeatures",
              "indicator boxes must be pairwise disjoint");
    }
  double used = 0.0;
  for (double v : c.volumes) used += v;
  c.remainder = std::max(0.0, 1.0 - used);
  if (c.remainder <= kProbTol) {
    c.remainder = 0.0;
    return c;
  }
  require(f.space.r == 1, "NotSupported",
          "indicator features with uncovered volume need a one-dimensional cube");
  // complement intervals between the sorted boxes
  std::vector<std::pair<double, double>> iv;
  for (const auto& b : c.boxes) iv.emplace_back(b.sides[0].lo, b.sides[0].hi);
  std::sort(iv.begin(), iv.end());
  double cur = 0.0;
  for (const auto& [lo, hi] : iv) {
    if (lo > cur) {
      Rect r;
      r.sides.push_back({cur, lo});
      c.remainder_rects.push_back(r);
    }
    cur = std::max(cur, hi);
  }
  if (cur < 1.0) {
    Rect r;
    r.sides.push_back({cur, 1.0});
    c.remainder_rects.push_back(r);
  }
  return c;
}

FiniteProblem cell_problem(const CellReduction& c, int n,
                           std::vector<double>& storage_logp0,
                           std::vector<double>& storage_F) {
  const int cells = int(c.boxes.size()) + (c.remainder > 0.0 ? 1 : 0);
  storage_logp0.assign(static_cast<std::size_t>(cells), -HUGE_VAL);
  storage_F.assign(static_cast<std::size_t>(cells) * size_t(n), 0.0);
  for (size_t j = 0; j < c.boxes.size(); ++j) {
    storage_logp0[j] = c.volumes[j] > 0.0 ? std::log(c.volumes[j]) : -HUGE_VAL;
    storage_F[j * size_t(n) + j] = c.scales[j];
  }
  if (c.remainder > 0.0)
    storage_logp0[size_t(cells - 1)] = std::log(c.remainder);
  FiniteProblem p;
  p.d = cells;
  p.n = n;
  p.logp0 = storage_logp0;
  p.F = &storage_F;
  return p;
}

bool is_uniform_prior(const BeliefMeasure& prior) {
  if (prior.form != BeliefMeasure::Form::ProductTilted) return false;
  for (const auto& m : prior.marginals)
    if (m.kind != MarginalSpec::Kind::Uniform) return false;
  return true;
}

// groups cube coordinate features: value.first = index of the linear feature,
// value.second = index of the quadratic one (-1 when absent)
std::map<int, std::pair<int, int>> coord_groups(const FeatureSet& f) {
  std::map<int, std::pair<int, int>> g;
  for (int i = 0; i < f.n; ++i) {
    const auto& cf = f.cube_features[size_t(i)];
    require(cf.kind != CoordFeature::Kind::BoxIndicator, "NotSupported",
            "mixed feature families on the cube are not supported");
    auto& slot = g.try_emplace(cf.coord, std::make_pair(-1, -1)).first->second;
    if (cf.kind == CoordFeature::Kind::Linear) {
      require(slot.first < 0, "InvalidFeatures", "duplicate linear feature");
      slot.first = i;
    } else {
      require(slot.second < 0, "InvalidFeatures", "duplicate quadratic feature");
      slot.second = i;
    }
  }
  for (const auto& [coord, slot] : g)
    require(slot.first >= 0, "NotSupported",
            "a quadratic feature needs its linear partner on the same coordinate");
  return g;
}

// wide cap for the marginal fits: interior cube targets legitimately need
// huge natural parameters (a two-tilt variance of x(1-x)/N is lam2 ~ -N/2),
// so the finite-path lambda_cap does not apply here
constexpr double kMarginalCap = 1e8;

}  // namespace

// ---------------------------------------------------------------------------

std::pair<GibbsPosterior, FitReport> fit_lambda(const BeliefMeasure& prior,
                                                const FeatureSet& features,
                                                const std::vector<double>& target,
                                                const SolverOptions& opts) {
  require(prior.space.same_as(features.space), "SpaceMismatch",
          "prior and features live on different spaces");
  require(int(target.size()) == features.n, "InvalidMoment",
          "target dimension must equal the feature count");

  FitReport rep;
  if (features.space.kind == SpaceKind::Finite) {
    require(prior.form == BeliefMeasure::Form::FiniteVec, "NotSupported",
            "finite fits need a probability-vector prior");
    FiniteProblem p;
    p.d = features.space.d;
    p.n = features.n;
    p.logp0.resize(static_cast<std::size_t>(p.d));
    for (int k = 0; k < p.d; ++k)
      p.logp0[size_t(k)] = prior.p[size_t(k)] > 0.0 ? std::log(prior.p[size_t(k)]) : -HUGE_VAL;
    p.F = &features.values;
    rep = newton_fit(p, target, opts);
  } else if (!features.cube_features.empty() &&
             features.cube_features[0].kind == CoordFeature::Kind::BoxIndicator) {
    require(is_uniform_prior(prior), "NotSupported",
            "cube fits assume a uniform prior");
    CellReduction cells = reduce_boxes(features);
    std::vector<double> logp0, F;
    FiniteProblem p = cell_problem(cells, features.n, logp0, F);
    rep = newton_fit(p, target, opts);
  } else {
    require(is_uniform_prior(prior), "NotSupported",
            "cube fits assume a uniform prior");
    auto groups = coord_groups(features);
    rep.lambda.assign(static_cast<std::size_t>(features.n), 0.0);
    rep.achieved_moments.assign(static_cast<std::size_t>(features.n), 0.0);
    rep.feasibility = Feasibility::Interior;
    for (const auto& [coord, slot] : groups) {
      (void)coord;
      if (slot.second < 0) {
        const double m1 = target[size_t(slot.first)];
        require(m1 >= 0.0 && m1 <= 1.0, "InvalidMoment", "mean outside [0,1]");
        bool boundary = false;
        const double lam = one_tilt_solve_mean(m1, kMarginalCap, &boundary);
        rep.lambda[size_t(slot.first)] = lam;
        rep.achieved_moments[size_t(slot.first)] = one_tilt_mean(lam);
        rep.final_grad_norm = std::max(
            rep.final_grad_norm,
            std::fabs(rep.achieved_moments[size_t(slot.first)] - m1));
        if (boundary) rep.feasibility = Feasibility::Boundary;
      } else {
        const double m1 = target[size_t(slot.first)];
        const double m2 = target[size_t(slot.second)];
        if (m1 <= 0.0 || m1 >= 1.0 || m2 - m1 * m1 <= 0.0) {
          // degenerate pair: fall back to a capped one-tilt point surrogate
          bool boundary = false;
          const double lam = one_tilt_solve_mean(std::clamp(m1, 0.0, 1.0),
                                                 kMarginalCap, &boundary);
          rep.lambda[size_t(slot.first)] = lam;
          rep.lambda[size_t(slot.second)] = 0.0;
          rep.achieved_moments[size_t(slot.first)] = one_tilt_mean(lam);
          rep.achieved_moments[size_t(slot.second)] =
              one_tilt_var(lam) + one_tilt_mean(lam) * one_tilt_mean(lam);
          rep.feasibility = Feasibility::Boundary;
          continue;
        }
        int iters = 0;
        double gn = 0.0;
        auto [l1, l2] = two_tilt_solve(m1, m2, kMarginalCap, &iters, &gn);
        rep.lambda[size_t(slot.first)] = l1;
        rep.lambda[size_t(slot.second)] = l2;
        double a1, a2;
        two_tilt_moments(l1, l2, &a1, &a2);
        rep.achieved_moments[size_t(slot.first)] = a1;
        rep.achieved_moments[size_t(slot.second)] = a2;
        rep.iterations = std::max(rep.iterations, iters);
        rep.final_grad_norm = std::max(rep.final_grad_norm, gn);
      }
    }
  }

  GibbsPosterior g;
  g.prior = prior;
  g.features = features;
  g.lambda = rep.lambda;
  g.gauge = rep.gauge;
  return {std::move(g), std::move(rep)};
}

std::vector<double> empirical_moments(const FeatureSet& features,
                                      const std::vector<World>& sample) {
  require(!sample.empty(), "InvalidSample", "sample must be nonempty");
  std::vector<double> mu(static_cast<std::size_t>(features.n), 0.0);
  std::vector<double> fx;
  for (const auto& w : sample) {
    if (features.space.kind == SpaceKind::Finite) {
      for (int i = 0; i < features.n; ++i)
        mu[size_t(i)] += features.finite_value(w.index, i);
    } else {
      features.eval_point(w.point, fx);
      for (int i = 0; i < features.n; ++i) mu[size_t(i)] += fx[size_t(i)];
    }
  }
  for (double& v : mu) v /= double(sample.size());
  return mu;
}

std::pair<GibbsPosterior, FitReport> mle_lambda(const BeliefMeasure& prior,
                                                const FeatureSet& features,
                                                const std::vector<World>& sample,
                                                const SolverOptions& opts) {
  return fit_lambda(prior, features, empirical_moments(features, sample), opts);
}

// ---------------------------------------------------------------------------

double log_partition(const GibbsPosterior& g, const TruthSet& subset) {
  require(g.prior.space.same_as(subset.space), "SpaceMismatch",
          "subset lives on a different space");
  const FeatureSet& f = g.features;
  if (f.space.kind == SpaceKind::Finite) {
    std::vector<double> terms;
    for (int k = 0; k < f.space.d; ++k) {
      if (!subset.mask[size_t(k)]) continue;
      const double p0 = g.prior.p[size_t(k)];
      if (p0 <= 0.0) continue;
      double l = std::log(p0);
      for (int i = 0; i < f.n; ++i) l += g.lambda[size_t(i)] * f.finite_value(k, i);
      terms.push_back(l);
    }
    return logsumexp(terms);
  }

  require(is_uniform_prior(g.prior), "NotSupported", "cube fits assume a uniform prior");
  if (f.cube_features[0].kind == CoordFeature::Kind::BoxIndicator) {
    CellReduction cells = reduce_boxes(f);
    std::vector<double> terms;
    double covered = 0.0;
    for (size_t j = 0; j < cells.boxes.size(); ++j) {
      double inter = 0.0;
      for (const auto& rs : subset.rects) {
        Rect iv = Rect::intersect(cells.boxes[j], rs);
        if (!iv.empty()) inter += iv.volume();
      }
      covered += inter;
      if (inter > 0.0)
        terms.push_back(std::log(inter) + g.lambda[j] * cells.scales[j]);
    }
    if (cells.remainder > 0.0) {
      const double rem = std::max(0.0, subset.volume() - covered);
      if (rem > 0.0) terms.push_back(std::log(rem));
    }
    return logsumexp(terms);
  }

  auto groups = coord_groups(f);
  std::vector<double> per_rect;
  for (const auto& r : subset.rects) {
    double logz = 0.0;
    for (int c = 0; c < f.space.r; ++c) {
      const double a = r.sides[size_t(c)].lo, b = r.sides[size_t(c)].hi;
      if (b <= a) {
        logz = -HUGE_VAL;
        break;
      }
      auto it = groups.find(c);
      if (it == groups.end()) {
        logz += std::log(b - a);
        continue;
      }
      const double l1 = g.lambda[size_t(it->second.first)];
      const double l2 = it->second.second >= 0 ? g.lambda[size_t(it->second.second)] : 0.0;
      logz += two_tilt_log_integral(l1, l2, a, b);
    }
    if (logz != -HUGE_VAL) per_rect.push_back(logz);
  }
  return logsumexp(per_rect);
}

std::vector<double> moments(const BeliefMeasure& measure, const FeatureSet& features) {
  require(measure.space.same_as(features.space), "SpaceMismatch",
          "measure and features live on different spaces");
  std::vector<double> mu(static_cast<std::size_t>(features.n), 0.0);

  if (features.space.kind == SpaceKind::Finite) {
    std::vector<double> w(static_cast<std::size_t>(features.space.d), 0.0);
    if (measure.form == BeliefMeasure::Form::FiniteVec) {
      w = measure.p;
    } else if (measure.form == BeliefMeasure::Form::PiecewiseConstant) {
      const auto& part = *measure.partition;
      for (size_t b = 0; b < part.blocks.size(); ++b) {
        const double per = measure.blockProbs[b] / double(part.blocks[b].count());
        for (int k = 0; k < features.space.d; ++k)
          if (part.blocks[b].mask[size_t(k)]) w[size_t(k)] += per;
      }
    } else {
      fail("NotSupported", "unsupported measure form on a finite space");
    }
    for (int k = 0; k < features.space.d; ++k) {
      if (w[size_t(k)] == 0.0) continue;
      for (int i = 0; i < features.n; ++i)
        mu[size_t(i)] += w[size_t(k)] * features.finite_value(k, i);
    }
    return mu;
  }

  for (int i = 0; i < features.n; ++i) {
    const auto& cf = features.cube_features[size_t(i)];
    switch (measure.form) {
      case BeliefMeasure::Form::ProductTilted: {
        const auto& m = measure.marginals[size_t(cf.coord)];
        if (cf.kind == CoordFeature::Kind::Linear) {
          if (m.kind == MarginalSpec::Kind::Uniform) mu[size_t(i)] = 0.5;
          else if (m.kind == MarginalSpec::Kind::OneTilt) mu[size_t(i)] = one_tilt_mean(m.lam);
          else {
            double m1, m2;
            two_tilt_moments(m.lam1, m.lam2, &m1, &m2);
            mu[size_t(i)] = m1;
          }
        } else if (cf.kind == CoordFeature::Kind::Quadratic) {
          if (m.kind == MarginalSpec::Kind::Uniform) mu[size_t(i)] = 1.0 / 3.0;
          else if (m.kind == MarginalSpec::Kind::OneTilt) {
            const double mean = one_tilt_mean(m.lam);
            mu[size_t(i)] = one_tilt_var(m.lam) + mean * mean;
          } else {
            double m1, m2;
            two_tilt_moments(m.lam1, m.lam2, &m1, &m2);
            mu[size_t(i)] = m2;
          }
        } else {
          mu[size_t(i)] =
              cf.scale * measure_of(measure, TruthSet::rectangle(measure.space, cf.box));
        }
        break;
      }
      case BeliefMeasure::Form::PiecewiseConstant: {
        if (cf.kind == CoordFeature::Kind::BoxIndicator) {
          mu[size_t(i)] =
              cf.scale * measure_of(measure, TruthSet::rectangle(measure.space, cf.box));
          break;
        }
        // uniform density inside each block: exact per-rect coordinate moments
        const auto& part = *measure.partition;
        double acc = 0.0;
        for (size_t b = 0; b < part.blocks.size(); ++b) {
          const double bv = part.blocks[b].volume();
          if (bv <= 0.0) {  // atom block
            const auto& pt = part.blocks[b].rects[0];
            const double x = pt.sides[size_t(cf.coord)].lo;
            acc += measure.blockProbs[b] *
                   (cf.kind == CoordFeature::Kind::Linear ? x : x * x);
            continue;
          }
          double blockMoment = 0.0;
          for (const auto& r : part.blocks[b].rects) {
            const auto& s = r.sides[size_t(cf.coord)];
            const double frac = r.volume() / bv;
            if (cf.kind == CoordFeature::Kind::Linear)
              blockMoment += frac * 0.5 * (s.lo + s.hi);
            else
              blockMoment += frac * (s.lo * s.lo + s.lo * s.hi + s.hi * s.hi) / 3.0;
          }
          acc += measure.blockProbs[b] * blockMoment;
        }
        mu[size_t(i)] = acc;
        break;
      }
      case BeliefMeasure::Form::AtomMixture: {
        double acc = 0.0;
        if (cf.kind == CoordFeature::Kind::Linear) acc = measure.p0 * 0.5;
        else if (cf.kind == CoordFeature::Kind::Quadratic) acc = measure.p0 / 3.0;
        else acc = measure.p0 * cf.scale * cf.box.volume();
        for (const auto& [x, wgt] : measure.atoms) {
          if (cf.kind == CoordFeature::Kind::Linear) acc += wgt * x;
          else if (cf.kind == CoordFeature::Kind::Quadratic) acc += wgt * x * x;
          else if (cf.box.contains({x})) acc += wgt * cf.scale;
        }
        mu[size_t(i)] = acc;
        break;
      }
      default:
        fail("NotSupported", "unsupported measure form on the cube");
    }
  }
  return mu;
}

BeliefMeasure GibbsPosterior::to_measure() const {
  const FeatureSet& f = features;
  if (f.space.kind == SpaceKind::Finite) {
    FiniteProblem p;
    p.d = f.space.d;
    p.n = f.n;
    p.logp0.resize(static_cast<std::size_t>(p.d));
    for (int k = 0; k < p.d; ++k)
      p.logp0[size_t(k)] = prior.p[size_t(k)] > 0.0 ? std::log(prior.p[size_t(k)]) : -HUGE_VAL;
    p.F = &f.values;
    std::vector<double> q;
    p.weights(lambda, q, nullptr);
    return BeliefMeasure::finite_vec(f.space, std::move(q));
  }
  if (f.cube_features[0].kind == CoordFeature::Kind::BoxIndicator) {
    CellReduction cells = reduce_boxes(f);
    std::vector<double> logp0, F;
    FiniteProblem p = cell_problem(cells, f.n, logp0, F);
    std::vector<double> q;
    p.weights(lambda, q, nullptr);
    std::vector<TruthSet> blocks;
    for (const auto& b : cells.boxes) blocks.push_back(TruthSet::rectangle(f.space, b));
    if (cells.remainder > 0.0)
      blocks.push_back(TruthSet::rectangle_union(f.space, cells.remainder_rects));
    auto part = std::make_shared<Partition>(Partition::of(f.space, std::move(blocks)));
    return BeliefMeasure::piecewise(part, std::move(q));
  }
  auto groups = coord_groups(f);
  std::vector<MarginalSpec> marg(static_cast<std::size_t>(f.space.r));
  for (const auto& [coord, slot] : groups) {
    if (slot.second < 0)
      marg[size_t(coord)] = MarginalSpec::one_tilt(lambda[size_t(slot.first)]);
    else
      marg[size_t(coord)] = MarginalSpec::two_tilt(lambda[size_t(slot.first)],
                                                   lambda[size_t(slot.second)]);
  }
  return BeliefMeasure::product_tilted(f.space, std::move(marg));
}

double tilted_marginal_cdf(const MarginalSpec& spec, double x) {
  switch (spec.kind) {
    case MarginalSpec::Kind::Uniform: return std::clamp(x, 0.0, 1.0);
    case MarginalSpec::Kind::OneTilt: return one_tilt_cdf(spec.lam, x);
    case MarginalSpec::Kind::TwoTilt: return two_tilt_cdf(spec.lam1, spec.lam2, x);
  }
  return 0.0;
}

}  // namespace lka
