#include "lka/secondary.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>

#include "lka/errors.hpp"
#include "lka/parallel.hpp"
#include "lka/scenarios.hpp"
#include "lka/tilted.hpp"

namespace lka {

namespace {

double marginal_inverse(const MarginalSpec& m, double u) {
  switch (m.kind) {
    case MarginalSpec::Kind::Uniform:
      return u;
    case MarginalSpec::Kind::OneTilt:
      return one_tilt_inv_cdf(m.lam, u);  // exact closed-form inverse
    case MarginalSpec::Kind::TwoTilt: {
      // bisection on the CDF to 1e-12 with the normalizer factored in once
      const double logZ = two_tilt_log_integral(m.lam1, m.lam2, 0.0, 1.0);
      double lo = 0.0, hi = 1.0;
      for (int it = 0; it < 60 && hi - lo > 1e-12; ++it) {
        const double mid = 0.5 * (lo + hi);
        const double c =
            std::exp(two_tilt_log_integral(m.lam1, m.lam2, 0.0, mid) - logZ);
        if (c < u) lo = mid; else hi = mid;
      }
      return 0.5 * (lo + hi);
    }
  }
  return u;
}

}  // namespace

std::vector<World> sample_posterior(const BeliefMeasure& p, long m, RngStream& rng) {
  require(m >= 0, "InvalidSample", "sample size must be nonnegative");
  std::vector<World> out;
  out.reserve(static_cast<std::size_t>(m));
  switch (p.form) {
    case BeliefMeasure::Form::FiniteVec: {
      std::vector<double> cdf(p.p.size());
      double acc = 0.0;
      for (size_t k = 0; k < p.p.size(); ++k) {
        acc += p.p[k];
        cdf[k] = acc;
      }
      for (long j = 0; j < m; ++j) out.push_back(World::at(rng.from_cdf(cdf)));
      return out;
    }
    case BeliefMeasure::Form::PiecewiseConstant: {
      const auto& part = *p.partition;
      std::vector<double> cdf(p.blockProbs.size());
      double acc = 0.0;
      for (size_t b = 0; b < p.blockProbs.size(); ++b) {
        acc += p.blockProbs[b];
        cdf[b] = acc;
      }
      for (long j = 0; j < m; ++j) {
        const int b = rng.from_cdf(cdf);
        const auto& blk = part.blocks[size_t(b)];
        if (p.space.kind == SpaceKind::Finite) {
          // uniform among the block's worlds
          const long c = blk.count();
          long pick = long(rng.uniform() * double(c));
          if (pick >= c) pick = c - 1;
          for (int k = 0; k < p.space.d; ++k)
            if (blk.mask[size_t(k)] && pick-- == 0) {
              out.push_back(World::at(k));
              break;
            }
        } else {
          // rect by volume, then uniform inside
          std::vector<double> rcdf(blk.rects.size());
          double racc = 0.0;
          for (size_t rI = 0; rI < blk.rects.size(); ++rI) {
            racc += blk.rects[rI].volume();
            rcdf[rI] = racc;
          }
          const auto& rect = blk.rects[size_t(rng.from_cdf(rcdf))];
          std::vector<double> x(rect.sides.size());
          for (size_t c2 = 0; c2 < x.size(); ++c2)
            x[c2] = rect.sides[c2].lo + rng.uniform() * rect.sides[c2].length();
          out.push_back(World::at(std::move(x)));
        }
      }
      return out;
    }
    case BeliefMeasure::Form::ProductTilted: {
      for (long j = 0; j < m; ++j) {
        std::vector<double> x(static_cast<std::size_t>(p.space.r));
        for (int c = 0; c < p.space.r; ++c)
          x[size_t(c)] = marginal_inverse(p.marginals[size_t(c)], rng.uniform());
        out.push_back(World::at(std::move(x)));
      }
      return out;
    }
    case BeliefMeasure::Form::AtomMixture: {
      std::vector<double> cdf(p.atoms.size() + 1);
      cdf[0] = p.p0;
      for (size_t a = 0; a < p.atoms.size(); ++a) cdf[a + 1] = cdf[a] + p.atoms[a].second;
      for (long j = 0; j < m; ++j) {
        const int pick = rng.from_cdf(cdf);
        if (pick == 0) out.push_back(World::at(std::vector<double>{rng.uniform()}));
        else out.push_back(World::at(std::vector<double>{p.atoms[size_t(pick - 1)].first}));
      }
      return out;
    }
  }
  return out;
}

std::vector<World> sample_posterior(const BeliefMeasure& p, long m,
                                    std::uint64_t seed, long replicate) {
  RngStream rng(seed, std::uint64_t(StreamId::Secondary), std::uint64_t(replicate));
  return sample_posterior(p, m, rng);
}

// ---------------------------------------------------------------------------

SecondaryReport plugin_secondary(const BeliefMeasure& prior, const FeatureSet& features,
                                 const TruthSet& t, const std::vector<double>& lambda_true,
                                 long m, std::uint64_t seed, long replicate) {
  require(m >= 1, "InvalidSample", "need at least one secondary observation");
  GibbsPosterior g_true{prior, features, lambda_true, "none"};
  const BeliefMeasure p_true = g_true.to_measure();

  RngStream rng(seed, std::uint64_t(StreamId::Secondary), std::uint64_t(replicate));
  const auto sample = sample_posterior(p_true, m, rng);
  auto [g_hat, fit] = mle_lambda(prior, features, sample);

  SecondaryReport rep;
  rep.lambda_hat = fit.lambda;
  rep.m = m;
  rep.feasibility = fit.feasibility;
  rep.i_plus = active_info(prior, p_true, t);
  rep.i_hat_plus = active_info(prior, g_hat.to_measure(), t);
  const double b = bias_lambda(t, prior, features, lambda_true, fit.lambda).bias;
  const double lhs = rep.i_hat_plus - rep.i_plus;
  rep.identity_gap = (std::isfinite(lhs) && std::isfinite(b)) ? std::fabs(lhs - b)
                     : (lhs == b ? 0.0 : HUGE_VAL);
  return rep;
}

// ---------------------------------------------------------------------------

namespace {

// H of lambda' -> Bias(T; lambda, lambda') at lambda, central differences
std::vector<double> bias_hessian(const BeliefMeasure& prior, const FeatureSet& features,
                                 const TruthSet& t, const std::vector<double>& lam,
                                 double h) {
  const int n = int(lam.size());
  auto phi = [&](const std::vector<double>& l2) {
    return bias_lambda(t, prior, features, lam, l2).bias;
  };
  std::vector<double> H(static_cast<std::size_t>(n) * size_t(n), 0.0);
  for (int i = 0; i < n; ++i) {
    std::vector<double> up = lam, dn = lam;
    up[size_t(i)] += h;
    dn[size_t(i)] -= h;
    H[size_t(i) * size_t(n) + size_t(i)] = (phi(up) - 2.0 * phi(lam) + phi(dn)) / (h * h);
    for (int j = i + 1; j < n; ++j) {
      std::vector<double> pp = lam, pm = lam, mp = lam, mm = lam;
      pp[size_t(i)] += h; pp[size_t(j)] += h;
      pm[size_t(i)] += h; pm[size_t(j)] -= h;
      mp[size_t(i)] -= h; mp[size_t(j)] += h;
      mm[size_t(i)] -= h; mm[size_t(j)] -= h;
      const double v = (phi(pp) - phi(pm) - phi(mp) + phi(mm)) / (4.0 * h * h);
      H[size_t(i) * size_t(n) + size_t(j)] = v;
      H[size_t(j) * size_t(n) + size_t(i)] = v;
    }
  }
  return H;
}

}  // namespace

ExpansionConstants expansion_constant(const BeliefMeasure& prior,
                                      const FeatureSet& features, const TruthSet& t,
                                      const std::vector<double>& lambda_true,
                                      double fd_step) {
  require(features.space.kind == SpaceKind::Finite, "NotSupported",
          "expansion constants are computed on finite fixtures");
  const int n = features.n;
  GibbsPosterior g{prior, features, lambda_true, "none"};
  const BeliefMeasure q = g.to_measure();

  ExpansionConstants out;
  out.n = n;
  out.J_centered.assign(static_cast<std::size_t>(n) * size_t(n), 0.0);
  out.J_uncentered.assign(static_cast<std::size_t>(n) * size_t(n), 0.0);
  std::vector<double> mu(static_cast<std::size_t>(n), 0.0);
  for (int k = 0; k < features.space.d; ++k) {
    const double w = q.p[size_t(k)];
    if (w == 0.0) continue;
    for (int i = 0; i < n; ++i) mu[size_t(i)] += w * features.finite_value(k, i);
  }
  for (int k = 0; k < features.space.d; ++k) {
    const double w = q.p[size_t(k)];
    if (w == 0.0) continue;
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j)
        out.J_uncentered[size_t(i) * size_t(n) + size_t(j)] +=
            w * features.finite_value(k, i) * features.finite_value(k, j);
  }
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      out.J_centered[size_t(i) * size_t(n) + size_t(j)] =
          out.J_uncentered[size_t(i) * size_t(n) + size_t(j)] -
          mu[size_t(i)] * mu[size_t(j)];

  out.H = bias_hessian(prior, features, t, lambda_true, fd_step);
  const auto H_half = bias_hessian(prior, features, t, lambda_true, fd_step / 2.0);
  for (size_t i = 0; i < out.H.size(); ++i)
    out.h_error_estimate =
        std::max(out.h_error_estimate, std::fabs(out.H[i] - H_half[i]) / 3.0);

  auto trace_solve = [&](const std::vector<double>& Jflat) {
    Eigen::MatrixXd J(n, n), H(n, n);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) {
        J(i, j) = Jflat[size_t(i) * size_t(n) + size_t(j)];
        H(i, j) = out.H[size_t(i) * size_t(n) + size_t(j)];
      }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(J);
    require(eig.eigenvalues().minCoeff() > 1e-12 * std::max(1.0, eig.eigenvalues().maxCoeff()),
            "SingularJ", "information matrix is singular");
    return 0.5 * J.ldlt().solve(H).trace();
  };
  out.C_centered = trace_solve(out.J_centered);
  out.C_uncentered = trace_solve(out.J_uncentered);
  return out;
}

ExpansionReport expansion_verify(const BeliefMeasure& prior, const FeatureSet& features,
                                 const TruthSet& t, const std::vector<double>& lambda_true,
                                 const std::vector<long>& m_list, long R,
                                 std::uint64_t seed, int threads) {
  require(!m_list.empty(), "ConfigInvalid", "need at least one m");
  for (size_t i = 1; i < m_list.size(); ++i)
    require(m_list[i] > m_list[i - 1], "ConfigInvalid", "mList must increase");
  require(R >= 2, "ConfigInvalid", "need at least two replicates");

  ExpansionReport out;
  out.m_list = m_list;
  const auto constants = expansion_constant(prior, features, t, lambda_true);
  out.C_centered = constants.C_centered;
  out.C_uncentered = constants.C_uncentered;

  for (size_t mi = 0; mi < m_list.size(); ++mi) {
    const long m = m_list[mi];
    std::vector<double> gaps(static_cast<std::size_t>(R), std::nan(""));
    std::vector<double> idgaps(static_cast<std::size_t>(R), 0.0);
    parallel_for(R, threads, [&](long rep) {
      const auto r = plugin_secondary(prior, features, t, lambda_true, m, seed,
                                      long(mi) * R + rep);
      idgaps[size_t(rep)] = r.identity_gap;
      if (r.feasibility == Feasibility::Interior)
        gaps[size_t(rep)] = r.i_hat_plus - r.i_plus;
    });
    double sum = 0.0, count = 0.0;
    for (double v : gaps)
      if (!std::isnan(v)) {
        sum += v;
        count += 1.0;
      }
    const double excluded = 1.0 - count / double(R);
    if (mi == 0)
      require(excluded <= 0.2, "ExcessBoundaryRate",
              "too many boundary replicates at the smallest m; enlarge m");
    const double mean = count > 0.0 ? sum / count : 0.0;
    double ss = 0.0;
    for (double v : gaps)
      if (!std::isnan(v)) ss += (v - mean) * (v - mean);
    const double se = count > 1.0 ? std::sqrt(ss / (count - 1.0) / count) : 0.0;
    out.mean_gap.push_back(mean);
    out.stderr_gap.push_back(se);
    out.excluded_rate.push_back(excluded);
    for (double v : idgaps) out.max_identity_gap = std::max(out.max_identity_gap, v);
  }

  // weighted least squares of mean against 1/m through the origin
  double num = 0.0, den = 0.0;
  for (size_t i = 0; i < m_list.size(); ++i) {
    const double x = 1.0 / double(m_list[i]);
    const double se = out.stderr_gap[i];
    const double w = se > 0.0 ? 1.0 / (se * se) : 1.0;
    num += w * out.mean_gap[i] * x;
    den += w * x * x;
  }
  out.fitted_slope = den > 0.0 ? num / den : 0.0;
  return out;
}

// ---------------------------------------------------------------------------

void BayesianSecondaryConfig::validate() const {
  require(G >= 3 && G % 2 == 1, "ConfigInvalid", "grid size must be odd and >= 3");
  require(sigma > 0.0, "ConfigInvalid", "prior sigma must be positive");
  require(L >= 3.0 * sigma, "ConfigInvalid", "grid range must cover 3 sigma");
}

BayesianSecondaryResult bayesian_secondary(const BeliefMeasure& prior,
                                           const FeatureSet& features, const TruthSet& t,
                                           const std::vector<double>& lambda_true, long m,
                                           const BayesianSecondaryConfig& cfg,
                                           std::uint64_t seed, long replicate) {
  cfg.validate();
  require(features.space.kind == SpaceKind::Finite, "NotSupported",
          "the lambda grid is quadrature over finite fixtures");
  const int n = features.n;
  require(n <= 3, "NotSupported", "grid quadrature is limited to n <= 3");
  require(m >= 0, "InvalidSample", "sample size must be nonnegative");

  GibbsPosterior g_true{prior, features, lambda_true, "none"};
  std::vector<World> sample;
  if (m > 0) {
    RngStream rng(seed, std::uint64_t(StreamId::Bayes), std::uint64_t(replicate));
    sample = sample_posterior(g_true.to_measure(), m, rng);
  }
  std::vector<double> S(static_cast<std::size_t>(n), 0.0);  // summed sample features
  for (const auto& w : sample)
    for (int i = 0; i < n; ++i) S[size_t(i)] += features.finite_value(w.index, i);

  const long nodes = long(std::pow(double(cfg.G), n));
  BayesianSecondaryResult out;
  out.grid.reserve(static_cast<std::size_t>(nodes));
  std::vector<double> log_prior(static_cast<std::size_t>(nodes)), log_post(static_cast<std::size_t>(nodes));
  std::vector<double> info(static_cast<std::size_t>(nodes));
  std::vector<bool> on_edge(static_cast<std::size_t>(nodes));

  const double p0T = measure_of(prior, t);
  const TruthSet whole = TruthSet::whole(prior.space);
  for (long g = 0; g < nodes; ++g) {
    std::vector<double> lam(static_cast<std::size_t>(n));
    long rest = g;
    bool edge = false;
    for (int i = 0; i < n; ++i) {
      const int idx = int(rest % cfg.G);
      rest /= cfg.G;
      lam[size_t(i)] = -cfg.L + 2.0 * cfg.L * idx / double(cfg.G - 1);
      edge |= (idx == 0 || idx == cfg.G - 1);
    }
    double lp = 0.0;
    for (int i = 0; i < n; ++i) lp -= lam[size_t(i)] * lam[size_t(i)] / (2.0 * cfg.sigma * cfg.sigma);
    GibbsPosterior gg{prior, features, lam, "none"};
    const double logZ = log_partition(gg, whole);
    const double logZT = log_partition(gg, t);
    double ll = -double(m) * logZ;
    for (int i = 0; i < n; ++i) ll += lam[size_t(i)] * S[size_t(i)];
    log_prior[size_t(g)] = lp;
    log_post[size_t(g)] = lp + ll;
    info[size_t(g)] = (logZT - logZ) - std::log(p0T);
    on_edge[size_t(g)] = edge;
    out.grid.push_back(std::move(lam));
  }

  auto normalize = [&](const std::vector<double>& logw) {
    double mx = -HUGE_VAL;
    for (double v : logw) mx = std::max(mx, v);
    std::vector<double> w(logw.size());
    double sum = 0.0;
    for (size_t i = 0; i < logw.size(); ++i) {
      w[i] = std::exp(logw[i] - mx);
      sum += w[i];
    }
    for (auto& v : w) v /= sum;
    return w;
  };
  out.prior_weight = normalize(log_prior);
  out.posterior_weight = normalize(log_post);

  for (size_t g = 0; g < size_t(nodes); ++g)
    if (on_edge[g]) out.edge_mass += out.posterior_weight[g];
  require(out.edge_mass <= 0.01, "GridTooCoarse",
          "posterior mass piled up at the lambda grid edge");

  for (size_t g = 0; g < size_t(nodes); ++g) {
    if (info[g] > 0.0) {
      out.p0_T_tilde += out.prior_weight[g];
      out.p_T_tilde += out.posterior_weight[g];
    }
  }
  if (out.p_T_tilde <= 0.0 && out.p0_T_tilde <= 0.0) out.i_tilde_plus = 0.0;
  else if (out.p_T_tilde <= 0.0) out.i_tilde_plus = -HUGE_VAL;
  else if (out.p0_T_tilde <= 0.0) out.i_tilde_plus = HUGE_VAL;
  else out.i_tilde_plus = std::log(out.p_T_tilde) - std::log(out.p0_T_tilde);

  // mixture of the Gibbs posteriors under the lambda posterior
  std::vector<double> mix(static_cast<std::size_t>(features.space.d), 0.0);
  for (size_t g = 0; g < size_t(nodes); ++g) {
    GibbsPosterior gg{prior, features, out.grid[g], "none"};
    const auto qg = gg.to_measure();
    for (int k = 0; k < features.space.d; ++k)
      mix[size_t(k)] += out.posterior_weight[g] * qg.p[size_t(k)];
  }
  // guard the simplex against quadrature round-off
  double s = 0.0;
  for (double v : mix) s += v;
  for (auto& v : mix) v /= s;
  out.mixed_posterior = BeliefMeasure::finite_vec(features.space, std::move(mix));
  return out;
}

}  // namespace lka
