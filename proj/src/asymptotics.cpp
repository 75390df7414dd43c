#include "lka/asymptotics.hpp"

#include <algorithm>
#include <cmath>

#include "lka/errors.hpp"
#include "lka/parallel.hpp"
#include "lka/rng.hpp"
#include "lka/tilted.hpp"
#include "lka/tv.hpp"

namespace lka {

namespace {

double median(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const size_t n = v.size();
  return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

}  // namespace

ConvergenceReport primary_convergence(const CoinCubeScenario& s,
                                      const std::vector<long>& Ns, long R,
                                      std::uint64_t seed, int threads, int tv_grid) {
  s.validate();
  require(!Ns.empty(), "ConfigInvalid", "need sample sizes");
  for (size_t i = 1; i < Ns.size(); ++i)
    require(Ns[i] > Ns[i - 1], "ConfigInvalid", "Ns must increase");
  require(R >= 2, "ConfigInvalid", "need at least two replicates");

  ConvergenceReport out;
  out.Ns = Ns;
  const bool one_feature = (s.features_per_coord == 1);
  if (one_feature) out.p_inf = coin_limit_posterior(s);

  const World x0 = World::at(s.x0);
  for (size_t ni = 0; ni < Ns.size(); ++ni) {
    std::vector<double> errs(static_cast<std::size_t>(R));
    parallel_for(R, threads, [&](long rep) {
      const auto res = coin_simulate(s, Ns[ni], seed, long(ni) * R + rep);
      if (one_feature)
        errs[size_t(rep)] = total_variation(res.posterior, out.p_inf, tv_grid);
      else
        errs[size_t(rep)] = measure_of(
            res.posterior, ball(s.space(), MetricKind::SupNorm, x0, 0.05, true));
    });
    out.tv_errors.push_back(errs);
    if (one_feature) out.median_tv.push_back(median(errs));
    else out.median_ball_mass.push_back(median(errs));
  }

  if (one_feature) {
    // least squares of log median TV on log N
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    const double n = double(Ns.size());
    for (size_t i = 0; i < Ns.size(); ++i) {
      const double x = std::log(double(Ns[i]));
      const double y = std::log(std::max(out.median_tv[i], 1e-300));
      sx += x; sy += y; sxx += x * x; sxy += x * y;
    }
    out.slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
  } else {
    out.slope = std::nan("");
  }
  return out;
}

CltReport clt_check(const CoinCubeScenario& s, const TruthSet& A, long N, long R,
                    std::uint64_t seed, double fd_step, int threads) {
  s.validate();
  require(s.features_per_coord == 1, "NotSupported",
          "the variance check uses the one-feature scenario");
  require(A.space.same_as(s.space()), "SpaceMismatch", "A lives on the wrong space");
  require(N >= 2 && R >= 2, "ConfigInvalid", "need N >= 2 and R >= 2");

  CltReport out;
  // P(A; mu): per-coordinate one-tilt interval masses at the fitted tilt
  auto set_mass = [&](const std::vector<double>& mu) {
    double total = 0.0;
    for (const auto& r : A.rects) {
      double m = 1.0;
      for (int c = 0; c < s.r && m > 0.0; ++c) {
        bool boundary = false;
        const double lam = one_tilt_solve_mean(mu[size_t(c)], 1e8, &boundary);
        m *= one_tilt_mass(lam, r.sides[size_t(c)].lo, r.sides[size_t(c)].hi);
      }
      total += m;
    }
    return total;
  };

  out.p_inf_A = set_mass(s.x0);

  for (int c = 0; c < s.r; ++c) {
    out.sigma_diag.push_back(s.x0[size_t(c)] * (1.0 - s.x0[size_t(c)]));
    std::vector<double> up = s.x0, dn = s.x0;
    up[size_t(c)] += fd_step;
    dn[size_t(c)] -= fd_step;
    out.p_prime.push_back((set_mass(up) - set_mass(dn)) / (2.0 * fd_step));
  }
  out.predicted_var = 0.0;
  for (int c = 0; c < s.r; ++c)
    out.predicted_var += out.p_prime[size_t(c)] * out.p_prime[size_t(c)] *
                         out.sigma_diag[size_t(c)];
  // a vanishing derivative with interior mass means boundary effects; the
  // whole space (or a null set) legitimately has variance zero
  require(out.predicted_var > 0.0 || out.p_inf_A <= kProbTol ||
              out.p_inf_A >= 1.0 - kProbTol,
          "DegenerateA",
          "the delta-method variance vanishes; move A off the cell boundaries");

  std::vector<double> devs(static_cast<std::size_t>(R));
  parallel_for(R, threads, [&](long rep) {
    const auto res = coin_simulate(s, N, seed, rep);
    const double pA = measure_of(res.posterior, A);
    devs[size_t(rep)] = std::sqrt(double(N)) * (pA - out.p_inf_A);
  });
  double mean = 0.0;
  for (double v : devs) mean += v;
  mean /= double(R);
  double ss = 0.0;
  for (double v : devs) ss += (v - mean) * (v - mean);
  out.empirical_mean_dev = mean;
  out.empirical_var = ss / double(R - 1);
  out.devs = std::move(devs);
  return out;
}

SyntheticLoopReport synthetic_loop(const CoinCubeScenario& s, int generations,
                                   long N_per_gen, std::uint64_t seed, int tv_grid) {
  s.validate();
  require(s.features_per_coord == 1, "NotSupported",
          "the synthetic loop runs the one-feature coin scenario");
  require(generations >= 1 && N_per_gen >= 1, "ConfigInvalid",
          "need generations >= 1 and items per generation >= 1");

  SyntheticLoopReport out;
  const World x0 = World::at(s.x0);

  // generation 0 learns from real flips of x0
  auto gen0 = coin_simulate(s, N_per_gen, seed, 0);
  out.posteriors.push_back(gen0.posterior);
  out.tv_to_gen0.push_back(0.0);
  out.tv_to_delta.push_back(tv_to_point_mass(gen0.posterior, x0, out.delta_width));

  for (int g = 1; g <= generations; ++g) {
    RngStream rng(seed, std::uint64_t(StreamId::Synthetic), std::uint64_t(g));
    const BeliefMeasure& prev = out.posteriors.back();
    std::vector<double> means(static_cast<std::size_t>(s.r), 0.0);
    for (long k = 0; k < N_per_gen; ++k) {
      // x ~ P_g, then one flip per coordinate through the coin likelihood
      for (int c = 0; c < s.r; ++c) {
        double xc;
        const auto& m = prev.marginals[size_t(c)];
        xc = (m.kind == MarginalSpec::Kind::OneTilt) ? one_tilt_inv_cdf(m.lam, rng.uniform())
                                                     : rng.uniform();
        means[size_t(c)] += rng.bernoulli(xc) ? 1.0 : 0.0;
      }
    }
    for (auto& v : means) v /= double(N_per_gen);
    auto [gp, rep] = fit_lambda(BeliefMeasure::uniform(s.space()), s.features(), means);
    (void)rep;
    BeliefMeasure post = gp.to_measure();
    out.tv_to_gen0.push_back(total_variation(post, gen0.posterior, tv_grid));
    out.tv_to_delta.push_back(tv_to_point_mass(post, x0, out.delta_width));
    out.posteriors.push_back(std::move(post));
  }
  return out;
}

}  // namespace lka
