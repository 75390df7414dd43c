#ifndef LKA_ASYMPTOTICS_HPP
#define LKA_ASYMPTOTICS_HPP

#include <cstdint>
#include <vector>

#include "lka/scenarios.hpp"
#include "lka/worlds.hpp"

namespace lka {

// Monte Carlo study of posterior convergence for coin scenarios. With one
// feature per coordinate the distance is TV(P_N, P_inf) with P_inf the tilt
// at the true means, and the report carries the log-log slope of the median
// distance (expected near -1/2). With two features per coordinate the limit
// is a point mass, so the tracked quantity is the mass of the 0.05-ball
// around x0 instead.
struct ConvergenceReport {
  std::vector<long> Ns;
  std::vector<std::vector<double>> tv_errors;  // per N, per replicate
  std::vector<double> median_tv;
  std::vector<double> median_ball_mass;  // two-feature variant
  double slope = 0.0;
  BeliefMeasure p_inf;
};

ConvergenceReport primary_convergence(const CoinCubeScenario& s,
                                      const std::vector<long>& Ns, long R,
                                      std::uint64_t seed, int threads = 1,
                                      int tv_grid = 2048);

// Delta-method variance check: sqrt(N)(P_N(A) - P_inf(A)) should have
// variance P'(A) Sigma P'(A)^T, with Sigma the per-flip Bernoulli covariance
// and P' central differences of the fitted set mass in the mean.
struct CltReport {
  double p_inf_A = 0.0;
  double empirical_var = 0.0;
  double predicted_var = 0.0;
  double empirical_mean_dev = 0.0;
  std::vector<double> devs;  // per replicate, sqrt(N) (P_N(A) - P_inf(A))
  std::vector<double> sigma_diag;
  std::vector<double> p_prime;
};

CltReport clt_check(const CoinCubeScenario& s, const TruthSet& A, long N, long R,
                    std::uint64_t seed, double fd_step = 1e-4, int threads = 1);

// Synthetic-primary loop: each generation draws its data from the previous
// posterior through the coin likelihood (x ~ P_g, then flips ~ Bernoulli(x)),
// refits, and records distances to the generation-0 posterior and to the
// point-mass proxy at x0.
struct SyntheticLoopReport {
  std::vector<BeliefMeasure> posteriors;  // generations 0..G
  std::vector<double> tv_to_gen0;
  std::vector<double> tv_to_delta;
  double delta_width = 0.05;
};

SyntheticLoopReport synthetic_loop(const CoinCubeScenario& s, int generations,
                                   long N_per_gen, std::uint64_t seed,
                                   int tv_grid = 2048);

}  // namespace lka

#endif
