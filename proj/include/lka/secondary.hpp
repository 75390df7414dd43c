#ifndef LKA_SECONDARY_HPP
#define LKA_SECONDARY_HPP

#include <cstdint>
#include <vector>

#include "lka/info.hpp"
#include "lka/maxent.hpp"
#include "lka/rng.hpp"
#include "lka/worlds.hpp"

namespace lka {

// i.i.d. draws from a belief measure: categorical inversion on finite
// spaces, block-then-uniform for piecewise densities, per-coordinate
// inverse CDF for tilted products.
std::vector<World> sample_posterior(const BeliefMeasure& p, long m, RngStream& rng);
std::vector<World> sample_posterior(const BeliefMeasure& p, long m,
                                    std::uint64_t seed, long replicate = 0);

// One round of plug-in secondary learning: draw m posterior samples from the
// primary agent, recover lambda by maximum likelihood, and compare the
// estimated active information with the true one.
struct SecondaryReport {
  std::vector<double> lambda_hat;
  double i_hat_plus = 0.0;  // estimated information about T
  double i_plus = 0.0;      // the primary agent's actual information
  long m = 0;
  Feasibility feasibility = Feasibility::Interior;
  // |(i_hat_plus - i_plus) - Bias(T; lambda, lambda_hat)|, an exact identity
  double identity_gap = 0.0;
};

SecondaryReport plugin_secondary(const BeliefMeasure& prior, const FeatureSet& features,
                                 const TruthSet& t, const std::vector<double>& lambda_true,
                                 long m, std::uint64_t seed, long replicate = 0);

// The 1/m expansion constant C = tr(J^-1 H)/2. J comes in two variants:
// the feature covariance under Q_lambda (the exponential-family Fisher
// information) and the literal uncentered second moment; both are reported.
// H is the Hessian of lambda' -> Bias(T; lambda, lambda') by symmetric
// central differences with a step-halving error estimate.
struct ExpansionConstants {
  int n = 0;
  std::vector<double> J_centered;    // n x n, row-major
  std::vector<double> J_uncentered;  // n x n
  std::vector<double> H;             // n x n
  double C_centered = 0.0;
  double C_uncentered = 0.0;
  double h_error_estimate = 0.0;
};

ExpansionConstants expansion_constant(const BeliefMeasure& prior,
                                      const FeatureSet& features, const TruthSet& t,
                                      const std::vector<double>& lambda_true,
                                      double fd_step = 1e-3);

// Monte Carlo check of E[Ihat+ - I+] ~ C/m: per-m means of the gap with
// standard errors, boundary replicates excluded (rate reported), and the
// weighted least-squares slope of mean against 1/m through the origin.
struct ExpansionReport {
  std::vector<long> m_list;
  std::vector<double> mean_gap;
  std::vector<double> stderr_gap;
  std::vector<double> excluded_rate;
  double C_centered = 0.0;
  double C_uncentered = 0.0;
  double fitted_slope = 0.0;
  double max_identity_gap = 0.0;
};

ExpansionReport expansion_verify(const BeliefMeasure& prior, const FeatureSet& features,
                                 const TruthSet& t, const std::vector<double>& lambda_true,
                                 const std::vector<long>& m_list, long R,
                                 std::uint64_t seed, int threads = 1);

// Bayesian treatment of lambda on a deterministic grid (n <= 3): Gaussian
// prior, likelihood product of Gibbs densities at the secondary sample,
// verdict on the proposition "the primary agent gained information on T".
struct BayesianSecondaryConfig {
  double sigma = 2.0;  // prior std per component
  double L = 8.0;      // grid range [-L, L]
  int G = 41;          // points per axis, odd so zero is on the grid
  void validate() const;
};

struct BayesianSecondaryResult {
  std::vector<std::vector<double>> grid;  // lambda node coordinates
  std::vector<double> prior_weight;
  std::vector<double> posterior_weight;
  double p0_T_tilde = 0.0;     // prior belief that I+(T; lambda) > 0
  double p_T_tilde = 0.0;      // posterior belief of the same event
  double i_tilde_plus = 0.0;   // log ratio
  BeliefMeasure mixed_posterior;  // sum of Q_lambda weighted by the posterior
  double edge_mass = 0.0;
};

BayesianSecondaryResult bayesian_secondary(const BeliefMeasure& prior,
                                           const FeatureSet& features, const TruthSet& t,
                                           const std::vector<double>& lambda_true, long m,
                                           const BayesianSecondaryConfig& cfg,
                                           std::uint64_t seed, long replicate = 0);

}  // namespace lka

#endif
