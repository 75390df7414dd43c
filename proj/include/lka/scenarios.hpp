#ifndef LKA_SCENARIOS_HPP
#define LKA_SCENARIOS_HPP

#include <cstdint>
#include <optional>
#include <vector>

#include "lka/info.hpp"
#include "lka/maxent.hpp"
#include "lka/worlds.hpp"

namespace lka {

// stream ids so each scenario and replicate owns an independent RNG stream
enum class StreamId : std::uint64_t {
  Poll = 1,
  Coin = 2,
  Decimal = 3,
  Secondary = 4,
  Convergence = 5,
  Clt = 6,
  Synthetic = 7,
  Bayes = 8,
};

// ---------------------------------------------------------------------------
// 1. residence poll over d cities (h southern, d-h northern)

struct PollScenario {
  int d = 10, h = 6;
  double eps = 0.1;       // per-poll inclusion probability of the subject
  int x0 = 6;             // the subject's city
  bool biased = false;    // also produce the size-weighted, misreport-aware agent
  double delta = 0.1;     // misreport probability assumed by the biased agent
  void validate() const;
  bool northern(int k) const { return k >= h; }
  TruthSet northern_set() const;
  WorldSpace space() const { return WorldSpace::finite(d); }
};

struct PollResult {
  std::vector<int> data;  // 0: subject absent, 1: answered southern, 2: northern
  double mu_hat = 0.0;
  BeliefMeasure posterior;         // closed form, uniform prior
  double mu_tilde = 0.0;           // biased agent, when configured
  std::optional<BeliefMeasure> biased_posterior;
};

PollResult poll_simulate(const PollScenario& s, long N, std::uint64_t seed,
                         long replicate = 0);

// mu_hat from given poll outcomes; rejects mixed 1/2 answers
double poll_mu_hat(const PollScenario& s, const std::vector<int>& data);

// the Gibbs closed forms for a given expected northern probability
BeliefMeasure poll_posterior(const PollScenario& s, double mu_hat);
BeliefMeasure poll_biased_posterior(const PollScenario& s, double mu_tilde);
BeliefMeasure poll_biased_prior(const PollScenario& s);  // prior proportional to k+1

// ---------------------------------------------------------------------------
// 2. coins on the cube: one or two features per coordinate

struct CoinCubeScenario {
  int r = 1;
  int features_per_coord = 1;  // 1: mean only, 2: mean and second moment
  std::vector<double> x0;      // heads probabilities
  std::optional<Rect> truth;   // proposition rectangle
  void validate() const;
  WorldSpace space() const { return WorldSpace::cube(r); }
  FeatureSet features() const;
};

struct CoinResult {
  std::vector<double> d_bar;   // per-coordinate heads fraction
  std::vector<double> mu_hat;  // feature targets
  BeliefMeasure posterior;
  FitReport fit;
};

CoinResult coin_simulate(const CoinCubeScenario& s, long N, std::uint64_t seed,
                         long replicate = 0);

// posterior for known per-coordinate means (the large-N limit object)
BeliefMeasure coin_limit_posterior(const CoinCubeScenario& s);

// sup over lambda of P([a,b]) for a single one-tilt coordinate: 1 exactly
// when a = 0 or b = 1, strictly smaller otherwise
double one_tilt_sup_mass(double a, double b);

// ---------------------------------------------------------------------------
// 3. decimal cells on [0,1)

struct DecimalScenario {
  int n = 10;       // cells [ (i-1)/n, i/n )
  double x0 = 0.5;  // heads probability of the coin
  void validate() const;
  WorldSpace space() const { return WorldSpace::cube(1); }
  std::shared_ptr<const Partition> cells() const;
  FeatureSet features() const;
};

struct DecimalBallBound {
  double eps = 0.0;
  double ball_mass = 0.0;
  double bound = 0.0;  // 1/2 + n * eps
};

struct DecimalResult {
  double d_bar = 0.0;
  std::vector<double> mu_hat;
  BeliefMeasure posterior;
  bool boundary_ambiguous = false;  // |d_bar - nearest cell edge| < 1/sqrt(N)
  LkaReport report_first;           // proposition: first decimal of x0 is 5
  LkaReport report_second;          // proposition: second decimal of x0 is 5
  double info_second_closed = 0.0;  // exact-rational active information for it
  std::vector<DecimalBallBound> ball_bounds;
};

DecimalResult decimal_posterior(const DecimalScenario& s, long N, std::uint64_t seed,
                                long replicate = 0);

// truth sets for the two propositions
TruthSet decimal_first_is(const WorldSpace& space, int digit);
TruthSet decimal_second_is(const WorldSpace& space, int digit);

// ---------------------------------------------------------------------------
// 4. recursively partitioned binary tree over [0,1]^r

struct TreeNode {
  int split_coord = 0;       // interior nodes only
  double split_point = 0.5;  // fraction of the cell's extent given to the left child
  double split_prob = 0.5;   // branch weight of the right child
  int left = -1, right = -1; // children; -1/-1 marks a leaf
  bool leaf() const { return left < 0 && right < 0; }
};

struct TreeScenario {
  int r = 1;
  std::vector<TreeNode> nodes;
  int root = 0;
  void validate() const;
};

struct TreeResult {
  std::vector<Rect> leaves;
  std::vector<double> volumes;   // leaf rectangle volumes
  std::vector<double> mu_hat;    // leaf weights (products of branch probs)
  std::vector<double> lambda;    // log leaf densities (gauge p_i = e^{lambda_i})
  std::shared_ptr<const Partition> partition;
  BeliefMeasure posterior;
  double max_diameter = 0.0;     // max over leaves of the sup-norm diameter
  double diameter_lower_bound = 0.0;  // n^{-1/r}
  World witness_x0;              // center of a widest leaf
  double witness_eps = 0.0;      // radius strictly inside that leaf
  double witness_ball_mass = 0.0;  // P(B_eps(x0)) < 1
};

TreeResult tree_build(const TreeScenario& s);

// ---------------------------------------------------------------------------
// 5. spiky indicator features approximating point atoms on [0,1]

struct SpikeScenario {
  std::vector<double> atoms;    // distinct points in (0,1)
  double delta = 1e-3;          // spike width
  double p0 = 0.0;              // target background weight
  std::vector<double> weights;  // target atom weights
  void validate() const;
};

struct SpikeResult {
  std::vector<double> lambda;       // log(p_i / p0), capped at +-500
  double log_z = 0.0;               // Z = 1 - n delta + sum e^lambda
  BeliefMeasure density;            // piecewise form at width delta
  BeliefMeasure limit;              // atom mixture it converges to
  std::vector<double> gap;          // |P(A_i(delta)) - p_i| per atom
  double background_gap = 0.0;      // |P(C(delta)) - p0|
  FeatureSet features;              // the scaled indicators, for cross-checks
  std::vector<double> feature_targets;  // E_P[f_i] under the density
};

SpikeResult spike_posterior(const SpikeScenario& s);

}  // namespace lka

#endif
