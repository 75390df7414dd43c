#ifndef LKA_INFO_HPP
#define LKA_INFO_HPP

#include <optional>
#include <string>
#include <vector>

#include "lka/maxent.hpp"
#include "lka/worlds.hpp"

namespace lka {

// Active information I+(T) = log P(T) - log P0(T) in nats.
// 0/0 is 0 by continuity; a single vanishing side yields a signed infinity,
// carried as a sentinel and never clipped.
double active_info(const BeliefMeasure& p0, const BeliefMeasure& p,
                   const TruthSet& t);

struct LkaReport {
  double active_info = 0.0;
  bool truth_value = false;
  bool learned = false;
  bool full_learning = false;
  bool k2_support_contains_x0 = false;
  bool k3_ball_info_nonneg = false;
  double k3_witness_eps = 0.0;  // first grid eps with strictly positive ball info
  bool knowledge_acquired = false;
  bool full_knowledge = false;
  // raw values backing the verdict
  double p_T = 0.0, p0_T = 0.0, p_x0 = 0.0;
};

// default K2/K3 grid: 12 log-spaced radii from 1e-4 to the space diameter
std::vector<double> default_eps_grid(const WorldSpace& space);

// Learning / knowledge-acquisition verdict. Full-learning threshold is
// P(T) >= 1 - 1e-9 (resp. <= 1e-9); full knowledge means the posterior is a
// point mass at x0 within 1e-9 total variation. K2/K3 are certified on the
// given grid (open balls for K2, closed for K3).
LkaReport lka_verdict(const BeliefMeasure& p0, const BeliefMeasure& p,
                      const TruthSet& t, const World& x0, MetricKind metric,
                      const std::vector<double>& eps_grid);

struct BiasReport {
  double bias = 0.0;       // log Pt(T) - log P(T)
  double log_p_T = 0.0;    // log P(T)
  double log_pt_T = 0.0;   // log Pt(T)
  bool zero_mass_target = false;  // T null under both measures
};

BiasReport bias(const TruthSet& t, const BeliefMeasure& p, const BeliefMeasure& p_tilde);

// same quantity through log-partition ratios:
// log[Z_lt(T) Z_l(X)] - log[Z_l(T) Z_lt(X)]
BiasReport bias_lambda(const TruthSet& t, const BeliefMeasure& prior,
                       const FeatureSet& features, const std::vector<double>& lam,
                       const std::vector<double>& lam_tilde);

struct DiscernmentViolation {
  int probe = 0;
  int block = 0;
  double lhs = 0.0, rhs = 0.0;
};

struct DiscernmentResult {
  bool ok = true;
  std::vector<DiscernmentViolation> violations;
};

// Verifies that conditional expectations of the probes agree under p and p0
// on every positive-mass block of the refinement; requires p to have a
// constant density on each block of gA (error NotMeasurable otherwise).
DiscernmentResult discernment_check(const BeliefMeasure& p0, const BeliefMeasure& p,
                                    const Partition& gA, const Partition& refinement,
                                    const std::vector<TruthSet>& probes);

// Per-case evaluation of the partition conditions for full learning / full
// knowledge over a finite space, with witnesses and constructed measures.
struct PartitionConditionsReport {
  bool no_full_true_learning = false;   // case i hypothesis holds
  bool full_true_learning = false;      // case ii
  bool no_full_false_learning = false;  // case iii
  bool full_false_learning = false;     // case iv
  bool no_full_knowledge = false;       // case v
  bool full_knowledge = false;          // case vi
  int witness_full_true = -1;      // block contained in T
  int witness_full_false = -1;     // block disjoint from T
  int witness_no_knowledge = -1;   // block strictly containing x0
  std::optional<BeliefMeasure> p_full_true;
  std::optional<BeliefMeasure> p_full_false;
  std::optional<BeliefMeasure> p_full_knowledge;
};

PartitionConditionsReport partition_conditions(const BeliefMeasure& p0,
                                               const Partition& part,
                                               const TruthSet& t, const World& x0);

// ---------------------------------------------------------------------------
// binary-code features: ceil(log2 d) indicator features that identify any
// world in the limit of large coefficients

int bits_needed(int d);  // ceil(log2 d)

// feature i is the indicator of {x_k : bit i of k is set}, k = 0..d-1
FeatureSet binary_code_features(int d);

// +-magnitude per bit of x0; the induced Gibbs measure concentrates on x0
std::vector<double> lambda_for_world(int d, int x0, double magnitude);

struct PigeonholeCertificate {
  int x0 = -1;          // a world sharing its feature cell with another
  long cell_size = 0;   // worlds in that cell
  double bound = 1.0;   // sup over lambda of P(x0) is at most 1/cell_size
  std::vector<int> cell;
};

// For binary features with too few bits, exhibits a world whose posterior
// probability is bounded by 1/2 for every coefficient vector.
PigeonholeCertificate pigeonhole_certificate(const FeatureSet& binary_features);

}  // namespace lka

#endif
