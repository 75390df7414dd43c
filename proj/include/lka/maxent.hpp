#ifndef LKA_MAXENT_HPP
#define LKA_MAXENT_HPP

#include <string>
#include <utility>
#include <vector>

#include "lka/worlds.hpp"

namespace lka {

// A coordinatewise feature on the cube: x_i, x_i^2, or a scaled box
// indicator scale * 1_box(x).
struct CoordFeature {
  enum class Kind { Linear, Quadratic, BoxIndicator };
  Kind kind = Kind::Linear;
  int coord = 0;
  Rect box;
  double scale = 1.0;
  static CoordFeature linear(int coord);
  static CoordFeature quadratic(int coord);
  static CoordFeature box_indicator(Rect box, double scale = 1.0);
};

// n bounded real feature functions over a WorldSpace; a dense d x n value
// matrix on finite spaces, a list of coordinatewise specs on the cube.
struct FeatureSet {
  WorldSpace space;
  int n = 0;
  std::vector<double> values;  // finite: row-major, values[k*n + i] = f_i(x_k)
  std::vector<CoordFeature> cube_features;
  bool all_binary = false;  // every value in {0,1}

  static FeatureSet finite(const WorldSpace& s, int n, std::vector<double> values);
  static FeatureSet cube(const WorldSpace& s, std::vector<CoordFeature> feats);

  double finite_value(int world, int i) const { return values[size_t(world) * n + i]; }
  void eval_point(const std::vector<double>& x, std::vector<double>& out) const;
  // per-feature value range over the space [min_i, max_i]
  void value_range(std::vector<double>& lo, std::vector<double>& hi) const;
};

struct SolverOptions {
  int max_iterations = 200;
  double gradient_tolerance = 1e-10;  // on the sup norm of grad psi
  double lambda_cap = 60.0;
  double backtrack = 0.5;
  double armijo_c = 1e-4;
};

enum class Feasibility { Interior, Boundary, Infeasible };

const char* feasibility_name(Feasibility f);

struct FitReport {
  std::vector<double> lambda;
  std::string gauge = "none";  // "none" or "zero-mean"
  int iterations = 0;
  double final_grad_norm = 0.0;
  Feasibility feasibility = Feasibility::Interior;
  std::vector<double> achieved_moments;
};

// Prior, features and coefficient vector; the induced density is
// P0(x) e^{lambda . f(x)} / Z_lambda.
struct GibbsPosterior {
  BeliefMeasure prior;
  FeatureSet features;
  std::vector<double> lambda;
  std::string gauge = "none";

  // the induced measure in its closed family (finite vector, piecewise
  // density over the indicator cells, or product of tilted marginals)
  BeliefMeasure to_measure() const;
};

// log Z_lambda(subset) = log integral_subset P0(x) e^{lambda . f(x)} dx;
// -inf for an empty subset.
double log_partition(const GibbsPosterior& g, const TruthSet& subset);

// expected feature vector under the measure
std::vector<double> moments(const BeliefMeasure& measure, const FeatureSet& features);

// Gibbs posterior whose moments match `target`: Newton on the convex dual
// psi(lambda) = log Z_lambda - lambda . target with Armijo backtracking.
// Boundary targets cap |lambda_i| at opts.lambda_cap and report achieved
// moments; infeasible targets are detected and reported, not thrown.
std::pair<GibbsPosterior, FitReport> fit_lambda(const BeliefMeasure& prior,
                                                const FeatureSet& features,
                                                const std::vector<double>& target,
                                                const SolverOptions& opts = {});

// maximum likelihood over the Gibbs family given an i.i.d. sample; equals
// fit_lambda at the empirical moments
std::pair<GibbsPosterior, FitReport> mle_lambda(const BeliefMeasure& prior,
                                                const FeatureSet& features,
                                                const std::vector<World>& sample,
                                                const SolverOptions& opts = {});

std::vector<double> empirical_moments(const FeatureSet& features,
                                      const std::vector<World>& sample);

// CDF of a single tilted marginal at x
double tilted_marginal_cdf(const MarginalSpec& spec, double x);

}  // namespace lka

#endif
