#ifndef LKA_TV_HPP
#define LKA_TV_HPP

#include "lka/worlds.hpp"

namespace lka {

// Total variation distance between two belief measures on the same space.
// Exact for finite forms and for pairs of piecewise-constant densities
// (rectangle overlay); product-tilted pairs use a per-coordinate grid of
// `grid` points (midpoint rule), exact atoms are compared separately.
double total_variation(const BeliefMeasure& a, const BeliefMeasure& b,
                       int grid = 2048);

// Distance to a point mass at x0. Exact (1 - P({x0})) on finite spaces; on
// the cube a literal point mass is at distance 1 from any density, so the
// spec's delta-approximant is used instead: the uniform density on the
// sup-norm ball of radius `width` around x0.
double tv_to_point_mass(const BeliefMeasure& p, const World& x0,
                        double width = 0.05, int grid = 4096);

// continuous density of the measure at a cube point (atoms excluded)
double density_at(const BeliefMeasure& m, const std::vector<double>& x);

}  // namespace lka

#endif
