#ifndef LKA_TILTED_HPP
#define LKA_TILTED_HPP

#include <utility>

namespace lka {

// One-parameter exponential tilt of Unif[0,1]:
//   density  lam * e^{lam x} / (e^lam - 1),   uniform at lam = 0.
// All routines are stable across the whole lam range (mirrored for lam < 0,
// series below |lam| = 1e-2 where the closed forms cancel).
double one_tilt_mass(double lam, double a, double b);  // P([a,b] x [0,1])
double one_tilt_cdf(double lam, double x);
double one_tilt_inv_cdf(double lam, double u);
double one_tilt_mean(double lam);
double one_tilt_var(double lam);

// lam with mean(lam) == mean; means in {0,1} hit the cap and set *boundary.
double one_tilt_solve_mean(double mean, double cap, bool* boundary);

// Two-parameter tilt: density proportional to e^{l1 x + l2 x^2} on [0,1].
// Quadrature: 64-node Gauss-Legendre for |l2| <= 500, adaptive Simpson on
// mode-seeded panels beyond (target absolute error 1e-10 after max
// subtraction).
double two_tilt_log_integral(double l1, double l2, double a, double b);
double two_tilt_mass(double l1, double l2, double a, double b);  // normalized
double two_tilt_cdf(double l1, double l2, double x);
void two_tilt_moments(double l1, double l2, double* m1, double* m2);

// (l1, l2) whose tilt has first and second moments (m1, m2); Newton on the
// convex dual in mean-centered coordinates. Requires m2 - m1^2 > 0.
std::pair<double, double> two_tilt_solve(double m1, double m2, double cap,
                                         int* iterations, double* grad_norm);

}  // namespace lka

#endif
