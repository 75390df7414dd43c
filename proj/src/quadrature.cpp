#include "lka/quadrature.hpp"

#include <cmath>

namespace lka {

GaussLegendre::GaussLegendre(int n) : x(n), w(n) {
  // Roots of P_n by Newton from the Chebyshev initial guess; symmetric pairs.
  const int m = (n + 1) / 2;
  for (int i = 0; i < m; ++i) {
    double z = std::cos(M_PI * (i + 0.75) / (n + 0.5));
    double pp = 0.0;
    for (int it = 0; it < 100; ++it) {
      double p0 = 1.0, p1 = 0.0;
      for (int j = 0; j < n; ++j) {
        double p2 = p1;
        p1 = p0;
        p0 = ((2.0 * j + 1.0) * z * p1 - j * p2) / (j + 1.0);
      }
      pp = n * (z * p0 - p1) / (z * z - 1.0);
      double z1 = z;
      z = z1 - p0 / pp;
      if (std::fabs(z - z1) < 1e-16) break;
    }
    x[i] = -z;
    x[n - 1 - i] = z;
    w[i] = 2.0 / ((1.0 - z * z) * pp * pp);
    w[n - 1 - i] = w[i];
  }
}

const GaussLegendre& gl64() {
  static const GaussLegendre rule(64);
  return rule;
}

double gl_integrate(const std::function<double(double)>& f, double a, double b,
                    const GaussLegendre& rule) {
  const double c = 0.5 * (b - a), mid = 0.5 * (a + b);
  double s = 0.0;
  for (size_t i = 0; i < rule.x.size(); ++i)
    s += rule.w[i] * f(mid + c * rule.x[i]);
  return c * s;
}

namespace {

double simpson(double h, double fa, double fc, double fb) {
  return (fa + 4.0 * fc + fb) * h / 6.0;
}

double simpson_rec(const std::function<double(double)>& f, double a, double c,
                   double b, double fa, double fc, double fb, double whole,
                   double tol, int depth) {
  const double ca = 0.5 * (a + c), cb = 0.5 * (c + b);
  const double fca = f(ca), fcb = f(cb);
  const double left = simpson(c - a, fa, fca, fc);
  const double right = simpson(b - c, fc, fcb, fb);
  const double err = (left + right - whole) / 15.0;
  if (depth <= 0 || std::fabs(err) <= tol) return left + right + err;
  return simpson_rec(f, a, ca, c, fa, fca, fc, left, 0.5 * tol, depth - 1) +
         simpson_rec(f, c, cb, b, fc, fcb, fb, right, 0.5 * tol, depth - 1);
}

}  // namespace

double adaptive_simpson(const std::function<double(double)>& f, double a,
                        double b, double tol, int max_depth) {
  if (!(b > a)) return 0.0;
  const double c = 0.5 * (a + b);
  const double fa = f(a), fc = f(c), fb = f(b);
  const double whole = simpson(b - a, fa, fc, fb);
  return simpson_rec(f, a, c, b, fa, fc, fb, whole, tol, max_depth);
}

}  // namespace lka
