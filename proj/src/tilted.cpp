#include "lka/tilted.hpp"

#include <algorithm>
#include <cmath>
#include <functional>

#include "lka/errors.hpp"
#include "lka/quadrature.hpp"

namespace lka {

namespace {

// mass of [a,b] for lam > 0, written so every factor lies in (0,1]
double mass_pos(double lam, double a, double b) {
  return std::exp(lam * (b - 1.0)) * (-std::expm1(-lam * (b - a))) /
         (-std::expm1(-lam));
}

}  // namespace

double one_tilt_mass(double lam, double a, double b) {
  a = std::clamp(a, 0.0, 1.0);
  b = std::clamp(b, 0.0, 1.0);
  if (b <= a) return 0.0;
  if (lam == 0.0) return b - a;
  if (lam > 0.0) return mass_pos(lam, a, b);
  return mass_pos(-lam, 1.0 - b, 1.0 - a);  // density mirror x -> 1-x
}

double one_tilt_cdf(double lam, double x) {
  if (x <= 0.0) return 0.0;
  if (x >= 1.0) return 1.0;
  return one_tilt_mass(lam, 0.0, x);
}

double one_tilt_inv_cdf(double lam, double u) {
  u = std::clamp(u, 0.0, 1.0);
  if (lam == 0.0) return u;
  if (lam > 0.0) {
    // e^{lam x} = 1 + u (e^lam - 1)  =>  x = 1 + log(e^-lam + u(1 - e^-lam))/lam
    return 1.0 + std::log(std::exp(-lam) + u * (-std::expm1(-lam))) / lam;
  }
  return 1.0 - one_tilt_inv_cdf(-lam, 1.0 - u);
}

double one_tilt_mean(double lam) {
  if (std::fabs(lam) <= 1e-2) {
    const double l2 = lam * lam;
    return 0.5 + lam / 12.0 - lam * l2 / 720.0 + lam * l2 * l2 / 30240.0;
  }
  if (lam > 0.0) return 1.0 / (-std::expm1(-lam)) - 1.0 / lam;
  return 1.0 - one_tilt_mean(-lam);
}

double one_tilt_var(double lam) {
  const double al = std::fabs(lam);
  if (al <= 1e-2) {
    const double l2 = lam * lam;
    return 1.0 / 12.0 - l2 / 240.0 + l2 * l2 / 6048.0;
  }
  const double q = std::exp(-al);
  const double e = -std::expm1(-al);  // 1 - q
  return 1.0 / (al * al) - q / (e * e);
}

double one_tilt_solve_mean(double mean, double cap, bool* boundary) {
  if (boundary) *boundary = false;
  require(mean >= 0.0 && mean <= 1.0, "InvalidMoment",
          "one-tilt mean must lie in [0,1]");
  if (mean == 0.5) return 0.0;
  if (mean <= one_tilt_mean(-cap) || mean >= one_tilt_mean(cap)) {
    if (boundary) *boundary = true;
    return mean < 0.5 ? -cap : cap;
  }
  // monotone Newton with bisection safeguard
  double lo = -cap, hi = cap;
  double lam = std::clamp(12.0 * (mean - 0.5), lo, hi);
  for (int it = 0; it < 200; ++it) {
    const double g = one_tilt_mean(lam) - mean;
    if (std::fabs(g) <= 1e-14) break;
    if (g > 0.0) hi = lam; else lo = lam;
    double next = lam - g / one_tilt_var(lam);
    if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
    if (next == lam) break;
    lam = next;
  }
  return lam;
}

// ---------------------------------------------------------------------------
// two-parameter tilt

namespace {

struct Exponent {
  double l1, l2;
  double operator()(double t) const { return l1 * t + l2 * t * t; }
  double mode(double a, double b) const {  // argmax over [a,b]
    double best = ((*this)(a) >= (*this)(b)) ? a : b;
    if (l2 < 0.0) {
      const double t = -l1 / (2.0 * l2);
      if (t > a && t < b) best = t;
    }
    return best;
  }
};

// integral over [a,b] of u(t)^k * e^{g(t) - gmax} for k = 0..kmax, where
// u(t) = t - c. Panels are seeded around the stationary point when the
// exponent is too sharp for the fixed Gauss-Legendre rule.
void tilt_integrals(const Exponent& g, double a, double b, double gmax,
                    double c, int kmax, double* out) {
  for (int k = 0; k <= kmax; ++k) out[k] = 0.0;
  auto piece = [&](double lo, double hi) {
    if (hi <= lo) return;
    for (int k = 0; k <= kmax; ++k) {
      auto f = [&, k](double t) {
        double p = 1.0;
        const double u = t - c;
        for (int j = 0; j < k; ++j) p *= u;
        return p * std::exp(g(t) - gmax);
      };
      out[k] += (std::fabs(g.l2) <= 500.0) ? gl_integrate(f, lo, hi)
                                           : adaptive_simpson(f, lo, hi, 1e-13);
    }
  };
  if (std::fabs(g.l2) <= 500.0) {
    piece(a, b);
    return;
  }
  const double tstar = (g.l2 != 0.0) ? -g.l1 / (2.0 * g.l2) : 0.5 * (a + b);
  const double w = 1.0 / std::sqrt(2.0 * std::fabs(g.l2));
  double cut[4] = {a, std::clamp(tstar - 8.0 * w, a, b),
                   std::clamp(tstar + 8.0 * w, a, b), b};
  std::sort(cut, cut + 4);
  for (int i = 0; i < 3; ++i) piece(cut[i], cut[i + 1]);
}

}  // namespace

double two_tilt_log_integral(double l1, double l2, double a, double b) {
  a = std::clamp(a, 0.0, 1.0);
  b = std::clamp(b, 0.0, 1.0);
  if (b <= a) return -HUGE_VAL;
  const Exponent g{l1, l2};
  const double gmax = g(g.mode(a, b));
  double z;
  tilt_integrals(g, a, b, gmax, 0.0, 0, &z);
  if (z <= 0.0) return -HUGE_VAL;
  return gmax + std::log(z);
}

double two_tilt_mass(double l1, double l2, double a, double b) {
  const double num = two_tilt_log_integral(l1, l2, a, b);
  if (num == -HUGE_VAL) return 0.0;
  return std::exp(num - two_tilt_log_integral(l1, l2, 0.0, 1.0));
}

double two_tilt_cdf(double l1, double l2, double x) {
  if (x <= 0.0) return 0.0;
  if (x >= 1.0) return 1.0;
  return two_tilt_mass(l1, l2, 0.0, x);
}

void two_tilt_moments(double l1, double l2, double* m1, double* m2) {
  const Exponent g{l1, l2};
  const double gmax = g(g.mode(0.0, 1.0));
  double s[3];
  tilt_integrals(g, 0.0, 1.0, gmax, 0.0, 2, s);
  *m1 = s[1] / s[0];
  *m2 = s[2] / s[0];
}

std::pair<double, double> two_tilt_solve(double m1, double m2, double cap,
                                         int* iterations, double* grad_norm) {
  const double var = m2 - m1 * m1;
  require(var > 0.0 && m1 > 0.0 && m1 < 1.0, "InvalidMoment",
          "two-tilt target needs 0 < m1 < 1 and m2 > m1^2");

  // Newton on the dual in coordinates u = t - m1 (features u, u^2; targets
  // 0 and var). Centering keeps the Hessian well conditioned for sharp tilts.
  const double c = m1;
  double e1 = 0.0, e2 = (var < 0.05) ? -1.0 / (2.0 * var) : 0.0;

  // gradient of the dual at (e1, e2) plus the moment table u^0..u^4
  auto state = [&](double a1, double a2, double* grad, double* u) {
    const Exponent g{a1 - 2.0 * a2 * c, a2};
    const double gmax = g(g.mode(0.0, 1.0));
    double s[5];
    tilt_integrals(g, 0.0, 1.0, gmax, c, 4, s);
    for (int k = 1; k <= 4; ++k) u[k] = s[k] / s[0];
    u[0] = 1.0;
    grad[0] = u[1];
    grad[1] = u[2] - var;
  };

  double grad[2], u[5];
  state(e1, e2, grad, u);
  double gn = std::max(std::fabs(grad[0]), std::fabs(grad[1]));
  int it = 0;
  for (; it < 200 && gn > 1e-11; ++it) {
    const double h11 = u[2] - u[1] * u[1];
    const double h12 = u[3] - u[1] * u[2];
    const double h22 = u[4] - u[2] * u[2];
    const double det = h11 * h22 - h12 * h12;
    double d1, d2;
    if (det > 0.0 && std::isfinite(det)) {
      d1 = -(h22 * grad[0] - h12 * grad[1]) / det;
      d2 = -(-h12 * grad[0] + h11 * grad[1]) / det;
    } else {
      d1 = -grad[0] / std::max(h11, 1e-300);
      d2 = -grad[1] / std::max(h22, 1e-300);
    }
    double step = 1.0, n1 = e1, n2 = e2, tg[2], tu[5], tn = gn;
    for (int ls = 0; ls < 60; ++ls) {
      n1 = std::clamp(e1 + step * d1, -cap, cap);
      n2 = std::clamp(e2 + step * d2, -cap, cap);
      state(n1, n2, tg, tu);
      tn = std::max(std::fabs(tg[0]), std::fabs(tg[1]));
      if (tn < gn || tn <= 1e-11) break;
      step *= 0.5;
    }
    if (tn >= gn && gn <= 1e-9) break;  // no further progress, good enough
    e1 = n1; e2 = n2; gn = tn;
    grad[0] = tg[0]; grad[1] = tg[1];
    for (int k = 0; k < 5; ++k) u[k] = tu[k];
  }
  if (iterations) *iterations = it;
  if (grad_norm) *grad_norm = gn;
  return {e1 - 2.0 * e2 * c, e2};
}

}  // namespace lka
