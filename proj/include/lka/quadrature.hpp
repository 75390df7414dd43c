#ifndef LKA_QUADRATURE_HPP
#define LKA_QUADRATURE_HPP

#include <functional>
#include <vector>

namespace lka {

// Gauss-Legendre nodes and weights on [-1,1], computed once per order by
// Newton iteration on the Legendre recurrence.
struct GaussLegendre {
  std::vector<double> x, w;
  explicit GaussLegendre(int n);
};

const GaussLegendre& gl64();

// Integrate f over [a,b] with an n-point Gauss-Legendre rule.
double gl_integrate(const std::function<double(double)>& f, double a, double b,
                    const GaussLegendre& rule = gl64());

// Classic recursive adaptive Simpson with absolute tolerance.
double adaptive_simpson(const std::function<double(double)>& f, double a,
                        double b, double tol, int max_depth = 50);

}  // namespace lka

#endif
