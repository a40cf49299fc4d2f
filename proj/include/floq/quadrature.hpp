#pragma once

#include <complex>
#include <functional>
#include <vector>

namespace floq {

struct GaussRule {
  std::vector<double> nodes;    // on [-1, 1]
  std::vector<double> weights;
};

// Gauss-Legendre rule of order n (cached; thread-safe).
const GaussRule& gauss_legendre(int n);

// Single-panel and composite Gauss-Legendre quadrature.
double integrate_gl(const std::function<double(double)>& f, double a, double b, int order);
std::complex<double> integrate_gl_c(const std::function<std::complex<double>(double)>& f, double a,
                                    double b, int order);
std::complex<double> integrate_panels_c(const std::function<std::complex<double>(double)>& f,
                                        double a, double b, int panels, int order);

// Adaptive bisection with a GL15 vs split-GL15 error estimate. Throws
// QuadratureFailure when the tolerance cannot be met within depth limits.
double integrate_adaptive(const std::function<double(double)>& f, double a, double b,
                          double abs_tol, int max_depth = 48);
std::complex<double> integrate_adaptive_c(const std::function<std::complex<double>(double)>& f,
                                          double a, double b, double abs_tol, int max_depth = 48);

}  // namespace floq
