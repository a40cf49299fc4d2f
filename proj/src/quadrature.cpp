#include "floq/quadrature.hpp"

#include <cmath>
#include <map>
#include <mutex>

#include "floq/errors.hpp"

namespace floq {

namespace {

GaussRule build_rule(int n) {
  // Nodes as roots of P_n by Newton from the Chebyshev initial guess;
  // weights 2 / ((1-x^2) P_n'(x)^2).
  GaussRule r;
  r.nodes.resize(static_cast<std::size_t>(n));
  r.weights.resize(static_cast<std::size_t>(n));
  const double pi = std::acos(-1.0);
  for (int i = 0; i < (n + 1) / 2; ++i) {
    double x = std::cos(pi * (i + 0.75) / (n + 0.5));
    double dp = 0.0;
    for (int it = 0; it < 100; ++it) {
      double p0 = 1.0, p1 = x;
      for (int m = 2; m <= n; ++m) {
        const double p2 = ((2.0 * m - 1.0) * x * p1 - (m - 1.0) * p0) / m;
        p0 = p1;
        p1 = p2;
      }
      dp = n * (x * p1 - p0) / (x * x - 1.0);
      const double dx = -p1 / dp;
      x += dx;
      if (std::abs(dx) < 1e-16) break;
    }
    r.nodes[static_cast<std::size_t>(i)] = -x;
    r.nodes[static_cast<std::size_t>(n - 1 - i)] = x;
    const double w = 2.0 / ((1.0 - x * x) * dp * dp);
    r.weights[static_cast<std::size_t>(i)] = w;
    r.weights[static_cast<std::size_t>(n - 1 - i)] = w;
  }
  if (n % 2 == 1) r.nodes[static_cast<std::size_t>(n / 2)] = 0.0;
  return r;
}

}  // namespace

const GaussRule& gauss_legendre(int n) {
  static std::map<int, GaussRule> cache;
  static std::mutex mu;
  std::lock_guard<std::mutex> lock(mu);
  auto it = cache.find(n);
  if (it == cache.end()) it = cache.emplace(n, build_rule(n)).first;
  return it->second;
}

double integrate_gl(const std::function<double(double)>& f, double a, double b, int order) {
  const GaussRule& r = gauss_legendre(order);
  const double mid = 0.5 * (a + b), half = 0.5 * (b - a);
  double s = 0.0;
  for (std::size_t i = 0; i < r.nodes.size(); ++i) s += r.weights[i] * f(mid + half * r.nodes[i]);
  return s * half;
}

std::complex<double> integrate_gl_c(const std::function<std::complex<double>(double)>& f, double a,
                                    double b, int order) {
  const GaussRule& r = gauss_legendre(order);
  const double mid = 0.5 * (a + b), half = 0.5 * (b - a);
  std::complex<double> s = 0.0;
  for (std::size_t i = 0; i < r.nodes.size(); ++i) s += r.weights[i] * f(mid + half * r.nodes[i]);
  return s * half;
}

std::complex<double> integrate_panels_c(const std::function<std::complex<double>(double)>& f,
                                        double a, double b, int panels, int order) {
  const double h = (b - a) / panels;
  std::complex<double> s = 0.0;
  for (int i = 0; i < panels; ++i) s += integrate_gl_c(f, a + i * h, a + (i + 1) * h, order);
  return s;
}

double integrate_adaptive(const std::function<double(double)>& f, double a, double b,
                          double abs_tol, int max_depth) {
  std::function<std::complex<double>(double)> fc = [&f](double x) {
    return std::complex<double>(f(x), 0.0);
  };
  return integrate_adaptive_c(fc, a, b, abs_tol, max_depth).real();
}

namespace {

std::complex<double> adapt_c(const std::function<std::complex<double>(double)>& f, double a,
                             double b, double tol, int depth, std::complex<double> whole) {
  const double mid = 0.5 * (a + b);
  const std::complex<double> left = integrate_gl_c(f, a, mid, 15);
  const std::complex<double> right = integrate_gl_c(f, mid, b, 15);
  const std::complex<double> refined = left + right;
  if (std::abs(refined - whole) <= tol || b - a < 1e-14 * (1.0 + std::abs(a) + std::abs(b)))
    return refined;
  if (depth <= 0) raise(errc::quadrature_failure, "adaptive quadrature did not converge");
  return adapt_c(f, a, mid, 0.5 * tol, depth - 1, left) +
         adapt_c(f, mid, b, 0.5 * tol, depth - 1, right);
}

}  // namespace

std::complex<double> integrate_adaptive_c(const std::function<std::complex<double>(double)>& f,
                                          double a, double b, double abs_tol, int max_depth) {
  return adapt_c(f, a, b, abs_tol, max_depth, integrate_gl_c(f, a, b, 15));
}

}  // namespace floq
