#pragma once

#include <complex>
#include <vector>

namespace floq {

// Dense real polynomial, coefficients ascending in degree. The discriminant
// coefficients can grow like ||V||_inf^p, so products and evaluations use
// compensated arithmetic to stay accurate for periods up to ~30.
class RealPolynomial {
 public:
  RealPolynomial() : coeffs_(1, 0.0) {}
  explicit RealPolynomial(std::vector<double> coeffs);
  static RealPolynomial constant(double c) { return RealPolynomial({c}); }
  static RealPolynomial monomial(int degree, double c);

  int degree() const { return static_cast<int>(coeffs_.size()) - 1; }
  const std::vector<double>& coeffs() const { return coeffs_; }
  double operator[](int i) const { return coeffs_[static_cast<std::size_t>(i)]; }

  // Compensated Horner; error ~ eps*|value| + O(eps^2)*condition.
  double eval(double x) const;
  std::complex<double> eval(std::complex<double> z) const;

  // sum_i |c_i| |x|^i, the natural residual scale at x.
  double eval_scale(double x) const;

  RealPolynomial derivative() const;

  RealPolynomial operator+(const RealPolynomial& rhs) const;
  RealPolynomial operator-(const RealPolynomial& rhs) const;
  RealPolynomial operator*(const RealPolynomial& rhs) const;  // compensated convolution
  RealPolynomial operator*(double s) const;

 private:
  std::vector<double> coeffs_;
};

// Newton iteration with a bisection fallback; the bracket [lo, hi] is kept
// valid whenever f(lo) and f(hi) have opposite signs. Converges on simple
// roots and degrades gracefully to the residual floor on double roots.
// Throws RootPolishFailure after max_iter iterations without convergence.
double polish_root(const RealPolynomial& f, const RealPolynomial& df, double lo, double hi,
                   double x0, double tol_rel = 1e-12, int max_iter = 100);

// Plain bisection on a sign change of f over [lo, hi].
// Throws BisectionFailure when f(lo) and f(hi) have the same sign.
double bisect_root(const RealPolynomial& f, double lo, double hi, double tol_rel = 1e-13);

}  // namespace floq
