#include "floq/polynomial.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "floq/errors.hpp"

namespace floq {
namespace {

// Error-free transformations (Dekker/Knuth); fma gives the exact product tail.
inline void two_sum(double a, double b, double& s, double& e) {
  s = a + b;
  const double t = s - a;
  e = (a - (s - t)) + (b - t);
}

inline void two_prod(double a, double b, double& p, double& e) {
  p = a * b;
  e = std::fma(a, b, -p);
}

struct KahanAcc {
  double sum = 0.0, c = 0.0;
  void add(double x) {
    const double y = x - c;
    const double t = sum + y;
    c = (t - sum) - y;
    sum = t;
  }
};

}  // namespace

RealPolynomial::RealPolynomial(std::vector<double> coeffs) : coeffs_(std::move(coeffs)) {
  if (coeffs_.empty()) coeffs_.assign(1, 0.0);
}

RealPolynomial RealPolynomial::monomial(int degree, double c) {
  std::vector<double> v(static_cast<std::size_t>(degree) + 1, 0.0);
  v.back() = c;
  return RealPolynomial(std::move(v));
}

double RealPolynomial::eval(double x) const {
  // Compensated Horner scheme: run Horner in (value, error) pairs.
  const int n = degree();
  double s = coeffs_[static_cast<std::size_t>(n)];
  double comp = 0.0;
  for (int i = n - 1; i >= 0; --i) {
    double p, pe, t, te;
    two_prod(s, x, p, pe);
    two_sum(p, coeffs_[static_cast<std::size_t>(i)], t, te);
    comp = comp * x + (pe + te);
    s = t;
  }
  return s + comp;
}

std::complex<double> RealPolynomial::eval(std::complex<double> z) const {
  std::complex<double> s(coeffs_.back(), 0.0);
  for (int i = degree() - 1; i >= 0; --i) s = s * z + coeffs_[static_cast<std::size_t>(i)];
  return s;
}

double RealPolynomial::eval_scale(double x) const {
  const double ax = std::abs(x);
  double s = std::abs(coeffs_.back());
  for (int i = degree() - 1; i >= 0; --i) s = s * ax + std::abs(coeffs_[static_cast<std::size_t>(i)]);
  return s;
}

RealPolynomial RealPolynomial::derivative() const {
  if (degree() == 0) return RealPolynomial({0.0});
  std::vector<double> d(coeffs_.size() - 1);
  for (std::size_t i = 1; i < coeffs_.size(); ++i) d[i - 1] = static_cast<double>(i) * coeffs_[i];
  return RealPolynomial(std::move(d));
}

RealPolynomial RealPolynomial::operator+(const RealPolynomial& rhs) const {
  std::vector<double> out(std::max(coeffs_.size(), rhs.coeffs_.size()), 0.0);
  for (std::size_t i = 0; i < coeffs_.size(); ++i) out[i] += coeffs_[i];
  for (std::size_t i = 0; i < rhs.coeffs_.size(); ++i) out[i] += rhs.coeffs_[i];
  return RealPolynomial(std::move(out));
}

RealPolynomial RealPolynomial::operator-(const RealPolynomial& rhs) const {
  std::vector<double> out(std::max(coeffs_.size(), rhs.coeffs_.size()), 0.0);
  for (std::size_t i = 0; i < coeffs_.size(); ++i) out[i] += coeffs_[i];
  for (std::size_t i = 0; i < rhs.coeffs_.size(); ++i) out[i] -= rhs.coeffs_[i];
  return RealPolynomial(std::move(out));
}

RealPolynomial RealPolynomial::operator*(const RealPolynomial& rhs) const {
  std::vector<double> out(coeffs_.size() + rhs.coeffs_.size() - 1, 0.0);
  for (std::size_t k = 0; k < out.size(); ++k) {
    KahanAcc acc;
    const std::size_t ilo = k >= rhs.coeffs_.size() ? k - rhs.coeffs_.size() + 1 : 0;
    const std::size_t ihi = std::min(k, coeffs_.size() - 1);
    for (std::size_t i = ilo; i <= ihi; ++i) {
      double p, pe;
      two_prod(coeffs_[i], rhs.coeffs_[k - i], p, pe);
      acc.add(p);
      acc.add(pe);
    }
    out[k] = acc.sum + acc.c;
  }
  return RealPolynomial(std::move(out));
}

RealPolynomial RealPolynomial::operator*(double s) const {
  std::vector<double> out(coeffs_);
  for (double& c : out) c *= s;
  return RealPolynomial(std::move(out));
}

double polish_root(const RealPolynomial& f, const RealPolynomial& df, double lo, double hi,
                   double x0, double tol_rel, int max_iter) {
  if (lo > hi) std::swap(lo, hi);
  double x = std::clamp(x0, lo, hi);
  double flo = f.eval(lo), fhi = f.eval(hi);
  bool bracketed = (flo <= 0.0 && fhi >= 0.0) || (flo >= 0.0 && fhi <= 0.0);

  for (int it = 0; it < max_iter; ++it) {
    const double fx = f.eval(x);
    // Residual floor: |f(x)| at the level of rounding in the evaluation
    // itself. Newton cannot do better; this also covers double roots.
    if (std::abs(fx) <= 8.0 * std::numeric_limits<double>::epsilon() * f.eval_scale(x)) return x;

    if (bracketed) {
      if ((flo <= 0.0) == (fx <= 0.0)) {
        lo = x;
        flo = fx;
      } else {
        hi = x;
        fhi = fx;
      }
    }

    const double dfx = df.eval(x);
    double step = dfx != 0.0 ? -fx / dfx : std::numeric_limits<double>::infinity();
    double xn = x + step;
    if (!std::isfinite(xn) || xn < lo || xn > hi) {
      if (!bracketed) raise(errc::root_polish_failure, "Newton left the interval without a bracket");
      xn = 0.5 * (lo + hi);
      step = xn - x;
    }
    x = xn;
    if (std::abs(step) <= tol_rel * (1.0 + std::abs(x))) return x;
  }
  raise(errc::root_polish_failure, "no convergence in max_iter iterations");
}

double bisect_root(const RealPolynomial& f, double lo, double hi, double tol_rel) {
  double flo = f.eval(lo), fhi = f.eval(hi);
  if (flo == 0.0) return lo;
  if (fhi == 0.0) return hi;
  if ((flo < 0.0) == (fhi < 0.0))
    raise(errc::bisection_failure, "no sign change on bracket");
  while (hi - lo > tol_rel * (1.0 + std::abs(lo) + std::abs(hi))) {
    const double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) break;  // hit double-precision resolution
    const double fm = f.eval(mid);
    if (fm == 0.0) return mid;
    if ((fm < 0.0) == (flo < 0.0)) {
      lo = mid;
      flo = fm;
    } else {
      hi = mid;
    }
  }
  return 0.5 * (lo + hi);
}

}  // namespace floq
