#pragma once

#include <complex>

namespace floq {

using cdouble = std::complex<double>;

// 2x2 complex matrix for transfer/monodromy algebra; row-major entries.
struct Matrix2 {
  cdouble a{0.0}, b{0.0}, c{0.0}, d{0.0};

  static Matrix2 identity() { return {1.0, 0.0, 0.0, 1.0}; }

  Matrix2 operator*(const Matrix2& r) const {
    return {a * r.a + b * r.c, a * r.b + b * r.d, c * r.a + d * r.c, c * r.b + d * r.d};
  }

  cdouble det() const { return a * d - b * c; }
  cdouble trace() const { return a + d; }

  // Largest eigenvalue modulus, via the characteristic roots of
  // mu^2 - tr*mu + det. The smaller root is recovered as det/mu to avoid
  // cancellation.
  double spectral_radius() const {
    const cdouble t = trace(), dd = det();
    const cdouble q = std::sqrt(t * t - 4.0 * dd);
    cdouble mu = 0.5 * (std::abs(t + q) >= std::abs(t - q) ? t + q : t - q);
    if (mu == cdouble(0.0)) return 0.0;
    const cdouble nu = dd / mu;
    return std::max(std::abs(mu), std::abs(nu));
  }
};

}  // namespace floq
