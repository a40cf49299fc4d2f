#include "floq/spectrum.hpp"

#include <algorithm>
#include <cmath>

#include "floq/bloch.hpp"

namespace floq {

Matrix2 transfer_matrix(const PeriodicPotential& V, std::int64_t n, cdouble z) {
  return {z - V.at(n), -1.0, 1.0, 0.0};
}

Matrix2 monodromy(const PeriodicPotential& V, cdouble z) {
  Matrix2 m = Matrix2::identity();
  for (int n = 1; n <= V.period(); ++n) m = transfer_matrix(V, n, z) * m;
  return m;
}

namespace {

struct PolyMat2 {
  RealPolynomial a, b, c, d;
  PolyMat2 operator*(const PolyMat2& r) const {
    return {a * r.a + b * r.c, a * r.b + b * r.d, c * r.a + d * r.c, c * r.b + d * r.d};
  }
};

}  // namespace

RealPolynomial discriminant_poly(const PeriodicPotential& V) {
  const RealPolynomial one = RealPolynomial::constant(1.0);
  const RealPolynomial zero = RealPolynomial::constant(0.0);
  PolyMat2 m{one, zero, zero, one};
  for (int n = 1; n <= V.period(); ++n) {
    PolyMat2 step{RealPolynomial({-V.at(n), 1.0}), RealPolynomial::constant(-1.0), one, zero};
    m = step * m;
  }
  return m.a + m.d;
}

std::vector<std::pair<double, int>> band_edges(const PeriodicPotential& V,
                                               const RealPolynomial& delta) {
  const RealPolynomial d1 = delta.derivative();
  const RealPolynomial qplus = delta - RealPolynomial::constant(2.0);   // roots at H(0) spectrum
  const RealPolynomial qminus = delta + RealPolynomial::constant(2.0);  // roots at H(pi/p)

  std::vector<std::pair<double, int>> out;
  const double pi = std::acos(-1.0);
  for (int side = 0; side < 2; ++side) {
    const double k = side == 0 ? 0.0 : pi / V.period();
    const RealPolynomial& q = side == 0 ? qplus : qminus;
    const Eigen::VectorXd evs = band_energies(V, k);
    for (int i = 0; i < evs.size(); ++i) {
      const double x = evs[i];
      const double w = 1e-6 * (1.0 + std::abs(x));
      const double lam = polish_root(q, d1, x - w, x + w, x);
      out.emplace_back(lam, side == 0 ? +1 : -1);
    }
  }
  std::sort(out.begin(), out.end());
  return out;
}

std::vector<double> critical_points(const RealPolynomial& delta, const std::vector<double>& edges,
                                    const std::vector<bool>& gap_open) {
  const RealPolynomial d1 = delta.derivative();
  const RealPolynomial d2 = d1.derivative();
  const int p = delta.degree();
  std::vector<double> kappa;
  kappa.reserve(static_cast<std::size_t>(p) - 1);
  for (int j = 1; j <= p - 1; ++j) {
    const double lo = edges[static_cast<std::size_t>(2 * j - 1)];
    const double hi = edges[static_cast<std::size_t>(2 * j)];
    if (!gap_open[static_cast<std::size_t>(j - 1)]) {
      kappa.push_back(0.5 * (lo + hi));
      continue;
    }
    const double x0 = bisect_root(d1, lo, hi);  // BisectionFailure if no sign change
    kappa.push_back(polish_root(d1, d2, lo, hi, x0));
  }
  return kappa;
}

std::vector<std::pair<double, double>> SpectralPortrait::components() const {
  std::vector<std::pair<double, double>> out;
  const int p = period();
  double left = bands[0].first;
  for (int j = 0; j < p; ++j) {
    const bool last = j == p - 1;
    if (last || gap_open[static_cast<std::size_t>(j)]) {
      out.emplace_back(left, bands[static_cast<std::size_t>(j)].second);
      if (!last) left = bands[static_cast<std::size_t>(j) + 1].first;
    }
  }
  return out;
}

SpectralPortrait analyze(const PeriodicPotential& V) {
  RealPolynomial delta = discriminant_poly(V);
  RealPolynomial d1 = delta.derivative();
  RealPolynomial d2 = d1.derivative();
  RealPolynomial d3 = d2.derivative();

  auto tagged = band_edges(V, delta);
  std::vector<double> edges;
  std::vector<int> signs;
  edges.reserve(tagged.size());
  for (auto& [lam, s] : tagged) {
    edges.push_back(lam);
    signs.push_back(s);
  }

  const int p = V.period();
  const double tol = 1e-9 * (1.0 + (edges.back() - edges.front()));
  std::vector<bool> open;
  for (int j = 1; j <= p - 1; ++j)
    open.push_back(edges[static_cast<std::size_t>(2 * j)] -
                       edges[static_cast<std::size_t>(2 * j - 1)] >
                   tol);

  std::vector<double> kappa = critical_points(delta, edges, open);

  std::vector<std::pair<double, double>> bands;
  for (int j = 0; j < p; ++j)
    bands.emplace_back(edges[static_cast<std::size_t>(2 * j)],
                       edges[static_cast<std::size_t>(2 * j + 1)]);

  return SpectralPortrait{V,     std::move(delta), std::move(d1), std::move(d2), std::move(d3),
                          std::move(edges), std::move(signs), std::move(kappa), std::move(open),
                          std::move(bands)};
}

}  // namespace floq
