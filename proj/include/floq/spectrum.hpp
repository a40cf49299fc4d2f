#pragma once

#include <cstdint>
#include <utility>
#include <vector>

#include "floq/matrix2.hpp"
#include "floq/polynomial.hpp"
#include "floq/potential.hpp"

namespace floq {

// One-step transfer matrix [[z - V(n), -1], [1, 0]].
Matrix2 transfer_matrix(const PeriodicPotential& V, std::int64_t n, cdouble z);

// Ordered product A(p)...A(1) over one period; det == 1, trace == Delta(z).
Matrix2 monodromy(const PeriodicPotential& V, cdouble z);

// Exact coefficients of the monic degree-p Floquet discriminant, obtained by
// multiplying transfer matrices with polynomial entries (no sampling).
RealPolynomial discriminant_poly(const PeriodicPotential& V);

// Real-root geometry of the discriminant: band edges (roots of Delta -+ 2),
// critical points (roots of Delta'), gap flags, and the exact polynomial
// family Delta, Delta', Delta'', Delta''' used everywhere downstream.
struct SpectralPortrait {
  PeriodicPotential V;
  RealPolynomial delta, delta1, delta2, delta3;
  std::vector<double> edges;           // lambda_1 <= ... <= lambda_{2p}
  std::vector<int> edge_delta_sign;    // sign of Delta at the edge: +1 or -1
  std::vector<double> critical;        // kappa_1 <= ... <= kappa_{p-1}
  std::vector<bool> gap_open;          // p-1 flags
  std::vector<std::pair<double, double>> bands;  // p closed intervals

  int period() const { return V.period(); }
  double spectral_diameter() const { return edges.back() - edges.front(); }
  // Gap j (1-based) is [edges[2j-1], edges[2j]] in 0-based storage.
  double gap_tolerance() const { return 1e-9 * (1.0 + spectral_diameter()); }

  // Maximal intervals of the spectrum: bands merged across closed gaps.
  std::vector<std::pair<double, double>> components() const;
};

// Band edges as eigenvalues of H(0) and H(pi/p), polished on Delta -+ 2.
// Returns the sorted 2p edges together with the Delta sign at each edge.
std::vector<std::pair<double, int>> band_edges(const PeriodicPotential& V,
                                               const RealPolynomial& delta);

// The p-1 roots of Delta', one per closed gap interval by interlacing.
std::vector<double> critical_points(const RealPolynomial& delta,
                                    const std::vector<double>& edges,
                                    const std::vector<bool>& gap_open);

// Full portrait: edges, gaps, critical points, and the derivative family.
SpectralPortrait analyze(const PeriodicPotential& V);

}  // namespace floq
