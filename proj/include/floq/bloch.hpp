#pragma once

#include <Eigen/Dense>
#include <vector>

#include "floq/errors.hpp"
#include "floq/spectrum.hpp"

namespace floq {

// Bloch fiber Hamiltonian H(k;p): scalar V(1)+2cos(k) for p=1, the 2x2 form
// with off-diagonal 1+e^{-+ipk} for p=2, and for p>=3 the tridiagonal matrix
// with corner entries e^{-+ipk}.
Eigen::MatrixXcd bloch_hamiltonian(const PeriodicPotential& V, double k);

struct EigenSystem {
  Eigen::VectorXd energies;   // ascending
  Eigen::MatrixXcd vectors;   // column j-1 = v_j, orthonormal
};

// Full Hermitian eigendecomposition of H(k). Throws EigenFailure when the
// eigen-residual exceeds 1e-8.
EigenSystem band_decomposition(const PeriodicPotential& V, double k);

// Eigenvalues only (cheaper; used inside quadratures).
Eigen::VectorXd band_energies(const PeriodicPotential& V, double k);

// E_j(k) by Newton on Delta(E) = 2cos(pk) from a warm guess; falls back to
// the eigensolver when the guess is stale. Fast path for phase evaluation
// inside oscillatory quadratures.
double band_energy_newton(const SpectralPortrait& sp, int j, double k, double guess);

// Band functions, phase-continued eigenvectors and exact derivatives sampled
// on a uniform grid over [0, pi/p]. Values on negative k follow from
// E_j(-k) = E_j(k) and v_j(-k) = conj(v_j(k)).
struct BandField {
  std::vector<double> grid;               // N_k ascending samples, endpoints included
  Eigen::MatrixXd energy;                 // p x N_k
  std::vector<Eigen::MatrixXcd> vectors;  // per grid point, column j-1 = v_j
  Eigen::MatrixXd d1, d2, d3;             // band derivatives on the grid
  double min_overlap = 1.0;               // smallest |<v_j(k_i), v_j(k_{i-1})>| seen
  WarningList warnings;

  int bands() const { return static_cast<int>(energy.rows()); }
  int points() const { return static_cast<int>(energy.cols()); }
  double max_group_velocity() const { return d1.cwiseAbs().maxCoeff(); }
};

// Eigenpairs on the grid with phases fixed by continuation: the first frame
// is made real-positive in its largest component, later frames maximize the
// overlap with the previous one; degenerate clusters are aligned as a
// subspace (unitary Procrustes). Records a continuation warning when the
// smallest step overlap drops below 0.9.
BandField band_path(const SpectralPortrait& sp, int n_k, int threads = 1);

struct BandDerivs {
  double d1 = 0.0, d2 = 0.0, d3 = 0.0;
};

// Implicit-function derivatives of E_j at k from the exact relation
// Delta(E_j(k)) = 2cos(pk); at a band edge next to an open gap this reduces
// to E'' = -+2p^2/Delta'(E). Near a closed-gap degeneracy (Delta'(E) ~ 0)
// falls back to Richardson-extrapolated finite differences of the sorted
// band function.
BandDerivs band_derivatives(const SpectralPortrait& sp, int j, double k);
BandDerivs band_derivatives(const SpectralPortrait& sp, int j, double k, double Ejk);

// Finite-difference route (one-sided near the endpoints); used as the
// fallback above and as an independent oracle in tests.
BandDerivs band_derivatives_fd(const PeriodicPotential& V, int j, double k);

// delta(V) = min_j min_k (|E''_j| + |E'''_j|), grid minimum refined by
// golden-section search. Throws NonPositiveDelta when the refined minimum
// is <= 1e-12.
double delta_V(const SpectralPortrait& sp, const BandField& field);

// int_B ||v_j'(k)||^2 dk for the continued field (central differences,
// trapezoid rule, extended to B by symmetry).
double eigvec_sobolev_norm(const BandField& field, int j);

// Builds a band field with the default grid (>= max(1024, 16p) points),
// doubling until delta(V) and the Sobolev norms stabilize to 0.5%.
struct StableField {
  BandField field;
  double delta = 0.0;
  double sobolev_max = 0.0;
};
StableField stable_band_field(const SpectralPortrait& sp, int initial_n_k = 1024,
                              int threads = 1);

}  // namespace floq
