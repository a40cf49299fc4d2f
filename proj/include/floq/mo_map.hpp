#pragma once

#include <complex>
#include <vector>

#include "floq/spectrum.hpp"

namespace floq {

// Derivative of the Marchenko-Ostrovski map, evaluated from the product
// formula over band edges and open-gap critical points. Principal square
// roots per linear factor give the branch anchored to arg = pi/2 on the ray
// z > lambda_{2p}; boundary values on the real axis are taken from the upper
// half plane (pass Im z = +0). Real positive on band interiors.
// Throws BranchPointEvaluation within 1e-12 of an edge.
cdouble theta_prime(const SpectralPortrait& sp, cdouble z);

// Theta on a band interior, normalized by Theta(lambda_1) = -pi and zero
// jumps across gaps, so that Theta(E(k)) = k on [-pi, 0]. Integrates the
// product formula with a square-root substitution at the nearer band edge;
// verifies 2cos(p Theta) = Delta and throws QuadratureFailure beyond 1e-6.
double theta(const SpectralPortrait& sp, double x);

struct ThetaDerivs {
  double t1 = 0.0, t2 = 0.0, t3 = 0.0;
};

// Theta', Theta'', Theta''' on a band interior via logarithmic
// differentiation of the product formula (term-wise rational sums, no
// finite differences). Requires x at least 1e-6 bandwidths from the edges.
ThetaDerivs theta_derivatives_on_band(const SpectralPortrait& sp, double x);

// Unique zero of Theta'' in each connected component of the spectrum's
// interior (one per band when all gaps are open), located by bisection;
// Theta'''(x_*) > 0 is verified. Throws NoSignChange on numerical faults.
std::vector<double> inflection_points(const SpectralPortrait& sp);

// Global band function E(k) on [-pi, 0]: the parity-ordered concatenation of
// the band functions, inverse to Theta on the spectrum.
double global_band_function(const SpectralPortrait& sp, double k);

// Lyapunov exponent (1/p) log rho(Phi(z)); equals Im Theta on C_+ and
// vanishes on the spectrum.
double lyapunov(const PeriodicPotential& V, cdouble z);

// Continuation of Theta into the upper half plane by integrating Theta'
// along a path from a band-interior anchor; independent of the monodromy
// route, used to cross-check Im Theta = Lyapunov exponent.
cdouble theta_upper(const SpectralPortrait& sp, cdouble z);

// Boundary samples of Theta and its derivatives per band, plus the
// inflection points; drives the mo CSV artifact.
struct MOBoundaryData {
  std::vector<std::vector<double>> x;    // per band interior samples
  std::vector<std::vector<double>> th, th1, th2, th3;
  std::vector<double> inflection;        // per connected component
};
MOBoundaryData sample_mo_boundary(const SpectralPortrait& sp, int samples_per_band);

}  // namespace floq
