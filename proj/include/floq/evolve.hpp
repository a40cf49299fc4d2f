#pragma once

#include <Eigen/Dense>
#include <vector>

#include "floq/potential.hpp"
#include "floq/wavepacket.hpp"

namespace floq {

enum class Boundary { dirichlet, ring };

// Truncated-lattice computational window. Dirichlet mode covers sites
// -radius..radius; ring mode is a periodic ring of cells * p sites.
struct LatticeWindow {
  Boundary boundary = Boundary::ring;
  int radius = 0;
  int cells = 0;

  int site_count(int p) const {
    return boundary == Boundary::dirichlet ? 2 * radius + 1 : cells * p;
  }
};

// Max band slope |E'|, the ballistic front speed; sampled on a coarse grid.
double max_group_velocity(const PeriodicPotential& V);

// Smallest window containing the ballistic cone of psi0 up to |t| <= t_max,
// plus a safety margin (>= 20 sites on each side).
LatticeWindow auto_window(const PeriodicPotential& V, Boundary boundary,
                          const WavePacket& psi0, double t_max, int margin = 20);

// Throws ConeViolation when the window cannot contain the cone.
void check_cone(const LatticeWindow& w, const PeriodicPotential& V, const WavePacket& psi0,
                double t_max, int margin = 20);

// Exact evolution on a periodic ring of cells*p sites: the discrete Bloch
// transform block-diagonalizes H into the cells fiber matrices H(k_s), and
// time enters only through the phases e^{-itE_j(k_s)}.
class RingPropagator {
 public:
  RingPropagator(const PeriodicPotential& V, int cells);

  int sites() const { return n_; }
  // e^{-itH} psi; exact in t up to the eigensolve.
  WavePacket evolve(const WavePacket& psi0, double t) const;
  // Shared Bloch factorization across many times.
  std::vector<WavePacket> evolve_series(const WavePacket& psi0,
                                        const std::vector<double>& times) const;
  // Raw ring storage (position u = site u+1); used by the splitting stepper.
  std::vector<std::complex<double>> evolve_ring(const std::vector<std::complex<double>>& ring,
                                                double t) const;

 private:
  struct Fiber {
    Eigen::VectorXd energies;
    Eigen::MatrixXcd vectors;
  };
  std::vector<std::complex<double>> to_ring(const WavePacket& psi0) const;
  WavePacket from_ring(const std::vector<std::complex<double>>& ring, std::int64_t center) const;

  PeriodicPotential V_;
  int cells_, p_, n_;
  std::vector<Fiber> fibers_;  // one per quasimomentum k_s = 2 pi s / n
};

// Full eigendecomposition of the Dirichlet truncation on -radius..radius;
// shares nothing with the Bloch machinery, so it serves as an independent
// oracle for the oscillatory-integral propagator.
class DirichletPropagator {
 public:
  DirichletPropagator(const PeriodicPotential& V, int radius);
  int radius() const { return radius_; }
  WavePacket evolve(const WavePacket& psi0, double t) const;

 private:
  int radius_;
  Eigen::VectorXd energies_;
  Eigen::MatrixXd vectors_;  // real symmetric eigenbasis
};

// e^{-itH} psi0 at the requested times on the given window.
std::vector<WavePacket> linear_evolve(const PeriodicPotential& V, const WavePacket& psi0,
                                      const std::vector<double>& times, const LatticeWindow& w);

struct DecaySeries {
  std::vector<double> times;
  std::vector<double> sup_norms;
  double alpha = 0.0;        // fitted log-log slope
  double alpha_stderr = 0.0;
  double ratio = 0.0;        // sup_t <t>^{1/3} ||psi(t)||_inf / ||psi0||_1
};

struct FitResult {
  double alpha = 0.0;
  double stderr_ = 0.0;
};

// OLS slope of log sup-norm vs log t over the fit window [t_lo, t_hi].
// Throws InsufficientData with fewer than 10 usable samples.
FitResult fit_decay_exponent(const std::vector<double>& times,
                             const std::vector<double>& sup_norms, double t_lo, double t_hi);

// Evolves, records sup norms and the normalized decay ratio, and fits the
// exponent over [fit_lo, fit_hi] (defaults to [10, max time]).
DecaySeries sup_norm_decay(const PeriodicPotential& V, const WavePacket& psi0,
                           const std::vector<double>& times, const LatticeWindow& w,
                           double fit_lo = 10.0, double fit_hi = 0.0);

struct DnlsResult {
  std::vector<double> times;
  std::vector<WavePacket> states;
  double max_local_error = 0.0;  // largest observed step-halving defect
};

// Strang splitting for i psi' = H psi + sign |psi|^{sigma-1} psi: exact
// phase rotation for the nonlinear half-steps around the exact ring
// propagator for the linear step. Both substeps are unitary, so the l2 norm
// is conserved to roundoff. Every check_interval steps the result is
// compared against two half steps; a defect above 1e-6 throws StepRejected.
DnlsResult dnls_evolve(const PeriodicPotential& V, const WavePacket& psi0, double sigma,
                       int sign, double dt, const std::vector<double>& times,
                       const LatticeWindow& w, int check_interval = 4);

// Largest admissible Strang step for the given data.
double dnls_max_step(const PeriodicPotential& V, const WavePacket& psi0, double sigma);

// <t> = sqrt(1 + t^2).
inline double bracket_t(double t) { return std::sqrt(1.0 + t * t); }

}  // namespace floq
