#pragma once

#include <complex>
#include <cstdint>
#include <functional>
#include <vector>

#include "floq/bloch.hpp"
#include "floq/spectrum.hpp"
#include "floq/wavepacket.hpp"

namespace floq {

// Decomposition of B = [-pi/p, pi/p) per band into K2 = {|E''| >= delta/2}
// and its complement K3, where |E'''| >= delta/2 by the non-degeneracy of
// the band functions. Intervals are half-open [lo, hi); each component
// contributes its left endpoint to the C_{V,j} sums.
struct StationaryPartition {
  struct Interval {
    double lo = 0.0, hi = 0.0;
    int order = 2;  // 2 on K2, 3 on K3
  };
  std::vector<std::vector<Interval>> per_band;  // ascending cover of B per band
  double delta = 0.0;

  int count(int j, int order) const {
    int c = 0;
    for (const auto& iv : per_band[static_cast<std::size_t>(j - 1)])
      if (iv.order == order) ++c;
    return c;
  }
  int max_components() const {
    int m = 0;
    for (std::size_t j = 0; j < per_band.size(); ++j)
      m = std::max(m, static_cast<int>(per_band[j].size()));
    return m;
  }
};

// Thresholds the exact E'' samples and refines the K2/K3 boundaries by
// bisection on |E''| - delta/2.
StationaryPartition stationary_partition(const SpectralPortrait& sp, const BandField& field,
                                         double delta);

// C_k = 5 * 2^{k-1} - 2 (k >= 2).
std::int64_t van_der_corput_constant(int k);

// One oscillatory-integral bound check: lhs = |int_a^b e^{i(lambda phi +
// eta)} psi dx| by quadrature resolved against the oscillation, rhs the van
// der Corput bound C_kappa delta^{-1/kappa} (|psi(a)| + int |psi'|)
// |lambda|^{-1/kappa}. eta must be linear (eta'' = 0), so only its slope
// enters.
struct VdcCheck {
  double lhs = 0.0, rhs = 0.0;
  bool pass = false;
};
VdcCheck vdc_bound_check(const std::function<double(double)>& phase, int order, double delta_lower,
                         const std::function<std::complex<double>(double)>& amplitude,
                         double eta_slope, double lambda, double a, double b,
                         const std::function<double(double)>& amplitude_deriv_abs = nullptr);

// Single-band integral of Lemma 3.1 over B with measure dk/|B|:
// int_B e^{-i(t E_j(k) + p d k)} [v_j]_m conj([v_j]_q) dk / |B|.
// Composite Gauss-Legendre, panel count resolved against |t| max|E'_j| and
// p|d|. The integrand is a spectral-projection entry, hence gauge-invariant;
// nodes are decomposed independently.
std::complex<double> kernel_integral(const PeriodicPotential& V, const BandField& field, int j,
                                     int m, int q, std::int64_t d, double t);

// <e^{-itH} psi, delta_n>: the finite (q, r) double sum over the support of
// psi of the band-summed kernel integrals, with n = m + l p.
std::complex<double> propagator_entry(const PeriodicPotential& V, const BandField& field,
                                      const WavePacket& psi, std::int64_t n, double t);

// Every explicitly computable ingredient of the dispersive bound
// ||e^{-itH}||_{1->inf} <= M_V <t>^{-1/3}.
struct DispersiveConstants {
  double delta = 0.0;          // min_j min_k |E''| + |E'''|
  double delta_clamped = 0.0;  // min(delta, 1): the proof assumes delta < 1
  std::vector<double> c_vj;    // per band, maximized over (m, q)
  double c_v = 0.0;
  double m_v = 0.0;
  double sobolev_max = 0.0;    // max_j int_B ||v_j'||^2
  int max_components = 0;      // max_j (#K2_j + #K3_j)
  std::vector<int> k2_counts, k3_counts;
  bool flagged = false;        // eigenvector continuation was unreliable
  StationaryPartition partition;
};

DispersiveConstants dispersive_constants(const SpectralPortrait& sp, const BandField& field,
                                         double delta, double sobolev_max);
// Full pipeline from the potential alone.
DispersiveConstants dispersive_constants(const PeriodicPotential& V, int threads = 1);

// Riesz-Thorin interpolation: the l^p -> l^{p'} bound
// (M_V <t>^{-1/3})^{2/p - 1} for 1 < p < 2.
double interpolated_bound(double m_v, double p_exp, double t);

}  // namespace floq
