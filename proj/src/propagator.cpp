#include "floq/propagator.hpp"

#include <algorithm>
#include <cmath>

#include "floq/evolve.hpp"
#include "floq/quadrature.hpp"

namespace floq {

namespace {
constexpr double kPi = 3.14159265358979323846;
}

StationaryPartition stationary_partition(const SpectralPortrait& sp, const BandField& field,
                                         double delta) {
  const int p = sp.period();
  const double thr = 0.5 * delta;
  StationaryPartition part;
  part.delta = delta;
  part.per_band.resize(static_cast<std::size_t>(p));

  for (int j = 1; j <= p; ++j) {
    const auto cls = [&](int i) { return std::abs(field.d2(j - 1, i)) >= thr ? 2 : 3; };
    const auto h = [&](double k) {
      return std::abs(band_derivatives(sp, j, k).d2) - thr;
    };

    // Class runs on [0, pi/p] with bisection-refined boundaries.
    std::vector<double> cuts;       // interior boundaries
    std::vector<int> orders{cls(0)};
    for (int i = 1; i < field.points(); ++i) {
      if (cls(i) == cls(i - 1)) continue;
      double lo = field.grid[static_cast<std::size_t>(i - 1)];
      double hi = field.grid[static_cast<std::size_t>(i)];
      double flo = h(lo);
      for (int it = 0; it < 60; ++it) {
        const double mid = 0.5 * (lo + hi);
        const double fm = h(mid);
        if ((fm <= 0.0) == (flo <= 0.0)) {
          lo = mid;
          flo = fm;
        } else {
          hi = mid;
        }
      }
      cuts.push_back(0.5 * (lo + hi));
      orders.push_back(cls(i));
    }

    // Mirror to [-pi/p, 0): E'' is even, so the classification reflects.
    // Runs on B, ascending: reversed mirrored runs then the originals, with
    // the two runs adjacent to k = 0 merged (same class).
    const double kmax = kPi / p;
    std::vector<StationaryPartition::Interval> ivs;
    for (std::size_t r = orders.size(); r-- > 0;) {
      const double lo = r < cuts.size() ? cuts[r] : kmax;
      const double hi = r > 0 ? cuts[r - 1] : 0.0;
      ivs.push_back({-lo, -hi, orders[r]});
    }
    for (std::size_t r = 0; r < orders.size(); ++r) {
      const double lo = r > 0 ? cuts[r - 1] : 0.0;
      const double hi = r < cuts.size() ? cuts[r] : kmax;
      if (r == 0) {
        ivs.back().hi = hi;  // merge across k = 0
        continue;
      }
      ivs.push_back({lo, hi, orders[r]});
    }
    part.per_band[static_cast<std::size_t>(j - 1)] = std::move(ivs);
  }
  return part;
}

std::int64_t van_der_corput_constant(int k) {
  if (k < 2) raise(errc::config_error, "van der Corput order must be >= 2");
  return 5 * (std::int64_t{1} << (k - 1)) - 2;
}

VdcCheck vdc_bound_check(const std::function<double(double)>& phase, int order,
                         double delta_lower, const std::function<std::complex<double>(double)>& amplitude,
                         double eta_slope, double lambda, double a, double b,
                         const std::function<double(double)>& amplitude_deriv_abs) {
  if (lambda == 0.0) raise(errc::config_error, "vdc check needs lambda != 0");
  if (delta_lower <= 0.0) raise(errc::config_error, "vdc check needs a positive lower bound");

  const auto integrand = [&](double x) {
    return amplitude(x) * std::polar(1.0, lambda * phase(x) + eta_slope * x);
  };

  // Oscillation-resolved composite rule, then one doubling as convergence
  // evidence; adaptive fallback only to report failure cleanly.
  double phmin = phase(a), phmax = phmin;
  const int coarse = 256;
  for (int i = 1; i <= coarse; ++i) {
    const double ph = phase(a + (b - a) * i / coarse);
    phmin = std::min(phmin, ph);
    phmax = std::max(phmax, ph);
  }
  const double cycles =
      (std::abs(lambda) * (phmax - phmin) + std::abs(eta_slope) * (b - a)) / (2.0 * kPi);
  const int panels = std::max(16, static_cast<int>(std::ceil(8.0 * cycles)));
  const std::complex<double> v1 = integrate_panels_c(integrand, a, b, panels, 10);
  const std::complex<double> v2 = integrate_panels_c(integrand, a, b, 2 * panels, 10);
  if (std::abs(v1 - v2) > 1e-8 * (1.0 + std::abs(v2)))
    raise(errc::quadrature_failure, "oscillatory lhs did not converge under panel doubling");
  const double lhs = std::abs(v2);

  double total_variation;
  if (amplitude_deriv_abs) {
    total_variation = integrate_adaptive(amplitude_deriv_abs, a, b, 1e-10);
  } else {
    const double h = 1e-6 * (b - a);
    total_variation = integrate_adaptive(
        [&](double x) {
          const double xl = std::max(a, x - h), xr = std::min(b, x + h);
          return std::abs(amplitude(xr) - amplitude(xl)) / (xr - xl);
        },
        a, b, 1e-8);
  }

  VdcCheck out;
  out.lhs = lhs;
  out.rhs = static_cast<double>(van_der_corput_constant(order)) *
            std::pow(delta_lower, -1.0 / order) * (std::abs(amplitude(a)) + total_variation) *
            std::pow(std::abs(lambda), -1.0 / order);
  out.pass = out.lhs <= out.rhs;
  return out;
}

namespace {

int kernel_panels(double t, double vmax, int p, std::int64_t d) {
  const double cycles = (std::abs(t) * vmax + static_cast<double>(p) *
                                                  static_cast<double>(std::llabs(d))) /
                        (2.0 * kPi);
  return std::max(64, static_cast<int>(std::ceil(8.0 * cycles)));
}

}  // namespace

std::complex<double> kernel_integral(const PeriodicPotential& V, const BandField& field, int j,
                                     int m, int q, std::int64_t d, double t) {
  const int p = V.period();
  const double kmax = kPi / p;
  const double vmax = field.d1.row(j - 1).cwiseAbs().maxCoeff();
  const int panels = kernel_panels(t, vmax, p, d);

  const auto f = [&](double k) {
    const EigenSystem es = band_decomposition(V, k);
    const std::complex<double> amp =
        es.vectors(m - 1, j - 1) * std::conj(es.vectors(q - 1, j - 1));
    return amp * std::polar(1.0, -(t * es.energies[j - 1] + p * static_cast<double>(d) * k));
  };
  return integrate_panels_c(f, -kmax, kmax, panels, 10) / (2.0 * kmax);
}

std::complex<double> propagator_entry(const PeriodicPotential& V, const BandField& field,
                                      const WavePacket& psi, std::int64_t n, double t) {
  const int p = V.period();
  // n = m + l p with 1 <= m <= p.
  std::int64_t m = n % p;
  if (m <= 0) m += p;
  const std::int64_t l = (n - m) / p;

  // Support cells: q + r p with 1 <= q <= p.
  struct Term {
    int q;
    std::int64_t r;
    std::complex<double> coef;
  };
  std::vector<Term> terms;
  std::int64_t dmax = 0;
  for (std::int64_t s = psi.offset(); s < psi.support_end(); ++s) {
    const std::complex<double> c = psi.at(s);
    if (c == std::complex<double>(0.0)) continue;
    std::int64_t q = s % p;
    if (q <= 0) q += p;
    const std::int64_t r = (s - q) / p;
    terms.push_back({static_cast<int>(q), r, c});
    dmax = std::max<std::int64_t>(dmax, std::llabs(r - l));
  }
  if (terms.empty()) return 0.0;

  const double kmax = kPi / p;
  const double vmax = field.d1.cwiseAbs().maxCoeff();
  const int panels = kernel_panels(t, vmax, p, dmax);

  // Same double sum as the per-term kernel integrals, assembled in one node
  // sweep: at each node the fiber is decomposed once and
  // F_q(k) = sum_r psi_{q+rp} e^{-i p r k} collects the support.
  const auto f = [&](double k) {
    const EigenSystem es = band_decomposition(V, k);
    Eigen::VectorXcd F = Eigen::VectorXcd::Zero(p);
    for (const Term& tm : terms)
      F[tm.q - 1] += tm.coef * std::polar(1.0, -p * static_cast<double>(tm.r) * k);
    std::complex<double> s = 0.0;
    for (int j = 0; j < p; ++j) {
      const std::complex<double> proj = es.vectors.col(j).dot(F);  // sum_q conj(v_q) F_q
      s += std::polar(1.0, -t * es.energies[j]) * es.vectors(static_cast<int>(m) - 1, j) * proj;
    }
    return s * std::polar(1.0, p * static_cast<double>(l) * k);
  };
  return integrate_panels_c(f, -kmax, kmax, panels, 10) / (2.0 * kmax);
}

DispersiveConstants dispersive_constants(const SpectralPortrait& sp, const BandField& field,
                                         double delta, double sobolev_max) {
  const int p = sp.period();
  DispersiveConstants out;
  out.delta = delta;
  out.delta_clamped = std::min(delta, 1.0);
  out.sobolev_max = sobolev_max;
  out.flagged = !field.warnings.empty();
  out.partition = stationary_partition(sp, field, delta);

  for (int j = 1; j <= p; ++j) {
    out.k2_counts.push_back(out.partition.count(j, 2));
    out.k3_counts.push_back(out.partition.count(j, 3));
  }
  out.max_components = out.partition.max_components();

  // C_{V,j}: left-endpoint sums plus the total variation of the projection
  // entry, maximized over (m, q). The endpoint factors are gauge-invariant;
  // the variation integral uses the continued field on [0, pi/p], doubled
  // by the conjugation symmetry of the projections.
  const int nk = field.points();
  for (int j = 1; j <= p; ++j) {
    // |v_m(k_s)| per component endpoint.
    std::vector<Eigen::VectorXd> endpoint_abs;
    for (const auto& iv : out.partition.per_band[static_cast<std::size_t>(j - 1)]) {
      const EigenSystem es = band_decomposition(sp.V, iv.lo);
      endpoint_abs.push_back(es.vectors.col(j - 1).cwiseAbs());
    }

    double best = 0.0;
    for (int m = 1; m <= p; ++m) {
      for (int q = 1; q <= p; ++q) {
        double endpoint_sum = 0.0;
        for (const auto& va : endpoint_abs) endpoint_sum += va[m - 1] * va[q - 1];

        double variation = 0.0;
        double prev = 0.0;
        for (int i = 0; i < nk; ++i) {
          const int lo = std::max(0, i - 1), hi = std::min(nk - 1, i + 1);
          const auto& vlo = field.vectors[static_cast<std::size_t>(lo)];
          const auto& vhi = field.vectors[static_cast<std::size_t>(hi)];
          const double dk =
              field.grid[static_cast<std::size_t>(hi)] - field.grid[static_cast<std::size_t>(lo)];
          const std::complex<double> dprod =
              (vhi(m - 1, j - 1) * std::conj(vhi(q - 1, j - 1)) -
               vlo(m - 1, j - 1) * std::conj(vlo(q - 1, j - 1))) /
              dk;
          const double cur = std::abs(dprod);
          if (i > 0) {
            const double h = field.grid[static_cast<std::size_t>(i)] -
                             field.grid[static_cast<std::size_t>(i - 1)];
            variation += 0.5 * h * (prev + cur);
          }
          prev = cur;
        }
        best = std::max(best, endpoint_sum + 2.0 * variation);
      }
    }
    out.c_vj.push_back(best);
  }

  out.c_v = out.max_components *
            (1.0 + p * sobolev_max + 2.0 * kPi / p);
  const double c3 = static_cast<double>(van_der_corput_constant(3));
  out.m_v = std::max(p * c3 / (std::pow(2.0, 1.0 / 3.0) * kPi) * out.c_v /
                         std::sqrt(out.delta_clamped),
                     std::pow(2.0, 1.0 / 6.0));
  return out;
}

DispersiveConstants dispersive_constants(const PeriodicPotential& V, int threads) {
  const SpectralPortrait sp = analyze(V);
  const StableField st = stable_band_field(sp, 1024, threads);
  return dispersive_constants(sp, st.field, st.delta, st.sobolev_max);
}

double interpolated_bound(double m_v, double p_exp, double t) {
  if (p_exp <= 1.0 || p_exp >= 2.0)
    raise(errc::config_error, "interpolation exponent must lie in (1, 2)");
  return std::pow(m_v * std::pow(bracket_t(t), -1.0 / 3.0), 2.0 / p_exp - 1.0);
}

}  // namespace floq
