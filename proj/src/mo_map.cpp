#include "floq/mo_map.hpp"

#include <algorithm>
#include <cmath>

#include "floq/bloch.hpp"
#include "floq/quadrature.hpp"

namespace floq {

namespace {

constexpr double kPi = 3.14159265358979323846;

void require_off_edges(const SpectralPortrait& sp, cdouble z, double min_dist) {
  for (double lam : sp.edges)
    if (std::abs(z - lam) < min_dist)
      raise(errc::branch_point_evaluation, "evaluation within " + std::to_string(min_dist) +
                                               " of a band edge");
}

// Index of the band whose open interval contains x, or -1.
int band_of(const SpectralPortrait& sp, double x) {
  for (std::size_t m = 0; m < sp.bands.size(); ++m)
    if (x > sp.bands[m].first && x < sp.bands[m].second) return static_cast<int>(m);
  return -1;
}

// Squared product under the square root of the product formula, restricted
// to open gaps (closed-gap factors cancel identically). skip_edge, when
// >= 0, removes the factor 1/(s - lambda_e); the caller re-orients the sign.
double signed_product(const SpectralPortrait& sp, double s, int skip_edge) {
  const int p = sp.period();
  double prod = 1.0;
  auto edge_factor = [&](int e) {
    if (e == skip_edge) return;
    prod /= s - sp.edges[static_cast<std::size_t>(e)];
  };
  edge_factor(0);
  prod = -prod;  // 1/((s-lambda_1)(lambda_{2p}-s)) carries one reversed sign
  edge_factor(2 * p - 1);
  for (int j = 1; j <= p - 1; ++j) {
    if (!sp.gap_open[static_cast<std::size_t>(j - 1)]) continue;
    const double dk = s - sp.critical[static_cast<std::size_t>(j - 1)];
    prod *= dk * dk;
    edge_factor(2 * j - 1);
    edge_factor(2 * j);
  }
  return prod;
}

// Theta' on a band interior (real positive branch).
double theta_prime_band(const SpectralPortrait& sp, double s) {
  return std::sqrt(signed_product(sp, s, -1));
}

// Theta' with the factor at edge e peeled off, oriented to be positive on
// the adjacent band: left anchors keep the sign, right anchors flip it.
double theta_prime_peeled(const SpectralPortrait& sp, double s, int e, bool left_anchor) {
  const double q = signed_product(sp, s, e);
  return std::sqrt(left_anchor ? q : -q);
}

}  // namespace

cdouble theta_prime(const SpectralPortrait& sp, cdouble z) {
  require_off_edges(sp, z, 1e-12);
  if (z.imag() == 0.0) {
    const int m = band_of(sp, z.real());
    if (m >= 0) return theta_prime_band(sp, z.real());
    // Boundary value from C_+: keep the +0 imaginary part so the principal
    // square roots land on the correct side of their cuts.
    z = cdouble(z.real(), +0.0);
  }
  const int p = sp.period();
  cdouble val = cdouble(0.0, 1.0);
  val /= std::sqrt(z - sp.edges.front());
  val /= std::sqrt(z - sp.edges.back());
  for (int j = 1; j <= p - 1; ++j) {
    if (!sp.gap_open[static_cast<std::size_t>(j - 1)]) continue;
    val *= z - sp.critical[static_cast<std::size_t>(j - 1)];
    val /= std::sqrt(z - sp.edges[static_cast<std::size_t>(2 * j - 1)]);
    val /= std::sqrt(z - sp.edges[static_cast<std::size_t>(2 * j)]);
  }
  return val;
}

double theta(const SpectralPortrait& sp, double x) {
  const int p = sp.period();
  const int m = band_of(sp, x);
  if (m < 0) raise(errc::branch_point_evaluation, "x is not in the interior of the spectrum");

  const auto [lamL, lamR] = sp.bands[static_cast<std::size_t>(m)];
  const bool from_left = (x - lamL) <= (lamR - x);
  const double anchor = from_left ? lamL : lamR;
  const int edge_index = from_left ? 2 * m : 2 * m + 1;

  // A band edge at a closed interior gap is a removable point of Theta';
  // integrate in s directly there. Genuine edges get the square-root
  // substitution s = anchor -+ u^2.
  bool removable = false;
  if (edge_index != 0 && edge_index != 2 * p - 1) {
    const int gap = from_left ? m - 1 : m;  // gap adjacent to the anchor edge
    removable = !sp.gap_open[static_cast<std::size_t>(gap)];
  }

  double piece;
  const double tol = 1e-11;
  if (removable) {
    piece = integrate_adaptive([&](double s) { return theta_prime_band(sp, s); },
                               from_left ? anchor : x, from_left ? x : anchor, tol);
  } else {
    const double umax = std::sqrt(std::abs(x - anchor));
    piece = integrate_adaptive(
        [&](double u) {
          const double s = from_left ? anchor + u * u : anchor - u * u;
          return 2.0 * theta_prime_peeled(sp, s, edge_index, from_left);
        },
        0.0, umax, tol);
  }

  const double base = -kPi + (from_left ? m : m + 1) * kPi / p;
  const double value = from_left ? base + piece : base - piece;

  const double defect = std::abs(2.0 * std::cos(p * value) - sp.delta.eval(x));
  if (defect > 1e-6)
    raise(errc::quadrature_failure,
          "2cos(p Theta) - Delta defect " + std::to_string(defect) + " at x=" + std::to_string(x));
  return value;
}

ThetaDerivs theta_derivatives_on_band(const SpectralPortrait& sp, double x) {
  // Margins are measured against the enclosing spectral component: interior
  // closed-gap touchpoints are removable for Theta' and need no guard.
  bool inside = false;
  for (const auto& [a, b] : sp.components()) {
    if (x <= a || x >= b) continue;
    inside = true;
    const double margin = 1e-6 * (b - a);
    if (x - a < margin || b - x < margin)
      raise(errc::branch_point_evaluation, "x too close to a band edge for derivative formulas");
    break;
  }
  if (!inside) raise(errc::branch_point_evaluation, "x is not in the interior of the spectrum");

  const int p = sp.period();
  // log Theta' = sum log(x-kappa_j) - (1/2) sum log(x-lambda_i) over the
  // open-gap factors; differentiating term-wise is exact.
  double s1 = 0.0, s1p = 0.0, s2 = 0.0, s2p = 0.0;
  auto edge_term = [&](int e) {
    const double d = x - sp.edges[static_cast<std::size_t>(e)];
    s2 += 1.0 / d;
    s2p += 1.0 / (d * d);
  };
  edge_term(0);
  edge_term(2 * p - 1);
  for (int j = 1; j <= p - 1; ++j) {
    if (!sp.gap_open[static_cast<std::size_t>(j - 1)]) continue;
    const double d = x - sp.critical[static_cast<std::size_t>(j - 1)];
    s1 += 1.0 / d;
    s1p += 1.0 / (d * d);
    edge_term(2 * j - 1);
    edge_term(2 * j);
  }
  const double l1 = s1 - 0.5 * s2;         // Theta''/Theta'
  const double l1p = -s1p + 0.5 * s2p;     // d/dx of the above

  ThetaDerivs out;
  out.t1 = theta_prime_band(sp, x);
  out.t2 = out.t1 * l1;
  out.t3 = out.t1 * (l1 * l1 + l1p);
  return out;
}

namespace {

double log_deriv_l1(const SpectralPortrait& sp, double x) {
  const int p = sp.period();
  double s1 = 0.0, s2 = 0.0;
  auto edge_term = [&](int e) { s2 += 1.0 / (x - sp.edges[static_cast<std::size_t>(e)]); };
  edge_term(0);
  edge_term(2 * p - 1);
  for (int j = 1; j <= p - 1; ++j) {
    if (!sp.gap_open[static_cast<std::size_t>(j - 1)]) continue;
    s1 += 1.0 / (x - sp.critical[static_cast<std::size_t>(j - 1)]);
    edge_term(2 * j - 1);
    edge_term(2 * j);
  }
  return s1 - 0.5 * s2;
}

}  // namespace

std::vector<double> inflection_points(const SpectralPortrait& sp) {
  std::vector<double> out;
  for (const auto& [a, b] : sp.components()) {
    // Theta' > 0, so Theta'' and the log-derivative share their sign; the
    // blow-up gives L1 -> -inf at the left edge and +inf at the right edge.
    const double w = b - a;
    double lo = a + 1e-9 * w, hi = b - 1e-9 * w;
    double flo = log_deriv_l1(sp, lo), fhi = log_deriv_l1(sp, hi);
    if (!(flo < 0.0 && fhi > 0.0))
      raise(errc::no_sign_change, "Theta'' does not change sign on a spectral component");
    while (hi - lo > 1e-14 * (1.0 + std::abs(lo) + std::abs(hi))) {
      const double mid = 0.5 * (lo + hi);
      if (mid <= lo || mid >= hi) break;
      const double fm = log_deriv_l1(sp, mid);
      if (fm < 0.0) {
        lo = mid;
        flo = fm;
      } else {
        hi = mid;
        fhi = fm;
      }
    }
    const double xs = 0.5 * (lo + hi);
    if (theta_derivatives_on_band(sp, xs).t3 <= 0.0)
      raise(errc::no_sign_change, "Theta''' not positive at the located inflection point");
    out.push_back(xs);
  }
  return out;
}

double global_band_function(const SpectralPortrait& sp, double k) {
  const int p = sp.period();
  if (k < -kPi - 1e-12 || k > 1e-12) raise(errc::config_error, "k outside [-pi, 0]");
  k = std::clamp(k, -kPi, 0.0);
  int j = std::min(p, static_cast<int>(std::floor((k + kPi) * p / kPi)) + 1);
  const bool odd = (p - j) % 2 != 0;
  double kj = odd ? k + kPi - (j - 1) * kPi / p : j * kPi / p - k - kPi;
  kj = std::clamp(kj, 0.0, kPi / p);
  return band_energies(sp.V, kj)[j - 1];
}

double lyapunov(const PeriodicPotential& V, cdouble z) {
  const double rho = monodromy(V, z).spectral_radius();
  return std::max(0.0, std::log(rho) / V.period());
}

cdouble theta_upper(const SpectralPortrait& sp, cdouble z) {
  if (z.imag() <= 0.0) raise(errc::branch_point_evaluation, "theta_upper requires Im z > 0");
  // Anchor in the widest band, then integrate Theta' up and across.
  int widest = 0;
  for (std::size_t m = 1; m < sp.bands.size(); ++m)
    if (sp.bands[m].second - sp.bands[m].first >
        sp.bands[static_cast<std::size_t>(widest)].second -
            sp.bands[static_cast<std::size_t>(widest)].first)
      widest = static_cast<int>(m);
  const double x0 = 0.5 * (sp.bands[static_cast<std::size_t>(widest)].first +
                           sp.bands[static_cast<std::size_t>(widest)].second);
  const cdouble anchor(x0, 0.0);
  const cdouble corner(x0, z.imag());

  auto along = [&](cdouble a, cdouble b) {
    return integrate_adaptive_c(
               [&](double t) { return theta_prime(sp, a + t * (b - a)); }, 0.0, 1.0, 1e-10) *
           (b - a);
  };
  return cdouble(theta(sp, x0), 0.0) + along(anchor, corner) + along(corner, z);
}

MOBoundaryData sample_mo_boundary(const SpectralPortrait& sp, int samples_per_band) {
  MOBoundaryData out;
  const int p = sp.period();
  out.x.resize(static_cast<std::size_t>(p));
  out.th.resize(static_cast<std::size_t>(p));
  out.th1.resize(static_cast<std::size_t>(p));
  out.th2.resize(static_cast<std::size_t>(p));
  out.th3.resize(static_cast<std::size_t>(p));
  for (int m = 0; m < p; ++m) {
    const auto [a, b] = sp.bands[static_cast<std::size_t>(m)];
    // Strictly inside the derivative-formula margin of 1e-6 bandwidths.
    const double inset = std::max(2e-6 * (b - a), 1e-12);
    for (int i = 0; i < samples_per_band; ++i) {
      const double x = a + inset + (b - a - 2 * inset) * i / (samples_per_band - 1);
      const ThetaDerivs d = theta_derivatives_on_band(sp, x);
      out.x[static_cast<std::size_t>(m)].push_back(x);
      out.th[static_cast<std::size_t>(m)].push_back(theta(sp, x));
      out.th1[static_cast<std::size_t>(m)].push_back(d.t1);
      out.th2[static_cast<std::size_t>(m)].push_back(d.t2);
      out.th3[static_cast<std::size_t>(m)].push_back(d.t3);
    }
  }
  out.inflection = inflection_points(sp);
  return out;
}

}  // namespace floq
