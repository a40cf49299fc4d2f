#include "floq/bloch.hpp"

#include <cmath>
#include <complex>
#include <functional>
#include <limits>

#include "floq/parallel.hpp"

namespace floq {

namespace {
constexpr double kPi = 3.14159265358979323846;
}

Eigen::MatrixXcd bloch_hamiltonian(const PeriodicPotential& V, double k) {
  const int p = V.period();
  const cdouble phase = std::polar(1.0, p * k);  // e^{ipk}
  Eigen::MatrixXcd h = Eigen::MatrixXcd::Zero(p, p);
  if (p == 1) {
    h(0, 0) = V.at(1) + 2.0 * std::cos(k);
    return h;
  }
  for (int q = 0; q < p; ++q) h(q, q) = V.at(q + 1);
  if (p == 2) {
    h(0, 1) = 1.0 + std::conj(phase);
    h(1, 0) = 1.0 + phase;
    return h;
  }
  for (int q = 0; q + 1 < p; ++q) {
    h(q, q + 1) = 1.0;
    h(q + 1, q) = 1.0;
  }
  h(0, p - 1) = std::conj(phase);
  h(p - 1, 0) = phase;
  return h;
}

EigenSystem band_decomposition(const PeriodicPotential& V, double k) {
  const Eigen::MatrixXcd h = bloch_hamiltonian(V, k);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> solver(h);
  if (solver.info() != Eigen::Success) raise(errc::eigen_failure, "eigensolver did not converge");
  const double resid =
      (h * solver.eigenvectors() - solver.eigenvectors() * solver.eigenvalues().asDiagonal())
          .norm();
  if (resid > 1e-8) raise(errc::eigen_failure, "eigen-residual above 1e-8");
  return EigenSystem{solver.eigenvalues(), solver.eigenvectors()};
}

Eigen::VectorXd band_energies(const PeriodicPotential& V, double k) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> solver(bloch_hamiltonian(V, k),
                                                         Eigen::EigenvaluesOnly);
  if (solver.info() != Eigen::Success) raise(errc::eigen_failure, "eigensolver did not converge");
  return solver.eigenvalues();
}

double band_energy_newton(const SpectralPortrait& sp, int j, double k, double guess) {
  const int p = sp.period();
  const double rhs = 2.0 * std::cos(p * k);
  if (std::isfinite(guess)) {
    double e = guess;
    for (int it = 0; it < 8; ++it) {
      const double f = sp.delta.eval(e) - rhs;
      const double df = sp.delta1.eval(e);
      if (df == 0.0) break;
      const double step = f / df;
      e -= step;
      if (std::abs(step) <= 1e-14 * (1.0 + std::abs(e))) {
        // Accept only if the iterate stayed on band j.
        if (e >= sp.bands[static_cast<std::size_t>(j - 1)].first - 1e-9 &&
            e <= sp.bands[static_cast<std::size_t>(j - 1)].second + 1e-9)
          return e;
        break;
      }
    }
  }
  return band_energies(sp.V, k)[j - 1];
}

namespace {

// Fix the free phase of each column: largest-modulus component real positive.
void canonicalize_phases(Eigen::MatrixXcd& vecs) {
  for (int j = 0; j < vecs.cols(); ++j) {
    int imax = 0;
    double amax = 0.0;
    for (int i = 0; i < vecs.rows(); ++i) {
      const double a = std::abs(vecs(i, j));
      if (a > amax) {
        amax = a;
        imax = i;
      }
    }
    const cdouble z = vecs(imax, j);
    if (std::abs(z) > 0.0) vecs.col(j) *= std::conj(z) / std::abs(z);
  }
}

// Align cur columns [lo, hi) against prev by the closest unitary to
// cur^H prev (Procrustes); for a single column this is the usual phase fix.
void align_cluster(const Eigen::MatrixXcd& prev, Eigen::MatrixXcd& cur, int lo, int hi) {
  const int c = hi - lo;
  if (c == 1) {
    const cdouble ov = cur.col(lo).dot(prev.col(lo));  // <cur, prev>, antilinear in cur
    if (std::abs(ov) > 0.0) cur.col(lo) *= ov / std::abs(ov);
    return;
  }
  const Eigen::MatrixXcd m = cur.middleCols(lo, c).adjoint() * prev.middleCols(lo, c);
  Eigen::JacobiSVD<Eigen::MatrixXcd> svd(m, Eigen::ComputeFullU | Eigen::ComputeFullV);
  const Eigen::MatrixXcd rot = svd.matrixU() * svd.matrixV().adjoint();
  cur.middleCols(lo, c) = cur.middleCols(lo, c) * rot;
}

}  // namespace

BandField band_path(const SpectralPortrait& sp, int n_k, int threads) {
  const PeriodicPotential& V = sp.V;
  const int p = V.period();
  if (n_k < 16 * p) raise(errc::config_error, "k_grid must be at least 16*p");

  BandField f;
  f.grid.resize(static_cast<std::size_t>(n_k));
  f.energy.resize(p, n_k);
  f.vectors.assign(static_cast<std::size_t>(n_k), Eigen::MatrixXcd());
  f.d1.resize(p, n_k);
  f.d2.resize(p, n_k);
  f.d3.resize(p, n_k);

  const double kmax = kPi / p;
  for (int i = 0; i < n_k; ++i) f.grid[static_cast<std::size_t>(i)] = kmax * i / (n_k - 1);

  parallel_for(n_k, threads, [&](int i) {
    const EigenSystem es = band_decomposition(V, f.grid[static_cast<std::size_t>(i)]);
    f.energy.col(i) = es.energies;
    f.vectors[static_cast<std::size_t>(i)] = es.vectors;
    for (int j = 1; j <= p; ++j) {
      const BandDerivs d = band_derivatives(sp, j, f.grid[static_cast<std::size_t>(i)],
                                            es.energies[j - 1]);
      f.d1(j - 1, i) = d.d1;
      f.d2(j - 1, i) = d.d2;
      f.d3(j - 1, i) = d.d3;
    }
  });

  // Sequential continuation pass.
  canonicalize_phases(f.vectors[0]);
  const double cluster_tol = 1e-8 * (1.0 + sp.spectral_diameter());
  for (int i = 1; i < n_k; ++i) {
    const Eigen::MatrixXcd& prev = f.vectors[static_cast<std::size_t>(i - 1)];
    Eigen::MatrixXcd& cur = f.vectors[static_cast<std::size_t>(i)];
    int lo = 0;
    while (lo < p) {
      int hi = lo + 1;
      while (hi < p && f.energy(hi, i) - f.energy(hi - 1, i) <= cluster_tol) ++hi;
      align_cluster(prev, cur, lo, hi);
      lo = hi;
    }
    for (int j = 0; j < p; ++j) {
      const double ov = std::abs(cur.col(j).dot(prev.col(j)));
      f.min_overlap = std::min(f.min_overlap, ov);
    }
  }
  if (f.min_overlap < 0.9)
    f.warnings.push_back("ContinuationWarning: step overlap " + std::to_string(f.min_overlap) +
                         " < 0.9; k-grid too coarse");
  return f;
}

namespace {

// Finite-difference weights on arbitrary nodes (Fornberg's recurrence).
// Returns weights for derivative orders 0..m at x0.
std::vector<std::vector<double>> fd_weights(double x0, const std::vector<double>& x, int m) {
  const int n = static_cast<int>(x.size()) - 1;
  std::vector<std::vector<std::vector<double>>> d(
      static_cast<std::size_t>(n + 1),
      std::vector<std::vector<double>>(static_cast<std::size_t>(n + 1),
                                       std::vector<double>(static_cast<std::size_t>(m + 1), 0.0)));
  d[0][0][0] = 1.0;
  double c1 = 1.0;
  for (int nn = 1; nn <= n; ++nn) {
    double c2 = 1.0;
    for (int nu = 0; nu < nn; ++nu) {
      const double c3 = x[static_cast<std::size_t>(nn)] - x[static_cast<std::size_t>(nu)];
      c2 *= c3;
      for (int k = 0; k <= std::min(nn, m); ++k) {
        d[static_cast<std::size_t>(nn)][static_cast<std::size_t>(nu)][static_cast<std::size_t>(k)] =
            ((x[static_cast<std::size_t>(nn)] - x0) *
                 d[static_cast<std::size_t>(nn - 1)][static_cast<std::size_t>(nu)]
                  [static_cast<std::size_t>(k)] -
             (k > 0 ? k * d[static_cast<std::size_t>(nn - 1)][static_cast<std::size_t>(nu)]
                            [static_cast<std::size_t>(k - 1)]
                    : 0.0)) /
            c3;
      }
    }
    for (int k = 0; k <= std::min(nn, m); ++k) {
      d[static_cast<std::size_t>(nn)][static_cast<std::size_t>(nn)][static_cast<std::size_t>(k)] =
          c1 / c2 *
          ((k > 0 ? k * d[static_cast<std::size_t>(nn - 1)][static_cast<std::size_t>(nn - 1)]
                          [static_cast<std::size_t>(k - 1)]
                  : 0.0) -
           (x[static_cast<std::size_t>(nn - 1)] - x0) *
               d[static_cast<std::size_t>(nn - 1)][static_cast<std::size_t>(nn - 1)]
                [static_cast<std::size_t>(k)]);
    }
    c1 = c2;
  }
  std::vector<std::vector<double>> w(static_cast<std::size_t>(m + 1),
                                     std::vector<double>(static_cast<std::size_t>(n + 1)));
  for (int k = 0; k <= m; ++k)
    for (int nu = 0; nu <= n; ++nu)
      w[static_cast<std::size_t>(k)][static_cast<std::size_t>(nu)] =
          d[static_cast<std::size_t>(n)][static_cast<std::size_t>(nu)][static_cast<std::size_t>(k)];
  return w;
}

BandDerivs fd_at_scale(const PeriodicPotential& V, int j, double k, double h) {
  const double kmax = kPi / V.period();
  const int n_nodes = 7;
  // Shift the stencil to stay inside [0, kmax]; the sorted band function is
  // one-sidedly smooth at the endpoints, so nodes never cross them.
  double start = k - 3.0 * h;
  if (start < 0.0) start = 0.0;
  if (start + (n_nodes - 1) * h > kmax) start = kmax - (n_nodes - 1) * h;
  std::vector<double> nodes(n_nodes);
  std::vector<double> vals(n_nodes);
  for (int i = 0; i < n_nodes; ++i) {
    nodes[static_cast<std::size_t>(i)] = start + i * h;
    vals[static_cast<std::size_t>(i)] =
        band_energies(V, nodes[static_cast<std::size_t>(i)])[j - 1];
  }
  const auto w = fd_weights(k, nodes, 3);
  BandDerivs out;
  for (int i = 0; i < n_nodes; ++i) {
    out.d1 += w[1][static_cast<std::size_t>(i)] * vals[static_cast<std::size_t>(i)];
    out.d2 += w[2][static_cast<std::size_t>(i)] * vals[static_cast<std::size_t>(i)];
    out.d3 += w[3][static_cast<std::size_t>(i)] * vals[static_cast<std::size_t>(i)];
  }
  return out;
}

}  // namespace

BandDerivs band_derivatives_fd(const PeriodicPotential& V, int j, double k) {
  const double h = 1e-3 * kPi / V.period();
  const BandDerivs a = fd_at_scale(V, j, k, h);
  const BandDerivs b = fd_at_scale(V, j, k, 0.5 * h);
  // Richardson step assuming the stencil's leading error order 4.
  return BandDerivs{(16.0 * b.d1 - a.d1) / 15.0, (16.0 * b.d2 - a.d2) / 15.0,
                    (16.0 * b.d3 - a.d3) / 15.0};
}

BandDerivs band_derivatives(const SpectralPortrait& sp, int j, double k) {
  return band_derivatives(sp, j, k, band_energies(sp.V, k)[j - 1]);
}

BandDerivs band_derivatives(const SpectralPortrait& sp, int j, double k, double E) {
  const int p = sp.period();
  // Degeneracy guard: closed gaps are the only places Delta'(E) vanishes on
  // the spectrum.
  const double guard = 1e-4 * (1.0 + sp.spectral_diameter());
  for (std::size_t g = 0; g < sp.gap_open.size(); ++g) {
    if (!sp.gap_open[g] && std::abs(E - sp.critical[g]) < guard)
      return band_derivatives_fd(sp.V, j, k);
  }

  const double dp1 = sp.delta1.eval(E);
  if (std::abs(dp1) <= 1e-10 * (1.0 + sp.delta1.eval_scale(E)))
    return band_derivatives_fd(sp.V, j, k);

  const double dp2 = sp.delta2.eval(E);
  const double dp3 = sp.delta3.eval(E);
  const double s = std::sin(p * k), c = std::cos(p * k);

  BandDerivs d;
  d.d1 = -2.0 * p * s / dp1;
  d.d2 = (-2.0 * p * p * c - dp2 * d.d1 * d.d1) / dp1;
  d.d3 = (2.0 * p * p * p * s - dp3 * d.d1 * d.d1 * d.d1 - 3.0 * dp2 * d.d1 * d.d2) / dp1;
  return d;
}

namespace {

double golden_min(const std::function<double(double)>& g, double a, double b, double xtol) {
  const double phi = 0.5 * (std::sqrt(5.0) - 1.0);
  double x1 = b - phi * (b - a), x2 = a + phi * (b - a);
  double f1 = g(x1), f2 = g(x2);
  while (b - a > xtol) {
    if (f1 <= f2) {
      b = x2;
      x2 = x1;
      f2 = f1;
      x1 = b - phi * (b - a);
      f1 = g(x1);
    } else {
      a = x1;
      x1 = x2;
      f1 = f2;
      x2 = a + phi * (b - a);
      f2 = g(x2);
    }
  }
  return std::min(f1, f2);
}

}  // namespace

double delta_V(const SpectralPortrait& sp, const BandField& field) {
  const int p = sp.period();
  const int n = field.points();
  double best = std::numeric_limits<double>::infinity();
  // Refine each band's grid argmin in its bracketing cell; the global
  // minimum is the smallest of grid values and refined values.
  for (int j = 0; j < p; ++j) {
    int bi = 0;
    double bv = std::numeric_limits<double>::infinity();
    for (int i = 0; i < n; ++i) {
      const double v = std::abs(field.d2(j, i)) + std::abs(field.d3(j, i));
      if (v < bv) {
        bv = v;
        bi = i;
      }
    }
    const double a = field.grid[static_cast<std::size_t>(std::max(0, bi - 1))];
    const double b = field.grid[static_cast<std::size_t>(std::min(n - 1, bi + 1))];
    const int band = j + 1;
    const auto g = [&](double k) {
      const BandDerivs d = band_derivatives(sp, band, k);
      return std::abs(d.d2) + std::abs(d.d3);
    };
    best = std::min({best, bv, golden_min(g, a, b, 1e-11 * (1.0 + b - a))});
  }
  if (best <= 1e-12)
    raise(errc::non_positive_delta, "refined minimum of |E''|+|E'''| is not positive");
  return best;
}

double eigvec_sobolev_norm(const BandField& field, int j) {
  const int n = field.points();
  const int p = field.bands();
  if (p == 1) return 0.0;
  std::vector<double> sq(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) {
    const int lo = std::max(0, i - 1), hi = std::min(n - 1, i + 1);
    const double dk = field.grid[static_cast<std::size_t>(hi)] -
                      field.grid[static_cast<std::size_t>(lo)];
    const Eigen::VectorXcd dv = (field.vectors[static_cast<std::size_t>(hi)].col(j - 1) -
                                 field.vectors[static_cast<std::size_t>(lo)].col(j - 1)) /
                                dk;
    sq[static_cast<std::size_t>(i)] = dv.squaredNorm();
  }
  double integral = 0.0;
  for (int i = 0; i + 1 < n; ++i) {
    const double h = field.grid[static_cast<std::size_t>(i + 1)] -
                     field.grid[static_cast<std::size_t>(i)];
    integral += 0.5 * h * (sq[static_cast<std::size_t>(i)] + sq[static_cast<std::size_t>(i + 1)]);
  }
  return 2.0 * integral;  // extend [0, pi/p] to B by symmetry
}

StableField stable_band_field(const SpectralPortrait& sp, int initial_n_k, int threads) {
  const int p = sp.period();
  int n_k = std::max(initial_n_k, 16 * p);
  StableField st;
  st.field = band_path(sp, n_k, threads);
  st.delta = delta_V(sp, st.field);
  for (int j = 1; j <= p; ++j) st.sobolev_max = std::max(st.sobolev_max, eigvec_sobolev_norm(st.field, j));

  for (int round = 0; round < 4; ++round) {
    n_k *= 2;
    BandField next = band_path(sp, n_k, threads);
    double d2 = delta_V(sp, next);
    double s2 = 0.0;
    for (int j = 1; j <= p; ++j) s2 = std::max(s2, eigvec_sobolev_norm(next, j));
    const bool delta_ok = std::abs(d2 - st.delta) <= 5e-3 * std::max(1e-30, std::abs(st.delta));
    const bool sob_ok = std::abs(s2 - st.sobolev_max) <= 5e-3 * std::max(1.0, st.sobolev_max);
    st.field = std::move(next);
    st.delta = d2;
    st.sobolev_max = s2;
    if (delta_ok && sob_ok) break;
  }
  return st;
}

}  // namespace floq
