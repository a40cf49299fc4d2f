#include "floq/evolve.hpp"

#include <algorithm>
#include <cmath>

#include "floq/bloch.hpp"
#include "floq/errors.hpp"
#include "floq/spectrum.hpp"

namespace floq {

namespace {
constexpr double kPi = 3.14159265358979323846;
}

double max_group_velocity(const PeriodicPotential& V) {
  const SpectralPortrait sp = analyze(V);
  const int p = V.period();
  const int n = 512;
  double vmax = 0.0;
  for (int i = 0; i <= n; ++i) {
    const double k = kPi / p * i / n;
    const Eigen::VectorXd evs = band_energies(V, k);
    for (int j = 1; j <= p; ++j)
      vmax = std::max(vmax, std::abs(band_derivatives(sp, j, k, evs[j - 1]).d1));
  }
  return vmax;
}

LatticeWindow auto_window(const PeriodicPotential& V, Boundary boundary, const WavePacket& psi0,
                          double t_max, int margin) {
  margin = std::max(margin, 20);
  const double vmax = max_group_velocity(V);
  const double reach = vmax * std::abs(t_max);
  const std::int64_t lo = psi0.offset(), hi = psi0.support_end() - 1;
  LatticeWindow w;
  w.boundary = boundary;
  if (boundary == Boundary::dirichlet) {
    const double extent = std::max(std::abs(static_cast<double>(lo)),
                                   std::abs(static_cast<double>(hi)));
    w.radius = static_cast<int>(std::ceil(extent + reach)) + margin;
  } else {
    const int p = V.period();
    const std::int64_t width = hi - lo + 1;
    const double need = static_cast<double>(width) + 2.0 * reach + 2.0 * margin;
    w.cells = static_cast<int>(std::ceil(need / p));
  }
  return w;
}

void check_cone(const LatticeWindow& w, const PeriodicPotential& V, const WavePacket& psi0,
                double t_max, int margin) {
  margin = std::max(margin, 20);
  const double reach = max_group_velocity(V) * std::abs(t_max);
  const std::int64_t lo = psi0.offset(), hi = psi0.support_end() - 1;
  if (w.boundary == Boundary::dirichlet) {
    const double need = std::max(std::abs(static_cast<double>(lo)),
                                 std::abs(static_cast<double>(hi))) +
                        reach + margin;
    if (w.radius < need)
      raise(errc::cone_violation, "Dirichlet radius " + std::to_string(w.radius) +
                                      " < required " + std::to_string(need));
  } else {
    const double need = static_cast<double>(hi - lo + 1) + 2.0 * reach + 2.0 * margin;
    if (w.cells * V.period() < need)
      raise(errc::cone_violation, "ring size " + std::to_string(w.cells * V.period()) +
                                      " < required " + std::to_string(need));
  }
}

RingPropagator::RingPropagator(const PeriodicPotential& V, int cells)
    : V_(V), cells_(cells), p_(V.period()), n_(cells * V.period()) {
  if (cells_ < 1) raise(errc::config_error, "ring needs at least one cell");
  fibers_.reserve(static_cast<std::size_t>(cells_));
  for (int s = 0; s < cells_; ++s) {
    const double k = 2.0 * kPi * s / n_;
    const EigenSystem es = band_decomposition(V_, k);
    fibers_.push_back(Fiber{es.energies, es.vectors});
  }
}

std::vector<std::complex<double>> RingPropagator::to_ring(const WavePacket& psi0) const {
  std::vector<std::complex<double>> ring(static_cast<std::size_t>(n_), 0.0);
  for (std::int64_t n = psi0.offset(); n < psi0.support_end(); ++n) {
    std::int64_t u = (n - 1) % n_;
    if (u < 0) u += n_;
    ring[static_cast<std::size_t>(u)] += psi0.at(n);  // ring position of site n (1-based cells)
  }
  return ring;
}

WavePacket RingPropagator::from_ring(const std::vector<std::complex<double>>& ring,
                                     std::int64_t center) const {
  // Unwrap the ring onto lattice sites centered at the initial support.
  const std::int64_t first = center - n_ / 2;
  std::vector<std::complex<double>> amps(static_cast<std::size_t>(n_));
  for (std::int64_t i = 0; i < n_; ++i) {
    const std::int64_t n = first + i;
    std::int64_t u = (n - 1) % n_;
    if (u < 0) u += n_;
    amps[static_cast<std::size_t>(i)] = ring[static_cast<std::size_t>(u)];
  }
  return WavePacket(first, std::move(amps));
}

WavePacket RingPropagator::evolve(const WavePacket& psi0, double t) const {
  return evolve_series(psi0, {t}).front();
}

namespace {

// Phase table e^{-i kp r} for r = 0..cells-1, reused across q.
std::vector<std::complex<double>> phase_row(double kp, int cells, double scale) {
  std::vector<std::complex<double>> ph(static_cast<std::size_t>(cells));
  for (int r = 0; r < cells; ++r) ph[static_cast<std::size_t>(r)] = std::polar(scale, kp * r);
  return ph;
}

}  // namespace

std::vector<WavePacket> RingPropagator::evolve_series(const WavePacket& psi0,
                                                      const std::vector<double>& times) const {
  const std::vector<std::complex<double>> ring = to_ring(psi0);
  const std::int64_t center = psi0.offset() + (psi0.support_end() - psi0.offset()) / 2;

  // hat[s](q) = sum_r ring(q + r p) e^{-i r p k_s}; then project on fibers.
  std::vector<Eigen::VectorXcd> coef(static_cast<std::size_t>(cells_));
  for (int s = 0; s < cells_; ++s) {
    Eigen::VectorXcd hat = Eigen::VectorXcd::Zero(p_);
    const auto ph = phase_row(-2.0 * kPi * s / cells_, cells_, 1.0);
    for (int r = 0; r < cells_; ++r)
      for (int q = 0; q < p_; ++q)
        hat[q] += ring[static_cast<std::size_t>(q + r * p_)] * ph[static_cast<std::size_t>(r)];
    coef[static_cast<std::size_t>(s)] = fibers_[static_cast<std::size_t>(s)].vectors.adjoint() * hat;
  }

  std::vector<WavePacket> out;
  out.reserve(times.size());
  std::vector<std::complex<double>> evolved(static_cast<std::size_t>(n_));
  for (double t : times) {
    std::fill(evolved.begin(), evolved.end(), std::complex<double>(0.0));
    for (int s = 0; s < cells_; ++s) {
      const Fiber& f = fibers_[static_cast<std::size_t>(s)];
      Eigen::VectorXcd c = coef[static_cast<std::size_t>(s)];
      for (int j = 0; j < p_; ++j) c[j] *= std::polar(1.0, -t * f.energies[j]);
      const Eigen::VectorXcd hat = f.vectors * c;
      const auto ph = phase_row(2.0 * kPi * s / cells_, cells_, 1.0 / cells_);
      for (int r = 0; r < cells_; ++r)
        for (int q = 0; q < p_; ++q)
          evolved[static_cast<std::size_t>(q + r * p_)] += hat[q] * ph[static_cast<std::size_t>(r)];
    }
    out.push_back(from_ring(evolved, center));
  }
  return out;
}

std::vector<std::complex<double>> RingPropagator::evolve_ring(
    const std::vector<std::complex<double>>& ring, double t) const {
  std::vector<std::complex<double>> evolved(static_cast<std::size_t>(n_), 0.0);
  for (int s = 0; s < cells_; ++s) {
    const Fiber& f = fibers_[static_cast<std::size_t>(s)];
    Eigen::VectorXcd hat = Eigen::VectorXcd::Zero(p_);
    const auto fwd = phase_row(-2.0 * kPi * s / cells_, cells_, 1.0);
    for (int r = 0; r < cells_; ++r)
      for (int q = 0; q < p_; ++q)
        hat[q] += ring[static_cast<std::size_t>(q + r * p_)] * fwd[static_cast<std::size_t>(r)];
    Eigen::VectorXcd c = f.vectors.adjoint() * hat;
    for (int j = 0; j < p_; ++j) c[j] *= std::polar(1.0, -t * f.energies[j]);
    hat = f.vectors * c;
    const auto bwd = phase_row(2.0 * kPi * s / cells_, cells_, 1.0 / cells_);
    for (int r = 0; r < cells_; ++r)
      for (int q = 0; q < p_; ++q)
        evolved[static_cast<std::size_t>(q + r * p_)] += hat[q] * bwd[static_cast<std::size_t>(r)];
  }
  return evolved;
}

DirichletPropagator::DirichletPropagator(const PeriodicPotential& V, int radius)
    : radius_(radius) {
  const int n = 2 * radius + 1;
  Eigen::MatrixXd h = Eigen::MatrixXd::Zero(n, n);
  for (int i = 0; i < n; ++i) {
    h(i, i) = V.at(i - radius);
    if (i + 1 < n) {
      h(i, i + 1) = 1.0;
      h(i + 1, i) = 1.0;
    }
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(h);
  if (solver.info() != Eigen::Success) raise(errc::eigen_failure, "Dirichlet eigensolve failed");
  energies_ = solver.eigenvalues();
  vectors_ = solver.eigenvectors();
}

WavePacket DirichletPropagator::evolve(const WavePacket& psi0, double t) const {
  const int n = 2 * radius_ + 1;
  Eigen::VectorXcd v = Eigen::VectorXcd::Zero(n);
  for (std::int64_t m = psi0.offset(); m < psi0.support_end(); ++m) {
    if (m < -radius_ || m > radius_)
      raise(errc::cone_violation, "initial support outside the Dirichlet window");
    v[static_cast<int>(m) + radius_] = psi0.at(m);
  }
  Eigen::VectorXcd c = vectors_.transpose() * v;
  for (int i = 0; i < n; ++i) c[i] *= std::polar(1.0, -t * energies_[i]);
  const Eigen::VectorXcd w = vectors_ * c;
  std::vector<std::complex<double>> amps(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) amps[static_cast<std::size_t>(i)] = w[i];
  return WavePacket(-radius_, std::move(amps));
}

std::vector<WavePacket> linear_evolve(const PeriodicPotential& V, const WavePacket& psi0,
                                      const std::vector<double>& times, const LatticeWindow& w) {
  double t_max = 0.0;
  for (double t : times) t_max = std::max(t_max, std::abs(t));
  check_cone(w, V, psi0, t_max);
  if (w.boundary == Boundary::ring) return RingPropagator(V, w.cells).evolve_series(psi0, times);
  DirichletPropagator prop(V, w.radius);
  std::vector<WavePacket> out;
  out.reserve(times.size());
  for (double t : times) out.push_back(prop.evolve(psi0, t));
  return out;
}

FitResult fit_decay_exponent(const std::vector<double>& times,
                             const std::vector<double>& sup_norms, double t_lo, double t_hi) {
  std::vector<double> xs, ys;
  for (std::size_t i = 0; i < times.size(); ++i) {
    if (times[i] < t_lo || times[i] > t_hi) continue;
    if (times[i] <= 0.0) continue;
    if (sup_norms[i] <= 0.0) raise(errc::insufficient_data, "non-positive sup-norm sample");
    xs.push_back(std::log(times[i]));
    ys.push_back(std::log(sup_norms[i]));
  }
  const std::size_t n = xs.size();
  if (n < 10) raise(errc::insufficient_data, "fewer than 10 samples in the fit window");
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    mx += xs[i];
    my += ys[i];
  }
  mx /= static_cast<double>(n);
  my /= static_cast<double>(n);
  double sxx = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    sxx += (xs[i] - mx) * (xs[i] - mx);
    sxy += (xs[i] - mx) * (ys[i] - my);
  }
  const double slope = sxy / sxx;
  double ss = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double r = ys[i] - my - slope * (xs[i] - mx);
    ss += r * r;
  }
  FitResult fit;
  fit.alpha = slope;
  fit.stderr_ = n > 2 ? std::sqrt(ss / (static_cast<double>(n) - 2.0) / sxx) : 0.0;
  return fit;
}

DecaySeries sup_norm_decay(const PeriodicPotential& V, const WavePacket& psi0,
                           const std::vector<double>& times, const LatticeWindow& w,
                           double fit_lo, double fit_hi) {
  const std::vector<WavePacket> states = linear_evolve(V, psi0, times, w);
  DecaySeries s;
  s.times = times;
  s.sup_norms.reserve(times.size());
  double ratio = 0.0;
  for (std::size_t i = 0; i < states.size(); ++i) {
    const double sup = states[i].linf();
    s.sup_norms.push_back(sup);
    ratio = std::max(ratio, std::pow(bracket_t(times[i]), 1.0 / 3.0) * sup / psi0.l1());
  }
  s.ratio = ratio;
  if (fit_hi <= 0.0) fit_hi = *std::max_element(times.begin(), times.end());
  const FitResult fit = fit_decay_exponent(s.times, s.sup_norms, fit_lo, fit_hi);
  s.alpha = fit.alpha;
  s.alpha_stderr = fit.stderr_;
  return s;
}

double dnls_max_step(const PeriodicPotential& V, const WavePacket& psi0, double sigma) {
  return 0.1 / (2.0 + V.sup_norm() + std::pow(psi0.linf(), sigma - 1.0));
}

namespace {

void nonlinear_half_step(std::vector<std::complex<double>>& ring, double sigma, int sign,
                         double half_dt) {
  for (auto& a : ring) {
    const double mag = std::abs(a);
    if (mag == 0.0) continue;
    a *= std::polar(1.0, -sign * std::pow(mag, sigma - 1.0) * half_dt);
  }
}

}  // namespace

DnlsResult dnls_evolve(const PeriodicPotential& V, const WavePacket& psi0, double sigma, int sign,
                       double dt, const std::vector<double>& times, const LatticeWindow& w,
                       int check_interval) {
  if (w.boundary != Boundary::ring)
    raise(errc::config_error, "dnls evolution uses the ring window");
  if (sign != 1 && sign != -1) raise(errc::config_error, "nonlinearity sign must be +-1");
  if (dt > dnls_max_step(V, psi0, sigma) * (1.0 + 1e-12))
    raise(errc::config_error, "dt exceeds the stability bound for this data");
  double t_max = 0.0;
  for (double t : times) {
    if (t < 0.0) raise(errc::config_error, "dnls times must be nonnegative");
    t_max = std::max(t_max, t);
  }
  check_cone(w, V, psi0, t_max);

  const RingPropagator ring_prop(V, w.cells);
  const int n = ring_prop.sites();

  // Work on ring storage directly: position u (0-based) = site u+1.
  std::vector<std::complex<double>> state(static_cast<std::size_t>(n), 0.0);
  for (std::int64_t m = psi0.offset(); m < psi0.support_end(); ++m) {
    std::int64_t u = (m - 1) % n;
    if (u < 0) u += n;
    state[static_cast<std::size_t>(u)] += psi0.at(m);
  }

  // One Strang step: nonlinear half, exact linear, nonlinear half.
  auto one_step = [&](const std::vector<std::complex<double>>& in, double step) {
    std::vector<std::complex<double>> s = in;
    nonlinear_half_step(s, sigma, sign, 0.5 * step);
    s = ring_prop.evolve_ring(s, step);
    nonlinear_half_step(s, sigma, sign, 0.5 * step);
    return s;
  };

  DnlsResult result;
  result.times = times;
  std::vector<double> sorted_times = times;
  std::sort(sorted_times.begin(), sorted_times.end());

  const std::int64_t center = psi0.offset() + (psi0.support_end() - psi0.offset()) / 2;
  auto snapshot = [&](const std::vector<std::complex<double>>& s) {
    const std::int64_t first = center - n / 2;
    std::vector<std::complex<double>> amps(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) {
      std::int64_t u = (first + i - 1) % n;
      if (u < 0) u += n;
      amps[static_cast<std::size_t>(i)] = s[static_cast<std::size_t>(u)];
    }
    return WavePacket(first, std::move(amps));
  };

  double t = 0.0;
  long step_count = 0;
  for (double target : sorted_times) {
    while (t < target - 1e-12) {
      const double step = std::min(dt, target - t);
      std::vector<std::complex<double>> next = one_step(state, step);
      if (check_interval > 0 && step_count % check_interval == 0) {
        const std::vector<std::complex<double>> half = one_step(one_step(state, 0.5 * step), 0.5 * step);
        double err = 0.0;
        for (std::size_t i = 0; i < next.size(); ++i) err += std::norm(next[i] - half[i]);
        err = std::sqrt(err);
        result.max_local_error = std::max(result.max_local_error, err);
        if (err > 1e-6)
          raise(errc::step_rejected, "step-halving defect " + std::to_string(err) + " at t=" +
                                         std::to_string(t));
        next = std::move(half);
      }
      state = std::move(next);
      t += step;
      ++step_count;
    }
    result.states.push_back(snapshot(state));
  }

  // Restore the caller's time order.
  std::vector<WavePacket> ordered(result.states.size());
  for (std::size_t i = 0; i < times.size(); ++i) {
    const auto it = std::lower_bound(sorted_times.begin(), sorted_times.end(), times[i]);
    ordered[i] = result.states[static_cast<std::size_t>(it - sorted_times.begin())];
  }
  result.states = std::move(ordered);
  return result;
}

}  // namespace floq
