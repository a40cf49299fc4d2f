#include <doctest.h>

#include <cmath>
#include <random>

#include "floq/bloch.hpp"

using floq::PeriodicPotential;

namespace {

constexpr double kPi = 3.14159265358979323846;

PeriodicPotential random_potential(std::mt19937_64& rng, int p, double amp = 2.0) {
  std::uniform_real_distribution<double> u(-amp, amp);
  std::vector<double> v(static_cast<std::size_t>(p));
  for (auto& x : v) x = u(rng);
  return PeriodicPotential(v);
}

}  // namespace

TEST_CASE("fiber Hamiltonian: explicit small-period forms") {
  const Eigen::MatrixXcd h2 = floq::bloch_hamiltonian(PeriodicPotential({1.0, 0.0}), 0.0);
  CHECK(h2(0, 0).real() == 1.0);
  CHECK(h2(0, 1).real() == doctest::Approx(2.0));
  CHECK(h2(1, 0).real() == doctest::Approx(2.0));
  CHECK(h2(1, 1).real() == 0.0);

  for (double k : {0.0, 0.4, 1.1}) {
    const Eigen::MatrixXcd h1 = floq::bloch_hamiltonian(PeriodicPotential({0.0}), k);
    CHECK(h1(0, 0).real() == doctest::Approx(2.0 * std::cos(k)).epsilon(1e-15));
  }

  std::mt19937_64 rng(3);
  const PeriodicPotential V = random_potential(rng, 5);
  const Eigen::MatrixXcd h = floq::bloch_hamiltonian(V, 0.3);
  CHECK((h - h.adjoint()).norm() < 1e-14);
  CHECK(std::abs(h(0, 4) - std::polar(1.0, -5 * 0.3)) < 1e-14);
  CHECK(std::abs(h(4, 0) - std::polar(1.0, +5 * 0.3)) < 1e-14);
  CHECK(h(1, 2) == floq::cdouble(1.0));
}

TEST_CASE("band decomposition: residuals, trace, and the p=2 closed form") {
  std::mt19937_64 rng(5);
  for (int trial = 0; trial < 5; ++trial) {
    const int p = 2 + trial % 3;
    const PeriodicPotential V = random_potential(rng, p);
    const double k = 0.7 * trial;
    const floq::EigenSystem es = floq::band_decomposition(V, k);
    const Eigen::MatrixXcd h = floq::bloch_hamiltonian(V, k);
    CHECK((h * es.vectors - es.vectors * es.energies.asDiagonal()).norm() <= 1e-10);
    double tr = 0.0;
    for (double v : V.values()) tr += v;
    CHECK(es.energies.sum() == doctest::Approx(tr).epsilon(1e-12));
  }

  // V = (0,0) folded at p=2: eigenvalues are -+|1 + e^{2ik}| = -+2|cos k|.
  const PeriodicPotential zero2({0.0, 0.0});
  for (double k : {0.2, 0.7, 1.3}) {
    const floq::EigenSystem es = floq::band_decomposition(zero2, k);
    CHECK(es.energies[0] == doctest::Approx(-2.0 * std::abs(std::cos(k))).epsilon(1e-12));
    CHECK(es.energies[1] == doctest::Approx(+2.0 * std::abs(std::cos(k))).epsilon(1e-12));
  }

  // Eigenvalues of the k=0 fiber are the roots of Delta - 2.
  const floq::EigenSystem es0 = floq::band_decomposition(PeriodicPotential({1.0, 0.0}), 0.0);
  CHECK(es0.energies[0] == doctest::Approx(-1.5615528128088303).epsilon(1e-12));
  CHECK(es0.energies[1] == doctest::Approx(2.5615528128088303).epsilon(1e-12));
}

TEST_CASE("band path: completeness, parity monotonicity, continuation overlap") {
  const floq::SpectralPortrait sp = floq::analyze(PeriodicPotential({1.0, 0.0}));
  const floq::BandField f = floq::band_path(sp, 64);

  for (int i : {0, 17, 63}) {
    const Eigen::MatrixXcd sum =
        f.vectors[static_cast<std::size_t>(i)] * f.vectors[static_cast<std::size_t>(i)].adjoint();
    CHECK((sum - Eigen::MatrixXcd::Identity(2, 2)).norm() <= 1e-10);
  }

  // p - j parity: E_1 nondecreasing, E_2 nonincreasing on [0, pi/2].
  for (int i = 1; i < f.points(); ++i) {
    CHECK(f.energy(0, i) >= f.energy(0, i - 1) - 1e-12);
    CHECK(f.energy(1, i) <= f.energy(1, i - 1) + 1e-12);
  }

  std::mt19937_64 rng(23);
  const floq::SpectralPortrait sp3 = floq::analyze(random_potential(rng, 3));
  const floq::BandField f3 = floq::band_path(sp3, 512);
  CHECK(f3.min_overlap >= 0.99);
  CHECK(f3.warnings.empty());
}

TEST_CASE("band derivatives: free closed form") {
  const floq::SpectralPortrait sp = floq::analyze(PeriodicPotential({0.0}));
  const double k = kPi / 3.0;
  const floq::BandDerivs d = floq::band_derivatives(sp, 1, k);
  // E(k) = 2cos k.
  CHECK(d.d1 == doctest::Approx(-std::sqrt(3.0)).epsilon(1e-12));
  CHECK(d.d2 == doctest::Approx(-1.0).epsilon(1e-12));
  CHECK(d.d3 == doctest::Approx(std::sqrt(3.0)).epsilon(1e-12));
}

TEST_CASE("band-edge curvature matches the finite-difference oracle") {
  // V = (1,0), band 1 at k = pi/2: E_1 = 0, Delta'(0) = -1, so E'' = -8.
  const PeriodicPotential V({1.0, 0.0});
  const floq::SpectralPortrait sp = floq::analyze(V);
  const floq::BandDerivs d = floq::band_derivatives(sp, 1, kPi / 2.0);
  CHECK(d.d1 == doctest::Approx(0.0).epsilon(1e-10));
  CHECK(d.d2 == doctest::Approx(-8.0).epsilon(1e-12));

  // Symmetric-stencil oracle with Richardson: E(k* - h) one-sided data and
  // evenness of the band function about the endpoint.
  const auto e1 = [&](double k) { return floq::band_energies(V, k)[0]; };
  const double k0 = kPi / 2.0;
  const auto fd2 = [&](double h) { return 2.0 * (e1(k0 - h) - e1(k0)) / (h * h); };
  const double rich = (4.0 * fd2(2.5e-3) - fd2(5e-3)) / 3.0;
  CHECK(d.d2 == doctest::Approx(rich).epsilon(1e-6));
}

TEST_CASE("implicit derivatives agree with finite differences in the interior") {
  std::mt19937_64 rng(29);
  const PeriodicPotential V = random_potential(rng, 3);
  const floq::SpectralPortrait sp = floq::analyze(V);
  for (double frac : {0.21, 0.43, 0.77}) {
    const double k = frac * kPi / 3.0;
    for (int j = 1; j <= 3; ++j) {
      const floq::BandDerivs a = floq::band_derivatives(sp, j, k);
      const floq::BandDerivs b = floq::band_derivatives_fd(V, j, k);
      CHECK(a.d1 == doctest::Approx(b.d1).epsilon(1e-6));
      CHECK(a.d2 == doctest::Approx(b.d2).epsilon(1e-6));
      CHECK(a.d3 == doctest::Approx(b.d3).epsilon(2e-4));
    }
  }
}

TEST_CASE("delta(V): free value, positivity, shift invariance") {
  const floq::SpectralPortrait sp = floq::analyze(PeriodicPotential({0.0}));
  const floq::BandField f = floq::band_path(sp, 1024);
  CHECK(floq::delta_V(sp, f) == doctest::Approx(2.0).epsilon(1e-9));

  std::mt19937_64 rng(31);
  for (int p : {2, 3, 4}) {
    const PeriodicPotential V = random_potential(rng, p);
    const floq::SpectralPortrait spp = floq::analyze(V);
    const floq::BandField fp = floq::band_path(spp, std::max(1024, 16 * p));
    const double d = floq::delta_V(spp, fp);
    CHECK(d > 0.0);

    const PeriodicPotential W = V.shifted(1);
    const floq::SpectralPortrait spw = floq::analyze(W);
    const floq::BandField fw = floq::band_path(spw, std::max(1024, 16 * p));
    CHECK(floq::delta_V(spw, fw) == doctest::Approx(d).epsilon(1e-9));
  }
}

TEST_CASE("eigenvector Sobolev norm: free case, convergence, gauge phase") {
  const floq::SpectralPortrait sp1 = floq::analyze(PeriodicPotential({0.0}));
  const floq::BandField f1 = floq::band_path(sp1, 64);
  CHECK(floq::eigvec_sobolev_norm(f1, 1) == 0.0);

  std::mt19937_64 rng(37);
  const floq::SpectralPortrait sp = floq::analyze(random_potential(rng, 3));
  const floq::BandField coarse = floq::band_path(sp, 1024);
  const floq::BandField fine = floq::band_path(sp, 2048);
  for (int j = 1; j <= 3; ++j) {
    const double a = floq::eigvec_sobolev_norm(coarse, j);
    const double b = floq::eigvec_sobolev_norm(fine, j);
    CHECK(std::isfinite(a));
    CHECK(std::abs(a - b) <= 0.01 * std::max(1.0, std::abs(b)));
  }

  // A constant phase on every frame leaves the norm unchanged.
  floq::BandField rotated = coarse;
  const floq::cdouble phase = std::polar(1.0, 0.83);
  for (auto& m : rotated.vectors) m *= phase;
  for (int j = 1; j <= 3; ++j)
    CHECK(floq::eigvec_sobolev_norm(rotated, j) ==
          doctest::Approx(floq::eigvec_sobolev_norm(coarse, j)).epsilon(1e-12));
}

TEST_CASE("stable field doubles the grid until delta and Sobolev settle") {
  std::mt19937_64 rng(41);
  const floq::SpectralPortrait sp = floq::analyze(random_potential(rng, 2));
  const floq::StableField st = floq::stable_band_field(sp, 1024);
  CHECK(st.delta > 0.0);
  CHECK(st.field.points() >= 1024);
  CHECK(std::isfinite(st.sobolev_max));
}
