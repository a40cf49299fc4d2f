#include "floq/commands.hpp"

#include <cmath>
#include <complex>
#include <filesystem>
#include <functional>
#include <iostream>
#include <random>

#include "floq/bloch.hpp"
#include "floq/errors.hpp"
#include "floq/evolve.hpp"
#include "floq/io_util.hpp"
#include "floq/mo_map.hpp"
#include "floq/propagator.hpp"
#include "floq/quadrature.hpp"
#include "floq/spectrum.hpp"
#include "floq/wavepacket.hpp"

namespace floq {

namespace {

constexpr double kPi = 3.14159265358979323846;

std::string join(const std::string& dir, const std::string& name) {
  return (std::filesystem::path(dir) / name).string();
}

JsonValue make_summary(const std::string& command, const RunConfig& cfg) {
  JsonValue s = JsonValue::object();
  s.set("command", JsonValue::str(command));
  s.set("inputs_digest", JsonValue::str(cfg.digest));
  return s;
}

void finish_summary(JsonValue& s, const WarningList& warnings, const std::string& out_dir,
                    const std::string& command) {
  JsonValue w = JsonValue::array();
  for (const auto& msg : warnings) w.push(JsonValue::str(msg));
  s.set("warnings", std::move(w));
  atomic_write_text(join(out_dir, command + "_summary.json"), s.dump());
}

LatticeWindow resolve_window(const RunConfig& cfg, const PeriodicPotential& V,
                             const WavePacket& psi0, double t_max) {
  LatticeWindow w;
  w.boundary = cfg.boundary;
  if (cfg.boundary == Boundary::dirichlet) {
    if (cfg.lattice_radius > 0) {
      w.radius = cfg.lattice_radius;
      return w;
    }
  } else if (cfg.ring_cells > 0) {
    w.cells = cfg.ring_cells;
    return w;
  }
  return auto_window(V, cfg.boundary, psi0, t_max);
}

JsonValue counts_json(const DispersiveConstants& dc) {
  JsonValue counts = JsonValue::object();
  counts.set("max_components", JsonValue::integer(dc.max_components));
  JsonValue k2 = JsonValue::array(), k3 = JsonValue::array();
  for (int c : dc.k2_counts) k2.push(JsonValue::integer(c));
  for (int c : dc.k3_counts) k3.push(JsonValue::integer(c));
  counts.set("k2", std::move(k2));
  counts.set("k3", std::move(k3));
  return counts;
}

int cmd_bands(const RunConfig& cfg, const std::string& out, int threads) {
  const PeriodicPotential V = cfg.make_potential();
  const SpectralPortrait sp = analyze(V);
  const BandField field = band_path(sp, cfg.effective_k_grid(), threads);

  std::vector<std::vector<std::string>> rows;
  for (int i = 0; i < field.points(); ++i)
    for (int j = 1; j <= V.period(); ++j)
      rows.push_back({format_double(field.grid[static_cast<std::size_t>(i)]),
                      std::to_string(j), format_double(field.energy(j - 1, i)),
                      format_double(field.d1(j - 1, i)), format_double(field.d2(j - 1, i)),
                      format_double(field.d3(j - 1, i))});
  write_csv(join(out, "bands.csv"), "k,j,E,E1,E2,E3", rows);

  JsonValue s = make_summary("bands", cfg);
  s.set("period", JsonValue::integer(V.period()));
  s.set("k_grid", JsonValue::integer(field.points()));
  s.set("max_group_velocity", JsonValue::num(field.max_group_velocity()));
  s.set("min_overlap", JsonValue::num(field.min_overlap));
  finish_summary(s, field.warnings, out, "bands");
  return 0;
}

int cmd_edges(const RunConfig& cfg, const std::string& out) {
  const SpectralPortrait sp = analyze(cfg.make_potential());
  std::vector<std::vector<std::string>> rows;
  for (std::size_t i = 0; i < sp.edges.size(); ++i)
    rows.push_back({std::to_string(i + 1), format_double(sp.edges[i]),
                    std::to_string(sp.edge_delta_sign[i])});
  write_csv(join(out, "edges.csv"), "index,lambda,delta_sign", rows);

  JsonValue s = make_summary("edges", cfg);
  s.set("period", JsonValue::integer(sp.period()));
  JsonValue edges = JsonValue::array(), gaps = JsonValue::array(), crit = JsonValue::array();
  for (double lam : sp.edges) edges.push(JsonValue::num(lam));
  for (bool g : sp.gap_open) gaps.push(JsonValue::boolean(g));
  for (double k : sp.critical) crit.push(JsonValue::num(k));
  s.set("edges", std::move(edges));
  s.set("gap_open", std::move(gaps));
  s.set("critical_points", std::move(crit));
  s.set("spectral_diameter", JsonValue::num(sp.spectral_diameter()));
  finish_summary(s, {}, out, "edges");
  return 0;
}

int cmd_mo(const RunConfig& cfg, const std::string& out) {
  const SpectralPortrait sp = analyze(cfg.make_potential());
  int samples = 65;
  if (auto it = cfg.tolerances.find("mo_samples"); it != cfg.tolerances.end())
    samples = std::max(3, static_cast<int>(it->second));
  const MOBoundaryData mo = sample_mo_boundary(sp, samples);

  std::vector<std::vector<std::string>> rows;
  for (std::size_t b = 0; b < mo.x.size(); ++b)
    for (std::size_t i = 0; i < mo.x[b].size(); ++i)
      rows.push_back({std::to_string(b + 1), format_double(mo.x[b][i]),
                      format_double(mo.th[b][i]), format_double(mo.th1[b][i]),
                      format_double(mo.th2[b][i]), format_double(mo.th3[b][i])});
  write_csv(join(out, "mo.csv"), "band,x,theta,theta1,theta2,theta3", rows);

  JsonValue s = make_summary("mo", cfg);
  JsonValue infl = JsonValue::array();
  for (double x : mo.inflection) infl.push(JsonValue::num(x));
  s.set("inflection_points", std::move(infl));
  s.set("samples_per_band", JsonValue::integer(samples));
  finish_summary(s, {}, out, "mo");
  return 0;
}

int cmd_delta(const RunConfig& cfg, const std::string& out, int threads) {
  const SpectralPortrait sp = analyze(cfg.make_potential());
  const StableField st = stable_band_field(sp, cfg.effective_k_grid(), threads);
  JsonValue s = make_summary("delta", cfg);
  s.set("delta", JsonValue::num(st.delta));
  s.set("sobolev_max", JsonValue::num(st.sobolev_max));
  s.set("k_grid", JsonValue::integer(st.field.points()));
  finish_summary(s, st.field.warnings, out, "delta");
  return 0;
}

int cmd_partition(const RunConfig& cfg, const std::string& out, int threads) {
  const SpectralPortrait sp = analyze(cfg.make_potential());
  const StableField st = stable_band_field(sp, cfg.effective_k_grid(), threads);
  const StationaryPartition part = stationary_partition(sp, st.field, st.delta);

  std::vector<std::vector<std::string>> rows;
  for (std::size_t j = 0; j < part.per_band.size(); ++j)
    for (const auto& iv : part.per_band[j])
      rows.push_back({std::to_string(j + 1), iv.order == 2 ? "K2" : "K3",
                      format_double(iv.lo), format_double(iv.hi)});
  write_csv(join(out, "partition.csv"), "band,set,k_left,k_right", rows);

  JsonValue s = make_summary("partition", cfg);
  s.set("delta", JsonValue::num(st.delta));
  JsonValue k2 = JsonValue::array(), k3 = JsonValue::array();
  for (int j = 1; j <= sp.period(); ++j) {
    k2.push(JsonValue::integer(part.count(j, 2)));
    k3.push(JsonValue::integer(part.count(j, 3)));
  }
  s.set("k2_counts", std::move(k2));
  s.set("k3_counts", std::move(k3));
  s.set("max_components", JsonValue::integer(part.max_components()));
  finish_summary(s, st.field.warnings, out, "partition");
  return 0;
}

JsonValue constant_json(const DispersiveConstants& dc) {
  JsonValue c = JsonValue::object();
  c.set("delta", JsonValue::num(dc.delta));
  c.set("C_V", JsonValue::num(dc.c_v));
  c.set("M_V", JsonValue::num(dc.m_v));
  c.set("counts", counts_json(dc));
  c.set("sobolev_max", JsonValue::num(dc.sobolev_max));
  JsonValue cvj = JsonValue::array();
  for (double v : dc.c_vj) cvj.push(JsonValue::num(v));
  c.set("C_Vj", std::move(cvj));
  c.set("delta_clamped", JsonValue::num(dc.delta_clamped));
  c.set("flagged", JsonValue::boolean(dc.flagged));
  return c;
}

int cmd_constant(const RunConfig& cfg, const std::string& out, int threads) {
  const DispersiveConstants dc = dispersive_constants(cfg.make_potential(), threads);
  atomic_write_text(join(out, "constant.json"), constant_json(dc).dump());
  JsonValue s = make_summary("constant", cfg);
  s.set("delta", JsonValue::num(dc.delta));
  s.set("C_V", JsonValue::num(dc.c_v));
  s.set("M_V", JsonValue::num(dc.m_v));
  s.set("sobolev_max", JsonValue::num(dc.sobolev_max));
  s.set("max_components", JsonValue::integer(dc.max_components));
  finish_summary(s, dc.flagged ? WarningList{"ContinuationWarning: constants flagged"} : WarningList{},
                 out, "constant");
  return 0;
}

int cmd_propagate(const RunConfig& cfg, const std::string& out, int threads) {
  const PeriodicPotential V = cfg.make_potential();
  const SpectralPortrait sp = analyze(V);
  const BandField field = band_path(sp, cfg.effective_k_grid(), threads);
  const WavePacket psi0 = cfg.make_initial();
  const std::vector<double> times = cfg.times.materialize();

  double t_max = 0.0;
  for (double t : times) t_max = std::max(t_max, std::abs(t));
  const double vmax = field.max_group_velocity();
  const std::int64_t reach =
      cfg.lattice_radius > 0
          ? cfg.lattice_radius
          : std::min<std::int64_t>(static_cast<std::int64_t>(std::ceil(vmax * t_max)) + 20, 60);

  std::vector<std::vector<std::string>> rows;
  for (double t : times) {
    for (std::int64_t n = psi0.offset() - reach; n < psi0.support_end() + reach; ++n) {
      const std::complex<double> a = propagator_entry(V, field, psi0, n, t);
      rows.push_back({format_double(t), std::to_string(n), format_double(a.real()),
                      format_double(a.imag()), format_double(std::abs(a))});
    }
  }
  write_csv(join(out, "propagate.csv"), "t,n,re,im,abs", rows);

  JsonValue s = make_summary("propagate", cfg);
  s.set("site_window", JsonValue::integer(reach));
  s.set("times", JsonValue::integer(static_cast<std::int64_t>(times.size())));
  finish_summary(s, field.warnings, out, "propagate");
  return 0;
}

void write_decay_csv(const std::string& path, const std::vector<double>& times,
                     const std::vector<double>& sups, double l1) {
  std::vector<std::vector<std::string>> rows;
  for (std::size_t i = 0; i < times.size(); ++i) {
    const double ratio = std::pow(bracket_t(times[i]), 1.0 / 3.0) * sups[i] / l1;
    rows.push_back({format_double(times[i]), format_double(sups[i]), format_double(ratio)});
  }
  write_csv(path, "t,sup_norm,ratio", rows);
}

int cmd_decay(const RunConfig& cfg, const std::string& out) {
  const PeriodicPotential V = cfg.make_potential();
  const WavePacket psi0 = cfg.make_initial();
  const std::vector<double> times = cfg.times.materialize();
  const LatticeWindow w = resolve_window(cfg, V, psi0, cfg.times.stop);
  const DecaySeries series = sup_norm_decay(V, psi0, times, w);
  write_decay_csv(join(out, "decay.csv"), series.times, series.sup_norms, psi0.l1());

  JsonValue s = make_summary("decay", cfg);
  s.set("alpha", JsonValue::num(series.alpha));
  s.set("alpha_stderr", JsonValue::num(series.alpha_stderr));
  s.set("ratio", JsonValue::num(series.ratio));
  s.set("window_sites", JsonValue::integer(w.site_count(V.period())));
  finish_summary(s, {}, out, "decay");
  return 0;
}

int cmd_dnls(const RunConfig& cfg, const std::string& out) {
  const PeriodicPotential V = cfg.make_potential();
  const WavePacket psi0 = cfg.make_initial();
  const std::vector<double> times = cfg.times.materialize();
  LatticeWindow w = resolve_window(cfg, V, psi0, cfg.times.stop);
  w.boundary = Boundary::ring;
  if (w.cells == 0) w = auto_window(V, Boundary::ring, psi0, cfg.times.stop);

  double dt = dnls_max_step(V, psi0, cfg.sigma);
  if (auto it = cfg.tolerances.find("dnls_dt"); it != cfg.tolerances.end())
    dt = std::min(dt, it->second);
  const DnlsResult res =
      dnls_evolve(V, psi0, cfg.sigma, cfg.nonlinearity_sign, dt, times, w);

  std::vector<std::vector<std::string>> rows;
  double ratio_max = 0.0, l2_drift = 0.0;
  for (std::size_t i = 0; i < times.size(); ++i) {
    const WavePacket& st = res.states[i];
    rows.push_back(
        {format_double(times[i]), format_double(st.linf()), format_double(st.l2())});
    ratio_max = std::max(ratio_max, std::pow(bracket_t(times[i]), 1.0 / 3.0) * st.linf());
    l2_drift = std::max(l2_drift, std::abs(st.l2() - psi0.l2()));
  }
  write_csv(join(out, "dnls.csv"), "t,sup_norm,l2_norm", rows);

  JsonValue s = make_summary("dnls", cfg);
  s.set("sigma", JsonValue::num(cfg.sigma));
  s.set("sign", JsonValue::integer(cfg.nonlinearity_sign));
  s.set("dt", JsonValue::num(dt));
  s.set("ratio_max", JsonValue::num(ratio_max));
  s.set("l2_drift", JsonValue::num(l2_drift));
  s.set("max_local_error", JsonValue::num(res.max_local_error));
  finish_summary(s, {}, out, "dnls");
  return 0;
}

int cmd_vdc_check(const RunConfig& cfg, const std::string& out, int threads) {
  std::vector<std::vector<std::string>> rows;
  bool all_pass = true;
  const auto one = [&](const std::string& label, int band, const VdcCheck& c, int kappa,
                       double lambda, double a, double b) {
    all_pass = all_pass && c.pass;
    rows.push_back({label, std::to_string(band), std::to_string(kappa), format_double(lambda),
                    format_double(a), format_double(b), format_double(c.lhs),
                    format_double(c.rhs), c.pass ? "1" : "0"});
  };

  // Closed-form phases from the lemma's hypotheses.
  const auto cube = [](double x) { return x * x * x; };
  const auto unit = [](double) { return std::complex<double>(1.0, 0.0); };
  one("cubic", 0, vdc_bound_check(cube, 3, 6.0, unit, 0.0, 1000.0, 0.0, 1.0), 3, 1000.0, 0.0,
      1.0);
  const auto parab = [](double x) { return 0.5 * x * x; };
  one("quadratic", 0, vdc_bound_check(parab, 2, 1.0, unit, 0.0, 100.0, -1.0, 1.0), 2, 100.0,
      -1.0, 1.0);

  // Every piece of the K2/K3 partition with the actual band phases.
  const PeriodicPotential V = cfg.make_potential();
  const SpectralPortrait sp = analyze(V);
  const StableField st = stable_band_field(sp, cfg.effective_k_grid(), threads);
  const StationaryPartition part = stationary_partition(sp, st.field, st.delta);
  const double half_delta = 0.5 * st.delta;

  for (int j = 1; j <= sp.period(); ++j) {
    const auto phase = [&](double k) { return band_energies(V, k)[j - 1]; };
    const auto amp = [&](double k) {
      const EigenSystem es = band_decomposition(V, k);
      return es.vectors(0, j - 1) * std::conj(es.vectors(0, j - 1));
    };
    for (const auto& iv : part.per_band[static_cast<std::size_t>(j - 1)]) {
      for (double lambda : {1e2, 1e3, 1e4}) {
        const VdcCheck c =
            vdc_bound_check(phase, iv.order, half_delta, amp, 0.0, lambda, iv.lo, iv.hi);
        one(iv.order == 2 ? "band-K2" : "band-K3", j, c, iv.order, lambda, iv.lo, iv.hi);
      }
    }
  }
  write_csv(join(out, "vdc.csv"), "case,band,kappa,lambda,k_left,k_right,lhs,rhs,pass", rows);

  JsonValue s = make_summary("vdc-check", cfg);
  s.set("checks", JsonValue::integer(static_cast<std::int64_t>(rows.size())));
  s.set("all_pass", JsonValue::boolean(all_pass));
  s.set("C_2", JsonValue::integer(van_der_corput_constant(2)));
  s.set("C_3", JsonValue::integer(van_der_corput_constant(3)));
  finish_summary(s, {}, out, "vdc-check");
  if (!all_pass) raise(errc::quadrature_failure, "a van der Corput bound check failed");
  return 0;
}

int cmd_selftest(const RunConfig& cfg, const std::string& out, int threads) {
  const PeriodicPotential V = cfg.make_potential();
  const int p = V.period();
  const SpectralPortrait sp = analyze(V);
  std::mt19937_64 rng(cfg.seed);
  std::uniform_real_distribution<double> u10(-10.0, 10.0), u01(0.0, 1.0);

  JsonValue s = make_summary("selftest", cfg);
  WarningList warnings;
  double worst;

  // det Phi = 1 and Delta = tr Phi at random complex z; defects measured
  // relative to the cancelling products (entries grow like |z|^p).
  worst = 0.0;
  for (int i = 0; i < 100; ++i) {
    const cdouble z(u10(rng), u10(rng));
    const Matrix2 m = monodromy(V, z);
    const double det_scale = std::abs(m.a) * std::abs(m.d) + std::abs(m.b) * std::abs(m.c) + 1.0;
    worst = std::max(worst, std::abs(m.det() - 1.0) / det_scale);
    const cdouble tr = m.trace();
    worst = std::max(worst, std::abs(sp.delta.eval(z) - tr) / std::max(1.0, std::abs(tr)));
  }
  s.set("monodromy_defect", JsonValue::num(worst));
  if (worst > 1e-12) raise(errc::quadrature_failure, "monodromy identity defect above 1e-12");

  // Product formulas (2p edges, p-1 critical points).
  worst = 0.0;
  for (int i = 0; i < 20; ++i) {
    const cdouble z(u10(rng), i % 2 == 0 ? 0.0 : u10(rng));
    cdouble lhs = sp.delta.eval(z);
    lhs = lhs * lhs - 4.0;
    cdouble rhs = 1.0;
    for (double lam : sp.edges) rhs *= z - lam;
    worst = std::max(worst, std::abs(lhs - rhs) / std::max(1.0, std::abs(rhs)));
    cdouble dl = sp.delta1.eval(z);
    cdouble dr = static_cast<double>(p);
    for (double kap : sp.critical) dr *= z - kap;
    worst = std::max(worst, std::abs(dl - dr) / std::max(1.0, std::abs(dr)));
  }
  s.set("product_formula_defect", JsonValue::num(worst));
  if (worst > 1e-9) raise(errc::quadrature_failure, "product formula defect above 1e-9");

  // det(zI - H(k)) = Delta - 2cos(pk).
  worst = 0.0;
  for (int i = 0; i < 100; ++i) {
    const cdouble z(u10(rng), u10(rng));
    const double k = u01(rng) * kPi / p;
    const Eigen::MatrixXcd h = bloch_hamiltonian(V, k);
    const Eigen::MatrixXcd a = z * Eigen::MatrixXcd::Identity(p, p) - h;
    const cdouble det = a.determinant();
    const cdouble expect = sp.delta.eval(z) - 2.0 * std::cos(p * k);
    worst = std::max(worst, std::abs(det - expect) / std::max(1.0, std::abs(expect)));
  }
  s.set("fiber_determinant_defect", JsonValue::num(worst));
  if (worst > 1e-9) raise(errc::quadrature_failure, "fiber determinant defect above 1e-9");

  // Theta(E(k)) = k and the defining relation.
  worst = 0.0;
  for (int i = 0; i < 10; ++i) {
    const double k = -kPi + (i + 0.5) / 10.0 * kPi;
    const double e = global_band_function(sp, k);
    if (band_energies(V, 0.0).size() == 0) break;
    const double th = theta(sp, e);
    worst = std::max(worst, std::abs(th - k));
  }
  s.set("theta_inverse_defect", JsonValue::num(worst));
  if (worst > 1e-6) raise(errc::quadrature_failure, "Theta(E(k)) = k defect above 1e-6");

  // Im Theta = Lyapunov exponent off the spectrum.
  worst = 0.0;
  for (int i = 0; i < 3; ++i) {
    const cdouble z(sp.edges.front() + u01(rng) * sp.spectral_diameter(), 0.1);
    worst = std::max(worst, std::abs(theta_upper(sp, z).imag() - lyapunov(V, z)));
  }
  s.set("lyapunov_defect", JsonValue::num(worst));
  if (worst > 1e-4) raise(errc::quadrature_failure, "Im Theta vs Lyapunov defect above 1e-4");

  // Short unitary evolution + time reversal on a small ring.
  {
    const WavePacket psi0 = cfg.make_initial();
    const LatticeWindow w = auto_window(V, Boundary::ring, psi0, 5.0);
    const auto states = linear_evolve(V, psi0, {5.0}, w);
    const double drift = std::abs(states[0].l2() - psi0.l2());
    const RingPropagator prop(V, w.cells);
    const WavePacket back = prop.evolve(states[0], -5.0);
    double rev = 0.0;
    for (std::int64_t n = psi0.offset(); n < psi0.support_end(); ++n)
      rev = std::max(rev, std::abs(back.at(n) - psi0.at(n)));
    s.set("l2_drift", JsonValue::num(drift));
    s.set("time_reversal_defect", JsonValue::num(rev));
    if (drift > 1e-10 || rev > 1e-9)
      raise(errc::quadrature_failure, "evolution unitarity/time-reversal defect");

    write_decay_csv(join(out, "decay.csv"), {5.0}, {states[0].linf()}, psi0.l1());
  }

  // Artifact suite for byte-stability checks.
  cmd_edges(cfg, out);
  cmd_bands(cfg, out, threads);
  cmd_mo(cfg, out);
  cmd_partition(cfg, out, threads);
  const DispersiveConstants dc = dispersive_constants(V, threads);
  atomic_write_text(join(out, "constant.json"), constant_json(dc).dump());
  s.set("delta", JsonValue::num(dc.delta));
  s.set("M_V", JsonValue::num(dc.m_v));

  finish_summary(s, warnings, out, "selftest");
  return 0;
}

}  // namespace

int run_command(const std::string& name, const RunConfig& cfg, const std::string& out_dir,
                int threads) {
  try {
    std::filesystem::create_directories(out_dir);
    if (name == "bands") return cmd_bands(cfg, out_dir, threads);
    if (name == "edges") return cmd_edges(cfg, out_dir);
    if (name == "mo") return cmd_mo(cfg, out_dir);
    if (name == "delta") return cmd_delta(cfg, out_dir, threads);
    if (name == "partition") return cmd_partition(cfg, out_dir, threads);
    if (name == "constant") return cmd_constant(cfg, out_dir, threads);
    if (name == "propagate") return cmd_propagate(cfg, out_dir, threads);
    if (name == "decay") return cmd_decay(cfg, out_dir);
    if (name == "dnls") return cmd_dnls(cfg, out_dir);
    if (name == "vdc-check") return cmd_vdc_check(cfg, out_dir, threads);
    if (name == "selftest") return cmd_selftest(cfg, out_dir, threads);
    raise(errc::config_error, "unknown command " + name);
  } catch (const Error& e) {
    std::cerr << e.what() << "\n";
    return e.code() == errc::config_error ? 2 : 3;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  }
}

}  // namespace floq
