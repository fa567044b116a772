#pragma once

// Subcommands of the ldcs driver.  Each takes the merged configuration,
// writes its CSV (+ manifest) and returns a process exit code.

#include <atomic>
#include <cmath>
#include <exception>
#include <functional>
#include <iostream>
#include <mutex>
#include <numbers>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include <json.hpp>

#include "../entanglement.hpp"
#include "../gauge.hpp"
#include "../observables.hpp"
#include "config.hpp"
#include "output.hpp"

namespace ldcs::cli {

enum ExitCode : int { kOk = 0, kFailure = 1, kInvalidConfig = 2, kNotConverged = 3, kGaugeFailure = 4 };

// Safe kinematic window; leaving it needs --force.
inline constexpr double kSafeXi = 1.0;
inline constexpr double kSafeOmegaB = 1.0;    // MeV
inline constexpr double kSafeThetaB = 2e-3;   // rad

struct RunParams {
  std::string subcommand;
  LaserConfig laser;
  ElectronConfig electron;
  double omega_b = 1.0;
  PhotonDirection dir_b{1e-3, 0.0}, dir_c{0.5e-3, std::numbers::pi};
  std::string eps_b = "1", eps_c = "1";  // 1, 2 or sum
  std::string regularization = "pulse";
  double tau = 0.0;  // MeV^-1, 0 -> 1e4 / omega
  RateOptions rate;

  // spectrum
  double omega_b_min = 0.01, omega_b_max = 1.0, omega_b_step = 0.01;
  bool per_n = false;

  // angmap, concurrence
  std::string plane = "psi-psi";
  double a1_min = 0.0, a1_max = 0.0, a2_min = 0.0, a2_max = 0.0;
  int a1_points = 41, a2_points = 41;

  // integrate
  std::vector<double> xi_list{0.3, 0.5, 0.7, 1.0};
  QuadratureSpec quad;
  IntegrationBounds bounds;
  bool coarse = false;
  double quad_rel_tol = 0.05;

  // gaugecheck
  GaugeCheckOptions gauge;
  double gauge_tol = 1e-8;

  std::string theory = "both";
  int threads = 1;
  bool deterministic = false;
  bool force = false;
  std::string out;

  bool want_nonpert() const { return theory != "pdcs"; }
  bool want_pdcs() const { return theory != "nonpert"; }

  Regularization regularization_for(const LaserConfig& l) const {
    if (regularization == "none") return Regularization::none();
    if (regularization == "imag-mass") return Regularization::imaginary_mass();
    return tau > 0.0 ? Regularization{RegularizationKind::PulseFactor, tau} : Regularization::pulse_default(l);
  }
};

inline LaserPolarization parse_laser_pol(const std::string& s) {
  if (s == "linear") return LaserPolarization::Linear;
  if (s == "circular") return LaserPolarization::Circular;
  throw ConfigError("laser_pol must be linear or circular, got " + s);
}

inline std::string to_string(LaserPolarization p) { return p == LaserPolarization::Linear ? "linear" : "circular"; }

/// Reads every key the subcommand understands, fills defaults back into
/// `cfg` so the manifest carries the full resolved set, and validates.
inline RunParams resolve(const std::string& sub, ConfigMap& cfg) {
  RunParams p;
  p.subcommand = sub;
  const double pi = std::numbers::pi;
  p.laser.xi = cfg.get_double("xi", 1.0);
  p.laser.omega_ev = cfg.get_double("omega_ev", 2.5);
  p.laser.polarization = parse_laser_pol(cfg.get_string("laser_pol", "linear"));
  p.electron.energy = cfg.get_double("energy_mev", 1000.0 * units::electron_mass);
  p.omega_b = cfg.get_double("omega_b", 1.0);
  p.dir_b = {cfg.get_double("theta_b", 1e-3), cfg.get_double("psi_b", 0.0)};
  p.dir_c = {cfg.get_double("theta_c", 0.5e-3), cfg.get_double("psi_c", pi)};
  p.eps_b = cfg.get_string("eps_b", "1");
  p.eps_c = cfg.get_string("eps_c", "1");
  // integrate stays inside the safe window, where the pulse factor would only
  // damp the soft-photon region that the perturbative rate keeps
  p.regularization = cfg.get_string("regularization", sub == "integrate" ? "none" : "pulse");
  p.tau = cfg.get_double("tau", 0.0);
  p.rate.n_max = cfg.get_int("n_max", 60);
  p.rate.tail_tol = cfg.get_double("tail_tol", 1e-8);
  p.rate.n_limit = cfg.get_int("n_limit", 400);
  p.theory = cfg.get_string("theory", "both");
  p.threads = cfg.get_int("threads", 1);
  p.deterministic = cfg.get_bool("deterministic", false);
  p.force = cfg.get_bool("force", false);
  p.out = cfg.get_string("out", sub + ".csv");

  p.omega_b_min = cfg.get_double("omega_b_min", 0.01);
  p.omega_b_max = cfg.get_double("omega_b_max", 1.0);
  p.omega_b_step = cfg.get_double("omega_b_step", 0.01);
  p.per_n = cfg.get_bool("per_n", false);

  p.plane = cfg.get_string("plane", "psi-psi");
  const bool psi = p.plane == "psi-psi";
  p.a1_min = cfg.get_double("a1_min", 0.0);
  p.a1_max = cfg.get_double("a1_max", psi ? 2.0 * pi : kSafeThetaB);
  p.a2_min = cfg.get_double("a2_min", 0.0);
  p.a2_max = cfg.get_double("a2_max", psi ? 2.0 * pi : 2.5e-3);
  p.a1_points = cfg.get_int("a1_points", 41);
  p.a2_points = cfg.get_int("a2_points", 41);

  p.xi_list = cfg.get_list("xi_list", {0.3, 0.5, 0.7, 1.0});
  p.quad.psi_b = cfg.get_int("quad_psi_b", 16);
  p.quad.psi_c = cfg.get_int("quad_psi_c", 16);
  p.quad.theta_b = cfg.get_int("quad_theta_b", 12);
  p.quad.theta_c = cfg.get_int("quad_theta_c", 12);
  p.quad.omega_b = cfg.get_int("quad_omega_b", 20);
  p.coarse = cfg.get_bool("coarse", false);
  p.quad_rel_tol = cfg.get_double("quad_rel_tol", 0.05);
  p.bounds.theta_b_max = cfg.get_double("theta_b_max", 1.5e-3);
  p.bounds.theta_c_max = cfg.get_double("theta_c_max", 2.5e-3);
  p.bounds.omega_b_min = cfg.get_double("int_omega_b_min", 1e-3);
  p.bounds.omega_b_max = cfg.get_double("int_omega_b_max", 1.0);

  p.gauge.configs = cfg.get_int("gauge_configs", 100);
  p.gauge.seed = static_cast<std::uint64_t>(cfg.get_int("seed", 20240611));
  p.gauge.lambdas = cfg.get_list("gauge_lambdas", {1.0, 10.0, -3.0});
  p.gauge_tol = cfg.get_double("gauge_tol", 1e-8);

  // Echo the resolved values.
  const auto put = [&](const std::string& k, double v) { if (!cfg.has(k)) cfg.set(k, format_double(v)); };
  const auto put_s = [&](const std::string& k, const std::string& v) { if (!cfg.has(k)) cfg.set(k, v); };
  put("xi", p.laser.xi);
  put("omega_ev", p.laser.omega_ev);
  put_s("laser_pol", to_string(p.laser.polarization));
  put("energy_mev", p.electron.energy);
  put_s("regularization", p.regularization);
  put("tau", p.regularization_for(p.laser).tau);
  put_s("n_max", std::to_string(p.rate.n_max));
  put("tail_tol", p.rate.tail_tol);
  put_s("theory", p.theory);
  put_s("threads", std::to_string(p.threads));
  put_s("deterministic", p.deterministic ? "true" : "false");
  put_s("force", p.force ? "true" : "false");
  put_s("out", p.out);
  if (sub == "spectrum" || sub == "angmap" || sub == "norders" || sub == "concurrence") {
    put("theta_b", p.dir_b.theta);
    put("psi_b", p.dir_b.psi);
    put("theta_c", p.dir_c.theta);
    put("psi_c", p.dir_c.psi);
    put_s("eps_b", p.eps_b);
    put_s("eps_c", p.eps_c);
  }
  if (sub == "spectrum") {
    put("omega_b_min", p.omega_b_min);
    put("omega_b_max", p.omega_b_max);
    put("omega_b_step", p.omega_b_step);
    put_s("per_n", p.per_n ? "true" : "false");
  } else {
    put("omega_b", p.omega_b);
  }
  if (sub == "angmap" || sub == "concurrence") {
    put_s("plane", p.plane);
    put("a1_min", p.a1_min);
    put("a1_max", p.a1_max);
    put("a2_min", p.a2_min);
    put("a2_max", p.a2_max);
    put_s("a1_points", std::to_string(p.a1_points));
    put_s("a2_points", std::to_string(p.a2_points));
  }
  if (sub == "integrate") {
    std::string xs;
    for (double x : p.xi_list) xs += (xs.empty() ? "" : ",") + format_double(x);
    put_s("xi_list", xs);
    put_s("coarse", p.coarse ? "true" : "false");
    put_s("quad_psi_b", std::to_string(p.quad.psi_b));
    put_s("quad_psi_c", std::to_string(p.quad.psi_c));
    put_s("quad_theta_b", std::to_string(p.quad.theta_b));
    put_s("quad_theta_c", std::to_string(p.quad.theta_c));
    put_s("quad_omega_b", std::to_string(p.quad.omega_b));
    put("theta_b_max", p.bounds.theta_b_max);
    put("theta_c_max", p.bounds.theta_c_max);
    put("int_omega_b_min", p.bounds.omega_b_min);
    put("int_omega_b_max", p.bounds.omega_b_max);
  }

  // Validation.
  const auto bad = cfg.unused();
  if (!bad.empty()) throw ConfigError("unknown key: " + bad.front());
  if (p.regularization != "pulse" && p.regularization != "imag-mass" && p.regularization != "none")
    throw ConfigError("regularization must be pulse, imag-mass or none");
  if (p.theory != "nonpert" && p.theory != "pdcs" && p.theory != "both")
    throw ConfigError("theory must be nonpert, pdcs or both");
  for (const auto& e : {p.eps_b, p.eps_c})
    if (e != "1" && e != "2" && e != "sum") throw ConfigError("eps_b/eps_c must be 1, 2 or sum");
  if (p.plane != "psi-psi" && p.plane != "theta-theta") throw ConfigError("plane must be psi-psi or theta-theta");
  if (p.threads < 1) throw ConfigError("threads must be >= 1");
  if (p.rate.n_max < 1 || p.rate.n_limit < p.rate.n_max) throw ConfigError("need 1 <= n_max <= n_limit");
  if (!(p.omega_b_step > 0.0)) throw ConfigError("omega_b_step must be positive");
  if (p.a1_points < 1 || p.a2_points < 1) throw ConfigError("grid needs at least one point per axis");
  if (p.tau < 0.0) throw ConfigError("tau must be positive");
  try {
    p.laser.validate();
    p.electron.momentum();
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }

  double xi_max = p.laser.xi, wb_max = p.omega_b, tb_max = p.dir_b.theta;
  if (sub == "spectrum") wb_max = p.omega_b_max;
  if ((sub == "angmap" || sub == "concurrence") && p.plane == "theta-theta") tb_max = std::max(p.a1_min, p.a1_max);
  if (sub == "integrate") {
    for (double x : p.xi_list) xi_max = std::max(xi_max, x);
    wb_max = p.bounds.omega_b_max;
    tb_max = p.bounds.theta_b_max;
    if (p.xi_list.empty()) throw ConfigError("xi_list is empty");
  }
  const bool outside = xi_max > kSafeXi || wb_max > kSafeOmegaB || tb_max > kSafeThetaB;
  if (sub != "gaugecheck" && outside) {
    if (p.regularization == "none")
      throw ConfigError("resonance region (xi > 1, omega_b > 1 MeV or theta_b > 2e-3) requires a regularization");
    if (!p.force) throw ConfigError("parameters leave the safe window (xi <= 1, omega_b <= 1 MeV, theta_b <= 2e-3); use --force");
  }
  return p;
}

// ---------------------------------------------------------------------------

/// Runs body(i) for i in [0, count) on up to `threads` threads; the first
/// exception is rethrown.
inline void parallel_for(std::size_t count, int threads, const std::function<void(std::size_t)>& body) {
  const std::size_t nt = std::min<std::size_t>(std::max(1, threads), std::max<std::size_t>(1, count));
  if (nt <= 1) {
    for (std::size_t i = 0; i < count; ++i) body(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr err;
  std::mutex mu;
  std::vector<std::thread> pool;
  for (std::size_t t = 0; t < nt; ++t)
    pool.emplace_back([&] {
      for (std::size_t i = next++; i < count; i = next++) {
        try {
          body(i);
        } catch (...) {
          std::lock_guard<std::mutex> lock(mu);
          if (!err) err = std::current_exception();
        }
      }
    });
  for (auto& th : pool) th.join();
  if (err) std::rethrow_exception(err);
}

inline std::vector<double> linspace(double a, double b, int n) {
  std::vector<double> v(n);
  for (int i = 0; i < n; ++i) v[i] = n == 1 ? a : a + (b - a) * i / (n - 1);
  return v;
}

/// Grid a, a + h, ... up to b (inclusive within round-off); empty when b < a.
inline std::vector<double> step_grid(double a, double b, double h) {
  std::vector<double> v;
  if (b < a) return v;
  const long n = static_cast<long>(std::floor((b - a) / h + 1e-9)) + 1;
  for (long i = 0; i < n; ++i) v.push_back(a + h * static_cast<double>(i));
  return v;
}

inline std::vector<CFourVector> pol_choices(const std::string& sel, const PhotonDirection& d) {
  const auto c = detail::cartesian_pair(d);
  if (sel == "1") return {c[0]};
  if (sel == "2") return {c[1]};
  return {c[0], c[1]};
}

/// Nonperturbative rate for the eps selection; "sum" on both photons uses
/// the summed evaluation, otherwise fixed pairs are added.
inline DifferentialRatePoint rate_for(RateQuery q, const std::string& eb, const std::string& ec, const RateOptions& opt) {
  if (eb == "sum" && ec == "sum") {
    q.pol = PolarizationSelection::sum();
    return differential_rate(q, opt);
  }
  DifferentialRatePoint total;
  bool first = true;
  for (const auto& b : pol_choices(eb, q.dir_b))
    for (const auto& c : pol_choices(ec, q.dir_c)) {
      q.pol = PolarizationSelection::fixed(b, c);
      const auto p = differential_rate(q, opt);
      if (first) {
        total = p;
        first = false;
        continue;
      }
      total.value += p.value;
      total.any_open = total.any_open || p.any_open;
      total.converged = total.converged && p.converged;
      total.s_max = std::max(total.s_max, p.s_max);
      total.ceiling_excess = std::max(total.ceiling_excess, p.ceiling_excess);
      total.n_used = std::max(total.n_used, p.n_used);
      total.tail = std::max(total.tail, p.tail);
      if (total.orders.size() < p.orders.size()) total.orders.resize(p.orders.size());
      for (std::size_t i = 0; i < p.orders.size(); ++i) {
        total.orders[i].n = p.orders[i].n;
        total.orders[i].value += p.orders[i].value;
      }
    }
  return total;
}

inline double pdcs_rate_for(RateQuery q, const std::string& eb, const std::string& ec) {
  if (eb == "sum" && ec == "sum") {
    q.pol = PolarizationSelection::sum();
    return differential_rate_pdcs(q);
  }
  double total = 0.0;
  for (const auto& b : pol_choices(eb, q.dir_b))
    for (const auto& c : pol_choices(ec, q.dir_c)) {
      q.pol = PolarizationSelection::fixed(b, c);
      total += differential_rate_pdcs(q);
    }
  return total;
}

inline RateQuery base_query(const RunParams& p, const LaserConfig& laser) {
  RateQuery q;
  q.laser = laser;
  q.electron = p.electron;
  q.omega_b = p.omega_b;
  q.dir_b = p.dir_b;
  q.dir_c = p.dir_c;
  q.reg = p.regularization_for(laser);
  return q;
}

/// Tracks the numbers that go into the manifest diagnostics.
struct Diagnostics {
  int n_used_max = 0;
  int s_cutoff_max = 0;
  double ceiling_excess_max = -INFINITY;
  long not_converged = 0;
  long rows = 0;

  void add(const DifferentialRatePoint& r) {
    n_used_max = std::max(n_used_max, r.n_used);
    s_cutoff_max = std::max(s_cutoff_max, r.s_max);
    ceiling_excess_max = std::max(ceiling_excess_max, r.ceiling_excess);
    if (!r.converged) ++not_converged;
  }

  nlohmann::json to_json() const {
    nlohmann::json j;
    j["rows"] = rows;
    j["n_max_used"] = n_used_max;
    j["s_cutoff_used"] = s_cutoff_max;
    j["kinematic_ceiling_max_excess_mev"] = std::isfinite(ceiling_excess_max) ? nlohmann::json(ceiling_excess_max)
                                                                              : nlohmann::json(nullptr);
    j["points_not_converged"] = not_converged;
    return j;
  }
};

// ---------------------------------------------------------------------------

inline int cmd_spectrum(const RunParams& p, ConfigMap& cfg, std::ostream& log) {
  const auto grid = step_grid(p.omega_b_min, p.omega_b_max, p.omega_b_step);
  std::vector<DifferentialRatePoint> np(grid.size());
  std::vector<double> pd(grid.size(), 0.0);
  parallel_for(grid.size(), p.threads, [&](std::size_t i) {
    RateQuery q = base_query(p, p.laser);
    q.omega_b = grid[i];
    if (p.want_nonpert()) np[i] = rate_for(q, p.eps_b, p.eps_c, p.rate);
    if (p.want_pdcs()) pd[i] = pdcs_rate_for(q, p.eps_b, p.eps_c);
  });
  Diagnostics dg;
  int n_cols = 0;
  for (const auto& r : np) {
    dg.add(r);
    n_cols = std::max(n_cols, static_cast<int>(r.orders.size()));
  }
  std::vector<std::string> header{"omega_b_MeV"};
  if (p.want_nonpert()) header.push_back("rate_s1_sr2_MeV1");
  if (p.want_pdcs()) header.push_back("rate_pdcs_s1_sr2_MeV1");
  if (p.per_n && p.want_nonpert())
    for (int n = 1; n <= n_cols; ++n) header.push_back("rate_n" + std::to_string(n));
  CsvWriter csv(p.out, header);
  for (std::size_t i = 0; i < grid.size(); ++i) {
    std::vector<double> row{grid[i]};
    if (p.want_nonpert()) row.push_back(np[i].value);
    if (p.want_pdcs()) row.push_back(pd[i]);
    if (p.per_n && p.want_nonpert())
      for (int n = 0; n < n_cols; ++n)
        row.push_back(n < static_cast<int>(np[i].orders.size()) ? np[i].orders[n].value : NAN);
    csv.row(row);
  }
  csv.flush();
  dg.rows = static_cast<long>(csv.data_rows());
  write_manifest(p.out, p.subcommand, cfg, dg.to_json(), p.deterministic);
  log << "spectrum: " << grid.size() << " points -> " << p.out << "\n";
  if (dg.not_converged) {
    log << "spectrum: " << dg.not_converged << " points did not reach the n-tail tolerance\n";
    return kNotConverged;
  }
  return kOk;
}

/// Sets the two scanned angles of a query.
inline void place_angles(RateQuery& q, const std::string& plane, double a1, double a2) {
  if (plane == "psi-psi") {
    q.dir_b.psi = a1;
    q.dir_c.psi = a2;
  } else {
    q.dir_b.theta = a1;
    q.dir_c.theta = a2;
  }
}

inline int cmd_angmap(const RunParams& p, ConfigMap& cfg, std::ostream& log) {
  const auto g1 = linspace(p.a1_min, p.a1_max, p.a1_points);
  const auto g2 = linspace(p.a2_min, p.a2_max, p.a2_points);
  const std::vector<std::pair<std::string, std::string>> pairs{{"1", "1"}, {"1", "2"}, {"sum", "sum"}};
  const std::vector<std::string> names{"e1e1", "e1e2", "sum"};
  std::vector<std::string> header{"angle1", "angle2"};
  if (p.want_nonpert())
    for (const auto& n : names) header.push_back("nonpert_" + n);
  if (p.want_pdcs())
    for (const auto& n : names) header.push_back("pdcs_" + n);
  CsvWriter csv(p.out, header);
  Diagnostics dg;
  // One row of the first angle at a time keeps memory bounded.
  for (double a1 : g1) {
    std::vector<std::vector<double>> rows(g2.size());
    std::vector<Diagnostics> local(g2.size());
    parallel_for(g2.size(), p.threads, [&](std::size_t j) {
      RateQuery q = base_query(p, p.laser);
      place_angles(q, p.plane, a1, g2[j]);
      std::vector<double> row{a1, g2[j]};
      if (p.want_nonpert())
        for (const auto& [eb, ec] : pairs) {
          const auto r = rate_for(q, eb, ec, p.rate);
          local[j].add(r);
          row.push_back(r.value);
        }
      if (p.want_pdcs())
        for (const auto& [eb, ec] : pairs) row.push_back(pdcs_rate_for(q, eb, ec));
      rows[j] = std::move(row);
    });
    for (std::size_t j = 0; j < g2.size(); ++j) {
      csv.row(rows[j]);
      dg.n_used_max = std::max(dg.n_used_max, local[j].n_used_max);
      dg.s_cutoff_max = std::max(dg.s_cutoff_max, local[j].s_cutoff_max);
      dg.ceiling_excess_max = std::max(dg.ceiling_excess_max, local[j].ceiling_excess_max);
      dg.not_converged += local[j].not_converged;
    }
    csv.flush();
  }
  dg.rows = static_cast<long>(csv.data_rows());
  write_manifest(p.out, p.subcommand, cfg, dg.to_json(), p.deterministic);
  log << "angmap: " << dg.rows << " points -> " << p.out << "\n";
  return dg.not_converged ? kNotConverged : kOk;
}

inline int cmd_norders(const RunParams& p, ConfigMap& cfg, std::ostream& log) {
  std::array<DifferentialRatePoint, 2> r;
  const std::array<LaserPolarization, 2> pols{LaserPolarization::Linear, LaserPolarization::Circular};
  parallel_for(2, p.threads, [&](std::size_t k) {
    LaserConfig l = p.laser;
    l.polarization = pols[k];
    r[k] = rate_for(base_query(p, l), p.eps_b, p.eps_c, p.rate);
  });
  Diagnostics dg;
  dg.add(r[0]);
  dg.add(r[1]);
  const std::size_t rows = std::max(r[0].orders.size(), r[1].orders.size());
  CsvWriter csv(p.out, {"n", "rate_linear", "rate_circular", "cumulative_linear", "cumulative_circular"});
  std::array<double, 2> cum{0.0, 0.0};
  for (std::size_t i = 0; i < rows; ++i) {
    std::array<double, 2> v{NAN, NAN};
    for (int k = 0; k < 2; ++k)
      if (i < r[k].orders.size()) {
        v[k] = r[k].orders[i].value;
        cum[k] += v[k];
      }
    csv.row({static_cast<double>(i + 1), v[0], v[1], cum[0], cum[1]});
  }
  csv.flush();
  dg.rows = static_cast<long>(csv.data_rows());
  auto d = dg.to_json();
  d["total_linear"] = r[0].value;
  d["total_circular"] = r[1].value;
  d["tail_linear"] = r[0].tail;
  d["tail_circular"] = r[1].tail;
  write_manifest(p.out, p.subcommand, cfg, d, p.deterministic);
  log << "norders: " << rows << " orders -> " << p.out << "\n";
  return dg.not_converged ? kNotConverged : kOk;
}

inline nlohmann::json fit_json(const std::vector<double>& xs, const std::vector<double>& diff) {
  for (double d : diff)
    if (!(d > 0.0)) return nullptr;  // the power law needs a positive excess
  const auto f = fit_power_law(xs, diff);
  return {{"eta", f.eta}, {"prefactor", f.prefactor}, {"r_squared", f.r_squared}};
}

inline int cmd_integrate(const RunParams& p, ConfigMap& cfg, std::ostream& log) {
  QuadratureSpec spec = p.coarse ? p.quad.halved() : p.quad;
  spec.threads = p.threads;
  spec.estimate_error = true;
  struct Row {
    double lin = NAN, circ = NAN, pdcs = NAN, err_lin = NAN, err_circ = NAN, err_pdcs = NAN;
    bool flagged = false;
  };
  std::vector<Row> rows(p.xi_list.size());
  const auto rel_ok = [&](const IntegrationResult& r) {
    return std::abs(r.error_estimate) <= p.quad_rel_tol * std::abs(r.value);
  };
  for (std::size_t i = 0; i < p.xi_list.size(); ++i) {
    Row& row = rows[i];
    LaserConfig l = p.laser;
    l.xi = p.xi_list[i];
    if (p.want_nonpert()) {
      l.polarization = LaserPolarization::Linear;
      const auto a = integrated_rate(l, p.electron, p.regularization_for(l), p.bounds, spec, p.rate);
      l.polarization = LaserPolarization::Circular;
      const auto b = integrated_rate(l, p.electron, p.regularization_for(l), p.bounds, spec, p.rate);
      row.lin = a.value;
      row.err_lin = a.error_estimate;
      row.circ = b.value;
      row.err_circ = b.error_estimate;
      row.flagged = !rel_ok(a) || !rel_ok(b);
    }
    if (p.want_pdcs()) {
      l.polarization = LaserPolarization::Linear;
      const auto c = integrated_rate_pdcs(l, p.electron, p.bounds, spec);
      row.pdcs = c.value;
      row.err_pdcs = c.error_estimate;
      row.flagged = row.flagged || !rel_ok(c);
    }
    log << "integrate: xi = " << p.xi_list[i] << " done\n";
  }
  CsvWriter csv(p.out, {"xi", "W_nonpert_linear", "W_nonpert_circular", "W_pdcs", "W_pdcs_over_xi2",
                        "err_nonpert_linear", "err_nonpert_circular", "err_pdcs", "flag_not_converged"});
  long flagged = 0;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const auto& r = rows[i];
    const double x = p.xi_list[i];
    csv.row({x, r.lin, r.circ, r.pdcs, r.pdcs / (x * x), r.err_lin, r.err_circ, r.err_pdcs, r.flagged ? 1.0 : 0.0});
    flagged += r.flagged;
  }
  csv.flush();
  nlohmann::json d;
  d["rows"] = static_cast<long>(csv.data_rows());
  d["quadrature_orders"] = {spec.psi_b, spec.psi_c, spec.theta_b, spec.theta_c, spec.omega_b};
  d["error_estimate"] = "|I(orders) - I(orders/2)|";
  d["rows_not_converged"] = flagged;
  if (p.want_nonpert() && p.want_pdcs() && p.xi_list.size() >= 2) {
    std::vector<double> dl, dc;
    for (const auto& r : rows) {
      dl.push_back(r.lin - r.pdcs);
      dc.push_back(r.circ - r.pdcs);
    }
    d["fit_linear"] = fit_json(p.xi_list, dl);
    d["fit_circular"] = fit_json(p.xi_list, dc);
    for (const auto& [name, key] : {std::pair{"linear", "fit_linear"}, std::pair{"circular", "fit_circular"}}) {
      if (d[key].is_null())
        log << "integrate: " << name << " excess not positive at every xi, no power-law fit\n";
      else
        log << "integrate: eta_" << name << " = " << d[key]["eta"].get<double>() << "\n";
    }
  }
  write_manifest(p.out, p.subcommand, cfg, d, p.deterministic);
  return flagged ? kNotConverged : kOk;
}

inline double concurrence_or_missing(const RateQuery& q, Theory theory, const RateOptions& opt) {
  try {
    return concurrence(density_matrix(q, PolarizationBasisKind::Cartesian, theory, opt)).concurrence;
  } catch (const UndefinedDensityMatrix&) {
    return NAN;
  }
}

inline int cmd_concurrence(const RunParams& p, ConfigMap& cfg, std::ostream& log) {
  const auto g1 = linspace(p.a1_min, p.a1_max, p.a1_points);
  const auto g2 = linspace(p.a2_min, p.a2_max, p.a2_points);
  std::vector<std::string> header{"angle1", "angle2"};
  if (p.want_nonpert()) header.insert(header.end(), {"C_nonpert_linear", "C_nonpert_circular"});
  if (p.want_pdcs()) header.insert(header.end(), {"C_pdcs_linear", "C_pdcs_circular"});
  CsvWriter csv(p.out, header);
  long missing = 0;
  for (double a1 : g1) {
    std::vector<std::vector<double>> rows(g2.size());
    parallel_for(g2.size(), p.threads, [&](std::size_t j) {
      std::vector<double> row{a1, g2[j]};
      std::vector<Theory> th;
      if (p.want_nonpert()) th.push_back(Theory::Nonperturbative);
      if (p.want_pdcs()) th.push_back(Theory::Perturbative);
      for (Theory t : th)
        for (auto pol : {LaserPolarization::Linear, LaserPolarization::Circular}) {
          LaserConfig l = p.laser;
          l.polarization = pol;
          RateQuery q = base_query(p, l);
          place_angles(q, p.plane, a1, g2[j]);
          row.push_back(concurrence_or_missing(q, t, p.rate));
        }
      rows[j] = std::move(row);
    });
    for (auto& r : rows) {
      for (double v : r) missing += std::isnan(v);
      csv.row(r);
    }
    csv.flush();
  }
  nlohmann::json d;
  d["rows"] = static_cast<long>(csv.data_rows());
  d["missing_cells"] = missing;
  write_manifest(p.out, p.subcommand, cfg, d, p.deterministic);
  log << "concurrence: " << csv.data_rows() << " points, " << missing << " undefined -> " << p.out << "\n";
  return kOk;
}

inline int cmd_gaugecheck(const RunParams& p, ConfigMap& cfg, std::ostream& log, bool regularization_given,
                          const ChannelAmplitudeFn& amp = default_channel_amplitude) {
  (void)cfg;
  std::vector<std::pair<std::string, Regularization>> regs;
  if (regularization_given)
    regs.push_back({p.regularization, p.regularization_for(p.laser)});
  else
    regs = {{"none", Regularization::none()},
            {"pulse", p.tau > 0.0 ? Regularization{RegularizationKind::PulseFactor, p.tau}
                                  : Regularization::pulse_default(p.laser)},
            {"imag-mass", Regularization::imaginary_mass()}};
  bool fail = false;
  for (const auto& [name, reg] : regs)
    for (auto pol : {LaserPolarization::Linear, LaserPolarization::Circular}) {
      const auto r = gauge_check(pol, reg, p.gauge, amp);
      const bool exempt = reg.kind == RegularizationKind::ImaginaryMass;
      const bool ok = r.max_deviation < p.gauge_tol;
      char buf[200];
      std::snprintf(buf, sizeof buf, "gaugecheck %-9s %-8s configs %d max deviation %.3e %s\n", name.c_str(),
                    to_string(pol).c_str(), r.evaluated, r.max_deviation,
                    ok ? "PASS" : (exempt ? "WARN (imaginary mass is not strictly gauge invariant)" : "FAIL"));
      log << buf;
      if (!ok && !exempt) fail = true;
    }
  return fail ? kGaugeFailure : kOk;
}

/// Dispatch with error-to-exit-code mapping.
inline int run(const std::string& sub, ConfigMap cfg, std::ostream& log, std::ostream& err) {
  try {
    const bool reg_given = cfg.has("regularization");
    const RunParams p = resolve(sub, cfg);
    if (sub == "spectrum") return cmd_spectrum(p, cfg, log);
    if (sub == "angmap") return cmd_angmap(p, cfg, log);
    if (sub == "norders") return cmd_norders(p, cfg, log);
    if (sub == "integrate") return cmd_integrate(p, cfg, log);
    if (sub == "concurrence") return cmd_concurrence(p, cfg, log);
    if (sub == "gaugecheck") return cmd_gaugecheck(p, cfg, log, reg_given);
    throw ConfigError("unknown subcommand " + sub);
  } catch (const ConfigError& e) {
    err << "error: " << e.what() << "\n";
    return kInvalidConfig;
  } catch (const std::invalid_argument& e) {
    err << "error: " << e.what() << "\n";
    return kInvalidConfig;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kFailure;
  }
}

}  // namespace ldcs::cli
