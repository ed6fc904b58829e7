#include <algorithm>
#include <chrono>
#include <cmath>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <limits>
#include <sstream>

#include <Eigen/Core>
#include <boost/math/tools/roots.hpp>
#include <boost/version.hpp>
#include <yaml-cpp/yaml.h>

#include "fockbench/birth_death.hpp"
#include "fockbench/classb.hpp"
#include "fockbench/csv.hpp"
#include "fockbench/cumulant.hpp"
#include "fockbench/lindblad.hpp"
#include "fockbench/parallel.hpp"
#include "fockbench/scenario.hpp"

#ifndef FOCKBENCH_VERSION
#define FOCKBENCH_VERSION "0.0.0"
#endif

namespace fockbench {

namespace {

constexpr double kNan = std::numeric_limits<double>::quiet_NaN();

Cell num(double v) { return std::isnan(v) ? Cell{} : Cell{v}; }
Cell count(std::size_t v) { return Cell{static_cast<std::int64_t>(v)}; }

Table make_table(std::string name, std::vector<std::string> columns) {
  Table t;
  t.name = std::move(name);
  t.columns = std::move(columns);
  return t;
}

double fano_of(double mean, double variance) { return mean > 0 ? variance / mean : kNan; }

std::size_t truncation_for(const Scenario& sc) {
  if (sc.numerics.n_max) return *sc.numerics.n_max;
  const InitialCondition ic = sc.initial.value_or(InitialCondition{});
  return suggest_n_max(ic.mean(), ic.state_variance(), sc.loss, sc.gain);
}

PhotonDistribution initial_distribution(const InitialCondition& ic, std::size_t n_max) {
  switch (ic.kind) {
    case InitialCondition::Kind::vacuum: return vacuum_distribution(n_max);
    case InitialCondition::Kind::fock: return fock_distribution(static_cast<std::size_t>(ic.n), n_max);
    case InitialCondition::Kind::coherent: return coherent_distribution(ic.n_bar, n_max);
    case InitialCondition::Kind::thermal: return thermal_distribution(ic.n_bar, n_max);
  }
  return vacuum_distribution(n_max);
}

DensityMatrix initial_density(const InitialCondition& ic, std::size_t n_max) {
  switch (ic.kind) {
    case InitialCondition::Kind::vacuum: return fock_density(0, n_max);
    case InitialCondition::Kind::fock: return fock_density(static_cast<std::size_t>(ic.n), n_max);
    case InitialCondition::Kind::coherent: return coherent_density(ic.n_bar, n_max);
    case InitialCondition::Kind::thermal: return thermal_density(ic.n_bar, n_max);
  }
  return fock_density(0, n_max);
}

RunResult run_decay(const Scenario& sc) {
  const double u = sc.time_unit;
  const std::size_t n_max = truncation_for(sc);
  const PhotonDistribution p0 = initial_distribution(*sc.initial, n_max);
  const EvolveResult res = evolve(p0, sc.loss, sc.gain, sc.numerics.t_final, sc.numerics.report_times, sc.numerics.rel_tol);

  Table moments_t = make_table("moments", {"time", "mean", "variance", "fano", "tail_mass"});
  for (const auto& snap : res.snapshots) {
    const Moments m = moments(snap.p);
    moments_t.rows.push_back({snap.time * u, m.mean, m.variance, num(fano_of(m.mean, m.variance)), tail_mass(snap.p)});
  }
  Table trace_t = make_table("trace", {"time", "mean", "variance", "fano"});
  std::size_t best = 0;
  double min_fano = kNan;
  for (std::size_t i = 0; i < res.trace.size(); ++i) {
    const double mean = res.trace.mean[i], var = res.trace.variance[i];
    trace_t.rows.push_back({res.trace.times[i] * u, mean, var, num(fano_of(mean, var))});
    if (var < res.trace.variance[best]) best = i;
    const double f = fano_of(mean, var);
    if (!std::isnan(f) && !(f >= min_fano)) min_fano = f;
  }

  RunResult out;
  Table summary = make_table("summary", {"n_max", "steps", "final_time", "final_mean", "final_variance", "final_fano",
                                         "min_std_dev", "time_at_min", "mean_at_min", "min_fano"});
  const Moments last = moments(res.snapshots.back().p);
  summary.rows.push_back({count(n_max), count(res.stats.accepted), res.snapshots.back().time * u, last.mean, last.variance,
                          num(fano_of(last.mean, last.variance)), std::sqrt(std::max(res.trace.variance[best], 0.0)),
                          res.trace.times[best] * u, res.trace.mean[best], num(min_fano)});
  out.tables.push_back(std::move(summary));
  out.tables.push_back(std::move(moments_t));
  out.tables.push_back(std::move(trace_t));
  if (sc.numerics.save_distributions) {
    Table dist = make_table("distributions", {"time", "n", "probability"});
    for (const auto& snap : res.snapshots) {
      for (std::size_t n = 0; n < snap.p.size(); ++n) dist.rows.push_back({snap.time * u, count(n), snap.p[n]});
    }
    out.tables.push_back(std::move(dist));
  }
  return out;
}

RunResult run_cumulant(const Scenario& sc) {
  const double u = sc.time_unit;
  CumulantState s0;
  s0.n_bar = sc.initial->mean();
  s0.var = sc.initial->variance.value_or(sc.initial->state_variance());
  const auto states = evolve_cumulants(s0, sc.loss, sc.numerics.t_final, sc.numerics.report_times, sc.numerics.rel_tol);

  Table moments_t = make_table("moments", {"time", "mean", "variance", "fano", "valid"});
  double min_fano = kNan, t_min = kNan, n_min = kNan;
  bool all_valid = true;
  for (const auto& st : states) {
    const double f = fano_of(st.n_bar, st.var);
    moments_t.rows.push_back({st.time * u, st.n_bar, st.var, num(f), count(st.valid ? 1 : 0)});
    all_valid = all_valid && st.valid;
    if (st.valid && !std::isnan(f) && !(f >= min_fano)) {
      min_fano = f;
      t_min = st.time * u;
      n_min = st.n_bar;
    }
  }
  RunResult out;
  Table summary = make_table("summary", {"final_time", "final_mean", "final_variance", "final_fano", "min_fano", "time_at_min",
                                         "mean_at_min", "variance_reduction", "valid_throughout"});
  const auto& last = states.back();
  summary.rows.push_back({last.time * u, last.n_bar, last.var, num(fano_of(last.n_bar, last.var)), num(min_fano), num(t_min),
                          num(n_min), num(1.0 - min_fano), count(all_valid ? 1 : 0)});
  if (!all_valid) out.warnings.push_back("cumulant closure left its validity range (std dev above 0.3 mean, or mean below one photon) at some report times");
  out.tables.push_back(std::move(summary));
  out.tables.push_back(std::move(moments_t));
  return out;
}

double steady_mean(const LossModel& loss, const SaturableGain& gain, std::size_t n_max) {
  return moments(steady_state(loss, gain, n_max).p).mean;
}

// Photon number where gain and loss balance with loss winning above it,
// searched within ten widths of the mean; NaN if there is none.
double balance_point(const LossModel& loss, const SaturableGain& gain, double mean, double std_dev) {
  const auto excess = [&](double n) { return gain_rate(gain, n) - loss.rate(n); };
  const double reach = 10.0 * std::max(std::max(std::sqrt(mean), std_dev), 1.0);
  const double lo = std::max(mean - reach, 1e-9), hi = mean + reach;
  constexpr int kCells = 2000;
  double best = kNan;
  double prev_n = lo, prev = excess(lo);
  for (int i = 1; i <= kCells; ++i) {
    const double n = lo + (hi - lo) * i / kCells;
    const double cur = excess(n);
    if (prev > 0 && cur <= 0) {
      std::uintmax_t iterations = 200;
      const auto root = boost::math::tools::toms748_solve(excess, prev_n, n, prev, cur,
                                                          boost::math::tools::eps_tolerance<double>(52), iterations);
      const double x = 0.5 * (root.first + root.second);
      if (std::isnan(best) || std::abs(x - mean) < std::abs(best - mean)) best = x;
    }
    prev_n = n;
    prev = cur;
  }
  return best;
}

RunResult run_laser(const Scenario& sc) {
  const auto& gain = std::get<SaturableGain>(sc.gain);
  const std::size_t n_max = truncation_for(sc);
  const PhotonDistribution dist = steady_state(sc.loss, gain, n_max);
  const Moments m = moments(dist.p);

  RunResult out;
  const double balance = balance_point(sc.loss, gain, m.mean, std::sqrt(std::max(m.variance, 0.0)));
  double predicted = kNan;
  if (!std::isnan(balance)) {
    try {
      predicted = steady_state_uncertainty(sc.loss, gain, balance);
    } catch (const ModelError& e) {
      out.warnings.push_back(std::string("no local prediction for the width: ") + e.what());
    }
  }
  // Response of the mean photon number to the gain, by central difference.
  constexpr double kStep = 1e-3;
  SaturableGain lo = gain, hi = gain;
  lo.A *= 1.0 - kStep;
  hi.A *= 1.0 + kStep;
  const double n_lo = steady_mean(sc.loss, lo, n_max), n_hi = steady_mean(sc.loss, hi, n_max);
  const double slope = (n_lo > 0 && n_hi > 0) ? std::log(n_hi / n_lo) / std::log((1.0 + kStep) / (1.0 - kStep)) : kNan;
  // A linear-loss laser with the same gain saturation holding the same mean.
  const double baseline = m.mean > 0 ? 1.0 + (std::isinf(gain.n_s) ? 0.0 : gain.n_s / m.mean) : kNan;

  const double above = static_cast<double>(n_max + 1);
  const bool confined = gain_rate(gain, above) < sc.loss.rate(above);
  if (!confined) {
    out.warnings.push_back("gain exceeds loss just above n_max: the state is metastable, held by the loss barrier below n_max");
  }

  Table summary = make_table("summary", {"A", "n_s", "n_max", "mean", "variance", "std_dev", "fano", "balance_n", "predicted_std_dev",
                                         "log_slope", "baseline_log_slope", "wall_probability", "confined"});
  summary.rows.push_back({gain.A * sc.time_unit, gain.n_s, count(n_max), m.mean, m.variance, std::sqrt(std::max(m.variance, 0.0)),
                          num(fano_of(m.mean, m.variance)), num(balance), num(predicted), num(slope), num(baseline), dist.p.back(),
                          count(confined ? 1 : 0)});
  Table dist_t = make_table("distribution", {"n", "probability"});
  for (std::size_t n = 0; n < dist.p.size(); ++n) dist_t.rows.push_back({count(n), dist.p[n]});
  out.tables.push_back(std::move(summary));
  out.tables.push_back(std::move(dist_t));
  return out;
}

RunResult run_gillespie(const Scenario& sc, const RunOptions& opt) {
  const double u = sc.time_unit;
  const PhotonDistribution p0 = initial_distribution(*sc.initial, truncation_for(sc));
  GillespieOptions g;
  g.seed = sc.numerics.seed;
  g.threads = opt.threads;
  const MomentTrace tr = gillespie_sample(sc.loss, sc.gain, p0, sc.numerics.report_times, sc.numerics.trajectories, g);
  Table moments_t = make_table("moments", {"time", "mean", "variance", "fano", "mean_stderr", "variance_stderr"});
  for (std::size_t i = 0; i < tr.size(); ++i) {
    moments_t.rows.push_back({tr.times[i] * u, tr.mean[i], tr.variance[i], num(tr.fano(i)), tr.mean_stderr[i], tr.variance_stderr[i]});
  }
  RunResult out;
  Table summary = make_table("summary", {"trajectories", "seed", "final_time", "final_mean", "final_variance", "final_fano"});
  const std::size_t last = tr.size() - 1;
  summary.rows.push_back({count(sc.numerics.trajectories), Cell{static_cast<std::int64_t>(sc.numerics.seed)}, tr.times[last] * u,
                          tr.mean[last], tr.variance[last], num(tr.fano(last))});
  out.tables.push_back(std::move(summary));
  out.tables.push_back(std::move(moments_t));
  return out;
}

// Family of mirror-mode parameters with gamma / kappa = ratio whose
// eliminated loss rates are identical to the base ones.
AdiabaticParams rescaled(const AdiabaticParams& base, double ratio) {
  const double s = ratio / (base.gamma / base.kappa);
  AdiabaticParams p = base;
  p.gamma = base.gamma * s;
  p.lambda = base.lambda * std::sqrt(s);
  p.cavity.beta = base.cavity.beta * s;
  p.omega_d = base.cavity.omega0 + (base.omega_d - base.cavity.omega0) * s;
  return p;
}

struct Discrepancy {
  double mean = 0.0;
  double variance = 0.0;
  double worst() const { return std::max(mean, variance); }
};

double relative(double a, double b) { return std::abs(a - b) / std::max(std::abs(b), 1e-300); }

RunResult run_lindblad(const Scenario& sc, const RunOptions& opt) {
  const double u = sc.time_unit;
  const Numerics& nm = sc.numerics;
  const AdiabaticParams& base = *sc.mirror_mode;
  RunResult out;
  for (auto& w : validate(base)) out.warnings.push_back(w);

  effective_loss_rates(base, *nm.n_max);  // cross-checks the rates against their Fano form
  const DensityMatrix rho0 = initial_density(*sc.initial, *nm.n_max);
  const auto ad = adiabatic_evolve(rho0, base, nm.t_final, nm.report_times, nm.rel_tol);
  const auto bd = evolve(initial_distribution(*sc.initial, *nm.n_max), sc.loss, NoGain{}, nm.t_final, nm.report_times,
                         std::max(nm.rel_tol * 1e-2, 1e-12));

  Table comp = make_table("comparisons", {"reference", "candidate", "gamma_over_kappa", "max_mean_rel", "max_variance_rel",
                                          "tolerance", "pass"});
  Table mom = make_table("moments", {"time", "adiabatic_mean", "adiabatic_variance", "birth_death_mean", "birth_death_variance"});
  Discrepancy first;
  for (std::size_t i = 0; i < ad.size(); ++i) {
    const Moments a = moments(populations(ad[i])), b = moments(bd.snapshots[i].p);
    mom.rows.push_back({ad[i].time * u, a.mean, a.variance, b.mean, b.variance});
    first.mean = std::max(first.mean, relative(a.mean, b.mean));
    first.variance = std::max(first.variance, relative(a.variance, b.variance));
  }
  const double base_ratio = base.kappa > 0 ? base.gamma / base.kappa : kNan;
  const bool first_ok = first.worst() <= nm.adiabatic_tolerance;
  comp.rows.push_back({std::string("birth-death"), std::string("adiabatic"), num(base_ratio), first.mean, first.variance,
                       nm.adiabatic_tolerance, count(first_ok ? 1 : 0)});
  out.notes.push_back("adiabatic vs birth-death: max relative moment discrepancy " + format_number(first.worst()) +
                      (first_ok ? " (ok)" : " (exceeds " + format_number(nm.adiabatic_tolerance) + ")"));
  std::string failure;
  if (!first_ok) failure = "adiabatic and birth-death moments disagree by " + format_number(first.worst());

  std::vector<double> ratios = nm.gamma_ratios;
  if (!ratios.empty() && !(base.kappa > 0)) throw ModelError("gamma_ratios need a nonzero mode.kappa");
  if (!ratios.empty() && std::find(ratios.begin(), ratios.end(), base_ratio) == ratios.end()) {
    ratios.push_back(base_ratio);
    std::sort(ratios.begin(), ratios.end());
  }
  Table two = make_table("two_mode", {"gamma_over_kappa", "time", "two_mode_mean", "two_mode_variance", "adiabatic_mean",
                                      "adiabatic_variance"});
  std::vector<Discrepancy> disc(ratios.size());
  std::vector<Table> per(ratios.size(), two);
  parallel_for(ratios.size(), opt.threads, [&](std::size_t k) {
    const AdiabaticParams p = rescaled(base, ratios[k]);
    const DensityMatrix c0 = initial_density(*sc.initial, nm.two_mode_n_max);
    const auto ref = adiabatic_evolve(c0, p, nm.t_final, nm.report_times, nm.rel_tol);
    const auto tm = two_mode_evolve(tensor_product(c0, fock_density(0, nm.mirror_levels - 1)), p, nm.t_final, nm.report_times,
                                    std::max(nm.rel_tol, 1e-10));
    for (std::size_t i = 0; i < tm.size(); ++i) {
      const Moments a = moments(populations(ref[i])), b = moments(populations(trace_out_mirror(tm[i])));
      per[k].rows.push_back({ratios[k], tm[i].time * u, b.mean, b.variance, a.mean, a.variance});
      disc[k].mean = std::max(disc[k].mean, relative(b.mean, a.mean));
      disc[k].variance = std::max(disc[k].variance, relative(b.variance, a.variance));
    }
  });
  bool monotone = true;
  for (std::size_t k = 0; k < ratios.size(); ++k) {
    for (auto& row : per[k].rows) two.rows.push_back(std::move(row));
    const bool at_base = ratios[k] == base_ratio;
    const bool ok = !at_base || disc[k].worst() <= nm.two_mode_tolerance;
    comp.rows.push_back({std::string("adiabatic"), std::string("two-mode"), ratios[k], disc[k].mean, disc[k].variance,
                         at_base ? Cell{nm.two_mode_tolerance} : Cell{}, at_base ? count(ok ? 1 : 0) : Cell{}});
    out.notes.push_back("two-mode vs adiabatic at gamma/kappa = " + format_number(ratios[k]) + ": mean " +
                        format_number(disc[k].mean) + ", variance " + format_number(disc[k].variance));
    if (!ok && failure.empty()) {
      failure = "two-mode and adiabatic moments differ by " + format_number(disc[k].worst()) + " at gamma/kappa = " +
                format_number(ratios[k]) + " (tolerance " + format_number(nm.two_mode_tolerance) + ")";
    }
    if (k > 0 && !(disc[k].worst() < disc[k - 1].worst())) monotone = false;
  }
  if (ratios.size() > 1) {
    out.notes.push_back(std::string("discrepancy decreases monotonically with gamma/kappa: ") + (monotone ? "yes" : "no"));
    if (!monotone && failure.empty()) failure = "two-mode discrepancy does not decrease monotonically with gamma/kappa";
  }

  Table summary = make_table("summary", {"adiabatic_vs_birth_death", "two_mode_at_base", "monotone", "pass"});
  double at_base = kNan;
  for (std::size_t k = 0; k < ratios.size(); ++k) {
    if (ratios[k] == base_ratio) at_base = disc[k].worst();
  }
  summary.rows.push_back({first.worst(), num(at_base), ratios.size() > 1 ? count(monotone ? 1 : 0) : Cell{},
                          count(failure.empty() ? 1 : 0)});
  out.tables.push_back(std::move(summary));
  out.tables.push_back(std::move(comp));
  out.tables.push_back(std::move(mom));
  if (!ratios.empty()) out.tables.push_back(std::move(two));
  if (!failure.empty()) {
    out.failure = ErrorKind::consistency;
    out.failure_message = failure;
  }
  return out;
}

std::vector<double> default_omega_grid(const OperatingPoint& op) {
  const double lo = 1e-3 * std::min(std::abs(op.eigenvalues[0]), std::abs(op.eigenvalues[1]));
  const double hi = 1e3 * std::max(std::abs(op.eigenvalues[0]), std::abs(op.eigenvalues[1]));
  std::vector<double> grid;
  constexpr int kPoints = 400;
  for (int i = 0; i < kPoints; ++i) grid.push_back(lo * std::pow(hi / lo, static_cast<double>(i) / (kPoints - 1)));
  return grid;
}

RunResult run_classb(const Scenario& sc, const RunOptions& opt) {
  const double u = sc.time_unit;
  const ClassBSystem sys{std::get<ClassBGain>(sc.gain), sc.loss};
  const auto ops = find_operating_points(sys, sc.numerics.n_lo, sc.numerics.n_hi, sc.numerics.grid_points);
  RunResult out;
  Table points = make_table("operating_points", {"n_bar", "inversion", "kappa", "kappa_slope", "stable", "eig1_re", "eig1_im",
                                                 "eig2_re", "eig2_im", "variance", "fano", "low_frequency_suppression",
                                                 "lyapunov_variance"});
  Table spectrum = make_table("spectrum", {"n_bar", "omega", "s_nn"});
  Table mc = make_table("monte_carlo", {"n_bar", "variance", "std_error", "trajectories", "analytic_variance", "z_score"});
  const OperatingPoint* lasing = nullptr;
  double lasing_var = kNan, lasing_sup = kNan;
  for (const auto& op : ops) {
    double var = kNan, sup = kNan, lyap = kNan;
    if (op.stable) {
      var = photon_variance(sys, op, std::max(sc.numerics.rel_tol, 1e-9)).variance;
      sup = low_frequency_suppression(sys, op);
      lyap = stationary_covariance(sys, op)(0, 0);
      const auto grid = sc.numerics.omega_grid.empty() ? default_omega_grid(op) : sc.numerics.omega_grid;
      const NoiseSpectrum ns = noise_spectrum(sys, op, grid);
      for (std::size_t i = 0; i < ns.omega.size(); ++i) spectrum.rows.push_back({op.n_bar, ns.omega[i] / u, ns.s_nn[i] * u});
      if (sc.numerics.monte_carlo) {
        const auto& c = *sc.numerics.monte_carlo;
        const double fastest = std::max(std::abs(op.eigenvalues[0]), std::abs(op.eigenvalues[1]));
        const double slowest = std::min(std::abs(op.eigenvalues[0].real()), std::abs(op.eigenvalues[1].real()));
        const double t_final = (10.0 + c.averaging_times) / slowest;
        const SdeEstimate est = sde_monte_carlo(sys, op, t_final, c.step_fraction / fastest, c.trajectories,
                                                sc.numerics.seed, opt.threads);
        mc.rows.push_back({op.n_bar, est.variance, est.std_error, count(est.n_traj), var, (est.variance - var) / est.std_error});
      }
      lasing = &op;
      lasing_var = var;
      lasing_sup = sup;
    }
    points.rows.push_back({op.n_bar, op.S_bar, op.kappa_at * u, op.kappa_prime_at * u, count(op.stable ? 1 : 0),
                           op.eigenvalues[0].real() * u, op.eigenvalues[0].imag() * u, op.eigenvalues[1].real() * u,
                           op.eigenvalues[1].imag() * u, num(var), num(op.n_bar > 0 ? var / op.n_bar : kNan), num(sup), num(lyap)});
  }
  Table summary = make_table("summary", {"operating_points", "stable_points", "n_bar", "variance", "fano", "variance_reduction",
                                         "low_frequency_suppression"});
  const std::size_t stable = static_cast<std::size_t>(std::count_if(ops.begin(), ops.end(), [](const auto& o) { return o.stable; }));
  if (lasing) {
    const double f = lasing_var / lasing->n_bar;
    summary.rows.push_back({count(ops.size()), count(stable), lasing->n_bar, lasing_var, f, 1.0 - f, lasing_sup});
  } else {
    summary.rows.push_back({count(ops.size()), count(stable), Cell{}, Cell{}, Cell{}, Cell{}, Cell{}});
    out.warnings.push_back("no stable operating point in the searched photon-number range");
  }
  out.tables.push_back(std::move(summary));
  out.tables.push_back(std::move(points));
  out.tables.push_back(std::move(spectrum));
  if (sc.numerics.monte_carlo) out.tables.push_back(std::move(mc));
  return out;
}

std::string utc_now() {
  const std::time_t t = std::time(nullptr);
  std::tm tm{};
  gmtime_r(&t, &tm);
  std::ostringstream os;
  os << std::put_time(&tm, "%Y-%m-%dT%H:%M:%SZ");
  return os.str();
}

}  // namespace

RunResult run_scenario(const Scenario& sc, const RunOptions& options) {
  switch (sc.engine) {
    case Engine::decay: return run_decay(sc);
    case Engine::cumulant: return run_cumulant(sc);
    case Engine::laser_steady: return run_laser(sc);
    case Engine::gillespie: return run_gillespie(sc, options);
    case Engine::lindblad_validate: return run_lindblad(sc, options);
    case Engine::classb_spectrum: return run_classb(sc, options);
  }
  throw ModelError("unknown engine");
}

RunResult sweep_scenario(const Scenario& sc, const RunOptions& options) {
  if (!sc.sweep) throw ParseError(sc.origin, 0, "scenario has no 'sweep' section");
  const SweepSpec& sw = *sc.sweep;
  const std::size_t count_values = sw.values.size();
  std::vector<std::optional<RunResult>> results(count_values);
  std::vector<std::pair<ErrorKind, std::string>> errors(count_values);
  const unsigned outer = static_cast<unsigned>(std::min<std::size_t>(resolve_threads(options.threads), count_values));
  RunOptions inner = options;
  if (outer > 1) inner.threads = 1;
  parallel_for(count_values, outer, [&](std::size_t i) {
    try {
      const Scenario instance = with_parameter(sc, sw.parameter, sw.values[i]);
      results[i] = run_scenario(instance, inner);
      if (results[i]->failure) errors[i] = {*results[i]->failure, results[i]->failure_message};
    } catch (const Error& e) {
      errors[i] = {e.kind(), e.what()};
    } catch (const std::exception& e) {
      errors[i] = {ErrorKind::numeric, e.what()};
    }
  });

  RunResult out;
  std::vector<std::string> names;
  const RunResult* schema = nullptr;
  for (const auto& r : results) {
    if (r && !schema) schema = &*r;
  }
  Table summary = make_table("summary", {sw.parameter, "status", "message"});
  if (schema) {
    for (const auto& c : schema->tables.front().columns) summary.columns.push_back(c);
    for (std::size_t t = 1; t < schema->tables.size(); ++t) {
      Table combined = make_table(schema->tables[t].name, {sw.parameter});
      for (const auto& c : schema->tables[t].columns) combined.columns.push_back(c);
      out.tables.push_back(std::move(combined));
    }
  }
  for (std::size_t i = 0; i < count_values; ++i) {
    const bool failed = !results[i] || results[i]->failure.has_value();
    std::vector<Cell> row{sw.values[i], std::string(failed ? error_kind_name(errors[i].first) : "ok"),
                          std::string(failed ? errors[i].second : "")};
    if (results[i]) {
      for (const auto& c : results[i]->tables.front().rows.front()) row.push_back(c);
      for (std::size_t t = 1; t < results[i]->tables.size(); ++t) {
        auto it = std::find_if(out.tables.begin(), out.tables.end(),
                               [&](const Table& x) { return x.name == results[i]->tables[t].name; });
        if (it == out.tables.end()) continue;
        for (const auto& r : results[i]->tables[t].rows) {
          std::vector<Cell> full{sw.values[i]};
          full.insert(full.end(), r.begin(), r.end());
          it->rows.push_back(std::move(full));
        }
      }
      for (const auto& w : results[i]->warnings) out.warnings.push_back(sw.parameter + " = " + format_number(sw.values[i]) + ": " + w);
    } else if (schema) {
      row.resize(summary.columns.size());
    }
    summary.rows.push_back(std::move(row));
    if (failed && !out.failure) {
      out.failure = errors[i].first;
      out.failure_message = sw.parameter + " = " + format_number(sw.values[i]) + ": " + errors[i].second;
    }
  }
  out.tables.insert(out.tables.begin(), std::move(summary));
  return out;
}

ValidationReport validate_scenario(const Scenario& sc, const RunOptions& options) {
  ValidationReport rep;
  rep.lines.push_back("scenario '" + sc.name + "' (" + sc.origin + "): engine " + engine_name(sc.engine) + ", parsed and checked");
  if (sc.mirror_mode && sc.engine != Engine::lindblad_validate) {
    for (const auto& w : validate(*sc.mirror_mode)) rep.lines.push_back("warning: " + w);
  }
  if (sc.sweep) {
    for (double v : sc.sweep->values) with_parameter(sc, sc.sweep->parameter, v);
    rep.lines.push_back("sweep over " + sc.sweep->parameter + ": all " + std::to_string(sc.sweep->values.size()) +
                        " instances parse");
  }
  if (sc.initial && (sc.engine == Engine::decay || sc.engine == Engine::cumulant)) {
    const double n = sc.initial->mean();
    if (n > 0) {
      rep.lines.push_back("loss at the initial mean: n L'(n) / L(n) = " +
                          format_number(n * sc.loss.derivative(n) / sc.loss.rate(n)) +
                          (condensation_condition(sc.loss, n) ? " (noise condenses)" : " (no condensation)"));
    }
  }
  if (sc.engine == Engine::lindblad_validate) {
    const RunResult r = run_scenario(sc, options);
    for (const auto& line : r.notes) rep.lines.push_back(line);
    for (const auto& w : r.warnings) rep.lines.push_back("warning: " + w);
    if (r.failure) {
      rep.failure = r.failure;
      rep.lines.push_back("FAILED: " + r.failure_message);
    }
  }
  return rep;
}

std::string scenario_hash(const std::string& text) {
  std::uint64_t h = 14695981039346656037ull;
  for (unsigned char c : text) {
    h ^= c;
    h *= 1099511628211ull;
  }
  std::ostringstream os;
  os << std::hex << std::setw(16) << std::setfill('0') << h;
  return os.str();
}

void write_results(const RunResult& result, const Scenario& sc, const std::string& dir, const ManifestInfo& info) {
  namespace fs = std::filesystem;
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw NumericError("cannot create output directory '" + dir + "': " + ec.message());

  YAML::Emitter m;
  m << YAML::BeginMap;
  m << YAML::Key << "fockbench_version" << YAML::Value << FOCKBENCH_VERSION;
  m << YAML::Key << "command" << YAML::Value << info.command;
  m << YAML::Key << "scenario" << YAML::Value << YAML::BeginMap;
  m << YAML::Key << "name" << YAML::Value << sc.name;
  m << YAML::Key << "origin" << YAML::Value << sc.origin;
  m << YAML::Key << "hash" << YAML::Value << scenario_hash(sc.source);
  m << YAML::Key << "engine" << YAML::Value << engine_name(sc.engine);
  m << YAML::Key << "time_unit" << YAML::Value << format_number(sc.time_unit);
  m << YAML::EndMap;
  m << YAML::Key << "seed" << YAML::Value << sc.numerics.seed;
  m << YAML::Key << "threads" << YAML::Value << resolve_threads(info.threads);
  m << YAML::Key << "started_utc" << YAML::Value << utc_now();
  m << YAML::Key << "wall_seconds" << YAML::Value << format_number(info.wall_seconds);
  if (sc.budget_seconds) {
    m << YAML::Key << "budget_seconds" << YAML::Value << format_number(*sc.budget_seconds);
    m << YAML::Key << "within_budget" << YAML::Value << (info.wall_seconds <= *sc.budget_seconds);
  }
  m << YAML::Key << "exit_code" << YAML::Value << info.exit_code;
  if (result.failure) {
    m << YAML::Key << "failure" << YAML::Value << YAML::BeginMap;
    m << YAML::Key << "kind" << YAML::Value << error_kind_name(*result.failure);
    m << YAML::Key << "message" << YAML::Value << result.failure_message;
    m << YAML::EndMap;
  }
  m << YAML::Key << "warnings" << YAML::Value << YAML::BeginSeq;
  for (const auto& w : result.warnings) m << w;
  m << YAML::EndSeq;
  m << YAML::Key << "notes" << YAML::Value << YAML::BeginSeq;
  for (const auto& w : result.notes) m << w;
  m << YAML::EndSeq;
  m << YAML::Key << "files" << YAML::Value << YAML::BeginSeq;
  for (const auto& t : result.tables) {
    m << YAML::BeginMap << YAML::Key << "name" << YAML::Value << t.name + ".csv";
    m << YAML::Key << "rows" << YAML::Value << t.rows.size();
    m << YAML::Key << "columns" << YAML::Value << YAML::Flow << t.columns << YAML::EndMap;
  }
  m << YAML::EndSeq;
  m << YAML::Key << "libraries" << YAML::Value << YAML::BeginMap;
  m << YAML::Key << "eigen" << YAML::Value
    << std::to_string(EIGEN_WORLD_VERSION) + "." + std::to_string(EIGEN_MAJOR_VERSION) + "." + std::to_string(EIGEN_MINOR_VERSION);
  m << YAML::Key << "boost" << YAML::Value << std::string(BOOST_LIB_VERSION);
  m << YAML::Key << "compiler" << YAML::Value << std::string(__VERSION__);
  m << YAML::EndMap;
  m << YAML::Key << "input" << YAML::Value << YAML::Literal << sc.source;
  m << YAML::EndMap;

  for (const auto& t : result.tables) {
    std::ofstream f(fs::path(dir) / (t.name + ".csv"), std::ios::binary);
    write_csv(f, t);
    if (!f) throw NumericError("failed writing " + t.name + ".csv");
  }
  std::ofstream f(fs::path(dir) / "manifest.yaml", std::ios::binary);
  f << m.c_str() << "\n";
  if (!f) throw NumericError("failed writing manifest.yaml");
}

}  // namespace fockbench
