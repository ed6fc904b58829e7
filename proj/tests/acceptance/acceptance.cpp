// Runs the acceptance criteria and prints one PASS/FAIL line per criterion.
// Exit status is 0 when the set of failing criteria equals --expect-fail.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <iostream>
#include <limits>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <Eigen/Dense>

#include "fockbench/birth_death.hpp"
#include "fockbench/classb.hpp"
#include "fockbench/csv.hpp"
#include "fockbench/presets.hpp"
#include "fockbench/scenario.hpp"

#ifndef FOCKBENCH_SOURCE_DIR
#define FOCKBENCH_SOURCE_DIR "."
#endif

using namespace fockbench;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

struct Criterion {
  int id;
  const char* title;
  double budget_seconds;
  std::function<Outcome()> check;
};

std::string fmt(double v, int digits = 4) {
  std::ostringstream os;
  os.precision(digits);
  os << v;
  return os.str();
}

Scenario preset(const std::string& name) { return parse_scenario(*preset_text(name), name + ".cfg"); }
Scenario config(const std::string& name) {
  return load_scenario(std::string(FOCKBENCH_SOURCE_DIR) + "/configs/" + name + ".cfg");
}

const Table& table(const RunResult& r, const std::string& name) {
  for (const auto& t : r.tables) {
    if (t.name == name) return t;
  }
  throw std::runtime_error("missing table " + name);
}

std::size_t column(const Table& t, const std::string& name) {
  const auto it = std::find(t.columns.begin(), t.columns.end(), name);
  if (it == t.columns.end()) throw std::runtime_error("missing column " + name + " in " + t.name);
  return static_cast<std::size_t>(it - t.columns.begin());
}

double value(const Cell& c) {
  if (const auto* d = std::get_if<double>(&c)) return *d;
  if (const auto* i = std::get_if<std::int64_t>(&c)) return static_cast<double>(*i);
  return std::numeric_limits<double>::quiet_NaN();
}

double at(const Table& t, std::size_t row, const std::string& col) { return value(t.rows.at(row).at(column(t, col))); }

// Row of a sweep summary whose first column equals v.
std::size_t row_for(const Table& t, double v) {
  for (std::size_t i = 0; i < t.rows.size(); ++i) {
    if (value(t.rows[i][0]) == v) return i;
  }
  throw std::runtime_error("no row for sweep value " + fmt(v));
}

void require_no_failure(const RunResult& r) {
  if (r.failure) throw std::runtime_error("run failed: " + r.failure_message);
}

Outcome coherence_preserved() {
  const RunResult bd = run_scenario(config("linear-decay"));
  const Table& trace = table(bd, "trace");
  double worst = 0.0;
  for (std::size_t i = 0; i < trace.rows.size(); ++i) worst = std::max(worst, std::abs(at(trace, i, "fano") - 1.0));
  const RunResult cu = run_scenario(config("linear-decay-cumulant"));
  const Table& mom = table(cu, "moments");
  double gap = 0.0;
  for (std::size_t i = 0; i < mom.rows.size(); ++i) gap = std::max(gap, std::abs(at(mom, i, "variance") - at(mom, i, "mean")));
  return {worst < 1e-6 && gap == 0.0, "max |F-1| " + fmt(worst) + " over " + std::to_string(trace.rows.size()) +
                                          " steps; cumulant max |var-mean| " + fmt(gap)};
}

Outcome mesoscopic_decay() {
  const Scenario sc = preset("fig2-mesoscopic");
  const RunResult r = sweep_scenario(sc);
  require_no_failure(r);
  const Table& s = table(r, "summary");
  const KerrCavitySpec& cav = *sc.loss.cavity();
  const double edge = (sc.loss.mirror()->spec().omega_d / cav.omega0 - 1.0) / (2.0 * cav.beta);
  const std::size_t above = row_for(s, 6000.0);
  const double min_sd = at(s, above, "min_std_dev"), mean_at = at(s, above, "mean_at_min");
  const bool ok_above = min_sd >= 0.5 && min_sd <= 1.1 && std::abs(mean_at - edge) <= 0.1 * edge;

  const Table& trace = table(r, "trace");
  double f_lo = 1e300, f_hi = -1e300, last_mean = 0.0;
  for (std::size_t i = 0; i < trace.rows.size(); ++i) {
    if (value(trace.rows[i][0]) != 2500.0) continue;
    const double m = at(trace, i, "mean");
    if (m < 100.0) break;
    f_lo = std::min(f_lo, at(trace, i, "fano"));
    f_hi = std::max(f_hi, at(trace, i, "fano"));
    last_mean = m;
  }
  const bool ok_below = f_lo >= 0.9 && f_hi <= 1.1;
  return {ok_above && ok_below, "start 6000: min dn " + fmt(min_sd) + " at n " + fmt(mean_at, 6) + " (edge " + fmt(edge, 6) +
                                    "); start 2500: F in [" + fmt(f_lo, 6) + ", " + fmt(f_hi, 6) + "] down to n " +
                                    fmt(last_mean, 5)};
}

Outcome macroscopic_cumulant() {
  const RunResult r = sweep_scenario(preset("fig2-macroscopic"));
  require_no_failure(r);
  const Table& s = table(r, "summary");
  const double red3 = 1.0 - at(s, row_for(s, 1e3), "min_fano");
  const double red4 = 1.0 - at(s, row_for(s, 1e4), "min_fano");
  const double red5 = 1.0 - at(s, row_for(s, 1e5), "min_fano");
  const bool ok = red3 >= 0.98 && red4 >= 0.85 && red4 <= 0.95 && red5 >= 0.65 && red5 <= 0.85;
  return {ok, "variance reduction " + fmt(100 * red3) + "% / " + fmt(100 * red4) + "% / " + fmt(100 * red5) +
                  "% at background loss 1e3 / 1e4 / 1e5"};
}

std::vector<double> null_vector(const LossModel& loss, const SaturableGain& gain, std::size_t n_max) {
  const std::size_t size = n_max + 1;
  Eigen::MatrixXd q = Eigen::MatrixXd::Zero(size, size);
  for (std::size_t n = 0; n < size; ++n) {
    const double down = n > 0 ? loss.rate(static_cast<double>(n)) : 0.0;
    const double up = n < n_max ? gain_rate(gain, static_cast<double>(n + 1)) : 0.0;
    q(n, n) -= down + up;
    if (n > 0) q(n - 1, n) += down;
    if (n < n_max) q(n + 1, n) += up;
  }
  Eigen::FullPivLU<Eigen::MatrixXd> lu(q);
  Eigen::VectorXd v = lu.kernel().col(0);
  v /= v.sum();
  return {v.data(), v.data() + v.size()};
}

Outcome steady_state_oracle() {
  std::mt19937_64 rng(20240611);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  constexpr int kTrials = 24;
  double worst_tv = 0.0, worst_balance = 0.0;
  for (int trial = 0; trial < kTrials; ++trial) {
    const std::size_t n_max = 100 + static_cast<std::size_t>(100 * unit(rng));
    const double kappa = 0.5 + unit(rng);
    const SaturableGain gain{kappa * (0.5 + 1.5 * unit(rng)), 5.0 + 25.0 * unit(rng)};
    const LossModel loss =
        trial % 2 == 0 ? LossModel::linear(kappa)
                       : LossModel::fano_kerr({1.0, 2e-5 * (1 + unit(rng)), 2 * kappa, 1.0, 0.05 * kappa},
                                              {1.0 + 1e-3 * (0.5 + unit(rng)), 1e-3, 0.9, 0.3, trial % 4 == 1 ? 1 : -1, {}});
    const auto d = steady_state(loss, gain, n_max);
    const auto ref = null_vector(loss, gain, n_max);
    double tv = 0.0;
    for (std::size_t n = 0; n <= n_max; ++n) tv += std::abs(d.p[n] - ref[n]);
    worst_tv = std::max(worst_tv, 0.5 * tv);
    for (std::size_t n = 1; n <= n_max; ++n) {
      const double lhs = gain_rate(gain, static_cast<double>(n)) * d.p[n - 1];
      const double rhs = loss.rate(static_cast<double>(n)) * d.p[n];
      if (lhs > 1e-250) worst_balance = std::max(worst_balance, std::abs(lhs - rhs) / lhs);
    }
  }
  return {worst_tv <= 1e-10 && worst_balance <= 1e-12, std::to_string(kTrials) + " scenarios: max TV " + fmt(worst_tv) +
                                                           ", max detailed-balance residual " + fmt(worst_balance)};
}

Outcome fock_laser() {
  const RunResult r = sweep_scenario(preset("fig4-fockLaser"));
  require_no_failure(r);
  const Table& s = table(r, "summary");
  const std::size_t top = s.rows.size() - 1;
  const double slope = at(s, top, "log_slope"), baseline = at(s, top, "baseline_log_slope");
  const double fano = at(s, top, "fano"), sd = at(s, top, "std_dev"), predicted = at(s, top, "predicted_std_dev");
  const double below = at(s, 0, "mean"), plateau = at(s, top, "mean");
  const double width_err = std::abs(predicted - sd) / sd;
  const bool ok = slope * 100.0 <= baseline && fano <= 0.01 && width_err <= 0.1;
  return {ok, "pump " + fmt(value(s.rows[0][0])) + " -> " + fmt(value(s.rows[top][0])) + ": n " + fmt(below) + " -> " +
                  fmt(plateau, 6) + "; slope " + fmt(slope) + " vs baseline " + fmt(baseline) + "; F " + fmt(fano) +
                  "; predicted width off by " + fmt(100 * width_err, 3) + "%; wall probability " +
                  fmt(at(s, top, "wall_probability"), 2)};
}

Outcome lindblad_cross_validation() {
  const RunResult r = run_scenario(preset("validation-small"));
  const Table& c = table(r, "comparisons");
  double first = std::max(at(c, 0, "max_mean_rel"), at(c, 0, "max_variance_rel"));
  std::vector<double> ratios, worst;
  for (std::size_t i = 1; i < c.rows.size(); ++i) {
    ratios.push_back(at(c, i, "gamma_over_kappa"));
    worst.push_back(std::max(at(c, i, "max_mean_rel"), at(c, i, "max_variance_rel")));
  }
  bool monotone = true;
  for (std::size_t i = 1; i < worst.size(); ++i) monotone = monotone && worst[i] < worst[i - 1];
  double at50 = std::numeric_limits<double>::quiet_NaN();
  std::string list;
  for (std::size_t i = 0; i < ratios.size(); ++i) {
    if (ratios[i] == 50.0) at50 = worst[i];
    list += (i ? ", " : "") + fmt(worst[i], 3) + " at " + fmt(ratios[i]);
  }
  const bool ok = first <= 1e-8 && at50 <= 0.02 && monotone;
  return {ok, "adiabatic vs birth-death " + fmt(first) + "; two-mode vs adiabatic " + list +
                  (monotone ? " (monotone)" : " (not monotone)")};
}

Outcome classb_spectrum() {
  Scenario sc = preset("fig5-classB");
  const double middle = 1.107e19;
  sc.sweep->values = {1.085e18, 5.0e18, middle, 3.75e19};
  const RunResult r = sweep_scenario(sc);
  require_no_failure(r);

  double worst_route = 0.0;
  for (double lambda : sc.sweep->values) {
    const Scenario one = with_parameter(sc, "gain.Lambda", lambda);
    const ClassBSystem sys{std::get<ClassBGain>(one.gain), one.loss};
    for (const auto& op : find_operating_points(sys, one.numerics.n_lo, one.numerics.n_hi, one.numerics.grid_points)) {
      if (!op.stable) continue;
      for (double w : one.numerics.omega_grid) {
        const double a = spectral_density(sys, op, w), b = spectral_density_closed_form(sys, op, w);
        worst_route = std::max(worst_route, std::abs(a - b) / std::abs(a));
      }
    }
  }

  const Table& mc = table(r, "monte_carlo");
  double worst_z = 0.0;
  for (std::size_t i = 0; i < mc.rows.size(); ++i) worst_z = std::max(worst_z, std::abs(at(mc, i, "z_score")));
  const Table& s = table(r, "summary");
  const std::size_t mid = row_for(s, middle);
  const double reduction = at(s, mid, "variance_reduction"), suppression = at(s, mid, "low_frequency_suppression");
  const bool ok = worst_route <= 1e-8 && mc.rows.size() >= 5 && worst_z <= 3.0 && reduction >= 0.75 && reduction <= 0.85 &&
                  suppression >= 20.0;
  return {ok, "routes differ by " + fmt(worst_route) + "; " + std::to_string(mc.rows.size()) +
                  " Monte Carlo points, max |z| " + fmt(worst_z, 3) + "; middle pump reduction " +
                  fmt(100 * reduction, 3) + "%, suppression " + fmt(suppression, 3) + "x"};
}

Outcome gillespie_oracle() {
  const Scenario sc = config("gillespie-mesoscopic");
  const RunResult r = run_scenario(sc);
  const Table& m = table(r, "moments");
  const std::size_t n_max = 10000;
  std::vector<double> times;
  for (std::size_t i = 0; i < m.rows.size(); ++i) times.push_back(at(m, i, "time"));
  const auto exact = evolve(coherent_distribution(sc.initial->n_bar, n_max), sc.loss, NoGain{}, sc.numerics.t_final, times, 1e-10);
  double worst_mean = 0.0, worst_var = 0.0, first_bad = -1.0;
  for (std::size_t i = 0; i < times.size(); ++i) {
    const Moments e = moments(exact.snapshots[i].p);
    const double zm = std::abs(at(m, i, "mean") - e.mean) / at(m, i, "mean_stderr");
    const double zv = std::abs(at(m, i, "variance") - e.variance) / at(m, i, "variance_stderr");
    if ((zm > 3.0 || zv > 3.0) && first_bad < 0) first_bad = times[i];
    worst_mean = std::max(worst_mean, zm);
    worst_var = std::max(worst_var, zv);
  }
  std::string detail = std::to_string(sc.numerics.trajectories) + " trajectories at " + std::to_string(times.size()) +
                       " times: max |z| mean " + fmt(worst_mean, 3) + ", variance " + fmt(worst_var, 3);
  if (first_bad >= 0) detail += "; first outside 3 SE at t = " + fmt(first_bad);
  return {first_bad < 0, detail};
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Acceptance criteria for fockbench"};
  std::vector<int> only, expect_fail;
  app.add_option("--only", only, "Run only these criteria");
  app.add_option("--expect-fail", expect_fail, "Criteria known to fail; exit 0 when exactly these fail");
  CLI11_PARSE(app, argc, argv);

  const std::vector<Criterion> criteria{
      {1, "coherence preservation", 5, coherence_preserved},
      {2, "mesoscopic decay to a near-Fock state", 300, mesoscopic_decay},
      {3, "macroscopic transient variance reduction", 60, macroscopic_cumulant},
      {4, "steady state equals the generator null vector", 30, steady_state_oracle},
      {5, "Fock laser plateau and width", 600, fock_laser},
      {6, "Lindblad cross-validation", 600, lindblad_cross_validation},
      {7, "class-B spectrum consistency", 600, classb_spectrum},
      {8, "jump-process oracle", 600, gillespie_oracle},
  };

  std::set<int> failed;
  for (const auto& c : criteria) {
    if (!only.empty() && std::find(only.begin(), only.end(), c.id) == only.end()) continue;
    const auto start = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = c.check();
    } catch (const std::exception& e) {
      o = {false, std::string("error: ") + e.what()};
    }
    const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    const bool in_time = wall <= c.budget_seconds;
    const bool pass = o.pass && in_time;
    if (!pass) failed.insert(c.id);
    std::printf("criterion %d %s: %s (%s; %.1f s of %.0f s)\n", c.id, c.title, pass ? "PASS" : "FAIL", o.detail.c_str(), wall,
                c.budget_seconds);
    std::fflush(stdout);
  }

  std::set<int> expected;
  for (int id : expect_fail) {
    if (only.empty() || std::find(only.begin(), only.end(), id) != only.end()) expected.insert(id);
  }
  if (failed != expected) {
    if (!expected.empty()) std::printf("failing criteria differ from the expected set\n");
    return 1;
  }
  return 0;
}
