#include "fockbench/cumulant.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <limits>

#include <Eigen/Dense>

#include "fockbench/errors.hpp"

namespace fockbench {

namespace {

using Vec2 = Eigen::Vector2d;
using Mat2 = Eigen::Matrix2d;

Vec2 rhs(const LossModel& loss, const Vec2& x) {
  const double n = std::max(x[0], 0.0);
  const double L = loss.rate(n);
  return Vec2(-L, L - 2.0 * loss.derivative(n) * x[1]);
}

Mat2 jacobian(const LossModel& loss, const Vec2& x) {
  const double n = std::max(x[0], 0.0);
  const double Lp = loss.derivative(n);
  Mat2 J;
  J << -Lp, 0.0, Lp - 2.0 * loss.second_derivative(n) * x[1], -2.0 * Lp;
  return J;
}

std::string describe(double x) {
  std::ostringstream os;
  os.precision(10);
  os << x;
  return os.str();
}

CumulantState make_state(const Vec2& x, double t) {
  CumulantState s;
  s.n_bar = std::max(x[0], 0.0);
  s.var = std::max(x[1], 0.0);
  s.time = t;
  s.valid = s.n_bar >= 1.0 && std::sqrt(s.var) <= kCumulantValidityRatio * s.n_bar;
  return s;
}

// Shampine-Reichelt Rosenbrock pair (order 2 with an order-3 error estimate),
// L-stable, one Jacobian and one 2x2 factorization per step.
struct RosenbrockStep {
  Vec2 y_new;
  double error;
};

RosenbrockStep rosenbrock_step(const LossModel& loss, const Vec2& y, double h, double rel_tol, const Vec2& abs_tol) {
  static const double d = 1.0 / (2.0 + std::sqrt(2.0));
  static const double e32 = 6.0 + std::sqrt(2.0);
  const Vec2 f0 = rhs(loss, y);
  const Mat2 W = Mat2::Identity() - h * d * jacobian(loss, y);
  const Eigen::PartialPivLU<Mat2> lu(W);
  const Vec2 k1 = lu.solve(f0);
  const Vec2 f1 = rhs(loss, y + 0.5 * h * k1);
  const Vec2 k2 = lu.solve(Vec2(f1 - k1)) + k1;
  RosenbrockStep out;
  out.y_new = y + h * k2;
  const Vec2 f2 = rhs(loss, out.y_new);
  const Vec2 k3 = lu.solve(Vec2(f2 - e32 * (k2 - f1) - 2.0 * (k1 - f0)));
  const Vec2 err = (h / 6.0) * (k1 - 2.0 * k2 + k3);
  out.error = 0.0;
  for (int i = 0; i < 2; ++i) {
    const double scale = abs_tol[i] + rel_tol * std::max(std::abs(y[i]), std::abs(out.y_new[i]));
    out.error = std::max(out.error, std::abs(err[i]) / scale);
  }
  if (!out.y_new.allFinite()) out.error = std::numeric_limits<double>::infinity();
  return out;
}

}  // namespace

std::vector<CumulantState> evolve_cumulants(const CumulantState& state0, const LossModel& loss, double t_final,
                                            const std::vector<double>& report_times, double rel_tol) {
  if (!(state0.n_bar >= 0) || !std::isfinite(state0.n_bar)) throw ModelError("cumulant state: n_bar must be >= 0");
  if (!(state0.var >= 0) || !std::isfinite(state0.var)) throw ModelError("cumulant state: variance must be >= 0");
  if (!(t_final > state0.time)) throw ModelError("t_final must exceed the initial time");
  if (!(rel_tol >= 1e-12 && rel_tol <= 1e-3)) throw ModelError("rel_tol must lie in [1e-12, 1e-3]");

  std::vector<double> stops;
  for (double t : report_times) {
    if (!(t > state0.time && t <= t_final)) throw ModelError("report time " + describe(t) + " outside (t0, t_final]");
    stops.push_back(t);
  }
  stops.push_back(t_final);
  std::sort(stops.begin(), stops.end());
  stops.erase(std::unique(stops.begin(), stops.end()), stops.end());

  Vec2 y(state0.n_bar, state0.var);
  const Vec2 abs_tol = Vec2::Constant(1e-6 * rel_tol * std::max({state0.n_bar, state0.var, 1.0}));
  const double span = t_final - state0.time;
  double h = std::min(span, 1e-3 / (std::abs(loss.derivative(state0.n_bar)) + 1.0 / span));
  double t = state0.time;

  std::vector<CumulantState> out;
  out.reserve(stops.size());
  std::size_t next = 0, steps = 0;
  bool last_rejected = false;
  while (next < stops.size()) {
    if (++steps > 50'000'000) throw NumericError("cumulant integration exceeded its step budget");
    const double target = stops[next];
    const bool hits = t + 1.01 * h >= target;
    const double step = hits ? target - t : h;
    if (!(step > 1e-14 * std::max(std::abs(t), span))) {
      throw NumericError("cumulant integration step size underflow at t = " + describe(t));
    }
    const RosenbrockStep r = rosenbrock_step(loss, y, step, rel_tol, abs_tol);
    if (r.error <= 1.0) {
      y = r.y_new;
      t = hits ? target : t + step;
      if (y[1] < -1e-9 * std::max(y[0], 1.0)) {
        throw NumericError("variance became negative (" + describe(y[1]) + ") at t = " + describe(t));
      }
      if (hits) {
        out.push_back(make_state(y, t));
        ++next;
      }
      const double fac = std::clamp(r.error > 0 ? 0.9 * std::pow(r.error, -1.0 / 3.0) : 5.0, 0.2,
                                    last_rejected ? 1.0 : 5.0);
      h = hits ? std::max(h, step * fac) : step * fac;
      last_rejected = false;
    } else {
      const double fac = std::isfinite(r.error) ? std::max(0.1, 0.9 * std::pow(r.error, -1.0 / 3.0)) : 0.25;
      h = step * fac;
      last_rejected = true;
    }
  }
  return out;
}

bool condensation_condition(const LossModel& loss, double n) {
  if (!(n > 0)) throw ModelError("condensation_condition needs n > 0");
  return n * loss.derivative(n) > loss.rate(n);
}

}  // namespace fockbench
