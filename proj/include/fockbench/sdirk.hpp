#pragma once

// Adaptive L-stable SDIRK integrator (five stages, order 4, embedded order 3)
// for linear autonomous systems y' = A y whose shifted operator (I - h g A)
// can be inverted directly.
//
// The Problem type provides
//   using Vector = ...;                            // Eigen column vector
//   void apply(const Vector& y, Vector& out) const;  // out = A y
//   void solve_shifted(double hg, const Vector& rhs, Vector& out) const;
//   bool accept(Vector& y) const;  // may project a candidate step; false rejects it

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <limits>
#include <sstream>
#include <vector>

#include <Eigen/Core>

#include "fockbench/errors.hpp"

namespace fockbench {

struct SdirkOptions {
  double rel_tol = 1e-8;
  double abs_tol = 1e-14;
  double initial_step = 0.0;  // 0 picks one from the initial slope
  std::size_t max_steps = 2'000'000;
};

struct SdirkStats {
  std::size_t accepted = 0;
  std::size_t rejected = 0;
};

namespace sdirk_tableau {
inline constexpr double g = 0.25;
inline constexpr double a[5][4] = {
    {0, 0, 0, 0},
    {0.5, 0, 0, 0},
    {17.0 / 50.0, -1.0 / 25.0, 0, 0},
    {371.0 / 1360.0, -137.0 / 2720.0, 15.0 / 544.0, 0},
    {25.0 / 24.0, -49.0 / 48.0, 125.0 / 16.0, -85.0 / 12.0},
};
// b equals the last row (stiffly accurate); bhat is the embedded third-order weight set.
inline constexpr double b[5] = {25.0 / 24.0, -49.0 / 48.0, 125.0 / 16.0, -85.0 / 12.0, 0.25};
inline constexpr double bhat[5] = {59.0 / 48.0, -17.0 / 96.0, 225.0 / 32.0, -85.0 / 12.0, 0.0};
}  // namespace sdirk_tableau

template <class Problem>
class Sdirk4 {
 public:
  using Vector = typename Problem::Vector;
  using Callback = std::function<void(double, const Vector&)>;

  Sdirk4(const Problem& problem, SdirkOptions options) : problem_(problem), opt_(options) {}

  // Integrates from t0 to stop_times.back(), landing exactly on every entry of
  // stop_times (which must be sorted and > t0). on_stop fires at each stop
  // time, on_step after every accepted step.
  SdirkStats integrate(Vector& y, double t0, const std::vector<double>& stop_times, const Callback& on_stop,
                       const Callback& on_step = {}) {
    SdirkStats stats;
    if (stop_times.empty()) return stats;
    double t = t0;
    double h = opt_.initial_step > 0 ? opt_.initial_step : initial_step(y, stop_times.back() - t0);
    std::size_t next = 0;
    while (next < stop_times.size() && stop_times[next] <= t) {
      if (on_stop) on_stop(t, y);
      ++next;
    }
    Vector ynew(y.size()), err(y.size());
    bool last_rejected = false;
    while (next < stop_times.size()) {
      const double target = stop_times[next];
      bool hits_target = false;
      double step = h;
      if (t + step >= target || t + 1.01 * step >= target) {
        step = target - t;
        hits_target = true;
      }
      const double min_step = 16.0 * std::numeric_limits<double>::epsilon() * std::max(std::abs(t), std::abs(target));
      if (!(step > min_step)) {
        std::ostringstream os;
        os << "step size underflow at t = " << t << " (h = " << step << ")";
        throw NumericError(os.str());
      }
      if (stats.accepted + stats.rejected >= opt_.max_steps) {
        std::ostringstream os;
        os << "integrator exceeded " << opt_.max_steps << " steps at t = " << t;
        throw NumericError(os.str());
      }

      attempt(y, step, ynew, err);
      const double e = error_norm(err, y, ynew);
      const bool ok = std::isfinite(e) && e <= 1.0 && problem_.accept(ynew);
      if (ok) {
        ++stats.accepted;
        y.swap(ynew);
        t = hits_target ? target : t + step;
        if (on_step) on_step(t, y);
        if (hits_target) {
          if (on_stop) on_stop(t, y);
          ++next;
        }
        double fac = e > 0 ? 0.9 * std::pow(e, -0.25) : 5.0;
        fac = std::clamp(fac, 0.2, last_rejected ? 1.0 : 5.0);
        // A step shortened only to hit a stop time should not shrink the next one.
        h = hits_target ? std::max(h, step * fac) : step * fac;
        last_rejected = false;
      } else {
        ++stats.rejected;
        double fac = (std::isfinite(e) && e > 1.0) ? std::max(0.1, 0.9 * std::pow(e, -0.25)) : 0.25;
        h = step * fac;
        last_rejected = true;
      }
    }
    return stats;
  }

 private:
  void attempt(const Vector& y, double h, Vector& ynew, Vector& err) {
    using namespace sdirk_tableau;
    const double hg = h * g;
    for (int i = 0; i < 5; ++i) {
      rhs_ = y;
      for (int j = 0; j < i; ++j) rhs_ += (h * a[i][j]) * k_[j];
      problem_.solve_shifted(hg, rhs_, stage_);
      k_[i] = (stage_ - rhs_) / hg;
    }
    ynew = stage_;
    err.setZero(y.size());
    for (int j = 0; j < 5; ++j) err += (h * (b[j] - bhat[j])) * k_[j];
    // Filtering through the shifted inverse keeps the estimate bounded on stiff modes.
    problem_.solve_shifted(hg, err, rhs_);
    err = rhs_;
  }

  double error_norm(const Vector& err, const Vector& y0, const Vector& y1) const {
    double worst = 0.0;
    for (Eigen::Index i = 0; i < err.size(); ++i) {
      const double scale = opt_.abs_tol + opt_.rel_tol * std::max(std::abs(y0[i]), std::abs(y1[i]));
      worst = std::max(worst, std::abs(err[i]) / scale);
    }
    return worst;
  }

  double initial_step(const Vector& y, double span) const {
    Vector f(y.size());
    problem_.apply(y, f);
    double d0 = 0.0, d1 = 0.0;
    for (Eigen::Index i = 0; i < y.size(); ++i) {
      const double scale = opt_.abs_tol + opt_.rel_tol * std::abs(y[i]);
      d0 = std::max(d0, std::abs(y[i]) / scale);
      d1 = std::max(d1, std::abs(f[i]) / scale);
    }
    double h = (d1 > 0 && d0 > 0) ? 0.01 * d0 / d1 : 1e-6 * span;
    return std::clamp(h, 1e-12 * span, span);
  }

  const Problem& problem_;
  SdirkOptions opt_;
  Vector k_[5];
  Vector rhs_, stage_;
};

}  // namespace fockbench
