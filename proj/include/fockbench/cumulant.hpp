#pragma once

#include <vector>

#include "fockbench/model.hpp"

namespace fockbench {

// Mean and variance of the photon number under the closed second-order
// cumulant equations.
struct CumulantState {
  double n_bar = 0.0;
  double var = 0.0;
  double time = 0.0;
  // False once sqrt(var) exceeds 0.3 n_bar or n_bar drops below one photon,
  // where the small-width closure is no longer trustworthy. A warning, not an error.
  bool valid = true;
};

// Width-to-mean ratio above which a state is flagged.
inline constexpr double kCumulantValidityRatio = 0.3;

// Integrates  d n/dt = -L(n),  d var/dt = L(n) - 2 L'(n) var  from state0 and
// returns the state at every report time (t_final is always included).
std::vector<CumulantState> evolve_cumulants(const CumulantState& state0, const LossModel& loss, double t_final,
                                            const std::vector<double>& report_times, double rel_tol = 1e-8);

// n L'(n) > L(n): the width shrinks faster than the mean.
bool condensation_condition(const LossModel& loss, double n);

}  // namespace fockbench
