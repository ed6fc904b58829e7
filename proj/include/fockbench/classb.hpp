#pragma once

#include <array>
#include <complex>
#include <cstddef>
#include <cstdint>
#include <vector>

#include <Eigen/Core>

#include "fockbench/model.hpp"

namespace fockbench {

// Laser with slow inversion: photon number n and inversion S obey
//   dn/dt = R_sp S n - kappa(n) n (+ noise),  dS/dt = Lambda - gamma_par S - R_sp S n (+ noise).
struct ClassBSystem {
  ClassBGain gain;
  LossModel loss;
};

void validate(const ClassBSystem& sys);

struct OperatingPoint {
  double n_bar = 0.0;
  double S_bar = 0.0;
  double kappa_at = 0.0;        // kappa(n_bar)
  double kappa_prime_at = 0.0;  // d kappa / dn at n_bar
  bool stable = false;
  std::array<std::complex<double>, 2> eigenvalues{};
};

// Evaluates the inversion, loss slope and stability at a given photon number.
// Does not require gain-loss balance.
OperatingPoint make_operating_point(const ClassBSystem& sys, double n_bar);

// Every balance point R_sp Lambda / (gamma_par + R_sp n) = kappa(n) on [n_lo, n_hi].
std::vector<OperatingPoint> find_operating_points(const ClassBSystem& sys, double n_lo, double n_hi,
                                                  std::size_t grid_points);

// Linearized drift of (dn, dS).
Eigen::Matrix2d drift_matrix(const ClassBSystem& sys, const OperatingPoint& op);
// Noise covariance 2D of (F_n, F_S).
Eigen::Matrix2d diffusion_matrix(const ClassBSystem& sys, const OperatingPoint& op);

// Photon-number noise density, normalized so the variance is its integral over [0, inf).
double spectral_density(const ClassBSystem& sys, const OperatingPoint& op, double omega);
// Same quantity from its expanded rational form; used as an independent check.
double spectral_density_closed_form(const ClassBSystem& sys, const OperatingPoint& op, double omega);

struct NoiseSpectrum {
  std::vector<double> omega;
  std::vector<double> s_nn;
  double integrated_variance = 0.0;
};

// Samples the spectrum on omega_grid; throws ConsistencyError if the two
// evaluations disagree beyond 1e-8 relative anywhere.
NoiseSpectrum noise_spectrum(const ClassBSystem& sys, const OperatingPoint& op, const std::vector<double>& omega_grid);

struct VarianceIntegral {
  double variance = 0.0;
  double omega_cut = 0.0;
  double tail = 0.0;  // analytic contribution above omega_cut
};

VarianceIntegral photon_variance(const ClassBSystem& sys, const OperatingPoint& op, double rel_tol = 1e-6);

// Stationary covariance of the linearized pair; solves M C + C M^T + 2D = 0.
Eigen::Matrix2d stationary_covariance(const ClassBSystem& sys, const OperatingPoint& op);

// Ratio of the zero-frequency density with the loss slope switched off to the
// actual one: how much the sloped loss suppresses slow intensity noise.
double low_frequency_suppression(const ClassBSystem& sys, const OperatingPoint& op);

struct SdeEstimate {
  double variance = 0.0;
  double std_error = 0.0;
  std::size_t n_traj = 0;
  double burn_in = 0.0;
};

// Euler-Maruyama ensemble of the linearized Langevin pair. Each trajectory is
// burned in for ten relaxation times, then time-averaged; the standard error
// comes from the spread across trajectories.
SdeEstimate sde_monte_carlo(const ClassBSystem& sys, const OperatingPoint& op, double t_final, double dt,
                            std::size_t n_traj, std::uint64_t seed, unsigned threads = 0);

}  // namespace fockbench
