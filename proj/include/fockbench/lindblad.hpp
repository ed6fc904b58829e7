#pragma once

#include <complex>
#include <cstddef>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "fockbench/model.hpp"

namespace fockbench {

// Cavity coupled to a fast-decaying mirror mode. Frequencies in rad/s, rates
// in 1/s, energy-decay convention throughout.
struct AdiabaticParams {
  KerrCavitySpec cavity;  // omega0 and beta drive the dynamics; v and L_c fix the Fano mapping
  double omega_d = 0.0;
  double gamma = 0.0;
  double kappa = 0.0;
  std::complex<double> lambda{0.0, 0.0};
};

// Throws below gamma = 20 kappa; returns a warning below 100 kappa.
std::vector<std::string> validate(const AdiabaticParams& params);

// Density matrix on the cavity Fock basis, or on cavity x mirror with the
// product index n * mirror_levels + m.
struct DensityMatrix {
  Eigen::MatrixXcd rho;
  std::size_t cavity_levels = 0;
  std::size_t mirror_levels = 1;
  double time = 0.0;

  std::size_t cavity_n_max() const { return cavity_levels - 1; }
};

DensityMatrix fock_density(std::size_t n, std::size_t n_max);
DensityMatrix thermal_density(double n_bar, std::size_t n_max);
// Pure coherent state with real amplitude sqrt(n_bar); rejects a truncated tail above 1e-12.
DensityMatrix coherent_density(double n_bar, std::size_t n_max);
DensityMatrix tensor_product(const DensityMatrix& cavity, const DensityMatrix& mirror);
DensityMatrix trace_out_mirror(const DensityMatrix& joint);

std::vector<double> populations(const DensityMatrix& single_mode);

struct DensityDiagnostics {
  double trace_error = 0.0;     // |tr rho - 1|
  double hermiticity = 0.0;     // max |rho - rho^dagger|
  double min_eigenvalue = 0.0;
  double max_offdiagonal = 0.0;
};

DensityDiagnostics diagnose(const DensityMatrix& state);

// L(n) from the eliminated mirror, indexed by n (entry 0 is L(0) = 0). Also
// cross-checks the values against the Fano-Kerr loss of model-core under the
// mirror identification and throws ConsistencyError on mismatch.
std::vector<double> effective_loss_rates(const AdiabaticParams& params, std::size_t n_max);

// The Fano-Kerr loss that the eliminated mirror reproduces:
// t_d = sqrt(kappa / s), r_d = 2 |lambda| / sqrt(gamma s), cross term cos(arg lambda),
// with s = v / (2 L_c).
LossModel equivalent_fano_loss(const AdiabaticParams& params);

// Single-mode master equation with the mirror adiabatically eliminated,
// including all coherences. Each coherence band is advanced by its exact
// propagator; rel_tol is validated but the result does not depend on it.
std::vector<DensityMatrix> adiabatic_evolve(const DensityMatrix& rho0, const AdiabaticParams& params,
                                            double t_final, const std::vector<double>& report_times,
                                            double rel_tol = 1e-8);

// Cavity + mirror Lindblad evolution with collective jump sqrt(kappa) a + sqrt(gamma) d.
// The returned states are the blocks of fixed total excitation number
// a^dagger a + d^dagger d, which the dynamics never mixes with the rest.
// Cavity and mirror populations are exact; coherences between different
// total excitation numbers are dropped (set to zero).
std::vector<DensityMatrix> two_mode_evolve(const DensityMatrix& rho0, const AdiabaticParams& params,
                                           double t_final, const std::vector<double>& report_times,
                                           double rel_tol = 1e-8);

}  // namespace fockbench
