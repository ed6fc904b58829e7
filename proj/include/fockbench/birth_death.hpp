#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include <Eigen/Core>

#include "fockbench/model.hpp"
#include "fockbench/sdirk.hpp"

namespace fockbench {

// Probability mass p(0..n_max) at a given time.
struct PhotonDistribution {
  std::vector<double> p;
  double time = 0.0;

  std::size_t n_max() const { return p.empty() ? 0 : p.size() - 1; }
};

PhotonDistribution vacuum_distribution(std::size_t n_max);
PhotonDistribution fock_distribution(std::size_t n, std::size_t n_max);
// Coherent and thermal states throw TruncationError if more than 1e-9 of
// their mass lies above n_max.
PhotonDistribution coherent_distribution(double n_bar, std::size_t n_max);
PhotonDistribution thermal_distribution(double n_bar, std::size_t n_max);

struct Moments {
  double mean = 0.0;
  double variance = 0.0;
};

Moments moments(const std::vector<double>& p);

// Mass strictly above 0.95 n_max.
double tail_mass(const std::vector<double>& p);

struct MomentTrace {
  std::vector<double> times;
  std::vector<double> mean;
  std::vector<double> variance;
  // Filled by sampling estimators only.
  std::vector<double> mean_stderr;
  std::vector<double> variance_stderr;

  std::size_t size() const { return times.size(); }
  // NaN where the mean is not positive.
  double fano(std::size_t i) const;
  void push(double t, const Moments& m);
};

// Tridiagonal generator of the birth-death chain truncated at n_max. The
// diagonal is formed from the off-diagonals of its own column, so every column
// sums to exactly zero.
class BirthDeathGenerator {
 public:
  using Vector = Eigen::VectorXd;

  BirthDeathGenerator(const LossModel& loss, const GainModel& gain, std::size_t n_max);

  std::size_t size() const { return up_.size(); }
  // Rate of n -> n + 1 (zero at the truncation bound) and of n -> n - 1.
  double up(std::size_t n) const { return up_[n]; }
  double down(std::size_t n) const { return down_[n]; }
  double diagonal(std::size_t n) const { return diag_[n]; }
  double max_rate() const;

  void apply(const Vector& y, Vector& out) const;
  void solve_shifted(double hg, const Vector& rhs, Vector& out) const;
  // Clamps entries in [-1e-14, 0) to zero and rejects anything more negative.
  bool accept(Vector& y) const;

 private:
  std::vector<double> up_, down_, diag_;
  mutable std::vector<double> scratch_;
};

struct EvolveResult {
  std::vector<PhotonDistribution> snapshots;  // one per report time
  MomentTrace trace;                          // every accepted step
  SdirkStats stats;
};

// Integrates the photon-number master equation with loss and optional
// saturable gain. report_times outside (dist0.time, t_final] are rejected;
// t_final is always reported.
EvolveResult evolve(const PhotonDistribution& dist0, const LossModel& loss, const GainModel& gain,
                    double t_final, const std::vector<double>& report_times, double rel_tol = 1e-8);

// Exact stationary distribution of the chain truncated at n_max (product
// formula). Throws TruncationError if p(n_max) exceeds 1e-12. When gain beats
// loss above n_max the result is the metastable state confined by the loss
// barrier below the wall.
PhotonDistribution steady_state(const LossModel& loss, const SaturableGain& gain, std::size_t n_max);

// Linearized width (1 - G(n+1)/L(n+1))^(-1/2) around a mean photon number.
double steady_state_uncertainty(const LossModel& loss, const SaturableGain& gain, double n_bar);

// Twice the larger of n0 + 10 sqrt(n0) and the highest gain/loss crossing.
std::size_t suggest_n_max(double initial_mean, double initial_variance, const LossModel& loss,
                          const GainModel& gain);

struct GillespieOptions {
  std::uint64_t seed = 1;
  unsigned threads = 0;  // 0 selects the hardware concurrency
};

// Exact-event simulation of the jump process, reporting ensemble moments and
// their Monte Carlo standard errors at each report time.
MomentTrace gillespie_sample(const LossModel& loss, const GainModel& gain, long long n0,
                             const std::vector<double>& report_times, std::size_t n_traj,
                             const GillespieOptions& options);
// Same, with each trajectory's starting photon number drawn from initial.
MomentTrace gillespie_sample(const LossModel& loss, const GainModel& gain, const PhotonDistribution& initial,
                             const std::vector<double>& report_times, std::size_t n_traj,
                             const GillespieOptions& options);

}  // namespace fockbench
