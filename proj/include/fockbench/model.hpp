#pragma once

#include <memory>
#include <optional>
#include <string>
#include <variant>
#include <vector>

namespace fockbench {

// Single-mode cavity with a Kerr medium filling it.
struct KerrCavitySpec {
  double omega0 = 0.0;    // bare mode frequency, rad/s
  double beta = 0.0;      // single-photon Kerr strength, dimensionless
  double v = 0.0;         // intracavity speed of light, m/s
  double L_c = 0.0;       // cavity length, m
  double kappa_bg = 0.0;  // background loss per photon, 1/s
};

void validate(const KerrCavitySpec& cavity);

// Photon-number-dependent transition frequency omega0 * (1 + 2 beta n), n >= 1.
double kerr_transition_frequency(const KerrCavitySpec& cavity, long long n);

// omega(n) - omega_ref for real n, evaluated without forming omega(n) first.
double kerr_detuning(const KerrCavitySpec& cavity, double omega_ref, double n);

// Round-trip escape scale v / (2 L_c).
double mirror_rate_scale(const KerrCavitySpec& cavity);

struct FanoMirrorSpec {
  double omega_d = 0.0;
  double gamma = 0.0;
  double t_d = 0.0;
  double r_d = 0.0;
  int parity_sign = +1;
  // When set, the cross term uses cos(phase) instead of parity_sign.
  std::optional<double> phase;

  double cross_coefficient() const;
};

// A mirror spec that passed construction checks. Evaluation helpers take the
// detuning from resonance, omega - omega_d.
class FanoMirror {
 public:
  explicit FanoMirror(const FanoMirrorSpec& spec);

  const FanoMirrorSpec& spec() const noexcept { return spec_; }
  double transmission(double omega) const { return transmission_at(omega - spec_.omega_d); }
  double transmission_at(double detuning) const;
  double slope_at(double detuning) const;
  double curvature_at(double detuning) const;

 private:
  FanoMirrorSpec spec_;
};

double fano_transmission(const FanoMirror& mirror, double omega);

struct LinearLoss {
  double kappa = 0.0;
};

struct FanoKerrLoss {
  KerrCavitySpec cavity;
  FanoMirror mirror;
};

namespace detail {
class MonotoneCubic;
}

struct TabulatedLoss {
  KerrCavitySpec cavity;
  std::vector<double> omega;
  std::vector<double> transmission;
  std::shared_ptr<const detail::MonotoneCubic> interpolant;
};

// Photon loss rate L(n) = n * kappa(n). All evaluations accept real n >= 0.
class LossModel {
 public:
  enum class Kind { linear, fano_kerr, tabulated };

  static LossModel linear(double kappa);
  static LossModel fano_kerr(const KerrCavitySpec& cavity, const FanoMirrorSpec& mirror);
  static LossModel tabulated(const KerrCavitySpec& cavity, std::vector<double> omega,
                             std::vector<double> transmission);

  Kind kind() const noexcept;
  const KerrCavitySpec* cavity() const noexcept;
  const FanoMirror* mirror() const noexcept;

  double rate(double n) const;
  double derivative(double n) const;
  double second_derivative(double n) const;

  // kappa(n) = L(n)/n, continued to n = 0 by its limit.
  double per_photon(double n) const;
  double per_photon_derivative(double n) const;
  double per_photon_curvature(double n) const;

 private:
  using Variant = std::variant<LinearLoss, FanoKerrLoss, TabulatedLoss>;
  explicit LossModel(Variant v) : model_(std::move(v)) {}
  double tabulated_omega(const TabulatedLoss& tab, double n) const;

  Variant model_;
};

double loss_rate(const LossModel& loss, double n);
double loss_derivative(const LossModel& loss, double n);

struct NoGain {};

struct SaturableGain {
  double A = 0.0;
  double n_s = 0.0;  // may be +infinity for unsaturated gain
};

struct ClassBGain {
  double R_sp = 0.0;
  double Lambda = 0.0;
  double gamma_par = 0.0;
};

using GainModel = std::variant<NoGain, SaturableGain, ClassBGain>;

void validate(const GainModel& gain);
std::string gain_kind_name(const GainModel& gain);

// G(n) = A n / (1 + n / n_s); the rate feeding p(n) from p(n - 1).
double gain_rate(const SaturableGain& gain, double n);
double gain_rate(const GainModel& gain, double n);

}  // namespace fockbench
