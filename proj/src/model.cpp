#include "fockbench/model.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <math.h>
#include <sstream>

#include "fockbench/errors.hpp"

// Boost 1.74's pchip calls isnan unqualified; <math.h> above makes it visible.
#include <boost/math/interpolators/pchip.hpp>

namespace fockbench {

namespace detail {
class MonotoneCubic {
 public:
  MonotoneCubic(std::vector<double> x, std::vector<double> y) : impl_(std::move(x), std::move(y)) {}
  double operator()(double x) const { return impl_(x); }
  double prime(double x) const { return impl_.prime(x); }

 private:
  boost::math::interpolators::pchip<std::vector<double>> impl_;
};
}  // namespace detail

namespace {

constexpr int kMirrorGridPoints = 100000;
constexpr double kMirrorHalfSpan = 50.0;  // in units of gamma
constexpr double kTransmissionSlack = 1e-12;

std::string fmt_double(double x) {
  std::ostringstream os;
  os.precision(17);
  os << x;
  return os.str();
}

void require(bool ok, const std::string& message) {
  if (!ok) throw ModelError(message);
}

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

}  // namespace

void validate(const KerrCavitySpec& c) {
  require(std::isfinite(c.omega0) && c.omega0 > 0, "cavity.omega0 must be > 0");
  require(std::isfinite(c.beta), "cavity.beta must be finite");
  require(std::isfinite(c.v) && c.v > 0, "cavity.v must be > 0");
  require(std::isfinite(c.L_c) && c.L_c > 0, "cavity.L_c must be > 0");
  require(std::isfinite(c.kappa_bg) && c.kappa_bg >= 0, "cavity.kappa_bg must be >= 0");
}

double kerr_transition_frequency(const KerrCavitySpec& cavity, long long n) {
  if (n < 1) throw ModelError("kerr_transition_frequency: n must be >= 1 (no transition below the vacuum)");
  return cavity.omega0 * (1.0 + 2.0 * cavity.beta * static_cast<double>(n));
}

double kerr_detuning(const KerrCavitySpec& cavity, double omega_ref, double n) {
  return (cavity.omega0 - omega_ref) + 2.0 * cavity.beta * cavity.omega0 * n;
}

double mirror_rate_scale(const KerrCavitySpec& cavity) { return cavity.v / (2.0 * cavity.L_c); }

double FanoMirrorSpec::cross_coefficient() const {
  return phase ? std::cos(*phase) : static_cast<double>(parity_sign);
}

FanoMirror::FanoMirror(const FanoMirrorSpec& spec) : spec_(spec) {
  require(std::isfinite(spec.omega_d), "mirror.omega_d must be finite");
  require(std::isfinite(spec.gamma) && spec.gamma > 0, "mirror.gamma must be > 0");
  require(std::isfinite(spec.t_d) && spec.t_d >= 0 && spec.t_d <= 1, "mirror.t_d must lie in [0, 1]");
  require(std::isfinite(spec.r_d) && spec.r_d >= 0 && spec.r_d <= 1, "mirror.r_d must lie in [0, 1]");
  require(spec.parity_sign == 1 || spec.parity_sign == -1, "mirror.parity_sign must be +1 or -1");
  if (spec.phase) require(std::isfinite(*spec.phase), "mirror.phase must be finite");

  const double span = kMirrorHalfSpan * spec.gamma;
  for (int i = 0; i < kMirrorGridPoints; ++i) {
    const double delta = -span + 2.0 * span * i / (kMirrorGridPoints - 1);
    const double T = transmission_at(delta);
    if (!(T >= 0.0 && T <= 1.0 + kTransmissionSlack)) {
      throw ModelError("mirror transmission leaves [0, 1] at omega - omega_d = " + fmt_double(delta) +
                       " (T = " + fmt_double(T) + "); reduce t_d or r_d");
    }
  }
}

// Numerator written as a sum of squares so the transmission zero is resolved
// without cancellation.
double FanoMirror::transmission_at(double delta) const {
  const double c = spec_.cross_coefficient();
  const double hg = 0.5 * spec_.gamma;
  const double lin = spec_.t_d * delta + c * spec_.r_d * hg;
  const double num = lin * lin + (1.0 - c * c) * spec_.r_d * spec_.r_d * hg * hg;
  return num / (delta * delta + hg * hg);
}

double FanoMirror::slope_at(double delta) const {
  const double c = spec_.cross_coefficient();
  const double hg = 0.5 * spec_.gamma;
  const double lin = spec_.t_d * delta + c * spec_.r_d * hg;
  const double num = lin * lin + (1.0 - c * c) * spec_.r_d * spec_.r_d * hg * hg;
  const double den = delta * delta + hg * hg;
  const double dnum = 2.0 * spec_.t_d * lin;
  return (dnum * den - num * 2.0 * delta) / (den * den);
}

double FanoMirror::curvature_at(double delta) const {
  const double c = spec_.cross_coefficient();
  const double hg = 0.5 * spec_.gamma;
  const double lin = spec_.t_d * delta + c * spec_.r_d * hg;
  const double num = lin * lin + (1.0 - c * c) * spec_.r_d * spec_.r_d * hg * hg;
  const double den = delta * delta + hg * hg;
  const double dnum = 2.0 * spec_.t_d * lin;
  const double ddnum = 2.0 * spec_.t_d * spec_.t_d;
  const double dden = 2.0 * delta;
  return (ddnum * den - num * 2.0) / (den * den) - 2.0 * dden * (dnum * den - num * dden) / (den * den * den);
}

double fano_transmission(const FanoMirror& mirror, double omega) { return mirror.transmission(omega); }

LossModel LossModel::linear(double kappa) {
  require(std::isfinite(kappa) && kappa >= 0, "linear loss kappa must be >= 0");
  return LossModel(LinearLoss{kappa});
}

LossModel LossModel::fano_kerr(const KerrCavitySpec& cavity, const FanoMirrorSpec& mirror) {
  validate(cavity);
  return LossModel(FanoKerrLoss{cavity, FanoMirror(mirror)});
}

LossModel LossModel::tabulated(const KerrCavitySpec& cavity, std::vector<double> omega,
                               std::vector<double> transmission) {
  validate(cavity);
  require(omega.size() == transmission.size(), "tabulated loss: omega and T must have equal length");
  require(omega.size() >= 4, "tabulated loss: at least four grid points are required");
  for (std::size_t i = 0; i < omega.size(); ++i) {
    require(std::isfinite(omega[i]), "tabulated loss: omega values must be finite");
    require(transmission[i] >= 0 && transmission[i] <= 1, "tabulated loss: T values must lie in [0, 1]");
    if (i > 0) require(omega[i] > omega[i - 1], "tabulated loss: omega grid must be strictly increasing");
  }
  std::vector<double> x = omega, y = transmission;
  auto interp = std::make_shared<const detail::MonotoneCubic>(std::move(x), std::move(y));
  return LossModel(TabulatedLoss{cavity, std::move(omega), std::move(transmission), std::move(interp)});
}

LossModel::Kind LossModel::kind() const noexcept {
  switch (model_.index()) {
    case 0: return Kind::linear;
    case 1: return Kind::fano_kerr;
    default: return Kind::tabulated;
  }
}

const KerrCavitySpec* LossModel::cavity() const noexcept {
  if (auto* f = std::get_if<FanoKerrLoss>(&model_)) return &f->cavity;
  if (auto* t = std::get_if<TabulatedLoss>(&model_)) return &t->cavity;
  return nullptr;
}

const FanoMirror* LossModel::mirror() const noexcept {
  if (auto* f = std::get_if<FanoKerrLoss>(&model_)) return &f->mirror;
  return nullptr;
}

double LossModel::tabulated_omega(const TabulatedLoss& tab, double n) const {
  const double w = tab.cavity.omega0 * (1.0 + 2.0 * tab.cavity.beta * n);
  if (!(w >= tab.omega.front() && w <= tab.omega.back())) {
    throw ModelError("tabulated loss evaluated outside its grid at n = " + fmt_double(n) +
                     ", omega(n) = " + fmt_double(w) + " (grid spans " + fmt_double(tab.omega.front()) +
                     " .. " + fmt_double(tab.omega.back()) + ")");
  }
  return w;
}

double LossModel::per_photon(double n) const {
  return std::visit(
      overloaded{
          [](const LinearLoss& l) { return l.kappa; },
          [n](const FanoKerrLoss& f) {
            const double d = kerr_detuning(f.cavity, f.mirror.spec().omega_d, n);
            return mirror_rate_scale(f.cavity) * f.mirror.transmission_at(d) + f.cavity.kappa_bg;
          },
          [this, n](const TabulatedLoss& t) {
            return mirror_rate_scale(t.cavity) * (*t.interpolant)(tabulated_omega(t, n)) + t.cavity.kappa_bg;
          },
      },
      model_);
}

double LossModel::per_photon_derivative(double n) const {
  return std::visit(
      overloaded{
          [](const LinearLoss&) { return 0.0; },
          [n](const FanoKerrLoss& f) {
            const double d = kerr_detuning(f.cavity, f.mirror.spec().omega_d, n);
            const double shift = 2.0 * f.cavity.beta * f.cavity.omega0;
            return mirror_rate_scale(f.cavity) * f.mirror.slope_at(d) * shift;
          },
          [this, n](const TabulatedLoss& t) {
            const double shift = 2.0 * t.cavity.beta * t.cavity.omega0;
            return mirror_rate_scale(t.cavity) * t.interpolant->prime(tabulated_omega(t, n)) * shift;
          },
      },
      model_);
}

double LossModel::per_photon_curvature(double n) const {
  return std::visit(
      overloaded{
          [](const LinearLoss&) { return 0.0; },
          [n](const FanoKerrLoss& f) {
            const double d = kerr_detuning(f.cavity, f.mirror.spec().omega_d, n);
            const double shift = 2.0 * f.cavity.beta * f.cavity.omega0;
            return mirror_rate_scale(f.cavity) * f.mirror.curvature_at(d) * shift * shift;
          },
          // The interpolant is only C1; a centered difference of its slope is
          // used where a curvature is needed (Jacobians only).
          [this, n](const TabulatedLoss& t) {
            const double shift = 2.0 * t.cavity.beta * t.cavity.omega0;
            const double w = tabulated_omega(t, n);
            auto it = std::upper_bound(t.omega.begin(), t.omega.end(), w);
            const std::size_t hi = std::min<std::size_t>(it - t.omega.begin(), t.omega.size() - 1);
            const std::size_t lo = hi == 0 ? 0 : hi - 1;
            const double h = 1e-3 * (t.omega[hi] - t.omega[lo]);
            const double a = std::max(t.omega.front(), w - h), b = std::min(t.omega.back(), w + h);
            if (!(b > a)) return 0.0;
            const double d2 = (t.interpolant->prime(b) - t.interpolant->prime(a)) / (b - a);
            return mirror_rate_scale(t.cavity) * d2 * shift * shift;
          },
      },
      model_);
}

double LossModel::rate(double n) const {
  if (!(n >= 0)) throw ModelError("loss rate requested at negative photon number " + fmt_double(n));
  if (n == 0) return 0.0;
  return n * per_photon(n);
}

double LossModel::derivative(double n) const {
  if (!(n >= 0)) throw ModelError("loss derivative requested at negative photon number " + fmt_double(n));
  return per_photon(n) + n * per_photon_derivative(n);
}

double LossModel::second_derivative(double n) const {
  return 2.0 * per_photon_derivative(n) + n * per_photon_curvature(n);
}

double loss_rate(const LossModel& loss, double n) { return loss.rate(n); }
double loss_derivative(const LossModel& loss, double n) { return loss.derivative(n); }

void validate(const GainModel& gain) {
  std::visit(overloaded{
                 [](const NoGain&) {},
                 [](const SaturableGain& g) {
                   require(std::isfinite(g.A) && g.A >= 0, "gain.A must be >= 0");
                   require(!std::isnan(g.n_s) && g.n_s > 0, "gain.n_s must be > 0");
                 },
                 [](const ClassBGain& g) {
                   require(std::isfinite(g.R_sp) && g.R_sp >= 0, "gain.R_sp must be >= 0");
                   require(std::isfinite(g.Lambda) && g.Lambda >= 0, "gain.Lambda must be >= 0");
                   require(std::isfinite(g.gamma_par) && g.gamma_par >= 0, "gain.gamma_par must be >= 0");
                 },
             },
             gain);
}

std::string gain_kind_name(const GainModel& gain) {
  switch (gain.index()) {
    case 0: return "none";
    case 1: return "saturable";
    default: return "classB";
  }
}

double gain_rate(const SaturableGain& g, double n) {
  if (n <= 0) return 0.0;
  if (std::isinf(g.n_s)) return g.A * n;
  return g.A * n / (1.0 + n / g.n_s);
}

double gain_rate(const GainModel& gain, double n) {
  if (std::holds_alternative<NoGain>(gain)) return 0.0;
  if (auto* s = std::get_if<SaturableGain>(&gain)) return gain_rate(*s, n);
  throw ModelError("class-B gain has no birth-death rate; use the class-B Langevin engine");
}

}  // namespace fockbench
