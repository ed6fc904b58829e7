#include "fockbench/birth_death.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <sstream>

#include "fockbench/errors.hpp"

namespace fockbench {

namespace {

constexpr double kClampFloor = -1e-14;
constexpr double kTailLimit = 1e-8;
constexpr double kWallLimit = 1e-12;
constexpr double kCaptureLimit = 1e-9;  // above the rounding of a 1e4-term sum
constexpr double kMassSlack = 1e-8;

std::string describe(double x) {
  std::ostringstream os;
  os.precision(10);
  os << x;
  return os.str();
}

void check_tail(const std::vector<double>& p, double t) {
  const double tail = tail_mass(p);
  if (tail >= kTailLimit) {
    throw TruncationError("probability mass " + describe(tail) + " above 0.95 n_max at t = " + describe(t) +
                          "; increase n_max (currently " + std::to_string(p.size() - 1) + ")");
  }
}

void require_captured(const std::vector<double>& p, const char* kind) {
  const double missing = 1.0 - std::accumulate(p.begin(), p.end(), 0.0);
  if (missing > kCaptureLimit) {
    throw TruncationError(std::string(kind) + " state loses mass " + describe(missing) + " above n_max = " +
                          std::to_string(p.size() - 1) + "; increase n_max");
  }
}

void check_mass(const std::vector<double>& p, double t) {
  const double total = std::accumulate(p.begin(), p.end(), 0.0);
  if (!(std::abs(total - 1.0) <= kMassSlack)) {
    throw NumericError("total probability drifted to " + describe(total) + " at t = " + describe(t));
  }
}

}  // namespace

PhotonDistribution vacuum_distribution(std::size_t n_max) { return fock_distribution(0, n_max); }

PhotonDistribution fock_distribution(std::size_t n, std::size_t n_max) {
  if (n > n_max) throw TruncationError("Fock state |" + std::to_string(n) + "> exceeds n_max");
  PhotonDistribution d;
  d.p.assign(n_max + 1, 0.0);
  d.p[n] = 1.0;
  return d;
}

PhotonDistribution coherent_distribution(double n_bar, std::size_t n_max) {
  if (!(n_bar >= 0) || !std::isfinite(n_bar)) throw ModelError("coherent state mean must be >= 0");
  PhotonDistribution d;
  d.p.assign(n_max + 1, 0.0);
  if (n_bar == 0) {
    d.p[0] = 1.0;
    return d;
  }
  const double log_mean = std::log(n_bar);
  for (std::size_t n = 0; n <= n_max; ++n) {
    const double k = static_cast<double>(n);
    d.p[n] = std::exp(k * log_mean - n_bar - std::lgamma(k + 1.0));
  }
  require_captured(d.p, "coherent");
  return d;
}

PhotonDistribution thermal_distribution(double n_bar, std::size_t n_max) {
  if (!(n_bar >= 0) || !std::isfinite(n_bar)) throw ModelError("thermal state mean must be >= 0");
  PhotonDistribution d;
  d.p.assign(n_max + 1, 0.0);
  const double ratio = n_bar / (1.0 + n_bar);
  double value = 1.0 / (1.0 + n_bar);
  for (std::size_t n = 0; n <= n_max; ++n) {
    d.p[n] = value;
    value *= ratio;
  }
  require_captured(d.p, "thermal");
  return d;
}

Moments moments(const std::vector<double>& p) {
  double total = 0.0, first = 0.0;
  for (std::size_t n = 0; n < p.size(); ++n) {
    total += p[n];
    first += static_cast<double>(n) * p[n];
  }
  Moments m;
  if (!(total > 0)) return m;
  m.mean = first / total;
  double second = 0.0;
  for (std::size_t n = 0; n < p.size(); ++n) {
    const double d = static_cast<double>(n) - m.mean;
    second += d * d * p[n];
  }
  m.variance = second / total;
  return m;
}

double tail_mass(const std::vector<double>& p) {
  if (p.empty()) return 0.0;
  const double cut = 0.95 * static_cast<double>(p.size() - 1);
  double tail = 0.0;
  for (std::size_t n = p.size(); n-- > 0;) {
    if (static_cast<double>(n) <= cut) break;
    tail += p[n];
  }
  return tail;
}

double MomentTrace::fano(std::size_t i) const {
  return mean[i] > 0 ? variance[i] / mean[i] : std::numeric_limits<double>::quiet_NaN();
}

void MomentTrace::push(double t, const Moments& m) {
  times.push_back(t);
  mean.push_back(m.mean);
  variance.push_back(m.variance);
}

BirthDeathGenerator::BirthDeathGenerator(const LossModel& loss, const GainModel& gain, std::size_t n_max)
    : up_(n_max + 1, 0.0), down_(n_max + 1, 0.0), diag_(n_max + 1, 0.0), scratch_(n_max + 1, 0.0) {
  for (std::size_t n = 0; n <= n_max; ++n) {
    const double k = static_cast<double>(n);
    down_[n] = n == 0 ? 0.0 : loss.rate(k);
    up_[n] = n == n_max ? 0.0 : gain_rate(gain, k + 1.0);
    if (!std::isfinite(down_[n]) || !std::isfinite(up_[n]) || down_[n] < 0 || up_[n] < 0) {
      throw ModelError("rate overflow or negative rate at n = " + std::to_string(n));
    }
    diag_[n] = -(up_[n] + down_[n]);
  }
}

double BirthDeathGenerator::max_rate() const {
  double m = 0.0;
  for (double d : diag_) m = std::max(m, -d);
  return m;
}

void BirthDeathGenerator::apply(const Vector& y, Vector& out) const {
  const std::size_t n = size();
  out.resize(static_cast<Eigen::Index>(n));
  for (std::size_t i = 0; i < n; ++i) {
    double v = diag_[i] * y[i];
    if (i > 0) v += up_[i - 1] * y[i - 1];
    if (i + 1 < n) v += down_[i + 1] * y[i + 1];
    out[i] = v;
  }
}

// Thomas algorithm on (I - hg Q). The matrix is column diagonally dominant,
// so no pivoting is needed.
void BirthDeathGenerator::solve_shifted(double hg, const Vector& rhs, Vector& out) const {
  const std::size_t n = size();
  out.resize(static_cast<Eigen::Index>(n));
  std::vector<double>& c = scratch_;
  double denom = 1.0 - hg * diag_[0];
  c[0] = n > 1 ? -hg * down_[1] / denom : 0.0;
  out[0] = rhs[0] / denom;
  for (std::size_t i = 1; i < n; ++i) {
    const double lower = -hg * up_[i - 1];
    denom = (1.0 - hg * diag_[i]) - lower * c[i - 1];
    c[i] = i + 1 < n ? -hg * down_[i + 1] / denom : 0.0;
    out[i] = (rhs[i] - lower * out[i - 1]) / denom;
  }
  for (std::size_t i = n - 1; i-- > 0;) out[i] -= c[i] * out[i + 1];
}

bool BirthDeathGenerator::accept(Vector& y) const {
  for (Eigen::Index i = 0; i < y.size(); ++i) {
    if (y[i] < 0) {
      if (y[i] < kClampFloor) return false;
      y[i] = 0.0;
    }
  }
  return true;
}

EvolveResult evolve(const PhotonDistribution& dist0, const LossModel& loss, const GainModel& gain, double t_final,
                    const std::vector<double>& report_times, double rel_tol) {
  if (dist0.p.size() < 2) throw ModelError("distribution needs n_max >= 1");
  if (!(t_final > dist0.time)) throw ModelError("t_final must exceed the initial time");
  if (!(rel_tol >= 1e-12 && rel_tol <= 1e-3)) throw ModelError("rel_tol must lie in [1e-12, 1e-3]");
  if (std::holds_alternative<ClassBGain>(gain)) throw ModelError("birth-death evolution accepts no gain or saturable gain only");
  for (double p : dist0.p) {
    if (!(p >= kClampFloor)) throw ModelError("initial distribution has a negative entry");
  }
  check_mass(dist0.p, dist0.time);
  check_tail(dist0.p, dist0.time);

  std::vector<double> stops;
  for (double t : report_times) {
    if (!(t > dist0.time && t <= t_final)) throw ModelError("report time " + describe(t) + " outside (t0, t_final]");
    stops.push_back(t);
  }
  stops.push_back(t_final);
  std::sort(stops.begin(), stops.end());
  stops.erase(std::unique(stops.begin(), stops.end()), stops.end());

  BirthDeathGenerator q(loss, gain, dist0.n_max());
  SdirkOptions opt;
  opt.rel_tol = rel_tol;
  opt.abs_tol = 1e-7 * rel_tol;
  Sdirk4<BirthDeathGenerator> integrator(q, opt);

  Eigen::VectorXd y = Eigen::Map<const Eigen::VectorXd>(dist0.p.data(), static_cast<Eigen::Index>(dist0.p.size()));
  for (Eigen::Index i = 0; i < y.size(); ++i) y[i] = std::max(0.0, y[i]);

  EvolveResult result;
  result.trace.push(dist0.time, moments(dist0.p));
  std::vector<double> buffer(dist0.p.size());
  auto to_vector = [&](const Eigen::VectorXd& v) {
    Eigen::Map<Eigen::VectorXd>(buffer.data(), v.size()) = v;
    return buffer;
  };
  auto on_step = [&](double t, const Eigen::VectorXd& v) {
    const std::vector<double>& p = to_vector(v);
    check_tail(p, t);
    result.trace.push(t, moments(p));
  };
  auto on_stop = [&](double t, const Eigen::VectorXd& v) {
    PhotonDistribution d;
    d.p = to_vector(v);
    d.time = t;
    check_mass(d.p, t);
    result.snapshots.push_back(std::move(d));
  };
  result.stats = integrator.integrate(y, dist0.time, stops, on_stop, on_step);

  // Keep only the snapshots the caller asked for (t_final is always included).
  std::vector<PhotonDistribution> requested;
  std::vector<double> wanted = report_times;
  wanted.push_back(t_final);
  std::sort(wanted.begin(), wanted.end());
  wanted.erase(std::unique(wanted.begin(), wanted.end()), wanted.end());
  for (auto& s : result.snapshots) {
    if (std::binary_search(wanted.begin(), wanted.end(), s.time)) requested.push_back(std::move(s));
  }
  result.snapshots = std::move(requested);
  return result;
}

// Log-space partial sums locate the peak; the distribution is then rebuilt by
// the one-step ratio recursion outward from the peak, so neighbouring entries
// satisfy G(n) p(n-1) = L(n) p(n) to rounding.
PhotonDistribution steady_state(const LossModel& loss, const SaturableGain& gain, std::size_t n_max) {
  validate(GainModel{gain});
  if (n_max < 1) throw ModelError("steady state needs n_max >= 1");
  std::vector<double> G(n_max + 1, 0.0), L(n_max + 1, 0.0);
  std::size_t support_end = n_max;  // last n with p(n) > 0
  for (std::size_t m = 1; m <= n_max; ++m) {
    G[m] = gain_rate(gain, static_cast<double>(m));
    L[m] = loss.rate(static_cast<double>(m));
    if (!std::isfinite(G[m]) || !std::isfinite(L[m])) throw ModelError("rate overflow at n = " + std::to_string(m));
  }
  for (std::size_t m = 1; m <= n_max; ++m) {
    if (G[m] == 0.0) {
      support_end = m - 1;
      break;
    }
    if (!(L[m] > 0.0)) {
      throw ModelError("ill-posed steady state: loss vanishes at n = " + std::to_string(m) +
                       " while gain is positive");
    }
  }

  std::vector<double> logp(support_end + 1, 0.0);
  std::size_t peak = 0;
  for (std::size_t m = 1; m <= support_end; ++m) {
    logp[m] = logp[m - 1] + std::log(G[m]) - std::log(L[m]);
    if (logp[m] > logp[peak]) peak = m;
  }

  PhotonDistribution d;
  d.p.assign(n_max + 1, 0.0);
  d.p[peak] = 1.0;
  for (std::size_t m = peak + 1; m <= support_end; ++m) d.p[m] = d.p[m - 1] * (G[m] / L[m]);
  for (std::size_t m = peak; m >= 1; --m) d.p[m - 1] = d.p[m] * (L[m] / G[m]);
  const double total = std::accumulate(d.p.begin(), d.p.end(), 0.0);
  for (double& x : d.p) x /= total;
  d.time = std::numeric_limits<double>::infinity();
  // The product formula is exact on the truncated chain; it matches the
  // untruncated one only if the wall at n_max holds no weight.
  if (d.p.back() > kWallLimit) {
    throw TruncationError("stationary probability " + describe(d.p.back()) + " at n_max = " + std::to_string(n_max) +
                          "; increase n_max");
  }
  return d;
}

double steady_state_uncertainty(const LossModel& loss, const SaturableGain& gain, double n_bar) {
  if (!(n_bar >= 0)) throw ModelError("steady_state_uncertainty: n_bar must be >= 0");
  const double g = gain_rate(gain, n_bar + 1.0);
  const double l = loss.rate(n_bar + 1.0);
  if (!(g < l)) {
    throw ModelError("steady_state_uncertainty undefined: G(n+1) >= L(n+1) at n = " + describe(n_bar) +
                     " (equilibrium not locally stable)");
  }
  return 1.0 / std::sqrt(1.0 - g / l);
}

std::size_t suggest_n_max(double initial_mean, double initial_variance, const LossModel& loss,
                          const GainModel& gain) {
  double reach = initial_mean + 10.0 * std::sqrt(std::max(initial_variance, initial_mean));
  if (const auto* s = std::get_if<SaturableGain>(&gain)) {
    constexpr std::size_t kScanLimit = 2'000'000;
    for (std::size_t n = 1; n <= kScanLimit; ++n) {
      const double k = static_cast<double>(n);
      if (gain_rate(*s, k) > loss.rate(k)) reach = std::max(reach, k + 10.0 * std::sqrt(k));
    }
  }
  return static_cast<std::size_t>(std::ceil(2.0 * std::max(reach, 10.0)));
}

}  // namespace fockbench
