#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <limits>
#include <random>
#include <thread>

#include "fockbench/birth_death.hpp"
#include "fockbench/errors.hpp"
#include "fockbench/parallel.hpp"

namespace fockbench {

namespace {

// Rates for small photon numbers are cached; larger ones are evaluated on demand.
class RateTable {
 public:
  RateTable(const LossModel& loss, const GainModel& gain, std::size_t cached)
      : loss_(loss), gain_(gain), up_(cached), down_(cached) {
    for (std::size_t n = 0; n < cached; ++n) {
      up_[n] = gain_rate(gain, static_cast<double>(n) + 1.0);
      down_[n] = loss.rate(static_cast<double>(n));
      if (!std::isfinite(up_[n]) || !std::isfinite(down_[n])) {
        throw ModelError("rate overflow at n = " + std::to_string(n));
      }
    }
  }

  void rates(long long n, double& up, double& down) const {
    if (static_cast<std::size_t>(n) < up_.size()) {
      up = up_[n];
      down = down_[n];
      return;
    }
    up = gain_rate(gain_, static_cast<double>(n) + 1.0);
    down = loss_.rate(static_cast<double>(n));
    if (!std::isfinite(up) || !std::isfinite(down)) throw ModelError("rate overflow at n = " + std::to_string(n));
  }

 private:
  const LossModel& loss_;
  const GainModel& gain_;
  std::vector<double> up_, down_;
};

// Uniform on (0, 1].
double open_unit(std::mt19937_64& rng) { return (static_cast<double>(rng() >> 11) + 1.0) * 0x1.0p-53; }

void run_trajectory(const RateTable& table, long long n0, const std::vector<double>& times, std::mt19937_64& rng,
                    std::int64_t* out) {
  long long n = n0;
  double t = 0.0;
  std::size_t k = 0;
  while (k < times.size()) {
    double up, down;
    table.rates(n, up, down);
    const double total = up + down;
    const double wait = total > 0 ? -std::log(open_unit(rng)) / total : std::numeric_limits<double>::infinity();
    const double next = t + wait;
    while (k < times.size() && times[k] < next) out[k++] = n;
    if (k == times.size()) break;
    t = next;
    if (open_unit(rng) * total <= up) {
      ++n;
    } else {
      --n;
    }
  }
}

// Runs n_traj trajectories; draw_start picks each starting photon number from
// the trajectory's own generator so results do not depend on scheduling.
template <class DrawStart>
MomentTrace sample(const LossModel& loss, const GainModel& gain, std::size_t cache_hint,
                   const std::vector<double>& times, std::size_t n_traj, const GillespieOptions& options,
                   DrawStart draw_start) {
  if (n_traj < 1) throw ModelError("gillespie_sample: n_traj must be >= 1");
  if (std::holds_alternative<ClassBGain>(gain)) throw ModelError("jump-process sampling accepts no gain or saturable gain only");
  if (!std::is_sorted(times.begin(), times.end())) throw ModelError("report times must be sorted");
  for (double t : times) {
    if (!(t >= 0) || !std::isfinite(t)) throw ModelError("report times must be finite and >= 0");
  }

  const RateTable table(loss, gain, std::max<std::size_t>(1024, 2 * cache_hint + 64));
  const std::size_t n_times = times.size();
  std::vector<std::int64_t> samples(n_traj * n_times, 0);

  parallel_for(n_traj, options.threads, [&](std::size_t i) {
    std::seed_seq seq{static_cast<std::uint32_t>(options.seed), static_cast<std::uint32_t>(options.seed >> 32),
                      static_cast<std::uint32_t>(i), static_cast<std::uint32_t>(static_cast<std::uint64_t>(i) >> 32)};
    std::mt19937_64 rng(seq);
    const long long n0 = draw_start(rng);
    run_trajectory(table, n0, times, rng, samples.data() + i * n_times);
  });

  MomentTrace trace;
  const double N = static_cast<double>(n_traj);
  for (std::size_t k = 0; k < n_times; ++k) {
    double sum = 0.0;
    for (std::size_t i = 0; i < n_traj; ++i) sum += static_cast<double>(samples[i * n_times + k]);
    const double mean = sum / N;
    double m2 = 0.0, m4 = 0.0;
    for (std::size_t i = 0; i < n_traj; ++i) {
      const double d = static_cast<double>(samples[i * n_times + k]) - mean;
      m2 += d * d;
      m4 += d * d * d * d;
    }
    m2 /= N;
    m4 /= N;
    const double var = n_traj > 1 ? m2 * N / (N - 1.0) : 0.0;
    trace.times.push_back(times[k]);
    trace.mean.push_back(mean);
    trace.variance.push_back(var);
    trace.mean_stderr.push_back(std::sqrt(var / N));
    // Standard error of the sample variance from the fourth central moment.
    const double spread = n_traj > 3 ? m4 - var * var * (N - 3.0) / (N - 1.0) : 0.0;
    trace.variance_stderr.push_back(std::sqrt(std::max(spread, 0.0) / N));
  }
  return trace;
}

}  // namespace

MomentTrace gillespie_sample(const LossModel& loss, const GainModel& gain, long long n0,
                             const std::vector<double>& report_times, std::size_t n_traj,
                             const GillespieOptions& options) {
  if (n0 < 0) throw ModelError("gillespie_sample: n0 must be >= 0");
  return sample(loss, gain, static_cast<std::size_t>(n0), report_times, n_traj, options,
                [n0](std::mt19937_64&) { return n0; });
}

MomentTrace gillespie_sample(const LossModel& loss, const GainModel& gain, const PhotonDistribution& initial,
                             const std::vector<double>& report_times, std::size_t n_traj,
                             const GillespieOptions& options) {
  if (initial.p.empty()) throw ModelError("gillespie_sample: empty initial distribution");
  std::vector<double> cdf(initial.p.size());
  double acc = 0.0;
  for (std::size_t n = 0; n < cdf.size(); ++n) {
    if (!(initial.p[n] >= 0)) throw ModelError("gillespie_sample: initial probabilities must be >= 0");
    acc += initial.p[n];
    cdf[n] = acc;
  }
  if (!(acc > 0)) throw ModelError("gillespie_sample: initial distribution has zero mass");
  return sample(loss, gain, cdf.size(), report_times, n_traj, options, [&cdf](std::mt19937_64& rng) {
    const double u = open_unit(rng) * cdf.back();
    const auto it = std::lower_bound(cdf.begin(), cdf.end(), u);
    return static_cast<long long>(std::min<std::size_t>(it - cdf.begin(), cdf.size() - 1));
  });
}

}  // namespace fockbench
