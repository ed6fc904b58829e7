#include <doctest.h>

#include <cmath>
#include <limits>
#include <numeric>
#include <random>

#include <Eigen/Dense>

#include "fockbench/birth_death.hpp"
#include "fockbench/sdirk.hpp"

using namespace fockbench;

namespace {

// y' = rate * y on a single component.
struct ScalarDecay {
  using Vector = Eigen::VectorXd;
  double rate;
  void apply(const Vector& y, Vector& out) const { out = rate * y; }
  void solve_shifted(double hg, const Vector& rhs, Vector& out) const { out = rhs / (1.0 - hg * rate); }
  bool accept(Vector&) const { return true; }
};

double one_step_error(double h) {
  ScalarDecay p{-1.0};
  SdirkOptions opt;
  opt.rel_tol = 1.0;  // never reject
  opt.abs_tol = 1.0;
  opt.initial_step = h;
  Sdirk4<ScalarDecay> solver(p, opt);
  Eigen::VectorXd y = Eigen::VectorXd::Constant(1, 1.0);
  solver.integrate(y, 0.0, {h}, {});
  return std::abs(y[0] - std::exp(-h));
}

LossModel mesoscopic_loss() {
  return LossModel::fano_kerr({1.0, 1e-7, 0.044, 1.0, 5e-7}, {1.001, 1e-4, 0.99, 0.05, 1, {}});
}

// Null vector of the assembled generator, normalized to unit mass.
std::vector<double> generator_null_vector(const LossModel& loss, const SaturableGain& gain, std::size_t n_max) {
  const std::size_t size = n_max + 1;
  Eigen::MatrixXd Q = Eigen::MatrixXd::Zero(size, size);
  for (std::size_t n = 0; n < size; ++n) {
    const double down = n > 0 ? loss.rate(static_cast<double>(n)) : 0.0;
    const double up = n < n_max ? gain_rate(gain, static_cast<double>(n + 1)) : 0.0;
    Q(n, n) -= down + up;
    if (n > 0) Q(n - 1, n) += down;
    if (n < n_max) Q(n + 1, n) += up;
  }
  Eigen::FullPivLU<Eigen::MatrixXd> lu(Q);
  Eigen::VectorXd v = lu.kernel().col(0);
  v /= v.sum();
  return {v.data(), v.data() + v.size()};
}

}  // namespace

TEST_CASE("initial distributions are normalized with the right moments") {
  const auto c = coherent_distribution(30.0, 200);
  const auto mc = moments(c.p);
  CHECK(mc.mean == doctest::Approx(30.0).epsilon(1e-12));
  CHECK(mc.variance == doctest::Approx(30.0).epsilon(1e-10));
  const auto th = thermal_distribution(4.0, 400);
  const auto mt = moments(th.p);
  CHECK(mt.mean == doctest::Approx(4.0).epsilon(1e-10));
  CHECK(mt.variance == doctest::Approx(20.0).epsilon(1e-9));
  const auto f = fock_distribution(7, 20);
  CHECK(moments(f.p).variance == 0.0);
  CHECK_THROWS_AS(fock_distribution(30, 20), TruncationError);
  CHECK_THROWS_AS(coherent_distribution(100.0, 105), TruncationError);
}

TEST_CASE("SDIRK step has fourth-order accuracy") {
  const double e1 = one_step_error(0.2), e2 = one_step_error(0.1);
  // Local error scales as h^5.
  CHECK(std::log2(e1 / e2) == doctest::Approx(5.0).epsilon(0.05));
}

TEST_CASE("SDIRK error tracks the requested tolerance") {
  double previous = 1.0;
  for (double tol : {1e-4, 1e-6, 1e-8, 1e-10}) {
    ScalarDecay p{-3.0};
    SdirkOptions opt;
    opt.rel_tol = tol;
    opt.abs_tol = tol * 1e-3;
    Sdirk4<ScalarDecay> solver(p, opt);
    Eigen::VectorXd y = Eigen::VectorXd::Constant(1, 1.0);
    solver.integrate(y, 0.0, {2.0}, {});
    const double err = std::abs(y[0] - std::exp(-6.0)) / std::exp(-6.0);
    CHECK(err < 50 * tol);
    CHECK(err < previous);
    previous = err;
  }
}

TEST_CASE("coherent light under linear loss stays Poissonian") {
  const auto p0 = coherent_distribution(100.0, 400);
  std::vector<double> times;
  for (int i = 1; i <= 50; ++i) times.push_back(0.1 * i);
  const auto res = evolve(p0, LossModel::linear(1.0), NoGain{}, 5.0, times, 1e-10);
  for (const auto& snap : res.snapshots) {
    const auto m = moments(snap.p);
    CHECK(m.mean == doctest::Approx(100.0 * std::exp(-snap.time)).epsilon(1e-7));
    CHECK(std::abs(m.variance / m.mean - 1.0) < 1e-6);
  }
  for (std::size_t i = 0; i < res.trace.size(); ++i) CHECK(std::abs(res.trace.fano(i) - 1.0) < 1e-6);
}

TEST_CASE("evolution conserves probability and keeps it non-negative") {
  const auto p0 = coherent_distribution(50.0, 300);
  const auto res = evolve(p0, LossModel::linear(0.5), SaturableGain{0.4, 100.0}, 4.0, {1.0, 2.0, 4.0});
  for (const auto& snap : res.snapshots) {
    CHECK(std::accumulate(snap.p.begin(), snap.p.end(), 0.0) == doctest::Approx(1.0).epsilon(1e-10));
    for (double x : snap.p) REQUIRE(x >= 0.0);
  }
}

TEST_CASE("decay through the loss edge condenses the noise") {
  const auto p0 = coherent_distribution(6000.0, 9000);
  const auto res = evolve(p0, mesoscopic_loss(), NoGain{}, 60.0, {60.0});
  const auto m = moments(res.snapshots.back().p);
  CHECK(m.mean > 4900.0);
  CHECK(m.variance / m.mean < 0.01);
}

TEST_CASE("truncation is detected") {
  const auto p0 = coherent_distribution(50.0, 120);
  CHECK_THROWS_AS(evolve(p0, LossModel::linear(1.0), SaturableGain{3.0, 1e6}, 5.0, {5.0}), TruncationError);
}

TEST_CASE("below-threshold unsaturated gain gives a geometric distribution") {
  const auto d = steady_state(LossModel::linear(1.0), SaturableGain{0.5, std::numeric_limits<double>::infinity()}, 200);
  for (std::size_t n = 1; n < 40; ++n) CHECK(d.p[n] / d.p[n - 1] == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(moments(d.p).mean == doctest::Approx(1.0).epsilon(1e-10));
}

TEST_CASE("steady state equals the generator null vector and obeys detailed balance") {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  for (int trial = 0; trial < 24; ++trial) {
    const std::size_t n_max = 150 + static_cast<std::size_t>(50 * unit(rng));
    const double kappa = 0.5 + unit(rng);
    const SaturableGain gain{kappa * (0.5 + 1.5 * unit(rng)), 5.0 + 25.0 * unit(rng)};
    const LossModel loss = trial % 2 == 0 ? LossModel::linear(kappa)
                                          : LossModel::fano_kerr({1.0, 2e-5 * (1 + unit(rng)), 2 * kappa, 1.0, 0.05 * kappa},
                                                                 {1.0 + 1e-3 * (0.5 + unit(rng)), 1e-3, 0.9, 0.3, 1, {}});
    const auto d = steady_state(loss, gain, n_max);
    const auto null = generator_null_vector(loss, gain, n_max);
    double tv = 0.0;
    for (std::size_t n = 0; n <= n_max; ++n) tv += std::abs(d.p[n] - null[n]);
    CHECK(0.5 * tv < 1e-10);
    for (std::size_t n = 1; n <= n_max; ++n) {
      const double lhs = gain_rate(gain, static_cast<double>(n)) * d.p[n - 1];
      const double rhs = loss.rate(static_cast<double>(n)) * d.p[n];
      if (lhs > 1e-250) CHECK(std::abs(lhs - rhs) <= 1e-12 * lhs);
    }
  }
}

TEST_CASE("local width formula") {
  // Linear loss with G/L = 1 - 1/n at n + 1 gives the Poisson width.
  const double n_bar = 400.0;
  const LossModel loss = LossModel::linear(1.0);
  const SaturableGain g{1.0 + 1.0 / n_bar, std::numeric_limits<double>::infinity()};
  (void)g;
  const double n1 = n_bar + 1.0;
  const double A = (1.0 - 1.0 / n_bar) * loss.rate(n1) / n1;
  CHECK(steady_state_uncertainty(loss, SaturableGain{A, std::numeric_limits<double>::infinity()}, n_bar) ==
        doctest::Approx(std::sqrt(n_bar)));
  CHECK(steady_state_uncertainty(loss, SaturableGain{0.0, 1.0}, 3.0) == doctest::Approx(1.0));
  CHECK_THROWS_AS(steady_state_uncertainty(loss, SaturableGain{2.0, std::numeric_limits<double>::infinity()}, 3.0),
                  ModelError);
}

TEST_CASE("saturable gain over linear loss lases with Poisson statistics") {
  const auto d = steady_state(LossModel::linear(1.0), SaturableGain{2.0, 500.0}, 3000);
  const auto m = moments(d.p);
  CHECK(m.mean == doctest::Approx(500.0).epsilon(5e-3));
  CHECK(m.variance / m.mean == doctest::Approx(2.0).epsilon(0.02));
}

TEST_CASE("automatic truncation covers the initial state") {
  const std::size_t n = suggest_n_max(1000.0, 1000.0, LossModel::linear(1.0), NoGain{});
  CHECK(n >= 1300);
  CHECK_NOTHROW(coherent_distribution(1000.0, n));
}
