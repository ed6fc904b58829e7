#include <doctest.h>

#include <cmath>

#include "fockbench/birth_death.hpp"
#include "fockbench/cumulant.hpp"

using namespace fockbench;

TEST_CASE("linear loss keeps variance equal to the mean exactly") {
  std::vector<double> times;
  for (int i = 1; i <= 50; ++i) times.push_back(0.1 * i);
  const auto states = evolve_cumulants({100.0, 100.0, 0.0, true}, LossModel::linear(1.0), 5.0, times, 1e-10);
  for (const auto& s : states) {
    CHECK(s.var == s.n_bar);
    CHECK(s.n_bar == doctest::Approx(100.0 * std::exp(-s.time)).epsilon(1e-5));
  }
}

TEST_CASE("cumulant route agrees with the full distribution for a broad state") {
  const LossModel loss = LossModel::fano_kerr({1.0, 1e-6, 0.02, 1.0, 1e-5}, {1.0021, 1e-3, 0.9, 0.2, 1, {}});
  const auto p0 = coherent_distribution(3000.0, 5000);
  const auto exact = evolve(p0, loss, NoGain{}, 20.0, {5.0, 20.0}, 1e-10);
  const auto cum = evolve_cumulants({3000.0, 3000.0, 0.0, true}, loss, 20.0, {5.0, 20.0}, 1e-10);
  for (std::size_t i = 0; i < cum.size(); ++i) {
    const auto m = moments(exact.snapshots[i].p);
    CHECK(cum[i].n_bar == doctest::Approx(m.mean).epsilon(1e-3));
    CHECK(cum[i].var == doctest::Approx(m.variance).epsilon(0.05));
  }
}

TEST_CASE("condensation needs a loss rising faster than linear") {
  CHECK_FALSE(condensation_condition(LossModel::linear(1.0), 100.0));
  const LossModel sharp = LossModel::fano_kerr({1.0, 1e-7, 0.044, 1.0, 5e-7}, {1.001, 1e-4, 0.99, 0.05, 1, {}});
  CHECK(condensation_condition(sharp, 5000.0));
  CHECK_FALSE(condensation_condition(sharp, 4000.0));
}

TEST_CASE("wide states are flagged but still returned") {
  const auto states = evolve_cumulants({10.0, 50.0, 0.0, true}, LossModel::linear(1.0), 1.0, {1.0}, 1e-8);
  CHECK_FALSE(states.back().valid);
}
