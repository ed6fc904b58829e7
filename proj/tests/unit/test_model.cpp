#include <doctest.h>

#include <cmath>
#include <limits>

#include "fockbench/errors.hpp"
#include "fockbench/model.hpp"

using namespace fockbench;

namespace {

KerrCavitySpec mesoscopic_cavity() { return {1.0, 1e-7, 0.044, 1.0, 5e-7}; }
FanoMirrorSpec mesoscopic_mirror() { return {1.001, 1e-4, 0.99, 0.05, 1, {}}; }

}  // namespace

TEST_CASE("linear loss is proportional to the photon number") {
  const auto loss = LossModel::linear(2.5);
  CHECK(loss.rate(0.0) == 0.0);
  CHECK(loss.rate(4.0) == doctest::Approx(10.0));
  CHECK(loss.derivative(7.0) == doctest::Approx(2.5));
  CHECK(loss.per_photon(0.0) == doctest::Approx(2.5));
  CHECK_THROWS_AS(LossModel::linear(-1.0), ModelError);
}

TEST_CASE("Kerr transition frequency grows linearly with photon number") {
  const auto c = mesoscopic_cavity();
  CHECK(kerr_transition_frequency(c, 1) == doctest::Approx(1.0 + 2e-7));
  CHECK(kerr_transition_frequency(c, 5000) == doctest::Approx(1.001));
  CHECK(kerr_detuning(c, 1.001, 5000.0) == doctest::Approx(0.0).epsilon(1e-12));
  CHECK(mirror_rate_scale(c) == doctest::Approx(0.022));
}

TEST_CASE("Fano transmission stays in [0, 1] and reaches its limits") {
  const FanoMirror m(mesoscopic_mirror());
  for (double d = -1e-2; d <= 1e-2; d += 1e-6) {
    const double t = m.transmission_at(d);
    REQUIRE(t >= 0.0);
    REQUIRE(t <= 1.0 + 1e-15);
  }
  CHECK(m.transmission_at(0.0) == doctest::Approx(0.05 * 0.05));
  CHECK(m.transmission_at(1e3) == doctest::Approx(0.99 * 0.99).epsilon(1e-6));
  // The exact zero sits at -parity r gamma / (2 t).
  CHECK(m.transmission_at(-0.05 * 1e-4 / (2 * 0.99)) == doctest::Approx(0.0).epsilon(1e-20));
}

TEST_CASE("Fano mirror rejects unphysical coefficients") {
  auto spec = mesoscopic_mirror();
  spec.t_d = 0.9;
  spec.r_d = 0.9;
  CHECK_THROWS_AS(FanoMirror{spec}, ModelError);
  spec = mesoscopic_mirror();
  spec.gamma = 0.0;
  CHECK_THROWS_AS(FanoMirror{spec}, ModelError);
}

TEST_CASE("Fano-Kerr loss derivatives match finite differences") {
  const auto loss = LossModel::fano_kerr(mesoscopic_cavity(), mesoscopic_mirror());
  for (double n : {10.0, 2000.0, 4950.0, 4990.0, 5003.0, 6000.0}) {
    const double h = 1e-3;
    const double fd = (loss.rate(n + h) - loss.rate(n - h)) / (2 * h);
    CHECK(loss.derivative(n) == doctest::Approx(fd).epsilon(1e-6));
    const double fd2 = (loss.derivative(n + h) - loss.derivative(n - h)) / (2 * h);
    CHECK(loss.second_derivative(n) == doctest::Approx(fd2).epsilon(1e-5));
  }
}

TEST_CASE("Fano-Kerr loss has its dark point near 5000 photons") {
  const auto loss = LossModel::fano_kerr(mesoscopic_cavity(), mesoscopic_mirror());
  CHECK(loss.per_photon(4990.0) < 1e-3 * loss.per_photon(100.0));
  CHECK(loss.derivative(5000.0) * 5000.0 > loss.rate(5000.0));  // noise condenses here
}

TEST_CASE("tabulated loss interpolates a monotone transmission table") {
  const auto c = mesoscopic_cavity();
  const FanoMirror m(mesoscopic_mirror());
  std::vector<double> omega, trans;
  for (int i = 0; i <= 400; ++i) {
    omega.push_back(0.9995 + 0.0015 * i / 400.0);
    trans.push_back(m.transmission(omega.back()));
  }
  const auto tab = LossModel::tabulated(c, omega, trans);
  const auto exact = LossModel::fano_kerr(c, mesoscopic_mirror());
  CHECK(tab.rate(3000.0) == doctest::Approx(exact.rate(3000.0)).epsilon(1e-3));
  CHECK_THROWS_AS(LossModel::tabulated(c, {1.0, 0.5}, {0.1, 0.2}), ModelError);
}

TEST_CASE("saturable gain flattens above the saturation number") {
  const SaturableGain g{2.0, 100.0};
  CHECK(gain_rate(g, 1.0) == doctest::Approx(2.0 / 1.01));
  CHECK(gain_rate(g, 1e9) == doctest::Approx(200.0).epsilon(1e-6));
  const SaturableGain unsat{2.0, std::numeric_limits<double>::infinity()};
  CHECK(gain_rate(unsat, 50.0) == doctest::Approx(100.0));
  CHECK(gain_rate(GainModel{NoGain{}}, 50.0) == 0.0);
}
