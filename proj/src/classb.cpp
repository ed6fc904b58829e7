#include "fockbench/classb.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <sstream>

#include <Eigen/Dense>
#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "fockbench/errors.hpp"
#include "fockbench/parallel.hpp"

namespace fockbench {

namespace {

using cplx = std::complex<double>;
constexpr double kPi = 3.14159265358979323846;
constexpr double kBalanceSlack = 1e-8;
constexpr double kRouteAgreement = 1e-8;

std::string describe(double x) {
  std::ostringstream os;
  os.precision(12);
  os << x;
  return os.str();
}

double balance(const ClassBSystem& sys, double n) {
  const ClassBGain& g = sys.gain;
  return g.R_sp * g.Lambda / (g.gamma_par + g.R_sp * n) - sys.loss.per_photon(n);
}

// Bisection on a sign-changing bracket down to relative width 1e-12, then
// onward while the balance residual is still above its tolerance.
double refine_root(const ClassBSystem& sys, double a, double b, double fa) {
  for (int iter = 0; iter < 2000; ++iter) {
    const double mid = 0.5 * (a + b);
    if (mid <= a || mid >= b) break;
    const double fm = balance(sys, mid);
    if (fm == 0.0) return mid;
    if ((fm < 0) == (fa < 0)) {
      a = mid;
      fa = fm;
    } else {
      b = mid;
    }
    const double width = b - a;
    if (width <= 1e-12 * std::max(std::abs(a), std::abs(b))) {
      const double n = 0.5 * (a + b);
      if (std::abs(balance(sys, n)) < kBalanceSlack * sys.loss.per_photon(n)) return n;
    }
  }
  return 0.5 * (a + b);
}

std::array<cplx, 2> eigenvalues_of(const Eigen::Matrix2d& M) {
  const double tr = M.trace();
  const double det = M.determinant();
  const cplx disc = std::sqrt(cplx(0.25 * tr * tr - det, 0.0));
  cplx l1 = 0.5 * tr + disc, l2 = 0.5 * tr - disc;
  // Avoid cancellation in the smaller root when both are real.
  if (disc.imag() == 0.0 && det != 0.0) {
    const cplx big = std::abs(l1) >= std::abs(l2) ? l1 : l2;
    const cplx small = det / big;
    l1 = big;
    l2 = small;
  }
  if (l1.real() > l2.real()) std::swap(l1, l2);
  return {l1, l2};
}

Eigen::Matrix2d drift_with_slope(const ClassBSystem& sys, const OperatingPoint& op, double slope) {
  const ClassBGain& g = sys.gain;
  Eigen::Matrix2d M;
  M(0, 0) = g.R_sp * op.S_bar - op.kappa_at - slope * op.n_bar;
  M(0, 1) = g.R_sp * op.n_bar;
  M(1, 0) = -g.R_sp * op.S_bar;
  M(1, 1) = -(g.gamma_par + g.R_sp * op.n_bar);
  return M;
}

double matrix_route(const Eigen::Matrix2d& M, const Eigen::Matrix2d& D2, double omega) {
  Eigen::Matrix2cd A = M.cast<cplx>();
  A(0, 0) += cplx(0.0, omega);
  A(1, 1) += cplx(0.0, omega);
  const Eigen::Matrix2cd K = -A.inverse();
  const Eigen::Matrix2cd S = K * D2.cast<cplx>() * K.adjoint();
  return S(0, 0).real() / kPi;
}

void require_stable(const OperatingPoint& op, const char* where) {
  if (!op.stable) throw ModelError(std::string(where) + " requires a stable operating point (n = " + describe(op.n_bar) + ")");
}

}  // namespace

void validate(const ClassBSystem& sys) { validate(GainModel{sys.gain}); }

OperatingPoint make_operating_point(const ClassBSystem& sys, double n_bar) {
  validate(sys);
  if (!(n_bar >= 0) || !std::isfinite(n_bar)) throw ModelError("operating point needs a finite n >= 0");
  const ClassBGain& g = sys.gain;
  OperatingPoint op;
  op.n_bar = n_bar;
  const double denom = g.gamma_par + g.R_sp * n_bar;
  if (!(denom > 0)) throw ModelError("inversion undefined: gamma_par + R_sp n = 0");
  op.S_bar = g.Lambda / denom;
  op.kappa_at = sys.loss.per_photon(n_bar);
  op.kappa_prime_at = sys.loss.per_photon_derivative(n_bar);
  op.eigenvalues = eigenvalues_of(drift_with_slope(sys, op, op.kappa_prime_at));
  op.stable = op.eigenvalues[0].real() < 0 && op.eigenvalues[1].real() < 0;
  return op;
}

std::vector<OperatingPoint> find_operating_points(const ClassBSystem& sys, double n_lo, double n_hi,
                                                  std::size_t grid_points) {
  validate(sys);
  if (!(n_hi > n_lo && n_lo >= 0)) throw ModelError("operating point search needs n_hi > n_lo >= 0");
  if (grid_points < 2) throw ModelError("operating point search needs at least 2 grid points");
  std::vector<double> grid(grid_points), f(grid_points);
  for (std::size_t i = 0; i < grid_points; ++i) {
    grid[i] = n_lo + (n_hi - n_lo) * static_cast<double>(i) / static_cast<double>(grid_points - 1);
    f[i] = balance(sys, grid[i]);
    if (!std::isfinite(f[i])) throw ModelError("loss rate not finite at n = " + describe(grid[i]));
  }

  std::vector<double> roots;
  auto scan = [&](double a, double b, double fa, double fb) {
    if (fa == 0.0) {
      roots.push_back(a);
    } else if ((fa < 0) != (fb < 0) && fb != 0.0) {
      roots.push_back(refine_root(sys, a, b, fa));
    }
  };
  for (std::size_t i = 0; i + 1 < grid_points; ++i) scan(grid[i], grid[i + 1], f[i], f[i + 1]);
  if (f.back() == 0.0) roots.push_back(grid.back());

  // A pair of roots inside one cell leaves no sign change on the grid but
  // shows up as a local extremum of f; such cells are resampled finely.
  constexpr int kSub = 64;
  for (std::size_t i = 1; i + 1 < grid_points; ++i) {
    const bool extremum = (f[i] - f[i - 1]) * (f[i + 1] - f[i]) < 0;
    if (!extremum) continue;
    for (std::size_t cell = i - 1; cell <= i; ++cell) {
      if ((f[cell] < 0) != (f[cell + 1] < 0)) continue;
      double a = grid[cell], fa = f[cell];
      for (int k = 1; k <= kSub; ++k) {
        const double b = grid[cell] + (grid[cell + 1] - grid[cell]) * k / kSub;
        const double fb = balance(sys, b);
        if ((fa < 0) != (fb < 0) && fb != 0.0 && fa != 0.0) roots.push_back(refine_root(sys, a, b, fa));
        a = b;
        fa = fb;
      }
    }
  }

  std::sort(roots.begin(), roots.end());
  roots.erase(std::unique(roots.begin(), roots.end(),
                          [](double x, double y) { return std::abs(x - y) <= 1e-10 * std::max(std::abs(x), 1.0); }),
              roots.end());
  std::vector<OperatingPoint> out;
  for (double n : roots) out.push_back(make_operating_point(sys, n));
  return out;
}

Eigen::Matrix2d drift_matrix(const ClassBSystem& sys, const OperatingPoint& op) {
  return drift_with_slope(sys, op, op.kappa_prime_at);
}

Eigen::Matrix2d diffusion_matrix(const ClassBSystem& sys, const OperatingPoint& op) {
  const ClassBGain& g = sys.gain;
  Eigen::Matrix2d D2;
  D2(0, 0) = (g.R_sp * op.S_bar + op.kappa_at) * op.n_bar;
  D2(0, 1) = D2(1, 0) = -g.R_sp * op.S_bar * op.n_bar;
  D2(1, 1) = g.Lambda + (g.gamma_par + g.R_sp * op.n_bar) * op.S_bar;
  return D2;
}

double spectral_density(const ClassBSystem& sys, const OperatingPoint& op, double omega) {
  return matrix_route(drift_matrix(sys, op), diffusion_matrix(sys, op), omega);
}

double spectral_density_closed_form(const ClassBSystem& sys, const OperatingPoint& op, double omega) {
  const double R = sys.gain.R_sp, L = sys.gain.Lambda, g = sys.gain.gamma_par;
  const double k = op.kappa_at, kp = op.kappa_prime_at, n = op.n_bar;
  const double w2 = omega * omega;
  const double num = n * (2.0 * k * (g * g + w2) + k * n * n * R * R + n * R * (3.0 * g * k + L * R));
  const double relax = kp * (g + n * R) + k * R;
  const double den = w2 * w2 + w2 * (kp * kp * n * n + (g + n * R) * (g + n * R) - 2.0 * k * n * R) + n * n * relax * relax;
  return num / den / kPi;
}

NoiseSpectrum noise_spectrum(const ClassBSystem& sys, const OperatingPoint& op, const std::vector<double>& omega_grid) {
  require_stable(op, "noise_spectrum");
  const Eigen::Matrix2d M = drift_matrix(sys, op), D2 = diffusion_matrix(sys, op);
  NoiseSpectrum out;
  out.omega = omega_grid;
  out.s_nn.reserve(omega_grid.size());
  for (double w : omega_grid) {
    const double a = matrix_route(M, D2, w);
    const double b = spectral_density_closed_form(sys, op, w);
    if (!(std::abs(a - b) <= kRouteAgreement * std::abs(a))) {
      throw ConsistencyError("noise spectrum routes disagree at omega = " + describe(w) + ": " + describe(a) + " vs " +
                             describe(b));
    }
    out.s_nn.push_back(a);
  }
  out.integrated_variance = photon_variance(sys, op).variance;
  return out;
}

VarianceIntegral photon_variance(const ClassBSystem& sys, const OperatingPoint& op, double rel_tol) {
  require_stable(op, "photon_variance");
  const Eigen::Matrix2d M = drift_matrix(sys, op), D2 = diffusion_matrix(sys, op);
  auto S = [&](double w) { return matrix_route(M, D2, w); };
  const double fastest = std::max(std::abs(op.eigenvalues[0]), std::abs(op.eigenvalues[1]));
  const double slowest = std::min(std::abs(op.eigenvalues[0].real()), std::abs(op.eigenvalues[1].real()));
  VarianceIntegral out;
  if (!(D2(0, 0) > 0)) return out;  // no photon-number noise source at all

  const double asym_coeff = D2(0, 0) / kPi;
  double cut = 10.0 * fastest;
  for (int i = 0; i < 200; ++i, cut *= 2.0) {
    if (std::abs(S(cut) * cut * cut / asym_coeff - 1.0) < 1e-4) break;
  }
  out.omega_cut = cut;
  out.tail = asym_coeff / cut;

  // Geometric panels resolve features spread over many decades of frequency.
  using GK = boost::math::quadrature::gauss_kronrod<double, 61>;
  const double first = std::min(0.1 * slowest, 0.1 * std::abs(op.eigenvalues[0].imag()) + 0.1 * slowest);
  double a = 0.0, b = std::max(first, cut * 1e-12), sum = 0.0, err_total = 0.0;
  while (a < cut) {
    b = std::min(b, cut);
    double err = 0.0;
    const double piece = GK::integrate(S, a, b, 20, 1e-11, &err);
    if (!std::isfinite(piece)) throw NumericError("spectrum quadrature produced a non-finite value");
    sum += piece;
    err_total += err;
    a = b;
    b *= 2.0;
  }
  out.variance = sum + out.tail;
  if (!(err_total <= rel_tol * out.variance)) {
    throw NumericError("spectrum quadrature did not converge: error estimate " + describe(err_total) + " vs variance " +
                       describe(out.variance) + " (omega_cut " + describe(cut) + ")");
  }
  return out;
}

Eigen::Matrix2d stationary_covariance(const ClassBSystem& sys, const OperatingPoint& op) {
  const Eigen::Matrix2d M = drift_matrix(sys, op), D2 = diffusion_matrix(sys, op);
  // Unknowns (C00, C01, C11) of the symmetric solution.
  Eigen::Matrix3d A;
  A << 2 * M(0, 0), 2 * M(0, 1), 0,
       M(1, 0), M(0, 0) + M(1, 1), M(0, 1),
       0, 2 * M(1, 0), 2 * M(1, 1);
  const Eigen::Vector3d rhs(-D2(0, 0), -D2(0, 1), -D2(1, 1));
  const Eigen::Vector3d c = A.fullPivLu().solve(rhs);
  Eigen::Matrix2d C;
  C << c[0], c[1], c[1], c[2];
  return C;
}

double low_frequency_suppression(const ClassBSystem& sys, const OperatingPoint& op) {
  const Eigen::Matrix2d D2 = diffusion_matrix(sys, op);
  const double flat = matrix_route(drift_with_slope(sys, op, 0.0), D2, 0.0);
  const double actual = matrix_route(drift_matrix(sys, op), D2, 0.0);
  return flat / actual;
}

SdeEstimate sde_monte_carlo(const ClassBSystem& sys, const OperatingPoint& op, double t_final, double dt,
                            std::size_t n_traj, std::uint64_t seed, unsigned threads) {
  require_stable(op, "sde_monte_carlo");
  if (n_traj < 2) throw ModelError("sde_monte_carlo needs at least 2 trajectories");
  const double fastest = std::max(std::abs(op.eigenvalues[0]), std::abs(op.eigenvalues[1]));
  const double slowest = std::min(std::abs(op.eigenvalues[0].real()), std::abs(op.eigenvalues[1].real()));
  if (!(dt > 0 && dt <= 0.01 / fastest * (1 + 1e-12))) {
    throw ModelError("sde_monte_carlo needs 0 < dt <= 0.01 / max|eigenvalue| = " + describe(0.01 / fastest));
  }
  const double burn_in = 10.0 / slowest;
  if (!(t_final > burn_in)) {
    throw ModelError("t_final must exceed the burn-in of ten relaxation times (" + describe(burn_in) + ")");
  }
  const Eigen::Matrix2d M = drift_matrix(sys, op);
  const Eigen::Matrix2d D2 = diffusion_matrix(sys, op);
  Eigen::SelfAdjointEigenSolver<Eigen::Matrix2d> es(D2);
  const Eigen::Matrix2d B =
      es.eigenvectors() * es.eigenvalues().cwiseMax(0.0).cwiseSqrt().asDiagonal() * es.eigenvectors().transpose();
  const Eigen::Matrix2d step = Eigen::Matrix2d::Identity() + dt * M;
  const double noise = std::sqrt(dt);
  const auto burn_steps = static_cast<std::size_t>(std::ceil(burn_in / dt));
  const auto total_steps = static_cast<std::size_t>(std::ceil(t_final / dt));
  const std::size_t avg_steps = total_steps - burn_steps;

  std::vector<double> estimates(n_traj);
  parallel_for(n_traj, threads, [&](std::size_t i) {
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                      static_cast<std::uint32_t>(i), static_cast<std::uint32_t>(static_cast<std::uint64_t>(i) >> 32)};
    std::mt19937_64 rng(seq);
    std::normal_distribution<double> normal;
    Eigen::Vector2d x = Eigen::Vector2d::Zero();
    double acc = 0.0;
    for (std::size_t s = 0; s < total_steps; ++s) {
      const Eigen::Vector2d xi(normal(rng), normal(rng));
      x = step * x + noise * (B * xi);
      if (s >= burn_steps) acc += x[0] * x[0];
    }
    estimates[i] = acc / static_cast<double>(avg_steps);
  });

  const double N = static_cast<double>(n_traj);
  double mean = 0.0;
  for (double e : estimates) mean += e;
  mean /= N;
  double spread = 0.0;
  for (double e : estimates) spread += (e - mean) * (e - mean);
  SdeEstimate out;
  out.variance = mean;
  out.std_error = std::sqrt(spread / (N - 1.0) / N);
  out.n_traj = n_traj;
  out.burn_in = burn_in;
  return out;
}

}  // namespace fockbench
