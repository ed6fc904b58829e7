#include "fockbench/lindblad.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include <Eigen/Eigenvalues>
#include <Eigen/LU>
#include <Eigen/SparseCore>
#include <unsupported/Eigen/KroneckerProduct>
#include <unsupported/Eigen/MatrixFunctions>

#include "fockbench/errors.hpp"
#include "fockbench/sdirk.hpp"

namespace fockbench {

namespace {

using cplx = std::complex<double>;
constexpr cplx I{0.0, 1.0};

constexpr double kTraceSlack = 1e-8;
constexpr double kHermiticitySlack = 1e-12;
constexpr double kEigenvalueFloor = -1e-8;
constexpr double kRateMatch = 1e-10;

std::string describe(double x) {
  std::ostringstream os;
  os.precision(10);
  os << x;
  return os.str();
}

std::vector<double> sorted_stops(double t0, double t_final, const std::vector<double>& report_times) {
  if (!(t_final > t0)) throw ModelError("t_final must exceed the initial time");
  std::vector<double> stops;
  for (double t : report_times) {
    if (!(t > t0 && t <= t_final)) throw ModelError("report time " + describe(t) + " outside (t0, t_final]");
    stops.push_back(t);
  }
  stops.push_back(t_final);
  std::sort(stops.begin(), stops.end());
  stops.erase(std::unique(stops.begin(), stops.end()), stops.end());
  return stops;
}

void check_state(const DensityMatrix& state, const char* where) {
  const DensityDiagnostics d = diagnose(state);
  if (!(d.trace_error <= kTraceSlack) || !(d.hermiticity <= kHermiticitySlack) ||
      !(d.min_eigenvalue >= kEigenvalueFloor)) {
    throw NumericError(std::string(where) + ": density matrix invariant violated at t = " + describe(state.time) +
                       " (trace error " + describe(d.trace_error) + ", hermiticity " + describe(d.hermiticity) +
                       ", min eigenvalue " + describe(d.min_eigenvalue) + ")");
  }
}

void check_initial(const DensityMatrix& rho0, std::size_t levels, const char* where) {
  if (static_cast<std::size_t>(rho0.rho.rows()) != levels || rho0.rho.cols() != rho0.rho.rows()) {
    throw ModelError(std::string(where) + ": density matrix shape does not match its level counts");
  }
  check_state(rho0, where);
}

// Per-level coefficients of the eliminated-mirror master equation.
struct Elimination {
  std::vector<cplx> jump;      // sqrt(n) c_n: amplitude of |n-1><n| in the effective jump operator
  std::vector<double> shift;   // rotating-frame level energy including the induced level shift
  std::vector<double> bracket; // n (kappa - 2 Re[G+ G- / z_n])
};

Elimination eliminate(const AdiabaticParams& p, std::size_t levels) {
  const double root = 0.5 * std::sqrt(p.kappa * p.gamma);
  const cplx g_minus = I * p.lambda + root;
  const cplx g_plus = I * std::conj(p.lambda) + root;
  const double kerr = p.cavity.omega0 * p.cavity.beta;
  Elimination e;
  e.jump.assign(levels, 0.0);
  e.shift.assign(levels, 0.0);
  e.bracket.assign(levels, 0.0);
  for (std::size_t n = 1; n < levels; ++n) {
    const double k = static_cast<double>(n);
    const double detuning = kerr_detuning(p.cavity, p.omega_d, k);  // omega_{n,n-1} - omega_d
    const cplx z = cplx(0.5 * p.gamma, -detuning);
    const cplx c = std::sqrt(p.kappa) - std::sqrt(p.gamma) * g_minus / z;
    const cplx pair = g_plus * g_minus / z;
    e.jump[n] = std::sqrt(k) * c;
    e.shift[n] = kerr * (k + k * k) - k * pair.imag();
    e.bracket[n] = k * (p.kappa - 2.0 * pair.real());
  }
  return e;
}

using SparseC = Eigen::SparseMatrix<cplx>;

SparseC kron(const SparseC& a, const SparseC& b) { return Eigen::kroneckerProduct(a, b); }

SparseC lowering(std::size_t levels) {
  SparseC a(static_cast<int>(levels), static_cast<int>(levels));
  std::vector<Eigen::Triplet<cplx>> t;
  for (std::size_t n = 1; n < levels; ++n) t.emplace_back(static_cast<int>(n - 1), static_cast<int>(n), std::sqrt(double(n)));
  a.setFromTriplets(t.begin(), t.end());
  return a;
}

SparseC identity(std::size_t levels) {
  SparseC id(static_cast<int>(levels), static_cast<int>(levels));
  id.setIdentity();
  return id;
}

// Two-mode Lindblad restricted to blocks of fixed total excitation number.
// H and X^dagger X conserve the number and the jump lowers it by one, so the
// diagonal blocks rho_N evolve as a closed upper-triangular chain:
//   d rho_N / dt = -i (H_N rho_N - rho_N H_N^dagger) + X_N rho_{N+1} X_N^dagger.
class ExcitationBlocks {
 public:
  using Vector = Eigen::VectorXcd;

  ExcitationBlocks(const SparseC& h_eff, const SparseC& jump, std::size_t nc, std::size_t nm) : nm_(nm) {
    const std::size_t top = nc + nm - 2;
    members_.resize(top + 1);
    for (std::size_t n = 0; n < nc; ++n) {
      for (std::size_t m = 0; m < nm; ++m) members_[n + m].push_back(n * nm + m);
    }
    const Eigen::MatrixXcd h = Eigen::MatrixXcd(h_eff);
    const Eigen::MatrixXcd x = Eigen::MatrixXcd(jump);
    offset_.assign(top + 2, 0);
    for (std::size_t N = 0; N <= top; ++N) {
      const auto& idx = members_[N];
      const std::size_t d = idx.size();
      offset_[N + 1] = offset_[N] + d * d;
      Eigen::MatrixXcd hn(d, d);
      for (std::size_t i = 0; i < d; ++i)
        for (std::size_t j = 0; j < d; ++j) hn(i, j) = h(idx[i], idx[j]);
      // Vectorized B -> -i (H B - B H^dagger) with column-major vec.
      const Eigen::MatrixXcd id = Eigen::MatrixXcd::Identity(d, d);
      block_.push_back(-I * (Eigen::kroneckerProduct(id, hn) - Eigen::kroneckerProduct(hn.conjugate(), id)).eval());
      if (N < top) {
        const auto& up = members_[N + 1];
        Eigen::MatrixXcd xn(d, up.size());
        for (std::size_t i = 0; i < d; ++i)
          for (std::size_t j = 0; j < up.size(); ++j) xn(i, j) = x(idx[i], up[j]);
        feed_.push_back(xn);
      }
    }
    lu_.resize(top + 1);
  }

  std::size_t size() const { return offset_.back(); }

  void apply(const Vector& y, Vector& out) const {
    out.resize(y.size());
    for (std::size_t N = 0; N < members_.size(); ++N) {
      out.segment(offset_[N], block_size(N)) = block_[N] * y.segment(offset_[N], block_size(N));
      if (N + 1 < members_.size()) out.segment(offset_[N], block_size(N)) += fed(N, y);
    }
  }

  void solve_shifted(double hg, const Vector& rhs, Vector& out) const {
    out.resize(rhs.size());
    if (hg != factored_hg_) {
      for (std::size_t N = 0; N < members_.size(); ++N) {
        const Eigen::Index d = static_cast<Eigen::Index>(block_size(N));
        lu_[N].compute(Eigen::MatrixXcd::Identity(d, d) - hg * block_[N]);
      }
      factored_hg_ = hg;
    }
    for (std::size_t N = members_.size(); N-- > 0;) {
      Vector r = rhs.segment(offset_[N], block_size(N));
      if (N + 1 < members_.size()) r += hg * fed(N, out);
      out.segment(offset_[N], block_size(N)) = lu_[N].solve(r);
    }
  }

  bool accept(Vector&) const { return true; }

  Vector pack(const Eigen::MatrixXcd& rho) const {
    Vector v(size());
    for (std::size_t N = 0; N < members_.size(); ++N) {
      const auto& idx = members_[N];
      for (std::size_t j = 0; j < idx.size(); ++j)
        for (std::size_t i = 0; i < idx.size(); ++i) v[offset_[N] + i + j * idx.size()] = rho(idx[i], idx[j]);
    }
    return v;
  }

  Eigen::MatrixXcd unpack(const Vector& v, std::size_t dim) const {
    Eigen::MatrixXcd rho = Eigen::MatrixXcd::Zero(dim, dim);
    for (std::size_t N = 0; N < members_.size(); ++N) {
      const auto& idx = members_[N];
      for (std::size_t j = 0; j < idx.size(); ++j)
        for (std::size_t i = 0; i < idx.size(); ++i) rho(idx[i], idx[j]) = v[offset_[N] + i + j * idx.size()];
    }
    return rho;
  }

 private:
  std::size_t block_size(std::size_t N) const { return offset_[N + 1] - offset_[N]; }

  Vector fed(std::size_t N, const Vector& y) const {
    const std::size_t du = members_[N + 1].size(), d = members_[N].size();
    const Eigen::Map<const Eigen::MatrixXcd> upper(y.data() + offset_[N + 1], du, du);
    const Eigen::MatrixXcd f = feed_[N] * upper * feed_[N].adjoint();
    return Eigen::Map<const Vector>(f.data(), d * d);
  }

  std::size_t nm_;
  std::vector<std::vector<std::size_t>> members_;
  std::vector<std::size_t> offset_;
  std::vector<Eigen::MatrixXcd> block_, feed_;
  mutable std::vector<Eigen::PartialPivLU<Eigen::MatrixXcd>> lu_;
  mutable double factored_hg_ = -1.0;
};

}  // namespace

std::vector<std::string> validate(const AdiabaticParams& p) {
  validate(p.cavity);
  if (p.cavity.kappa_bg != 0.0) {
    throw ModelError("mirror-elimination models take their direct cavity loss from kappa; set cavity.kappa_bg = 0");
  }
  if (!(std::isfinite(p.omega_d))) throw ModelError("omega_d must be finite");
  if (!(std::isfinite(p.gamma) && p.gamma > 0)) throw ModelError("gamma must be > 0");
  if (!(std::isfinite(p.kappa) && p.kappa >= 0)) throw ModelError("kappa must be >= 0");
  if (!std::isfinite(p.lambda.real()) || !std::isfinite(p.lambda.imag())) throw ModelError("lambda must be finite");
  if (p.gamma < 20.0 * p.kappa) {
    throw ModelError("adiabatic elimination needs gamma >= 20 kappa (gamma/kappa = " + describe(p.gamma / p.kappa) + ")");
  }
  std::vector<std::string> warnings;
  if (p.gamma < 100.0 * p.kappa) {
    warnings.push_back("gamma/kappa = " + describe(p.gamma / p.kappa) +
                       " is below 100; expect percent-level adiabatic-elimination error");
  }
  return warnings;
}

DensityMatrix fock_density(std::size_t n, std::size_t n_max) {
  if (n > n_max) throw TruncationError("Fock state |" + std::to_string(n) + "> exceeds n_max");
  DensityMatrix d;
  d.cavity_levels = n_max + 1;
  d.rho = Eigen::MatrixXcd::Zero(n_max + 1, n_max + 1);
  d.rho(n, n) = 1.0;
  return d;
}

DensityMatrix thermal_density(double n_bar, std::size_t n_max) {
  if (!(n_bar >= 0)) throw ModelError("thermal state mean must be >= 0");
  DensityMatrix d;
  d.cavity_levels = n_max + 1;
  d.rho = Eigen::MatrixXcd::Zero(n_max + 1, n_max + 1);
  const double ratio = n_bar / (1.0 + n_bar);
  double v = 1.0 / (1.0 + n_bar), total = 0.0;
  for (std::size_t n = 0; n <= n_max; ++n, v *= ratio) {
    d.rho(n, n) = v;
    total += v;
  }
  if (1.0 - total > 1e-12) throw TruncationError("thermal state tail above n_max exceeds 1e-12");
  d.rho /= total;
  return d;
}

DensityMatrix coherent_density(double n_bar, std::size_t n_max) {
  if (!(n_bar >= 0) || !std::isfinite(n_bar)) throw ModelError("coherent state mean must be >= 0");
  Eigen::VectorXcd amp = Eigen::VectorXcd::Zero(n_max + 1);
  double total = 0.0;
  for (std::size_t n = 0; n <= n_max; ++n) {
    const double k = static_cast<double>(n);
    const double logp = n_bar > 0 ? k * std::log(n_bar) - n_bar - std::lgamma(k + 1.0) : (n == 0 ? 0.0 : -INFINITY);
    const double prob = std::exp(logp);
    amp[n] = std::sqrt(prob);
    total += prob;
  }
  if (1.0 - total > 1e-12) {
    throw TruncationError("coherent state tail above n_max = " + std::to_string(n_max) + " is " +
                          describe(1.0 - total) + " (limit 1e-12)");
  }
  amp /= std::sqrt(total);
  DensityMatrix d;
  d.cavity_levels = n_max + 1;
  d.rho = amp * amp.adjoint();
  return d;
}

DensityMatrix tensor_product(const DensityMatrix& cavity, const DensityMatrix& mirror) {
  if (cavity.mirror_levels != 1 || mirror.mirror_levels != 1) throw ModelError("tensor_product expects single-mode inputs");
  DensityMatrix d;
  d.cavity_levels = cavity.cavity_levels;
  d.mirror_levels = mirror.cavity_levels;
  d.time = cavity.time;
  d.rho = Eigen::kroneckerProduct(cavity.rho, mirror.rho);
  return d;
}

DensityMatrix trace_out_mirror(const DensityMatrix& joint) {
  const std::size_t nc = joint.cavity_levels, nm = joint.mirror_levels;
  DensityMatrix d;
  d.cavity_levels = nc;
  d.time = joint.time;
  d.rho = Eigen::MatrixXcd::Zero(nc, nc);
  for (std::size_t p = 0; p < nc; ++p) {
    for (std::size_t q = 0; q < nc; ++q) {
      cplx s = 0.0;
      for (std::size_t m = 0; m < nm; ++m) s += joint.rho(p * nm + m, q * nm + m);
      d.rho(p, q) = s;
    }
  }
  return d;
}

std::vector<double> populations(const DensityMatrix& single_mode) {
  std::vector<double> p(single_mode.rho.rows());
  for (Eigen::Index n = 0; n < single_mode.rho.rows(); ++n) p[n] = single_mode.rho(n, n).real();
  return p;
}

DensityDiagnostics diagnose(const DensityMatrix& state) {
  DensityDiagnostics d;
  const Eigen::MatrixXcd& r = state.rho;
  d.trace_error = std::abs(r.trace() - cplx(1.0, 0.0));
  d.hermiticity = (r - r.adjoint()).cwiseAbs().maxCoeff();
  Eigen::MatrixXcd off = r;
  off.diagonal().setZero();
  d.max_offdiagonal = off.size() > 0 ? off.cwiseAbs().maxCoeff() : 0.0;
  const Eigen::MatrixXcd herm = 0.5 * (r + r.adjoint());
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(herm, Eigen::EigenvaluesOnly);
  d.min_eigenvalue = es.eigenvalues().minCoeff();
  return d;
}

LossModel equivalent_fano_loss(const AdiabaticParams& p) {
  const double scale = mirror_rate_scale(p.cavity);
  FanoMirrorSpec m;
  m.omega_d = p.omega_d;
  m.gamma = p.gamma;
  m.t_d = std::sqrt(p.kappa / scale);
  m.r_d = 2.0 * std::abs(p.lambda) / std::sqrt(p.gamma * scale);
  m.phase = std::arg(p.lambda);
  m.parity_sign = std::cos(*m.phase) < 0 ? -1 : 1;
  if (m.t_d > 1.0 || m.r_d > 1.0) {
    throw ModelError("v / (2 L_c) = " + describe(scale) + " is too small to express the mirror as a Fano transmission (t_d = " +
                     describe(m.t_d) + ", r_d = " + describe(m.r_d) + ")");
  }
  KerrCavitySpec c = p.cavity;
  c.kappa_bg = 0.0;
  return LossModel::fano_kerr(c, m);
}

std::vector<double> effective_loss_rates(const AdiabaticParams& p, std::size_t n_max) {
  validate(p);
  const Elimination e = eliminate(p, n_max + 1);
  const LossModel fano = equivalent_fano_loss(p);
  // Natural rate scale per photon: direct loss plus the on-resonance mirror channel.
  const double per_photon_scale = p.kappa + 4.0 * std::norm(p.lambda) / p.gamma;
  std::vector<double> rates(n_max + 1, 0.0);
  for (std::size_t n = 1; n <= n_max; ++n) {
    const double k = static_cast<double>(n);
    const double exact = std::norm(e.jump[n]);
    const double tol = kRateMatch * k * per_photon_scale;
    if (e.bracket[n] < -1e-12 * p.kappa) {
      throw ModelError("nonphysical parameters: effective loss L(" + std::to_string(n) + ") = " + describe(e.bracket[n]) + " < 0");
    }
    if (std::abs(exact - e.bracket[n]) > tol || std::abs(exact - fano.rate(k)) > tol) {
      throw ConsistencyError("effective loss at n = " + std::to_string(n) + " disagrees with its Fano form (" +
                             describe(exact) + " vs " + describe(fano.rate(k)) + ")");
    }
    rates[n] = exact;
  }
  return rates;
}

std::vector<DensityMatrix> adiabatic_evolve(const DensityMatrix& rho0, const AdiabaticParams& params, double t_final,
                                            const std::vector<double>& report_times, double rel_tol) {
  validate(params);
  if (rho0.mirror_levels != 1) throw ModelError("adiabatic_evolve expects a single-mode density matrix");
  if (rho0.cavity_levels < 2 || rho0.cavity_levels > 301) throw ModelError("adiabatic_evolve supports 1 <= n_max <= 300");
  if (!(rel_tol >= 1e-12 && rel_tol <= 1e-3)) throw ModelError("rel_tol must lie in [1e-12, 1e-3]");
  check_initial(rho0, rho0.cavity_levels, "adiabatic_evolve");
  const std::vector<double> stops = sorted_stops(rho0.time, t_final, report_times);

  // Element (p, q) is fed only by (p+1, q+1), so each band p - q = k is an
  // independent bidiagonal system with a constant generator; it is advanced
  // by its exact propagator, which is cached per distinct interval.
  const std::size_t n = rho0.cavity_levels;
  const Elimination e = eliminate(params, n);
  std::vector<double> loss(n);
  for (std::size_t k = 0; k < n; ++k) loss[k] = std::norm(e.jump[k]);
  std::vector<Eigen::MatrixXcd> generators(n);
  std::vector<Eigen::VectorXcd> bands(n);
  for (std::size_t k = 0; k < n; ++k) {
    const std::size_t m = n - k;
    Eigen::MatrixXcd A = Eigen::MatrixXcd::Zero(m, m);
    bands[k].resize(m);
    for (std::size_t j = 0; j < m; ++j) {
      const std::size_t p = j + k, q = j;
      A(j, j) = cplx(-0.5 * (loss[p] + loss[q]), -(e.shift[p] - e.shift[q]));
      if (j + 1 < m) A(j, j + 1) = e.jump[p + 1] * std::conj(e.jump[q + 1]);
      bands[k][j] = rho0.rho(p, q);
    }
    generators[k] = std::move(A);
  }

  std::vector<std::pair<double, std::vector<Eigen::MatrixXcd>>> cache;
  auto propagators = [&](double dt) -> const std::vector<Eigen::MatrixXcd>& {
    for (const auto& c : cache) {
      if (c.first == dt) return c.second;
    }
    std::vector<Eigen::MatrixXcd> props(n);
    for (std::size_t k = 0; k < n; ++k) props[k] = (generators[k] * dt).exp();
    cache.emplace_back(dt, std::move(props));
    return cache.back().second;
  };

  std::vector<DensityMatrix> out;
  double t = rho0.time;
  for (double stop : stops) {
    const auto& props = propagators(stop - t);
    for (std::size_t k = 0; k < n; ++k) bands[k] = props[k] * bands[k];
    t = stop;
    DensityMatrix d;
    d.cavity_levels = n;
    d.time = t;
    d.rho = Eigen::MatrixXcd::Zero(n, n);
    for (std::size_t k = 0; k < n; ++k) {
      for (std::size_t j = 0; j + k < n; ++j) {
        d.rho(j + k, j) = bands[k][j];
        if (k > 0) d.rho(j, j + k) = std::conj(bands[k][j]);
      }
    }
    for (std::size_t j = 0; j < n; ++j) d.rho(j, j) = d.rho(j, j).real();
    check_state(d, "adiabatic_evolve");
    out.push_back(std::move(d));
  }
  return out;
}

std::vector<DensityMatrix> two_mode_evolve(const DensityMatrix& rho0, const AdiabaticParams& params, double t_final,
                                           const std::vector<double>& report_times, double rel_tol) {
  validate(params);
  const std::size_t nc = rho0.cavity_levels, nm = rho0.mirror_levels;
  if (nc < 2 || nc > 41) throw ModelError("two_mode_evolve supports cavity n_max in [1, 40]");
  if (nm < 2 || nm > 7) throw ModelError("two_mode_evolve supports mirror d_max in [1, 6]");
  if (!(rel_tol >= 1e-12 && rel_tol <= 1e-3)) throw ModelError("rel_tol must lie in [1e-12, 1e-3]");
  check_initial(rho0, nc * nm, "two_mode_evolve");
  const std::vector<double> stops = sorted_stops(rho0.time, t_final, report_times);

  const SparseC a = kron(lowering(nc), identity(nm));
  const SparseC d = kron(identity(nc), lowering(nm));
  const double kerr = params.cavity.omega0 * params.cavity.beta;
  SparseC kerr_diag(static_cast<int>(nc), static_cast<int>(nc)), mirror_num(static_cast<int>(nm), static_cast<int>(nm));
  {
    std::vector<Eigen::Triplet<cplx>> t;
    for (std::size_t n = 0; n < nc; ++n) t.emplace_back(int(n), int(n), kerr * (double(n) + double(n) * double(n)));
    kerr_diag.setFromTriplets(t.begin(), t.end());
    t.clear();
    for (std::size_t m = 0; m < nm; ++m) t.emplace_back(int(m), int(m), (params.omega_d - params.cavity.omega0) * double(m));
    mirror_num.setFromTriplets(t.begin(), t.end());
  }
  SparseC h = kron(kerr_diag, identity(nm)) + kron(identity(nc), mirror_num);
  h += SparseC(params.lambda * (a * d.adjoint()) + std::conj(params.lambda) * (a.adjoint() * d));
  const SparseC jump = std::sqrt(params.kappa) * a + std::sqrt(params.gamma) * d;
  const SparseC h_eff = h - cplx(0.0, 0.5) * SparseC(jump.adjoint() * jump);

  ExcitationBlocks blocks(h_eff, jump, nc, nm);
  SdirkOptions opt;
  opt.rel_tol = rel_tol;
  opt.abs_tol = 1e-6 * rel_tol;
  Sdirk4<ExcitationBlocks> integrator(blocks, opt);
  Eigen::VectorXcd y = blocks.pack(rho0.rho);
  std::vector<DensityMatrix> out;
  integrator.integrate(y, rho0.time, stops, [&](double t, const Eigen::VectorXcd& v) {
    DensityMatrix r;
    r.cavity_levels = nc;
    r.mirror_levels = nm;
    r.time = t;
    r.rho = blocks.unpack(v, nc * nm);
    check_state(r, "two_mode_evolve");
    out.push_back(std::move(r));
  });
  return out;
}

}  // namespace fockbench
