#include "ssdim/noise_equivalents.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace ssdim {

namespace {

bool on_positive_axis(cplx z) { return z.imag() == 0.0 && z.real() >= 0.0; }

} // namespace

NoiseModel::NoiseModel(int M_, int L_, long N_, VectorXd lambda_)
    : M(M_), L(L_), N(N_), lambda(std::move(lambda_)) {
  if (M <= 0 || L <= 0 || N <= 0)
    throw std::invalid_argument("NoiseModel: dimensions must be positive");
  if (lambda.size() != M)
    throw std::invalid_argument("NoiseModel: spectrum length must equal M");
  c = static_cast<double>(M) * L / static_cast<double>(N);
  if (!(c > 0.0 && c < 1.0))
    throw std::invalid_argument("NoiseModel: c = ML/N must lie in (0,1)");
  for (int k = 0; k < M; ++k) {
    if (!std::isfinite(lambda[k]) || lambda[k] <= 0.0)
      throw std::invalid_argument("NoiseModel: spectrum must be positive and finite");
    if (k > 0 && lambda[k] > lambda[k - 1] + 1e-14 * lambda[k - 1])
      throw std::invalid_argument("NoiseModel: spectrum must be nonincreasing");
  }
}

NoiseModel NoiseModel::white(int M, int L, long N, double sigma2) {
  return NoiseModel(M, L, N, VectorXd::Constant(M, sigma2));
}

NoiseModel NoiseModel::cosine(int M, int L, long N) {
  VectorXd lam(M);
  for (int k = 0; k < M; ++k)
    lam[k] = 0.5 + (M_PI / 4.0) * std::cos(M_PI * k / (2.0 * M));
  return NoiseModel(M, L, N, std::move(lam));
}

double NoiseModel::stieltjes_m(double w) const {
  double s = 0.0;
  for (int k = 0; k < M; ++k) s += lambda[k] / (lambda[k] - w);
  return s / M;
}

double NoiseModel::stieltjes_m_prime(double w) const {
  double s = 0.0;
  for (int k = 0; k < M; ++k) {
    const double d = lambda[k] - w;
    s += lambda[k] / (d * d);
  }
  return s / M;
}

double SpectralMeasure::total_mass() const {
  double m = 0.0;
  for (int i = 0; i + 1 < grid.size(); ++i)
    m += 0.5 * (density[i] + density[i + 1]) * (grid[i + 1] - grid[i]);
  for (const auto& a : atoms) m += a.second;
  return m;
}

double SpectralMeasure::cdf(double x) const {
  double m = 0.0;
  for (int i = 0; i + 1 < grid.size(); ++i) {
    if (grid[i + 1] <= x) {
      m += 0.5 * (density[i] + density[i + 1]) * (grid[i + 1] - grid[i]);
    } else if (grid[i] < x) {
      // partial trapezoid with linear interpolation
      const double f = (x - grid[i]) / (grid[i + 1] - grid[i]);
      const double dx_mid = density[i] + f * (density[i + 1] - density[i]);
      m += 0.5 * (density[i] + dx_mid) * (x - grid[i]);
    }
  }
  for (const auto& a : atoms)
    if (a.first <= x) m += a.second;
  return m;
}

// --------------------------------------------------------------------------
// Fixed point for t(z)
// --------------------------------------------------------------------------

namespace {

cplx t_rhs(const NoiseModel& noise, cplx z, cplx t) {
  const double c = noise.c;
  const cplx u = z * c * t / (1.0 - z * c * c * t * t);
  cplx s = 0.0;
  for (int k = 0; k < noise.M; ++k)
    s += noise.lambda[k] / (-z - u * noise.lambda[k]);
  return s / static_cast<double>(noise.M);
}

// d/dt of (t - RHS(t, z)), used by the Newton fallback.
cplx t_residual_derivative(const NoiseModel& noise, cplx z, cplx t) {
  const double c = noise.c;
  const cplx one_minus = 1.0 - z * c * c * t * t;
  const cplx u = z * c * t / one_minus;
  const cplx du = z * c * (1.0 + z * c * c * t * t) / (one_minus * one_minus);
  cplx s = 0.0;
  for (int k = 0; k < noise.M; ++k) {
    const cplx den = -z - u * noise.lambda[k];
    s += noise.lambda[k] * noise.lambda[k] * du / (den * den);
  }
  return 1.0 - s / static_cast<double>(noise.M);
}

} // namespace

cplx solve_t_autocov(const NoiseModel& noise, cplx z, const SolveOptions& opts) {
  if (on_positive_axis(z))
    throw std::invalid_argument("solve_t_autocov: z must lie off [0, inf)");

  cplx t = -noise.trace_mean() / z;
  double res = std::numeric_limits<double>::infinity();
  double prev_res = res;
  int stall = 0;
  for (int it = 0; it < opts.max_iterations; ++it) {
    const cplx rhs = t_rhs(noise, z, t);
    const cplx next = (1.0 - opts.damping) * t + opts.damping * rhs;
    res = std::abs(next - t);
    t = next;
    if (res < opts.tolerance) break;
    if (res > 0.999 * prev_res) ++stall; else stall = 0;
    prev_res = res;
    if (stall >= 50) {
      // Picard has flattened out: polish with Newton on t - RHS(t).
      for (int nit = 0; nit < 100; ++nit) {
        const cplx g = t - t_rhs(noise, z, t);
        if (std::abs(g) < opts.tolerance) break;
        const cplx dg = t_residual_derivative(noise, z, t);
        if (std::abs(dg) < 1e-300) break;
        t -= g / dg;
      }
      break;
    }
  }
  if (t_autocov_residual(noise, z, t) > 1e-10)
    throw std::runtime_error("solve_t_autocov: fixed point did not converge");
  if (z.imag() > 0.0 && (t.imag() <= 0.0 || (z * t).imag() <= 0.0))
    throw std::runtime_error("solve_t_autocov: converged to inadmissible branch");
  return t;
}

double t_autocov_residual(const NoiseModel& noise, cplx z, cplx t) {
  return std::abs(t - t_rhs(noise, z, t));
}

// --------------------------------------------------------------------------
// phi and the support
// --------------------------------------------------------------------------

PhiValue phi_autocov(const NoiseModel& noise, double w) {
  for (int k = 0; k < noise.M; ++k)
    if (w == noise.lambda[k])
      throw std::invalid_argument("phi_autocov: w coincides with an eigenvalue of R");
  const double c = noise.c;
  const double m = noise.stieltjes_m(w);
  const double mp = noise.stieltjes_m_prime(w);
  PhiValue out;
  out.value = c * w * w * m * (c * m - 1.0);
  out.derivative = c * (2.0 * w * m * (c * m - 1.0) + w * w * mp * (2.0 * c * m - 1.0));
  return out;
}

namespace {

double bisect_phi_prime(const NoiseModel& noise, double lo, double hi) {
  double flo = phi_autocov(noise, lo).derivative;
  for (int it = 0; it < 200; ++it) {
    const double mid = 0.5 * (lo + hi);
    const double fmid = phi_autocov(noise, mid).derivative;
    if ((flo < 0.0) == (fmid < 0.0)) {
      lo = mid;
      flo = fmid;
    } else {
      hi = mid;
    }
    if (hi - lo < 1e-13 * std::max(1.0, std::abs(lo))) break;
  }
  return 0.5 * (lo + hi);
}

// All roots of phi' in (lo, hi), located by a sign-change scan over `points`
// log- or linearly-spaced samples.
std::vector<double> phi_prime_roots(const NoiseModel& noise, double lo, double hi,
                                    int points, bool log_spacing) {
  std::vector<double> roots;
  double prev_w = lo;
  double prev_d = phi_autocov(noise, prev_w).derivative;
  for (int i = 1; i <= points; ++i) {
    const double f = static_cast<double>(i) / points;
    const double w = log_spacing ? lo * std::pow(hi / lo, f) : lo + f * (hi - lo);
    const double d = phi_autocov(noise, w).derivative;
    if ((prev_d < 0.0) != (d < 0.0))
      roots.push_back(bisect_phi_prime(noise, prev_w, w));
    prev_w = w;
    prev_d = d;
  }
  return roots;
}

} // namespace

SupportAutocov support_edge_autocov(const NoiseModel& noise) {
  const double lam1 = noise.lambda[0];
  const double lo = lam1 * (1.0 + 1e-6);
  const double hi = lam1 * 1e3;
  const auto roots = phi_prime_roots(noise, lo, hi, 10000, true);
  if (roots.empty())
    throw std::runtime_error("support_edge_autocov: no root of phi' above lambda_1");
  SupportAutocov out;
  out.w_plus = roots.back();
  out.x_plus = phi_autocov(noise, out.w_plus).value;
  return out;
}

SupportAutocov autocov_support(const NoiseModel& noise) {
  SupportAutocov edge = support_edge_autocov(noise);

  // Candidate edges: admissible extrema in the gaps of the spectrum. The
  // regions (0, lambda_M) and w < 0 never contribute: there w m(w) > 0,
  // respectively phi(w) < 0.
  std::vector<double> values;
  std::vector<double> distinct;
  for (int k = 0; k < noise.M; ++k)
    if (distinct.empty() || distinct.back() - noise.lambda[k] > 1e-12 * noise.lambda[0])
      distinct.push_back(noise.lambda[k]);
  for (size_t g = 0; g + 1 < distinct.size(); ++g) {
    const double hi = distinct[g];     // upper end of the gap
    const double lo = distinct[g + 1]; // lower end
    const double pad = 1e-7 * (hi - lo);
    auto roots = phi_prime_roots(noise, lo + pad, hi - pad, 4000, false);
    // a second pass with log spacing catches structure crowding the lower end
    for (double w : phi_prime_roots(noise, lo + pad, hi - pad, 4000, true)) {
      bool dup = false;
      for (double r : roots)
        if (std::abs(r - w) < 1e-9 * std::max(1.0, std::abs(w))) dup = true;
      if (!dup) roots.push_back(w);
    }
    for (double w : roots) {
      const double m = noise.stieltjes_m(w);
      const double x = phi_autocov(noise, w).value;
      if (w * m < 0.0 && x > 0.0) values.push_back(x);
    }
  }
  values.push_back(edge.x_plus);
  std::sort(values.begin(), values.end());

  if (values.size() % 2 == 0)
    throw std::runtime_error("autocov_support: inconsistent edge enumeration");
  edge.intervals.emplace_back(0.0, values[0]);
  for (size_t i = 1; i + 1 < values.size(); i += 2)
    edge.intervals.emplace_back(values[i], values[i + 1]);
  return edge;
}

double w_of_x(const NoiseModel& noise, double x) {
  const SupportAutocov edge = support_edge_autocov(noise);
  if (!(x > edge.x_plus))
    throw std::invalid_argument("w_of_x: x must exceed x_plus");
  double lo = edge.w_plus;
  double hi = std::max(2.0 * edge.w_plus, noise.lambda[0] * 4.0);
  while (phi_autocov(noise, hi).value < x) {
    hi *= 2.0;
    if (hi > 1e18) throw std::runtime_error("w_of_x: bracket expansion failed");
  }
  for (int it = 0; it < 200; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (phi_autocov(noise, mid).value < x) lo = mid; else hi = mid;
    if (hi - lo < 1e-14 * std::max(1.0, hi)) break;
  }
  return 0.5 * (lo + hi);
}

double t_autocov_above_support(const NoiseModel& noise, double x) {
  const double w = w_of_x(noise, x);
  return (w / x) * noise.stieltjes_m(w);
}

AutocovDensity density_autocov(const NoiseModel& noise, const VectorXd& grid,
                               const DensityOptions& opts) {
  const SupportAutocov edge = support_edge_autocov(noise);
  if (grid.size() == 0)
    throw std::invalid_argument("density_autocov: empty grid");
  for (int i = 0; i < grid.size(); ++i) {
    if (!(grid[i] > 0.0 && grid[i] <= edge.x_plus * (1.0 + 1e-12)))
      throw std::invalid_argument("density_autocov: grid must lie in (0, x_plus]");
    if (i > 0 && grid[i] <= grid[i - 1])
      throw std::invalid_argument("density_autocov: grid must be increasing");
  }

  auto eval = [&](double x, double eps, cplx warm, cplx* t_out) {
    const cplx z(x, eps);
    SolveOptions sopt;
    cplx t;
    if (std::isfinite(warm.real())) {
      // continuation: damped Picard from the neighbouring solution
      t = warm;
      for (int it = 0; it < sopt.max_iterations; ++it) {
        const cplx next = 0.5 * t + 0.5 * t_rhs(noise, z, t);
        if (std::abs(next - t) < sopt.tolerance) { t = next; break; }
        t = next;
      }
      if (t_autocov_residual(noise, z, t) > 1e-10) t = solve_t_autocov(noise, z);
    } else {
      t = solve_t_autocov(noise, z);
    }
    *t_out = t;
    const cplx u = z * noise.c * t / (1.0 - z * noise.c * noise.c * t * t);
    cplx tr = 0.0;
    for (int k = 0; k < noise.M; ++k) tr += -1.0 / (z + u * noise.lambda[k]);
    return tr.imag() / (M_PI * noise.M);
  };

  AutocovDensity out;
  out.measure.grid = grid;
  out.measure.density.resize(grid.size());
  cplx warm(std::numeric_limits<double>::quiet_NaN(), 0.0);
  for (int i = 0; i < grid.size(); ++i) {
    cplx t;
    double d = eval(grid[i], opts.epsilon, warm, &t);
    if (opts.richardson) {
      cplx t2;
      const double d2 = eval(grid[i], opts.epsilon / 10.0, t, &t2);
      d = d2 + (d2 - d) / 9.0;
    }
    out.measure.density[i] = std::max(0.0, d);
    warm = t;
  }
  out.mass_below_grid = 1.0 - out.measure.total_mass();
  return out;
}

// --------------------------------------------------------------------------
// Projector-product (CCA) closed forms
// --------------------------------------------------------------------------

namespace {

// sqrt with the branch theta in [0, 2pi): cut along [0, inf).
cplx sqrt_upper(cplx z) {
  double theta = std::arg(z);
  if (theta < 0.0) theta += 2.0 * M_PI;
  return std::sqrt(std::abs(z)) * std::polar(1.0, 0.5 * theta);
}

void check_c(double c) {
  if (!(c > 0.0 && c < 1.0))
    throw std::invalid_argument("c must lie in (0,1)");
}

} // namespace

cplx cca_stieltjes_tilde(double c, cplx z) {
  check_c(c);
  if (z.imag() == 0.0) return cplx(cca_stieltjes_tilde(c, z.real()), 0.0);
  const cplx root = sqrt_upper(z * (z - 4.0 * c * (1.0 - c)));
  return (z - 2.0 * (1.0 - c) + root) / (2.0 * (1.0 - z) * z);
}

double cca_stieltjes_tilde(double c, double x) {
  check_c(c);
  const double edge = 4.0 * c * (1.0 - c);
  const double disc = x * (x - edge);
  if (x < 0.0)
    return (x - 2.0 * (1.0 - c) - std::sqrt(disc)) / (2.0 * (1.0 - x) * x);
  if (x > edge && x != 1.0)
    return (x - 2.0 * (1.0 - c) + std::sqrt(disc)) / (2.0 * (1.0 - x) * x);
  throw std::invalid_argument("cca_stieltjes_tilde: x inside the support");
}

cplx cca_stieltjes(double c, cplx z) {
  if (z.imag() == 0.0) return cplx(cca_stieltjes(c, z.real()), 0.0);
  return cca_stieltjes_tilde(c, z) / c + (1.0 - c) / (c * z);
}

double cca_stieltjes(double c, double x) {
  check_c(c);
  const double edge = 4.0 * c * (1.0 - c);
  const double disc = x * (x - edge);
  if (x < 0.0)
    return (x * (2.0 * c - 1.0) - std::sqrt(disc)) / (2.0 * c * (1.0 - x) * x);
  if (x > edge && x != 1.0)
    return (x * (2.0 * c - 1.0) + std::sqrt(disc)) / (2.0 * c * (1.0 - x) * x);
  throw std::invalid_argument("cca_stieltjes: x inside the support");
}

SupportCca cca_support(double c) {
  check_c(c);
  SupportCca s;
  s.bulk_right = 4.0 * c * (1.0 - c);
  s.atom_mass_at_one = std::max(2.0 * c - 1.0, 0.0);
  s.has_unit_atom = s.atom_mass_at_one > 0.0;
  return s;
}

SpectralMeasure cca_density(double c, const VectorXd& grid) {
  check_c(c);
  const double edge = 4.0 * c * (1.0 - c);
  SpectralMeasure out;
  out.grid = grid;
  out.density.resize(grid.size());
  for (int i = 0; i < grid.size(); ++i) {
    const double x = grid[i];
    if (!(x > 0.0 && x < edge))
      throw std::invalid_argument("cca_density: grid must lie in (0, 4c(1-c))");
    if (i > 0 && x <= grid[i - 1])
      throw std::invalid_argument("cca_density: grid must be increasing");
    out.density[i] = std::sqrt(x * (edge - x)) / (2.0 * M_PI * c * x * (1.0 - x));
  }
  // nu carries the nonzero spectrum: the unit atom of the free-convolution
  // law rescales by 1/c so nu stays a probability measure.
  if (c > 0.5) out.atoms.emplace_back(1.0, (2.0 * c - 1.0) / c);
  return out;
}

double f_ratio(double c, double x) {
  check_c(c);
  const double edge = 4.0 * c * (1.0 - c);
  if (!(x >= edge - 1e-12 && x <= 1.0 + 1e-12))
    throw std::invalid_argument("f_ratio: x must lie in [4c(1-c), 1]");
  // Both endpoint values are 0/0 limits of the raw formula.
  if (std::abs(x - 1.0) < 1e-9) {
    if (c > 0.5) return (c / (1.0 - c)) * (c / (1.0 - c));
    return 1.0;
  }
  if (x - edge < 1e-12) return c / (1.0 - c);
  const double tt = cca_stieltjes_tilde(c, x);
  const double t = cca_stieltjes(c, x);
  const double ratio = tt / ((1.0 - c) * t);
  return x * ratio * ratio;
}

} // namespace ssdim
