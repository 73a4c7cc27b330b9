#pragma once

#include "ssdim/types.hpp"

namespace ssdim {

// ---------------------------------------------------------------------------
// Autocovariance model W_f W_p^* W_p W_f^*.
//
// The scalar transform t(z) solves
//   t = (1/M) tr R (-z I - z c t / (1 - z c^2 t^2) R)^{-1},
// the unique solution with Im t > 0 and Im(z t) > 0 for z in the upper half
// plane. The change of variable w(z) = z c t - 1/(c t) satisfies
// phi(w(z)) = z with
//   phi(w) = c w^2 m(w) (c m(w) - 1),   m(w) = (1/M) tr R (R - w I)^{-1},
// and the support of the equivalent measure is read off the extrema of phi.
// ---------------------------------------------------------------------------

struct SolveOptions {
  double damping = 0.5;
  int max_iterations = 10000;
  double tolerance = 1e-12;
};

/// Solve the fixed point for t(z), z not in R^+ (damped Picard with a Newton
/// fallback when the iteration stalls). Throws on non-convergence or z in R^+.
cplx solve_t_autocov(const NoiseModel& noise, cplx z,
                     const SolveOptions& opts = {});

/// Fixed-point residual |t - RHS(t, z)| of the returned value, for checking.
double t_autocov_residual(const NoiseModel& noise, cplx z, cplx t);

struct PhiValue {
  double value;
  double derivative;
};

/// phi(w) and phi'(w), w off the spectrum of R.
PhiValue phi_autocov(const NoiseModel& noise, double w);

/// Right edge only: w_plus is the largest root of phi' on (lambda_1, inf),
/// x_plus = phi(w_plus). `intervals` is left empty.
SupportAutocov support_edge_autocov(const NoiseModel& noise);

/// Full support: enumerates admissible extrema of phi (sign condition
/// w m(w) < 0, positive image) in the eigenvalue gaps and beyond lambda_1,
/// and assembles the ordered interval list starting at 0.
SupportAutocov autocov_support(const NoiseModel& noise);

/// Inverse of phi above the support: the unique w > w_plus with phi(w) = x.
/// Requires x > x_plus.
double w_of_x(const NoiseModel& noise, double x);

/// Boundary value t(x) for real x > x_plus, computed through w(x):
/// t(x) = (w/x) (1/M) tr R (R - w I)^{-1}.
double t_autocov_above_support(const NoiseModel& noise, double x);

struct DensityOptions {
  double epsilon = 1e-6;    // evaluate at x + i eps
  bool richardson = false;  // refine with eps -> eps/10 extrapolation
};

struct AutocovDensity {
  SpectralMeasure measure;    // no atoms; density of nu on the grid
  double mass_below_grid = 0; // 1 - integral: mass sitting left of the grid
};

/// Density of the probability measure nu at the grid points: grid must lie in
/// (0, x_plus]; the density diverges at 0+ so the unresolved left mass is
/// reported separately. Warm-started continuation along the grid.
AutocovDensity density_autocov(const NoiseModel& noise, const VectorXd& grid,
                               const DensityOptions& opts = {});

// ---------------------------------------------------------------------------
// Projector-product model Pi_p Pi_f (canonical correlation side).
//
// The limit law of the N eigenvalues is the free multiplicative square
// (c d_1 + (1-c) d_0) |x| (c d_1 + (1-c) d_0); its Stieltjes transform
// t~ has the closed form below with the sqrt branch cut on [0, inf)
// (sqrt(z) = sqrt|z| e^{i theta/2}, theta in [0, 2pi)). The law of the ML
// nonzero eigenvalues is nu = (1/c) nu~ - ((1-c)/c) d_0 with transform
// t = t~/c + (1-c)/(c z).
// ---------------------------------------------------------------------------

/// t~(z) for complex z off the support.
cplx cca_stieltjes_tilde(double c, cplx z);
/// Boundary value t~(x) on the real axis, x < 0 or x > 4c(1-c), x != 1.
double cca_stieltjes_tilde(double c, double x);

/// t(z) = t~(z)/c + (1-c)/(c z).
cplx cca_stieltjes(double c, cplx z);
double cca_stieltjes(double c, double x);

SupportCca cca_support(double c);

/// Density of nu on the grid (grid inside the open bulk (0, 4c(1-c))), plus
/// the unit atom of mass (2c-1)/c when c > 1/2. No atom at 0.
SpectralMeasure cca_density(double c, const VectorXd& grid);

/// f(x) = x (t~(x) / ((1-c) t(x)))^2 on [4c(1-c), 1]; strictly increasing,
/// f(4c(1-c)) = c/(1-c), f(1) = 1 for c < 1/2 and (c/(1-c))^2 for c > 1/2.
double f_ratio(double c, double x);

} // namespace ssdim
