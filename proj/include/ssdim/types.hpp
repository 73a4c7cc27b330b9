#pragma once

#include <complex>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

namespace ssdim {

using cplx = std::complex<double>;
using Eigen::MatrixXcd;
using Eigen::MatrixXd;
using Eigen::VectorXcd;
using Eigen::VectorXd;

/// Noise covariance described by its eigenvalue spectrum. The covariance is
/// taken diagonal in the standard basis, R = diag(lambda), with lambda sorted
/// nonincreasing. All spectral functionals used downstream depend on R only
/// through this spectrum and through Theta^*(I_L (x) g(R))Theta, so the basis
/// convention matters and is fixed here once.
struct NoiseModel {
  int M = 0;       // cross-section dimension
  int L = 1;       // Hankel depth
  long N = 0;      // sample size
  VectorXd lambda; // eigenvalues of R, nonincreasing, all > 0
  double c = 0.0;  // M*L/N, must lie in (0,1)

  NoiseModel() = default;
  NoiseModel(int M_, int L_, long N_, VectorXd lambda_);

  /// R = sigma2 * I.
  static NoiseModel white(int M, int L, long N, double sigma2 = 1.0);
  /// lambda_k = 1/2 + (pi/4) cos(pi (k-1) / (2M)); trace(R)/M ~ 1.
  static NoiseModel cosine(int M, int L, long N);

  /// (1/M) tr R.
  double trace_mean() const { return lambda.mean(); }
  /// m(w) = (1/M) tr R (R - w I)^{-1} = (1/M) sum lambda_k / (lambda_k - w).
  double stieltjes_m(double w) const;
  /// m'(w) = (1/M) sum lambda_k / (lambda_k - w)^2.
  double stieltjes_m_prime(double w) const;
};

/// Absolutely continuous part sampled on a grid plus point masses.
struct SpectralMeasure {
  VectorXd grid;    // strictly increasing
  VectorXd density; // same length, >= 0
  std::vector<std::pair<double, double>> atoms; // (location, mass)

  /// Trapezoid integral of the density plus atom masses.
  double total_mass() const;
  /// Trapezoid integral of the density over grid points <= x, plus atoms <= x.
  double cdf(double x) const;
};

/// Support of the autocovariance-model deterministic equivalent.
/// Intervals are ordered and disjoint; the first starts at 0 and the last
/// ends at x_plus = phi(w_plus). Operations that locate only the right edge
/// leave `intervals` empty.
struct SupportAutocov {
  std::vector<std::pair<double, double>> intervals;
  double w_plus = 0.0;
  double x_plus = 0.0;
};

/// Support of the projector-product (CCA) deterministic equivalent:
/// [0, 4c(1-c)] plus a unit atom when c > 1/2.
struct SupportCca {
  double bulk_right = 0.0;
  bool has_unit_atom = false;
  double atom_mass_at_one = 0.0;
};

} // namespace ssdim
