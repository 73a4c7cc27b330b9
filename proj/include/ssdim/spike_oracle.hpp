#pragma once

#include "ssdim/state_space.hpp"
#include "ssdim/types.hpp"

namespace ssdim {

/// Finite-N prediction of the sample eigenvalues escaping the noise bulk.
struct SpikeReport {
  enum class Kind { autocov, cca };
  Kind kind = Kind::autocov;
  int s = 0;
  VectorXd rho;         // s predicted outlier locations, nonincreasing
  VectorXd oracle_eigs; // eigenvalues of the decision matrix at the edge
  double edge = 0.0;    // x_plus (autocov) or 4c(1-c) (cca)
  bool edge_degenerate = false; // a decision eigenvalue sits on the boundary
  bool no_escape = false;       // cca with c >= 1/2: no outlier regime
};

// ---------------------------------------------------------------------------
// Autocovariance side (decision matrix at the bulk edge + H-matrix roots)
// ---------------------------------------------------------------------------

/// Edge gram
///   G = (c w+ / sqrt(x+)) (1/M) tr(R (w+ I - R)^{-1})
///       [ (Theta^*(I_L (x) (w+ I - R)^{-1}) Theta)^{-1} - Delta^2 ].
MatrixXcd edge_gram_autocov(const NoiseModel& noise, const SignalStats& stats);

struct SpikeCount {
  int s = 0;
  bool edge_degenerate = false;
};

/// Number of strictly negative eigenvalues of [[G, Gamma^*], [Gamma, G]];
/// an eigenvalue within 1e-10 * norm of zero marks the count degenerate.
SpikeCount autocov_spike_count(const NoiseModel& noise, const SignalStats& stats);

/// H(y) for y > sqrt(x_plus), assembled from the real-axis continuation of t
/// through w(y^2); Hermitian 2r x 2r with eigenvalues strictly increasing
/// in y.
MatrixXcd H_matrix(const NoiseModel& noise, const SignalStats& stats, double y);

/// Full prediction: count from the edge matrix, locations from bisecting the
/// sorted eigenvalue curves of H to their zero crossings; rho_k = y_k^2.
SpikeReport autocov_outliers(const NoiseModel& noise, const SignalStats& stats);

// ---------------------------------------------------------------------------
// CCA side (F matrix against the threshold c/(1-c), locations through f)
// ---------------------------------------------------------------------------

/// F = Omega^* (I + D^{-1} G^{-1} D^{-1})^{-1} Omega (I + D^{-1} G^{-1} D^{-1})^{-1}
/// with D = Delta, G the whitened gram Theta^*(I_L (x) R^{-1})Theta.
MatrixXcd cca_F_matrix(const SignalStats& stats);

/// Eigenvalues of F, sorted nonincreasing. They are real up to roundoff;
/// imaginary parts above 1e-8 abort.
VectorXd cca_F_eigenvalues(const SignalStats& stats);

/// s = #{eigenvalues of F above c/(1-c) + kappa}; each location solves
/// f(rho) = lambda_k on (4c(1-c), 1). For c >= 1/2 returns the no-escape
/// report with s = 0.
SpikeReport cca_outliers(double c, const SignalStats& stats,
                         double kappa = 1e-3);

/// Minimal delta^2/sigma^2 for s = P = 1 in the rank-one equal-delta model:
/// sqrt(c) / (sqrt(1-c) - sqrt(c)). Defined for c < 1/2 only.
double snr_threshold_cca(double c);

} // namespace ssdim
