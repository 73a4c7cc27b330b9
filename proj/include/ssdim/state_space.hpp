#pragma once

#include <cstdint>

#include "ssdim/types.hpp"

namespace ssdim {

/// Minimal state-space realization
///   x_{n+1} = A x_n + B i_n,   u_n = C x_n + D i_n
/// with A: PxP, B: PxK, C: MxP, D: MxK, driven by a unit-covariance complex
/// white noise i_n. `make_checked` enforces rho(A) < 1, (C,A) observable and
/// (A,B) controllable; the plain aggregate skips the checks (used for
/// deliberately degenerate test models).
struct StateSpaceModel {
  MatrixXcd A, B, C, D;

  int P() const { return static_cast<int>(A.rows()); }
  int K() const { return static_cast<int>(B.cols()); }
  int M() const { return static_cast<int>(C.rows()); }

  double spectral_radius() const;
  static StateSpaceModel make_checked(MatrixXcd A, MatrixXcd B, MatrixXcd C,
                                      MatrixXcd D);
};

/// Theoretical L-block second-order statistics of the signal u.
struct SignalStats {
  int L = 0;
  MatrixXcd Ru;     // ML x ML covariance of (u_n, ..., u_{n+L-1})
  MatrixXcd Rfp;    // ML x ML cross covariance future|past
  MatrixXcd theta;  // ML x r, orthonormal eigenvectors of Ru
  VectorXd delta2;  // r eigenvalues of Ru, nonincreasing, > 0
  MatrixXcd gamma;  // r x r, theta^* Rfp theta
  MatrixXcd omega;  // r x r, Delta^{-1} gamma Delta^{-1}
  MatrixXcd gcca;   // r x r, theta^* (I_L (x) R^{-1}) theta
  int r = 0;        // rank of Ru
  int P = 0;        // state dimension
};

/// Solve R_x = A R_x A^* + B B^* (stationary state covariance).
MatrixXcd lyapunov_state_cov(const MatrixXcd& A, const MatrixXcd& B);

/// Exact L-block statistics from the model and the noise spectrum; requires
/// L >= P. The rank r keeps eigenvalues of Ru above
/// max(1e-10, 1e-8 * largest); eigenvector phases are fixed so that each
/// column's largest-modulus entry is real positive.
SignalStats theoretical_stats(const StateSpaceModel& model,
                              const NoiseModel& noise, int L);

struct SimulateOptions {
  bool real_gaussian = false; // default is circular complex Gaussian
};

/// M x (N + 2L - 1) samples of y_n = u_n + v_n. The state starts at
/// stationarity (x_1 ~ N_c(0, R_x)); v_n = R^{1/2} g_n with g_n iid standard.
/// Draw order per seed: x_1 (P values), then for each time step i_n (K
/// values) followed by v_n (M values). Bit-reproducible for a fixed seed.
MatrixXcd simulate(const StateSpaceModel& model, const NoiseModel& noise,
                   long N, int L, std::uint64_t seed,
                   const SimulateOptions& opts = {});

/// Noise-only samples (u = 0), same layout and draw order for v as above.
MatrixXcd simulate_noise_only(const NoiseModel& noise, long N, int L,
                              std::uint64_t seed,
                              const SimulateOptions& opts = {});

// ---------------------------------------------------------------------------
// Constructive example models (white noise R = sigma^2 I, P = L = 1).
// ---------------------------------------------------------------------------

struct OddSOptions {
  double a = 0.2;          // AR coefficient; b_k follow from it
  double delta_margin = 0.3; // delta = sqrt(w_plus - sigma^2) + margin
  double delta2_override = 0.0; // if > 0, use this delta^2 instead
  VectorXd delta2_profile;  // if size r, per-direction delta_k^2 (nonincreasing)
  std::uint64_t theta_seed = 1;
};

struct ExampleModel {
  StateSpaceModel model;
  int expected_autocov_s = 0;
  int expected_cca_s = 0;
  double delta2 = 0.0;
};

/// P=1, K=r-1 model whose autocovariance spike count is s = 2r-1: all
/// delta_k^2 > w_plus - sigma^2 (equal by default, or a nonincreasing
/// profile), Haar-random orthonormal Theta, b_k equal and
/// a^2 = 1 - sum b_k^2 / delta_1^2. Requires r >= 2.
ExampleModel example_model_odd_s(int M, int r, double c, double sigma,
                                 const OddSOptions& opts = {});

struct S2Options {
  double delta2_offset = 1.0; // delta^2 = (w_plus - sigma^2) + offset
  double a_fraction = 0.9;    // a as a fraction of the admissible bound
  std::uint64_t theta_seed = 1;
};

/// P=K=r=1 model u_n = theta x_{n+1} with s = 2 on the autocovariance side
/// when a stays strictly below the Schur-complement bound. A fraction >= 1
/// is accepted but the expected count drops to {0,1} and is recomputed.
ExampleModel example_model_s2(int M, double c, double sigma,
                              const S2Options& opts = {});

// ---------------------------------------------------------------------------
// Monte-Carlo presets
// ---------------------------------------------------------------------------

struct McPreset {
  StateSpaceModel model;
  NoiseModel noise;
  int L = 1;
  int expected_autocov_s = 0;
  int expected_cca_s = 0;
};

/// "table":   K=2, r=3, a=0.2, equal deltas sqrt(w_plus-1)+0.3, R=I, L=1;
///            the autocovariance oracle gives s=5, the CCA oracle s=P=1.
///            (M, N) choose the grid point; c = M/N.
/// "cca_fig": M=130, N=2000, L=4, cosine noise spectrum, P=2, K=1 model
///            calibrated so the CCA oracle gives s=1 (args M, N ignored).
/// "cca_fig2": same but with both modes above the threshold, s=2.
McPreset mc_model(const std::string& preset, int M, long N);

} // namespace ssdim
