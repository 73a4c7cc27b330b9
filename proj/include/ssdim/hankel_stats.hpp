#pragma once

#include "ssdim/types.hpp"

namespace ssdim {

/// Past/future block-Hankel pair built from M x (N + 2L - 1) samples:
/// Yp block row i holds y_{i+j-1} at column j (1-based), Yf the same shifted
/// by L.
struct HankelPair {
  MatrixXcd Yp, Yf; // both ML x N
  int M = 0, L = 0;
  long N = 0;
};

HankelPair build_hankel_pair(const MatrixXcd& samples, int L);

struct EmpiricalSpectrum {
  enum class Kind { autocov_squared, cca };
  VectorXd eigs; // nonincreasing
  Kind kind = Kind::autocov_squared;
  int M = 0, L = 0;
  long N = 0;
  double c = 0.0;
};

/// Squared singular values of (1/N) Yf Yp^*, nonincreasing (length ML).
EmpiricalSpectrum autocov_sample_spectrum(const HankelPair& pair);

/// Eigenvalues of Pi_p Pi_f (length N): squared cosines of the principal
/// angles between the row spaces of Yp and Yf, padded with zeros. Row-space
/// bases come from rank-revealing SVDs (directions below 1e-10 of the top
/// singular value dropped); when both factors have full rank ML and
/// 2ML > N, the top 2ML - N values are the structural unit eigenvalues and
/// are snapped to 1.
EmpiricalSpectrum cca_sample_spectrum(const HankelPair& pair);

/// Count of eigenvalues above edge*(1+eps1). For the cca kind with c > 1/2
/// the structural unit eigenvalues are excluded first.
int estimate_s_threshold(const EmpiricalSpectrum& spec, double edge, double eps1);

struct RatioEstimate {
  int s = 0;
  bool overflow = false; // no qualifying ratio within kmax
};

/// s_hat = argmin_{1<=k<=kmax} { lambda_{k+1}/lambda_k > 1 - eps2 } - 1.
/// Eigenvalues below 1e-12 * lambda_1 terminate the scan at that position.
RatioEstimate estimate_s_ratio(const EmpiricalSpectrum& spec, double eps2,
                               int kmax = 20);

} // namespace ssdim
