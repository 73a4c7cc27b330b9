#include "ssdim/hankel_stats.hpp"

#include <algorithm>
#include <cmath>

namespace ssdim {

HankelPair build_hankel_pair(const MatrixXcd& samples, int L) {
  const int M = static_cast<int>(samples.rows());
  const long T = samples.cols();
  const long N = T - 2 * static_cast<long>(L) + 1;
  if (L < 1) throw std::invalid_argument("build_hankel_pair: L must be >= 1");
  if (N < 1)
    throw std::invalid_argument("build_hankel_pair: need at least N + 2L - 1 samples");
  HankelPair pair;
  pair.M = M;
  pair.L = L;
  pair.N = N;
  pair.Yp.resize(M * L, N);
  pair.Yf.resize(M * L, N);
  for (int i = 0; i < L; ++i) {
    pair.Yp.middleRows(i * M, M) = samples.middleCols(i, N);
    pair.Yf.middleRows(i * M, M) = samples.middleCols(L + i, N);
  }
  return pair;
}

EmpiricalSpectrum autocov_sample_spectrum(const HankelPair& pair) {
  const MatrixXcd S =
      (pair.Yf * pair.Yp.adjoint()) / static_cast<double>(pair.N);
  Eigen::BDCSVD<MatrixXcd> svd(S);
  EmpiricalSpectrum out;
  out.kind = EmpiricalSpectrum::Kind::autocov_squared;
  out.M = pair.M;
  out.L = pair.L;
  out.N = pair.N;
  out.c = static_cast<double>(pair.M) * pair.L / static_cast<double>(pair.N);
  out.eigs = svd.singularValues().array().square();
  return out;
}

EmpiricalSpectrum cca_sample_spectrum(const HankelPair& pair) {
  const int ML = pair.M * pair.L;
  // Orthonormal row-space bases: right singular vectors above the rank cut.
  auto row_basis = [&](const MatrixXcd& Y) {
    Eigen::BDCSVD<MatrixXcd> svd(Y, Eigen::ComputeThinV);
    const VectorXd sv = svd.singularValues();
    if (sv.size() == 0 || sv[0] <= 0.0)
      throw std::runtime_error("cca_sample_spectrum: zero data matrix");
    int rank = 0;
    for (int i = 0; i < sv.size(); ++i)
      if (sv[i] > 1e-10 * sv[0]) ++rank;
    return MatrixXcd(svd.matrixV().leftCols(rank)); // N x rank
  };
  const MatrixXcd Bp = row_basis(pair.Yp);
  const MatrixXcd Bf = row_basis(pair.Yf);

  Eigen::BDCSVD<MatrixXcd> cross(Bf.adjoint() * Bp);
  VectorXd cos2 = cross.singularValues().array().square();

  const long n_struct = std::max<long>(2 * static_cast<long>(ML) - pair.N, 0);
  if (n_struct > 0 && Bp.cols() == ML && Bf.cols() == ML) {
    for (long i = 0; i < n_struct && i < cos2.size(); ++i) cos2[i] = 1.0;
  }

  EmpiricalSpectrum out;
  out.kind = EmpiricalSpectrum::Kind::cca;
  out.M = pair.M;
  out.L = pair.L;
  out.N = pair.N;
  out.c = static_cast<double>(ML) / static_cast<double>(pair.N);
  out.eigs = VectorXd::Zero(pair.N);
  const long ncos = std::min<long>(cos2.size(), pair.N);
  for (long i = 0; i < ncos; ++i)
    out.eigs[i] = std::clamp(cos2[i], 0.0, 1.0);
  return out;
}

int estimate_s_threshold(const EmpiricalSpectrum& spec, double edge, double eps1) {
  int start = 0;
  if (spec.kind == EmpiricalSpectrum::Kind::cca && spec.c > 0.5)
    start = static_cast<int>(
        std::max<long>(2 * static_cast<long>(spec.M) * spec.L - spec.N, 0));
  const double cut = edge * (1.0 + eps1);
  int count = 0;
  for (int i = start; i < spec.eigs.size(); ++i)
    if (spec.eigs[i] > cut) ++count;
  return count;
}

RatioEstimate estimate_s_ratio(const EmpiricalSpectrum& spec, double eps2,
                               int kmax) {
  const auto& eig = spec.eigs;
  if (eig.size() < 2)
    throw std::invalid_argument("estimate_s_ratio: need at least 2 eigenvalues");
  const double floor = 1e-12 * eig[0];
  const int last = static_cast<int>(std::min<long>(kmax, eig.size() - 1));
  for (int k = 1; k <= last; ++k) {
    if (eig[k - 1] <= floor) return {k - 1, false}; // spectrum has ended
    if (eig[k] / eig[k - 1] > 1.0 - eps2) return {k - 1, false};
  }
  return {kmax, true};
}

} // namespace ssdim
