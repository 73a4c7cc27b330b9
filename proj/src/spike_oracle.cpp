#include "ssdim/spike_oracle.hpp"

#include "ssdim/noise_equivalents.hpp"

#include <algorithm>
#include <cmath>

namespace ssdim {

namespace {

// Theta^* (I_L (x) diag(f(lambda))) Theta with R diagonal.
MatrixXcd theta_weighted_gram(const NoiseModel& noise, const SignalStats& stats,
                              const VectorXd& weights_per_lambda) {
  VectorXd w(noise.M * stats.L);
  for (int b = 0; b < stats.L; ++b)
    for (int m = 0; m < noise.M; ++m)
      w[b * noise.M + m] = weights_per_lambda[m];
  MatrixXcd g = stats.theta.adjoint() * w.asDiagonal() * stats.theta;
  return 0.5 * (g + g.adjoint().eval());
}

VectorXd hermitian_eigs_descending(const MatrixXcd& H) {
  Eigen::SelfAdjointEigenSolver<MatrixXcd> es(H);
  return es.eigenvalues().reverse();
}

} // namespace

MatrixXcd edge_gram_autocov(const NoiseModel& noise, const SignalStats& stats) {
  const SupportAutocov edge = support_edge_autocov(noise);
  const double wp = edge.w_plus;
  double trace = 0.0;
  VectorXd weights(noise.M);
  for (int m = 0; m < noise.M; ++m) {
    weights[m] = 1.0 / (wp - noise.lambda[m]);
    trace += noise.lambda[m] * weights[m];
  }
  trace /= noise.M;
  const MatrixXcd inner = theta_weighted_gram(noise, stats, weights);
  Eigen::FullPivLU<MatrixXcd> lu(inner);
  if (!lu.isInvertible())
    throw std::runtime_error("edge_gram_autocov: singular inner gram");
  const MatrixXcd inv = lu.inverse();
  const double scale = noise.c * wp / std::sqrt(edge.x_plus) * trace;
  MatrixXcd g = scale * (inv - MatrixXcd(stats.delta2.asDiagonal()));
  return 0.5 * (g + g.adjoint().eval());
}

namespace {

MatrixXcd edge_decision_matrix(const MatrixXcd& G, const MatrixXcd& gamma) {
  const int r = static_cast<int>(G.rows());
  MatrixXcd H(2 * r, 2 * r);
  H.topLeftCorner(r, r) = G;
  H.bottomRightCorner(r, r) = G;
  H.topRightCorner(r, r) = gamma.adjoint();
  H.bottomLeftCorner(r, r) = gamma;
  return H;
}

} // namespace

SpikeCount autocov_spike_count(const NoiseModel& noise, const SignalStats& stats) {
  const MatrixXcd H =
      edge_decision_matrix(edge_gram_autocov(noise, stats), stats.gamma);
  const VectorXd eig = hermitian_eigs_descending(H);
  const double thr = 1e-10 * std::max(1.0, eig.cwiseAbs().maxCoeff());
  SpikeCount out;
  for (int i = 0; i < eig.size(); ++i) {
    if (eig[i] < -thr) ++out.s;
    else if (std::abs(eig[i]) <= thr) out.edge_degenerate = true;
  }
  return out;
}

MatrixXcd H_matrix(const NoiseModel& noise, const SignalStats& stats, double y) {
  const SupportAutocov edge = support_edge_autocov(noise);
  const double y_edge = std::sqrt(edge.x_plus);
  if (!(y >= y_edge * (1.0 - 1e-12)))
    throw std::invalid_argument("H_matrix: y must exceed sqrt(x_plus)");
  // w(x) has square-root behaviour at the edge, so evaluations within
  // rounding of sqrt(x_plus) use the exact edge values.
  const double x = std::max(y * y, edge.x_plus);
  const double w = x <= edge.x_plus * (1.0 + 1e-12) ? edge.w_plus
                                                    : w_of_x(noise, x);
  const double t = (w / x) * noise.stieltjes_m(w); // boundary value of t at x
  const double bt = y * t;                          // bold t(y) = y t(y^2)
  const double denom = 1.0 - noise.c * noise.c * bt * bt;

  VectorXd weights(noise.M);
  for (int m = 0; m < noise.M; ++m) weights[m] = 1.0 / (noise.lambda[m] - w);
  const MatrixXcd Tbeta = (w / y) * theta_weighted_gram(noise, stats, weights);
  Eigen::FullPivLU<MatrixXcd> lu(Tbeta);
  if (!lu.isInvertible())
    throw std::runtime_error("H_matrix: singular T_beta");
  const MatrixXcd Tbeta_inv = lu.inverse();

  const int r = stats.r;
  const MatrixXcd diag =
      (noise.c * bt / denom) * MatrixXcd(stats.delta2.asDiagonal()) - Tbeta_inv;
  MatrixXcd H(2 * r, 2 * r);
  H.topLeftCorner(r, r) = diag;
  H.bottomRightCorner(r, r) = diag;
  H.topRightCorner(r, r) = stats.gamma.adjoint() / denom;
  H.bottomLeftCorner(r, r) = stats.gamma / denom;
  return 0.5 * (H + H.adjoint().eval());
}

SpikeReport autocov_outliers(const NoiseModel& noise, const SignalStats& stats) {
  const SupportAutocov edge = support_edge_autocov(noise);
  const SpikeCount count = autocov_spike_count(noise, stats);

  SpikeReport rep;
  rep.kind = SpikeReport::Kind::autocov;
  rep.edge = edge.x_plus;
  rep.edge_degenerate = count.edge_degenerate;
  rep.s = count.s;
  const MatrixXcd Hedge =
      edge_decision_matrix(edge_gram_autocov(noise, stats), stats.gamma);
  rep.oracle_eigs = hermitian_eigs_descending(Hedge);
  rep.rho.resize(count.s);
  if (count.s == 0) return rep;

  const int dim = 2 * stats.r;
  const double y_edge = std::sqrt(edge.x_plus);
  const double delta0 = 1e-6;
  auto eig_at = [&](double y) { return hermitian_eigs_descending(H_matrix(noise, stats, y)); };

  // Sorted eigenvalue curves are strictly increasing in y, so the j-th curve
  // (ascending order) crosses zero exactly once when it starts negative.
  const VectorXd at_lo = eig_at(y_edge + delta0);
  double y_hi = std::max(2.0 * y_edge, 1.0);
  VectorXd at_hi = eig_at(y_hi);
  while (at_hi[dim - 1] <= 0.0) {
    y_hi *= 2.0;
    if (y_hi > 1e12)
      throw std::runtime_error("autocov_outliers: eigenvalues never turn positive");
    at_hi = eig_at(y_hi);
  }

  // The k-th most negative curve at the edge crosses zero last, so it yields
  // the k-th largest outlier.
  for (int k = 0; k < count.s; ++k) {
    const int j = dim - 1 - k;
    if (at_lo[j] >= 0.0) {
      // crossing happened inside (sqrt(x+), sqrt(x+)+delta0): report on edge
      rep.edge_degenerate = true;
      rep.rho[k] = edge.x_plus;
      continue;
    }
    double lo = y_edge + delta0, hi = y_hi;
    for (int it = 0; it < 200; ++it) {
      const double mid = 0.5 * (lo + hi);
      if (eig_at(mid)[j] < 0.0) lo = mid; else hi = mid;
      if (hi - lo < 1e-11 * std::max(1.0, hi)) break;
    }
    const double y_cross = 0.5 * (lo + hi);
    rep.rho[k] = y_cross * y_cross; // nonincreasing in k
  }
  return rep;
}

// --------------------------------------------------------------------------
// CCA side
// --------------------------------------------------------------------------

MatrixXcd cca_F_matrix(const SignalStats& stats) {
  const int r = stats.r;
  const VectorXd dinv = stats.delta2.cwiseSqrt().cwiseInverse();
  Eigen::FullPivLU<MatrixXcd> lu(stats.gcca);
  if (!lu.isInvertible())
    throw std::runtime_error("cca_F_matrix: singular whitened gram");
  const MatrixXcd core = MatrixXcd::Identity(r, r) +
                         dinv.asDiagonal() * lu.inverse() * dinv.asDiagonal();
  const MatrixXcd core_inv = core.fullPivLu().inverse();
  return stats.omega.adjoint() * core_inv * stats.omega * core_inv;
}

VectorXd cca_F_eigenvalues(const SignalStats& stats) {
  const MatrixXcd F = cca_F_matrix(stats);
  Eigen::ComplexEigenSolver<MatrixXcd> es(F, false);
  const VectorXcd ev = es.eigenvalues();
  VectorXd out(ev.size());
  for (int i = 0; i < ev.size(); ++i) {
    if (std::abs(ev[i].imag()) > 1e-8)
      throw std::runtime_error("cca_F_eigenvalues: eigenvalue has large imaginary part");
    out[i] = ev[i].real();
  }
  std::sort(out.data(), out.data() + out.size(), std::greater<double>());
  return out;
}

SpikeReport cca_outliers(double c, const SignalStats& stats, double kappa) {
  if (!(c > 0.0 && c < 1.0))
    throw std::invalid_argument("cca_outliers: c must lie in (0,1)");
  SpikeReport rep;
  rep.kind = SpikeReport::Kind::cca;
  rep.edge = 4.0 * c * (1.0 - c);
  rep.oracle_eigs = cca_F_eigenvalues(stats);
  if (c >= 0.5) {
    rep.no_escape = true;
    return rep;
  }
  const double threshold = c / (1.0 - c);
  std::vector<double> rho;
  for (int k = 0; k < rep.oracle_eigs.size(); ++k) {
    const double lam = rep.oracle_eigs[k];
    if (std::abs(lam - threshold) < 1e-8) rep.edge_degenerate = true;
    if (!(lam > threshold + kappa)) continue;
    // f is strictly increasing from c/(1-c) to 1 on [4c(1-c), 1]
    double lo = rep.edge, hi = 1.0;
    for (int it = 0; it < 200; ++it) {
      const double mid = 0.5 * (lo + hi);
      if (f_ratio(c, mid) < lam) lo = mid; else hi = mid;
      if (hi - lo < 1e-12) break;
    }
    rho.push_back(0.5 * (lo + hi));
  }
  std::sort(rho.begin(), rho.end(), std::greater<double>());
  rep.s = static_cast<int>(rho.size());
  rep.rho = Eigen::Map<VectorXd>(rho.data(), rho.size());
  return rep;
}

double snr_threshold_cca(double c) {
  if (!(c > 0.0 && c < 0.5))
    throw std::invalid_argument("snr_threshold_cca: requires c < 1/2");
  return std::sqrt(c) / (std::sqrt(1.0 - c) - std::sqrt(c));
}

} // namespace ssdim
