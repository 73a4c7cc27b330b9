#include "ssdim/state_space.hpp"

#include "ssdim/noise_equivalents.hpp"

#include <cmath>
#include <random>

namespace ssdim {

namespace {

// Self-contained complex Gaussian stream: the draw sequence is fully
// specified here so simulations are reproducible per seed independently of
// the standard library's distribution internals.
class GaussianStream {
public:
  explicit GaussianStream(std::uint64_t seed) : eng_(seed) {}

  double unit() { // (0, 1]
    return (static_cast<double>(eng_() >> 11) + 1.0) * 0x1p-53;
  }
  cplx standard_complex() { // N_c(0,1): |z|^2 ~ Exp(1), phase uniform
    const double r = std::sqrt(-std::log(unit()));
    const double phi = 2.0 * M_PI * unit();
    return cplx(r * std::cos(phi), r * std::sin(phi));
  }
  double standard_real() { // N(0,1)
    const double r = std::sqrt(-2.0 * std::log(unit()));
    return r * std::cos(2.0 * M_PI * unit());
  }

private:
  std::mt19937_64 eng_;
};

VectorXcd draw_vector(GaussianStream& g, int n, bool real_gaussian) {
  VectorXcd v(n);
  for (int i = 0; i < n; ++i)
    v[i] = real_gaussian ? cplx(g.standard_real(), 0.0) : g.standard_complex();
  return v;
}

// Haar-distributed M x r orthonormal columns (QR of a Gaussian matrix with
// the R-diagonal sign fix), then each column's largest-modulus entry made
// real positive.
MatrixXcd haar_columns(int M, int r, std::uint64_t seed) {
  GaussianStream g(seed);
  MatrixXcd X(M, r);
  for (int j = 0; j < r; ++j)
    for (int i = 0; i < M; ++i) X(i, j) = g.standard_complex();
  Eigen::HouseholderQR<MatrixXcd> qr(X);
  MatrixXcd Q = qr.householderQ() * MatrixXcd::Identity(M, r);
  MatrixXcd R = qr.matrixQR().topRows(r).triangularView<Eigen::Upper>();
  for (int j = 0; j < r; ++j)
    if (std::abs(R(j, j)) > 0 && R(j, j).real() < 0) Q.col(j) = -Q.col(j);
  for (int j = 0; j < r; ++j) {
    int imax = 0;
    Q.col(j).cwiseAbs().maxCoeff(&imax);
    const cplx p = Q(imax, j);
    if (std::abs(p) > 0) Q.col(j) *= std::conj(p) / std::abs(p);
  }
  return Q;
}

MatrixXcd matrix_power(const MatrixXcd& A, int k) {
  MatrixXcd out = MatrixXcd::Identity(A.rows(), A.cols());
  for (int i = 0; i < k; ++i) out = out * A;
  return out;
}

MatrixXcd hermitian_sqrt(const MatrixXcd& S) {
  Eigen::SelfAdjointEigenSolver<MatrixXcd> es(S);
  VectorXd d = es.eigenvalues().cwiseMax(0.0);
  return es.eigenvectors() * d.cwiseSqrt().asDiagonal() *
         es.eigenvectors().adjoint();
}

} // namespace

double StateSpaceModel::spectral_radius() const {
  return Eigen::ComplexEigenSolver<MatrixXcd>(A, false)
      .eigenvalues()
      .cwiseAbs()
      .maxCoeff();
}

StateSpaceModel StateSpaceModel::make_checked(MatrixXcd A, MatrixXcd B,
                                              MatrixXcd C, MatrixXcd D) {
  StateSpaceModel m{std::move(A), std::move(B), std::move(C), std::move(D)};
  const int P = m.P();
  if (m.A.cols() != P || m.B.rows() != P || m.C.cols() != P ||
      m.D.rows() != m.C.rows() || m.D.cols() != m.B.cols())
    throw std::invalid_argument("StateSpaceModel: inconsistent dimensions");
  if (!(m.spectral_radius() < 1.0))
    throw std::invalid_argument("StateSpaceModel: spectral radius must be < 1");

  // Minimality at L = P (hence at every L >= P).
  MatrixXcd obs(m.M() * P, P);
  MatrixXcd ctr(P, m.K() * P);
  for (int i = 0; i < P; ++i) {
    obs.middleRows(i * m.M(), m.M()) = m.C * matrix_power(m.A, i);
    ctr.middleCols(i * m.K(), m.K()) = matrix_power(m.A, P - 1 - i) * m.B;
  }
  const auto rank = [](const MatrixXcd& X) {
    Eigen::JacobiSVD<MatrixXcd> svd(X);
    const VectorXd sv = svd.singularValues();
    int r = 0;
    for (int i = 0; i < sv.size(); ++i)
      if (sv[i] > 1e-10 * sv[0]) ++r;
    return r;
  };
  if (rank(obs) != P)
    throw std::invalid_argument("StateSpaceModel: (C,A) not observable");
  if (rank(ctr) != P)
    throw std::invalid_argument("StateSpaceModel: (A,B) not controllable");
  return m;
}

MatrixXcd lyapunov_state_cov(const MatrixXcd& A, const MatrixXcd& B) {
  const int P = static_cast<int>(A.rows());
  if (Eigen::ComplexEigenSolver<MatrixXcd>(A, false).eigenvalues().cwiseAbs().maxCoeff() >= 1.0)
    throw std::invalid_argument("lyapunov_state_cov: rho(A) must be < 1");
  // vec(R) - (conj(A) (x) A) vec(R) = vec(B B^*)
  MatrixXcd K = MatrixXcd::Identity(P * P, P * P);
  for (int i = 0; i < P; ++i)
    for (int j = 0; j < P; ++j)
      for (int k = 0; k < P; ++k)
        for (int l = 0; l < P; ++l)
          K(i + P * j, k + P * l) -= A(i, k) * std::conj(A(j, l));
  const MatrixXcd BB = B * B.adjoint();
  VectorXcd rhs(P * P);
  for (int j = 0; j < P; ++j)
    for (int i = 0; i < P; ++i) rhs[i + P * j] = BB(i, j);
  const VectorXcd sol = K.fullPivLu().solve(rhs);
  MatrixXcd R(P, P);
  for (int j = 0; j < P; ++j)
    for (int i = 0; i < P; ++i) R(i, j) = sol[i + P * j];
  R = 0.5 * (R + R.adjoint().eval());
  if ((A * R * A.adjoint() + BB - R).norm() > 1e-12 * std::max(1.0, R.norm()))
    throw std::runtime_error("lyapunov_state_cov: residual too large");
  return R;
}

SignalStats theoretical_stats(const StateSpaceModel& model,
                              const NoiseModel& noise, int L) {
  const int P = model.P(), K = model.K(), M = model.M();
  if (L < P) throw std::invalid_argument("theoretical_stats: L must be >= P");
  if (M != noise.M)
    throw std::invalid_argument("theoretical_stats: model/noise dimension mismatch");

  MatrixXcd obs(M * L, P);
  for (int i = 0; i < L; ++i)
    obs.middleRows(i * M, M) = model.C * matrix_power(model.A, i);
  MatrixXcd H = MatrixXcd::Zero(M * L, K * L);
  for (int i = 0; i < L; ++i)
    for (int j = 0; j <= i; ++j) {
      if (i == j)
        H.block(i * M, j * K, M, K) = model.D;
      else
        H.block(i * M, j * K, M, K) =
            model.C * matrix_power(model.A, i - j - 1) * model.B;
    }

  const MatrixXcd Rx = lyapunov_state_cov(model.A, model.B);

  SignalStats st;
  st.L = L;
  st.P = P;
  st.Ru = obs * Rx * obs.adjoint() + H * H.adjoint();
  st.Ru = 0.5 * (st.Ru + st.Ru.adjoint().eval());

  const MatrixXcd G = model.A * Rx * model.C.adjoint() + model.B * model.D.adjoint();
  MatrixXcd ctr(P, M * L);
  for (int j = 0; j < L; ++j)
    ctr.middleCols(j * M, M) = matrix_power(model.A, L - 1 - j) * G;
  st.Rfp = obs * ctr;

  Eigen::SelfAdjointEigenSolver<MatrixXcd> es(st.Ru);
  const VectorXd ev = es.eigenvalues(); // ascending
  const double tol = std::max(1e-10, 1e-8 * ev[ev.size() - 1]);
  int r = 0;
  for (int i = 0; i < ev.size(); ++i)
    if (ev[i] > tol) ++r;
  if (r == 0) throw std::runtime_error("theoretical_stats: Ru is numerically zero");
  st.r = r;
  st.delta2.resize(r);
  st.theta.resize(M * L, r);
  for (int k = 0; k < r; ++k) {
    const int src = static_cast<int>(ev.size()) - 1 - k;
    st.delta2[k] = ev[src];
    st.theta.col(k) = es.eigenvectors().col(src);
    int imax = 0;
    st.theta.col(k).cwiseAbs().maxCoeff(&imax);
    const cplx p = st.theta(imax, k);
    if (std::abs(p) > 0) st.theta.col(k) *= std::conj(p) / std::abs(p);
  }

  st.gamma = st.theta.adjoint() * st.Rfp * st.theta;
  const VectorXd dinv = st.delta2.cwiseSqrt().cwiseInverse();
  st.omega = dinv.asDiagonal() * st.gamma * dinv.asDiagonal();

  VectorXd winv(M * L);
  for (int b = 0; b < L; ++b)
    for (int m = 0; m < M; ++m) winv[b * M + m] = 1.0 / noise.lambda[m];
  st.gcca = st.theta.adjoint() * winv.asDiagonal() * st.theta;
  st.gcca = 0.5 * (st.gcca + st.gcca.adjoint().eval());

  const double omega_norm =
      Eigen::JacobiSVD<MatrixXcd>(st.omega).singularValues()[0];
  if (omega_norm > 1.0 + 1e-8)
    throw std::runtime_error("theoretical_stats: ||Omega|| exceeds 1");
  return st;
}

MatrixXcd simulate(const StateSpaceModel& model, const NoiseModel& noise,
                   long N, int L, std::uint64_t seed,
                   const SimulateOptions& opts) {
  if (N < 1) throw std::invalid_argument("simulate: N must be >= 1");
  if (model.M() != noise.M)
    throw std::invalid_argument("simulate: model/noise dimension mismatch");
  const long T = N + 2 * static_cast<long>(L) - 1;
  const int M = model.M(), P = model.P(), K = model.K();

  GaussianStream g(seed);
  const MatrixXcd Rx_half = hermitian_sqrt(lyapunov_state_cov(model.A, model.B));
  const VectorXd noise_half = noise.lambda.cwiseSqrt();

  MatrixXcd Y(M, T);
  VectorXcd x = Rx_half * draw_vector(g, P, opts.real_gaussian);
  for (long n = 0; n < T; ++n) {
    const VectorXcd in = draw_vector(g, K, opts.real_gaussian);
    const VectorXcd vn =
        noise_half.asDiagonal() * draw_vector(g, M, opts.real_gaussian);
    Y.col(n) = model.C * x + model.D * in + vn;
    x = model.A * x + model.B * in;
  }
  return Y;
}

MatrixXcd simulate_noise_only(const NoiseModel& noise, long N, int L,
                              std::uint64_t seed, const SimulateOptions& opts) {
  if (N < 1) throw std::invalid_argument("simulate_noise_only: N must be >= 1");
  const long T = N + 2 * static_cast<long>(L) - 1;
  GaussianStream g(seed);
  const VectorXd noise_half = noise.lambda.cwiseSqrt();
  MatrixXcd Y(noise.M, T);
  for (long n = 0; n < T; ++n)
    Y.col(n) = noise_half.asDiagonal() * draw_vector(g, noise.M, opts.real_gaussian);
  return Y;
}

// --------------------------------------------------------------------------
// Example models
// --------------------------------------------------------------------------

namespace {

double w_plus_white(double c, double sigma) {
  return sigma * sigma * (1.0 + (1.0 + std::sqrt(1.0 + 8.0 * c)) / 2.0);
}

// Scalar prefactor of the edge gram with R = sigma^2 I:
// beta = sqrt(c m / (1 + c m)), m = sigma^2 / (w_plus - sigma^2).
double edge_beta_white(double c, double sigma) {
  const double m = sigma * sigma / (w_plus_white(c, sigma) - sigma * sigma);
  return std::sqrt(c * m / (1.0 + c * m));
}

} // namespace

ExampleModel example_model_odd_s(int M, int r, double c, double sigma,
                                 const OddSOptions& opts) {
  if (r < 2) throw std::invalid_argument("example_model_odd_s: r must be >= 2 (K = r-1 >= 1)");
  if (M < r) throw std::invalid_argument("example_model_odd_s: M must be >= r");
  const int K = r - 1;
  const double s2 = sigma * sigma;
  const double wp = w_plus_white(c, sigma);

  VectorXd d2(r);
  if (opts.delta2_profile.size() > 0) {
    if (opts.delta2_profile.size() != r)
      throw std::invalid_argument("example_model_odd_s: delta2_profile must have length r");
    d2 = opts.delta2_profile;
  } else {
    const double delta =
        opts.delta2_override > 0.0 ? std::sqrt(opts.delta2_override)
                                   : std::sqrt(wp - s2) + opts.delta_margin;
    d2.setConstant(delta * delta);
  }
  for (int k = 0; k < r; ++k) {
    if (!(d2[k] > wp - s2))
      throw std::invalid_argument("example_model_odd_s: delta_k^2 must exceed w_plus - sigma^2");
    if (k > 0 && d2[k] > d2[k - 1])
      throw std::invalid_argument("example_model_odd_s: deltas must be nonincreasing");
  }
  const double a = opts.a;
  if (!(a > 0.0 && a < 1.0))
    throw std::invalid_argument("example_model_odd_s: a must lie in (0,1)");
  const double b = std::sqrt(d2[0] * (1.0 - a * a) / K); // sum b_k^2 = d2_1 (1-a^2)

  // s = 2r-1 requires the strict Schur-complement inequality
  //   a^2 > beta0 q_1^2 - sum (b_k^2/d2_1) q_1/q_{k+1},  q_k = 1-(w+-s2)/d2_k
  const double beta0 = s2 * c / (s2 * c + (wp - s2));
  const double q1 = 1.0 - (wp - s2) / d2[0];
  double rhs = beta0 * q1 * q1;
  for (int k = 1; k < r; ++k)
    rhs -= (b * b / d2[0]) * q1 / (1.0 - (wp - s2) / d2[k]);
  if (!(a * a > rhs))
    throw std::invalid_argument("example_model_odd_s: s = 2r-1 inequality fails");

  const MatrixXcd theta = haar_columns(M, r, opts.theta_seed);
  MatrixXcd A(1, 1), B(1, K), C(M, 1), D(M, K);
  A(0, 0) = a;
  for (int k = 0; k < K; ++k) B(0, k) = b;
  C = theta.col(0);
  for (int k = 0; k < K; ++k) D.col(k) = std::sqrt(d2[k + 1]) * theta.col(k + 1);

  ExampleModel out;
  out.model = StateSpaceModel::make_checked(A, B, C, D);
  out.delta2 = d2[0];
  out.expected_autocov_s = 2 * r - 1;
  // CCA side: the rank-one F has
  //   lambda_1 = (1+s2/d2_1)^-1 [a^2/(1+s2/d2_1) + sum (b_k^2/d2_1)/(1+s2/d2_{k+1})]
  double lam1 = a * a / (1.0 + s2 / d2[0]);
  for (int k = 1; k < r; ++k)
    lam1 += (b * b / d2[0]) / (1.0 + s2 / d2[k]);
  lam1 /= 1.0 + s2 / d2[0];
  out.expected_cca_s = (c < 0.5 && lam1 > c / (1.0 - c)) ? 1 : 0;
  return out;
}

ExampleModel example_model_s2(int M, double c, double sigma,
                              const S2Options& opts) {
  if (M < 1) throw std::invalid_argument("example_model_s2: M must be >= 1");
  const double s2 = sigma * sigma;
  const double wp = w_plus_white(c, sigma);
  const double d2 = (wp - s2) + opts.delta2_offset;
  if (!(opts.delta2_offset > 0.0))
    throw std::invalid_argument("example_model_s2: delta^2 must exceed w_plus - sigma^2");
  const double bound =
      std::sqrt(s2 * c / (s2 * c + (wp - s2))) * (1.0 - (wp - s2) / d2);
  const double a = opts.a_fraction * bound;
  if (!(a > 0.0 && a < 1.0))
    throw std::invalid_argument("example_model_s2: resulting a outside (0,1)");
  const double b = std::sqrt(d2 * (1.0 - a * a));

  const MatrixXcd theta = haar_columns(M, 1, opts.theta_seed);
  MatrixXcd A(1, 1), B(1, 1), C(M, 1), D(M, 1);
  A(0, 0) = a;
  B(0, 0) = b;
  C = a * theta;
  D = b * theta;

  ExampleModel out;
  out.model = StateSpaceModel::make_checked(A, B, C, D);
  out.delta2 = d2;
  if (opts.a_fraction < 1.0) {
    out.expected_autocov_s = 2;
  } else {
    // above the bound the count drops; recompute from the 2x2 edge matrix
    const double g = edge_beta_white(c, sigma) * ((wp - s2) - d2);
    const double chi = a * d2;
    out.expected_autocov_s = (g + chi < 0.0 ? 1 : 0) + (g - chi < 0.0 ? 1 : 0);
  }
  const double lam1 = a * a / ((1.0 + s2 / d2) * (1.0 + s2 / d2));
  out.expected_cca_s = (c < 0.5 && lam1 > c / (1.0 - c)) ? 1 : 0;
  return out;
}

McPreset mc_model(const std::string& preset, int M, long N) {
  if (preset == "table") {
    const int L = 1;
    NoiseModel noise = NoiseModel::white(M, L, N, 1.0);
    // Decreasing signal strengths. The stock table campaigns rely on this
    // profile: an equal-delta variant makes the four spurious autocovariance
    // outliers exactly degenerate (so the ratio estimator sporadically
    // collapses them into one) and leaves the top canonical-correlation
    // outlier too close to the bulk edge for the ratio test to separate.
    OddSOptions opts;
    opts.delta2_profile.resize(3);
    opts.delta2_profile << 4.2, 2.44, 1.76;
    ExampleModel ex = example_model_odd_s(M, 3, noise.c, 1.0, opts);
    return McPreset{std::move(ex.model), std::move(noise), L,
                    ex.expected_autocov_s, ex.expected_cca_s};
  }
  if (preset == "cca_fig" || preset == "cca_fig2") {
    const int Mf = 130, Lf = 4;
    const long Nf = 2000;
    NoiseModel noise = NoiseModel::cosine(Mf, Lf, Nf);
    // P=2, K=1 model with A = diag(a1, a2). The second mode is kept weak for
    // the single-outlier variant and strengthened for the two-outlier one.
    const bool two = preset == "cca_fig2";
    const double a1 = 0.85;
    const double a2 = two ? 0.6 : 0.45;
    const double g1 = 2.2;
    const double g2 = two ? 8.0 : 1.1;
    const double dgain = 0.6;
    const MatrixXcd theta = haar_columns(Mf, 3, 7);
    MatrixXcd A = MatrixXcd::Zero(2, 2), B(2, 1), C(Mf, 2), D(Mf, 1);
    A(0, 0) = a1;
    A(1, 1) = a2;
    B(0, 0) = std::sqrt(1.0 - a1 * a1);
    B(1, 0) = std::sqrt(1.0 - a2 * a2);
    C.col(0) = g1 * theta.col(0);
    C.col(1) = g2 * theta.col(1);
    D = dgain * theta.col(2);
    McPreset out{StateSpaceModel::make_checked(A, B, C, D), std::move(noise),
                 Lf, 0, two ? 2 : 1};
    return out;
  }
  throw std::invalid_argument("mc_model: unknown preset '" + preset + "'");
}

} // namespace ssdim
