#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>

#include "ssdim/hankel_stats.hpp"
#include "ssdim/state_space.hpp"

using namespace ssdim;

namespace {

MatrixXcd random_samples(int M, long T, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> g(0.0, 1.0);
  MatrixXcd y(M, T);
  for (int i = 0; i < M; ++i)
    for (long j = 0; j < T; ++j) y(i, j) = cplx(g(rng), g(rng));
  return y;
}

// eigenvalues of a general complex matrix, real parts sorted nonincreasing
VectorXd brute_eigs(const MatrixXcd& A) {
  Eigen::ComplexEigenSolver<MatrixXcd> es(A, false);
  VectorXd out = es.eigenvalues().real();
  std::sort(out.data(), out.data() + out.size(), std::greater<double>());
  return out;
}

} // namespace

TEST_CASE("hankel pair: scalar indexing") {
  MatrixXcd y(1, 6);
  for (int j = 0; j < 6; ++j) y(0, j) = j + 1.0; // y_1 .. y_6
  const HankelPair pair = build_hankel_pair(y, 2);
  CHECK(pair.N == 3);
  MatrixXcd Yp(2, 3), Yf(2, 3);
  Yp << 1, 2, 3, 2, 3, 4;
  Yf << 3, 4, 5, 4, 5, 6;
  CHECK((pair.Yp - Yp).norm() == 0.0);
  CHECK((pair.Yf - Yf).norm() == 0.0);
}

TEST_CASE("hankel pair: shapes and sample count") {
  const MatrixXcd y = random_samples(2, 9, 1); // N + 2L - 1 = 9 for L=3, N=4
  const HankelPair pair = build_hankel_pair(y, 3);
  CHECK(pair.Yp.rows() == 6);
  CHECK(pair.Yp.cols() == 4);
  CHECK(pair.Yf.rows() == 6);
  CHECK(pair.Yf.cols() == 4);
  CHECK(pair.Yf(5, 3) == y(1, 8)); // last used sample is y_9
  CHECK_THROWS_AS(build_hankel_pair(random_samples(2, 3, 2), 2),
                  std::invalid_argument);
}

TEST_CASE("hankel pair: shift structure on random input") {
  const MatrixXcd y = random_samples(3, 20, 3);
  const int L = 4;
  const HankelPair pair = build_hankel_pair(y, L);
  for (int i = 0; i + 1 < L; ++i)
    for (long j = 0; j + 1 < pair.N; ++j) {
      CHECK((pair.Yp.block(3 * (i + 1), j, 3, 1) -
             pair.Yp.block(3 * i, j + 1, 3, 1)).norm() == 0.0);
      CHECK((pair.Yf.block(3 * (i + 1), j, 3, 1) -
             pair.Yf.block(3 * i, j + 1, 3, 1)).norm() == 0.0);
    }
  // Yf's first block row is the sequence shifted by L
  CHECK((pair.Yf.topRows(3) - y.middleCols(L, pair.N)).norm() == 0.0);
}

TEST_CASE("autocov spectrum: zero input and brute-force equivalence") {
  const HankelPair zero = build_hankel_pair(MatrixXcd::Zero(2, 11), 2);
  CHECK(autocov_sample_spectrum(zero).eigs.cwiseAbs().maxCoeff() == 0.0);

  for (std::uint64_t seed : {4, 5, 6}) {
    const MatrixXcd y = random_samples(3, 40, seed); // M=3, L=2 -> ML=6
    const HankelPair pair = build_hankel_pair(y, 2);
    const EmpiricalSpectrum spec = autocov_sample_spectrum(pair);
    const MatrixXcd S = pair.Yf * pair.Yp.adjoint() / double(pair.N);
    const VectorXd brute = brute_eigs(S * S.adjoint());
    REQUIRE(spec.eigs.size() == brute.size());
    for (int i = 0; i < brute.size(); ++i)
      CHECK(spec.eigs[i] == doctest::Approx(brute[i]).epsilon(1e-8));
  }
}

TEST_CASE("cca spectrum: identical subspaces give unit eigenvalues") {
  const MatrixXcd y = random_samples(2, 13, 7);
  HankelPair pair = build_hankel_pair(y, 2);
  pair.Yf = pair.Yp;
  const EmpiricalSpectrum spec = cca_sample_spectrum(pair);
  for (int i = 0; i < 4; ++i) // ML = 4 nonzero eigenvalues
    CHECK(spec.eigs[i] == doctest::Approx(1.0).epsilon(1e-10));
  for (long i = 4; i < spec.eigs.size(); ++i) CHECK(spec.eigs[i] == 0.0);
}

TEST_CASE("cca spectrum: brute-force equivalence against explicit projectors") {
  for (std::uint64_t seed : {8, 9}) {
    const int M = 2, L = 2;
    const MatrixXcd y = random_samples(M, 23, seed); // N = 20, ML = 4
    const HankelPair pair = build_hankel_pair(y, L);
    const EmpiricalSpectrum spec = cca_sample_spectrum(pair);

    auto projector = [](const MatrixXcd& Y) {
      return MatrixXcd(Y.adjoint() *
                       (Y * Y.adjoint()).fullPivLu().inverse() * Y);
    };
    const VectorXd brute =
        brute_eigs(projector(pair.Yp) * projector(pair.Yf));
    REQUIRE(spec.eigs.size() == brute.size());
    for (int i = 0; i < brute.size(); ++i)
      CHECK(spec.eigs[i] == doctest::Approx(brute[i]).epsilon(1e-8).scale(1.0));
  }
}

TEST_CASE("cca spectrum: eigenvalues stay in [0, 1]") {
  for (std::uint64_t seed : {10, 11, 12}) {
    const MatrixXcd y = random_samples(4, 29, seed);
    const EmpiricalSpectrum spec = cca_sample_spectrum(build_hankel_pair(y, 2));
    CHECK(spec.eigs.minCoeff() >= 0.0);
    CHECK(spec.eigs.maxCoeff() <= 1.0 + 1e-10);
  }
}

TEST_CASE("cca spectrum: invariant under an invertible map per time index") {
  const int M = 3;
  const MatrixXcd y = random_samples(M, 33, 13);
  MatrixXcd T(M, M);
  T << cplx(2, 1), cplx(0.3, 0), cplx(0, -1),
       cplx(0, 0.5), cplx(-1, 2), cplx(0.2, 0),
       cplx(1, 0), cplx(0, 0), cplx(3, -0.5);
  REQUIRE(std::abs(T.determinant()) > 1e-6);
  const EmpiricalSpectrum base = cca_sample_spectrum(build_hankel_pair(y, 2));
  const EmpiricalSpectrum mapped =
      cca_sample_spectrum(build_hankel_pair(T * y, 2));
  REQUIRE(base.eigs.size() == mapped.eigs.size());
  for (int i = 0; i < base.eigs.size(); ++i)
    CHECK(mapped.eigs[i] == doctest::Approx(base.eigs[i]).epsilon(1e-8).scale(1.0));
}

TEST_CASE("cca spectrum: structural unit eigenvalues when c > 1/2") {
  // M=120, L=1, N=200: 2ML - N = 40 eigenvalues exactly 1
  const NoiseModel noise = NoiseModel::white(120, 1, 200, 1.0);
  const MatrixXcd y = simulate_noise_only(noise, 200, 1, 21);
  const EmpiricalSpectrum spec = cca_sample_spectrum(build_hankel_pair(y, 1));
  int units = 0;
  for (int i = 0; i < spec.eigs.size(); ++i)
    if (spec.eigs[i] > 1.0 - 1e-8) ++units;
  CHECK(units == 40);
}

TEST_CASE("threshold estimator basics") {
  EmpiricalSpectrum spec;
  spec.kind = EmpiricalSpectrum::Kind::autocov_squared;
  spec.eigs.resize(3);
  spec.eigs << 1.5, 1.2, 0.9;
  CHECK(estimate_s_threshold(spec, 1.0, 0.01) == 2);
  spec.eigs.resize(0);
  CHECK(estimate_s_threshold(spec, 1.0, 0.01) == 0);
}

TEST_CASE("threshold estimator excludes structural units for cca") {
  EmpiricalSpectrum spec;
  spec.kind = EmpiricalSpectrum::Kind::cca;
  spec.M = 3;
  spec.L = 1;
  spec.N = 4; // 2ML - N = 2 structural units
  spec.c = 0.75;
  spec.eigs.resize(4);
  spec.eigs << 1.0, 1.0, 0.9, 0.1;
  CHECK(estimate_s_threshold(spec, 0.75, 0.01) == 1); // only the 0.9 counts
}

TEST_CASE("ratio estimator cases") {
  EmpiricalSpectrum spec;
  spec.eigs.resize(4);
  spec.eigs << 10.0, 1.0, 0.99, 0.98;
  CHECK(estimate_s_ratio(spec, 0.05).s == 1);

  spec.eigs = VectorXd::Constant(5, 3.0);
  CHECK(estimate_s_ratio(spec, 0.05).s == 0);

  spec.eigs.resize(4);
  spec.eigs << 5.0, 4.0, 3.9, 3.9;
  CHECK(estimate_s_ratio(spec, 0.05).s == 1);

  spec.eigs.resize(1);
  CHECK_THROWS_AS(estimate_s_ratio(spec, 0.05), std::invalid_argument);

  // strictly decaying ratios never qualify: kmax with the overflow flag
  spec.eigs.resize(30);
  for (int i = 0; i < 30; ++i) spec.eigs[i] = std::pow(0.5, i);
  const RatioEstimate r = estimate_s_ratio(spec, 0.05, 20);
  CHECK(r.s == 20);
  CHECK(r.overflow);

  // spectrum ending in zeros terminates the scan
  spec.eigs.resize(6);
  spec.eigs << 4.0, 2.0, 0.0, 0.0, 0.0, 0.0;
  CHECK(estimate_s_ratio(spec, 0.05).s == 2);
}
