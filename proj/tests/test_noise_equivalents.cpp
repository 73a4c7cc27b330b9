#include <doctest.h>

#include <cmath>
#include <random>

#include "ssdim/noise_equivalents.hpp"

using namespace ssdim;

namespace {

double closed_form_w_plus(double c, double sigma) {
  return sigma * sigma * (1.0 + (1.0 + std::sqrt(1.0 + 8.0 * c)) / 2.0);
}

NoiseModel white_c(double c, int M = 50, double sigma2 = 1.0) {
  // pick N so that ML/N hits c exactly on integers where possible
  const long N = std::lround(M / c);
  return NoiseModel::white(M, 1, N, sigma2);
}

} // namespace

TEST_CASE("solve_t: total mass of mu at large imaginary argument") {
  const NoiseModel noise = white_c(0.25, 100);
  const cplx z(0.0, 1e6);
  const cplx t = solve_t_autocov(noise, z);
  // -z t(z) -> (1/M) tr R = 1
  CHECK(std::abs(z * t + 1.0) < 1e-4);
}

TEST_CASE("solve_t: residual at real negative z") {
  const NoiseModel noise = white_c(0.25);
  const cplx t = solve_t_autocov(noise, cplx(-1.0, 0.0));
  CHECK(t_autocov_residual(noise, cplx(-1.0, 0.0), t) < 1e-10);
  CHECK(t.imag() == doctest::Approx(0.0).epsilon(1e-12));
  CHECK(t.real() > 0.0); // integral of 1/(lambda - z) against a measure on R+
}

TEST_CASE("solve_t: boundary value just above the support is nearly real") {
  const NoiseModel noise = white_c(0.25);
  const cplx t = solve_t_autocov(noise, cplx(1.3, 1e-6));
  CHECK(std::abs(t.imag()) < 1e-3);
}

TEST_CASE("solve_t: admissible branch on the upper half plane") {
  const NoiseModel noise = white_c(0.3, 40);
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> re(-5.0, 5.0), im(0.05, 5.0);
  for (int i = 0; i < 20; ++i) {
    const cplx z(re(rng), im(rng));
    const cplx t = solve_t_autocov(noise, z);
    CHECK(t.imag() > 0.0);
    CHECK((z * t).imag() > 0.0);
    CHECK(t_autocov_residual(noise, z, t) < 1e-10);
  }
}

TEST_CASE("solve_t rejects z on the positive real axis") {
  const NoiseModel noise = white_c(0.25);
  CHECK_THROWS_AS(solve_t_autocov(noise, cplx(0.5, 0.0)), std::invalid_argument);
}

TEST_CASE("phi: scalar closed form for white noise") {
  const NoiseModel noise = white_c(0.25);
  const double w = 2.3660254;
  const auto phi = phi_autocov(noise, w);
  const double m = 1.0 / (1.0 - w);
  CHECK(phi.value ==
        doctest::Approx(0.25 * w * w * m * (0.25 * m - 1.0)).epsilon(1e-12));
  CHECK(phi.value == doctest::Approx(1.21202).epsilon(1e-4));
}

TEST_CASE("phi: derivative vanishes at the returned edge argument") {
  const NoiseModel noise = white_c(0.25);
  const auto edge = support_edge_autocov(noise);
  CHECK(std::abs(phi_autocov(noise, edge.w_plus).derivative) < 1e-6);
}

TEST_CASE("phi: analytic derivative matches central differences") {
  VectorXd lam(6);
  lam << 3.0, 2.5, 2.0, 1.5, 1.2, 1.0;
  const NoiseModel noise(6, 2, 40, lam);
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(1.1 * lam[0], 10.0 * lam[0]);
  for (int i = 0; i < 10; ++i) {
    const double w = u(rng);
    const double h = 1e-6;
    const double fd =
        (phi_autocov(noise, w + h).value - phi_autocov(noise, w - h).value) /
        (2.0 * h);
    const auto phi = phi_autocov(noise, w);
    CHECK(phi.derivative == doctest::Approx(fd).epsilon(1e-5));
  }
}

TEST_CASE("support edge: white-noise closed form on a (sigma, c) grid") {
  for (double sigma : {0.5, 0.8, 1.0, 1.6, 2.5}) {
    for (double c : {0.1, 0.2, 0.25, 0.5, 0.8}) {
      const NoiseModel noise = white_c(c, 40, sigma * sigma);
      const auto edge = support_edge_autocov(noise);
      CHECK(edge.w_plus ==
            doctest::Approx(closed_form_w_plus(noise.c, sigma)).epsilon(1e-9));
      CHECK(edge.x_plus > 0.0);
    }
  }
  const NoiseModel noise = white_c(0.25, 100);
  CHECK(support_edge_autocov(noise).x_plus == doctest::Approx(1.21202).epsilon(1e-5));
}

TEST_CASE("support edge: x_plus = O(c) as c -> 0") {
  const NoiseModel noise(100, 1, 1000000, VectorXd::Ones(100)); // c = 1e-4
  CHECK(support_edge_autocov(noise).x_plus < 1e-2);
}

TEST_CASE("support edge: cosine spectrum regression") {
  const NoiseModel noise = NoiseModel::cosine(130, 4, 2000); // c = 0.26
  const auto edge = support_edge_autocov(noise);
  CHECK(edge.x_plus > 0.0);
  // frozen from the solver at first computation (regression guard)
  CHECK(edge.x_plus == doctest::Approx(1.3675380424).epsilon(1e-7));
  CHECK(edge.w_plus == doctest::Approx(2.6079097041).epsilon(1e-7));
}

TEST_CASE("autocov support: single interval for white noise and cosine spectrum") {
  const auto sup_white = autocov_support(white_c(0.25, 60));
  REQUIRE(sup_white.intervals.size() == 1);
  CHECK(sup_white.intervals[0].first == 0.0);
  CHECK(sup_white.intervals[0].second == doctest::Approx(sup_white.x_plus));

  const auto sup_cos = autocov_support(NoiseModel::cosine(40, 2, 320));
  CHECK(sup_cos.intervals.size() == 1);
}

namespace {

// brute-force oracle: on a fine grid, x is inside the support iff the
// boundary value of t has a visible imaginary part
void check_intervals_against_scan(const NoiseModel& noise,
                                  const SupportAutocov& sup, int n) {
  const double xmax = sup.x_plus * 1.05;
  const double tol_im = 1e-5;
  for (int i = 1; i < n; ++i) {
    const double x = xmax * i / n;
    const cplx t = solve_t_autocov(noise, cplx(x, 1e-8));
    const bool inside_scan = std::abs(t.imag()) > tol_im;
    bool inside_intervals = false;
    bool near_edge = false; // grid-resolution slack at interval endpoints
    for (const auto& [a, b] : sup.intervals) {
      if (x >= a && x <= b) inside_intervals = true;
      if (std::abs(x - a) < 2.0 * xmax / n || std::abs(x - b) < 2.0 * xmax / n)
        near_edge = true;
    }
    if (!near_edge) CHECK(inside_scan == inside_intervals);
  }
}

} // namespace

TEST_CASE("autocov support: two-point spectrum against an Im-t scan") {
  VectorXd lam(40);
  for (int i = 0; i < 20; ++i) lam[i] = 100.0;
  for (int i = 20; i < 40; ++i) lam[i] = 1.0;
  const NoiseModel noise(40, 1, 160, lam); // c = 0.25
  const auto sup = autocov_support(noise);
  REQUIRE(!sup.intervals.empty());
  check_intervals_against_scan(noise, sup, 1500);
}

TEST_CASE("autocov support: split support matches the Im-t scan") {
  // a few huge eigenvalues over a small bulk at small c: the support opens a
  // gap, so the enumeration must pair the hole edges correctly
  VectorXd lam(40);
  for (int i = 0; i < 4; ++i) lam[i] = 1e4;
  for (int i = 4; i < 40; ++i) lam[i] = 1.0;
  const NoiseModel noise(40, 1, 2000, lam); // c = 0.02
  const auto sup = autocov_support(noise);
  REQUIRE(sup.intervals.size() == 2);
  CHECK(sup.intervals[0].first == 0.0);
  CHECK(sup.intervals[0].second < sup.intervals[1].first);
  check_intervals_against_scan(noise, sup, 3000);
}

TEST_CASE("w_of_x: round trip and monotonicity") {
  const NoiseModel noise = white_c(0.25, 60);
  const auto edge = support_edge_autocov(noise);
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(1.0 + 1e-6, 8.0);
  double prev_x = 0.0, prev_w = 0.0;
  for (int i = 0; i < 10; ++i) {
    const double w0 = edge.w_plus * u(rng);
    const double x = phi_autocov(noise, w0).value;
    CHECK(w_of_x(noise, x) == doctest::Approx(w0).epsilon(1e-9));
  }
  for (int i = 1; i <= 10; ++i) {
    const double x = edge.x_plus * (1.0 + 0.3 * i);
    const double w = w_of_x(noise, x);
    CHECK(phi_autocov(noise, w).value == doctest::Approx(x).epsilon(1e-9));
    if (i > 1) {
      CHECK(x > prev_x);
      CHECK(w > prev_w);
    }
    prev_x = x;
    prev_w = w;
  }
  CHECK_THROWS_AS(w_of_x(noise, edge.x_plus * 0.5), std::invalid_argument);
}

TEST_CASE("density: integrates close to 1 away from the 0+ divergence") {
  const NoiseModel noise = white_c(0.25, 100);
  const auto edge = support_edge_autocov(noise);
  VectorXd grid(2000);
  for (int i = 0; i < 2000; ++i)
    grid[i] = 1e-3 + (edge.x_plus - 1e-3) * i / 1999.0;
  const auto dens = density_autocov(noise, grid);
  const double mass = dens.measure.total_mass();
  CHECK(mass >= 0.95);
  CHECK(mass <= 1.0 + 1e-3);
  CHECK(dens.mass_below_grid == doctest::Approx(1.0 - mass).epsilon(1e-12));
}

TEST_CASE("density: Richardson refinement stays consistent") {
  const NoiseModel noise = white_c(0.25, 60);
  const auto edge = support_edge_autocov(noise);
  VectorXd grid(50);
  for (int i = 0; i < 50; ++i)
    grid[i] = 0.1 + (edge.x_plus * 0.9 - 0.1) * i / 49.0;
  DensityOptions plain, refined;
  refined.richardson = true;
  const auto d0 = density_autocov(noise, grid, plain);
  const auto d1 = density_autocov(noise, grid, refined);
  for (int i = 0; i < 50; ++i)
    CHECK(d1.measure.density[i] ==
          doctest::Approx(d0.measure.density[i]).epsilon(1e-3).scale(1.0));
}

TEST_CASE("density: vanishes just above the support") {
  const NoiseModel noise = white_c(0.25, 100);
  const auto edge = support_edge_autocov(noise);
  const cplx t = solve_t_autocov(noise, cplx(edge.x_plus * 1.02, 1e-6));
  CHECK(std::abs(t.imag()) / M_PI < 1e-2);
}

TEST_CASE("cca t~: spot value and quadratic residual") {
  const double c = 0.25;
  CHECK(cca_stieltjes_tilde(c, -1.0) == doctest::Approx(0.9557189).epsilon(1e-6));

  std::mt19937_64 rng(17);
  std::uniform_real_distribution<double> re(-4.0, 4.0), im(0.05, 4.0);
  for (int i = 0; i < 100; ++i) {
    const cplx z(re(rng), im(rng));
    const cplx tt = cca_stieltjes_tilde(c, z);
    const cplx res = z * (1.0 - z) * tt * tt + (2.0 * (1.0 - c) - z) * tt +
                     (1.0 - c) * (1.0 - c) / z;
    CHECK(std::abs(res) < 1e-10);
  }
}

TEST_CASE("cca t~: Stieltjes transform of a probability measure") {
  const double c = 0.25;
  const cplx z(0.0, 1e6);
  CHECK(std::abs(-z * cca_stieltjes_tilde(c, z) - 1.0) < 1e-4);
  std::mt19937_64 rng(23);
  std::uniform_real_distribution<double> re(-3.0, 3.0), im(0.1, 3.0);
  for (int i = 0; i < 20; ++i) {
    const cplx z2(re(rng), im(rng));
    CHECK(cca_stieltjes_tilde(c, z2).imag() > 0.0);
  }
}

TEST_CASE("cca t: defining relation and real spot values") {
  const double c = 0.25;
  std::mt19937_64 rng(29);
  std::uniform_real_distribution<double> re(-3.0, 3.0), im(0.1, 3.0);
  for (int i = 0; i < 20; ++i) {
    const cplx z(re(rng), im(rng));
    const cplx lhs = cca_stieltjes(c, z);
    const cplx rhs = cca_stieltjes_tilde(c, z) / c + (1.0 - c) / (c * z);
    CHECK(std::abs(lhs - rhs) < 1e-12);
  }
  CHECK(cca_stieltjes(c, 0.9) == doctest::Approx(-1.8350342).epsilon(1e-6));
  CHECK(cca_stieltjes_tilde(c, 0.9) == doctest::Approx(-1.2920919).epsilon(1e-6));
  const cplx zy(0.0, 1e6);
  CHECK(std::abs(-zy * cca_stieltjes(c, zy) - 1.0) < 1e-4);
}

TEST_CASE("cca support cases") {
  auto s1 = cca_support(0.25);
  CHECK(s1.bulk_right == doctest::Approx(0.75));
  CHECK(!s1.has_unit_atom);
  auto s2 = cca_support(0.5);
  CHECK(s2.bulk_right == doctest::Approx(1.0));
  CHECK(s2.atom_mass_at_one == 0.0);
  auto s3 = cca_support(0.75);
  CHECK(s3.bulk_right == doctest::Approx(0.75));
  CHECK(s3.has_unit_atom);
  CHECK(s3.atom_mass_at_one == doctest::Approx(0.5));
}

TEST_CASE("cca density: probability mass and the c = 1/2 arcsine form") {
  const double c = 0.25;
  const double edge = 4.0 * c * (1.0 - c);
  // sqrt-spaced grid resolves the 1/sqrt divergence at 0+
  VectorXd grid(2000);
  for (int i = 0; i < 2000; ++i) {
    const double u = (i + 0.5) / 2000.5;
    grid[i] = edge * u * u;
  }
  const auto m = cca_density(c, grid);
  CHECK(m.total_mass() > 0.99);
  CHECK(m.total_mass() < 1.01);

  VectorXd g2(5);
  g2 << 0.1, 0.3, 0.5, 0.7, 0.9;
  const auto half = cca_density(0.5, g2);
  for (int i = 0; i < 5; ++i)
    CHECK(half.density[i] ==
          doctest::Approx(1.0 / (M_PI * std::sqrt(g2[i] * (1.0 - g2[i])))));
  CHECK_THROWS_AS(cca_density(0.25, g2), std::invalid_argument); // 0.9 > 0.75
}

TEST_CASE("cca density: unit atom above c = 1/2 keeps the mass at one") {
  const double c = 0.75;
  const double edge = 4.0 * c * (1.0 - c);
  VectorXd grid(4000);
  for (int i = 0; i < 4000; ++i) {
    const double u = (i + 0.5) / 4000.5;
    grid[i] = edge * u * u;
  }
  const auto m = cca_density(c, grid);
  REQUIRE(m.atoms.size() == 1);
  CHECK(m.atoms[0].first == 1.0);
  // the law of the ML nonzero eigenvalues carries (2c-1)/c at 1
  CHECK(m.atoms[0].second == doctest::Approx((2.0 * c - 1.0) / c));
  CHECK(m.total_mass() == doctest::Approx(1.0).epsilon(5e-3));
}

TEST_CASE("f_ratio: endpoints and spot value") {
  CHECK(f_ratio(0.25, 0.75) == doctest::Approx(1.0 / 3.0).epsilon(1e-12));
  CHECK(f_ratio(0.25, 1.0) == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(f_ratio(0.7, 1.0) ==
        doctest::Approx((0.7 / 0.3) * (0.7 / 0.3)).epsilon(1e-12));
  CHECK(f_ratio(0.25, 0.9) == doctest::Approx(0.79326530).epsilon(1e-6));
  CHECK_THROWS_AS(f_ratio(0.25, 0.5), std::invalid_argument);
}
