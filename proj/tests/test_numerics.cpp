#include <cmath>
#include <numbers>
#include <random>

#include "doctest.h"
#include "error.hpp"
#include "numerics.hpp"

using namespace adiasim;

TEST_CASE("find_root on simple problems") {
  RootProblem rp;
  rp.lo = 0.0;
  rp.hi = 2.0;
  rp.f = [](double t) { return t - 1.0; };
  CHECK(find_root(rp) == doctest::Approx(1.0).epsilon(1e-12));

  rp.lo = 1.0;
  rp.hi = 2.0;
  rp.f = [](double t) { return std::cos(t); };
  CHECK(find_root(rp) == doctest::Approx(std::numbers::pi / 2.0).epsilon(1e-12));

  // Linear moving-wall impact equation: x + v t = 1 + 0.01 t with x=0, v=1.
  rp.lo = 0.0;
  rp.hi = 2.0;
  rp.f = [](double t) { return t - (1.0 + 0.01 * t); };
  CHECK(find_root(rp) == doctest::Approx(1.0 / 0.99).epsilon(1e-13));
}

TEST_CASE("find_root uses the derivative when supplied") {
  RootProblem rp;
  rp.lo = 0.0;
  rp.hi = 3.0;
  rp.f = [](double t) { return t * t * t - 2.0; };
  rp.df = [](double t) { return 3.0 * t * t; };
  CHECK(find_root(rp) == doctest::Approx(std::cbrt(2.0)).epsilon(1e-13));
}

TEST_CASE("find_root error paths") {
  RootProblem rp;
  rp.lo = 0.0;
  rp.hi = 1.0;
  rp.f = [](double t) { return t + 1.0; };
  CHECK_THROWS_AS(find_root(rp), Error);
}

TEST_CASE("find_root is bracket-monotone") {
  RootProblem rp;
  rp.f = [](double t) { return std::sin(t) - 0.4; };
  rp.lo = 0.0;
  rp.hi = 1.5;
  const double r1 = find_root(rp);
  rp.lo = r1 - 1e-3;
  rp.hi = r1 + 1e-3;
  const double r2 = find_root(rp);
  CHECK(std::abs(r1 - r2) <= 1e-11);
}

TEST_CASE("leapfrog free motion and hand-checked harmonic step") {
  SeparableSystem sys;
  sys.kappa = 1.0;
  sys.potential = [](double) { return 0.0; };
  sys.dpotential = [](double) { return 0.0; };
  sys.h = 0.1;
  sys.q = 0.0;
  sys.pi = 1.0;
  sys = leapfrog_step(sys);
  CHECK(sys.q == doctest::Approx(0.1).epsilon(1e-15));
  CHECK(sys.pi == doctest::Approx(1.0).epsilon(1e-15));

  sys.potential = [](double q) { return 0.5 * q * q; };
  sys.dpotential = [](double q) { return q; };
  sys.q = 1.0;
  sys.pi = 0.0;
  sys = leapfrog_step(sys);
  CHECK(sys.q == doctest::Approx(0.995).epsilon(1e-14));
  CHECK(sys.pi == doctest::Approx(-0.09975).epsilon(1e-14));
}

TEST_CASE("leapfrog is time reversible") {
  std::mt19937_64 rng(41);
  std::uniform_real_distribution<double> dist(-1.0, 1.0);
  for (int trial = 0; trial < 20; ++trial) {
    SeparableSystem sys;
    sys.kappa = 0.5 + 0.5 * std::abs(dist(rng));
    sys.potential = [](double q) { return 0.5 * q * q + 0.25 * q * q * q * q; };
    sys.dpotential = [](double q) { return q + q * q * q; };
    sys.h = 0.05;
    sys.q = dist(rng);
    sys.pi = dist(rng);
    SeparableSystem fwd = leapfrog_step(sys);
    fwd.h = -sys.h;
    const SeparableSystem back = leapfrog_step(fwd);
    CHECK(std::abs(back.q - sys.q) <= 1e-14);
    CHECK(std::abs(back.pi - sys.pi) <= 1e-14);
  }
}

TEST_CASE("integrate_effective recovers the harmonic period") {
  SeparableSystem sys;
  sys.kappa = 1.0;
  sys.potential = [](double q) { return 0.5 * q * q; };
  sys.dpotential = [](double q) { return q; };
  sys.h = 1e-3;
  sys.q = 1.0;
  sys.pi = 0.0;
  const auto traj = integrate_effective(sys, 2.0 * std::numbers::pi, 1);
  const PhasePoint& last = traj.back();
  CHECK(std::abs(last.q - 1.0) <= 1e-4);
  CHECK(std::abs(last.pi) <= 1e-3);

  // Free motion is exact: Q(t) = kappa * Pi0 * t.
  SeparableSystem fre;
  fre.kappa = 2.0;
  fre.potential = [](double) { return 0.0; };
  fre.dpotential = [](double) { return 0.0; };
  fre.h = 0.01;
  fre.q = 0.0;
  fre.pi = 0.5;
  const auto ftraj = integrate_effective(fre, 1.0, 1);
  CHECK(ftraj.back().q == doctest::Approx(2.0 * 0.5 * 1.0).epsilon(1e-13));
}

TEST_CASE("leapfrog energy drift decreases ~4x when h halves") {
  auto max_drift = [](double h) {
    SeparableSystem sys;
    sys.kappa = 1.0;
    sys.potential = [](double q) { return 0.5 * q * q; };
    sys.dpotential = [](double q) { return q; };
    sys.h = h;
    sys.q = 1.0;
    sys.pi = 0.0;
    const double e0 = 0.5 * sys.kappa * sys.pi * sys.pi + sys.potential(sys.q);
    double worst = 0.0;
    for (const PhasePoint& p : integrate_effective(sys, 10.0, 1)) {
      const double e = 0.5 * sys.kappa * p.pi * p.pi + sys.potential(p.q);
      worst = std::max(worst, std::abs(e - e0));
    }
    return worst;
  };
  const double ratio = max_drift(0.02) / max_drift(0.01);
  CHECK(ratio > 3.0);
  CHECK(ratio < 5.0);
}

TEST_CASE("fit_slope on exact and perturbed power laws") {
  std::vector<std::pair<double, double>> pts = {{0.1, 0.1}, {0.01, 0.01}, {0.001, 0.001}};
  SlopeFit fit = fit_slope(pts);
  CHECK(fit.slope == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(fit.max_residual <= 1e-12);

  pts = {{0.1, 0.01}, {0.01, 1e-4}, {0.001, 1e-6}};
  fit = fit_slope(pts);
  CHECK(fit.slope == doctest::Approx(2.0).epsilon(1e-12));

  // y = 3 eps^1.5 with +-1% multiplicative noise.
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> noise(-0.01, 0.01);
  pts.clear();
  for (double eps : {0.1, 0.03, 0.01, 0.003, 0.001})
    pts.emplace_back(eps, 3.0 * std::pow(eps, 1.5) * (1.0 + noise(rng)));
  fit = fit_slope(pts);
  CHECK(fit.slope >= 1.45);
  CHECK(fit.slope <= 1.55);
}

TEST_CASE("fit_slope is invariant under rescaling y") {
  std::vector<std::pair<double, double>> pts = {
      {0.1, 0.02}, {0.03, 0.0055}, {0.01, 0.0021}, {0.003, 0.0006}};
  const SlopeFit a = fit_slope(pts);
  for (auto& [x, y] : pts) y *= 17.0;
  const SlopeFit b = fit_slope(pts);
  CHECK(a.slope == doctest::Approx(b.slope).epsilon(1e-12));
  CHECK(b.intercept == doctest::Approx(a.intercept + std::log10(17.0)).epsilon(1e-12));
  CHECK(a.max_residual == doctest::Approx(b.max_residual).epsilon(1e-9));
}

TEST_CASE("fit_slope rejects bad input") {
  CHECK_THROWS_AS(fit_slope({{0.1, 1.0}, {0.01, 0.1}}), Error);
  CHECK_THROWS_AS(fit_slope({{0.1, 1.0}, {0.01, -0.1}, {0.001, 0.01}}), Error);
  CHECK_THROWS_AS(fit_slope({{0.1, 1.0}, {0.1, 0.1}, {0.1, 0.01}}), Error);
}
