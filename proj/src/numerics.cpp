#include "numerics.hpp"

#include <algorithm>
#include <cmath>

#include "error.hpp"

namespace adiasim {

double find_root(const RootProblem& problem) {
  double a = problem.lo;
  double b = problem.hi;
  if (!(b >= a)) fail(Errc::invalid_argument, "root bracket is inverted");

  double fa = problem.f(a);
  double fb = problem.f(b);
  if (fa == 0.0) return a;
  if (fb == 0.0) return b;
  if ((fa < 0.0) == (fb < 0.0))
    fail(Errc::simulation, "root bracket has no sign change");

  double x = 0.5 * (a + b);
  double fx = problem.f(x);
  double x_prev = a;
  double f_prev = fa;
  double width_check = b - a;
  int since_check = 0;

  for (int iter = 0; iter < 200; ++iter) {
    if (fx == 0.0) return x;

    // Shrink the bracket around the sign change.
    if ((fx < 0.0) == (fa < 0.0)) {
      a = x;
      fa = fx;
    } else {
      b = x;
    }

    const double tol = problem.atol * std::max(1.0, std::abs(x));
    if (b - a <= 2.0 * tol) return 0.5 * (a + b);

    // Newton (if a derivative is supplied) or secant candidate, accepted only
    // inside the open bracket. If two accelerated steps in a row fail to
    // halve the bracket, bisect.
    double cand = 0.5 * (a + b);
    if (since_check < 2) {
      if (problem.df) {
        const double d = problem.df(x);
        if (d != 0.0) {
          const double n = x - fx / d;
          if (n > a && n < b) cand = n;
        }
      } else if (fx != f_prev) {
        const double s = x - fx * (x - x_prev) / (fx - f_prev);
        if (s > a && s < b) cand = s;
      }
      ++since_check;
    }
    if (since_check >= 2) {
      if (b - a > 0.5 * width_check) cand = 0.5 * (a + b);
      width_check = b - a;
      since_check = 0;
    }

    x_prev = x;
    f_prev = fx;
    x = cand;
    fx = problem.f(x);
  }
  fail(Errc::simulation, "root tolerance not reached in 200 iterations");
}

SeparableSystem leapfrog_step(SeparableSystem sys) {
  const double half = 0.5 * sys.h;
  sys.pi -= half * sys.dpotential(sys.q);
  sys.q += sys.h * sys.kappa * sys.pi;
  sys.pi -= half * sys.dpotential(sys.q);
  return sys;
}

std::vector<PhasePoint> integrate_effective(SeparableSystem sys, double t_end, int sample_every) {
  if (!(t_end > 0.0)) fail(Errc::invalid_argument, "t_end must be positive");
  if (!(sys.h > 0.0)) fail(Errc::invalid_argument, "step size must be positive");
  if (sample_every < 1) sample_every = 1;

  const long steps = std::max<long>(1, std::lround(t_end / sys.h));
  sys.h = t_end / static_cast<double>(steps);

  std::vector<PhasePoint> out;
  out.reserve(static_cast<size_t>(steps / sample_every) + 2);
  out.push_back({0.0, sys.q, sys.pi});
  for (long i = 1; i <= steps; ++i) {
    sys = leapfrog_step(sys);
    if (i % sample_every == 0 || i == steps)
      out.push_back({sys.h * static_cast<double>(i), sys.q, sys.pi});
  }
  return out;
}

SlopeFit fit_slope(const std::vector<std::pair<double, double>>& points) {
  if (points.size() < 3) fail(Errc::invalid_argument, "slope fit needs at least 3 points");

  std::vector<double> lx, ly;
  lx.reserve(points.size());
  ly.reserve(points.size());
  for (const auto& [x, y] : points) {
    if (!(x > 0.0) || !(y > 0.0))
      fail(Errc::invalid_argument, "slope fit requires positive abscissae and values");
    lx.push_back(std::log10(x));
    ly.push_back(std::log10(y));
  }

  const double n = static_cast<double>(lx.size());
  double mx = 0.0, my = 0.0;
  for (size_t i = 0; i < lx.size(); ++i) {
    mx += lx[i];
    my += ly[i];
  }
  mx /= n;
  my /= n;

  double sxx = 0.0, sxy = 0.0;
  for (size_t i = 0; i < lx.size(); ++i) {
    sxx += (lx[i] - mx) * (lx[i] - mx);
    sxy += (lx[i] - mx) * (ly[i] - my);
  }
  if (sxx < 1e-24) fail(Errc::invalid_argument, "slope fit is degenerate (all eps equal)");

  SlopeFit fit;
  fit.n = static_cast<int>(lx.size());
  fit.slope = sxy / sxx;
  fit.intercept = my - fit.slope * mx;
  for (size_t i = 0; i < lx.size(); ++i)
    fit.max_residual = std::max(fit.max_residual, std::abs(ly[i] - (fit.slope * lx[i] + fit.intercept)));
  if (!std::isfinite(fit.slope)) fail(Errc::invalid_argument, "slope fit is not finite");
  return fit;
}

} // namespace adiasim
