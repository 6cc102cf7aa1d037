#pragma once

#include <functional>
#include <utility>
#include <vector>

namespace adiasim {

// Scalar root location on a bracketing interval. `df` is optional; when
// present the solver tries Newton steps, otherwise secant, always falling
// back to bisection and never leaving the bracket.
struct RootProblem {
  std::function<double(double)> f;
  std::function<double(double)> df; // may be empty
  double lo = 0.0;
  double hi = 0.0;
  double atol = 1e-12; // tolerance on the abscissa, scaled by max(1, |t|)
};

double find_root(const RootProblem& problem);

// One-degree-of-freedom separable system integrated by Stoermer-Verlet.
// Convention (pinned by tests): drift dQ/dt = kappa * Pi, kick dPi/dt =
// -U'(Q). The conserved energy is kappa*Pi^2/2 + U(Q).
struct SeparableSystem {
  double kappa = 1.0;
  std::function<double(double)> potential;  // U(Q)
  std::function<double(double)> dpotential; // U'(Q)
  double h = 0.0;
  double q = 0.0;
  double pi = 0.0;
};

SeparableSystem leapfrog_step(SeparableSystem sys);

struct PhasePoint {
  double t = 0.0;
  double q = 0.0;
  double pi = 0.0;
};

// Fixed-step run to t_end (the step is adjusted once so an integer number of
// steps lands exactly on t_end); records every `sample_every`-th state plus
// the endpoints.
std::vector<PhasePoint> integrate_effective(SeparableSystem sys, double t_end, int sample_every);

// Least-squares line through (log10 eps, log10 y).
struct SlopeFit {
  double slope = 0.0;
  double intercept = 0.0;
  double max_residual = 0.0; // max |log10 y - fit|, in log10 units
  int n = 0;
};

SlopeFit fit_slope(const std::vector<std::pair<double, double>>& points);

} // namespace adiasim
