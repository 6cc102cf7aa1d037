#pragma once

#include <functional>
#include <utility>
#include <vector>

#include "profile.hpp"

namespace adiasim {

// Geometric ray in a planar guide bounded by y = 0 and y = d(eps*x).
// Between reflections the ray is a straight line traced with velocity
// (px, py), |p| = 1; profile derivatives are with respect to X = eps*x.
struct RayState {
  double x = 0.0;
  double y = 0.0;
  double px = 0.0;
  double py = 0.0;
  double eps = 0.0;
  double s = 0.0; // accumulated trace parameter
};

struct RayActionAngle {
  double I = 0.0;       // |py| d(eps x) / pi
  double phi = 0.0;     // in [0, 2pi); (0,pi) while py > 0
  double p_hat_x = 0.0; // shifted longitudinal momentum, conserved at reflections
  double I_tilde = 0.0; // first-order improved action
};

enum class GuideWall { bottom, top };

struct RayEvent {
  double s = 0.0;
  GuideWall wall = GuideWall::bottom;
  RayState pre;
  RayState post;
  double dI = 0.0;
  double dI_tilde = 0.0;
};

struct RayContext {
  const Profile* profile = nullptr;
  double eps = 0.0;
  double d_min = 0.0;
  double sup_d1 = 0.0;
  double root_atol = 1e-12;
  double grazing_tol = 0.0; // |py| must stay above this
};

// Validates d > 0 on [X_lo, X_hi] (the slow span the ray can reach) and
// fixes the grazing tolerance from the wall-slope bound.
RayContext make_ray_context(const Profile& profile, double eps, double X_lo, double X_hi,
                            double d_floor = 1e-6);

double wg_phase_f(double phi);

RayActionAngle to_ray_action_angle(const RayState& s, const Profile& profile);

// p_hat = px + eps * I * d' * f(phi) / d, the inverse of the momentum shift.
double ray_p_hat(const RayState& s, const Profile& profile);

// I_tilde = I - eps * p_hat * d(X) * d'(X) * f(phi) / pi^2.
double improved_action_wg(double I, double phi, double px_hat, double X, double eps,
                          const Profile& profile);
double improved_action_wg_from_f(double I, double f, double px_hat, double X, double eps,
                                 const Profile& profile);

// Straight-line advance to the first wall crossing. Bottom hits are closed
// form; top hits march in steps of d_min/2 and then bracket a root of
// y + py*s - d(eps(x + px*s)).
std::pair<GuideWall, RayState> trace_segment(const RayState& s, const RayContext& ctx);

// Specular reflection: bottom flips py; top reflects about the wall tangent
// of slope eps*d' at the hit point (|p| renormalized when it drifts past
// 1e-15).
RayState reflect(GuideWall wall, const RayState& s, const RayContext& ctx);

// Algebraic top-wall action update: I1 = I - 2 eps d'/(1+eps^2 d'^2) *
// (eps d' I + d px / pi).
double action_jump_top(double I, double px, double d, double dprime, double eps);

// Independent route via the fixed-(p_hat, x) Hamiltonian matching, solved
// as a quadratic for the positive root.
double action_update_hamiltonian_matching(double I, double p_hat, double d, double dprime,
                                          double eps);

struct RaySample {
  double s = 0.0, x = 0.0, y = 0.0, px = 0.0, py = 0.0, I = 0.0, I_tilde = 0.0;
  double H_residual = 0.0; // pi^2 I0^2/d^2 + px^2 - 1, with the launch action I0
};

struct RaySink {
  std::function<bool(const RayEvent&)> on_event;
  std::function<void(const RaySample&)> on_sample;
};

void simulate_ray(RayState initial, const RayContext& ctx, double s_end, long grid_points,
                  const RaySink& sink);

struct RayRun {
  std::vector<RayEvent> events;
  std::vector<RaySample> samples;
};

RayRun run_ray(const RayState& initial, const Profile& profile, double s_end,
               long grid_points = 10000);

// Longitudinal regime classification against the humps of pi^2 J^2 / d^2(X).
enum class GuideRegime { passing, single_reflection, resonator };

struct GuideHump {
  double X = 0.0;      // location of the constriction (local max of the hump)
  double height = 0.0; // pi^2 J^2 / d^2 at the constriction
};

struct ClassifyResult {
  GuideRegime regime = GuideRegime::passing;
  std::vector<GuideHump> humps; // humps exceeding F, ordered by X
  double F = 0.0;
  double J = 0.0;
};

// Throws Errc::domain when F sits within `separatrix_tol` of a hump top
// (separatrix level: deliberately unclassified).
ClassifyResult classify_regime(double J, double F, double X_launch, const Profile& profile,
                               double X_lo, double X_hi, double separatrix_tol = 1e-9);

// State of the averaged longitudinal system on its H = 0 level set.
struct EffectiveRay {
  double J = 0.0;     // conserved transverse action parameter
  double p = 0.0;     // longitudinal momentum, pi^2 J^2/d^2 + p^2 = 1
  double X = 0.0;     // slow coordinate eps*x
  double psi = 0.0;   // effective transverse phase
  double omega = 0.0; // dpsi/ds = pi^2 J / d^2(X)
};

EffectiveRay effective_ray_at(double J, double x, double psi, double eps, const Profile& profile,
                              double p_sign);

// Effective longitudinal momentum on the H = 0 level set of the averaged
// Hamiltonian: p(X) = sign * sqrt(1 - pi^2 J^2 / d^2(X)).
double effective_level_momentum(double J, double X, const Profile& profile, double sign);

// Phase of the averaged system accumulated between x0 and x1 for a passing
// ray: integral of pi^2 J / (d^2 p) dX / eps, by composite Gauss-Legendre.
double effective_phase_advance(double J, double x0, double x1, double eps, const Profile& profile,
                               double p_sign);

} // namespace adiasim
