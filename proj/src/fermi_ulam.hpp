#pragma once

#include <functional>
#include <utility>
#include <vector>

#include "profile.hpp"

namespace adiasim {

// Particle between a fixed wall at x = 0 and a slowly moving wall at
// x = d(eps*t). Motion between impacts is free; impacts are elastic. All
// profile derivatives are taken with respect to slow time tau = eps*t, so
// the wall velocity is eps*d'(tau) throughout.
struct FermiState {
  double t = 0.0;
  double x = 0.0;
  double v = 0.0;
  double eps = 0.0;
};

struct FermiActionAngle {
  double I = 0.0;     // d|v|/pi
  double phi = 0.0;   // in [0, 2pi); (0,pi) while v > 0, (pi,2pi) while v < 0
  double E = 0.0;     // v^2/2
  double I_hat = 0.0; // first-order improved action
};

enum class FermiWall { fixed, moving };

struct FermiEvent {
  double t = 0.0;
  FermiWall wall = FermiWall::fixed;
  FermiState pre;
  FermiState post;
  double dI = 0.0;     // instantaneous action jump (0 at the fixed wall)
  double dI_hat = 0.0; // instantaneous improved-action jump
};

// Per-run constants derived from the validated profile domain.
struct FermiContext {
  const Profile* profile = nullptr;
  double eps = 0.0;
  double d_min = 0.0;      // lower bound on d over the run
  double sup_d1 = 0.0;     // upper bound on |d'| over the run
  double root_atol = 1e-12;
};

// Validates positivity of d on [eps*t0, eps*t0 + eps*(t_end - t0)] and
// captures the bounds the event loop needs. Throws on rejection.
FermiContext make_fermi_context(const Profile& profile, const FermiState& initial, double t_end,
                                double d_floor = 1e-6);

// The sawtooth phase factor: f(phi) = phi on (0,pi), phi - 2pi on (pi,2pi).
double fermi_phase_f(double phi);

FermiActionAngle to_action_angle(const FermiState& s, const Profile& profile);

// I_hat = I - eps * d(tau) * d'(tau) * f(phi) / pi^2, the first-order
// inversion of I = I_hat + eps dS1/dphi with dS1/dphi = d d' f(phi)/pi^2.
double improved_action(double I, double phi, double tau, double eps, const Profile& profile);

// Same with the f value supplied directly; used at impacts where f is
// evaluated one-sided (pi-0 before, pi+0 after).
double improved_action_from_f(double I, double f, double tau, double eps, const Profile& profile);

// Closed-form jump at a moving-wall impact: I+ - I- = -2 d ddot / pi,
// with ddot the wall velocity eps*d'.
double action_jump_direct(double v_pre, double d, double d_dot);

// Energy-matching update (independent route): solves
//   pi^2 I+^2/(2d^2) + pi I+ ddot/d = pi^2 I-^2/(2d^2) - pi I- ddot/d
// for the positive root via the quadratic formula.
double action_update_energy_matching(double I_pre, double d, double d_dot);

std::pair<FermiEvent, FermiState> next_fermi_event(const FermiState& s, const FermiContext& ctx);

struct FermiSample {
  double t = 0.0, x = 0.0, v = 0.0, I = 0.0, I_hat = 0.0, E = 0.0, phi = 0.0;
};

FermiSample fermi_sample(const FermiState& s, const Profile& profile);

// Observer interface for the event loop; either callback may be empty.
// on_event returning false stops the run early.
struct FermiSink {
  std::function<bool(const FermiEvent&)> on_event;
  std::function<void(const FermiSample&)> on_sample;
};

// Runs the event loop to t_end, emitting samples at the initial time, at a
// uniform grid of `grid_points` times, and at every impact (post-impact), in
// time order. Deterministic.
void simulate_fermi(FermiState initial, const FermiContext& ctx, double t_end, long grid_points,
                    const FermiSink& sink);

struct FermiRun {
  std::vector<FermiEvent> events;
  std::vector<FermiSample> samples;
};

FermiRun run_fermi(const FermiState& initial, const Profile& profile, double t_end,
                   long grid_points = 10000);

} // namespace adiasim
