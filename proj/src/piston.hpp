#pragma once

#include <functional>
#include <utility>
#include <vector>

#include "numerics.hpp"

namespace adiasim {

// Massive piston (mass M = eps^-2) at X in a container of length L, with
// unit-mass particles on both sides moving parallel to the axis. All motion
// is linear between events, so collision times are closed form.
enum class Side { left, right };

struct PistonParticle {
  Side side = Side::left;
  double x = 0.0;
  double p = 0.0; // momentum = velocity (unit mass)
};

struct PistonSystem {
  double L = 0.0;
  double eps = 0.0;
  double t = 0.0;
  double X = 0.0;
  double P = 0.0; // piston momentum; velocity is eps^2 * P
  std::vector<PistonParticle> particles;

  double mass() const { return 1.0 / (eps * eps); }
  double piston_velocity() const { return eps * eps * P; }
  double energy() const;
};

enum class CollisionKind { particle_wall, particle_piston };

struct CollisionEvent {
  double t = 0.0;
  CollisionKind kind = CollisionKind::particle_wall;
  int index = -1; // particle index
  double p_pre = 0.0;
  double p_post = 0.0;
  double P_pre = 0.0;
  double P_post = 0.0;
  double dI = 0.0;       // instantaneous action jump of the colliding particle
  double dI_tilde = 0.0; // instantaneous improved-action jump
};

struct PistonActionEntry {
  double I = 0.0;
  double phi = 0.0; // in [0, 2pi); zero at the container walls
  double I_tilde = 0.0;
};

struct PistonActionSet {
  std::vector<PistonActionEntry> particles;
  double P_check = 0.0; // eps * P
  double I_sum_l = 0.0; // sqrt(sum of squared left actions)
  double I_sum_r = 0.0;
};

double piston_phase_f(double phi);

PistonActionSet actions_of(const PistonSystem& sys);

// Canonical shifted piston momentum P_hat = P + sum_l (I/X) f(phi) -
// sum_r (I/(L-X)) f(phi); continuous across collisions.
double piston_p_hat(const PistonSystem& sys);

// Direct action update at a particle-piston collision:
//   I' = I - 2PX/(pi M) + (2/(M+1)) (PX/(pi M) - I)
// with X replaced by L-X and P by -P for a right-side particle.
double action_jump_piston(double I, double P, double X, double M, Side side);

// Independent route: fixed-time Hamiltonian matching for particle `idx`
// about to collide with the piston (pre-collision system state), solved as a
// quadratic for the positive root.
double action_update_hamiltonian_matching(const PistonSystem& sys, int idx);

// Advances to the next collision and applies the elastic law. Throws when
// two candidate events coincide within 1e-12 (dynamics undefined), when a
// particle overtakes the piston, or when the energy drifts past 1e-8
// relative (checked against `energy_ref` when positive).
CollisionEvent advance_to_next_collision(PistonSystem& sys, double energy_ref = -1.0);

std::pair<CollisionEvent, PistonSystem> next_collision(const PistonSystem& sys);

struct PistonSample {
  double t = 0.0;
  double X = 0.0;
  double eps_P = 0.0;
  double E = 0.0;
  std::vector<double> I;
  std::vector<double> I_tilde;
};

struct PistonSink {
  // Receives the event and the post-event system.
  std::function<bool(const CollisionEvent&, const PistonSystem&)> on_event;
  std::function<void(const PistonSample&)> on_sample;
};

void simulate_piston(PistonSystem sys, double t_end, long grid_points, const PistonSink& sink);

struct PistonRun {
  std::vector<CollisionEvent> events;
  std::vector<PistonSample> samples;
};

PistonRun run_piston(const PistonSystem& initial, double t_end, long grid_points = 10000);

// Effective piston dynamics from Hamiltonian
//   H = eps^2 P^2/2 + pi^2 I_sum_l^2/(2X^2) + pi^2 I_sum_r^2/(2(L-X)^2),
// integrated by leapfrog in (X, Pi = eps P): dX/dt = eps*Pi, dPi/dt =
// -eps*U'(X). Returns (t, X, eps*P) samples on the uniform grid implied by
// sample_every.
std::vector<PhasePoint> effective_piston(double I_sum_l, double I_sum_r, double L, double eps,
                                         double X0, double P0, double t_end, double h,
                                         int sample_every = 1);

double piston_effective_potential(double I_sum_l, double I_sum_r, double L, double X);

// Root of U'(X) on (0, L); unique since U is convex there.
double piston_equilibrium(double I_sum_l, double I_sum_r, double L);

} // namespace adiasim
