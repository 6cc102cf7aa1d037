#include "piston.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "error.hpp"
#include "format.hpp"

namespace adiasim {

namespace {
constexpr double kPi = std::numbers::pi;
constexpr double kTieTol = 1e-12; // simultaneous-collision tolerance, absolute in time
} // namespace

double PistonSystem::energy() const {
  double e = 0.5 * eps * eps * P * P;
  for (const PistonParticle& q : particles) e += 0.5 * q.p * q.p;
  return e;
}

double piston_phase_f(double phi) { return phi <= kPi ? phi : phi - 2.0 * kPi; }

namespace {

// Phase fraction in [0,1]: distance from the particle's own wall, measured
// toward the piston, over its cell length.
double cell_fraction(const PistonSystem& sys, const PistonParticle& q) {
  return q.side == Side::left ? q.x / sys.X : (sys.L - q.x) / (sys.L - sys.X);
}

// True when the particle moves toward the piston (phase on the (0,pi) branch).
bool toward_piston(const PistonParticle& q) {
  return q.side == Side::left ? q.p > 0.0 : q.p < 0.0;
}

} // namespace

PistonActionSet actions_of(const PistonSystem& sys) {
  PistonActionSet set;
  // Normalized momentum eps*P_hat with the canonical shifted momentum: it is
  // continuous across collisions, so the improved actions of bystander
  // particles do not jump when some other particle hits the piston. (With
  // the raw eps*P those jumps are O(eps^2) each and accumulate to O(eps)
  // over an eps^-1 horizon, defeating the correction.)
  set.P_check = sys.eps * piston_p_hat(sys);
  double sl = 0.0, sr = 0.0;
  set.particles.reserve(sys.particles.size());
  for (const PistonParticle& q : sys.particles) {
    if (q.p == 0.0) fail(Errc::invalid_argument, "degenerate particle with p = 0");
    const double cell = q.side == Side::left ? sys.X : sys.L - sys.X;
    PistonActionEntry e;
    e.I = std::abs(q.p) * cell / kPi;
    const double frac = cell_fraction(sys, q);
    e.phi = toward_piston(q) ? kPi * frac : kPi * (2.0 - frac);
    if (e.phi >= 2.0 * kPi) e.phi -= 2.0 * kPi;
    const double f = toward_piston(q) ? kPi * frac : -kPi * frac;
    if (q.side == Side::left) {
      e.I_tilde = e.I - sys.eps * set.P_check * sys.X * f / (kPi * kPi);
      sl += e.I * e.I;
    } else {
      e.I_tilde = e.I + sys.eps * set.P_check * (sys.L - sys.X) * f / (kPi * kPi);
      sr += e.I * e.I;
    }
    set.particles.push_back(e);
  }
  set.I_sum_l = std::sqrt(sl);
  set.I_sum_r = std::sqrt(sr);
  return set;
}

double piston_p_hat(const PistonSystem& sys) {
  double acc = sys.P;
  for (const PistonParticle& q : sys.particles) {
    const double cell = q.side == Side::left ? sys.X : sys.L - sys.X;
    const double I = std::abs(q.p) * cell / kPi;
    const double frac = cell_fraction(sys, q);
    const double f = toward_piston(q) ? kPi * frac : -kPi * frac;
    acc += (q.side == Side::left ? 1.0 : -1.0) * I * f / cell;
  }
  return acc;
}

double action_jump_piston(double I, double P, double X, double M, Side side) {
  const double Pm = side == Side::left ? P : -P;
  const double cell = X; // caller passes the cell length (L-X on the right)
  return I - 2.0 * Pm * cell / (kPi * M) + (2.0 / (M + 1.0)) * (Pm * cell / (kPi * M) - I);
}

double action_update_hamiltonian_matching(const PistonSystem& sys, int idx) {
  const PistonParticle& q = sys.particles[static_cast<size_t>(idx)];
  const double M = sys.mass();
  const double cell = q.side == Side::left ? sys.X : sys.L - sys.X;
  const double I = std::abs(q.p) * cell / kPi;

  // Fix every variable except the colliding particle's and equate the
  // Hamiltonian across phi = pi. The kinetic term reads
  //   (C - s_i(phi_i))^2, s_i = +(I/X) f(phi) on the left, -(I/(L-X)) f(phi)
  // on the right, with C = P_hat minus every other particle's shift term
  // (reconstructed through the canonical-momentum route). That gives
  //   pi^2 (M+1)/(2 cell^2 M) (I'^2 - I^2) + sigma * pi C/(M cell) (I' + I) = 0,
  // sigma = +1 left, -1 right; take the positive root of the quadratic.
  double C = piston_p_hat(sys);
  for (size_t j = 0; j < sys.particles.size(); ++j) {
    if (static_cast<int>(j) == idx) continue;
    const PistonParticle& r = sys.particles[j];
    const double rcell = r.side == Side::left ? sys.X : sys.L - sys.X;
    const double rI = std::abs(r.p) * rcell / kPi;
    const double frac = cell_fraction(sys, r);
    const double f = toward_piston(r) ? kPi * frac : -kPi * frac;
    C -= (r.side == Side::left ? 1.0 : -1.0) * rI * f / rcell;
  }

  const double a = kPi * kPi * (M + 1.0) / (2.0 * cell * cell * M);
  const double b = kPi * C / (M * cell);
  if (q.side == Side::left)
    return (-b + std::sqrt(b * b + 4.0 * a * (a * I * I - b * I))) / (2.0 * a);
  return (b + std::sqrt(b * b + 4.0 * a * (a * I * I + b * I))) / (2.0 * a);
}

namespace {

struct Candidate {
  double dt = std::numeric_limits<double>::infinity();
  CollisionKind kind = CollisionKind::particle_wall;
  int index = -1;
  bool piston_wall = false;
};

} // namespace

CollisionEvent advance_to_next_collision(PistonSystem& sys, double energy_ref) {
  const double V = sys.piston_velocity();

  Candidate best, second;
  auto offer = [&](double dt, CollisionKind kind, int index, bool piston_wall) {
    if (!(dt > 0.0)) return;
    if (dt < best.dt) {
      second = best;
      best = {dt, kind, index, piston_wall};
    } else if (dt < second.dt) {
      second = {dt, kind, index, piston_wall};
    }
  };

  for (size_t i = 0; i < sys.particles.size(); ++i) {
    const PistonParticle& q = sys.particles[i];
    const int idx = static_cast<int>(i);
    if (q.side == Side::left) {
      if (q.p < 0.0) offer(q.x / (-q.p), CollisionKind::particle_wall, idx, false);
      if (q.p > V) offer((sys.X - q.x) / (q.p - V), CollisionKind::particle_piston, idx, false);
    } else {
      if (q.p > 0.0) offer((sys.L - q.x) / q.p, CollisionKind::particle_wall, idx, false);
      if (q.p < V) offer((q.x - sys.X) / (V - q.p), CollisionKind::particle_piston, idx, false);
    }
  }
  // Piston against the container walls (possible only when a side is empty).
  if (V < 0.0) offer(sys.X / (-V), CollisionKind::particle_wall, -1, true);
  if (V > 0.0) offer((sys.L - sys.X) / V, CollisionKind::particle_wall, -1, true);

  if (best.index == -1 && !best.piston_wall)
    fail(Errc::simulation, "no further collision candidates");
  if (best.piston_wall)
    fail(Errc::simulation, "piston reached a container wall at t=" +
                               format_double(sys.t + best.dt));
  if (second.dt - best.dt < kTieTol)
    fail(Errc::simulation, "simultaneous collisions within 1e-12 at t=" +
                               format_double(sys.t + best.dt) + "; dynamics undefined");

  // Advance everything linearly.
  const double dt = best.dt;
  sys.t += dt;
  sys.X += V * dt;
  for (PistonParticle& q : sys.particles) q.x += q.p * dt;

  PistonParticle& q = sys.particles[static_cast<size_t>(best.index)];
  CollisionEvent ev;
  ev.t = sys.t;
  ev.kind = best.kind;
  ev.index = best.index;
  ev.p_pre = q.p;
  ev.P_pre = sys.P;

  const double cell_pre = q.side == Side::left ? sys.X : sys.L - sys.X;
  const double I_pre = std::abs(q.p) * cell_pre / kPi;

  if (best.kind == CollisionKind::particle_wall) {
    q.x = q.side == Side::left ? 0.0 : sys.L; // snap onto the wall
    q.p = -q.p;
    ev.dI = 0.0;
    ev.dI_tilde = 0.0;
  } else {
    q.x = sys.X; // both at the same point
    const double Pc_pre = sys.eps * piston_p_hat(sys);
    const double M = sys.mass();
    const double v = q.p;
    const double Vp = V + (2.0 / (M + 1.0)) * (v - V);
    const double vp = 2.0 * V - v + (2.0 / (M + 1.0)) * (v - V);
    q.p = vp;
    sys.P = M * Vp;

    const double I_post = std::abs(q.p) * cell_pre / kPi;
    ev.dI = I_post - I_pre;
    // One-sided f at the collision: +pi before, -pi after. The normalized
    // canonical momentum is continuous across the collision, but both sides
    // are evaluated through the same route anyway.
    const double Pc_post = sys.eps * piston_p_hat(sys);
    const double sgn = q.side == Side::left ? 1.0 : -1.0;
    const double corr_pre = sgn * sys.eps * Pc_pre * cell_pre * kPi / (kPi * kPi);
    const double corr_post = sgn * sys.eps * Pc_post * cell_pre * (-kPi) / (kPi * kPi);
    ev.dI_tilde = (I_post - corr_post) - (I_pre - corr_pre);
  }

  ev.p_post = q.p;
  ev.P_post = sys.P;

  // Ordering sanity after the move.
  for (const PistonParticle& r : sys.particles) {
    const bool ok = r.side == Side::left ? (r.x >= -1e-9 && r.x <= sys.X + 1e-9)
                                         : (r.x >= sys.X - 1e-9 && r.x <= sys.L + 1e-9);
    if (!ok)
      fail(Errc::simulation, "particle overtook the piston (numeric drift) at t=" +
                                 format_double(sys.t));
  }
  if (energy_ref > 0.0) {
    const double e = sys.energy();
    if (std::abs(e - energy_ref) > 1e-8 * energy_ref)
      fail(Errc::simulation, "energy drift exceeded 1e-8 relative at t=" + format_double(sys.t));
  }
  return ev;
}

std::pair<CollisionEvent, PistonSystem> next_collision(const PistonSystem& sys) {
  PistonSystem next = sys;
  CollisionEvent ev = advance_to_next_collision(next);
  return {ev, next};
}

namespace {

PistonSample make_piston_sample(const PistonSystem& sys) {
  PistonSample s;
  s.t = sys.t;
  s.X = sys.X;
  s.eps_P = sys.eps * sys.P;
  s.E = sys.energy();
  const PistonActionSet set = actions_of(sys);
  s.I.reserve(set.particles.size());
  s.I_tilde.reserve(set.particles.size());
  for (const PistonActionEntry& e : set.particles) {
    s.I.push_back(e.I);
    s.I_tilde.push_back(e.I_tilde);
  }
  return s;
}

void validate_piston(const PistonSystem& sys) {
  if (!(sys.eps > 0.0)) fail(Errc::invalid_argument, "eps must be positive");
  if (!(sys.L > 0.0)) fail(Errc::invalid_argument, "container length must be positive");
  if (!(sys.X > 0.0 && sys.X < sys.L)) fail(Errc::invalid_argument, "piston outside the container");
  for (const PistonParticle& q : sys.particles) {
    const bool ok = q.side == Side::left ? (q.x >= 0.0 && q.x <= sys.X)
                                         : (q.x >= sys.X && q.x <= sys.L);
    if (!ok) fail(Errc::invalid_argument, "particle starts on the wrong side of the piston");
    if (q.p == 0.0) fail(Errc::invalid_argument, "particle with zero momentum");
  }
}

} // namespace

void simulate_piston(PistonSystem sys, double t_end, long grid_points, const PistonSink& sink) {
  validate_piston(sys);
  const double t0 = sys.t;
  if (!(t_end > t0)) fail(Errc::invalid_argument, "t_end must exceed the initial time");

  const double E0 = sys.energy();
  auto emit_sample = [&](const PistonSystem& s) {
    if (sink.on_sample) sink.on_sample(make_piston_sample(s));
  };
  emit_sample(sys);

  const double grid_dt = grid_points > 0 ? (t_end - t0) / static_cast<double>(grid_points) : 0.0;
  long next_grid = 1;

  auto sample_grid_until = [&](double t_stop) {
    if (!sink.on_sample || grid_dt <= 0.0) return;
    while (next_grid <= grid_points && t0 + grid_dt * static_cast<double>(next_grid) < t_stop) {
      const double tg = t0 + grid_dt * static_cast<double>(next_grid);
      PistonSystem mid = sys;
      const double dt = tg - sys.t;
      mid.t = tg;
      mid.X += mid.piston_velocity() * dt;
      for (PistonParticle& q : mid.particles) q.x += q.p * dt;
      emit_sample(mid);
      ++next_grid;
    }
  };

  while (true) {
    PistonSystem next = sys;
    const CollisionEvent ev = advance_to_next_collision(next, E0);

    if (ev.t > t_end) {
      sample_grid_until(t_end);
      PistonSystem fin = sys;
      const double dt = t_end - sys.t;
      fin.t = t_end;
      fin.X += fin.piston_velocity() * dt;
      for (PistonParticle& q : fin.particles) q.x += q.p * dt;
      emit_sample(fin);
      return;
    }

    sample_grid_until(ev.t);
    sys = std::move(next);
    if (sink.on_event && !sink.on_event(ev, sys)) return;
    emit_sample(sys);
    if (sys.t >= t_end) return;
  }
}

PistonRun run_piston(const PistonSystem& initial, double t_end, long grid_points) {
  PistonRun run;
  PistonSink sink;
  sink.on_event = [&](const CollisionEvent& e, const PistonSystem&) {
    run.events.push_back(e);
    return true;
  };
  sink.on_sample = [&](const PistonSample& s) { run.samples.push_back(s); };
  simulate_piston(initial, t_end, grid_points, sink);
  return run;
}

double piston_effective_potential(double I_sum_l, double I_sum_r, double L, double X) {
  return kPi * kPi * I_sum_l * I_sum_l / (2.0 * X * X) +
         kPi * kPi * I_sum_r * I_sum_r / (2.0 * (L - X) * (L - X));
}

std::vector<PhasePoint> effective_piston(double I_sum_l, double I_sum_r, double L, double eps,
                                         double X0, double P0, double t_end, double h,
                                         int sample_every) {
  if (!(X0 > 0.0 && X0 < L)) fail(Errc::invalid_argument, "X0 outside the container");

  SeparableSystem sys;
  sys.kappa = eps;
  // Scaled potential so the kick realizes dPi/dt = -eps U'(X) with Pi = eps P.
  sys.potential = [=](double X) { return eps * piston_effective_potential(I_sum_l, I_sum_r, L, X); };
  sys.dpotential = [=](double X) {
    return eps * (-kPi * kPi * I_sum_l * I_sum_l / (X * X * X) +
                  kPi * kPi * I_sum_r * I_sum_r / ((L - X) * (L - X) * (L - X)));
  };
  sys.h = h;
  sys.q = X0;
  sys.pi = eps * P0;

  std::vector<PhasePoint> out = integrate_effective(sys, t_end, sample_every);
  for (const PhasePoint& p : out)
    if (!(p.q > 0.0 && p.q < L))
      fail(Errc::simulation, "effective piston left the container; reduce the step size");
  return out;
}

double piston_equilibrium(double I_sum_l, double I_sum_r, double L) {
  if (!(I_sum_l > 0.0 && I_sum_r > 0.0 && L > 0.0))
    fail(Errc::invalid_argument, "equilibrium needs positive actions and length");
  RootProblem rp;
  rp.lo = 1e-12 * L;
  rp.hi = L * (1.0 - 1e-12);
  rp.atol = 1e-15;
  rp.f = [=](double X) {
    return -kPi * kPi * I_sum_l * I_sum_l / (X * X * X) +
           kPi * kPi * I_sum_r * I_sum_r / ((L - X) * (L - X) * (L - X));
  };
  return find_root(rp);
}

} // namespace adiasim
