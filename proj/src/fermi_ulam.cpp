#include "fermi_ulam.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "error.hpp"
#include "format.hpp"
#include "numerics.hpp"

namespace adiasim {

namespace {
constexpr double kPi = std::numbers::pi;
}

FermiContext make_fermi_context(const Profile& profile, const FermiState& initial, double t_end,
                                double d_floor) {
  if (!(initial.eps > 0.0)) fail(Errc::invalid_argument, "eps must be positive");
  if (!(t_end >= initial.t)) fail(Errc::invalid_argument, "t_end precedes the initial time");

  const double tau_lo = initial.eps * initial.t;
  const double tau_hi = initial.eps * t_end;
  const PositivityReport rep = profile.check_positive(tau_lo, tau_hi, d_floor);
  if (!rep.accepted)
    fail(Errc::domain, "wall profile dips to " + format_double(rep.min_d) + " at tau=" +
                           format_double(rep.tau_min) + "; must stay above " +
                           format_double(d_floor));

  FermiContext ctx;
  ctx.profile = &profile;
  ctx.eps = initial.eps;
  ctx.d_min = rep.min_d;
  ctx.sup_d1 = rep.max_abs_d1;
  return ctx;
}

double fermi_phase_f(double phi) { return phi <= kPi ? phi : phi - 2.0 * kPi; }

FermiActionAngle to_action_angle(const FermiState& s, const Profile& profile) {
  if (s.v == 0.0) fail(Errc::invalid_argument, "action-angle undefined at v = 0");
  const ProfileValue pv = profile.eval(s.eps * s.t);
  FermiActionAngle aa;
  aa.I = pv.d * std::abs(s.v) / kPi;
  aa.E = 0.5 * s.v * s.v;
  aa.phi = s.v > 0.0 ? kPi * s.x / pv.d : kPi * (2.0 - s.x / pv.d);
  if (aa.phi >= 2.0 * kPi) aa.phi -= 2.0 * kPi;
  const double f = s.v > 0.0 ? kPi * s.x / pv.d : -kPi * s.x / pv.d;
  aa.I_hat = aa.I - s.eps * pv.d * pv.d1 * f / (kPi * kPi);
  return aa;
}

double improved_action_from_f(double I, double f, double tau, double eps, const Profile& profile) {
  const ProfileValue pv = profile.eval(tau);
  return I - eps * pv.d * pv.d1 * f / (kPi * kPi);
}

double improved_action(double I, double phi, double tau, double eps, const Profile& profile) {
  return improved_action_from_f(I, fermi_phase_f(phi), tau, eps, profile);
}

double action_jump_direct(double /*v_pre*/, double d, double d_dot) {
  return -2.0 * d * d_dot / kPi;
}

double action_update_energy_matching(double I_pre, double d, double d_dot) {
  // I+^2 + (2 d ddot/pi) I+ - (I-^2 - 2 d ddot I-/pi) = 0, positive root.
  const double c = d * d_dot / kPi;
  return -c + std::sqrt(c * c + I_pre * I_pre - 2.0 * c * I_pre);
}

std::pair<FermiEvent, FermiState> next_fermi_event(const FermiState& s, const FermiContext& ctx) {
  const Profile& prof = *ctx.profile;
  FermiEvent ev;
  ev.pre = s;

  if (s.v < 0.0) {
    // Fixed wall: exact flight time.
    const double t_hit = s.t + s.x / (-s.v);
    FermiState pre = s;
    pre.t = t_hit;
    pre.x = 0.0;
    FermiState post = pre;
    post.v = -s.v;
    ev.t = t_hit;
    ev.wall = FermiWall::fixed;
    ev.pre = pre;
    ev.post = post;
    ev.dI = 0.0;
    ev.dI_hat = 0.0;
    return {ev, post};
  }

  if (!(s.v > 0.0)) fail(Errc::simulation, "particle velocity vanished");

  const double wall_speed = ctx.eps * ctx.sup_d1;
  if (!(s.v > wall_speed))
    fail(Errc::simulation, "adiabatic regime violated: particle slower than the wall bound (v=" +
                               format_double(s.v) + ", bound=" + format_double(wall_speed) + ")");

  // Moving wall: first root of x + v*s - d(eps*(t+s)) = 0. The bound on the
  // wall speed makes g increasing on average; g(s_hi) > 0 is guaranteed by
  //   g(s) >= (x - d(eps t)) + s (v - sup|eps d'|).
  const double d_now = prof.eval(ctx.eps * s.t).d;
  const double s_hi = 2.0 * d_now / (s.v - wall_speed);
  RootProblem rp;
  rp.lo = 0.0;
  rp.hi = s_hi;
  rp.atol = ctx.root_atol;
  rp.f = [&](double dt) { return s.x + s.v * dt - prof.eval(ctx.eps * (s.t + dt)).d; };
  rp.df = [&](double dt) { return s.v - ctx.eps * prof.eval(ctx.eps * (s.t + dt)).d1; };
  const double dt_hit = find_root(rp);

  const double t_hit = s.t + dt_hit;
  const ProfileValue pv = prof.eval(ctx.eps * t_hit);
  const double d_dot = ctx.eps * pv.d1;

  FermiState pre = s;
  pre.t = t_hit;
  pre.x = pv.d; // snap onto the wall
  FermiState post = pre;
  post.v = 2.0 * d_dot - s.v;

  if (post.v >= d_dot)
    fail(Errc::simulation, "moving-wall impact does not separate: v1=" + format_double(post.v) +
                               " >= wall velocity " + format_double(d_dot));

  const double I_pre = pv.d * std::abs(pre.v) / kPi;
  const double I_post = pv.d * std::abs(post.v) / kPi;
  // One-sided f at the impact: pi - 0 before, pi + 0 after.
  const double Ih_pre = improved_action_from_f(I_pre, kPi, ctx.eps * t_hit, ctx.eps, prof);
  const double Ih_post = improved_action_from_f(I_post, -kPi, ctx.eps * t_hit, ctx.eps, prof);

  ev.t = t_hit;
  ev.wall = FermiWall::moving;
  ev.pre = pre;
  ev.post = post;
  ev.dI = I_post - I_pre;
  ev.dI_hat = Ih_post - Ih_pre;
  return {ev, post};
}

FermiSample fermi_sample(const FermiState& s, const Profile& profile) {
  const FermiActionAngle aa = to_action_angle(s, profile);
  return {s.t, s.x, s.v, aa.I, aa.I_hat, aa.E, aa.phi};
}

void simulate_fermi(FermiState state, const FermiContext& ctx, double t_end, long grid_points,
                    const FermiSink& sink) {
  const Profile& prof = *ctx.profile;
  const double t0 = state.t;
  if (!(t_end > t0)) fail(Errc::invalid_argument, "t_end must exceed the initial time");
  if (!(state.x >= 0.0) || state.x > prof.eval(ctx.eps * t0).d + 1e-9)
    fail(Errc::invalid_argument, "initial position outside the walls");

  auto emit_sample = [&](const FermiState& s) {
    if (sink.on_sample) sink.on_sample(fermi_sample(s, prof));
  };

  emit_sample(state);

  const double grid_dt = grid_points > 0 ? (t_end - t0) / static_cast<double>(grid_points) : 0.0;
  long next_grid = 1;

  // Finite-event guarantee: impacts cannot outpace the flight time floor.
  double v_max = std::abs(state.v);
  long events = 0;

  while (true) {
    auto [ev, post] = next_fermi_event(state, ctx);
    const double t_ev = std::min(ev.t, t_end);

    // Uniform grid samples inside the free segment.
    if (sink.on_sample && grid_dt > 0.0) {
      while (next_grid <= grid_points && t0 + grid_dt * static_cast<double>(next_grid) < t_ev) {
        const double tg = t0 + grid_dt * static_cast<double>(next_grid);
        FermiState mid = state;
        mid.t = tg;
        mid.x = state.x + state.v * (tg - state.t);
        emit_sample(mid);
        ++next_grid;
      }
    }

    if (ev.t > t_end) {
      FermiState fin = state;
      fin.t = t_end;
      fin.x = state.x + state.v * (t_end - state.t);
      emit_sample(fin);
      return;
    }

    ++events;
    v_max = std::max(v_max, std::abs(post.v));
    // Each flight covers at least d_min at speed at most v_max.
    const long cap = static_cast<long>((t_end - t0) * v_max / ctx.d_min) + 16;
    if (events > cap) fail(Errc::simulation, "event count exceeded its analytic bound");

    if (sink.on_event && !sink.on_event(ev)) return;
    emit_sample(post);
    state = post;
    if (state.t >= t_end) return;
  }
}

FermiRun run_fermi(const FermiState& initial, const Profile& profile, double t_end,
                   long grid_points) {
  const FermiContext ctx = make_fermi_context(profile, initial, t_end);
  FermiRun run;
  FermiSink sink;
  sink.on_event = [&](const FermiEvent& e) {
    run.events.push_back(e);
    return true;
  };
  sink.on_sample = [&](const FermiSample& s) { run.samples.push_back(s); };
  simulate_fermi(initial, ctx, t_end, grid_points, sink);
  return run;
}

} // namespace adiasim
