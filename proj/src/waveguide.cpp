#include "waveguide.hpp"

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

RayContext make_ray_context(const Profile& profile, double eps, double X_lo, double X_hi,
                            double d_floor) {
  if (!(eps > 0.0)) fail(Errc::invalid_argument, "eps must be positive");
  const PositivityReport rep = profile.check_positive(X_lo, X_hi, d_floor);
  if (!rep.accepted)
    fail(Errc::domain, "guide width dips to " + format_double(rep.min_d) + " at X=" +
                           format_double(rep.tau_min) + "; must stay above " +
                           format_double(d_floor));
  RayContext ctx;
  ctx.profile = &profile;
  ctx.eps = eps;
  ctx.d_min = rep.min_d;
  ctx.sup_d1 = rep.max_abs_d1;
  ctx.grazing_tol = std::max(1e-12, 2.0 * eps * rep.max_abs_d1);
  return ctx;
}

double wg_phase_f(double phi) { return phi <= kPi ? phi : phi - 2.0 * kPi; }

RayActionAngle to_ray_action_angle(const RayState& s, const Profile& profile) {
  if (s.py == 0.0) fail(Errc::invalid_argument, "action-angle undefined for a grazing ray");
  const ProfileValue pv = profile.eval(s.eps * s.x);
  RayActionAngle aa;
  aa.I = std::abs(s.py) * pv.d / kPi;
  aa.phi = s.py > 0.0 ? kPi * s.y / pv.d : kPi * (2.0 - s.y / pv.d);
  if (aa.phi >= 2.0 * kPi) aa.phi -= 2.0 * kPi;
  const double f = s.py > 0.0 ? kPi * s.y / pv.d : -kPi * s.y / pv.d;
  aa.p_hat_x = s.px + s.eps * aa.I * pv.d1 * f / pv.d;
  aa.I_tilde = aa.I - s.eps * aa.p_hat_x * pv.d * pv.d1 * f / (kPi * kPi);
  return aa;
}

double ray_p_hat(const RayState& s, const Profile& profile) {
  return to_ray_action_angle(s, profile).p_hat_x;
}

double improved_action_wg_from_f(double I, double f, double px_hat, double X, double eps,
                                 const Profile& profile) {
  const ProfileValue pv = profile.eval(X);
  return I - eps * px_hat * pv.d * pv.d1 * f / (kPi * kPi);
}

double improved_action_wg(double I, double phi, double px_hat, double X, double eps,
                          const Profile& profile) {
  return improved_action_wg_from_f(I, wg_phase_f(phi), px_hat, X, eps, profile);
}

std::pair<GuideWall, RayState> trace_segment(const RayState& s, const RayContext& ctx) {
  const Profile& prof = *ctx.profile;
  if (std::abs(s.py) < ctx.grazing_tol)
    fail(Errc::simulation, "grazing ray: |py|=" + format_double(std::abs(s.py)) +
                               " below the adiabatic tolerance " + format_double(ctx.grazing_tol));

  if (s.py < 0.0) {
    // With |py| above the wall-slope bound the gap to the top wall grows, so
    // the bottom is hit first, in closed form.
    const double sigma = -s.y / s.py;
    RayState hit = s;
    hit.x = s.x + s.px * sigma;
    hit.y = 0.0;
    hit.s = s.s + sigma;
    return {GuideWall::bottom, hit};
  }

  // Top wall: h(sigma) = y + py*sigma - d(eps(x + px*sigma)) starts negative
  // and has h' >= py - eps|d'||px| > 0. March in steps of d_min/2, then
  // bracket the sign change.
  auto h = [&](double sigma) {
    return s.y + s.py * sigma - prof.eval(ctx.eps * (s.x + s.px * sigma)).d;
  };
  auto dh = [&](double sigma) {
    return s.py + ctx.eps * s.px * (-prof.eval(ctx.eps * (s.x + s.px * sigma)).d1);
  };

  const double d0 = prof.eval(ctx.eps * s.x).d;
  const double denom = s.py - ctx.eps * ctx.sup_d1;
  if (!(denom > 0.0)) fail(Errc::simulation, "grazing ray cannot bracket the top wall");
  const double sigma_max = 2.0 * std::max(d0 - s.y, 0.0) / denom + ctx.d_min;

  const double step = 0.5 * ctx.d_min;
  double lo = 0.0;
  double hlo = h(0.0);
  if (hlo >= 0.0) {
    // Already on (or numerically past) the wall; treat as an immediate hit.
    RayState hit = s;
    hit.y = prof.eval(ctx.eps * s.x).d;
    return {GuideWall::top, hit};
  }
  double hi = 0.0;
  bool bracketed = false;
  while (hi < sigma_max) {
    hi = std::min(hi + step, sigma_max);
    if (h(hi) >= 0.0) {
      bracketed = true;
      break;
    }
    lo = hi;
  }
  if (!bracketed) fail(Errc::simulation, "top-wall crossing not found within its analytic bound");

  RootProblem rp;
  rp.lo = lo;
  rp.hi = hi;
  rp.atol = ctx.root_atol;
  rp.f = h;
  rp.df = dh;
  const double sigma = find_root(rp);

  RayState hit = s;
  hit.x = s.x + s.px * sigma;
  hit.y = prof.eval(ctx.eps * hit.x).d; // snap onto the wall
  hit.s = s.s + sigma;
  return {GuideWall::top, hit};
}

RayState reflect(GuideWall wall, const RayState& s, const RayContext& ctx) {
  RayState out = s;
  if (wall == GuideWall::bottom) {
    out.py = -s.py;
  } else {
    const double slope = ctx.eps * ctx.profile->eval(ctx.eps * s.x).d1;
    const double n2 = 1.0 + slope * slope;
    // Reflection about the tangent direction (1, slope).
    const double dot_n = (-slope * s.px + s.py) / n2; // (p . n) / |n|^2
    out.px = s.px + 2.0 * dot_n * slope;
    out.py = s.py - 2.0 * dot_n;
    const double norm = std::sqrt(out.px * out.px + out.py * out.py);
    if (std::abs(norm - 1.0) > 1e-15) {
      out.px /= norm;
      out.py /= norm;
    }
  }
  if (std::abs(out.py) < ctx.grazing_tol)
    fail(Errc::simulation, "reflection left the ray grazing (|py|=" +
                               format_double(std::abs(out.py)) + ")");
  return out;
}

double action_jump_top(double I, double px, double d, double dprime, double eps) {
  const double ed = eps * dprime;
  return I - (2.0 * ed / (1.0 + ed * ed)) * (ed * I + d * px / kPi);
}

double action_update_hamiltonian_matching(double I, double p_hat, double d, double dprime,
                                          double eps) {
  // pi^2 I1^2/d^2 (1+e^2d'^2) + 2 pi eps p_hat d'/d I1 =
  // pi^2 I^2/d^2 (1+e^2d'^2) - 2 pi eps p_hat d'/d I, positive root.
  const double ed = eps * dprime;
  const double a = kPi * kPi * (1.0 + ed * ed) / (d * d);
  const double b = 2.0 * kPi * eps * p_hat * dprime / d;
  const double rhs = a * I * I - b * I;
  return (-b + std::sqrt(b * b + 4.0 * a * rhs)) / (2.0 * a);
}

void simulate_ray(RayState state, const RayContext& ctx, double s_end, long grid_points,
                  const RaySink& sink) {
  const Profile& prof = *ctx.profile;
  if (!(s_end > state.s)) fail(Errc::invalid_argument, "s_end must exceed the initial parameter");

  // Normalize |p| = 1 exactly once at launch.
  const double norm = std::sqrt(state.px * state.px + state.py * state.py);
  if (!(norm > 0.0)) fail(Errc::invalid_argument, "zero launch direction");
  state.px /= norm;
  state.py /= norm;

  const double I0 = to_ray_action_angle(state, prof).I;
  auto make_sample = [&](const RayState& s) {
    const RayActionAngle aa = to_ray_action_angle(s, prof);
    const double d = prof.eval(s.eps * s.x).d;
    const double res = kPi * kPi * I0 * I0 / (d * d) + s.px * s.px - 1.0;
    return RaySample{s.s, s.x, s.y, s.px, s.py, aa.I, aa.I_tilde, res};
  };
  auto emit_sample = [&](const RayState& s) {
    if (sink.on_sample) sink.on_sample(make_sample(s));
  };

  const double s0 = state.s;
  emit_sample(state);
  const double grid_ds = grid_points > 0 ? (s_end - s0) / static_cast<double>(grid_points) : 0.0;
  long next_grid = 1;

  while (true) {
    auto [wall, hit] = trace_segment(state, ctx);

    if (sink.on_sample && grid_ds > 0.0) {
      while (next_grid <= grid_points &&
             s0 + grid_ds * static_cast<double>(next_grid) < std::min(hit.s, s_end)) {
        const double sg = s0 + grid_ds * static_cast<double>(next_grid);
        RayState mid = state;
        const double adv = sg - state.s;
        mid.x = state.x + state.px * adv;
        mid.y = state.y + state.py * adv;
        mid.s = sg;
        emit_sample(mid);
        ++next_grid;
      }
    }

    if (hit.s > s_end) {
      RayState fin = state;
      const double adv = s_end - state.s;
      fin.x = state.x + state.px * adv;
      fin.y = state.y + state.py * adv;
      fin.s = s_end;
      emit_sample(fin);
      return;
    }

    const RayState post = reflect(wall, hit, ctx);

    RayEvent ev;
    ev.s = hit.s;
    ev.wall = wall;
    ev.pre = hit;
    ev.post = post;
    const RayActionAngle aa_pre = to_ray_action_angle(hit, prof);
    const RayActionAngle aa_post = to_ray_action_angle(post, prof);
    ev.dI = aa_post.I - aa_pre.I;
    ev.dI_tilde = aa_post.I_tilde - aa_pre.I_tilde;

    if (sink.on_event && !sink.on_event(ev)) return;
    emit_sample(post);
    state = post;
  }
}

RayRun run_ray(const RayState& initial, const Profile& profile, double s_end, long grid_points) {
  const double span = (s_end - initial.s) + 1.0;
  const double X0 = initial.eps * initial.x;
  const RayContext ctx =
      make_ray_context(profile, initial.eps, X0 - initial.eps * span, X0 + initial.eps * span);
  RayRun run;
  RaySink sink;
  sink.on_event = [&](const RayEvent& e) {
    run.events.push_back(e);
    return true;
  };
  sink.on_sample = [&](const RaySample& s) { run.samples.push_back(s); };
  simulate_ray(initial, ctx, s_end, grid_points, sink);
  return run;
}

namespace {

// Local minima of d on [X_lo, X_hi] (constrictions), i.e. local maxima of
// pi^2 J^2 / d^2, located by a dense grid plus golden-section refinement.
std::vector<GuideHump> find_humps(double J, const Profile& profile, double X_lo, double X_hi) {
  const long n = 10000;
  const double span = X_hi - X_lo;
  std::vector<GuideHump> humps;
  if (!(span > 0.0)) return humps;

  auto dval = [&](double X) { return profile.eval(X).d; };

  double prev2 = dval(X_lo), prev1 = dval(X_lo + span / n);
  for (long i = 2; i <= n; ++i) {
    const double X = X_lo + span * static_cast<double>(i) / static_cast<double>(n);
    const double cur = dval(X);
    if (prev1 <= prev2 && prev1 <= cur && (prev1 < prev2 || prev1 < cur)) {
      // Golden-section refinement of the local minimum of d.
      double a = X_lo + span * static_cast<double>(i - 2) / static_cast<double>(n);
      double b = X;
      const double gr = (std::sqrt(5.0) - 1.0) / 2.0;
      double c = b - gr * (b - a), dd = a + gr * (b - a);
      double fc = dval(c), fd = dval(dd);
      for (int it = 0; it < 120 && (b - a) > 1e-13 * std::max(1.0, std::abs(a)); ++it) {
        if (fc < fd) {
          b = dd;
          dd = c;
          fd = fc;
          c = b - gr * (b - a);
          fc = dval(c);
        } else {
          a = c;
          c = dd;
          fc = fd;
          dd = a + gr * (b - a);
          fd = dval(dd);
        }
      }
      const double Xm = 0.5 * (a + b);
      const double dm = dval(Xm);
      humps.push_back({Xm, kPi * kPi * J * J / (dm * dm)});
    }
    prev2 = prev1;
    prev1 = cur;
  }
  return humps;
}

} // namespace

ClassifyResult classify_regime(double J, double F, double X_launch, const Profile& profile,
                               double X_lo, double X_hi, double separatrix_tol) {
  if (!(J > 0.0)) fail(Errc::invalid_argument, "classification needs J > 0");

  ClassifyResult res;
  res.F = F;
  res.J = J;

  bool left = false, right = false;
  for (const GuideHump& h : find_humps(J, profile, X_lo, X_hi)) {
    if (std::abs(h.height - F) <= separatrix_tol)
      fail(Errc::domain, "separatrix-level F: hump at X=" + format_double(h.X) +
                             " has height within " + format_double(separatrix_tol) +
                             " of F; unclassified");
    if (h.height > F) {
      res.humps.push_back(h);
      if (h.X < X_launch) left = true;
      if (h.X > X_launch) right = true;
    }
  }

  if (left && right)
    res.regime = GuideRegime::resonator;
  else if (left || right)
    res.regime = GuideRegime::single_reflection;
  else
    res.regime = GuideRegime::passing;
  return res;
}

EffectiveRay effective_ray_at(double J, double x, double psi, double eps, const Profile& profile,
                              double p_sign) {
  EffectiveRay r;
  r.J = J;
  r.X = eps * x;
  r.p = effective_level_momentum(J, r.X, profile, p_sign);
  r.psi = psi;
  const double d = profile.eval(r.X).d;
  r.omega = kPi * kPi * J / (d * d);
  return r;
}

double effective_level_momentum(double J, double X, const Profile& profile, double sign) {
  const double d = profile.eval(X).d;
  const double arg = 1.0 - kPi * kPi * J * J / (d * d);
  if (!(arg > 0.0))
    fail(Errc::domain, "level-set momentum undefined: ray cannot pass X=" + format_double(X));
  return (sign < 0.0 ? -1.0 : 1.0) * std::sqrt(arg);
}

double effective_phase_advance(double J, double x0, double x1, double eps, const Profile& profile,
                               double p_sign) {
  // d(psi)/dx = pi^2 J / (d^2(X) p(X)); integrate in X = eps*x with 7-point
  // Gauss-Legendre panels.
  static const double gl_x[7] = {-0.9491079123427585, -0.7415311855993945, -0.4058451513773972,
                                 0.0,                 0.4058451513773972,  0.7415311855993945,
                                 0.9491079123427585};
  static const double gl_w[7] = {0.1294849661688697, 0.2797053914892766, 0.3818300505051189,
                                 0.4179591836734694, 0.3818300505051189, 0.2797053914892766,
                                 0.1294849661688697};

  const double Xa = eps * x0;
  const double Xb = eps * x1;
  const double span = Xb - Xa;
  if (span == 0.0) return 0.0;

  const long panels = std::max<long>(1, static_cast<long>(std::ceil(std::abs(span) / 0.05)));
  double acc = 0.0;
  for (long p = 0; p < panels; ++p) {
    const double a = Xa + span * static_cast<double>(p) / static_cast<double>(panels);
    const double b = Xa + span * static_cast<double>(p + 1) / static_cast<double>(panels);
    const double hm = 0.5 * (b - a), cm = 0.5 * (a + b);
    for (int k = 0; k < 7; ++k) {
      const double X = cm + hm * gl_x[k];
      const double d = profile.eval(X).d;
      const double pmom = effective_level_momentum(J, X, profile, p_sign);
      acc += gl_w[k] * hm * kPi * kPi * J / (d * d * pmom);
    }
  }
  return acc / eps;
}

} // namespace adiasim
