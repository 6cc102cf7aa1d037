#include "harness.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <numbers>
#include <thread>

#include "error.hpp"
#include "format.hpp"

namespace adiasim {

namespace {
constexpr double kPi = std::numbers::pi;
constexpr double kExactFloor = 1e-12; // deviations below this count as exact

double supremum(double a, double b) { return a > b ? a : b; }

// --- Fermi-Ulam ------------------------------------------------------------

MetricValues fermi_metrics(const ScenarioConfig& cfg, double eps) {
  const Profile prof = Profile::parse(cfg.profile_source);
  const FermiState init = make_fermi_state(cfg, eps);
  const double t_end = init.t + cfg.horizon / eps;
  const FermiContext ctx = make_fermi_context(prof, init, t_end);

  const FermiActionAngle aa0 = to_action_angle(init, prof);
  const double I0 = aa0.I, Ih0 = aa0.I_hat;

  MetricValues mv;
  auto consider = [&](double t, double I, double Ih, double E) {
    mv.raw_action_dev = supremum(mv.raw_action_dev, std::abs(I - I0));
    mv.improved_action_dev = supremum(mv.improved_action_dev, std::abs(Ih - Ih0));
    const double d = prof.eval(eps * t).d;
    const double E_ad = kPi * kPi * I0 * I0 / (2.0 * d * d);
    mv.effective_tracking_dev = supremum(mv.effective_tracking_dev, std::abs(E - E_ad));
  };

  FermiSink sink;
  sink.on_sample = [&](const FermiSample& s) { consider(s.t, s.I, s.I_hat, s.E); };
  sink.on_event = [&](const FermiEvent& ev) {
    ++mv.events;
    const FermiActionAngle pre = to_action_angle(ev.pre, prof);
    consider(ev.t, pre.I, pre.I_hat, pre.E);
    return true;
  };
  simulate_fermi(init, ctx, t_end, cfg.sample_points, sink);
  return mv;
}

// --- Waveguide ---------------------------------------------------------------

RayContext ray_context_for(const Profile& prof, double eps, double s_end, const RayState& init) {
  const double span = eps * (s_end - init.s) + 1e-9;
  const double X0 = eps * init.x;
  RayContext ctx = make_ray_context(prof, eps, X0 - span, X0 + span);
  const double d0 = prof.eval(X0).d;
  if (!(init.y >= 0.0 && init.y <= d0))
    fail(Errc::config, "launch point outside the guide (y=" + format_double(init.y) + ", d=" +
                           format_double(d0) + ")");
  return ctx;
}

MetricValues waveguide_metrics(const ScenarioConfig& cfg, double eps) {
  const Profile prof = Profile::parse(cfg.profile_source);
  const RayState init = make_ray_state(cfg, eps);
  const double s_end = cfg.horizon / eps;
  const RayContext ctx = ray_context_for(prof, eps, s_end, init);

  const RayActionAngle aa0 = to_ray_action_angle(init, prof);
  const double I0 = aa0.I, It0 = aa0.I_tilde;

  const bool want_phase =
      std::find(cfg.metrics.begin(), cfg.metrics.end(), Metric::phase_dev) != cfg.metrics.end();

  MetricValues mv;
  auto residual = [&](const RayState& s) {
    const double d = prof.eval(eps * s.x).d;
    return kPi * kPi * I0 * I0 / (d * d) + s.px * s.px - 1.0;
  };
  auto consider = [&](const RayState& s, double I, double It) {
    mv.raw_action_dev = supremum(mv.raw_action_dev, std::abs(I - I0));
    mv.improved_action_dev = supremum(mv.improved_action_dev, std::abs(It - It0));
    mv.hs_residual = supremum(mv.hs_residual, std::abs(residual(s)));
  };

  // Phase bookkeeping: exact unwrapped phase at top hits (phi = pi there)
  // against the averaged flow, matched at the hit abscissae. J uses the
  // improved initial action so the frequency error stays at O(eps^2).
  long n_bottom = 0;
  double psi = aa0.phi;
  double x_prev = init.x;

  RaySink sink;
  sink.on_sample = [&](const RaySample& s) {
    mv.raw_action_dev = supremum(mv.raw_action_dev, std::abs(s.I - I0));
    mv.improved_action_dev = supremum(mv.improved_action_dev, std::abs(s.I_tilde - It0));
    mv.hs_residual = supremum(mv.hs_residual, std::abs(s.H_residual));
  };
  sink.on_event = [&](const RayEvent& ev) {
    ++mv.events;
    const RayActionAngle pre = to_ray_action_angle(ev.pre, prof);
    const RayActionAngle post = to_ray_action_angle(ev.post, prof);
    consider(ev.pre, pre.I, pre.I_tilde);
    consider(ev.post, post.I, post.I_tilde);
    if (want_phase) {
      if (!(ev.post.px > 0.0))
        fail(Errc::simulation, "phase_dev requires a passing ray (px stayed positive)");
      if (ev.wall == GuideWall::top) {
        psi += effective_phase_advance(It0, x_prev, ev.pre.x, eps, prof, +1.0);
        x_prev = ev.pre.x;
        const double Phi = 2.0 * kPi * static_cast<double>(n_bottom) + kPi;
        mv.phase_dev = supremum(mv.phase_dev, std::abs(Phi - psi));
      } else {
        psi += effective_phase_advance(It0, x_prev, ev.pre.x, eps, prof, +1.0);
        x_prev = ev.pre.x;
        ++n_bottom;
        const double Phi = 2.0 * kPi * static_cast<double>(n_bottom);
        mv.phase_dev = supremum(mv.phase_dev, std::abs(Phi - psi));
      }
    }
    return true;
  };
  simulate_ray(init, ctx, s_end, cfg.sample_points, sink);
  mv.effective_tracking_dev = mv.hs_residual;
  return mv;
}

// --- Piston ------------------------------------------------------------------

struct PistonEffective {
  std::vector<double> X; // indexed by grid point
};

PistonEffective integrate_piston_effective(const PistonSystem& sys0, double t_end,
                                           long sample_points) {
  const PistonActionSet set0 = actions_of(sys0);
  const double L = sys0.L, eps = sys0.eps;
  const double Xstar = piston_equilibrium(set0.I_sum_l, set0.I_sum_r, L);
  const double U2 = 3.0 * kPi * kPi * set0.I_sum_l * set0.I_sum_l / std::pow(Xstar, 4) +
                    3.0 * kPi * kPi * set0.I_sum_r * set0.I_sum_r / std::pow(L - Xstar, 4);
  const double period_slow = 2.0 * kPi / std::sqrt(U2);

  const double grid_dt = t_end / static_cast<double>(sample_points);
  const double h_target = std::min(eps / 10.0, period_slow / 1000.0) / eps;
  const int k = std::max(1, static_cast<int>(std::ceil(grid_dt / h_target)));
  const double h = grid_dt / static_cast<double>(k);

  const auto traj = effective_piston(set0.I_sum_l, set0.I_sum_r, L, eps, sys0.X, sys0.P, t_end, h,
                                     k);
  PistonEffective eff;
  eff.X.reserve(traj.size());
  for (const PhasePoint& p : traj) eff.X.push_back(p.q);
  return eff;
}

MetricValues piston_metrics(const ScenarioConfig& cfg, double eps, unsigned long long seed) {
  const PistonSystem sys0 = make_piston_system(cfg, eps, seed);
  const double t_end = cfg.horizon / eps;

  const PistonActionSet set0 = actions_of(sys0);
  std::vector<double> I0, It0;
  for (const PistonActionEntry& e : set0.particles) {
    I0.push_back(e.I);
    It0.push_back(e.I_tilde);
  }

  const bool want_eff = std::find(cfg.metrics.begin(), cfg.metrics.end(),
                                  Metric::effective_tracking_dev) != cfg.metrics.end();
  PistonEffective eff;
  if (want_eff) eff = integrate_piston_effective(sys0, t_end, cfg.sample_points);

  MetricValues mv;
  const double grid_dt = t_end / static_cast<double>(cfg.sample_points);

  PistonSink sink;
  sink.on_sample = [&](const PistonSample& s) {
    for (size_t i = 0; i < s.I.size(); ++i) {
      mv.raw_action_dev = supremum(mv.raw_action_dev, std::abs(s.I[i] - I0[i]));
      mv.improved_action_dev = supremum(mv.improved_action_dev, std::abs(s.I_tilde[i] - It0[i]));
    }
    if (want_eff) {
      const long j = std::lround(s.t / grid_dt);
      if (j >= 0 && j < static_cast<long>(eff.X.size()) &&
          std::abs(s.t - grid_dt * static_cast<double>(j)) <= 1e-9 * std::max(1.0, s.t)) {
        mv.effective_tracking_dev =
            supremum(mv.effective_tracking_dev, std::abs(s.X - eff.X[static_cast<size_t>(j)]));
      }
    }
  };
  sink.on_event = [&](const CollisionEvent& ev, const PistonSystem& post) {
    ++mv.events;
    // Post-side values come from the next emitted sample. Bystanders do not
    // move at the event instant and the canonical momentum is continuous, so
    // only the colliding particle's pre-collision side is new.
    const size_t i = static_cast<size_t>(ev.index);
    const PistonParticle& q = post.particles[i];
    const double cell = q.side == Side::left ? post.X : post.L - post.X;
    const double I_pre = std::abs(ev.p_pre) * cell / kPi;
    mv.raw_action_dev = supremum(mv.raw_action_dev, std::abs(I_pre - I0[i]));
    const double It_pre = actions_of(post).particles[i].I_tilde - ev.dI_tilde;
    mv.improved_action_dev = supremum(mv.improved_action_dev, std::abs(It_pre - It0[i]));
    return true;
  };
  simulate_piston(sys0, t_end, cfg.sample_points, sink);
  return mv;
}

} // namespace

double MetricValues::get(Metric m) const {
  switch (m) {
    case Metric::raw_action_dev: return raw_action_dev;
    case Metric::improved_action_dev: return improved_action_dev;
    case Metric::effective_tracking_dev: return effective_tracking_dev;
    case Metric::hs_residual: return hs_residual;
    case Metric::phase_dev: return phase_dev;
  }
  fail(Errc::internal, "unknown metric");
}

MetricValues run_metrics(const ScenarioConfig& cfg, double eps, unsigned long long seed) {
  ScenarioConfig local = cfg;
  if (local.metrics.empty()) local.metrics = default_metrics(local.system);
  switch (cfg.system) {
    case SystemKind::fermi_ulam: return fermi_metrics(local, eps);
    case SystemKind::waveguide: return waveguide_metrics(local, eps);
    case SystemKind::piston: return piston_metrics(local, eps, seed);
  }
  fail(Errc::internal, "unknown system");
}

SweepResult run_sweep(const ScenarioConfig& cfg, int jobs, unsigned long long seed) {
  const std::vector<double>& grid = cfg.eps_grid;
  if (grid.size() < 4) fail(Errc::config, "eps_grid needs at least 4 entries");
  for (size_t i = 0; i < grid.size(); ++i) {
    if (!(grid[i] > 0.0 && grid[i] < 0.5))
      fail(Errc::config, "eps_grid entries must lie in (0, 0.5)");
    if (i > 0 && !(grid[i] < grid[i - 1]))
      fail(Errc::config, "eps_grid must be strictly decreasing");
  }

  std::vector<Metric> metrics = cfg.metrics.empty() ? default_metrics(cfg.system) : cfg.metrics;
  ScenarioConfig local = cfg;
  local.metrics = metrics;

  std::vector<MetricValues> values(grid.size());
  std::vector<std::exception_ptr> errors(grid.size());

  auto work = [&](size_t begin, size_t stride) {
    for (size_t i = begin; i < grid.size(); i += stride) {
      try {
        values[i] = run_metrics(local, grid[i], seed);
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };

  if (jobs <= 1) {
    work(0, 1);
  } else {
    const size_t n = std::min<size_t>(static_cast<size_t>(jobs), grid.size());
    std::vector<std::thread> pool;
    for (size_t t = 0; t < n; ++t) pool.emplace_back(work, t, n);
    for (std::thread& th : pool) th.join();
  }

  for (size_t i = 0; i < grid.size(); ++i) {
    if (errors[i]) {
      try {
        std::rethrow_exception(errors[i]);
      } catch (const Error& e) {
        fail(e.code(), "sweep failed at eps=" + format_double(grid[i]) + ": " + e.what());
      } catch (const std::exception& e) {
        fail(Errc::internal, "sweep failed at eps=" + format_double(grid[i]) + ": " + e.what());
      }
    }
  }

  SweepResult result;
  result.all_pass = true;
  for (Metric m : metrics) {
    MetricSeries series;
    series.metric = m;
    series.window = window_for(cfg, m);
    bool all_floor = true;
    for (size_t i = 0; i < grid.size(); ++i) {
      const double v = values[i].get(m);
      series.points.emplace_back(grid[i], v);
      if (v > kExactFloor) all_floor = false;
    }
    if (all_floor) {
      series.exact = true;
      series.pass = true;
    } else {
      series.fit = fit_slope(series.points);
      series.pass = series.fit->slope >= series.window.lo &&
                    series.fit->slope <= series.window.hi &&
                    series.fit->max_residual <= cfg.residual_cap;
    }
    result.all_pass = result.all_pass && series.pass;
    result.metrics.push_back(std::move(series));
  }
  return result;
}

CompareResult compare_effective(const ScenarioConfig& cfg, double eps, unsigned long long seed) {
  CompareResult out;
  switch (cfg.system) {
    case SystemKind::fermi_ulam: {
      const Profile prof = Profile::parse(cfg.profile_source);
      const FermiState init = make_fermi_state(cfg, eps);
      const double t_end = init.t + cfg.horizon / eps;
      const FermiContext ctx = make_fermi_context(prof, init, t_end);
      const double I0 = to_action_angle(init, prof).I;
      FermiSink sink;
      sink.on_sample = [&](const FermiSample& s) {
        const double d = prof.eval(eps * s.t).d;
        const double E_ad = kPi * kPi * I0 * I0 / (2.0 * d * d);
        out.abscissa.push_back(s.t);
        out.exact.push_back(s.E);
        out.reference.push_back(E_ad);
        out.sup_dev = supremum(out.sup_dev, std::abs(s.E - E_ad));
      };
      simulate_fermi(init, ctx, t_end, cfg.sample_points, sink);
      return out;
    }
    case SystemKind::waveguide: {
      const Profile prof = Profile::parse(cfg.profile_source);
      const RayState init = make_ray_state(cfg, eps);
      const double s_end = cfg.horizon / eps;
      const RayContext ctx = ray_context_for(prof, eps, s_end, init);
      const double I0 = to_ray_action_angle(init, prof).I;
      RaySink sink;
      sink.on_sample = [&](const RaySample& s) {
        out.abscissa.push_back(s.x);
        out.exact.push_back(s.px);
        const double sign = s.px < 0.0 ? -1.0 : 1.0;
        double p_ref = 0.0;
        const double d = prof.eval(eps * s.x).d;
        const double arg = 1.0 - kPi * kPi * I0 * I0 / (d * d);
        p_ref = arg > 0.0 ? sign * std::sqrt(arg) : 0.0;
        out.reference.push_back(p_ref);
        out.sup_dev = supremum(out.sup_dev, std::abs(s.H_residual));
      };
      simulate_ray(init, ctx, s_end, cfg.sample_points, sink);
      return out;
    }
    case SystemKind::piston: {
      const PistonSystem sys0 = make_piston_system(cfg, eps, seed);
      const double t_end = cfg.horizon / eps;
      const PistonEffective eff = integrate_piston_effective(sys0, t_end, cfg.sample_points);
      const double grid_dt = t_end / static_cast<double>(cfg.sample_points);
      out.abscissa.resize(eff.X.size(), 0.0);
      out.exact.resize(eff.X.size(), 0.0);
      out.reference = eff.X;
      std::vector<bool> have(eff.X.size(), false);
      PistonSink sink;
      sink.on_sample = [&](const PistonSample& s) {
        const long j = std::lround(s.t / grid_dt);
        if (j >= 0 && j < static_cast<long>(eff.X.size()) &&
            std::abs(s.t - grid_dt * static_cast<double>(j)) <= 1e-9 * std::max(1.0, s.t)) {
          const size_t u = static_cast<size_t>(j);
          out.abscissa[u] = s.t;
          out.exact[u] = s.X;
          have[u] = true;
        }
      };
      simulate_piston(sys0, t_end, cfg.sample_points, sink);
      for (size_t u = 0; u < eff.X.size(); ++u)
        if (have[u]) out.sup_dev = supremum(out.sup_dev, std::abs(out.exact[u] - out.reference[u]));
      return out;
    }
  }
  fail(Errc::internal, "unknown system");
}

namespace {

ProbeEntry probe_one(const ScenarioConfig& cfg, double eps, unsigned long long seed) {
  ProbeEntry entry;
  entry.eps = eps;
  const double floor = 1e-13;

  switch (cfg.system) {
    case SystemKind::fermi_ulam: {
      const Profile prof = Profile::parse(cfg.profile_source);
      const FermiState init = make_fermi_state(cfg, eps);
      const double t_end = init.t + cfg.horizon / eps;
      const FermiContext ctx = make_fermi_context(prof, init, t_end);
      double ref = to_action_angle(init, prof).I_hat;
      FermiState state = init;
      bool found = false;
      while (!found) {
        auto [ev, post] = next_fermi_event(state, ctx);
        if (ev.t > t_end) break;
        const double Ih_post = to_action_angle(ev.post, prof).I_hat;
        if (ev.wall == FermiWall::moving) {
          entry.dI = ev.dI;
          entry.dTilde = Ih_post - ref;
          found = true;
        } else {
          ref = Ih_post;
        }
        state = post;
      }
      if (!found) fail(Errc::simulation, "no qualifying moving-wall impact before the horizon");
      break;
    }
    case SystemKind::waveguide: {
      const Profile prof = Profile::parse(cfg.profile_source);
      const RayState init = make_ray_state(cfg, eps);
      const double s_end = cfg.horizon / eps;
      const RayContext ctx = ray_context_for(prof, eps, s_end, init);
      double ref = to_ray_action_angle(init, prof).I_tilde;
      bool found = false;
      RaySink sink;
      sink.on_event = [&](const RayEvent& ev) {
        const double It_post = to_ray_action_angle(ev.post, prof).I_tilde;
        if (ev.wall == GuideWall::top) {
          entry.dI = ev.dI;
          entry.dTilde = It_post - ref;
          found = true;
          return false;
        }
        ref = It_post;
        return true;
      };
      simulate_ray(init, ctx, s_end, 0, sink);
      if (!found) fail(Errc::simulation, "no qualifying top-wall reflection before the horizon");
      break;
    }
    case SystemKind::piston: {
      const PistonSystem sys0 = make_piston_system(cfg, eps, seed);
      const double t_end = cfg.horizon / eps;
      const PistonActionSet set0 = actions_of(sys0);
      std::vector<double> ref;
      for (const PistonActionEntry& e : set0.particles) ref.push_back(e.I_tilde);
      bool found = false;
      PistonSink sink;
      sink.on_event = [&](const CollisionEvent& ev, const PistonSystem& post) {
        const PistonActionSet set = actions_of(post);
        const size_t i = static_cast<size_t>(ev.index);
        if (ev.kind == CollisionKind::particle_piston) {
          entry.dI = ev.dI;
          entry.dTilde = set.particles[i].I_tilde - ref[i];
          found = true;
          return false;
        }
        ref[i] = set.particles[i].I_tilde;
        return true;
      };
      simulate_piston(sys0, t_end, 0, sink);
      if (!found) fail(Errc::simulation, "no qualifying piston collision before the horizon");
      break;
    }
  }

  if (std::abs(entry.dI) <= floor) {
    entry.degenerate = true;
    entry.ratio = 0.0;
  } else {
    entry.ratio = std::abs(entry.dTilde) / std::abs(entry.dI);
  }
  return entry;
}

} // namespace

ProbeResult jump_cancellation_probe(const ScenarioConfig& cfg, const std::vector<double>& eps_grid,
                                    unsigned long long seed) {
  if (eps_grid.empty()) fail(Errc::config, "probe needs a non-empty eps grid");
  ProbeResult out;
  std::vector<std::pair<double, double>> pts;
  for (double eps : eps_grid) {
    const ProbeEntry e = probe_one(cfg, eps, seed);
    if (!e.degenerate && e.ratio > 0.0) pts.emplace_back(eps, e.ratio);
    out.entries.push_back(e);
  }
  if (pts.size() >= 3) out.fit = fit_slope(pts);
  return out;
}

double period_from_crossings(const std::vector<double>& t, const std::vector<double>& x,
                             double level) {
  if (t.size() != x.size() || t.size() < 3)
    fail(Errc::invalid_argument, "period extraction needs matched series");
  std::vector<double> crossings;
  for (size_t i = 1; i < x.size(); ++i) {
    if (x[i - 1] < level && x[i] >= level) {
      const double w = (level - x[i - 1]) / (x[i] - x[i - 1]);
      crossings.push_back(t[i - 1] + w * (t[i] - t[i - 1]));
    }
  }
  if (crossings.size() < 2)
    fail(Errc::simulation, "fewer than two upward crossings; cannot extract a period");
  return (crossings.back() - crossings.front()) / static_cast<double>(crossings.size() - 1);
}

} // namespace adiasim
