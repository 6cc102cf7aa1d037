#include "scenario.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <random>
#include <set>
#include <sstream>

#include "json.hpp"

#include "error.hpp"
#include "format.hpp"
#include "harness.hpp"

namespace adiasim {

namespace {
constexpr double kPi = std::numbers::pi;
using nlohmann::json;
} // namespace

const char* system_name(SystemKind k) {
  switch (k) {
    case SystemKind::fermi_ulam: return "fermi_ulam";
    case SystemKind::waveguide: return "waveguide";
    case SystemKind::piston: return "piston";
  }
  return "?";
}

const char* metric_name(Metric m) {
  switch (m) {
    case Metric::raw_action_dev: return "raw_action_dev";
    case Metric::improved_action_dev: return "improved_action_dev";
    case Metric::effective_tracking_dev: return "effective_tracking_dev";
    case Metric::hs_residual: return "hs_residual";
    case Metric::phase_dev: return "phase_dev";
  }
  return "?";
}

Metric metric_from_name(const std::string& name) {
  for (Metric m : {Metric::raw_action_dev, Metric::improved_action_dev,
                   Metric::effective_tracking_dev, Metric::hs_residual, Metric::phase_dev})
    if (name == metric_name(m)) return m;
  fail(Errc::config, "unknown metric '" + name + "'");
}

std::vector<Metric> default_metrics(SystemKind k) {
  switch (k) {
    case SystemKind::fermi_ulam:
    case SystemKind::piston:
      return {Metric::raw_action_dev, Metric::improved_action_dev,
              Metric::effective_tracking_dev};
    case SystemKind::waveguide:
      return {Metric::raw_action_dev, Metric::improved_action_dev, Metric::hs_residual};
  }
  return {};
}

SlopeWindow default_window(Metric m, SystemKind k) {
  switch (m) {
    case Metric::raw_action_dev: return {0.8, 1.2};
    case Metric::improved_action_dev: return {1.7, 2.3};
    case Metric::effective_tracking_dev:
      return k == SystemKind::piston ? SlopeWindow{0.7, 1.3} : SlopeWindow{0.8, 1.2};
    case Metric::hs_residual: return {0.8, 1.2};
    case Metric::phase_dev: return {0.8, 1e9};
  }
  return {0.0, 0.0};
}

SlopeWindow window_for(const ScenarioConfig& cfg, Metric m) {
  auto it = cfg.windows.find(m);
  return it != cfg.windows.end() ? it->second : default_window(m, cfg.system);
}

namespace {

void check_keys(const json& j, const std::set<std::string>& allowed, const std::string& where) {
  for (const auto& [key, value] : j.items())
    if (!allowed.count(key))
      fail(Errc::config, "unknown key '" + key + "' in " + where + " (strict mode)");
}

double require_number(const json& j, const char* key, const std::string& where) {
  if (!j.contains(key)) fail(Errc::config, where + " is missing '" + std::string(key) + "'");
  if (!j[key].is_number()) fail(Errc::config, std::string("'") + key + "' must be a number");
  return j[key].get<double>();
}

double number_or(const json& j, const char* key, double fallback) {
  if (!j.contains(key)) return fallback;
  if (!j[key].is_number()) fail(Errc::config, std::string("'") + key + "' must be a number");
  return j[key].get<double>();
}

void require_finite(double v, const char* field) {
  if (!std::isfinite(v)) fail(Errc::config, std::string("'") + field + "' must be finite");
}

ScenarioConfig parse_config(const json& root) {
  if (!root.is_object()) fail(Errc::config, "config root must be a JSON object");
  check_keys(root,
             {"system", "profile", "eps", "horizon", "initial", "sample_points", "sample_stride",
              "eps_grid", "metrics", "windows", "residual_cap"},
             "config");

  ScenarioConfig cfg;
  if (!root.contains("system") || !root["system"].is_string())
    fail(Errc::config, "config is missing 'system'");
  const std::string sys = root["system"].get<std::string>();
  if (sys == "fermi_ulam") cfg.system = SystemKind::fermi_ulam;
  else if (sys == "waveguide") cfg.system = SystemKind::waveguide;
  else if (sys == "piston") cfg.system = SystemKind::piston;
  else fail(Errc::config, "unknown system '" + sys + "'");

  if (root.contains("profile")) {
    if (cfg.system == SystemKind::piston)
      fail(Errc::config, "'profile' does not apply to the piston system");
    if (!root["profile"].is_string()) fail(Errc::config, "'profile' must be a string");
    cfg.profile_source = root["profile"].get<std::string>();
  } else if (cfg.system != SystemKind::piston) {
    fail(Errc::config, "config is missing 'profile'");
  }

  if (root.contains("eps")) {
    cfg.eps = require_number(root, "eps", "config");
    if (!(cfg.eps > 0.0 && cfg.eps < 0.5)) fail(Errc::config, "eps out of range (0, 0.5)");
  }

  cfg.horizon = number_or(root, "horizon", 1.0);
  require_finite(cfg.horizon, "horizon");
  if (!(cfg.horizon > 0.0)) fail(Errc::config, "'horizon' must be positive");

  cfg.sample_points = static_cast<long>(number_or(root, "sample_points", 10000));
  if (cfg.sample_points < 0 || cfg.sample_points > 100000000)
    fail(Errc::config, "'sample_points' out of range");
  cfg.sample_stride = static_cast<long>(number_or(root, "sample_stride", 1));
  if (cfg.sample_stride < 1) fail(Errc::config, "'sample_stride' must be >= 1");
  cfg.residual_cap = number_or(root, "residual_cap", 0.3);
  if (!(cfg.residual_cap > 0.0)) fail(Errc::config, "'residual_cap' must be positive");

  if (root.contains("eps_grid")) {
    if (!root["eps_grid"].is_array()) fail(Errc::config, "'eps_grid' must be an array");
    for (const json& v : root["eps_grid"]) {
      if (!v.is_number()) fail(Errc::config, "'eps_grid' entries must be numbers");
      const double e = v.get<double>();
      if (!(e > 0.0 && e < 0.5)) fail(Errc::config, "'eps_grid' entries must lie in (0, 0.5)");
      cfg.eps_grid.push_back(e);
    }
    for (size_t i = 1; i < cfg.eps_grid.size(); ++i)
      if (!(cfg.eps_grid[i] < cfg.eps_grid[i - 1]))
        fail(Errc::config, "'eps_grid' must be strictly decreasing");
  }

  if (root.contains("metrics")) {
    if (!root["metrics"].is_array()) fail(Errc::config, "'metrics' must be an array");
    for (const json& v : root["metrics"]) {
      if (!v.is_string()) fail(Errc::config, "'metrics' entries must be strings");
      cfg.metrics.push_back(metric_from_name(v.get<std::string>()));
    }
  }

  if (root.contains("windows")) {
    if (!root["windows"].is_object()) fail(Errc::config, "'windows' must be an object");
    for (const auto& [key, value] : root["windows"].items()) {
      const Metric m = metric_from_name(key);
      if (!value.is_array() || value.size() != 2 || !value[0].is_number() ||
          !value[1].is_number())
        fail(Errc::config, "window for '" + key + "' must be [lo, hi]");
      cfg.windows[m] = {value[0].get<double>(), value[1].get<double>()};
    }
  }

  if (!root.contains("initial") || !root["initial"].is_object())
    fail(Errc::config, "config is missing 'initial'");
  const json& init = root["initial"];

  switch (cfg.system) {
    case SystemKind::fermi_ulam: {
      check_keys(init, {"x", "v"}, "initial");
      cfg.fermi.x = require_number(init, "x", "initial");
      cfg.fermi.v = require_number(init, "v", "initial");
      require_finite(cfg.fermi.x, "x");
      require_finite(cfg.fermi.v, "v");
      if (cfg.fermi.x < 0.0) fail(Errc::config, "'x' must be non-negative");
      if (cfg.fermi.v == 0.0) fail(Errc::config, "'v' must be nonzero");
      break;
    }
    case SystemKind::waveguide: {
      check_keys(init, {"x", "y", "px", "py"}, "initial");
      cfg.ray.x = require_number(init, "x", "initial");
      cfg.ray.y = require_number(init, "y", "initial");
      cfg.ray.px = require_number(init, "px", "initial");
      cfg.ray.py = require_number(init, "py", "initial");
      const double n = std::hypot(cfg.ray.px, cfg.ray.py);
      if (!(n > 0.0)) fail(Errc::config, "'px','py' must not both vanish");
      if (std::abs(n - 1.0) > 1e-6)
        fail(Errc::config, "'px','py' must be unit length to 1e-6 (got |p|=" + format_double(n) +
                               ")");
      if (cfg.ray.y < 0.0) fail(Errc::config, "'y' must be non-negative");
      break;
    }
    case SystemKind::piston: {
      check_keys(init, {"L", "X", "P", "P_check", "particles", "random"}, "initial");
      cfg.piston.L = require_number(init, "L", "initial");
      cfg.piston.X = require_number(init, "X", "initial");
      if (!(cfg.piston.L > 0.0)) fail(Errc::config, "'L' must be positive");
      if (!(cfg.piston.X > 0.0 && cfg.piston.X < cfg.piston.L))
        fail(Errc::config, "'X' must lie strictly inside (0, L)");
      if (init.contains("P") && init.contains("P_check"))
        fail(Errc::config, "give either 'P' or 'P_check', not both");
      cfg.piston.P = number_or(init, "P", 0.0);
      if (init.contains("P_check")) {
        cfg.piston.has_p_check = true;
        cfg.piston.p_check = init["P_check"].get<double>();
      }
      if (init.contains("particles")) {
        if (!init["particles"].is_array()) fail(Errc::config, "'particles' must be an array");
        for (const json& pj : init["particles"]) {
          check_keys(pj, {"side", "x", "p"}, "particles[]");
          if (!pj.contains("side") || !pj["side"].is_string())
            fail(Errc::config, "particle is missing 'side'");
          const std::string side = pj["side"].get<std::string>();
          PistonParticle q;
          if (side == "left") q.side = Side::left;
          else if (side == "right") q.side = Side::right;
          else fail(Errc::config, "particle side must be 'left' or 'right'");
          q.x = require_number(pj, "x", "particle");
          q.p = require_number(pj, "p", "particle");
          if (q.p == 0.0) fail(Errc::config, "particle 'p' must be nonzero");
          const bool inside = q.side == Side::left ? (q.x >= 0.0 && q.x <= cfg.piston.X)
                                                   : (q.x >= cfg.piston.X && q.x <= cfg.piston.L);
          if (!inside) fail(Errc::config, "particle 'x' is on the wrong side of the piston");
          cfg.piston.particles.push_back(q);
        }
      }
      if (init.contains("random")) {
        const json& r = init["random"];
        check_keys(r, {"left", "right", "p_min", "p_max"}, "random");
        cfg.piston.random.enabled = true;
        cfg.piston.random.left = static_cast<int>(number_or(r, "left", 0));
        cfg.piston.random.right = static_cast<int>(number_or(r, "right", 0));
        cfg.piston.random.p_min = number_or(r, "p_min", 0.5);
        cfg.piston.random.p_max = number_or(r, "p_max", 1.5);
        if (cfg.piston.random.left < 0 || cfg.piston.random.right < 0)
          fail(Errc::config, "'random' counts must be non-negative");
        if (!(cfg.piston.random.p_min > 0.0 && cfg.piston.random.p_max >= cfg.piston.random.p_min))
          fail(Errc::config, "'random' momentum range is invalid");
      }
      if (cfg.piston.particles.empty() && !cfg.piston.random.enabled)
        fail(Errc::config, "piston 'initial' needs 'particles' and/or 'random'");
      break;
    }
  }
  return cfg;
}

} // namespace

ScenarioConfig load_config_json(const std::string& json_text) {
  json root;
  try {
    root = json::parse(json_text);
  } catch (const json::exception& e) {
    fail(Errc::config, std::string("config parse error: ") + e.what());
  }
  return parse_config(root);
}

ScenarioConfig load_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) fail(Errc::io, "cannot open config file '" + path + "'");
  std::stringstream buf;
  buf << in.rdbuf();
  try {
    return load_config_json(buf.str());
  } catch (const Error& e) {
    fail(e.code(), std::string(e.what()) + " (config '" + path + "')");
  }
}

FermiState make_fermi_state(const ScenarioConfig& cfg, double eps) {
  return {0.0, cfg.fermi.x, cfg.fermi.v, eps};
}

RayState make_ray_state(const ScenarioConfig& cfg, double eps) {
  RayState s{cfg.ray.x, cfg.ray.y, cfg.ray.px, cfg.ray.py, eps, 0.0};
  const double n = std::hypot(s.px, s.py);
  s.px /= n;
  s.py /= n;
  return s;
}

PistonSystem make_piston_system(const ScenarioConfig& cfg, double eps, unsigned long long seed) {
  PistonSystem sys;
  sys.L = cfg.piston.L;
  sys.eps = eps;
  sys.t = 0.0;
  sys.X = cfg.piston.X;
  sys.P = cfg.piston.has_p_check ? cfg.piston.p_check / eps : cfg.piston.P;
  sys.particles = cfg.piston.particles;
  if (cfg.piston.random.enabled) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> mom(cfg.piston.random.p_min, cfg.piston.random.p_max);
    std::uniform_real_distribution<double> unit(0.05, 0.95);
    for (int i = 0; i < cfg.piston.random.left; ++i) {
      const double sign = (rng() & 1) ? 1.0 : -1.0;
      sys.particles.push_back({Side::left, unit(rng) * sys.X, sign * mom(rng)});
    }
    for (int i = 0; i < cfg.piston.random.right; ++i) {
      const double sign = (rng() & 1) ? 1.0 : -1.0;
      sys.particles.push_back({Side::right, sys.X + unit(rng) * (sys.L - sys.X), sign * mom(rng)});
    }
  }
  return sys;
}

// --- Command dispatch and file emission -------------------------------------

namespace {

namespace fs = std::filesystem;

void ensure_dir(const std::string& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) fail(Errc::io, "cannot create output directory '" + dir + "': " + ec.message());
}

std::ofstream open_out(const std::string& path) {
  std::ofstream out(path, std::ios::binary); // LF only, byte-deterministic
  if (!out) fail(Errc::io, "cannot open '" + path + "' for writing");
  return out;
}

void write_text(const std::string& path, const std::string& text) {
  auto out = open_out(path);
  out << text;
  if (!out) fail(Errc::io, "write failed for '" + path + "'");
}

struct CsvRow {
  std::string line;
  CsvRow& add(double v) {
    if (!line.empty()) line += ',';
    line += format_double(v);
    return *this;
  }
  CsvRow& add(const char* v) {
    if (!line.empty()) line += ',';
    line += v;
    return *this;
  }
};

struct SimulateOutcome {
  long events = 0;
  long rows = 0;
  double raw_dev = 0.0;
  double improved_dev = 0.0;
};

SimulateOutcome write_simulation(const ScenarioConfig& cfg, const std::string& out_dir,
                                 unsigned long long seed) {
  SimulateOutcome outcome;
  const double eps = cfg.eps;
  if (!(eps > 0.0)) fail(Errc::config, "this command needs 'eps'");
  const long stride = cfg.sample_stride;

  auto series = open_out(out_dir + "/series.csv");

  switch (cfg.system) {
    case SystemKind::fermi_ulam: {
      const Profile prof = Profile::parse(cfg.profile_source);
      const FermiState init = make_fermi_state(cfg, eps);
      const double t_end = init.t + cfg.horizon / eps;
      const FermiContext ctx = make_fermi_context(prof, init, t_end);
      const FermiActionAngle aa0 = to_action_angle(init, prof);

      series << "t,x,v,I,I_hat,E,phi\n";
      auto events = open_out(out_dir + "/events.csv");
      events << "t,wall,x,v_pre,v_post,dI,dI_hat\n";

      long k = 0;
      FermiSink sink;
      sink.on_sample = [&](const FermiSample& s) {
        if (k++ % stride) return;
        CsvRow row;
        row.add(s.t).add(s.x).add(s.v).add(s.I).add(s.I_hat).add(s.E).add(s.phi);
        series << row.line << '\n';
        ++outcome.rows;
        outcome.raw_dev = std::max(outcome.raw_dev, std::abs(s.I - aa0.I));
        outcome.improved_dev = std::max(outcome.improved_dev, std::abs(s.I_hat - aa0.I_hat));
      };
      sink.on_event = [&](const FermiEvent& ev) {
        ++outcome.events;
        CsvRow row;
        row.add(ev.t).add(ev.wall == FermiWall::fixed ? "fixed" : "moving");
        row.add(ev.pre.x).add(ev.pre.v).add(ev.post.v).add(ev.dI).add(ev.dI_hat);
        events << row.line << '\n';
        return true;
      };
      simulate_fermi(init, ctx, t_end, cfg.sample_points, sink);
      break;
    }
    case SystemKind::waveguide: {
      const Profile prof = Profile::parse(cfg.profile_source);
      const RayState init = make_ray_state(cfg, eps);
      const double s_end = cfg.horizon / eps;
      const double span = eps * s_end + 1e-9;
      const RayContext ctx =
          make_ray_context(prof, eps, eps * init.x - span, eps * init.x + span);
      const RayActionAngle aa0 = to_ray_action_angle(init, prof);

      series << "s,x,y,px,py,I,I_tilde,H_residual\n";
      auto events = open_out(out_dir + "/events.csv");
      events << "s,wall,x,y,px_pre,py_pre,px_post,py_post,dI,dI_tilde\n";

      long k = 0;
      RaySink sink;
      sink.on_sample = [&](const RaySample& s) {
        if (k++ % stride) return;
        CsvRow row;
        row.add(s.s).add(s.x).add(s.y).add(s.px).add(s.py).add(s.I).add(s.I_tilde).add(
            s.H_residual);
        series << row.line << '\n';
        ++outcome.rows;
        outcome.raw_dev = std::max(outcome.raw_dev, std::abs(s.I - aa0.I));
        outcome.improved_dev = std::max(outcome.improved_dev, std::abs(s.I_tilde - aa0.I_tilde));
      };
      sink.on_event = [&](const RayEvent& ev) {
        ++outcome.events;
        CsvRow row;
        row.add(ev.s).add(ev.wall == GuideWall::bottom ? "bottom" : "top");
        row.add(ev.pre.x).add(ev.pre.y).add(ev.pre.px).add(ev.pre.py);
        row.add(ev.post.px).add(ev.post.py).add(ev.dI).add(ev.dI_tilde);
        events << row.line << '\n';
        return true;
      };
      simulate_ray(init, ctx, s_end, cfg.sample_points, sink);
      break;
    }
    case SystemKind::piston: {
      const PistonSystem sys0 = make_piston_system(cfg, eps, seed);
      const double t_end = cfg.horizon / eps;
      const PistonActionSet set0 = actions_of(sys0);

      series << "t,X,eps_P,E";
      for (size_t i = 0; i < sys0.particles.size(); ++i)
        series << ",I_" << (i + 1);
      for (size_t i = 0; i < sys0.particles.size(); ++i)
        series << ",I_tilde_" << (i + 1);
      series << '\n';
      auto events = open_out(out_dir + "/events.jsonl");

      long k = 0;
      PistonSink sink;
      sink.on_sample = [&](const PistonSample& s) {
        if (k++ % stride) return;
        CsvRow row;
        row.add(s.t).add(s.X).add(s.eps_P).add(s.E);
        for (double v : s.I) row.add(v);
        for (double v : s.I_tilde) row.add(v);
        series << row.line << '\n';
        ++outcome.rows;
        for (size_t i = 0; i < s.I.size(); ++i) {
          outcome.raw_dev = std::max(outcome.raw_dev, std::abs(s.I[i] - set0.particles[i].I));
          outcome.improved_dev =
              std::max(outcome.improved_dev, std::abs(s.I_tilde[i] - set0.particles[i].I_tilde));
        }
      };
      sink.on_event = [&](const CollisionEvent& ev, const PistonSystem&) {
        ++outcome.events;
        events << "{\"t\":" << format_double(ev.t) << ",\"kind\":\""
               << (ev.kind == CollisionKind::particle_wall ? "particle_wall" : "particle_piston")
               << "\",\"index\":" << ev.index << ",\"p_pre\":" << format_double(ev.p_pre)
               << ",\"p_post\":" << format_double(ev.p_post)
               << ",\"P_pre\":" << format_double(ev.P_pre)
               << ",\"P_post\":" << format_double(ev.P_post) << ",\"dI\":" << format_double(ev.dI)
               << ",\"dI_tilde\":" << format_double(ev.dI_tilde) << "}\n";
        return true;
      };
      simulate_piston(sys0, t_end, cfg.sample_points, sink);
      break;
    }
  }
  return outcome;
}

json sweep_to_json(const ScenarioConfig& cfg, const SweepResult& res) {
  json doc;
  doc["command"] = "sweep";
  doc["system"] = system_name(cfg.system);
  doc["all_pass"] = res.all_pass;
  json metrics = json::object();
  for (const MetricSeries& s : res.metrics) {
    json m;
    json pts = json::array();
    for (const auto& [e, v] : s.points) pts.push_back({{"eps", e}, {"deviation", v}});
    m["points"] = pts;
    m["exact"] = s.exact;
    m["pass"] = s.pass;
    m["window"] = {s.window.lo, s.window.hi};
    if (s.fit) {
      m["slope"] = s.fit->slope;
      m["intercept"] = s.fit->intercept;
      m["max_residual"] = s.fit->max_residual;
    }
    metrics[metric_name(s.metric)] = m;
  }
  doc["metrics"] = metrics;
  return doc;
}

} // namespace

RunReport run_command(const ScenarioConfig& cfg, const std::string& command,
                      const std::string& out_dir, int jobs, unsigned long long seed) {
  ensure_dir(out_dir);
  json doc;
  std::string summary;

  if (command == "simulate") {
    const SimulateOutcome oc = write_simulation(cfg, out_dir, seed);
    doc["command"] = "simulate";
    doc["system"] = system_name(cfg.system);
    doc["eps"] = cfg.eps;
    doc["horizon"] = cfg.horizon;
    doc["events"] = oc.events;
    doc["series_rows"] = oc.rows;
    doc["max_raw_action_dev"] = oc.raw_dev;
    doc["max_improved_action_dev"] = oc.improved_dev;
    doc["files"] = {"series.csv",
                    cfg.system == SystemKind::piston ? "events.jsonl" : "events.csv"};
    summary = std::string("simulate ") + system_name(cfg.system) + " eps=" +
              format_double(cfg.eps) + " events=" + std::to_string(oc.events) +
              " max|I-I0|=" + format_double(oc.raw_dev) +
              " max|Iimp-Iimp0|=" + format_double(oc.improved_dev);
  } else if (command == "sweep") {
    if (cfg.eps_grid.empty()) fail(Errc::config, "sweep needs 'eps_grid'");
    const SweepResult res = run_sweep(cfg, jobs, seed);
    doc = sweep_to_json(cfg, res);
    // Per-run CSV series alongside the report.
    for (double eps : cfg.eps_grid) {
      ScenarioConfig one = cfg;
      one.eps = eps;
      const std::string dir = out_dir + "/eps_" + format_double(eps);
      ensure_dir(dir);
      write_simulation(one, dir, seed);
    }
    summary = std::string("sweep ") + system_name(cfg.system);
    for (const MetricSeries& s : res.metrics) {
      summary += std::string(" ") + metric_name(s.metric);
      if (s.exact) summary += "=exact";
      else summary += " slope=" + format_double(s.fit->slope);
      summary += s.pass ? " (pass)" : " (FAIL)";
    }
    summary += res.all_pass ? " all_pass=true" : " all_pass=false";
  } else if (command == "compare-effective") {
    if (!(cfg.eps > 0.0)) fail(Errc::config, "compare-effective needs 'eps'");
    const CompareResult res = compare_effective(cfg, cfg.eps, seed);
    auto csv = open_out(out_dir + "/compare.csv");
    csv << (cfg.system == SystemKind::waveguide ? "x,px_exact,px_effective\n"
            : cfg.system == SystemKind::piston  ? "t,X_exact,X_effective\n"
                                                : "t,E_exact,E_adiabatic\n");
    for (size_t i = 0; i < res.abscissa.size(); ++i) {
      CsvRow row;
      row.add(res.abscissa[i]).add(res.exact[i]).add(res.reference[i]);
      csv << row.line << '\n';
    }
    doc["command"] = "compare-effective";
    doc["system"] = system_name(cfg.system);
    doc["eps"] = cfg.eps;
    doc["sup_dev"] = res.sup_dev;
    doc["points"] = res.abscissa.size();
    summary = std::string("compare-effective ") + system_name(cfg.system) + " eps=" +
              format_double(cfg.eps) + " sup_dev=" + format_double(res.sup_dev);
  } else if (command == "classify") {
    if (cfg.system != SystemKind::waveguide)
      fail(Errc::config, "classify applies to the waveguide system only");
    if (!(cfg.eps > 0.0)) fail(Errc::config, "classify needs 'eps'");
    const Profile prof = Profile::parse(cfg.profile_source);
    const RayState init = make_ray_state(cfg, cfg.eps);
    const RayActionAngle aa0 = to_ray_action_angle(init, prof);
    const double X0 = cfg.eps * init.x;
    const double d0 = prof.eval(X0).d;
    const double F = init.px * init.px + kPi * kPi * aa0.I * aa0.I / (d0 * d0);
    const ClassifyResult res =
        classify_regime(aa0.I, F, X0, prof, X0 - cfg.horizon, X0 + cfg.horizon);
    const char* tag = res.regime == GuideRegime::passing            ? "passing"
                      : res.regime == GuideRegime::single_reflection ? "single_reflection"
                                                                     : "resonator";
    doc["command"] = "classify";
    doc["system"] = "waveguide";
    doc["case"] = tag;
    doc["J"] = res.J;
    doc["F"] = res.F;
    json humps = json::array();
    for (const GuideHump& h : res.humps) humps.push_back({{"X", h.X}, {"height", h.height}});
    doc["humps"] = humps;
    summary = std::string("classify waveguide case=") + tag +
              " humps=" + std::to_string(res.humps.size());
  } else {
    fail(Errc::invalid_argument, "unknown command '" + command + "'");
  }

  RunReport rep;
  rep.json = doc.dump(2) + "\n";
  rep.summary = summary;
  write_text(out_dir + "/report.json", rep.json);
  return rep;
}

} // namespace adiasim
