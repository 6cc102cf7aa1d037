#pragma once

#include <map>
#include <string>
#include <vector>

#include "fermi_ulam.hpp"
#include "piston.hpp"
#include "profile.hpp"
#include "waveguide.hpp"

namespace adiasim {

enum class SystemKind { fermi_ulam, waveguide, piston };

enum class Metric {
  raw_action_dev,
  improved_action_dev,
  effective_tracking_dev,
  hs_residual,
  phase_dev,
};

const char* system_name(SystemKind k);
const char* metric_name(Metric m);
Metric metric_from_name(const std::string& name); // throws Errc::config

struct SlopeWindow {
  double lo = 0.0;
  double hi = 0.0;
};

struct FermiInitial {
  double x = 0.0;
  double v = 0.0;
};

struct RayInitial {
  double x = 0.0;
  double y = 0.0;
  double px = 0.0;
  double py = 0.0;
};

struct PistonRandomSpec {
  bool enabled = false;
  int left = 0;
  int right = 0;
  double p_min = 0.5;
  double p_max = 1.5;
};

struct PistonInitial {
  double L = 0.0;
  double X = 0.0;
  double P = 0.0;
  bool has_p_check = false;
  double p_check = 0.0; // eps*P, scale-invariant across a sweep
  std::vector<PistonParticle> particles;
  PistonRandomSpec random;
};

// One scenario: system tag, profile source, eps, initial conditions, horizon
// (in slow time; simulations run to horizon/eps), sampling controls, and the
// optional sweep grid / metric list / slope windows.
struct ScenarioConfig {
  SystemKind system = SystemKind::fermi_ulam;
  std::string profile_source;
  double eps = 0.0;
  double horizon = 1.0;
  long sample_points = 10000;
  long sample_stride = 1;
  std::vector<double> eps_grid;
  std::vector<Metric> metrics;
  std::map<Metric, SlopeWindow> windows;
  double residual_cap = 0.3;

  FermiInitial fermi;
  RayInitial ray;
  PistonInitial piston;
};

// Strict loaders: unknown keys are rejected, every numeric field validated.
ScenarioConfig load_config_file(const std::string& path);
ScenarioConfig load_config_json(const std::string& json_text);

std::vector<Metric> default_metrics(SystemKind k);
SlopeWindow default_window(Metric m, SystemKind k);
SlopeWindow window_for(const ScenarioConfig& cfg, Metric m);

// Initial-state builders (eps passed separately so sweeps can rescale).
FermiState make_fermi_state(const ScenarioConfig& cfg, double eps);
RayState make_ray_state(const ScenarioConfig& cfg, double eps);
PistonSystem make_piston_system(const ScenarioConfig& cfg, double eps, unsigned long long seed);

// Command dispatch: writes CSV/JSON artifacts under out_dir and returns the
// report document plus a one-line summary.
struct RunReport {
  std::string json;    // full report document
  std::string summary; // one-line human summary
};

RunReport run_command(const ScenarioConfig& cfg, const std::string& command,
                      const std::string& out_dir, int jobs, unsigned long long seed);

} // namespace adiasim
