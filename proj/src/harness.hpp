#pragma once

#include <optional>
#include <utility>
#include <vector>

#include "numerics.hpp"
#include "scenario.hpp"

namespace adiasim {

// Deviation metrics for one simulation at a fixed eps, each a max over the
// event states (pre and post) plus a uniform sampling grid.
struct MetricValues {
  double raw_action_dev = 0.0;
  double improved_action_dev = 0.0;
  double effective_tracking_dev = 0.0;
  double hs_residual = 0.0;
  double phase_dev = 0.0;
  long events = 0;

  double get(Metric m) const;
};

MetricValues run_metrics(const ScenarioConfig& cfg, double eps, unsigned long long seed = 0);

struct MetricSeries {
  Metric metric = Metric::raw_action_dev;
  std::vector<std::pair<double, double>> points; // (eps, deviation)
  std::optional<SlopeFit> fit;                   // absent when exact
  bool exact = false;                            // all deviations at round-off
  bool pass = false;
  SlopeWindow window;
};

struct SweepResult {
  std::vector<MetricSeries> metrics;
  bool all_pass = false;
};

// Simulates the scenario at every eps in cfg.eps_grid (strictly decreasing,
// at least 4 entries) over horizon/eps, computes the requested metrics and
// fits log-log slopes. Per-eps runs execute concurrently when jobs > 1; the
// result is bit-identical regardless of jobs.
SweepResult run_sweep(const ScenarioConfig& cfg, int jobs = 1, unsigned long long seed = 0);

struct CompareResult {
  double sup_dev = 0.0;
  // Matched series: abscissa (t or x), exact value, reference value.
  std::vector<double> abscissa;
  std::vector<double> exact;
  std::vector<double> reference;
};

// Exact-vs-effective comparison at one eps: piston X(t) against the averaged
// Hamiltonian flow, Fermi-Ulam E(t) against the adiabatic energy law,
// waveguide (px, x) against the averaged level set.
CompareResult compare_effective(const ScenarioConfig& cfg, double eps,
                                unsigned long long seed = 0);

struct ProbeEntry {
  double eps = 0.0;
  double dI = 0.0;       // instantaneous raw-action jump at the probed impact
  double dTilde = 0.0;   // improved-action variation across the event cycle
  double ratio = 0.0;
  bool degenerate = false; // |dI| at the round-off floor
};

struct ProbeResult {
  std::vector<ProbeEntry> entries;
  std::optional<SlopeFit> fit; // on the non-degenerate ratios
};

// Jump-cancellation probe: at the first qualifying moving-boundary impact,
// the improved action's variation since the colliding entity's previous
// event (its jump cancels, leaving only the O(eps^2) drift) is compared with
// the instantaneous raw jump. The ratio decreases linearly in eps.
ProbeResult jump_cancellation_probe(const ScenarioConfig& cfg, const std::vector<double>& eps_grid,
                                    unsigned long long seed = 0);

// Oscillation period from upward crossings of `level` in a sampled series;
// throws when fewer than two crossings exist.
double period_from_crossings(const std::vector<double>& t, const std::vector<double>& x,
                             double level);

} // namespace adiasim
