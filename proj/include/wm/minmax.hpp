#pragma once

#include <optional>
#include <string>
#include <vector>

#include "wm/energy.hpp"
#include "wm/gauge.hpp"
#include "wm/mesh.hpp"

namespace wm {

enum class WidthEnergy { Relaxed, WillmoreOnly };
enum class GaugePolicy { Identity, AubinPerStage };

struct PathState {
  MeshPtr mesh;
  std::vector<Immersion> frames;
  std::vector<GaugeState> gauges;
  bool endpoints_pinned = true;
  bool reparametrized = false;
  std::vector<std::optional<EnergyBreakdown>> cache;

  int size() const { return static_cast<int>(frames.size()); }
  void invalidate(int k) { cache[k].reset(); }
};

// Linear vertex interpolation between start and end with M frames in total.
PathState init_path(const Immersion& start, const Immersion& end, int frames);
// Explicit interior frames.
PathState init_path(const Immersion& start, const Immersion& end, const std::vector<Immersion>& interior);

struct PathFiles {
  PathState path;
  double start_volume = 0.0;
  double end_volume = 0.0;
  bool everting = false;  // signed volume of end is minus that of start
};
// Directory with manifest.json {mesh, frames[], pinned}.
PathFiles load_path(const std::string& dir);
void save_path(const std::string& dir, const PathState& path);

struct StepRule {
  double armijo = 1e-4;
  double shrink = 0.5;
  double grow = 2.0;
  int max_failures = 30;
  double initial_fraction = 0.01;  // first step moves the farthest vertex this fraction of the diameter
  double gtol = 1e-10;             // stop when max |grad| * diameter < gtol * (1 + |F|)
};

struct DescentResult {
  Immersion frame;
  std::vector<double> energy_trace;  // value after each accepted step, first entry is the start
  int accepted = 0;
  bool stalled = false;
  bool converged = false;
  double grad_inf = 0.0;
  // grad F = mu * grad A + (projected part); reported only when area constrained
  std::optional<double> projection_coefficient;
};

struct DescentOptions {
  StepRule rule;
  bool area_constrained = false;
  WidthEnergy energy = WidthEnergy::Relaxed;
};

DescentResult descend_frame(const Immersion& im, const GaugeState& g, const ViscosityParams& p, int steps,
                            const DescentOptions& opt = {});
// Identity gauge.
DescentResult descend_frame(const Immersion& im, const ViscosityParams& p, int steps,
                            const DescentOptions& opt = {});

// Value of the width functional of one frame.
EnergyBreakdown frame_energy(const Immersion& im, const GaugeState& g, const ViscosityParams& p, WidthEnergy e);

struct MinmaxConfig {
  std::vector<double> sigma_schedule;
  int inner_steps = 20;
  StepRule step_rule;
  bool area_constrained = false;
  double struwe_tol = 0.5;
  int max_sweeps = 50;
  double stagnation_tol = 1e-6;  // relative width decrease below which a sweep counts as stagnant
  int window = 1;
  bool reparametrize = false;
  WidthEnergy energy = WidthEnergy::Relaxed;
  GaugePolicy gauge = GaugePolicy::Identity;
  double bubble_epsilon = 1.0;
  double bubble_radius = 0.3;

  void check() const;
  // sigma_{k+1} = sigma_k / sqrt(2) from `from` while >= `to`
  static std::vector<double> geometric_schedule(double from = 0.2, double to = 0.01);
};

struct SweepRecord {
  double sigma = 0.0;
  int sweep = 0;
  double width = 0.0;
  std::vector<int> argmax;
};

enum class StopReason { Stagnation, MaxSweeps, PinnedMaximum, NothingToDo };

struct RelaxResult {
  std::vector<SweepRecord> trace;
  StopReason reason = StopReason::MaxSweeps;
};

// Relaxes `path` in place.
RelaxResult minmax_relax(PathState& path, const ViscosityParams& p, const MinmaxConfig& cfg);

struct Bubble {
  int center = -1;
  double radius = 0.0;
  double energy = 0.0;
};

// Greedy geodesic-ball cover of the reference sphere; radius in radians.
std::vector<Bubble> detect_bubbles(const Immersion& im, double epsilon, double radius = 0.3);
// sum over adjacent faces of |dn|^2 area / 3
std::vector<double> bending_density(const Immersion& im);

struct SigmaStage {
  double sigma = 0.0;
  double width = 0.0;
  int argmax = -1;
  double willmore_at_max = 0.0;
  double struwe = 0.0;
  bool accepted = false;
  StopReason reason = StopReason::MaxSweeps;
};

struct MinmaxReport {
  std::vector<SweepRecord> beta_trace;
  std::vector<SigmaStage> stages;
  std::vector<double> accepted_sigmas;
  std::optional<double> beta0;  // W at the argmax of the smallest accepted sigma
  double min_struwe = 0.0;
  std::vector<int> argmax_frames;
  std::vector<double> willmore_at_max;
  std::vector<std::vector<Bubble>> bubble_flags;  // per frame, final path
  std::vector<double> final_energies;
  bool width_monotone_in_sigma = true;
  bool above_lower_bound = true;  // beta0 >= 4 pi - 2%
  bool reparametrized = false;
};

MinmaxReport anneal(PathState& path, const MinmaxConfig& cfg);

// s(sigma) = sigma log(1/sigma) dF/dsigma
double struwe_quantity(const EnergyBreakdown& e);

}  // namespace wm
