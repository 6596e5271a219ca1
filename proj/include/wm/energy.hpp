#pragma once

#include <optional>
#include <string>
#include <vector>

#include "wm/gauge.hpp"
#include "wm/mesh.hpp"

namespace wm {

struct ViscosityParams {
  double sigma = 0.1;
  double l_sigma = 0.0;
  bool area_constrained = false;
  double lambda_multiplier = 2.0 * 3.14159265358979323846;

  static ViscosityParams make(double sigma, bool area_constrained = false);
  void check() const;
};

struct EnergyBreakdown {
  double willmore = 0.0;
  double smoother = 0.0;
  double onofri = 0.0;
  double total = 0.0;
  double area = 0.0;
  double sigma_derivative = 0.0;
  double sigma = 0.0;
  double l_sigma = 0.0;
  std::optional<double> multiplier;
  std::string mesh_hash;
  std::string gauge_hash;
};

double willmore(const DiscreteGeometry& geo);
double smoother(const DiscreteGeometry& geo);

EnergyBreakdown relaxed_energy(const Immersion& im, const GaugeState& g, const ViscosityParams& p);

struct BoundCheck {
  std::string name;
  double lhs = 0.0;
  double rhs = 0.0;
  bool pass = false;
  bool applicable = true;
  bool alarm = false;  // only the F >= W + sigma^2 S check can raise it
};

struct BoundsReport {
  std::vector<BoundCheck> checks;
  bool all_pass() const;
};

BoundsReport energy_bounds_report(const Immersion& im, const GaugeState& g, const ViscosityParams& p,
                                  double tol_onofri = 5e-3);

std::string hash_immersion(const Immersion& im);
std::string hash_gauge(const GaugeState& g);

}  // namespace wm
