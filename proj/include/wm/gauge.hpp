#pragma once

#include <vector>

#include "wm/mesh.hpp"

namespace wm {

struct GaugeState {
  std::vector<double> alpha;
  MobiusS2 mobius;
  std::vector<double> g0_density;  // relative to the reference vertex area
  std::vector<double> g0_area;     // normalized, sums to 1
};

struct OnofriReport {
  double dirichlet = 0.0;
  double linear = 0.0;
  double log_area = 0.0;
  double onofri_value = 0.0;
};

struct BalanceOptions {
  double damping = 0.5;
  int max_iter = 200;
  // Stop when |sum_v w_v m(p_v)| < tol * sum_v w_v. Tighter than the 1e-6
  // postcondition so that recovered Mobius parameters are accurate to ~1e-9.
  double tol = 1e-10;
};

struct BalanceResult {
  MobiusS2 mobius;
  int iterations = 0;
  double barycenter = 0.0;  // relative to the total weight
};

// Normalized areas of the reference mesh after the Mobius map (sum to 1).
std::vector<double> gauge_areas(const TriangulatedSphere& mesh, const MobiusS2& m);

GaugeState conformal_factor(const Immersion& im, const MobiusS2& m);

// Conformal barycentre balance of a weighted point set on S^2.
BalanceResult balance_measure(const std::vector<Vec3>& points, const std::vector<double>& weights,
                              const BalanceOptions& opt = {});
GaugeState aubin_balance(const Immersion& im, const BalanceOptions& opt = {});
// |sum_v A_v m(p_v)| / A
double conformal_barycenter(const Immersion& im, const MobiusS2& m);
bool is_balanced(const Immersion& im, const GaugeState& g, double tol = 1e-6);

OnofriReport onofri_energy(const Immersion& im, const GaugeState& g);
double ghoussoub_lin_check(const Immersion& im, const GaugeState& g);

struct LiouvilleResidual {
  std::vector<double> residual;
  double l1 = 0.0;
};
LiouvilleResidual liouville_residual(const Immersion& im, const GaugeState& g);

// Ratio of singular values of the affine map reference face -> immersed face.
std::vector<double> conformal_distortion(const Immersion& im);

// 5e-3 at level 4, halved per level
double onofri_tolerance(int level);

}  // namespace wm
