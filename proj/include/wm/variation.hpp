#pragma once

#include <functional>
#include <vector>

#include "wm/energy.hpp"
#include "wm/gauge.hpp"
#include "wm/mesh.hpp"

namespace wm {

struct VariationField {
  std::vector<Vec3> w;
  double norm_phi = 0.0;
};

double norm_phi(const Immersion& im, const std::vector<Vec3>& w);
VariationField make_field(const Immersion& im, std::vector<Vec3> w);

// Central differences of relaxed_energy; h is relative to the mesh diameter.
// The Mobius element of g is frozen, alpha is recomputed per probe.
VariationField grad_fd(const Immersion& im, const GaugeState& g, const ViscosityParams& p, double h = 1e-5);
VariationField grad_analytic(const Immersion& im, const GaugeState& g, const ViscosityParams& p);

// Variants with explicit weights on W, S and O (used for W-only and F = W + O checks).
std::vector<Vec3> energy_gradient(const Immersion& im, const GaugeState& g, double cw, double cs, double co);
std::vector<Vec3> energy_gradient_fd(const Immersion& im, const GaugeState& g, double cw, double cs, double co,
                                     double h);

using ScalarFn = std::function<double(double)>;
double first_variation_fH(const Immersion& im, const ScalarFn& f, const ScalarFn& f_prime,
                          const std::vector<Vec3>& w);
// sum_v f(H_v) A_v, the discrete functional that first_variation_fH approximates
double integral_fH(const Immersion& im, const ScalarFn& f);

struct OnofriVariation {
  double exact = 0.0;
  double structural = 0.0;
};
// literal_alpha_coefficient switches the last structural term to K alpha e^{-2 alpha}
OnofriVariation first_variation_onofri(const Immersion& im, const GaugeState& g, const std::vector<Vec3>& w,
                                       bool literal_alpha_coefficient = false);

struct ConservationReport {
  double dL_closedness = 0.0;
  double scalar_law = 0.0;
  double vector_law = 0.0;
  double codazzi = 0.0;
  double D_curl = 0.0;
  std::vector<Vec3> closedness_field;  // weak curl of dL per vertex
  std::vector<double> codazzi_per_face;
};
ConservationReport conservation_residuals(const Immersion& im, const GaugeState& g, const ViscosityParams& p);

struct ELResidual {
  std::vector<Vec3> residual;
  double norm = 0.0;
};
ELResidual willmore_el_residual(const Immersion& im);

// Loops are closed vertex cycles; the first vertex is not repeated at the end.
Vec3 willmore_residue(const Immersion& im, const std::vector<int>& loop);
enum class FirstResidueMode { NormalProjection, LiteralThreePi };
Vec3 first_residue(const Immersion& im, const std::vector<int>& loop,
                   FirstResidueMode mode = FirstResidueMode::NormalProjection);

// Boundary cycle of the set of faces whose vertices all satisfy inside(p_ref),
// oriented with the region on its left.
std::vector<int> region_boundary_loop(const TriangulatedSphere& mesh, const std::function<bool(const Vec3&)>& inside);

double lagrange_multiplier(const Immersion& im, const GaugeState& g, const ViscosityParams& p);

}  // namespace wm
