#pragma once

#include <vector>

#include "wm/mesh.hpp"

namespace wm {

// Weights of the discrete functional
//   E = cw * W + cs * S + co * O
// with W = sum |Hvec|^2 A, S = sum (1 + |Hvec|^2)^2 A and O the Onofri energy of
// alpha = 1/2 log(A / g0). g0 may be empty when co == 0.
struct EnergyWeights {
  double cw = 1.0;
  double cs = 0.0;
  double co = 0.0;
};

struct KernelResult {
  double willmore = 0.0;
  double smoother = 0.0;
  double dirichlet = 0.0;
  double linear = 0.0;
  double log_area = 0.0;
  double onofri = 0.0;
  double area = 0.0;
  double value = 0.0;
  std::vector<Vec3> grad;  // filled when requested
};

KernelResult evaluate_energy(const std::vector<Vec3>& x, const std::vector<Face>& faces,
                             const std::vector<double>& g0, const EnergyWeights& w, bool want_grad);

// Gradient of the total area with respect to positions.
std::vector<Vec3> area_gradient(const std::vector<Vec3>& x, const std::vector<Face>& faces);

}  // namespace wm
