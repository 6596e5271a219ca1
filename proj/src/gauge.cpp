#include "wm/gauge.hpp"

#include <cmath>
#include <numbers>

namespace wm {

namespace {
constexpr double kFourPi = 4.0 * std::numbers::pi;
constexpr double kTwoPi = 2.0 * std::numbers::pi;

std::vector<double> referenceAreas(const TriangulatedSphere& mesh) {
  auto ff = face_frames(mesh.vertices, mesh.faces, false);
  return dual_vertex_areas(mesh.vertices, mesh.faces, ff);
}

void checkSizes(const Immersion& im, const GaugeState& g) {
  const std::size_t n = im.positions.size();
  if (g.alpha.size() != n || g.g0_area.size() != n || g.g0_density.size() != n)
    throw GaugeError("gauge state does not match the immersion's vertex count");
}

}  // namespace

double onofri_tolerance(int level) { return 5e-3 * std::ldexp(1.0, 4 - level); }

std::vector<double> gauge_areas(const TriangulatedSphere& mesh, const MobiusS2& m) {
  TriangulatedSphere mapped = apply_mobius_s2(mesh, m);
  std::vector<FaceFrame> ff;
  try {
    ff = face_frames(mapped.vertices, mapped.faces, true);
  } catch (const GeometryError& e) {
    throw GaugeError(std::string("degenerate g0 cell after Mobius map: ") + e.what());
  }
  auto a = dual_vertex_areas(mapped.vertices, mapped.faces, ff);
  double s = 0.0;
  for (double v : a) s += v;
  for (double& v : a) v /= s;
  return a;
}

GaugeState conformal_factor(const Immersion& im, const MobiusS2& m) {
  const auto& mesh = *im.mesh;
  GaugeState g;
  g.mobius = m;
  g.g0_area = gauge_areas(mesh, m);
  auto ref = referenceAreas(mesh);
  auto ff = face_frames(im.positions, mesh.faces, true);
  auto A = dual_vertex_areas(im.positions, mesh.faces, ff);
  const int n = im.vertexCount();
  g.alpha.resize(n);
  g.g0_density.resize(n);
  for (int v = 0; v < n; ++v) {
    g.alpha[v] = 0.5 * std::log(A[v] / g.g0_area[v]);
    g.g0_density[v] = g.g0_area[v] / ref[v];
  }
  return g;
}

BalanceResult balance_measure(const std::vector<Vec3>& points, const std::vector<double>& weights,
                              const BalanceOptions& opt) {
  if (points.size() != weights.size() || points.empty()) throw ParameterError("balance: size mismatch");
  double wsum = 0.0;
  for (double w : weights) {
    if (!(w >= 0)) throw ParameterError("balance: negative weight");
    wsum += w;
  }
  BalanceResult res;
  Vec3 a = Vec3::Zero();
  double last = 0.0;
  for (int it = 0; it <= opt.max_iter; ++it) {
    Vec3 b = Vec3::Zero();
    for (std::size_t v = 0; v < points.size(); ++v) b += weights[v] * ball_translation(a, points[v]);
    b /= wsum;
    last = b.norm();
    if (last < opt.tol) {
      res.mobius.a = a;
      res.iterations = it;
      res.barycenter = last;
      return res;
    }
    if (it == opt.max_iter) break;
    // compose with the ball translation moving the damped barycentre to 0
    Vec3 next = ball_translation(-a, opt.damping * b);
    if (!(next.norm() < 1.0 - 1e-9))
      throw ConvergenceError("Aubin balance left the unit ball (measure concentrated at a point); |b| = " +
                                 std::to_string(last),
                             last);
    a = next;
  }
  throw ConvergenceError("Aubin balance did not converge in " + std::to_string(opt.max_iter) +
                             " iterations; |b| = " + std::to_string(last),
                         last);
}

GaugeState aubin_balance(const Immersion& im, const BalanceOptions& opt) {
  auto ff = face_frames(im.positions, im.mesh->faces, true);
  auto A = dual_vertex_areas(im.positions, im.mesh->faces, ff);
  auto res = balance_measure(im.mesh->vertices, A, opt);
  return conformal_factor(im, res.mobius);
}

double conformal_barycenter(const Immersion& im, const MobiusS2& m) {
  auto ff = face_frames(im.positions, im.mesh->faces, true);
  auto A = dual_vertex_areas(im.positions, im.mesh->faces, ff);
  Vec3 b = Vec3::Zero();
  double s = 0.0;
  for (int v = 0; v < im.vertexCount(); ++v) {
    b += A[v] * m(im.mesh->vertices[v]);
    s += A[v];
  }
  return b.norm() / s;
}

bool is_balanced(const Immersion& im, const GaugeState& g, double tol) {
  return conformal_barycenter(im, g.mobius) < tol;
}

OnofriReport onofri_energy(const Immersion& im, const GaugeState& g) {
  checkSizes(im, g);
  const auto& faces = im.mesh->faces;
  auto ff = face_frames(im.positions, faces, true);
  double area = 0.0;
  for (const auto& f : ff) area += f.area;
  OnofriReport r;
  double mass = 0.0;
  for (std::size_t v = 0; v < g.alpha.size(); ++v) {
    r.linear += kFourPi * g.alpha[v] * g.g0_area[v];
    mass += std::exp(2.0 * g.alpha[v]) * g.g0_area[v];
  }
  if (std::abs(mass - area) > 1e-2 * area)
    throw GaugeError("gauge inconsistent with immersion: integral of e^{2 alpha} is " + std::to_string(mass) +
                     ", area is " + std::to_string(area));
  for (std::size_t f = 0; f < faces.size(); ++f)
    for (int k = 0; k < 3; ++k) {
      double d = g.alpha[faces[f][(k + 1) % 3]] - g.alpha[faces[f][(k + 2) % 3]];
      r.dirichlet += 0.25 * ff[f].cot[k] * d * d;
    }
  r.log_area = kTwoPi * std::log(mass);
  r.onofri_value = r.dirichlet + r.linear - r.log_area;
  return r;
}

double ghoussoub_lin_check(const Immersion& im, const GaugeState& g) {
  if (!is_balanced(im, g))
    throw PreconditionError("Ghoussoub-Lin functional requires an Aubin gauge (conformal barycentre at 0)");
  auto r = onofri_energy(im, g);
  return r.onofri_value - r.dirichlet / 3.0;
}

LiouvilleResidual liouville_residual(const Immersion& im, const GaugeState& g) {
  checkSizes(im, g);
  const auto& faces = im.mesh->faces;
  const int n = im.vertexCount();
  auto ff = face_frames(im.positions, faces, true);
  auto A = dual_vertex_areas(im.positions, faces, ff);
  auto defect = angle_defects(im.positions, faces);
  auto mapped = apply_mobius_s2(*im.mesh, g.mobius);
  auto defect0 = angle_defects(mapped.vertices, faces);
  std::vector<double> la(n, 0.0);
  for (std::size_t f = 0; f < faces.size(); ++f)
    for (int k = 0; k < 3; ++k) {
      int i = faces[f][(k + 1) % 3], j = faces[f][(k + 2) % 3];
      double d = 0.5 * ff[f].cot[k] * (g.alpha[i] - g.alpha[j]);
      la[i] += d;
      la[j] -= d;
    }
  LiouvilleResidual r;
  r.residual.resize(n);
  for (int v = 0; v < n; ++v) {
    // -Lap(alpha) - K + e^{-2 alpha} K_g0, with K_g0 = defect0 / g0_area
    double kg0 = defect0[v] / g.g0_area[v];
    r.residual[v] = la[v] / A[v] - defect[v] / A[v] + std::exp(-2.0 * g.alpha[v]) * kg0;
    r.l1 += std::abs(r.residual[v]) * A[v];
  }
  return r;
}

std::vector<double> conformal_distortion(const Immersion& im) {
  const auto& faces = im.mesh->faces;
  const auto& p = im.mesh->vertices;
  const auto& x = im.positions;
  std::vector<double> out(faces.size());
  auto local = [](const Vec3& a, const Vec3& b, const Vec3& c) {
    Vec3 e1 = b - a, e2 = c - a;
    Vec3 u1 = e1.normalized();
    Vec3 u2 = (e2 - e2.dot(u1) * u1).normalized();
    Mat2 m;
    m << e1.dot(u1), e2.dot(u1), e1.dot(u2), e2.dot(u2);
    return m;
  };
  for (std::size_t f = 0; f < faces.size(); ++f) {
    const Face& t = faces[f];
    Mat2 r = local(p[t[0]], p[t[1]], p[t[2]]);
    Mat2 s = local(x[t[0]], x[t[1]], x[t[2]]);
    Mat2 j = s * r.inverse();
    Eigen::JacobiSVD<Mat2> svd(j);
    auto sv = svd.singularValues();
    out[f] = sv(0) / sv(1);
  }
  return out;
}

}  // namespace wm
