#include "wm/kernel.hpp"

#include <cmath>
#include <numbers>

namespace wm {

namespace {

constexpr double kFourPi = 4.0 * std::numbers::pi;
constexpr double kTwoPi = 2.0 * std::numbers::pi;

// Adds s * d(cot of the angle at corner k)/dx to the three corner gradients.
void addCotGradient(const std::array<const Vec3*, 3>& p, int k, double cot, double s, std::array<Vec3, 3>& g) {
  if (s == 0.0) return;
  const int k1 = (k + 1) % 3, k2 = (k + 2) % 3;
  Vec3 e1 = *p[k1] - *p[k];
  Vec3 e2 = *p[k2] - *p[k];
  Vec3 cr = e1.cross(e2);
  double sn = cr.norm();
  Vec3 nh = cr / sn;
  Vec3 d1 = (e2 - cot * e2.cross(nh)) / sn;
  Vec3 d2 = (e1 - cot * nh.cross(e1)) / sn;
  g[k1] += s * d1;
  g[k2] += s * d2;
  g[k] -= s * (d1 + d2);
}

void addAreaGradient(const std::array<const Vec3*, 3>& p, const Vec3& nh, double s, std::array<Vec3, 3>& g) {
  if (s == 0.0) return;
  for (int i = 0; i < 3; ++i) g[i] += 0.5 * s * nh.cross(*p[(i + 2) % 3] - *p[(i + 1) % 3]);
}

}  // namespace

KernelResult evaluate_energy(const std::vector<Vec3>& x, const std::vector<Face>& faces,
                             const std::vector<double>& g0, const EnergyWeights& w, bool want_grad) {
  const int n = static_cast<int>(x.size());
  const bool onofri = w.co != 0.0 || !g0.empty();
  if (onofri && static_cast<int>(g0.size()) != n) throw ParameterError("gauge areas missing for Onofri term");

  auto ff = face_frames(x, faces, true);
  std::vector<double> A = dual_vertex_areas(x, faces, ff);
  std::vector<Vec3> Y(n, Vec3::Zero());
  for (std::size_t f = 0; f < faces.size(); ++f)
    for (int k = 0; k < 3; ++k) {
      int i = faces[f][(k + 1) % 3], j = faces[f][(k + 2) % 3];
      Vec3 d = 0.5 * ff[f].cot[k] * (x[i] - x[j]);
      Y[i] += d;
      Y[j] -= d;
    }

  KernelResult r;
  std::vector<double> q(n);
  for (int v = 0; v < n; ++v) {
    q[v] = Y[v].squaredNorm() / (4.0 * A[v] * A[v]);
    r.willmore += q[v] * A[v];
    r.smoother += (1.0 + q[v]) * (1.0 + q[v]) * A[v];
  }
  // Area as an edge-free face sum; identical to the vertex sum up to roundoff.
  for (const auto& fr : ff) r.area += fr.area;

  std::vector<double> alpha, lalpha;
  double atot = 0.0;
  if (onofri) {
    alpha.resize(n);
    for (int v = 0; v < n; ++v) {
      alpha[v] = 0.5 * std::log(A[v] / g0[v]);
      atot += A[v];
    }
    lalpha.assign(n, 0.0);
    for (std::size_t f = 0; f < faces.size(); ++f)
      for (int k = 0; k < 3; ++k) {
        int i = faces[f][(k + 1) % 3], j = faces[f][(k + 2) % 3];
        double d = alpha[i] - alpha[j];
        double wgt = 0.5 * ff[f].cot[k];
        r.dirichlet += 0.5 * wgt * d * d;
        lalpha[i] += wgt * d;
        lalpha[j] -= wgt * d;
      }
    for (int v = 0; v < n; ++v) r.linear += kFourPi * alpha[v] * g0[v];
    r.log_area = kTwoPi * std::log(atot);
    r.onofri = r.dirichlet + r.linear - r.log_area;
  }
  r.value = w.cw * r.willmore + w.cs * r.smoother + w.co * r.onofri;
  if (!want_grad) return r;

  // adjoints of Y and of the dual vertex areas
  std::vector<Vec3> Ybar(n);
  std::vector<double> Abar(n);
  for (int v = 0; v < n; ++v) {
    const double dpsi = w.cw + w.cs * 2.0 * (1.0 + q[v]);
    const double psi = w.cw * q[v] + w.cs * (1.0 + q[v]) * (1.0 + q[v]);
    Ybar[v] = dpsi * Y[v] / (2.0 * A[v]);
    Abar[v] = psi - 2.0 * q[v] * dpsi;
    if (onofri && w.co != 0.0)
      Abar[v] += w.co * ((lalpha[v] + kFourPi * g0[v]) / (2.0 * A[v]) - kTwoPi / atot);
  }

  r.grad.assign(n, Vec3::Zero());
  for (std::size_t f = 0; f < faces.size(); ++f) {
    const Face& t = faces[f];
    const FaceFrame& fr = ff[f];
    std::array<const Vec3*, 3> p = {&x[t[0]], &x[t[1]], &x[t[2]]};
    std::array<Vec3, 3> g = {Vec3::Zero(), Vec3::Zero(), Vec3::Zero()};
    std::array<double, 3> cbar = {0.0, 0.0, 0.0};

    for (int k = 0; k < 3; ++k) {
      const int a = (k + 1) % 3, b = (k + 2) % 3;
      const int i = t[a], j = t[b];
      const double wgt = 0.5 * fr.cot[k];
      Vec3 dy = Ybar[i] - Ybar[j];
      Vec3 dx = x[i] - x[j];
      g[a] += wgt * dy;
      g[b] -= wgt * dy;
      cbar[k] += 0.5 * dy.dot(dx);
      if (onofri && w.co != 0.0) {
        double d = alpha[i] - alpha[j];
        cbar[k] += w.co * 0.25 * d * d;
      }
    }

    for (int k = 0; k < 3; ++k) {
      const int a = (k + 1) % 3, b = (k + 2) % 3;
      const double s = (Abar[t[a]] + Abar[t[b]]) / 8.0;
      Vec3 e = x[t[a]] - x[t[b]];
      cbar[k] += s * e.squaredNorm();
      g[a] += 2.0 * s * fr.cot[k] * e;
      g[b] -= 2.0 * s * fr.cot[k] * e;
    }
    for (int k = 0; k < 3; ++k) addCotGradient(p, k, fr.cot[k], cbar[k], g);
    for (int k = 0; k < 3; ++k) r.grad[t[k]] += g[k];
  }
  return r;
}

std::vector<Vec3> area_gradient(const std::vector<Vec3>& x, const std::vector<Face>& faces) {
  std::vector<Vec3> grad(x.size(), Vec3::Zero());
  for (const Face& t : faces) {
    std::array<const Vec3*, 3> p = {&x[t[0]], &x[t[1]], &x[t[2]]};
    Vec3 cr = (*p[1] - *p[0]).cross(*p[2] - *p[0]);
    std::array<Vec3, 3> g = {Vec3::Zero(), Vec3::Zero(), Vec3::Zero()};
    addAreaGradient(p, cr.normalized(), 1.0, g);
    for (int k = 0; k < 3; ++k) grad[t[k]] += g[k];
  }
  return grad;
}

}  // namespace wm
