#include "wm/energy.hpp"

#include <cmath>
#include <cstdio>
#include <cstring>
#include <numbers>

#include "wm/kernel.hpp"

namespace wm {

namespace {

struct Fnv {
  std::uint64_t h = 1469598103934665603ull;
  void bytes(const void* p, std::size_t n) {
    const auto* c = static_cast<const unsigned char*>(p);
    for (std::size_t i = 0; i < n; ++i) {
      h ^= c[i];
      h *= 1099511628211ull;
    }
  }
  void dbl(double v) { bytes(&v, sizeof v); }
  std::string hex() const {
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
  }
};

}  // namespace

ViscosityParams ViscosityParams::make(double sigma, bool area_constrained) {
  ViscosityParams p;
  p.sigma = sigma;
  p.area_constrained = area_constrained;
  p.check();
  p.l_sigma = 1.0 / std::log(1.0 / sigma);
  return p;
}

void ViscosityParams::check() const {
  if (!(sigma > 0.0 && sigma < 1.0)) throw ParameterError("sigma must lie in (0, 1)");
}

double willmore(const DiscreteGeometry& geo) {
  double w = 0.0;
  for (std::size_t v = 0; v < geo.vertex_areas.size(); ++v)
    w += geo.mean_curvature_vec[v].squaredNorm() * geo.vertex_areas[v];
  return w;
}

double smoother(const DiscreteGeometry& geo) {
  double s = 0.0;
  for (std::size_t v = 0; v < geo.vertex_areas.size(); ++v) {
    double t = 1.0 + geo.mean_curvature_vec[v].squaredNorm();
    s += t * t * geo.vertex_areas[v];
  }
  return s;
}

EnergyBreakdown relaxed_energy(const Immersion& im, const GaugeState& g, const ViscosityParams& p) {
  p.check();
  if (g.g0_area.size() != im.positions.size()) throw GaugeError("gauge does not match immersion");
  const double l = 1.0 / std::log(1.0 / p.sigma);
  EnergyWeights w{1.0, p.sigma * p.sigma, l};
  KernelResult k = evaluate_energy(im.positions, im.mesh->faces, g.g0_area, w, false);
  EnergyBreakdown e;
  e.willmore = k.willmore;
  e.smoother = k.smoother;
  e.onofri = k.onofri;
  e.area = k.area;
  e.sigma = p.sigma;
  e.l_sigma = l;
  e.total = e.willmore + p.sigma * p.sigma * e.smoother + l * e.onofri;
  e.sigma_derivative = 2.0 * p.sigma * e.smoother + (l * l / p.sigma) * e.onofri;
  if (p.area_constrained) {
    auto geo = induced_geometry(im);
    double quartic = 0.0, lin = 0.0;
    for (std::size_t v = 0; v < geo.vertex_areas.size(); ++v) {
      double h2 = geo.mean_curvature_vec[v].squaredNorm();
      quartic += (1.0 - h2 * h2) * geo.vertex_areas[v];
      lin += 0.5 * std::log(geo.vertex_areas[v] / g.g0_area[v]) * g.g0_area[v];
    }
    const double four_pi = 4.0 * std::numbers::pi;
    e.multiplier = 2.0 * p.sigma * p.sigma * quartic + l * four_pi * lin - four_pi * l;
  }
  e.mesh_hash = hash_immersion(im);
  e.gauge_hash = hash_gauge(g);
  return e;
}

bool BoundsReport::all_pass() const {
  for (const auto& c : checks)
    if (c.applicable && !c.pass) return false;
  return true;
}

BoundsReport energy_bounds_report(const Immersion& im, const GaugeState& g, const ViscosityParams& p,
                                  double tol_onofri) {
  auto e = relaxed_energy(im, g, p);
  auto o = onofri_energy(im, g);
  const double L = std::log(1.0 / p.sigma);
  const double l = 1.0 / L;
  BoundsReport r;

  BoundCheck c65{"log_area_bound"};
  c65.lhs = std::abs(o.log_area / (2.0 * std::numbers::pi)) / L;
  c65.rhs = 2.0 + std::log(p.sigma * p.sigma * e.smoother) / L;
  c65.pass = c65.lhs <= c65.rhs;
  r.checks.push_back(c65);

  BoundCheck c71{"onofri_nonnegative"};
  c71.lhs = e.total;
  c71.rhs = e.willmore + p.sigma * p.sigma * e.smoother;
  c71.pass = c71.lhs >= c71.rhs - l * tol_onofri;
  c71.alarm = !c71.pass;
  r.checks.push_back(c71);

  BoundCheck c72{"dirichlet_bound"};
  c72.lhs = l * 2.0 * o.dirichlet;
  c72.rhs = 6.0 * (e.total - e.willmore);
  c72.pass = c72.lhs <= c72.rhs;
  r.checks.push_back(c72);

  BoundCheck c75{"area_bound"};
  const double gap = e.total - e.willmore;
  c75.applicable = gap > 0;
  c75.lhs = 0.5 * std::log(e.area) / L;
  c75.rhs = c75.applicable ? 1.0 + std::log(gap) / L : 0.0;
  c75.pass = !c75.applicable || c75.lhs <= c75.rhs;
  r.checks.push_back(c75);
  return r;
}

std::string hash_immersion(const Immersion& im) {
  Fnv f;
  for (const Face& t : im.mesh->faces) f.bytes(t.data(), sizeof(int) * 3);
  for (const Vec3& p : im.positions) f.bytes(p.data(), sizeof(double) * 3);
  return f.hex();
}

std::string hash_gauge(const GaugeState& g) {
  Fnv f;
  f.bytes(g.mobius.a.data(), sizeof(double) * 3);
  f.bytes(g.mobius.rot.data(), sizeof(double) * 9);
  for (double a : g.alpha) f.dbl(a);
  return f.hex();
}

}  // namespace wm
