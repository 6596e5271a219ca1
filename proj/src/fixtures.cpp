#include "wm/fixtures.hpp"

#include <cmath>
#include <numbers>
#include <random>
#include <sstream>

namespace wm {

namespace {

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, sep)) out.push_back(item);
  return out;
}

double number(const std::string& s, const std::string& fixture) {
  try {
    std::size_t used = 0;
    double v = std::stod(s, &used);
    if (used != s.size()) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    throw ParameterError("fixture " + fixture + ": bad number '" + s + "'");
  }
}

// rotation taking unit vector a to +z
Mat3 alignToZ(const Vec3& a) {
  return Eigen::Quaterniond::FromTwoVectors(a, Vec3::UnitZ()).toRotationMatrix();
}

}  // namespace

Immersion ellipsoid(MeshPtr mesh, double a, double b, double c) {
  if (!(a > 0 && b > 0 && c > 0)) throw ParameterError("ellipsoid axes must be positive");
  std::vector<Vec3> x;
  x.reserve(mesh->vertices.size());
  for (const Vec3& p : mesh->vertices) x.emplace_back(a * p.x(), b * p.y(), c * p.z());
  return make_immersion(std::move(mesh), std::move(x));
}

Immersion conformal_spheroid(MeshPtr mesh, double a, double c) {
  if (!(a > 0 && c > 0)) throw ParameterError("spheroid axes must be positive");
  // t(psi) = log tan(psi/2) + int_{pi/2}^{psi} g, g regular at both poles
  auto g = [a, c](double u) {
    double s = std::sin(u), co = std::cos(u);
    return (std::sqrt(a * a * co * co + c * c * s * s) - a) / (a * s);
  };
  auto integral = [&](double psi) {
    constexpr int n = 200;
    if (psi == std::numbers::pi / 2) return 0.0;
    const double lo = std::numbers::pi / 2, h = (psi - lo) / n;
    double acc = 0.0;
    for (int i = 0; i <= n; ++i) {
      double u = lo + i * h;
      double gu = (u <= 0.0 || u >= std::numbers::pi) ? 0.0 : g(u);
      acc += (i == 0 || i == n ? 1 : (i % 2 ? 4 : 2)) * gu;
    }
    return acc * h / 3.0;
  };
  auto isothermal = [&](double psi) { return std::log(std::tan(psi / 2)) + integral(psi); };
  std::vector<Vec3> x;
  x.reserve(mesh->vertices.size());
  for (const Vec3& p : mesh->vertices) {
    const double theta = std::acos(std::clamp(p.z(), -1.0, 1.0));
    const double phi = std::atan2(p.y(), p.x());
    double psi = theta;
    if (theta > 1e-14 && theta < std::numbers::pi - 1e-14) {
      const double target = std::log(std::tan(theta / 2));
      double lo = 1e-300, hi = std::numbers::pi - 1e-15;
      for (int it = 0; it < 200 && hi - lo > 1e-15; ++it) {
        double mid = 0.5 * (lo + hi);
        (isothermal(mid) < target ? lo : hi) = mid;
      }
      psi = 0.5 * (lo + hi);
    }
    x.emplace_back(a * std::sin(psi) * std::cos(phi), a * std::sin(psi) * std::sin(phi), c * std::cos(psi));
  }
  return make_immersion(std::move(mesh), std::move(x));
}

Immersion inverted_catenoid(MeshPtr mesh, double c) {
  if (!(c > 0)) throw ParameterError("catenoid neck radius must be positive");
  const Mat3 R = alignToZ(mesh->vertices[0]);
  std::vector<Vec3> x;
  x.reserve(mesh->vertices.size());
  for (const Vec3& p : mesh->vertices) {
    Vec3 q = R * p;
    if (std::abs(q.z()) > 1.0 - 1e-12) {
      x.push_back(Vec3::Zero());
      continue;
    }
    const double u = std::atan2(q.y(), q.x());
    const double v = std::atanh(q.z());
    Vec3 X(c * std::cosh(v) * std::cos(u), c * std::cosh(v) * std::sin(u), c * v);
    x.push_back(X / X.squaredNorm());
  }
  return make_immersion(std::move(mesh), std::move(x));
}

Immersion bump_sphere(MeshPtr mesh, double amplitude, double width, int apex) {
  if (!(width > 0)) throw ParameterError("bump width must be positive");
  if (apex < 0 || apex >= mesh->vertexCount()) throw ParameterError("bump apex out of range");
  const Vec3 a = mesh->vertices[apex];
  std::vector<Vec3> x;
  x.reserve(mesh->vertices.size());
  for (const Vec3& p : mesh->vertices) {
    double theta = std::acos(std::clamp(p.dot(a), -1.0, 1.0));
    x.push_back((1.0 + amplitude * std::exp(-(theta / width) * (theta / width))) * p);
  }
  return make_immersion(std::move(mesh), std::move(x));
}

Immersion perturbed_sphere(MeshPtr mesh, double amplitude, std::uint64_t seed) {
  constexpr int kModes = 6;
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> uni(-1.0, 1.0);
  std::uniform_real_distribution<double> phase(0.0, 2.0 * std::numbers::pi);
  std::array<Vec3, kModes> k;
  std::array<double, kModes> coef, phi;
  double total = 0.0;
  for (int j = 0; j < kModes; ++j) {
    Vec3 d(uni(rng), uni(rng), uni(rng));
    if (d.norm() < 1e-3) d = Vec3::UnitX();
    k[j] = d.normalized() * (2.0 + uni(rng));  // |k| in [1, 3]
    coef[j] = uni(rng);
    phi[j] = phase(rng);
    total += std::abs(coef[j]);
  }
  std::vector<Vec3> x;
  x.reserve(mesh->vertices.size());
  for (const Vec3& p : mesh->vertices) {
    double s = 0.0;
    for (int j = 0; j < kModes; ++j) s += coef[j] * std::sin(k[j].dot(p) + phi[j]);
    x.push_back((1.0 + amplitude * s / total) * p);
  }
  return make_immersion(std::move(mesh), std::move(x));
}

Immersion mobius_sphere(MeshPtr mesh, const MobiusS2& m) {
  m.check();
  std::vector<Vec3> x;
  x.reserve(mesh->vertices.size());
  for (const Vec3& p : mesh->vertices) x.push_back(m(p));
  return make_immersion(std::move(mesh), std::move(x));
}

Immersion flat_cap_sphere(MeshPtr mesh, double height) {
  if (!(height > -1.0 && height < 1.0)) throw ParameterError("cap height must lie in (-1, 1)");
  std::vector<Vec3> x;
  x.reserve(mesh->vertices.size());
  for (const Vec3& p : mesh->vertices) x.push_back(p.z() > height ? Vec3(p.x(), p.y(), height) : p);
  return make_immersion(std::move(mesh), std::move(x));
}

Immersion make_fixture(const std::string& name, int level) {
  auto parts = split(name, ':');
  if (parts.empty()) throw ParameterError("empty fixture name");
  auto mesh = icosphere(level);
  const std::string& kind = parts[0];
  auto arg = [&](std::size_t i, double fallback) {
    return i < parts.size() ? number(parts[i], name) : fallback;
  };
  auto arity = [&](std::size_t lo, std::size_t hi) {
    if (parts.size() < lo + 1 || parts.size() > hi + 1)
      throw ParameterError("fixture " + kind + " takes " + std::to_string(lo) + "-" + std::to_string(hi) +
                           " parameters");
  };
  if (kind == "sphere") {
    arity(0, 0);
    return identity_immersion(mesh);
  }
  if (kind == "ellipsoid") {
    arity(3, 3);
    return ellipsoid(mesh, arg(1, 1), arg(2, 1), arg(3, 1));
  }
  if (kind == "conformal-spheroid") {
    arity(2, 2);
    return conformal_spheroid(mesh, arg(1, 1), arg(2, 1));
  }
  if (kind == "inverted-catenoid") {
    arity(0, 1);
    return inverted_catenoid(mesh, arg(1, 1.0));
  }
  if (kind == "bump-sphere") {
    arity(1, 2);
    return bump_sphere(mesh, arg(1, 0), arg(2, 0.3));
  }
  if (kind == "perturbed") {
    arity(2, 2);
    return perturbed_sphere(mesh, arg(1, 0), static_cast<std::uint64_t>(arg(2, 0)));
  }
  if (kind == "mobius-sphere") {
    arity(3, 3);
    MobiusS2 m;
    m.a = Vec3(arg(1, 0), arg(2, 0), arg(3, 0));
    return mobius_sphere(mesh, m);
  }
  if (kind == "flat-cap") {
    arity(1, 1);
    return flat_cap_sphere(mesh, arg(1, 0.5));
  }
  throw ParameterError("unknown fixture '" + kind + "'");
}

}  // namespace wm
