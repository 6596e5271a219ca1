#include "wm/mesh.hpp"

#include <Eigen/SVD>

#include <cmath>
#include <map>
#include <numbers>
#include <sstream>
#include <unordered_map>

namespace wm {

namespace {

constexpr double kPi = std::numbers::pi;

const std::array<Face, 20> kIcoFaces = {{{0, 11, 5}, {0, 5, 1},  {0, 1, 7},   {0, 7, 10}, {0, 10, 11},
                                         {1, 5, 9},  {5, 11, 4}, {11, 10, 2}, {10, 7, 6}, {7, 1, 8},
                                         {3, 9, 4},  {3, 4, 2},  {3, 2, 6},   {3, 6, 8},  {3, 8, 9},
                                         {4, 9, 5},  {2, 4, 11}, {6, 2, 10},  {8, 6, 7},  {9, 8, 1}}};

std::array<Vec3, 12> icoVertices() {
  const double t = (1.0 + std::sqrt(5.0)) / 2.0;
  std::array<Vec3, 12> v = {Vec3(-1, t, 0), Vec3(1, t, 0),  Vec3(-1, -t, 0), Vec3(1, -t, 0),
                            Vec3(0, -1, t), Vec3(0, 1, t),  Vec3(0, -1, -t), Vec3(0, 1, -t),
                            Vec3(t, 0, -1), Vec3(t, 0, 1),  Vec3(-t, 0, -1), Vec3(-t, 0, 1)};
  for (auto& p : v) p.normalize();
  return v;
}

std::uint64_t edgeKey(int a, int b) {
  return (static_cast<std::uint64_t>(a) << 32) | static_cast<std::uint32_t>(b);
}

Mat3 nearestRotation(const Mat3& m) {
  Eigen::JacobiSVD<Mat3> svd(m, Eigen::ComputeFullU | Eigen::ComputeFullV);
  Mat3 r = svd.matrixU() * svd.matrixV().transpose();
  if (r.determinant() < 0) {
    Mat3 u = svd.matrixU();
    u.col(2) *= -1.0;
    r = u * svd.matrixV().transpose();
  }
  return r;
}

}  // namespace

void validate_sphere(const TriangulatedSphere& mesh, double radius_tol) {
  const int nv = mesh.vertexCount();
  std::unordered_map<std::uint64_t, int> directed;
  directed.reserve(mesh.faces.size() * 3);
  for (int f = 0; f < mesh.faceCount(); ++f) {
    const Face& t = mesh.faces[f];
    for (int k = 0; k < 3; ++k) {
      int a = t[k], b = t[(k + 1) % 3];
      if (a < 0 || a >= nv || b < 0 || b >= nv || a == b)
        throw GeometryError("face " + std::to_string(f) + " has invalid vertex indices", f);
      if (!directed.emplace(edgeKey(a, b), f).second)
        throw GeometryError("directed edge repeated (non-manifold or inconsistent orientation) at face " +
                                std::to_string(f),
                            f);
    }
  }
  for (const auto& [key, f] : directed) {
    int a = static_cast<int>(key >> 32), b = static_cast<int>(key & 0xffffffffu);
    if (!directed.count(edgeKey(b, a)))
      throw GeometryError("boundary edge found at face " + std::to_string(f) + "; surface is not closed", f);
  }
  const long e = static_cast<long>(directed.size()) / 2;
  const long chi = nv - e + mesh.faceCount();
  if (chi != 2) throw GeometryError("Euler characteristic is " + std::to_string(chi) + ", expected 2");
  for (int v = 0; v < nv; ++v)
    if (std::abs(mesh.vertices[v].norm() - 1.0) > radius_tol)
      throw GeometryError("reference vertex " + std::to_string(v) + " is off the unit sphere");
}

Immersion make_immersion(MeshPtr mesh, std::vector<Vec3> positions) {
  if (!mesh) throw ParameterError("immersion without mesh");
  if (static_cast<int>(positions.size()) != mesh->vertexCount())
    throw ParameterError("positions length " + std::to_string(positions.size()) + " does not match vertex count " +
                         std::to_string(mesh->vertexCount()));
  Immersion im{std::move(mesh), std::move(positions)};
  face_frames(im.positions, im.mesh->faces, true);
  return im;
}

Immersion identity_immersion(MeshPtr mesh) {
  auto pos = mesh->vertices;
  return make_immersion(std::move(mesh), std::move(pos));
}

// ---------------------------------------------------------------- Mobius maps

MobiusR3 MobiusR3::similarity(const Mat3& rot, double t, const Vec3& b) {
  MobiusR3 m;
  m.kind = Kind::Similarity;
  m.rotation = rot;
  m.log_scale = t;
  m.translation = b;
  return m;
}

MobiusR3 MobiusR3::inversion(const Vec3& c, double r) {
  if (!(r > 0)) throw ParameterError("inversion radius must be positive");
  MobiusR3 m;
  m.kind = Kind::Inversion;
  m.center = c;
  m.radius = r;
  return m;
}

Vec3 MobiusR3::operator()(const Vec3& x) const {
  if (kind == Kind::Similarity) return std::exp(log_scale) * (rotation * x) + translation;
  Vec3 d = x - center;
  return center + (radius * radius / d.squaredNorm()) * d;
}

Vec3 ball_translation(const Vec3& a, const Vec3& x) {
  const double a2 = a.squaredNorm();
  const Vec3 d = x - a;
  const double den = 1.0 - 2.0 * x.dot(a) + x.squaredNorm() * a2;
  return ((1.0 - a2) * d - d.squaredNorm() * a) / den;
}

Vec3 MobiusS2::operator()(const Vec3& x) const { return rot * ball_translation(a, x); }

MobiusS2 MobiusS2::inverse() const {
  MobiusS2 m;
  m.a = -(rot * a);
  m.rot = rot.transpose();
  return m;
}

MobiusS2 MobiusS2::compose(const MobiusS2& other) const {
  MobiusS2 out;
  // (this o other)^{-1}(0) is the new translation part
  out.a = other.inverse()(inverse()(Vec3::Zero()));
  Mat3 r;
  for (int i = 0; i < 3; ++i) {
    Vec3 e = Vec3::Unit(i);
    r.col(i) = (*this)(other(ball_translation(-out.a, e)));
  }
  out.rot = nearestRotation(r);
  return out;
}

void MobiusS2::check() const {
  if (!(a.norm() < 1.0)) throw ParameterError("Mobius parameter |a| must be < 1");
  if ((rot * rot.transpose() - Mat3::Identity()).norm() > 1e-8 || rot.determinant() < 0)
    throw ParameterError("Mobius rotation is not in SO(3)");
}

// ---------------------------------------------------------------- icosphere

TriangulatedSphere build_icosphere(int level) {
  if (level < 0 || level > 8) throw ParameterError("subdivision level must be in [0, 8]");
  const auto base = icoVertices();
  const int n = 1 << level;
  TriangulatedSphere s;
  s.subdivision_level = level;
  s.vertices.reserve(10 * (n * n) + 2);
  s.faces.reserve(20 * n * n);
  std::map<std::array<int, 4>, int> index;

  auto vid = [&](int f, int i, int j) {
    const auto& [a, b, c] = kIcoFaces[f];
    const int k = n - i - j;
    std::array<int, 4> key;
    if (i == 0 && j == 0) key = {0, a, 0, 0};
    else if (k == 0 && j == 0) key = {0, b, 0, 0};
    else if (k == 0 && i == 0) key = {0, c, 0, 0};
    else if (j == 0) key = a < b ? std::array<int, 4>{1, a, b, i} : std::array<int, 4>{1, b, a, n - i};
    else if (i == 0) key = a < c ? std::array<int, 4>{1, a, c, j} : std::array<int, 4>{1, c, a, n - j};
    else if (k == 0) key = b < c ? std::array<int, 4>{1, b, c, j} : std::array<int, 4>{1, c, b, n - j};
    else key = {2, f, i, j};
    auto it = index.find(key);
    if (it != index.end()) return it->second;
    Vec3 p = (k * base[a] + i * base[b] + j * base[c]) / double(n);
    s.vertices.push_back(p.normalized());
    int id = static_cast<int>(s.vertices.size()) - 1;
    index.emplace(key, id);
    return id;
  };

  for (int f = 0; f < 20; ++f)
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n - i; ++j) {
        s.faces.push_back({vid(f, i, j), vid(f, i + 1, j), vid(f, i, j + 1)});
        if (i + j < n - 1) s.faces.push_back({vid(f, i + 1, j), vid(f, i + 1, j + 1), vid(f, i, j + 1)});
      }
  return s;
}

MeshPtr icosphere(int level) { return std::make_shared<const TriangulatedSphere>(build_icosphere(level)); }

// ---------------------------------------------------------------- per-face data

std::vector<FaceFrame> face_frames(const std::vector<Vec3>& x, const std::vector<Face>& faces,
                                   bool check_degenerate) {
  std::vector<FaceFrame> ff(faces.size());
  double total = 0.0;
  for (std::size_t f = 0; f < faces.size(); ++f) {
    const auto& [i0, i1, i2] = faces[f];
    const Vec3 &p0 = x[i0], &p1 = x[i1], &p2 = x[i2];
    Vec3 cr = (p1 - p0).cross(p2 - p0);
    double dbl = cr.norm();
    FaceFrame& fr = ff[f];
    fr.area = 0.5 * dbl;
    total += fr.area;
    if (dbl == 0.0) continue;
    fr.normal = cr / dbl;
    const std::array<const Vec3*, 3> p = {&p0, &p1, &p2};
    for (int k = 0; k < 3; ++k) {
      Vec3 e1 = *p[(k + 1) % 3] - *p[k];
      Vec3 e2 = *p[(k + 2) % 3] - *p[k];
      fr.cot[k] = e1.dot(e2) / dbl;
      fr.grad[k] = fr.normal.cross(*p[(k + 2) % 3] - *p[(k + 1) % 3]) / dbl;
    }
  }
  if (check_degenerate && !faces.empty()) {
    const double thr = 1e-12 * total / double(faces.size());
    for (std::size_t f = 0; f < faces.size(); ++f)
      if (!(ff[f].area > thr)) {
        std::ostringstream os;
        os << "degenerate face " << f << " (area " << ff[f].area << ")";
        throw GeometryError(os.str(), static_cast<int>(f));
      }
  }
  return ff;
}

double degeneracy_threshold(const std::vector<FaceFrame>& ff) {
  double total = 0.0;
  for (const auto& f : ff) total += f.area;
  return ff.empty() ? 0.0 : 1e-12 * total / double(ff.size());
}

std::vector<double> dual_vertex_areas(const std::vector<Vec3>& x, const std::vector<Face>& faces,
                                      const std::vector<FaceFrame>& ff) {
  std::vector<double> a(x.size(), 0.0);
  for (std::size_t f = 0; f < faces.size(); ++f) {
    const Face& t = faces[f];
    for (int k = 0; k < 3; ++k) {
      int j = t[(k + 1) % 3], l = t[(k + 2) % 3];
      double w = (x[j] - x[l]).squaredNorm() * ff[f].cot[k] / 8.0;
      a[j] += w;
      a[l] += w;
    }
  }
  for (std::size_t v = 0; v < a.size(); ++v)
    if (!(a[v] > 0.0))
      throw GeometryError("nonpositive circumcentric dual area at vertex " + std::to_string(v) +
                          " (star too obtuse)");
  return a;
}

SparseMatrix cotan_laplacian(int n, const std::vector<Face>& faces, const std::vector<FaceFrame>& ff) {
  std::vector<Eigen::Triplet<double>> trip;
  trip.reserve(faces.size() * 12);
  for (std::size_t f = 0; f < faces.size(); ++f)
    for (int k = 0; k < 3; ++k) {
      int i = faces[f][(k + 1) % 3], j = faces[f][(k + 2) % 3];
      double w = 0.5 * ff[f].cot[k];
      trip.emplace_back(i, j, -w);
      trip.emplace_back(j, i, -w);
      trip.emplace_back(i, i, w);
      trip.emplace_back(j, j, w);
    }
  SparseMatrix L(n, n);
  L.setFromTriplets(trip.begin(), trip.end());
  return L;
}

std::vector<Vec3> vertex_normals(const std::vector<Vec3>& x, const std::vector<Face>& faces) {
  std::vector<Vec3> n(x.size(), Vec3::Zero());
  for (const Face& t : faces)
    for (int k = 0; k < 3; ++k) {
      Vec3 e1 = x[t[(k + 1) % 3]] - x[t[k]];
      Vec3 e2 = x[t[(k + 2) % 3]] - x[t[k]];
      n[t[k]] += e1.cross(e2) / (e1.squaredNorm() * e2.squaredNorm());
    }
  for (auto& v : n) v.normalize();
  return n;
}

std::vector<double> angle_defects(const std::vector<Vec3>& x, const std::vector<Face>& faces) {
  std::vector<double> d(x.size(), 2.0 * kPi);
  for (const Face& t : faces)
    for (int k = 0; k < 3; ++k) {
      Vec3 e1 = x[t[(k + 1) % 3]] - x[t[k]];
      Vec3 e2 = x[t[(k + 2) % 3]] - x[t[k]];
      d[t[k]] -= std::atan2(e1.cross(e2).norm(), e1.dot(e2));
    }
  return d;
}

Mat3 face_gradient(const FaceFrame& f, const Vec3& v0, const Vec3& v1, const Vec3& v2) {
  return v0 * f.grad[0].transpose() + v1 * f.grad[1].transpose() + v2 * f.grad[2].transpose();
}

Vec3 face_gradient(const FaceFrame& f, double s0, double s1, double s2) {
  return s0 * f.grad[0] + s1 * f.grad[1] + s2 * f.grad[2];
}

double mesh_diameter(const std::vector<Vec3>& x) {
  if (x.empty()) return 0.0;
  Vec3 lo = x[0], hi = x[0];
  for (const auto& p : x) {
    lo = lo.cwiseMin(p);
    hi = hi.cwiseMax(p);
  }
  return (hi - lo).norm();
}

double signed_volume(const Immersion& im) {
  double v = 0.0;
  for (const Face& t : im.mesh->faces)
    v += im.positions[t[0]].dot(im.positions[t[1]].cross(im.positions[t[2]]));
  return v / 6.0;
}

double total_area(const Immersion& im) {
  double a = 0.0;
  for (const Face& t : im.mesh->faces) {
    const auto& x = im.positions;
    a += 0.5 * (x[t[1]] - x[t[0]]).cross(x[t[2]] - x[t[0]]).norm();
  }
  return a;
}

// ---------------------------------------------------------------- geometry

DiscreteGeometry induced_geometry(const Immersion& im) {
  const auto& x = im.positions;
  const auto& faces = im.mesh->faces;
  const int n = im.vertexCount();
  auto ff = face_frames(x, faces, true);

  DiscreteGeometry g;
  g.face_areas.resize(faces.size());
  for (std::size_t f = 0; f < faces.size(); ++f) g.face_areas[f] = ff[f].area;
  g.vertex_areas = dual_vertex_areas(x, faces, ff);
  g.total_area = 0.0;
  for (double a : g.face_areas) g.total_area += a;

  std::vector<Vec3> lx(n, Vec3::Zero());
  for (std::size_t f = 0; f < faces.size(); ++f)
    for (int k = 0; k < 3; ++k) {
      int i = faces[f][(k + 1) % 3], j = faces[f][(k + 2) % 3];
      Vec3 d = 0.5 * ff[f].cot[k] * (x[i] - x[j]);
      lx[i] += d;
      lx[j] -= d;
    }
  g.normals = vertex_normals(x, faces);
  g.mean_curvature_vec.resize(n);
  g.mean_curvature.resize(n);
  for (int v = 0; v < n; ++v) {
    g.mean_curvature_vec[v] = lx[v] / (2.0 * g.vertex_areas[v]);
    g.mean_curvature[v] = g.mean_curvature_vec[v].dot(g.normals[v]);
  }

  auto defect = angle_defects(x, faces);
  g.gauss_curvature.resize(n);
  for (int v = 0; v < n; ++v) g.gauss_curvature[v] = defect[v] / g.vertex_areas[v];

  const auto& ref = im.mesh->vertices;
  auto ref_ff = face_frames(ref, faces, false);
  auto ref_area = dual_vertex_areas(ref, faces, ref_ff);
  g.log_conformal.resize(n);
  for (int v = 0; v < n; ++v) g.log_conformal[v] = 0.5 * std::log(g.vertex_areas[v] / ref_area[v]);

  g.second_fundamental.resize(faces.size());
  for (std::size_t f = 0; f < faces.size(); ++f) {
    const Face& t = faces[f];
    Mat3 dn = face_gradient(ff[f], g.normals[t[0]], g.normals[t[1]], g.normals[t[2]]);
    Vec3 u1 = (x[t[1]] - x[t[0]]).normalized();
    Vec3 u2 = ff[f].normal.cross(u1);
    const std::array<Vec3, 2> u = {u1, u2};
    Mat2 s;
    for (int i = 0; i < 2; ++i)
      for (int j = 0; j < 2; ++j) s(i, j) = u[j].dot(dn * u[i]);
    g.second_fundamental[f] = 0.5 * (s + s.transpose());
  }
  return g;
}

Immersion apply_mobius_r3(const Immersion& im, const MobiusR3& m) {
  if (m.kind == MobiusR3::Kind::Inversion) {
    auto ff = face_frames(im.positions, im.mesh->faces, false);
    const double thr = std::sqrt(degeneracy_threshold(ff));
    // distance from the centre to each triangle
    for (std::size_t f = 0; f < im.mesh->faces.size(); ++f) {
      const Face& t = im.mesh->faces[f];
      const Vec3 &a = im.positions[t[0]], &b = im.positions[t[1]], &c = im.positions[t[2]];
      Vec3 p = m.center;
      Vec3 ab = b - a, ac = c - a, ap = p - a;
      double d1 = ab.dot(ap), d2 = ac.dot(ap);
      Vec3 q;
      Vec3 bp = p - b;
      double d3 = ab.dot(bp), d4 = ac.dot(bp);
      Vec3 cp = p - c;
      double d5 = ab.dot(cp), d6 = ac.dot(cp);
      double vc = d1 * d4 - d3 * d2, vb = d5 * d2 - d1 * d6, va = d3 * d6 - d5 * d4;
      if (d1 <= 0 && d2 <= 0) q = a;
      else if (d3 >= 0 && d4 <= d3) q = b;
      else if (d6 >= 0 && d5 <= d6) q = c;
      else if (vc <= 0 && d1 >= 0 && d3 <= 0) q = a + d1 / (d1 - d3) * ab;
      else if (vb <= 0 && d2 >= 0 && d6 <= 0) q = a + d2 / (d2 - d6) * ac;
      else if (va <= 0 && (d4 - d3) >= 0 && (d5 - d6) >= 0) q = b + (d4 - d3) / ((d4 - d3) + (d5 - d6)) * (c - b);
      else {
        double den = 1.0 / (va + vb + vc);
        q = a + ab * (vb * den) + ac * (vc * den);
      }
      if ((q - p).norm() <= thr)
        throw GeometryError("inversion centre lies on the surface (face " + std::to_string(f) + ")",
                            static_cast<int>(f));
    }
  }
  std::vector<Vec3> y(im.positions.size());
  for (std::size_t v = 0; v < y.size(); ++v) y[v] = m(im.positions[v]);
  return make_immersion(im.mesh, std::move(y));
}

TriangulatedSphere apply_mobius_s2(const TriangulatedSphere& mesh, const MobiusS2& m) {
  m.check();
  TriangulatedSphere out = mesh;
  for (auto& p : out.vertices) {
    p = m(p);
    p.normalize();
  }
  return out;
}

}  // namespace wm
