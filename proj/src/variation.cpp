#include "wm/variation.hpp"

#include <cmath>
#include <numbers>
#include <unordered_map>
#include <unordered_set>

#include "wm/kernel.hpp"

namespace wm {

namespace {

constexpr double kFourPi = 4.0 * std::numbers::pi;

// Per-vertex and per-face data in the orientation used by the conservation
// laws: np = -n (inward on a convex surface), H = Hvec . n.
struct Fields {
  std::vector<FaceFrame> ff;
  std::vector<double> A;
  std::vector<double> H;
  std::vector<Vec3> np;
  std::vector<Mat3> shape;  // tangential second fundamental form per face
  std::vector<Mat3> proj;   // tangential projector per face
  double area = 0.0;
};

Fields buildFields(const Immersion& im) {
  const auto& x = im.positions;
  const auto& faces = im.mesh->faces;
  const int n = im.vertexCount();
  Fields s;
  s.ff = face_frames(x, faces, true);
  s.A = dual_vertex_areas(x, faces, s.ff);
  for (const auto& f : s.ff) s.area += f.area;
  auto nrm = vertex_normals(x, faces);
  std::vector<Vec3> lx(n, Vec3::Zero());
  for (std::size_t f = 0; f < faces.size(); ++f)
    for (int k = 0; k < 3; ++k) {
      int i = faces[f][(k + 1) % 3], j = faces[f][(k + 2) % 3];
      Vec3 d = 0.5 * s.ff[f].cot[k] * (x[i] - x[j]);
      lx[i] += d;
      lx[j] -= d;
    }
  s.H.resize(n);
  s.np.resize(n);
  for (int v = 0; v < n; ++v) {
    s.H[v] = lx[v].dot(nrm[v]) / (2.0 * s.A[v]);
    s.np[v] = -nrm[v];
  }
  s.shape.resize(faces.size());
  s.proj.resize(faces.size());
  for (std::size_t f = 0; f < faces.size(); ++f) {
    const Face& t = faces[f];
    const FaceFrame& fr = s.ff[f];
    Mat3 P = Mat3::Identity() - fr.normal * fr.normal.transpose();
    Mat3 dn = face_gradient(fr, nrm[t[0]], nrm[t[1]], nrm[t[2]]);
    s.shape[f] = P * (0.5 * (dn + dn.transpose())) * P;
    s.proj[f] = P;
  }
  return s;
}

double mean3(const std::vector<double>& v, const Face& t) { return (v[t[0]] + v[t[1]] + v[t[2]]) / 3.0; }

// Oriented tangent frame with u1 x u2 = np (the inward face normal).
std::pair<Vec3, Vec3> orientedFrame(const std::vector<Vec3>& x, const Face& t, const FaceFrame& fr) {
  Vec3 u1 = (x[t[1]] - x[t[0]]).normalized();
  Vec3 u2 = (-fr.normal).cross(u1);
  return {u1, u2};
}

struct CurrentSpec {
  ScalarFn f, fp;
  double l = 0.0;               // weight of the Onofri part
  const GaugeState* g = nullptr;
  bool literal_alpha = false;
  bool onofri_only = false;     // drop the f-part
};

// One-form dL = *M per face: returns the 3x3 matrix M (rows: R^3 components,
// columns: tangent directions).
std::vector<Mat3> currentField(const Immersion& im, const Fields& s, const CurrentSpec& c) {
  const auto& faces = im.mesh->faces;
  const int n = im.vertexCount();
  std::vector<Mat3> M(faces.size(), Mat3::Zero());
  std::vector<double> fv(n, 0.0), fpv(n, 0.0);
  std::vector<Vec3> fpn(n, Vec3::Zero());
  if (!c.onofri_only) {
    for (int v = 0; v < n; ++v) {
      fv[v] = c.f(s.H[v]);
      fpv[v] = c.fp(s.H[v]);
      fpn[v] = fpv[v] * s.np[v];
    }
  }
  std::vector<double> ealpha;
  if (c.g) {
    ealpha.resize(n);
    for (int v = 0; v < n; ++v) ealpha[v] = std::exp(-2.0 * c.g->alpha[v]);
  }
  for (std::size_t f = 0; f < faces.size(); ++f) {
    const Face& t = faces[f];
    const FaceFrame& fr = s.ff[f];
    const Mat3& P = s.proj[f];
    Mat3 m = Mat3::Zero();
    if (!c.onofri_only) {
      Mat3 dnp = face_gradient(fr, s.np[t[0]], s.np[t[1]], s.np[t[2]]);
      m += face_gradient(fr, fpn[t[0]], fpn[t[1]], fpn[t[2]]);
      m -= 2.0 * mean3(fpv, t) * dnp;
      m -= 2.0 * mean3(fv, t) * P;
    }
    if (c.g && c.l != 0.0) {
      const auto& al = c.g->alpha;
      Vec3 ga = face_gradient(fr, al[t[0]], al[t[1]], al[t[2]]);
      double e = mean3(ealpha, t);
      if (c.literal_alpha) {
        e = 0.0;
        for (int k = 0; k < 3; ++k) e += al[t[k]] * ealpha[t[k]] / 3.0;
      }
      const Mat3& S = s.shape[f];
      double hf = 0.5 * S.trace();
      Vec3 npf = -fr.normal;
      Mat3 q = (ga.squaredNorm() - kFourPi * e + kFourPi / s.area) * P;
      q -= 2.0 * ga * ga.transpose();
      q += 2.0 * npf * ((2.0 * hf * P - S) * ga).transpose();
      m += c.l * q;
    }
    M[f] = m;
  }
  return M;
}

std::vector<Vec3> weakDivergence(const Immersion& im, const Fields& s, const std::vector<Mat3>& M) {
  std::vector<Vec3> r(im.vertexCount(), Vec3::Zero());
  const auto& faces = im.mesh->faces;
  for (std::size_t f = 0; f < faces.size(); ++f)
    for (int k = 0; k < 3; ++k) r[faces[f][k]] -= s.ff[f].area * (M[f] * s.ff[f].grad[k]);
  return r;
}

double frob(const Mat3& a, const Mat3& b) { return (a.array() * b.array()).sum(); }

struct EdgeFaceMap {
  std::unordered_map<std::uint64_t, int> face;
  static std::uint64_t key(int a, int b) {
    return (static_cast<std::uint64_t>(a) << 32) | static_cast<std::uint32_t>(b);
  }
  explicit EdgeFaceMap(const TriangulatedSphere& m) {
    for (int f = 0; f < m.faceCount(); ++f)
      for (int k = 0; k < 3; ++k) face[key(m.faces[f][k], m.faces[f][(k + 1) % 3])] = f;
  }
  int left(int a, int b) const {
    auto it = face.find(key(a, b));
    return it == face.end() ? -1 : it->second;
  }
};

void checkLoop(const EdgeFaceMap& em, const std::vector<int>& loop, int n) {
  if (loop.size() < 3) throw ParameterError("loop needs at least 3 vertices");
  std::unordered_set<int> seen;
  for (std::size_t k = 0; k < loop.size(); ++k) {
    int a = loop[k], b = loop[(k + 1) % loop.size()];
    if (a < 0 || a >= n) throw ParameterError("loop vertex out of range");
    if (!seen.insert(a).second) throw ParameterError("loop is not simple (vertex " + std::to_string(a) + " repeats)");
    if (em.left(a, b) < 0) throw ParameterError("loop vertices " + std::to_string(a) + "," + std::to_string(b) +
                                                " are not joined by an edge");
  }
}

}  // namespace

double norm_phi(const Immersion& im, const std::vector<Vec3>& w) {
  const auto& faces = im.mesh->faces;
  auto ff = face_frames(im.positions, faces, true);
  auto A = dual_vertex_areas(im.positions, faces, ff);
  std::vector<Vec3> lw(w.size(), Vec3::Zero());
  double acc = 0.0;
  for (std::size_t f = 0; f < faces.size(); ++f) {
    const Face& t = faces[f];
    for (int k = 0; k < 3; ++k) {
      int i = t[(k + 1) % 3], j = t[(k + 2) % 3];
      Vec3 d = 0.5 * ff[f].cot[k] * (w[i] - w[j]);
      lw[i] += d;
      lw[j] -= d;
    }
    double g2 = face_gradient(ff[f], w[t[0]], w[t[1]], w[t[2]]).squaredNorm();
    acc += g2 * g2 * ff[f].area;
  }
  for (std::size_t v = 0; v < w.size(); ++v) {
    double l2 = (lw[v] / A[v]).squaredNorm();
    double w2 = w[v].squaredNorm();
    acc += (l2 * l2 + w2 * w2) * A[v];
  }
  return std::pow(acc, 0.25);
}

VariationField make_field(const Immersion& im, std::vector<Vec3> w) {
  if (static_cast<int>(w.size()) != im.vertexCount()) throw ParameterError("field length mismatch");
  VariationField v;
  v.norm_phi = norm_phi(im, w);
  v.w = std::move(w);
  return v;
}

std::vector<Vec3> energy_gradient(const Immersion& im, const GaugeState& g, double cw, double cs, double co) {
  EnergyWeights w{cw, cs, co};
  static const std::vector<double> none;
  return evaluate_energy(im.positions, im.mesh->faces, co != 0.0 ? g.g0_area : none, w, true).grad;
}

std::vector<Vec3> energy_gradient_fd(const Immersion& im, const GaugeState& g, double cw, double cs, double co,
                                     double h) {
  EnergyWeights w{cw, cs, co};
  static const std::vector<double> none;
  const auto& g0 = co != 0.0 ? g.g0_area : none;
  const double step = h * mesh_diameter(im.positions);
  const int n = im.vertexCount();
  std::vector<Vec3> grad(n, Vec3::Zero());
#pragma omp parallel
  {
    std::vector<Vec3> x = im.positions;
#pragma omp for schedule(static)
    for (int v = 0; v < n; ++v)
      for (int c = 0; c < 3; ++c) {
        const double x0 = x[v][c];
        x[v][c] = x0 + step;
        double fp = evaluate_energy(x, im.mesh->faces, g0, w, false).value;
        x[v][c] = x0 - step;
        double fm = evaluate_energy(x, im.mesh->faces, g0, w, false).value;
        x[v][c] = x0;
        grad[v][c] = (fp - fm) / (2.0 * step);
      }
  }
  return grad;
}

VariationField grad_fd(const Immersion& im, const GaugeState& g, const ViscosityParams& p, double h) {
  p.check();
  if (!(h > 0)) throw ParameterError("finite-difference step must be positive");
  const double l = 1.0 / std::log(1.0 / p.sigma);
  return make_field(im, energy_gradient_fd(im, g, 1.0, p.sigma * p.sigma, l, h));
}

VariationField grad_analytic(const Immersion& im, const GaugeState& g, const ViscosityParams& p) {
  p.check();
  const double l = 1.0 / std::log(1.0 / p.sigma);
  return make_field(im, energy_gradient(im, g, 1.0, p.sigma * p.sigma, l));
}

double integral_fH(const Immersion& im, const ScalarFn& f) {
  Fields s = buildFields(im);
  double acc = 0.0;
  for (std::size_t v = 0; v < s.A.size(); ++v) acc += f(s.H[v]) * s.A[v];
  return acc;
}

double first_variation_fH(const Immersion& im, const ScalarFn& f, const ScalarFn& f_prime,
                          const std::vector<Vec3>& w) {
  if (static_cast<int>(w.size()) != im.vertexCount()) throw ParameterError("field length mismatch");
  Fields s = buildFields(im);
  CurrentSpec c{f, f_prime};
  auto M = currentField(im, s, c);
  const auto& faces = im.mesh->faces;
  double acc = 0.0;
  for (std::size_t f = 0; f < faces.size(); ++f) {
    const Face& t = faces[f];
    Mat3 dw = face_gradient(s.ff[f], w[t[0]], w[t[1]], w[t[2]]);
    acc += s.ff[f].area * frob(M[f], dw);
  }
  return -0.5 * acc;
}

OnofriVariation first_variation_onofri(const Immersion& im, const GaugeState& g, const std::vector<Vec3>& w,
                                       bool literal_alpha_coefficient) {
  if (static_cast<int>(w.size()) != im.vertexCount()) throw ParameterError("field length mismatch");
  if (!is_balanced(im, g)) throw PreconditionError("Onofri variation requires an Aubin gauge");
  OnofriVariation r;
  auto grad = energy_gradient(im, g, 0.0, 0.0, 1.0);
  for (std::size_t v = 0; v < w.size(); ++v) r.exact += grad[v].dot(w[v]);

  Fields s = buildFields(im);
  CurrentSpec c;
  c.l = 1.0;
  c.g = &g;
  c.literal_alpha = literal_alpha_coefficient;
  c.onofri_only = true;
  auto M = currentField(im, s, c);
  const auto& faces = im.mesh->faces;
  double acc = 0.0;
  for (std::size_t f = 0; f < faces.size(); ++f) {
    const Face& t = faces[f];
    Mat3 dw = face_gradient(s.ff[f], w[t[0]], w[t[1]], w[t[2]]);
    acc += s.ff[f].area * frob(M[f], dw);
  }
  r.structural = -0.5 * acc;
  return r;
}

ConservationReport conservation_residuals(const Immersion& im, const GaugeState& g, const ViscosityParams& p) {
  p.check();
  const double s2 = p.sigma * p.sigma;
  const double l = 1.0 / std::log(1.0 / p.sigma);
  Fields s = buildFields(im);
  CurrentSpec c;
  c.f = [s2](double t) { return t * t + s2 * (1 + t * t) * (1 + t * t); };
  c.fp = [s2](double t) { return 2 * t + 4 * s2 * t * (1 + t * t); };
  c.l = l;
  c.g = &g;
  auto M = currentField(im, s, c);

  const auto& x = im.positions;
  const auto& faces = im.mesh->faces;
  const int n = im.vertexCount();
  ConservationReport r;
  r.closedness_field = weakDivergence(im, s, M);
  for (const auto& v : r.closedness_field) r.dL_closedness += v.norm();

  Vec3 center = Vec3::Zero();
  for (std::size_t f = 0; f < faces.size(); ++f) {
    const Face& t = faces[f];
    center += s.ff[f].area * (x[t[0]] + x[t[1]] + x[t[2]]) / 3.0;
  }
  center /= s.area;

  std::vector<double> fv(n), fpv(n), fph(n), ea(n);
  for (int v = 0; v < n; ++v) {
    fv[v] = c.f(s.H[v]);
    fpv[v] = c.fp(s.H[v]);
    fph[v] = fpv[v] * s.H[v];
    ea[v] = std::exp(-2.0 * g.alpha[v]);
  }
  std::vector<double> sl(n, 0.0);
  std::vector<Vec3> vl(n, Vec3::Zero()), dcurl(n, Vec3::Zero());
  r.codazzi_per_face.assign(faces.size(), 0.0);

  // vertex shape tensors for the Codazzi check
  std::vector<Mat3> vs(n, Mat3::Zero());
  std::vector<double> vw(n, 0.0);
  for (std::size_t f = 0; f < faces.size(); ++f)
    for (int k = 0; k < 3; ++k) {
      vs[faces[f][k]] += s.ff[f].area * s.shape[f];
      vw[faces[f][k]] += s.ff[f].area;
    }
  auto nrm = vertex_normals(x, faces);
  for (int v = 0; v < n; ++v) {
    Mat3 P = Mat3::Identity() - nrm[v] * nrm[v].transpose();
    vs[v] = P * (vs[v] / vw[v]) * P;
  }

  for (std::size_t f = 0; f < faces.size(); ++f) {
    const Face& t = faces[f];
    const FaceFrame& fr = s.ff[f];
    auto [u1, u2] = orientedFrame(x, t, fr);
    Vec3 cf = (x[t[0]] + x[t[1]] + x[t[2]]) / 3.0 - center;
    const double rhs_s =
        2.0 * (mean3(fph, t) - 2.0 * mean3(fv, t) + l * (-kFourPi * mean3(ea, t) + kFourPi / s.area));
    Vec3 gfp = face_gradient(fr, fpv[t[0]], fpv[t[1]], fpv[t[2]]);
    Vec3 ga = face_gradient(fr, g.alpha[t[0]], g.alpha[t[1]], g.alpha[t[2]]);
    Vec3 dD1 = s.shape[f] * u1, dD2 = s.shape[f] * u2;
    Vec3 rhs_v = (u1 * gfp.dot(u2) - u2 * gfp.dot(u1)) - 2.0 * l * (ga.dot(u1) * dD2 - ga.dot(u2) * dD1);
    for (int k = 0; k < 3; ++k) {
      const Vec3& gk = fr.grad[k];
      const int v = t[k];
      sl[v] += -fr.area * (M[f].transpose() * cf).dot(gk) - fr.area * rhs_s / 3.0;
      vl[v] += -fr.area * cf.cross(M[f] * gk) - fr.area * rhs_v / 3.0;
      dcurl[v] += fr.area * (dD1 * gk.dot(u2) - dD2 * gk.dot(u1));
    }
    // Codazzi: tangential part of (D_u1 S) u2 - (D_u2 S) u1
    Mat3 d1 = Mat3::Zero(), d2 = Mat3::Zero();
    for (int k = 0; k < 3; ++k) {
      d1 += vs[t[k]] * fr.grad[k].dot(u1);
      d2 += vs[t[k]] * fr.grad[k].dot(u2);
    }
    Vec3 cod = s.proj[f] * (d1 * u2 - d2 * u1);
    r.codazzi_per_face[f] = cod.norm();
    r.codazzi += cod.norm() * fr.area;
  }
  for (int v = 0; v < n; ++v) {
    r.scalar_law += std::abs(sl[v]);
    r.vector_law += vl[v].norm();
    r.D_curl += dcurl[v].norm();
  }
  return r;
}

ELResidual willmore_el_residual(const Immersion& im) {
  Fields s = buildFields(im);
  CurrentSpec c;
  c.f = [](double t) { return t * t; };
  c.fp = [](double t) { return 2 * t; };
  auto M = currentField(im, s, c);
  // the current of f = t^2 is twice the bracket
  for (auto& m : M) m *= 0.5;
  ELResidual r;
  r.residual = weakDivergence(im, s, M);
  double acc = 0.0;
  for (std::size_t v = 0; v < r.residual.size(); ++v) {
    r.residual[v] /= s.A[v];
    acc += r.residual[v].squaredNorm() * s.A[v];
  }
  r.norm = std::sqrt(acc);
  return r;
}

Vec3 willmore_residue(const Immersion& im, const std::vector<int>& loop) {
  EdgeFaceMap em(*im.mesh);
  checkLoop(em, loop, im.vertexCount());
  Fields s = buildFields(im);
  const auto& x = im.positions;
  Vec3 acc = Vec3::Zero();
  for (std::size_t k = 0; k < loop.size(); ++k) {
    int a = loop[k], b = loop[(k + 1) % loop.size()];
    int f = em.left(a, b);
    const Face& t = im.mesh->faces[f];
    const FaceFrame& fr = s.ff[f];
    Vec3 tau = x[b] - x[a];
    double len = tau.norm();
    Vec3 nu = (tau / len).cross(fr.normal);
    std::array<Vec3, 3> hn;
    for (int j = 0; j < 3; ++j) hn[j] = s.H[t[j]] * s.np[t[j]];
    double hf = mean3(s.H, t);
    Mat3 m = face_gradient(fr, hn[0], hn[1], hn[2]) -
             2.0 * hf * face_gradient(fr, s.np[t[0]], s.np[t[1]], s.np[t[2]]) - hf * hf * s.proj[f];
    acc += len * (m * nu);
  }
  return acc;
}

Vec3 first_residue(const Immersion& im, const std::vector<int>& loop, FirstResidueMode mode) {
  EdgeFaceMap em(*im.mesh);
  checkLoop(em, loop, im.vertexCount());
  Fields s = buildFields(im);
  const auto& x = im.positions;
  const double coef = mode == FirstResidueMode::NormalProjection ? 3.0 : 3.0 * std::numbers::pi;
  Vec3 acc = Vec3::Zero();
  for (std::size_t k = 0; k < loop.size(); ++k) {
    int a = loop[k], b = loop[(k + 1) % loop.size()];
    int f = em.left(a, b);
    const Face& t = im.mesh->faces[f];
    const FaceFrame& fr = s.ff[f];
    Vec3 tau = x[b] - x[a];
    double len = tau.norm();
    Vec3 th = tau / len;
    Vec3 nu = th.cross(fr.normal);
    std::array<Vec3, 3> hn;
    for (int j = 0; j < 3; ++j) hn[j] = s.H[t[j]] * s.np[t[j]];
    Vec3 dH = face_gradient(fr, hn[0], hn[1], hn[2]) * nu;
    // face normal, not interpolated vertex normals: nu is exactly tangent to it
    Vec3 nf = -fr.normal;
    Vec3 hvec = mean3(s.H, t) * nf;
    Vec3 dn = face_gradient(fr, s.np[t[0]], s.np[t[1]], s.np[t[2]]) * th;
    acc += len * (dH - coef * nf * nf.dot(dH) + dn.cross(hvec));
  }
  return acc;
}

std::vector<int> region_boundary_loop(const TriangulatedSphere& mesh, const std::function<bool(const Vec3&)>& inside) {
  std::vector<char> in(mesh.faces.size(), 0);
  for (int f = 0; f < mesh.faceCount(); ++f) {
    const Face& t = mesh.faces[f];
    in[f] = inside(mesh.vertices[t[0]]) && inside(mesh.vertices[t[1]]) && inside(mesh.vertices[t[2]]);
  }
  EdgeFaceMap em(mesh);
  std::unordered_map<int, int> next;
  for (int f = 0; f < mesh.faceCount(); ++f) {
    if (!in[f]) continue;
    for (int k = 0; k < 3; ++k) {
      int a = mesh.faces[f][k], b = mesh.faces[f][(k + 1) % 3];
      int other = em.left(b, a);
      if (other >= 0 && in[other]) continue;
      if (!next.emplace(a, b).second) throw ParameterError("region boundary is not a simple loop");
    }
  }
  if (next.empty()) throw ParameterError("region has no boundary");
  std::vector<int> loop;
  int start = next.begin()->first, v = start;
  do {
    loop.push_back(v);
    auto it = next.find(v);
    if (it == next.end()) throw ParameterError("region boundary is open");
    v = it->second;
    if (loop.size() > next.size()) throw ParameterError("region boundary is not a simple loop");
  } while (v != start);
  if (loop.size() != next.size()) throw ParameterError("region boundary has several components");
  return loop;
}

double lagrange_multiplier(const Immersion& im, const GaugeState& g, const ViscosityParams& p) {
  if (!p.area_constrained) throw PreconditionError("Lagrange multiplier requires an area-constrained problem");
  if (!is_balanced(im, g)) throw PreconditionError("Lagrange multiplier requires an Aubin gauge");
  return *relaxed_energy(im, g, p).multiplier;
}

}  // namespace wm
