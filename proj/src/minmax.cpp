#include "wm/minmax.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <stdexcept>

#include "json.hpp"

#include "wm/kernel.hpp"
#include "wm/mesh_io.hpp"

namespace wm {

namespace fs = std::filesystem;

namespace {

constexpr double kWidthRoundoff = 1e-12;

void requireSameMesh(const Immersion& a, const Immersion& b, const std::string& what) {
  if (a.mesh != b.mesh && (a.mesh->faces != b.mesh->faces || a.vertexCount() != b.vertexCount()))
    throw ParameterError(what + " does not share the path mesh");
}

GaugeState identityGauge(const Immersion& im) { return conformal_factor(im, MobiusS2::identity()); }

EnergyWeights weightsFor(const ViscosityParams& p, WidthEnergy e) {
  if (e == WidthEnergy::WillmoreOnly) return {1.0, 0.0, 0.0};
  return {1.0, p.sigma * p.sigma, 1.0 / std::log(1.0 / p.sigma)};
}

void rescaleToUnitArea(std::vector<Vec3>& x, const std::vector<Face>& faces) {
  Vec3 c = Vec3::Zero();
  for (const Vec3& v : x) c += v;
  c /= static_cast<double>(x.size());
  double area = 0.0;
  for (const Face& f : faces) area += 0.5 * (x[f[1]] - x[f[0]]).cross(x[f[2]] - x[f[0]]).norm();
  const double s = 1.0 / std::sqrt(area);
  for (Vec3& v : x) v = c + s * (v - c);
}

double dot(const std::vector<Vec3>& a, const std::vector<Vec3>& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i].dot(b[i]);
  return s;
}

const EnergyBreakdown& cachedEnergy(PathState& path, int k, const ViscosityParams& p, WidthEnergy e) {
  if (!path.cache[k]) path.cache[k] = frame_energy(path.frames[k], path.gauges[k], p, e);
  return *path.cache[k];
}

bool isPinned(const PathState& path, int k) { return path.endpoints_pinned && (k == 0 || k == path.size() - 1); }

// Energy-equidistant redistribution in the L2 metric on positions. Returns
// false (and leaves the path untouched) if an interpolated frame is degenerate.
bool reparametrize(PathState& path) {
  const int m = path.size();
  std::vector<double> s(m, 0.0);
  for (int k = 1; k < m; ++k) {
    double d = 0.0;
    for (int v = 0; v < path.frames[k].vertexCount(); ++v)
      d += (path.frames[k].positions[v] - path.frames[k - 1].positions[v]).squaredNorm();
    s[k] = s[k - 1] + std::sqrt(d);
  }
  if (s.back() <= 0.0) return false;
  std::vector<Immersion> next = path.frames;
  for (int j = 1; j < m - 1; ++j) {
    const double target = s.back() * j / (m - 1);
    int k = static_cast<int>(std::upper_bound(s.begin(), s.end(), target) - s.begin()) - 1;
    k = std::clamp(k, 0, m - 2);
    const double span = s[k + 1] - s[k];
    const double t = span > 0 ? (target - s[k]) / span : 0.0;
    std::vector<Vec3> x(path.frames[k].positions.size());
    for (std::size_t v = 0; v < x.size(); ++v)
      x[v] = (1 - t) * path.frames[k].positions[v] + t * path.frames[k + 1].positions[v];
    try {
      next[j] = make_immersion(path.mesh, std::move(x));
    } catch (const GeometryError&) {
      return false;
    }
  }
  path.frames = std::move(next);
  return true;
}

}  // namespace

PathState init_path(const Immersion& start, const Immersion& end, int frames) {
  if (frames < 3) throw ParameterError("a path needs at least 3 frames");
  requireSameMesh(start, end, "end frame");
  std::vector<Immersion> interior;
  for (int k = 1; k < frames - 1; ++k) {
    const double t = static_cast<double>(k) / (frames - 1);
    std::vector<Vec3> x(start.positions.size());
    for (std::size_t v = 0; v < x.size(); ++v) x[v] = start.positions[v] + t * (end.positions[v] - start.positions[v]);
    try {
      interior.push_back(make_immersion(start.mesh, std::move(x)));
    } catch (const GeometryError& e) {
      throw GeometryError("interpolated frame " + std::to_string(k) + " is degenerate: " + e.what(), e.face);
    }
  }
  return init_path(start, end, interior);
}

PathState init_path(const Immersion& start, const Immersion& end, const std::vector<Immersion>& interior) {
  if (interior.empty()) throw ParameterError("a path needs at least 3 frames");
  requireSameMesh(start, end, "end frame");
  PathState p;
  p.mesh = start.mesh;
  p.frames.push_back(make_immersion(p.mesh, start.positions));
  for (std::size_t k = 0; k < interior.size(); ++k) {
    requireSameMesh(start, interior[k], "frame " + std::to_string(k + 1));
    p.frames.push_back(make_immersion(p.mesh, interior[k].positions));
  }
  p.frames.push_back(make_immersion(p.mesh, end.positions));
  for (const auto& f : p.frames) p.gauges.push_back(identityGauge(f));
  p.cache.resize(p.frames.size());
  return p;
}

PathFiles load_path(const std::string& dir) {
  const fs::path root(dir);
  std::ifstream in(root / "manifest.json");
  if (!in) throw IOError("cannot open " + (root / "manifest.json").string());
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw IOError(std::string("malformed manifest: ") + e.what());
  }
  if (!j.contains("mesh") || !j.contains("frames") || !j["frames"].is_array())
    throw IOError("manifest needs 'mesh' and 'frames'");
  MeshData ref = read_mesh((root / j["mesh"].get<std::string>()).string());
  TriangulatedSphere s;
  s.faces = ref.faces;
  for (const Vec3& v : ref.positions) {
    if (std::abs(v.norm() - 1.0) > 1e-6) throw ParameterError("reference mesh vertices must lie on the unit sphere");
    s.vertices.push_back(v.normalized());
  }
  validate_sphere(s);
  auto mesh = std::make_shared<const TriangulatedSphere>(std::move(s));
  std::vector<Immersion> frames;
  for (const auto& name : j["frames"]) {
    MeshData f = read_mesh((root / name.get<std::string>()).string());
    if (f.positions.size() != mesh->vertices.size() || f.faces != mesh->faces)
      throw ParameterError("frame " + name.get<std::string>() + " does not share the reference combinatorics");
    frames.push_back(make_immersion(mesh, std::move(f.positions)));
  }
  if (frames.size() < 3) throw ParameterError("a path needs at least 3 frames");
  PathFiles out;
  std::vector<Immersion> interior(frames.begin() + 1, frames.end() - 1);
  out.path = init_path(frames.front(), frames.back(), interior);
  out.path.endpoints_pinned = j.value("pinned", true);
  out.start_volume = signed_volume(frames.front());
  out.end_volume = signed_volume(frames.back());
  out.everting = std::abs(out.start_volume + out.end_volume) <= 1e-6 * std::abs(out.start_volume) &&
                 std::abs(out.start_volume) > 0;
  return out;
}

void save_path(const std::string& dir, const PathState& path) {
  fs::create_directories(dir);
  const fs::path root(dir);
  write_mesh((root / "mesh.off").string(), path.mesh->vertices, path.mesh->faces);
  nlohmann::json j;
  j["mesh"] = "mesh.off";
  j["pinned"] = path.endpoints_pinned;
  j["frames"] = nlohmann::json::array();
  for (int k = 0; k < path.size(); ++k) {
    char name[32];
    std::snprintf(name, sizeof name, "frame%03d.off", k);
    write_mesh((root / name).string(), path.frames[k].positions, path.mesh->faces);
    j["frames"].push_back(name);
  }
  std::ofstream out(root / "manifest.json");
  if (!out) throw IOError("cannot write manifest in " + dir);
  out << j.dump(2) << '\n';
}

EnergyBreakdown frame_energy(const Immersion& im, const GaugeState& g, const ViscosityParams& p, WidthEnergy e) {
  if (e == WidthEnergy::Relaxed) return relaxed_energy(im, g, p);
  static const std::vector<double> none;
  auto k = evaluate_energy(im.positions, im.mesh->faces, none, {1.0, 0.0, 0.0}, false);
  EnergyBreakdown b;
  b.willmore = k.willmore;
  b.area = k.area;
  b.total = k.willmore;
  b.sigma = p.sigma;
  b.mesh_hash = hash_immersion(im);
  return b;
}

DescentResult descend_frame(const Immersion& im, const ViscosityParams& p, int steps, const DescentOptions& opt) {
  return descend_frame(im, identityGauge(im), p, steps, opt);
}

DescentResult descend_frame(const Immersion& im, const GaugeState& g, const ViscosityParams& p, int steps,
                            const DescentOptions& opt) {
  p.check();
  if (steps < 0) throw ParameterError("descent steps must be nonnegative");
  const auto& faces = im.mesh->faces;
  const EnergyWeights w = weightsFor(p, opt.energy);
  static const std::vector<double> none;
  const std::vector<double>& g0 = w.co != 0.0 ? g.g0_area : none;
  const StepRule& r = opt.rule;

  std::vector<Vec3> x = im.positions;
  if (opt.area_constrained) rescaleToUnitArea(x, faces);
  const double diam = mesh_diameter(x);

  DescentResult res;
  KernelResult cur = evaluate_energy(x, faces, g0, w, true);
  res.energy_trace.push_back(cur.value);
  double t = -1.0;
  for (int it = 0;; ++it) {
    std::vector<Vec3> d = cur.grad;
    if (opt.area_constrained) {
      auto va = area_gradient(x, faces);
      const double mu = dot(d, va) / dot(va, va);
      for (std::size_t v = 0; v < d.size(); ++v) d[v] -= mu * va[v];
      res.projection_coefficient = mu;
    }
    double gi = 0.0;
    for (const Vec3& v : d) gi = std::max(gi, v.norm());
    res.grad_inf = gi;
    if (gi * diam < r.gtol * (1.0 + std::abs(cur.value))) {
      res.converged = true;
      break;
    }
    if (it >= steps) break;
    if (t < 0) t = r.initial_fraction * diam / gi;
    const double slope = -dot(d, d);
    int failures = 0;
    bool accepted = false;
    while (!accepted) {
      std::vector<Vec3> trial(x.size());
      for (std::size_t v = 0; v < x.size(); ++v) trial[v] = x[v] - t * d[v];
      if (opt.area_constrained) rescaleToUnitArea(trial, faces);
      try {
        face_frames(trial, faces, true);
        double e = evaluate_energy(trial, faces, g0, w, false).value;
        if (e < cur.value && e <= cur.value + r.armijo * t * slope) {
          x = std::move(trial);
          cur = evaluate_energy(x, faces, g0, w, true);
          accepted = true;
          t *= r.grow;
          break;
        }
      } catch (const GeometryError&) {
      }
      t *= r.shrink;
      if (++failures >= r.max_failures) break;
    }
    if (!accepted) {
      res.stalled = true;
      break;
    }
    ++res.accepted;
    res.energy_trace.push_back(cur.value);
  }
  res.frame = make_immersion(im.mesh, std::move(x));
  return res;
}

void MinmaxConfig::check() const {
  if (sigma_schedule.empty()) throw ParameterError("empty sigma schedule");
  for (std::size_t k = 0; k < sigma_schedule.size(); ++k) {
    const double s = sigma_schedule[k];
    if (!(s > 0 && s < 1)) throw ParameterError("sigma values must lie in (0, 1)");
    if (k > 0 && !(s < sigma_schedule[k - 1])) throw ParameterError("sigma schedule must be strictly decreasing");
  }
  if (!(struwe_tol > 0)) throw ParameterError("struwe_tol must be positive");
  if (inner_steps < 0 || max_sweeps < 1 || window < 0) throw ParameterError("bad sweep parameters");
  if (!(bubble_epsilon > 0) || !(bubble_radius > 0)) throw ParameterError("bubble parameters must be positive");
}

std::vector<double> MinmaxConfig::geometric_schedule(double from, double to) {
  if (!(from > 0 && from < 1 && to > 0 && to <= from)) throw ParameterError("bad geometric schedule bounds");
  std::vector<double> s;
  for (double v = from; v >= to * (1 - 1e-12); v /= std::numbers::sqrt2) s.push_back(v);
  return s;
}

RelaxResult minmax_relax(PathState& path, const ViscosityParams& p, const MinmaxConfig& cfg) {
  const int m = path.size();
  if (m < 3) throw ParameterError("a path needs at least 3 frames");
  RelaxResult out;
  DescentOptions dopt{cfg.step_rule, cfg.area_constrained, cfg.energy};

  auto width = [&](std::vector<int>& argmax) {
    double wmax = -std::numeric_limits<double>::infinity();
    for (int k = 0; k < m; ++k) wmax = std::max(wmax, cachedEnergy(path, k, p, cfg.energy).total);
    argmax.clear();
    for (int k = 0; k < m; ++k)
      if (cachedEnergy(path, k, p, cfg.energy).total >= wmax - kWidthRoundoff * std::abs(wmax)) argmax.push_back(k);
    return wmax;
  };

  std::vector<int> argmax;
  double w = width(argmax);
  out.trace.push_back({p.sigma, 0, w, argmax});
  for (int sweep = 1; sweep <= cfg.max_sweeps; ++sweep) {
    if (std::any_of(argmax.begin(), argmax.end(), [&](int k) { return isPinned(path, k); })) {
      out.reason = StopReason::PinnedMaximum;
      return out;
    }
    std::vector<char> mark(m, 0);
    for (int a : argmax)
      for (int k = std::max(0, a - cfg.window); k <= std::min(m - 1, a + cfg.window); ++k)
        if (!isPinned(path, k)) mark[k] = 1;
    if (std::none_of(mark.begin(), mark.end(), [](char c) { return c != 0; })) {
      out.reason = StopReason::NothingToDo;
      return out;
    }
    for (int k = 0; k < m; ++k) {
      if (!mark[k]) continue;
      auto r = descend_frame(path.frames[k], path.gauges[k], p, cfg.inner_steps, dopt);
      if (r.accepted > 0) {
        path.frames[k] = std::move(r.frame);
        path.invalidate(k);
      }
    }
    if (cfg.reparametrize) {
      PathState backup = path;
      if (reparametrize(path)) {
        for (int k = 1; k < m - 1; ++k) {
          path.gauges[k] = cfg.gauge == GaugePolicy::Identity ? identityGauge(path.frames[k]) : aubin_balance(path.frames[k]);
          path.invalidate(k);
        }
        std::vector<int> tmp;
        double old = 0.0;
        for (int k = 0; k < m; ++k) old = std::max(old, cachedEnergy(backup, k, p, cfg.energy).total);
        if (width(tmp) > old)
          path = std::move(backup);
        else
          path.reparametrized = true;
      }
    }
    const double prev = w;
    w = width(argmax);
    if (w > prev + kWidthRoundoff * std::abs(prev))
      throw std::logic_error("minmax width increased from " + std::to_string(prev) + " to " + std::to_string(w));
    out.trace.push_back({p.sigma, sweep, w, argmax});
    if (prev - w <= cfg.stagnation_tol * std::abs(prev)) {
      out.reason = StopReason::Stagnation;
      return out;
    }
  }
  out.reason = StopReason::MaxSweeps;
  return out;
}

std::vector<double> bending_density(const Immersion& im) {
  const auto& faces = im.mesh->faces;
  auto ff = face_frames(im.positions, faces, true);
  auto n = vertex_normals(im.positions, faces);
  std::vector<double> e(im.vertexCount(), 0.0);
  for (std::size_t f = 0; f < faces.size(); ++f) {
    const Face& t = faces[f];
    double d = face_gradient(ff[f], n[t[0]], n[t[1]], n[t[2]]).squaredNorm() * ff[f].area / 3.0;
    for (int v : t) e[v] += d;
  }
  return e;
}

std::vector<Bubble> detect_bubbles(const Immersion& im, double epsilon, double radius) {
  if (!(epsilon > 0)) throw ParameterError("bubble threshold must be positive");
  if (!(radius > 0)) throw ParameterError("bubble radius must be positive");
  const auto e = bending_density(im);
  const auto& p = im.mesh->vertices;
  const int n = im.vertexCount();
  const double cr = std::cos(std::min(radius, std::numbers::pi));
  std::vector<double> ball(n, 0.0);
#pragma omp parallel for schedule(static)
  for (int c = 0; c < n; ++c) {
    double s = 0.0;
    for (int v = 0; v < n; ++v)
      if (p[c].dot(p[v]) >= cr) s += e[v];
    ball[c] = s;
  }
  std::vector<int> order(n);
  for (int i = 0; i < n; ++i) order[i] = i;
  std::stable_sort(order.begin(), order.end(), [&](int a, int b) { return ball[a] > ball[b]; });
  const double cex = 2.0 * radius >= std::numbers::pi ? -2.0 : std::cos(2.0 * radius);
  std::vector<Bubble> out;
  std::vector<char> excluded(n, 0);
  for (int c : order) {
    if (ball[c] < epsilon) break;
    if (excluded[c]) continue;
    out.push_back({c, radius, ball[c]});
    for (int v = 0; v < n; ++v)
      if (p[c].dot(p[v]) >= cex) excluded[v] = 1;
  }
  return out;
}

double struwe_quantity(const EnergyBreakdown& e) {
  return e.sigma * std::log(1.0 / e.sigma) * e.sigma_derivative;
}

MinmaxReport anneal(PathState& path, const MinmaxConfig& cfg) {
  cfg.check();
  MinmaxReport rep;
  rep.min_struwe = std::numeric_limits<double>::infinity();
  for (double sigma : cfg.sigma_schedule) {
    auto p = ViscosityParams::make(sigma, cfg.area_constrained);
    for (int k = 0; k < path.size(); ++k) {
      if (cfg.gauge == GaugePolicy::AubinPerStage) path.gauges[k] = aubin_balance(path.frames[k]);
      path.invalidate(k);
    }
    auto relax = minmax_relax(path, p, cfg);
    rep.beta_trace.insert(rep.beta_trace.end(), relax.trace.begin(), relax.trace.end());
    SigmaStage st;
    st.sigma = sigma;
    st.reason = relax.reason;
    st.width = relax.trace.back().width;
    st.argmax = relax.trace.back().argmax.front();
    const EnergyBreakdown& e = cachedEnergy(path, st.argmax, p, cfg.energy);
    st.willmore_at_max = e.willmore;
    if (cfg.energy == WidthEnergy::Relaxed) {
      st.struwe = struwe_quantity(e);
    } else {
      st.struwe = 0.0;
    }
    st.accepted = st.struwe < cfg.struwe_tol;
    rep.min_struwe = std::min(rep.min_struwe, st.struwe);
    if (!rep.stages.empty() && st.width > rep.stages.back().width * (1 + 1e-9)) rep.width_monotone_in_sigma = false;
    rep.stages.push_back(st);
    rep.argmax_frames.push_back(st.argmax);
    rep.willmore_at_max.push_back(st.willmore_at_max);
    if (st.accepted) {
      rep.accepted_sigmas.push_back(sigma);
      rep.beta0 = st.willmore_at_max;
    }
  }
  if (rep.beta0) rep.above_lower_bound = *rep.beta0 >= 4.0 * std::numbers::pi * 0.98;
  for (int k = 0; k < path.size(); ++k) {
    rep.bubble_flags.push_back(detect_bubbles(path.frames[k], cfg.bubble_epsilon, cfg.bubble_radius));
    rep.final_energies.push_back(path.cache[k] ? path.cache[k]->total : 0.0);
  }
  rep.reparametrized = path.reparametrized;
  return rep;
}

}  // namespace wm
