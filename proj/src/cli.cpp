#include "wm/cli.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <numbers>
#include <sstream>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "wm/energy.hpp"
#include "wm/fixtures.hpp"
#include "wm/mesh_io.hpp"
#include "wm/minmax.hpp"
#include "wm/variation.hpp"

namespace wm {

namespace {

const std::vector<std::string> kCommands = {"energy",  "gauge", "grad-check", "residual",    "residue",
                                            "minmax", "bubbles", "make-fixture"};

std::string fnv(const std::string& s) {
  std::uint64_t h = 1469598103934665603ull;
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ull;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

MeshPtr referenceFrom(const std::vector<Vec3>& pts, const std::vector<Face>& faces) {
  TriangulatedSphere s;
  s.faces = faces;
  Vec3 c = Vec3::Zero();
  for (const Vec3& p : pts) c += p;
  c /= static_cast<double>(pts.size());
  for (const Vec3& p : pts) {
    Vec3 d = p - c;
    if (d.norm() == 0.0) throw ParameterError("cannot project a vertex at the centroid onto the reference sphere");
    s.vertices.push_back(d.normalized());
  }
  validate_sphere(s);
  return std::make_shared<const TriangulatedSphere>(std::move(s));
}

// icosphere combinatorics when they match exactly, otherwise radial projection
MeshPtr detectReference(const MeshData& m) {
  const std::size_t v = m.positions.size();
  for (int k = 0; k <= 8; ++k) {
    std::size_t expect = 10 * (std::size_t{1} << (2 * k)) + 2;
    if (expect > v) break;
    if (expect == v) {
      auto ico = icosphere(k);
      if (ico->faces == m.faces) return ico;
      break;
    }
  }
  return referenceFrom(m.positions, m.faces);
}

GaugeState gaugeFor(const Immersion& im, const JobConfig& c) {
  if (c.gauge == "identity") return conformal_factor(im, MobiusS2::identity());
  return aubin_balance(im);
}

int levelOf(const Immersion& im) {
  return im.mesh->subdivision_level >= 0 ? im.mesh->subdivision_level : 4;
}

struct Outcome {
  Json results = Json::object();
  Json checks = Json::object();
  std::string mesh_hash;
};

Outcome cmdEnergy(const JobConfig& c) {
  Outcome o;
  auto im = load_immersion(c);
  auto g = gaugeFor(im, c);
  auto p = ViscosityParams::make(c.sigma, c.area_constrained);
  auto e = relaxed_energy(im, g, p);
  o.results["energy"] = to_json(e);
  o.results["onofri"] = to_json(onofri_energy(im, g));
  o.results["gauge"] = to_json(g.mobius);
  o.results["bounds"] = to_json(energy_bounds_report(im, g, p, onofri_tolerance(levelOf(im))));
  o.mesh_hash = e.mesh_hash;
  return o;
}

Outcome cmdGauge(const JobConfig& c) {
  Outcome o;
  auto im = load_immersion(c);
  auto g = aubin_balance(im);
  const double bary = conformal_barycenter(im, g.mobius);
  o.results["mobius"] = to_json(g.mobius);
  o.results["barycenter"] = bary;
  o.results["onofri"] = to_json(onofri_energy(im, g));
  o.results["ghoussoub_lin"] = ghoussoub_lin_check(im, g);
  o.results["liouville_l1"] = liouville_residual(im, g).l1;
  o.checks["balanced"] = bary < 1e-6;
  o.mesh_hash = hash_immersion(im);
  return o;
}

Outcome cmdGradCheck(const JobConfig& c) {
  Outcome o;
  auto im = load_immersion(c);
  auto g = gaugeFor(im, c);
  auto p = ViscosityParams::make(c.sigma);
  auto a = grad_analytic(im, g, p);
  auto f = grad_fd(im, g, p, c.h);
  double diff = 0.0, scale = 0.0;
  for (std::size_t v = 0; v < a.w.size(); ++v) {
    diff = std::max(diff, (a.w[v] - f.w[v]).cwiseAbs().maxCoeff());
    scale = std::max(scale, a.w[v].cwiseAbs().maxCoeff());
  }
  const double rel = scale > 0 ? diff / scale : diff;
  o.results["max_abs_deviation"] = diff;
  o.results["grad_inf"] = scale;
  o.results["max_relative_deviation"] = rel;
  o.results["norm_phi_analytic"] = a.norm_phi;
  o.results["h"] = c.h;
  o.checks["gradient_matches_fd"] = rel < c.tol;
  o.mesh_hash = hash_immersion(im);
  return o;
}

Outcome cmdResidual(const JobConfig& c) {
  Outcome o;
  auto im = load_immersion(c);
  auto g = gaugeFor(im, c);
  auto p = ViscosityParams::make(c.sigma);
  o.results["willmore_el_norm"] = willmore_el_residual(im).norm;
  o.results["conservation"] = to_json(conservation_residuals(im, g, p));
  o.results["liouville_l1"] = liouville_residual(im, g).l1;
  o.mesh_hash = hash_immersion(im);
  return o;
}

Outcome cmdResidue(const JobConfig& c) {
  Outcome o;
  auto im = load_immersion(c);
  std::vector<int> loop = c.loop;
  if (loop.empty()) {
    const double z = c.region_z;
    loop = region_boundary_loop(*im.mesh, [z](const Vec3& p) { return p.z() > z; });
  }
  o.results["loop"] = loop;
  Vec3 w = willmore_residue(im, loop);
  Vec3 f = first_residue(im, loop);
  o.results["willmore_residue"] = to_json(w);
  o.results["willmore_residue_norm"] = w.norm();
  o.results["first_residue"] = to_json(f);
  o.results["first_residue_norm"] = f.norm();
  o.mesh_hash = hash_immersion(im);
  return o;
}

Outcome cmdBubbles(const JobConfig& c) {
  Outcome o;
  auto im = load_immersion(c);
  auto b = detect_bubbles(im, c.epsilon, c.radius);
  Json list = Json::array();
  for (const auto& x : b) list.push_back(to_json(x));
  o.results["bubbles"] = list;
  double total = 0.0;
  for (double e : bending_density(im)) total += e;
  o.results["total_bending"] = total;
  o.mesh_hash = hash_immersion(im);
  return o;
}

Outcome cmdMinmax(const JobConfig& c) {
  Outcome o;
  if (c.path.empty()) throw ParameterError("minmax needs --path");
  auto files = load_path(c.path);
  MinmaxConfig cfg;
  cfg.sigma_schedule = parse_schedule(c.schedule);
  cfg.inner_steps = c.inner_steps;
  cfg.max_sweeps = c.max_sweeps;
  cfg.struwe_tol = c.struwe_tol;
  cfg.area_constrained = c.area_constrained;
  cfg.reparametrize = c.reparametrize;
  cfg.bubble_epsilon = c.epsilon;
  cfg.bubble_radius = c.radius;
  cfg.gauge = c.gauge == "identity" ? GaugePolicy::Identity : GaugePolicy::AubinPerStage;
  auto rep = anneal(files.path, cfg);
  o.results = to_json(rep);
  o.results["frames"] = files.path.size();
  o.results["start_signed_volume"] = files.start_volume;
  o.results["end_signed_volume"] = files.end_volume;
  o.results["everting"] = files.everting;
  if (!rep.stages.empty()) {
    const double w = rep.stages.back().width;
    o.results["final_width_over_16pi"] = w / (16.0 * std::numbers::pi);
    o.results["final_width_above_16pi"] = w >= 16.0 * std::numbers::pi;
  }
  if (rep.beta0) o.results["beta0_over_16pi"] = *rep.beta0 / (16.0 * std::numbers::pi);
  if (!c.dump.empty()) save_path(c.dump, files.path);
  o.mesh_hash = hash_immersion(files.path.frames.front());
  return o;
}

Outcome cmdMakeFixture(const JobConfig& c) {
  Outcome o;
  if (c.name.empty()) throw ParameterError("make-fixture needs a fixture name");
  if (c.file.empty()) throw ParameterError("make-fixture needs an output mesh file");
  auto im = make_fixture(c.name, c.level);
  write_mesh(c.file, im.positions, im.mesh->faces);
  o.results["file"] = c.file;
  o.results["vertices"] = im.vertexCount();
  o.results["faces"] = im.mesh->faces.size();
  o.mesh_hash = hash_immersion(im);
  return o;
}

int exitFor(ErrorKind k) {
  switch (k) {
    case ErrorKind::IO: return kExitIO;
    case ErrorKind::Convergence: return kExitConvergence;
    case ErrorKind::Parameter: return kExitParameter;
    case ErrorKind::Geometry: return kExitGeometry;
    case ErrorKind::Gauge: return kExitGauge;
    case ErrorKind::Precondition: return kExitPrecondition;
  }
  return 1;
}

const char* statusFor(ErrorKind k) {
  switch (k) {
    case ErrorKind::IO: return "io_error";
    case ErrorKind::Convergence: return "convergence_error";
    case ErrorKind::Parameter: return "parameter_error";
    case ErrorKind::Geometry: return "geometry_error";
    case ErrorKind::Gauge: return "gauge_error";
    case ErrorKind::Precondition: return "precondition_error";
  }
  return "error";
}

}  // namespace

std::vector<double> parse_schedule(const std::string& s) {
  if (s == "geometric") return MinmaxConfig::geometric_schedule();
  std::vector<double> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    try {
      std::size_t used = 0;
      out.push_back(std::stod(item, &used));
      if (used != item.size()) throw std::invalid_argument(item);
    } catch (const std::exception&) {
      throw ParameterError("bad sigma in schedule: '" + item + "'");
    }
  }
  if (out.empty()) throw ParameterError("empty schedule");
  return out;
}

std::vector<int> parse_loop(const std::string& s) {
  std::vector<int> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    try {
      std::size_t used = 0;
      out.push_back(std::stoi(item, &used));
      if (used != item.size()) throw std::invalid_argument(item);
    } catch (const std::exception&) {
      throw ParameterError("bad loop vertex: '" + item + "'");
    }
  }
  return out;
}

void JobConfig::validate() const {
  if (std::find(kCommands.begin(), kCommands.end(), command) == kCommands.end())
    throw ParameterError("unknown command '" + command + "'");
  if (!(sigma > 0 && sigma < 1)) throw ParameterError("sigma must lie in (0, 1)");
  if (level < 0 || level > 8) throw ParameterError("level must be in [0, 8]");
  if (!(h > 0)) throw ParameterError("h must be positive");
  if (!(tol > 0)) throw ParameterError("tol must be positive");
  if (gauge != "aubin" && gauge != "identity") throw ParameterError("gauge must be 'aubin' or 'identity'");
  if (!(epsilon > 0) || !(radius > 0)) throw ParameterError("epsilon and radius must be positive");
  for (const std::string* f : {&mesh, &reference})
    if (!f->empty() && !std::ifstream(*f)) throw IOError("cannot open " + *f);
  const bool needsSurface = command != "minmax" && command != "make-fixture";
  if (needsSurface && mesh.empty() && fixture.empty()) throw ParameterError(command + " needs --mesh or --fixture");
  if (!mesh.empty() && !fixture.empty()) throw ParameterError("--mesh and --fixture are exclusive");
  if (command == "minmax") {
    if (path.empty()) throw ParameterError("minmax needs --path");
    if (!std::ifstream(path + "/manifest.json")) throw IOError("no manifest.json in " + path);
    for (double s : parse_schedule(schedule))
      if (!(s > 0 && s < 1)) throw ParameterError("schedule values must lie in (0, 1)");
  }
}

Json JobConfig::to_json() const {
  return {{"command", command},   {"mesh", mesh},         {"reference", reference},
          {"fixture", fixture},   {"path", path},         {"output", output},
          {"dump", dump},         {"sigma", sigma},       {"schedule", schedule},
          {"level", level},       {"h", h},               {"tol", tol},
          {"gauge", gauge},       {"loop", loop},         {"region_z", region_z},
          {"seed", seed},         {"epsilon", epsilon},   {"radius", radius},
          {"inner_steps", inner_steps}, {"max_sweeps", max_sweeps}, {"struwe_tol", struwe_tol},
          {"area_constrained", area_constrained}, {"reparametrize", reparametrize},
          {"name", name},         {"file", file}};
}

JobConfig JobConfig::from_json(const Json& j) {
  if (!j.is_object()) throw ParameterError("config must be a JSON object");
  JobConfig c;
  Json base = c.to_json();
  for (auto it = j.begin(); it != j.end(); ++it) {
    if (!base.contains(it.key())) throw ParameterError("unknown config key '" + it.key() + "'");
    base[it.key()] = it.value();
  }
  try {
    c.command = base["command"];
    c.mesh = base["mesh"];
    c.reference = base["reference"];
    c.fixture = base["fixture"];
    c.path = base["path"];
    c.output = base["output"];
    c.dump = base["dump"];
    c.sigma = base["sigma"];
    c.schedule = base["schedule"];
    c.level = base["level"];
    c.h = base["h"];
    c.tol = base["tol"];
    c.gauge = base["gauge"];
    c.loop = base["loop"].get<std::vector<int>>();
    c.region_z = base["region_z"];
    c.seed = base["seed"];
    c.epsilon = base["epsilon"];
    c.radius = base["radius"];
    c.inner_steps = base["inner_steps"];
    c.max_sweeps = base["max_sweeps"];
    c.struwe_tol = base["struwe_tol"];
    c.area_constrained = base["area_constrained"];
    c.reparametrize = base["reparametrize"];
    c.name = base["name"];
    c.file = base["file"];
  } catch (const Json::exception& e) {
    throw ParameterError(std::string("bad config value: ") + e.what());
  }
  return c;
}

Immersion load_immersion(const JobConfig& c) {
  if (!c.fixture.empty()) {
    // perturbed:amp takes its seed from the config
    if (c.fixture.rfind("perturbed:", 0) == 0 && std::count(c.fixture.begin(), c.fixture.end(), ':') == 1)
      return make_fixture(c.fixture + ":" + std::to_string(c.seed), c.level);
    return make_fixture(c.fixture, c.level);
  }
  MeshData m = read_mesh(c.mesh);
  MeshPtr ref;
  if (!c.reference.empty()) {
    MeshData r = read_mesh(c.reference);
    if (r.faces != m.faces || r.positions.size() != m.positions.size())
      throw ParameterError("reference mesh does not match the immersion's combinatorics");
    ref = referenceFrom(r.positions, r.faces);
  } else {
    ref = detectReference(m);
  }
  return make_immersion(ref, std::move(m.positions));
}

RunReport run(const JobConfig& config) {
#ifdef _OPENMP
  if (const char* t = std::getenv("WM_THREADS")) {
    int n = std::atoi(t);
    if (n > 0) omp_set_num_threads(n);
  }
#endif
  const auto t0 = std::chrono::steady_clock::now();
  RunReport rep;
  Json& j = rep.json;
  j["command"] = config.command;
  j["config_hash"] = fnv(config.to_json().dump());
  j["mesh_hash"] = nullptr;
  j["results"] = Json::object();
  j["checks"] = Json::object();
  try {
    config.validate();
    Outcome o;
    const std::string& cmd = config.command;
    if (cmd == "energy") o = cmdEnergy(config);
    else if (cmd == "gauge") o = cmdGauge(config);
    else if (cmd == "grad-check") o = cmdGradCheck(config);
    else if (cmd == "residual") o = cmdResidual(config);
    else if (cmd == "residue") o = cmdResidue(config);
    else if (cmd == "minmax") o = cmdMinmax(config);
    else if (cmd == "bubbles") o = cmdBubbles(config);
    else o = cmdMakeFixture(config);
    j["results"] = o.results;
    j["checks"] = o.checks;
    j["mesh_hash"] = o.mesh_hash;
    bool ok = true;
    for (auto& [k, v] : o.checks.items()) ok = ok && v.get<bool>();
    j["status"] = ok ? "ok" : "check_failed";
    rep.exit_code = ok ? kExitOk : kExitCheckFailed;
  } catch (const Error& e) {
    j["status"] = statusFor(e.kind());
    j["error"] = e.what();
    rep.exit_code = exitFor(e.kind());
  }
  j["timing_s"] = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  if (!config.output.empty()) {
    std::ofstream out(config.output);
    if (!out) {
      j["status"] = "io_error";
      j["error"] = "cannot write report " + config.output;
      rep.exit_code = kExitIO;
    } else {
      out << j.dump(2) << '\n';
    }
  }
  return rep;
}

}  // namespace wm
