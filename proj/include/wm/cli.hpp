#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "wm/serialize.hpp"

namespace wm {

enum ExitCode : int {
  kExitOk = 0,
  kExitIO = 2,
  kExitCheckFailed = 3,
  kExitConvergence = 4,
  kExitParameter = 5,
  kExitGeometry = 6,
  kExitGauge = 7,
  kExitPrecondition = 8,
};

struct JobConfig {
  std::string command;
  std::string mesh;       // immersion file (OFF/OBJ)
  std::string reference;  // optional reference sphere for mesh
  std::string fixture;    // alternative to mesh: built-in fixture name
  std::string path;       // path directory for minmax
  std::string output;     // report file; empty: stdout only
  std::string dump;       // minmax: directory for the final path
  double sigma = 0.1;
  std::string schedule = "geometric";  // "geometric" or comma-separated sigmas
  int level = 4;
  double h = 1e-5;
  double tol = 1e-4;
  std::string gauge = "aubin";  // aubin | identity
  std::vector<int> loop;
  double region_z = 0.5;  // residue: boundary of {z > region_z} when no loop is given
  std::uint64_t seed = 0;
  double epsilon = 1.0;
  double radius = 0.3;
  int inner_steps = 20;
  int max_sweeps = 50;
  double struwe_tol = 0.5;
  bool area_constrained = false;
  bool reparametrize = false;
  std::string name;  // make-fixture: fixture name
  std::string file;  // make-fixture: mesh file to write

  void validate() const;
  Json to_json() const;
  // Keys of j override the defaults; unknown keys are parameter errors.
  static JobConfig from_json(const Json& j);
};

struct RunReport {
  Json json;
  int exit_code = kExitOk;
};

RunReport run(const JobConfig& config);

// Immersion from config.mesh (with reference detection) or config.fixture.
Immersion load_immersion(const JobConfig& config);

std::vector<double> parse_schedule(const std::string& s);
std::vector<int> parse_loop(const std::string& s);

}  // namespace wm
