#include <fstream>
#include <functional>
#include <iostream>

#include "CLI11.hpp"

#include "wm/cli.hpp"

namespace {

// Options set on the command line override values from --config.
struct Binder {
  std::vector<std::pair<CLI::Option*, std::function<void(wm::JobConfig&)>>> items;

  template <class T>
  void add(CLI::App* app, const std::string& flag, T wm::JobConfig::*field, const std::string& help) {
    auto value = std::make_shared<T>();
    CLI::Option* opt = app->add_option(flag, *value, help);
    items.emplace_back(opt, [value, field](wm::JobConfig& c) { c.*field = *value; });
  }
  void flag(CLI::App* app, const std::string& name, bool wm::JobConfig::*field, const std::string& help) {
    auto value = std::make_shared<bool>(false);
    CLI::Option* opt = app->add_flag(name, *value, help);
    items.emplace_back(opt, [value, field](wm::JobConfig& c) { c.*field = *value; });
  }
  void apply(wm::JobConfig& c) const {
    for (const auto& [opt, set] : items)
      if (opt->count() > 0) set(c);
  }
};

void surfaceOptions(CLI::App* sub, Binder& b) {
  b.add(sub, "--mesh", &wm::JobConfig::mesh, "immersion mesh (OFF or OBJ)");
  b.add(sub, "--reference", &wm::JobConfig::reference, "reference sphere mesh with the same combinatorics");
  b.add(sub, "--fixture", &wm::JobConfig::fixture, "built-in fixture instead of --mesh");
  b.add(sub, "--level", &wm::JobConfig::level, "icosphere level for --fixture");
  b.add(sub, "--seed", &wm::JobConfig::seed, "seed for randomized fixtures");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"wmtool: discrete relaxed Willmore energy toolkit"};
  app.require_subcommand(1);
  std::string config_file;
  app.add_option("--config", config_file, "JSON job config; command-line flags override it");

  Binder b;
  b.add(&app, "--output,-o", &wm::JobConfig::output, "write the run report here");

  auto* energy = app.add_subcommand("energy", "relaxed energy, Onofri energy and bounds");
  surfaceOptions(energy, b);
  b.add(energy, "--sigma", &wm::JobConfig::sigma, "viscosity parameter in (0,1)");
  b.add(energy, "--gauge", &wm::JobConfig::gauge, "aubin or identity");
  b.flag(energy, "--area-constrained", &wm::JobConfig::area_constrained, "report the Lagrange multiplier");

  auto* gauge = app.add_subcommand("gauge", "Aubin balance and gauge diagnostics");
  surfaceOptions(gauge, b);

  auto* grad = app.add_subcommand("grad-check", "analytic gradient against central differences");
  grad->set_help_flag("--help", "Print this help message and exit");  // -h would clash with --h
  surfaceOptions(grad, b);
  b.add(grad, "--sigma", &wm::JobConfig::sigma, "viscosity parameter in (0,1)");
  b.add(grad, "--h", &wm::JobConfig::h, "step relative to the mesh diameter");
  b.add(grad, "--tol", &wm::JobConfig::tol, "maximum relative deviation");
  b.add(grad, "--gauge", &wm::JobConfig::gauge, "aubin or identity");

  auto* residual = app.add_subcommand("residual", "Euler-Lagrange and conservation residuals");
  surfaceOptions(residual, b);
  b.add(residual, "--sigma", &wm::JobConfig::sigma, "viscosity parameter in (0,1)");
  b.add(residual, "--gauge", &wm::JobConfig::gauge, "aubin or identity");

  auto* residue = app.add_subcommand("residue", "Willmore and first residues around a loop");
  surfaceOptions(residue, b);
  auto loop_text = std::make_shared<std::string>();
  auto* loop_opt = residue->add_option("--loop", *loop_text, "comma-separated vertex cycle");
  b.add(residue, "--region-z", &wm::JobConfig::region_z,
        "without --loop: boundary of the reference cap z > value");

  auto* minmax = app.add_subcommand("minmax", "annealed minmax relaxation of a path");
  b.add(minmax, "--path", &wm::JobConfig::path, "path directory with manifest.json");
  b.add(minmax, "--schedule", &wm::JobConfig::schedule, "geometric or comma-separated sigmas");
  b.add(minmax, "--inner-steps", &wm::JobConfig::inner_steps, "descent steps per frame and sweep");
  b.add(minmax, "--max-sweeps", &wm::JobConfig::max_sweeps, "sweeps per sigma");
  b.add(minmax, "--struwe-tol", &wm::JobConfig::struwe_tol, "acceptance threshold on s(sigma)");
  b.add(minmax, "--gauge", &wm::JobConfig::gauge, "aubin (rebalance per sigma) or identity");
  b.add(minmax, "--epsilon", &wm::JobConfig::epsilon, "bubble energy threshold");
  b.add(minmax, "--radius", &wm::JobConfig::radius, "bubble ball radius (radians)");
  b.add(minmax, "--dump", &wm::JobConfig::dump, "write the relaxed path here");
  b.flag(minmax, "--area-constrained", &wm::JobConfig::area_constrained, "unit-area constraint");
  b.flag(minmax, "--reparametrize", &wm::JobConfig::reparametrize, "redistribute frames after each sweep");

  auto* bubbles = app.add_subcommand("bubbles", "bending-energy concentration balls");
  surfaceOptions(bubbles, b);
  b.add(bubbles, "--epsilon", &wm::JobConfig::epsilon, "energy threshold");
  b.add(bubbles, "--radius", &wm::JobConfig::radius, "ball radius (radians)");

  auto* fixture = app.add_subcommand("make-fixture", "write a test surface");
  b.add(fixture, "name", &wm::JobConfig::name, "sphere, ellipsoid:a:b:c, inverted-catenoid[:c], bump-sphere:amp, ...");
  b.add(fixture, "--level", &wm::JobConfig::level, "icosphere level");
  b.add(fixture, "--file", &wm::JobConfig::file, "output mesh file");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return wm::kExitParameter;
  }

  wm::JobConfig cfg;
  try {
    if (!config_file.empty()) {
      std::ifstream in(config_file);
      if (!in) {
        std::cerr << "cannot open config " << config_file << '\n';
        return wm::kExitIO;
      }
      cfg = wm::JobConfig::from_json(wm::Json::parse(in));
    }
    b.apply(cfg);
    cfg.command = app.get_subcommands().front()->get_name();
    if (loop_opt->count() > 0) cfg.loop = wm::parse_loop(*loop_text);
  } catch (const wm::Error& e) {
    std::cerr << e.what() << '\n';
    return wm::kExitParameter;
  } catch (const wm::Json::exception& e) {
    std::cerr << "bad config: " << e.what() << '\n';
    return wm::kExitParameter;
  }

  wm::RunReport rep = wm::run(cfg);
  std::cout << rep.json.dump(2) << '\n';
  return rep.exit_code;
}
