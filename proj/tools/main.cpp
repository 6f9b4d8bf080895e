#include <cmath>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "neurodens/errors.hpp"
#include "neurodens/scenario.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitConfig = 2;
constexpr int kExitNumerical = 3;
constexpr int kExitTolerance = 4;

neurodens::Scenario load_scenario(const std::string& ref) {
  if (std::filesystem::exists(ref))
    return neurodens::Scenario::from_file(ref);
  if (const auto text = neurodens::bundled_scenario_text(ref))
    return neurodens::Scenario::from_text(*text);
  throw neurodens::ConfigError("'" + ref +
                               "' is neither a scenario file nor a bundled "
                               "scenario (see list-scenarios)");
}

int run_command(const std::string& ref, std::string out_dir,
                std::optional<std::uint64_t> seed, std::optional<int> threads,
                std::optional<int> stride, bool check_mode) {
  neurodens::Scenario sc = load_scenario(ref);
  if (seed) sc.seed = *seed;
  if (threads) sc.threads = *threads;
  if (stride) sc.snapshot_stride = *stride;
  sc.validate();
  if (out_dir.empty()) out_dir = "out/" + sc.name;

  const auto outcome = neurodens::run_scenario(sc, out_dir);
  for (const auto& c : outcome.comparisons)
    std::printf("%-6s %s vs %s: rel-L1 %.6g, rel-Linf %.6g [%s]\n",
                c.kind.c_str(), c.a.c_str(), c.b.c_str(), c.l1_rel, c.linf_rel,
                c.pass ? "pass" : "FAIL");
  std::printf("artifacts written to %s\n", out_dir.c_str());
  if (check_mode && !outcome.tolerances_ok) {
    std::fprintf(stderr, "check failed: tolerance %.6g exceeded\n",
                 sc.tolerance_rel_l1);
    return kExitTolerance;
  }
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"neurodens: cross-validated stochastic-neuron density solvers"};
  app.require_subcommand(1);

  std::string scenario_ref, out_dir;
  std::optional<std::uint64_t> seed;
  std::optional<int> threads, stride;
  auto add_common = [&](CLI::App* cmd) {
    cmd->add_option("scenario", scenario_ref,
                    "scenario file path or bundled scenario name")
        ->required();
    cmd->add_option("--out-dir", out_dir, "artifact directory")
        ->envname("NEURODENS_OUT_DIR");
    cmd->add_option("--seed", seed, "override the scenario seed")
        ->envname("NEURODENS_SEED");
    cmd->add_option("--threads", threads, "Monte Carlo worker threads")
        ->envname("NEURODENS_THREADS");
    cmd->add_option("--snapshot-stride", stride,
                    "age-row decimation of joint snapshots")
        ->envname("NEURODENS_SNAPSHOT_STRIDE");
  };
  auto* run = app.add_subcommand("run", "run a scenario and write artifacts");
  add_common(run);
  auto* check = app.add_subcommand(
      "check", "run a scenario; exit 4 if any declared tolerance fails");
  add_common(check);

  auto* fpt = app.add_subcommand(
      "fpt-hazard", "solve the first-passage problem, write a hazard CSV");
  double mu = 3.0, sigma = 0.15, v_min = -4.0, v_r = 0.5, a_max = 1.0,
         dt = 1e-3;
  int n_v = 400;
  std::string hazard_out = "hazard.csv";
  fpt->add_option("--mu", mu, "constant stimulus mean");
  fpt->add_option("--sigma", sigma, "noise intensity");
  fpt->add_option("--v-min", v_min, "lower potential bound");
  fpt->add_option("--v-r", v_r, "reset potential");
  fpt->add_option("--n-v", n_v, "potential cells");
  fpt->add_option("--a-max", a_max, "age horizon");
  fpt->add_option("--dt", dt, "time step (= age cell width)");
  fpt->add_option("--out", hazard_out, "output CSV path");

  auto* list = app.add_subcommand("list-scenarios", "list bundled scenarios");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitConfig;
  }

  try {
    if (list->parsed()) {
      for (const auto& b : neurodens::bundled_scenarios())
        std::printf("%-14s %s\n", b.name.c_str(), b.summary.c_str());
      return kExitOk;
    }
    if (fpt->parsed()) {
      neurodens::PotentialGrid grid(v_min, v_r, 1.0, n_v);
      neurodens::AgeGrid ages(a_max, (int)std::lround(a_max / dt));
      neurodens::write_fpt_hazard(mu, sigma, grid, ages, hazard_out);
      std::printf("hazard written to %s\n", hazard_out.c_str());
      return kExitOk;
    }
    return run_command(scenario_ref, out_dir, seed, threads, stride,
                       check->parsed());
  } catch (const neurodens::ConfigError& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return kExitConfig;
  } catch (const neurodens::NumericalError& e) {
    std::fprintf(stderr, "numerical error: %s\n", e.what());
    return kExitNumerical;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitNumerical;
  }
}
