#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "neurodens/as1d.hpp"
#include "neurodens/grids.hpp"
#include "neurodens/stimulus.hpp"

namespace neurodens {

// Flat INI-style configuration: "[section]" headers, "key = value" lines,
// '#' or ';' comments. Duplicate keys are an error.
using ConfigMap = std::map<std::string, std::map<std::string, std::string>>;
ConfigMap parse_config(const std::string& text);

enum class Model { mc_nlif, mc_escape, mc_joint, fp, as, fpt, joint };
std::string model_name(Model m);
Model model_from_name(const std::string& name);

// Hazard S(t,a) consumed by the `as` solver and the escape engine.
struct HazardSpec {
  enum class Source { none, formula, fpt, file, joint };
  Source source = Source::none;
  // formula: S(t,a) = exp(h(t)) (1 - e^{-a/tau}),
  // h(t) = h + amplitude * sin(2 pi t / period)
  double h = 3.0;
  double tau = 30.0;
  double amplitude = 0.0;
  double period = 1.0;
  std::string file;  // CSV with columns a,S (see load_hazard_csv)
};

struct Scenario {
  std::string name;
  std::vector<Model> models;
  double horizon = 1.0;
  double dt = 1e-3;
  std::uint64_t seed = 0;
  double tolerance_rel_l1 = 0.05;
  int compare_skip = 1;  // leading samples dropped from rate comparisons

  // stimulus: constant, or sinusoid mu(t) = mu0 + amplitude sin(2 pi t / T)
  std::string stim_kind = "constant";
  double mu0 = 3.0;
  double sigma = 0.15;
  double amplitude = 0.0;
  double period = 1.0;

  double v_min = -4.0;
  double v_r = 0.5;
  double v_th = 1.0;
  int n_v = 400;
  double a_max = 1.0;  // n_a = a_max / dt (da == dt requirement)

  int n_trials = 10000;
  double psth_bin = 0.02;
  int threads = 1;
  double isi_bin = 0.01;

  std::string v_kind = "gaussian";  // point | gaussian
  double v_mean = 0.0;
  double v_std = 0.2;
  std::string age_kind = "point";
  double age_mean = 0.0;
  double age_std = 0.0;

  HazardSpec hazard;

  bool out_rates = true;
  bool out_isi = false;
  bool out_hazard = false;
  std::vector<double> snapshot_times;
  int snapshot_stride = 1;  // age-row decimation of joint snapshots

  static Scenario from_text(const std::string& text);
  static Scenario from_file(const std::string& path);

  void validate() const;
  Stimulus stimulus() const;
  PotentialGrid potential_grid() const;
  AgeGrid age_grid() const;
  bool has_model(Model m) const;
};

struct BundledScenario {
  std::string name;
  std::string summary;
  std::string text;
};
const std::vector<BundledScenario>& bundled_scenarios();
// nullopt when no bundled scenario has this name
std::optional<std::string> bundled_scenario_text(const std::string& name);

struct ComparisonRecord {
  std::string kind;  // "rates" or "isi"
  std::string a, b;  // model names
  double l1_rel = 0.0;
  double linf_rel = 0.0;
  bool pass = true;
};

struct RunOutcome {
  bool tolerances_ok = true;
  std::vector<ComparisonRecord> comparisons;
  std::vector<std::string> artifacts;  // paths relative to out_dir
};

// Executes every requested model, writes rates.csv / isi.csv / hazard.csv /
// snapshots/ plus manifest.json into out_dir. Deterministic given the seed.
RunOutcome run_scenario(const Scenario& sc, const std::string& out_dir);

// Constant-stimulus first-passage hazard written as CSV (a,S,P,isi).
void write_fpt_hazard(double mu, double sigma, const PotentialGrid& grid,
                      const AgeGrid& ages, const std::string& path);

// Reads an autonomous hazard table from CSV columns a,S (extra columns are
// ignored); ages must be the uniform cell centers of an age grid.
HazardTable load_hazard_csv(const std::string& path);

}  // namespace neurodens
