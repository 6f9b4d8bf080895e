#include "neurodens/scenario.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <optional>
#include <sstream>

#include <json.hpp>

#include "neurodens/density.hpp"
#include "neurodens/errors.hpp"
#include "neurodens/fp1d.hpp"
#include "neurodens/fpt.hpp"
#include "neurodens/joint2d.hpp"
#include "neurodens/mc.hpp"
#include "neurodens/series.hpp"

namespace neurodens {

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item = trim(item);
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

double parse_double(const std::string& key, const std::string& s) {
  try {
    std::size_t pos = 0;
    const double v = std::stod(s, &pos);
    if (pos != s.size()) throw std::invalid_argument("trailing characters");
    return v;
  } catch (const std::exception&) {
    throw ConfigError("config: '" + key + "' is not a number: '" + s + "'");
  }
}

long parse_long(const std::string& key, const std::string& s) {
  try {
    std::size_t pos = 0;
    const long v = std::stol(s, &pos);
    if (pos != s.size()) throw std::invalid_argument("trailing characters");
    return v;
  } catch (const std::exception&) {
    throw ConfigError("config: '" + key + "' is not an integer: '" + s + "'");
  }
}

bool parse_bool(const std::string& key, const std::string& s) {
  if (s == "true" || s == "1" || s == "yes") return true;
  if (s == "false" || s == "0" || s == "no") return false;
  throw ConfigError("config: '" + key + "' is not a boolean: '" + s + "'");
}

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

// Section-driven field dispatch; throws on unknown sections/keys so typos
// fail loudly rather than silently using defaults.
void apply_entry(Scenario& sc, const std::string& section,
                 const std::string& key, const std::string& value) {
  const std::string qual = section + "." + key;
  auto num = [&] { return parse_double(qual, value); };
  auto integer = [&] { return parse_long(qual, value); };
  auto boolean = [&] { return parse_bool(qual, value); };

  if (section == "scenario") {
    if (key == "name") { sc.name = value; return; }
    if (key == "models") {
      sc.models.clear();
      for (const auto& m : split_list(value))
        sc.models.push_back(model_from_name(m));
      return;
    }
    if (key == "horizon") { sc.horizon = num(); return; }
    if (key == "dt") { sc.dt = num(); return; }
    if (key == "seed") {
      try {
        sc.seed = std::stoull(value);
      } catch (const std::exception&) {
        throw ConfigError("config: 'scenario.seed' is not an integer");
      }
      return;
    }
    if (key == "tolerance_rel_l1") { sc.tolerance_rel_l1 = num(); return; }
    if (key == "compare_skip") { sc.compare_skip = (int)integer(); return; }
  } else if (section == "stimulus") {
    if (key == "kind") { sc.stim_kind = value; return; }
    if (key == "mu0") { sc.mu0 = num(); return; }
    if (key == "sigma") { sc.sigma = num(); return; }
    if (key == "amplitude") { sc.amplitude = num(); return; }
    if (key == "period") { sc.period = num(); return; }
  } else if (section == "grid") {
    if (key == "v_min") { sc.v_min = num(); return; }
    if (key == "v_r") { sc.v_r = num(); return; }
    if (key == "v_th") { sc.v_th = num(); return; }
    if (key == "n_v") { sc.n_v = (int)integer(); return; }
    if (key == "a_max") { sc.a_max = num(); return; }
  } else if (section == "mc") {
    if (key == "n_trials") { sc.n_trials = (int)integer(); return; }
    if (key == "psth_bin") { sc.psth_bin = num(); return; }
    if (key == "threads") { sc.threads = (int)integer(); return; }
    if (key == "isi_bin") { sc.isi_bin = num(); return; }
  } else if (section == "initial") {
    if (key == "v_kind") { sc.v_kind = value; return; }
    if (key == "v_mean") { sc.v_mean = num(); return; }
    if (key == "v_std") { sc.v_std = num(); return; }
    if (key == "age_kind") { sc.age_kind = value; return; }
    if (key == "age_mean") { sc.age_mean = num(); return; }
    if (key == "age_std") { sc.age_std = num(); return; }
  } else if (section == "hazard") {
    if (key == "source") {
      if (value == "formula") sc.hazard.source = HazardSpec::Source::formula;
      else if (value == "fpt") sc.hazard.source = HazardSpec::Source::fpt;
      else if (value == "file") sc.hazard.source = HazardSpec::Source::file;
      else if (value == "joint") sc.hazard.source = HazardSpec::Source::joint;
      else throw ConfigError("config: unknown hazard source '" + value + "'");
      return;
    }
    if (key == "h") { sc.hazard.h = num(); return; }
    if (key == "tau") { sc.hazard.tau = num(); return; }
    if (key == "amplitude") { sc.hazard.amplitude = num(); return; }
    if (key == "period") { sc.hazard.period = num(); return; }
    if (key == "file") { sc.hazard.file = value; return; }
  } else if (section == "output") {
    if (key == "rates") { sc.out_rates = boolean(); return; }
    if (key == "isi") { sc.out_isi = boolean(); return; }
    if (key == "hazard") { sc.out_hazard = boolean(); return; }
    if (key == "snapshot_times") {
      sc.snapshot_times.clear();
      for (const auto& t : split_list(value))
        sc.snapshot_times.push_back(parse_double(qual, t));
      return;
    }
    if (key == "snapshot_stride") { sc.snapshot_stride = (int)integer(); return; }
  } else {
    throw ConfigError("config: unknown section '" + section + "'");
  }
  throw ConfigError("config: unknown key '" + qual + "'");
}

// ---------------------------------------------------------------------------
// initial conditions

std::vector<double> initial_v_density(const Scenario& sc,
                                      const PotentialGrid& g) {
  std::vector<double> p(g.n_v(), 0.0);
  if (sc.v_kind == "point") {
    deposit_delta(g, sc.v_mean, 1.0, p);
  } else if (sc.v_kind == "gaussian") {
    p = gaussian_cells(sc.v_mean, sc.v_std, g.v_min(), g.dv(), g.n_v());
  } else {
    throw ConfigError("config: unknown initial.v_kind '" + sc.v_kind + "'");
  }
  normalize(p, g.dv());
  return p;
}

std::vector<double> initial_age_density(const Scenario& sc, const AgeGrid& g) {
  std::vector<double> n(g.n_a(), 0.0);
  if (sc.age_kind == "point") {
    int k = (int)std::floor(sc.age_mean / g.da());
    k = std::clamp(k, 0, g.n_a() - 1);
    n[k] = 1.0 / g.da();
  } else if (sc.age_kind == "gaussian") {
    n = gaussian_cells(sc.age_mean, sc.age_std, 0.0, g.da(), g.n_a());
  } else {
    throw ConfigError("config: unknown initial.age_kind '" + sc.age_kind + "'");
  }
  normalize(n, g.da());
  return n;
}

InitialSpec initial_v_spec(const Scenario& sc) {
  return sc.v_kind == "point" ? InitialSpec::point(sc.v_mean)
                              : InitialSpec::gaussian(sc.v_mean, sc.v_std);
}

InitialSpec initial_age_spec(const Scenario& sc) {
  return sc.age_kind == "point" ? InitialSpec::point(sc.age_mean)
                                : InitialSpec::gaussian(sc.age_mean, sc.age_std);
}

// ---------------------------------------------------------------------------
// CSV emission (printf %.17g keeps re-runs byte-identical)

void write_csv(const fs::path& path, const std::vector<std::string>& header,
               const std::vector<const std::vector<double>*>& columns) {
  std::ofstream f(path);
  if (!f) throw NumericalError("cannot open output file " + path.string());
  for (std::size_t c = 0; c < header.size(); ++c)
    f << (c ? "," : "") << header[c];
  f << "\n";
  const std::size_t rows = columns.empty() ? 0 : columns[0]->size();
  for (std::size_t r = 0; r < rows; ++r) {
    for (std::size_t c = 0; c < columns.size(); ++c)
      f << (c ? "," : "") << fmt((*columns[c])[r]);
    f << "\n";
  }
}

struct SeriesColumn {
  Model model;
  FiringRateSeries series;
};

struct HistColumn {
  Model model;
  std::vector<double> centers;
  std::vector<double> density;
};

}  // namespace

// ---------------------------------------------------------------------------

ConfigMap parse_config(const std::string& text) {
  ConfigMap out;
  std::string section;
  std::stringstream ss(text);
  std::string line;
  int lineno = 0;
  while (std::getline(ss, line)) {
    ++lineno;
    const auto hash = line.find_first_of("#;");
    if (hash != std::string::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']')
        throw ConfigError("config line " + std::to_string(lineno) +
                          ": malformed section header");
      section = trim(line.substr(1, line.size() - 2));
      if (section.empty())
        throw ConfigError("config line " + std::to_string(lineno) +
                          ": empty section name");
      out[section];
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw ConfigError("config line " + std::to_string(lineno) +
                        ": expected 'key = value'");
    if (section.empty())
      throw ConfigError("config line " + std::to_string(lineno) +
                        ": key before any [section]");
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (key.empty())
      throw ConfigError("config line " + std::to_string(lineno) +
                        ": empty key");
    if (!out[section].emplace(key, value).second)
      throw ConfigError("config: duplicate key '" + section + "." + key + "'");
  }
  return out;
}

std::string model_name(Model m) {
  switch (m) {
    case Model::mc_nlif: return "mc-nlif";
    case Model::mc_escape: return "mc-escape";
    case Model::mc_joint: return "mc-joint";
    case Model::fp: return "fp";
    case Model::as: return "as";
    case Model::fpt: return "fpt";
    case Model::joint: return "joint";
  }
  throw ConfigError("unknown model enum value");
}

Model model_from_name(const std::string& name) {
  if (name == "mc-nlif") return Model::mc_nlif;
  if (name == "mc-escape") return Model::mc_escape;
  if (name == "mc-joint") return Model::mc_joint;
  if (name == "fp") return Model::fp;
  if (name == "as") return Model::as;
  if (name == "fpt") return Model::fpt;
  if (name == "joint") return Model::joint;
  throw ConfigError("config: unknown model '" + name + "'");
}

Scenario Scenario::from_text(const std::string& text) {
  Scenario sc;
  for (const auto& [section, entries] : parse_config(text))
    for (const auto& [key, value] : entries)
      apply_entry(sc, section, key, value);
  sc.validate();
  return sc;
}

Scenario Scenario::from_file(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw ConfigError("cannot open scenario file '" + path + "'");
  std::stringstream ss;
  ss << f.rdbuf();
  return from_text(ss.str());
}

bool Scenario::has_model(Model m) const {
  return std::find(models.begin(), models.end(), m) != models.end();
}

void Scenario::validate() const {
  if (models.empty()) throw ConfigError("config: scenario.models is empty");
  if (!(dt > 0.0)) throw ConfigError("config: dt must be > 0");
  if (!(horizon >= dt)) throw ConfigError("config: horizon must be >= dt");
  if (!(tolerance_rel_l1 > 0.0))
    throw ConfigError("config: tolerance_rel_l1 must be > 0");
  if (compare_skip < 0) throw ConfigError("config: compare_skip must be >= 0");
  if (stim_kind != "constant" && stim_kind != "sinusoid")
    throw ConfigError("config: unknown stimulus.kind '" + stim_kind + "'");
  if (!(sigma > 0.0)) throw ConfigError("config: sigma must be > 0");
  if (n_trials < 1) throw ConfigError("config: n_trials must be >= 1");
  if (threads < 1) throw ConfigError("config: threads must be >= 1");
  if (snapshot_stride < 1)
    throw ConfigError("config: snapshot_stride must be >= 1");

  const bool needs_age =
      has_model(Model::as) || has_model(Model::fpt) ||
      has_model(Model::joint) || has_model(Model::mc_escape) ||
      has_model(Model::mc_joint);
  if (needs_age) {
    const double n_a = a_max / dt;
    if (std::abs(n_a - std::round(n_a)) > 1e-9 * n_a || n_a < 2)
      throw ConfigError(
          "config: a_max must be an integer multiple of dt (da == dt)");
  }
  const bool needs_hazard = has_model(Model::as) || has_model(Model::mc_escape);
  if (needs_hazard && hazard.source == HazardSpec::Source::none)
    throw ConfigError("config: models 'as'/'mc-escape' need a [hazard] source");
  if (hazard.source == HazardSpec::Source::joint && !has_model(Model::joint))
    throw ConfigError("config: hazard source 'joint' needs the joint model");
  if (hazard.source == HazardSpec::Source::file && hazard.file.empty())
    throw ConfigError("config: hazard source 'file' needs hazard.file");
  if (hazard.source == HazardSpec::Source::formula && !(hazard.tau > 0.0))
    throw ConfigError("config: hazard.tau must be > 0");
  // grid invariants checked by construction
  (void)potential_grid();
}

Stimulus Scenario::stimulus() const {
  if (stim_kind == "constant") return Stimulus::constant(mu0, sigma);
  // sinusoid, sampled on the solver step grid (solvers and engines query
  // only at multiples of dt, where the samples are exact)
  const long n = std::lround(horizon / dt);
  std::vector<std::pair<double, double>> samples;
  samples.reserve(n + 1);
  for (long k = 0; k <= n; ++k) {
    const double t = k * dt;
    samples.emplace_back(t, mu0 + amplitude * std::sin(2.0 * M_PI * t / period));
  }
  return Stimulus::waveform(samples, sigma);
}

PotentialGrid Scenario::potential_grid() const {
  return PotentialGrid(v_min, v_r, v_th, n_v);
}

AgeGrid Scenario::age_grid() const {
  return AgeGrid(a_max, (int)std::lround(a_max / dt));
}

// ---------------------------------------------------------------------------
// bundled scenarios

const std::vector<BundledScenario>& bundled_scenarios() {
  static const std::vector<BundledScenario> kBundled = {
      {"fig2", "constant stimulus: Langevin MC vs Fokker-Planck rate",
       R"(
[scenario]
name = fig2
models = mc-nlif, fp
horizon = 1.0
dt = 1e-3
seed = 2025
tolerance_rel_l1 = 0.05
compare_skip = 1

[stimulus]
kind = constant
mu0 = 3.0
sigma = 0.15

[grid]
v_min = -4.0
v_r = 0.5
v_th = 1.0
n_v = 400
a_max = 1.0

[mc]
n_trials = 100000
psth_bin = 0.02
isi_bin = 0.01

[initial]
v_kind = gaussian
v_mean = 0.0
v_std = 0.2

[output]
rates = true
isi = true
)"},
      {"fig3", "sinusoidal stimulus: Langevin MC vs Fokker-Planck rate",
       R"(
[scenario]
name = fig3
models = mc-nlif, fp
horizon = 2.0
dt = 1e-3
seed = 2025
tolerance_rel_l1 = 0.05
compare_skip = 1

[stimulus]
kind = sinusoid
mu0 = 3.0
sigma = 0.2
amplitude = 0.7
period = 1.0

[grid]
v_min = -4.0
v_r = 0.5
v_th = 1.0
n_v = 400
a_max = 1.0

[mc]
n_trials = 100000
psth_bin = 0.02

[initial]
v_kind = gaussian
v_mean = 0.0
v_std = 0.2

[output]
rates = true
)"},
      {"fig5", "autonomous hazard: escape-rate MC vs age-structured rate",
       R"(
[scenario]
name = fig5
models = mc-escape, as
horizon = 4.0
dt = 1e-3
seed = 2025
tolerance_rel_l1 = 0.05
compare_skip = 1

[stimulus]
kind = constant
mu0 = 3.0
sigma = 0.15

[grid]
a_max = 8.0

[mc]
n_trials = 100000
psth_bin = 0.2

[initial]
age_kind = gaussian
age_mean = 1.0
age_std = 0.25

[hazard]
source = formula
h = 3.0
tau = 30.0

[output]
rates = true
hazard = true
)"},
      {"fig6", "modulated hazard: escape-rate MC vs age-structured rate",
       R"(
[scenario]
name = fig6
models = mc-escape, as
horizon = 4.0
dt = 1e-3
seed = 2025
tolerance_rel_l1 = 0.05
compare_skip = 1

[stimulus]
kind = constant
mu0 = 3.0
sigma = 0.15

[grid]
a_max = 8.0

[mc]
n_trials = 50000
psth_bin = 0.2

[initial]
age_kind = gaussian
age_mean = 1.0
age_std = 0.25

[hazard]
source = formula
h = 3.0
tau = 30.0
amplitude = 0.5
period = 2.0

[output]
rates = true
)"},
      {"fig7", "strong drift: joint age-potential density vs joint MC",
       R"(
[scenario]
name = fig7
models = mc-joint, joint
horizon = 7.0
dt = 2e-4
seed = 2025
tolerance_rel_l1 = 0.05
compare_skip = 1

[stimulus]
kind = constant
mu0 = 20.0
sigma = 0.4

[grid]
v_min = -2.0
v_r = 0.5
v_th = 1.0
n_v = 300
a_max = 0.15

[mc]
n_trials = 5000
psth_bin = 0.1

[initial]
v_kind = gaussian
v_mean = 0.0
v_std = 0.2
age_kind = point
age_mean = 0.0

[output]
rates = true
snapshot_times = 0.0, 0.5, 7.0
snapshot_stride = 5
)"},
      {"theorem-suite",
       "joint density vs its potential/age marginal solvers (commutation)",
       R"(
[scenario]
name = theorem-suite
models = joint, fp, as
horizon = 0.5
dt = 1e-3
seed = 2025
tolerance_rel_l1 = 1e-3
compare_skip = 0

[stimulus]
kind = sinusoid
mu0 = 3.0
sigma = 0.2
amplitude = 0.3
period = 1.0

[grid]
v_min = -4.0
v_r = 0.5
v_th = 1.0
n_v = 400
a_max = 2.0

[initial]
v_kind = gaussian
v_mean = 0.0
v_std = 0.2
age_kind = gaussian
age_mean = 0.5
age_std = 0.1

[hazard]
source = joint

[output]
rates = true
hazard = true
)"}};
  return kBundled;
}

std::optional<std::string> bundled_scenario_text(const std::string& name) {
  for (const auto& b : bundled_scenarios())
    if (b.name == name) return b.text;
  return std::nullopt;
}

// ---------------------------------------------------------------------------
// hazard sources

namespace {

HazardFn formula_hazard(const HazardSpec& hz) {
  const double h = hz.h, tau = hz.tau, A = hz.amplitude, T = hz.period;
  return [h, tau, A, T](double t, double a) {
    const double ht = h + A * std::sin(2.0 * M_PI * t / T);
    return std::exp(ht) * -std::expm1(-a / tau);
  };
}

HazardTable formula_hazard_table(const HazardSpec& hz, const AgeGrid& ages) {
  HazardTable tab{ages, {}, {}};
  tab.values.resize(ages.n_a());
  const double eh = std::exp(hz.h);
  for (int k = 0; k < ages.n_a(); ++k)
    tab.values[k] = eh * -std::expm1(-ages.center(k) / hz.tau);
  return tab;
}

}  // namespace

void write_fpt_hazard(double mu, double sigma, const PotentialGrid& grid,
                      const AgeGrid& ages, const std::string& path) {
  const auto sol = solve_fpt_autonomous(mu, sigma, grid, ages,
                                        /*keep_phi=*/false);
  std::vector<double> centers(ages.n_a());
  std::vector<double> surv(ages.n_a());
  for (int k = 0; k < ages.n_a(); ++k) {
    centers[k] = ages.center(k);
    surv[k] = sol.survivor[k];
  }
  write_csv(path, {"a", "S", "P", "isi"},
            {&centers, &sol.hazard.values, &surv, &sol.isi});
}

HazardTable load_hazard_csv(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw ConfigError("cannot open hazard file '" + path + "'");
  std::string line;
  if (!std::getline(f, line))
    throw ConfigError("hazard file '" + path + "' is empty");
  std::vector<double> ages, values;
  int lineno = 1;
  while (std::getline(f, line)) {
    ++lineno;
    line = trim(line);
    if (line.empty()) continue;
    const auto cols = split_list(line);
    if (cols.size() < 2)
      throw ConfigError("hazard file line " + std::to_string(lineno) +
                        ": need at least columns a,S");
    ages.push_back(parse_double("hazard.a", cols[0]));
    values.push_back(parse_double("hazard.S", cols[1]));
  }
  if (ages.size() < 2)
    throw ConfigError("hazard file '" + path + "' has fewer than 2 rows");
  const double da = ages[1] - ages[0];
  if (!(da > 0.0) || std::abs(ages[0] - 0.5 * da) > 1e-9 * da)
    throw ConfigError("hazard file ages must be uniform cell centers");
  for (std::size_t k = 1; k < ages.size(); ++k)
    if (std::abs(ages[k] - ages[k - 1] - da) > 1e-9 * da)
      throw ConfigError("hazard file ages must be uniformly spaced");
  const int n_a = (int)ages.size();
  return HazardTable{AgeGrid(n_a * da, n_a), {}, std::move(values)};
}

// ---------------------------------------------------------------------------
// scenario execution

RunOutcome run_scenario(const Scenario& sc, const std::string& out_dir) {
  fs::create_directories(out_dir);
  const fs::path out(out_dir);

  const Stimulus stim = sc.stimulus();
  const PotentialGrid gv = sc.potential_grid();
  const bool needs_age =
      sc.has_model(Model::as) || sc.has_model(Model::fpt) ||
      sc.has_model(Model::joint) || sc.has_model(Model::mc_escape);
  std::optional<AgeGrid> ga;
  if (needs_age) ga.emplace(sc.age_grid());

  McConfig mc;
  mc.dt = sc.dt;
  mc.horizon = sc.horizon;
  mc.n_trials = sc.n_trials;
  mc.seed = sc.seed;
  mc.threads = sc.threads;

  std::vector<SeriesColumn> rate_columns;
  std::vector<HistColumn> isi_columns;
  RunOutcome outcome;

  auto push_rates = [&](Model m, FiringRateSeries s) {
    rate_columns.push_back({m, std::move(s)});
  };

  // --- joint (first: other models may consume its empirical hazard) -------
  JointRunResult joint_run;
  if (sc.has_model(Model::joint)) {
    Joint2dSolver solver(stim, gv, *ga);
    const auto n0 = initial_age_density(sc, *ga);
    const auto p0 = initial_v_density(sc, gv);
    DensityJoint pi0;
    pi0.n_a = ga->n_a();
    pi0.n_v = gv.n_v();
    pi0.values.resize((std::size_t)pi0.n_a * pi0.n_v);
    for (int k = 0; k < pi0.n_a; ++k)
      for (int i = 0; i < pi0.n_v; ++i) pi0.at(k, i) = n0[k] * p0[i];
    JointRunOptions opts;
    opts.snapshot_times = sc.snapshot_times;
    opts.record_hazard = sc.hazard.source == HazardSpec::Source::joint;
    joint_run = solver.solve(std::move(pi0), sc.horizon, opts);
    push_rates(Model::joint, joint_run.rates);
  }

  // --- fp ------------------------------------------------------------------
  FpRunResult fp_run;
  if (sc.has_model(Model::fp)) {
    Fp1dSolver solver(gv, sc.sigma);
    DensityField1D p0{initial_v_density(sc, gv), 0.0};
    fp_run = solver.solve(std::move(p0), stim, sc.horizon, sc.dt,
                          sc.snapshot_times);
    push_rates(Model::fp, fp_run.rates);
  }

  // --- hazard source resolution (for as / mc-escape / hazard.csv) ----------
  std::optional<HazardTable> hazard_table;  // table form when available
  HazardFn hazard_fn;                       // callable form, always set
  const bool needs_hazard =
      sc.has_model(Model::as) || sc.has_model(Model::mc_escape) ||
      (sc.out_hazard && sc.hazard.source != HazardSpec::Source::none);
  std::optional<FptSolution> fpt_sol;  // shared with the fpt model below
  if (needs_hazard) {
    switch (sc.hazard.source) {
      case HazardSpec::Source::formula:
        if (sc.hazard.amplitude == 0.0)
          hazard_table = formula_hazard_table(sc.hazard, *ga);
        hazard_fn = formula_hazard(sc.hazard);
        break;
      case HazardSpec::Source::fpt:
        fpt_sol = solve_fpt_autonomous(stim.mu(0.0), sc.sigma, gv, *ga,
                                       /*keep_phi=*/false);
        hazard_table = fpt_sol->hazard;
        break;
      case HazardSpec::Source::file:
        hazard_table = load_hazard_csv(sc.hazard.file);
        if (hazard_table->ages.n_a() != ga->n_a() ||
            std::abs(hazard_table->ages.da() - ga->da()) > 1e-12)
          throw ConfigError(
              "hazard file age grid does not match the scenario age grid");
        break;
      case HazardSpec::Source::joint:
        hazard_table = joint_run.hazard;
        break;
      case HazardSpec::Source::none:
        throw ConfigError("hazard requested but no [hazard] source set");
    }
    if (hazard_table && !hazard_fn) hazard_fn = hazard_table->fn();
  }

  // --- as -------------------------------------------------------------------
  AsRunResult as_run;
  if (sc.has_model(Model::as)) {
    As1dSolver solver(*ga);
    DensityAge n0{initial_age_density(sc, *ga), 0.0};
    as_run = solver.solve(std::move(n0), hazard_fn, sc.horizon, sc.dt,
                          sc.snapshot_times);
    push_rates(Model::as, as_run.rates);
  }

  // --- fpt -------------------------------------------------------------------
  if (sc.has_model(Model::fpt)) {
    if (!fpt_sol)
      fpt_sol = solve_fpt_autonomous(stim.mu(0.0), sc.sigma, gv, *ga,
                                     /*keep_phi=*/false);
    HistColumn col;
    col.model = Model::fpt;
    col.centers.resize(ga->n_a());
    for (int k = 0; k < ga->n_a(); ++k) col.centers[k] = ga->center(k);
    col.density = fpt_sol->isi;
    isi_columns.push_back(std::move(col));
  }

  // --- Monte Carlo engines ----------------------------------------------------
  auto push_mc = [&](Model m, const McResult& res) {
    push_rates(m, psth(res.spikes, sc.psth_bin, sc.horizon));
    if (sc.out_isi) {
      const auto hist =
          isi_histogram(res.spikes, sc.isi_bin, needs_age ? ga->a_max() : 1.0);
      isi_columns.push_back({m, hist.centers, hist.density});
    }
  };
  if (sc.has_model(Model::mc_nlif))
    push_mc(Model::mc_nlif, simulate_nlif(stim, sc.v_r, initial_v_spec(sc), mc));
  if (sc.has_model(Model::mc_joint))
    push_mc(Model::mc_joint, simulate_joint(stim, sc.v_r, initial_v_spec(sc),
                                            initial_age_spec(sc), mc));
  if (sc.has_model(Model::mc_escape)) {
    const auto res = hazard_table
                         ? simulate_escape(*hazard_table, initial_age_spec(sc), mc)
                         : simulate_escape(hazard_fn, initial_age_spec(sc), mc);
    push_mc(Model::mc_escape, res);
  }

  // reorder output columns to the scenario's listed model order
  auto listed_before = [&](Model a, Model b) {
    auto pos = [&](Model m) {
      return std::find(sc.models.begin(), sc.models.end(), m) -
             sc.models.begin();
    };
    return pos(a) < pos(b);
  };
  std::sort(rate_columns.begin(), rate_columns.end(),
            [&](const auto& a, const auto& b) {
              return listed_before(a.model, b.model);
            });
  std::sort(isi_columns.begin(), isi_columns.end(),
            [&](const auto& a, const auto& b) {
              return listed_before(a.model, b.model);
            });

  // --- artifacts --------------------------------------------------------------
  auto add_artifact = [&](const std::string& rel) {
    outcome.artifacts.push_back(rel);
  };

  if (sc.out_rates && !rate_columns.empty()) {
    const auto& t = rate_columns.front().series.times;
    std::vector<std::string> header = {"t"};
    std::vector<std::vector<double>> resampled;
    resampled.reserve(rate_columns.size());
    for (const auto& col : rate_columns) {
      header.push_back(model_name(col.model));
      resampled.push_back(
          resample_linear(col.series.times, col.series.rates, t));
    }
    std::vector<const std::vector<double>*> cols = {&t};
    for (const auto& v : resampled) cols.push_back(&v);
    write_csv(out / "rates.csv", header, cols);
    add_artifact("rates.csv");
  }

  if (!isi_columns.empty()) {
    const auto& a = isi_columns.front().centers;
    std::vector<std::string> header = {"a"};
    std::vector<std::vector<double>> resampled;
    for (const auto& col : isi_columns) {
      header.push_back(model_name(col.model));
      resampled.push_back(resample_linear(col.centers, col.density, a));
    }
    std::vector<const std::vector<double>*> cols = {&a};
    for (const auto& v : resampled) cols.push_back(&v);
    write_csv(out / "isi.csv", header, cols);
    add_artifact("isi.csv");
  }

  if (sc.out_hazard && (hazard_table || hazard_fn)) {
    std::vector<double> centers(ga->n_a()), values(ga->n_a());
    for (int k = 0; k < ga->n_a(); ++k) {
      centers[k] = ga->center(k);
      values[k] = hazard_table && hazard_table->autonomous()
                      ? hazard_table->values[k]
                      : hazard_fn(sc.horizon, centers[k]);
    }
    write_csv(out / "hazard.csv", {"a", "S"}, {&centers, &values});
    add_artifact("hazard.csv");
  }

  const bool any_snapshots = !fp_run.snapshots.empty() ||
                             !as_run.snapshots.empty() ||
                             !joint_run.snapshots.empty();
  if (any_snapshots) {
    fs::create_directories(out / "snapshots");
    for (std::size_t i = 0; i < fp_run.snapshots.size(); ++i) {
      std::vector<double> vc(gv.n_v());
      for (int j = 0; j < gv.n_v(); ++j) vc[j] = gv.center(j);
      const std::string rel = "snapshots/fp_" + std::to_string(i) + ".csv";
      write_csv(out / rel, {"v", "p"}, {&vc, &fp_run.snapshots[i].values});
      add_artifact(rel);
    }
    for (std::size_t i = 0; i < as_run.snapshots.size(); ++i) {
      std::vector<double> ac(ga->n_a());
      for (int k = 0; k < ga->n_a(); ++k) ac[k] = ga->center(k);
      const std::string rel = "snapshots/as_" + std::to_string(i) + ".csv";
      write_csv(out / rel, {"a", "n"}, {&ac, &as_run.snapshots[i].values});
      add_artifact(rel);
    }
    for (std::size_t i = 0; i < joint_run.snapshots.size(); ++i) {
      const auto& snap = joint_run.snapshots[i];
      std::vector<double> ac, vc, pc;
      for (int k = 0; k < snap.n_a; k += sc.snapshot_stride)
        for (int j = 0; j < snap.n_v; ++j) {
          ac.push_back(ga->center(k));
          vc.push_back(gv.center(j));
          pc.push_back(snap.at(k, j));
        }
      const std::string rel = "snapshots/joint_" + std::to_string(i) + ".csv";
      write_csv(out / rel, {"a", "v", "pi"}, {&ac, &vc, &pc});
      add_artifact(rel);
    }
  }

  // --- pairwise comparisons -----------------------------------------------------
  auto compare_pair = [&](const std::string& kind, Model ma,
                          const std::vector<double>& ta,
                          const std::vector<double>& ya, Model mb,
                          const std::vector<double>& tb,
                          const std::vector<double>& yb, int skip) {
    FiringRateSeries x, y;
    const std::size_t off = std::min<std::size_t>(skip, ta.size());
    x.times.assign(ta.begin() + off, ta.end());
    x.rates.assign(ya.begin() + off, ya.end());
    y.times = tb;
    y.rates = yb;
    const auto d = compare_series(x, y);
    ComparisonRecord rec{kind,      model_name(ma), model_name(mb),
                         d.l1_rel,  d.linf_rel,
                         d.l1_rel <= sc.tolerance_rel_l1};
    if (!rec.pass) outcome.tolerances_ok = false;
    outcome.comparisons.push_back(rec);
  };
  for (std::size_t i = 0; i < rate_columns.size(); ++i)
    for (std::size_t j = i + 1; j < rate_columns.size(); ++j)
      compare_pair("rates", rate_columns[i].model,
                   rate_columns[i].series.times, rate_columns[i].series.rates,
                   rate_columns[j].model, rate_columns[j].series.times,
                   rate_columns[j].series.rates, sc.compare_skip);
  for (std::size_t i = 0; i < isi_columns.size(); ++i)
    for (std::size_t j = i + 1; j < isi_columns.size(); ++j)
      compare_pair("isi", isi_columns[i].model, isi_columns[i].centers,
                   isi_columns[i].density, isi_columns[j].model,
                   isi_columns[j].centers, isi_columns[j].density, 0);

  // --- manifest --------------------------------------------------------------
  json man;
  man["scenario"] = sc.name;
  man["seed"] = sc.seed;
  man["dt"] = sc.dt;
  man["horizon"] = sc.horizon;
  man["models"] = json::array();
  for (Model m : sc.models) man["models"].push_back(model_name(m));
  man["stimulus"] = {{"kind", sc.stim_kind}, {"mu0", sc.mu0},
                     {"sigma", sc.sigma},    {"amplitude", sc.amplitude},
                     {"period", sc.period}};
  man["grid"] = {{"v_min", sc.v_min}, {"v_r", sc.v_r}, {"v_th", sc.v_th},
                 {"n_v", sc.n_v},     {"a_max", sc.a_max}};
  // threads intentionally omitted: outputs are thread-count invariant and
  // the manifest must be byte-identical across thread counts
  man["mc"] = {{"n_trials", sc.n_trials},
               {"psth_bin", sc.psth_bin},
               {"isi_bin", sc.isi_bin}};
  man["initial"] = {{"v_kind", sc.v_kind},     {"v_mean", sc.v_mean},
                    {"v_std", sc.v_std},       {"age_kind", sc.age_kind},
                    {"age_mean", sc.age_mean}, {"age_std", sc.age_std}};
  man["tolerance_rel_l1"] = sc.tolerance_rel_l1;
  man["compare_skip"] = sc.compare_skip;
  man["comparisons"] = json::array();
  for (const auto& c : outcome.comparisons)
    man["comparisons"].push_back({{"kind", c.kind},
                                  {"a", c.a},
                                  {"b", c.b},
                                  {"l1_rel", c.l1_rel},
                                  {"linf_rel", c.linf_rel},
                                  {"pass", c.pass}});
  man["pass"] = outcome.tolerances_ok;
  man["artifacts"] = outcome.artifacts;
  {
    std::ofstream f(out / "manifest.json");
    if (!f)
      throw NumericalError("cannot open output file " +
                           (out / "manifest.json").string());
    f << man.dump(2) << "\n";
  }
  outcome.artifacts.push_back("manifest.json");

  return outcome;
}

}  // namespace neurodens
