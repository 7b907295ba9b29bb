#include "sben/cli.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "sben/errors.hpp"
#include "sben/verify.hpp"

namespace sben::cli {

namespace fs = std::filesystem;
using nlohmann::json;

// ---- logging ---------------------------------------------------------

namespace {

int log_level() {
  static int level = [] {
    const char* env = std::getenv("SBEN_LOG");
    if (!env) return 2;
    const std::string s(env);
    if (s == "debug") return 0;
    if (s == "info") return 1;
    if (s == "warn") return 2;
    if (s == "error") return 3;
    return 2;
  }();
  return level;
}

void log(int level, bool quiet, const std::string& msg) {
  static const char* names[] = {"debug", "info", "warn", "error"};
  if (quiet || level < log_level()) return;
  std::cerr << "sben [" << names[level] << "] " << msg << "\n";
}

std::string fmt17(double v) {
  if (std::isinf(v)) return "inf";
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

std::string fmt17(const ExtReal& v) {
  return v.is_infinite() ? "inf" : fmt17(v.value());
}

/// JSON value for a possibly infinite quantity: number, or the string
/// "inf" (JSON has no infinity literal).
json jnum(const ExtReal& v) {
  if (v.is_infinite()) return "inf";
  return v.value();
}
json jnum(double v) {
  if (std::isinf(v)) return "inf";
  return v;
}

void atomic_write(const fs::path& path, const std::string& content) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  const fs::path tmp = path.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot open for writing: " + tmp.string());
    out << content;
    if (!out) throw std::runtime_error("write failed: " + tmp.string());
  }
  fs::rename(tmp, path);
}

fs::path resolve(const Options& opt, const std::string& p) {
  fs::path path(p);
  if (!opt.out_dir.empty() && path.is_relative()) path = fs::path(opt.out_dir) / path;
  return path;
}

// ---- config parsing --------------------------------------------------

[[noreturn]] void cfg_error(const std::string& name, int line, const std::string& msg) {
  throw std::invalid_argument(name + ":" + std::to_string(line) + ": " + msg);
}

double to_double(const std::string& name, int line, const std::string& v) {
  try {
    size_t pos = 0;
    const double d = std::stod(v, &pos);
    if (pos != v.size()) throw std::invalid_argument("");
    return d;
  } catch (...) {
    cfg_error(name, line, "expected a number, got '" + v + "'");
  }
}

long to_long(const std::string& name, int line, const std::string& v) {
  try {
    size_t pos = 0;
    const long d = std::stol(v, &pos);
    if (pos != v.size()) throw std::invalid_argument("");
    return d;
  } catch (...) {
    cfg_error(name, line, "expected an integer, got '" + v + "'");
  }
}

Vector to_vector(const std::string& name, int line, const std::string& v) {
  std::vector<double> vals;
  std::stringstream ss(v);
  std::string item;
  while (std::getline(ss, item, ','))
    vals.push_back(to_double(name, line, item));
  Vector out(static_cast<Eigen::Index>(vals.size()));
  for (size_t i = 0; i < vals.size(); ++i) out[static_cast<Eigen::Index>(i)] = vals[i];
  return out;
}

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

/// Accumulates the *_kind/... keys of one load-curve program.
struct CurveKeys {
  std::string kind = "constant";
  double value = 0.0, amplitude = 0.0, frequency = 1.0, phase = 0.0, offset = 0.0;
  double ramp_rate = 0.0, ramp_time = 1.0;

  bool take(const std::string& key, const std::string& val, const std::string& name,
            int line) {
    if (key == "kind") kind = val;
    else if (key == "value") value = to_double(name, line, val);
    else if (key == "amplitude") amplitude = to_double(name, line, val);
    else if (key == "frequency") frequency = to_double(name, line, val);
    else if (key == "phase") phase = to_double(name, line, val);
    else if (key == "offset") offset = to_double(name, line, val);
    else if (key == "ramp_rate") ramp_rate = to_double(name, line, val);
    else if (key == "ramp_time") ramp_time = to_double(name, line, val);
    else return false;
    return true;
  }

  LoadCurve build(const std::string& name, int line) const {
    if (kind == "constant") return LoadCurve::constant(value);
    if (kind == "sinusoidal")
      return LoadCurve::sinusoidal(amplitude, frequency, phase, offset);
    if (kind == "ramp_hold") {
      if (ramp_time <= 0) cfg_error(name, line, "ramp_time must be positive");
      return LoadCurve::piecewise_linear({0.0, ramp_time},
                                         {offset, offset + ramp_rate * ramp_time});
    }
    cfg_error(name, line, "unknown curve kind '" + kind + "'");
  }
};

struct PotentialKeys {
  std::string kind;
  long dim = 2;
  double weight = 1.0, radius = 1.0, lo = -1.0, hi = 1.0;
  int line = 0;

  std::optional<Potential> build(const std::string& name) const {
    if (kind.empty()) return std::nullopt;
    if (kind == "zero") return Potential::zero(dim);
    if (kind == "quadratic") return Potential::quadratic_scalar(weight, dim);
    if (kind == "scaled_norm") return Potential::scaled_norm(radius, dim);
    if (kind == "indicator_ball") return Potential::indicator_ball(radius, dim);
    if (kind == "indicator_box") return Potential::indicator_box(lo, hi, dim);
    if (kind == "support_box") return Potential::support_box(
        Vector::Constant(dim, lo), Vector::Constant(dim, hi));
    cfg_error(name, line, "unknown potential kind '" + kind + "'");
  }
};

}  // namespace

RunConfig parse_config(std::istream& in, const std::string& name) {
  RunConfig cfg;
  CurveKeys load, disp;
  PotentialKeys pot;
  int load_line = 0, disp_line = 0;
  std::string section;
  std::string raw;
  int line = 0;

  while (std::getline(in, raw)) {
    ++line;
    std::string s = raw;
    const auto hash = s.find_first_of("#;");
    if (hash != std::string::npos) s = s.substr(0, hash);
    s = trim(s);
    if (s.empty()) continue;
    if (s.front() == '[') {
      if (s.back() != ']') cfg_error(name, line, "malformed section header");
      section = trim(s.substr(1, s.size() - 2));
      static const std::vector<std::string> known = {
          "model", "grid", "solver", "outputs", "run", "potential", "conjugate"};
      if (std::find(known.begin(), known.end(), section) == known.end())
        cfg_error(name, line, "unknown section [" + section + "]");
      continue;
    }
    const auto eq = s.find('=');
    if (eq == std::string::npos) cfg_error(name, line, "expected key = value");
    const std::string key = trim(s.substr(0, eq));
    const std::string val = trim(s.substr(eq + 1));
    if (key.empty() || val.empty()) cfg_error(name, line, "empty key or value");

    if (section == "model") {
      ModelSpec& m = cfg.model;
      if (key == "kind") {
        static const std::map<std::string, ModelSpec::Kind> kinds = {
            {"harmonic_oscillator", ModelSpec::Kind::HarmonicOscillator},
            {"maxwell", ModelSpec::Kind::MaxwellElement},
            {"elastoplastic_oscillator", ModelSpec::Kind::ElastoplasticOscillator},
            {"bar_chain", ModelSpec::Kind::BarChain},
            {"quasistatic_bar", ModelSpec::Kind::QuasiStaticBar}};
        const auto it = kinds.find(val);
        if (it == kinds.end()) cfg_error(name, line, "unknown model kind '" + val + "'");
        m.kind = it->second;
      } else if (key == "mass") m.mass = to_double(name, line, val);
      else if (key == "stiffness") m.stiffness = to_double(name, line, val);
      else if (key == "viscosity") m.viscosity = to_double(name, line, val);
      else if (key == "yield_stress") m.yield_stress = to_double(name, line, val);
      else if (key == "density") m.density = to_double(name, line, val);
      else if (key == "length") m.length = to_double(name, line, val);
      else if (key == "elements") m.elements = static_cast<int>(to_long(name, line, val));
      else if (key == "dof") m.dof = static_cast<int>(to_long(name, line, val));
      else if (key == "initial_position") m.initial_position = to_vector(name, line, val);
      else if (key == "initial_momentum") m.initial_momentum = to_vector(name, line, val);
      else if (key.rfind("load_", 0) == 0 &&
               load.take(key.substr(5), val, name, line)) load_line = line;
      else if (key.rfind("displacement_", 0) == 0 &&
               disp.take(key.substr(13), val, name, line)) disp_line = line;
      else cfg_error(name, line, "unknown key '" + key + "' in [model]");
    } else if (section == "grid") {
      if (key == "t_end") cfg.t_end = to_double(name, line, val);
      else if (key == "steps") {
        const long st = to_long(name, line, val);
        if (st < 1) cfg_error(name, line, "steps must be >= 1");
        cfg.steps = static_cast<size_t>(st);
      } else cfg_error(name, line, "unknown key '" + key + "' in [grid]");
    } else if (section == "solver") {
      if (key == "method") {
        if (val != "incremental" && val != "global")
          cfg_error(name, line, "method must be incremental or global");
        cfg.method = val;
      } else if (key == "step_tol") cfg.solver.step_tol_rel = to_double(name, line, val);
      else if (key == "certificate_tol")
        cfg.solver.certificate_tol_rel = to_double(name, line, val);
      else if (key == "max_iter")
        cfg.solver.max_iter = static_cast<int>(to_long(name, line, val));
      else if (key == "max_sweeps")
        cfg.solver.max_sweeps = static_cast<int>(to_long(name, line, val));
      else cfg_error(name, line, "unknown key '" + key + "' in [solver]");
    } else if (section == "outputs") {
      if (key == "trajectory_csv") cfg.trajectory_csv = val;
      else if (key == "report_json") cfg.report_json = val;
      else cfg_error(name, line, "unknown key '" + key + "' in [outputs]");
    } else if (section == "run") {
      if (key == "seed") cfg.seed = to_long(name, line, val);
      else cfg_error(name, line, "unknown key '" + key + "' in [run]");
    } else if (section == "potential") {
      pot.line = line;
      if (key == "kind") pot.kind = val;
      else if (key == "dim") pot.dim = to_long(name, line, val);
      else if (key == "weight") pot.weight = to_double(name, line, val);
      else if (key == "radius") pot.radius = to_double(name, line, val);
      else if (key == "lo") pot.lo = to_double(name, line, val);
      else if (key == "hi") pot.hi = to_double(name, line, val);
      else cfg_error(name, line, "unknown key '" + key + "' in [potential]");
    } else if (section == "conjugate") {
      if (key == "half_width") cfg.conjugate_half_width = to_double(name, line, val);
      else if (key == "resolution")
        cfg.conjugate_resolution = static_cast<int>(to_long(name, line, val));
      else if (key == "out_csv") cfg.conjugate_csv = val;
      else cfg_error(name, line, "unknown key '" + key + "' in [conjugate]");
    } else {
      cfg_error(name, line, "key outside any section");
    }
  }
  if (!(cfg.t_end > 0)) cfg_error(name, line, "grid t_end must be positive");
  cfg.model.load = load.build(name, load_line);
  cfg.model.displacement = disp.build(name, disp_line);
  cfg.model.validate();
  cfg.potential = pot.build(name);
  return cfg;
}

RunConfig parse_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("cannot open config: " + path);
  return parse_config(in, path);
}

// ---- trajectory CSV --------------------------------------------------

void write_trajectory_csv(const std::string& path, const HamiltonianModel& h,
                          const Trajectory& traj, const BenReport& rep) {
  const Eigen::Index n = traj.state(0).dim();
  std::ostringstream out;
  out << "t";
  for (Eigen::Index i = 1; i <= n; ++i) out << ",x_" << i;
  for (Eigen::Index i = 1; i <= n; ++i) out << ",y_" << i;
  out << ",H,step_gap,dissipation_rate\n";
  for (size_t k = 0; k < traj.grid().size(); ++k) {
    out << fmt17(traj.grid().t(k));
    const Vector f = traj.state(k).flat();
    for (Eigen::Index i = 0; i < f.size(); ++i) out << "," << fmt17(f[i]);
    out << "," << fmt17(h.evaluate(traj.grid().t(k), traj.state(k)));
    if (k == 0)
      out << "," << fmt17(0.0) << "," << fmt17(0.0);
    else
      out << "," << fmt17(rep.step_gap[k - 1]) << ","
          << fmt17(rep.dissipation_rate[k - 1]);
    out << "\n";
  }
  atomic_write(path, out.str());
}

Trajectory read_trajectory_csv(const std::string& path, Eigen::Index n) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("cannot open trajectory: " + path);
  std::string header;
  if (!std::getline(in, header))
    throw std::invalid_argument("empty trajectory file: " + path);
  {
    std::ostringstream expect;
    expect << "t";
    for (Eigen::Index i = 1; i <= n; ++i) expect << ",x_" << i;
    for (Eigen::Index i = 1; i <= n; ++i) expect << ",y_" << i;
    expect << ",H,step_gap,dissipation_rate";
    if (trim(header) != expect.str())
      throw std::invalid_argument("trajectory schema mismatch in " + path);
  }
  std::vector<double> times;
  std::vector<PhaseVector> states;
  std::string row;
  int line = 1;
  while (std::getline(in, row)) {
    ++line;
    if (trim(row).empty()) continue;
    std::stringstream ss(row);
    std::string cell;
    std::vector<double> vals;
    while (std::getline(ss, cell, ',')) {
      cell = trim(cell);
      vals.push_back(cell == "inf" ? std::numeric_limits<double>::infinity()
                                   : to_double(path, line, cell));
    }
    if (vals.size() != static_cast<size_t>(2 * n + 4))
      throw std::invalid_argument(path + ":" + std::to_string(line) +
                                  ": wrong column count");
    times.push_back(vals[0]);
    Vector f(2 * n);
    for (Eigen::Index i = 0; i < 2 * n; ++i) f[i] = vals[static_cast<size_t>(i) + 1];
    states.push_back(PhaseVector::from_flat(f));
  }
  return Trajectory(TimeGrid(std::move(times)), std::move(states));
}

// ---- commands --------------------------------------------------------

namespace {

size_t effective_steps(const RunConfig& cfg, const Options& opt) {
  if (!opt.dt_override) return cfg.steps;
  if (!(*opt.dt_override > 0))
    throw std::invalid_argument("--dt-override must be positive");
  return std::max<size_t>(1, static_cast<size_t>(std::llround(cfg.t_end / *opt.dt_override)));
}

std::string kind_name(ModelSpec::Kind k) {
  switch (k) {
    case ModelSpec::Kind::HarmonicOscillator: return "harmonic_oscillator";
    case ModelSpec::Kind::MaxwellElement: return "maxwell";
    case ModelSpec::Kind::ElastoplasticOscillator: return "elastoplastic_oscillator";
    case ModelSpec::Kind::BarChain: return "bar_chain";
    case ModelSpec::Kind::QuasiStaticBar: return "quasistatic_bar";
  }
  return "?";
}

json report_common(const RunConfig& cfg, const BenReport& rep, const TimeGrid& grid) {
  json j;
  j["schema_version"] = 1;
  j["model"] = kind_name(cfg.model.kind);
  j["seed"] = cfg.seed;
  j["grid"] = {{"t_end", grid.t_end()}, {"steps", grid.steps()}};
  j["tolerances"] = {{"step_tol", rep.step_tol},
                     {"certificate_tol", rep.certificate_tol}};
  j["converged"] = rep.converged;
  j["certified"] = rep.certified;
  j["action"] = jnum(rep.action);
  j["hamiltonian_initial"] = rep.hamiltonian_initial;
  j["certificate_gap"] = jnum(rep.certificate_gap);
  j["max_step_gap"] = jnum(rep.max_step_gap());
  double total = 0.0;
  bool finite = true;
  for (size_t k = 0; k < rep.dissipation_rate.size(); ++k) {
    if (rep.dissipation_rate[k].is_infinite()) finite = false;
    else total += grid.dt(k + 1) * rep.dissipation_rate[k].value();
  }
  j["total_dissipation"] = finite ? json(total) : json("inf");
  return j;
}

void write_json(const fs::path& path, const json& j) {
  atomic_write(path, j.dump(2) + "\n");
}

}  // namespace

int cmd_simulate(const RunConfig& cfg, const Options& opt) {
  if (cfg.model.kind == ModelSpec::Kind::QuasiStaticBar)
    throw std::invalid_argument(
        "simulate: quasistatic_bar has no dynamic state; use the compare command");
  const BuiltModel built = build(cfg.model);
  const TimeGrid grid = TimeGrid::uniform(0.0, cfg.t_end, effective_steps(cfg, opt));
  log(1, opt.quiet, "simulate " + kind_name(cfg.model.kind) + ", " +
                        std::to_string(grid.steps()) + " steps, method " + cfg.method);

  Trajectory traj(grid, std::vector<PhaseVector>(grid.size(), built.initial_state));
  BenReport rep;
  if (cfg.method == "global") {
    std::tie(traj, rep) = global_solve(built.hamiltonian, built.potential,
                                       built.initial_state, grid, cfg.solver);
  } else {
    std::tie(traj, rep) = incremental_solve(built.hamiltonian, built.potential,
                                            built.initial_state, grid, cfg.solver);
  }

  write_trajectory_csv(resolve(opt, cfg.trajectory_csv).string(), built.hamiltonian,
                       traj, rep);
  json j = report_common(cfg, rep, grid);
  j["command"] = "simulate";
  j["method"] = cfg.method;
  if (cfg.method == "global") j["sweeps_used"] = rep.sweeps_used;
  {
    json gaps = json::array(), diss = json::array();
    for (const auto& g : rep.step_gap) gaps.push_back(jnum(g));
    for (const auto& d : rep.dissipation_rate) diss.push_back(jnum(d));
    j["step_gap"] = gaps;
    j["dissipation_rate"] = diss;
  }
  write_json(resolve(opt, cfg.report_json), j);
  log(1, opt.quiet,
      std::string("simulate: ") + (rep.certified ? "certified" : "not certified"));
  return rep.certified ? 0 : 2;
}

int cmd_verify(const RunConfig& cfg, const Options& opt) {
  if (cfg.model.kind == ModelSpec::Kind::QuasiStaticBar)
    throw std::invalid_argument("verify: quasistatic_bar trajectories are not phase curves");
  const BuiltModel built = build(cfg.model);
  const Trajectory traj = read_trajectory_csv(resolve(opt, cfg.trajectory_csv).string(),
                                              built.hamiltonian.dimension);
  const BenReport rep = make_report(built.hamiltonian, built.potential, traj, cfg.solver);
  const double dt = traj.grid().dt(1);
  const double t_span = traj.grid().t_end() - traj.grid().t(0);
  const double scale = 1.0 + std::abs(rep.hamiltonian_initial);

  json checks;
  bool all_pass = true;
  auto add_check = [&](const std::string& name, bool pass, double value,
                       double threshold) {
    checks[name] = {{"pass", pass}, {"value", jnum(value)}, {"threshold", threshold}};
    all_pass = all_pass && pass;
  };

  add_check("step_gap", rep.converged, rep.max_step_gap(), rep.step_tol);

  {
    double worst = 0.0;
    for (const ExtReal& d : energy_balance(built.hamiltonian, built.potential, traj))
      worst = std::max(worst, d.is_finite()
                                  ? std::abs(d.value())
                                  : std::numeric_limits<double>::infinity());
    const double thr = 50.0 * dt * std::max(t_span, dt) * scale;
    add_check("energy_balance", worst <= thr, worst, thr);
  }
  {
    double worst = 0.0;  // most negative defect, as a magnitude
    for (const ExtReal& d :
         dissipation_inequality(built.hamiltonian, built.potential, traj))
      if (d.is_finite()) worst = std::max(worst, std::max(0.0, -d.value()));
    const double thr = 50.0 * dt * scale;
    add_check("dissipation_inequality", worst <= thr, worst, thr);
  }
  const bool plastic = cfg.model.kind == ModelSpec::Kind::ElastoplasticOscillator ||
                       cfg.model.kind == ModelSpec::Kind::BarChain;
  if (plastic) {
    const ConstraintDefects defs = plasticity_constraints_defect(cfg.model, traj);
    const double thr = 50.0 * dt * (scale + cfg.model.yield_stress);
    auto maxof = [](const std::vector<double>& v) {
      return v.empty() ? 0.0 : *std::max_element(v.begin(), v.end());
    };
    add_check("momentum_constraint", maxof(defs.momentum) <= thr, maxof(defs.momentum), thr);
    add_check("momentum_balance", maxof(defs.balance) <= thr, maxof(defs.balance), thr);
    add_check("stress_rate_constraint", maxof(defs.stress_rate) <= thr,
              maxof(defs.stress_rate), thr);

    double worst_sigma = 0.0;
    for (size_t k = 0; k < traj.grid().size(); ++k) {
      const Vector s = element_stresses(cfg.model, traj.grid().t(k), traj.state(k));
      worst_sigma = std::max(worst_sigma, s.cwiseAbs().maxCoeff());
    }
    const double sy_thr = cfg.model.yield_stress * (1.0 + 1e-9);
    add_check("yield_admissibility", worst_sigma <= sy_thr, worst_sigma, sy_thr);
  }

  json j = report_common(cfg, rep, traj.grid());
  j["command"] = "verify";
  j["checks"] = checks;
  j["all_pass"] = all_pass;
  write_json(resolve(opt, cfg.report_json), j);
  log(1, opt.quiet, std::string("verify: ") + (all_pass ? "all checks pass" : "checks failed"));
  return all_pass ? 0 : 2;
}

int cmd_compare(const RunConfig& cfg, const Options& opt) {
  const ModelSpec::Kind kind = cfg.model.kind;
  if (kind != ModelSpec::Kind::MaxwellElement &&
      kind != ModelSpec::Kind::ElastoplasticOscillator &&
      kind != ModelSpec::Kind::BarChain && kind != ModelSpec::Kind::QuasiStaticBar)
    throw std::invalid_argument("compare: supported kinds are maxwell, "
                                "elastoplastic_oscillator, bar_chain, quasistatic_bar");
  const size_t base_steps = effective_steps(cfg, opt);

  std::vector<double> errors;
  std::ostringstream csv;
  for (int level = 0; level < 3; ++level) {
    const size_t steps = base_steps << level;
    const TimeGrid grid = TimeGrid::uniform(0.0, cfg.t_end, steps);
    if (kind == ModelSpec::Kind::QuasiStaticBar) {
      const QuasiStaticResult res = quasistatic_ben_solve(cfg.model, grid);
      const Trajectory oracle = return_mapping_oracle(cfg.model, grid);
      const double h = cfg.model.length / cfg.model.elements;
      double err = 0.0;
      for (size_t k = 0; k < grid.size(); ++k) {
        // oracle stress from its plastic elongation state
        const double eps_bar = cfg.model.displacement.value(grid.t(k)) / cfg.model.length;
        const double eps_i = oracle.state(k).x()[cfg.model.elements] / h;
        const double sig_oracle = cfg.model.stiffness * (eps_bar - eps_i);
        err = std::max(err, std::abs(res.sigma[k] - sig_oracle));
        if (level == 0) {
          if (k == 0) csv << "t,ben_sigma,oracle_sigma\n";
          csv << fmt17(grid.t(k)) << "," << fmt17(res.sigma[k]) << ","
              << fmt17(sig_oracle) << "\n";
        }
      }
      errors.push_back(err);
    } else {
      const BuiltModel built = build(cfg.model);
      const auto [traj, rep] = incremental_solve(built.hamiltonian, built.potential,
                                                 built.initial_state, grid, cfg.solver);
      (void)rep;
      const Trajectory oracle = return_mapping_oracle(cfg.model, grid);
      double err = 0.0;
      const Eigen::Index n = built.initial_state.dim();
      for (size_t k = 0; k < grid.size(); ++k) {
        err = std::max(err,
                       (traj.state(k).flat() - oracle.state(k).flat())
                           .lpNorm<Eigen::Infinity>());
        if (level == 0) {
          if (k == 0) {
            csv << "t";
            for (Eigen::Index i = 1; i <= n; ++i) csv << ",ben_x_" << i;
            for (Eigen::Index i = 1; i <= n; ++i) csv << ",ben_y_" << i;
            for (Eigen::Index i = 1; i <= n; ++i) csv << ",oracle_x_" << i;
            for (Eigen::Index i = 1; i <= n; ++i) csv << ",oracle_y_" << i;
            csv << "\n";
          }
          csv << fmt17(grid.t(k));
          const Vector a = traj.state(k).flat(), b = oracle.state(k).flat();
          for (Eigen::Index i = 0; i < a.size(); ++i) csv << "," << fmt17(a[i]);
          for (Eigen::Index i = 0; i < b.size(); ++i) csv << "," << fmt17(b[i]);
          csv << "\n";
        }
      }
      errors.push_back(err);
    }
  }

  std::vector<double> orders;
  for (size_t i = 0; i + 1 < errors.size(); ++i)
    orders.push_back(errors[i + 1] > 0 ? std::log2(errors[i] / errors[i + 1]) : 10.0);

  atomic_write(resolve(opt, cfg.trajectory_csv), csv.str());
  json j;
  j["schema_version"] = 1;
  j["command"] = "compare";
  j["model"] = kind_name(kind);
  j["seed"] = cfg.seed;
  j["steps_levels"] = {base_steps, base_steps * 2, base_steps * 4};
  j["sup_errors"] = errors;
  j["convergence_orders"] = orders;
  const double min_order = *std::min_element(orders.begin(), orders.end());
  j["order_ok"] = min_order >= 0.9;
  write_json(resolve(opt, cfg.report_json), j);
  log(1, opt.quiet, "compare: min observed order " + fmt17(min_order));
  return 0;
}

int cmd_conjugate(const RunConfig& cfg, const Options& opt) {
  if (!cfg.potential)
    throw std::invalid_argument("conjugate: config needs a [potential] section");
  const Potential& p = *cfg.potential;
  const Eigen::Index d = p.dim();
  if (d % 2 != 0)
    throw std::invalid_argument("conjugate: potential dimension must be even "
                                "(phase-space polar column)");
  const int res = cfg.conjugate_resolution;
  if (res < 2) throw std::invalid_argument("conjugate: resolution must be >= 2");
  double total = 1.0;
  for (Eigen::Index i = 0; i < d; ++i) total *= res;
  if (total > 1e5)
    throw std::invalid_argument("conjugate: more than 1e5 grid points requested");

  const Potential conj = p.conjugate_potential();
  const GridOracle oracle = GridOracle::cube(2.0 * cfg.conjugate_half_width, d,
                                             std::min(401, 4 * res));
  std::ostringstream out;
  for (Eigen::Index i = 1; i <= d; ++i) out << (i > 1 ? "," : "") << "w_" << i;
  out << ",closed_form,brute_force,polar\n";

  std::vector<int> idx(static_cast<size_t>(d), 0);
  Vector w(d);
  while (true) {
    for (Eigen::Index i = 0; i < d; ++i)
      w[i] = -cfg.conjugate_half_width +
             2.0 * cfg.conjugate_half_width * idx[static_cast<size_t>(i)] / (res - 1);
    for (Eigen::Index i = 0; i < d; ++i) out << (i > 0 ? "," : "") << fmt17(w[i]);
    out << "," << fmt17(conj.evaluate(w));
    out << "," << fmt17(brute_force_conjugate(p, w, oracle));
    out << "," << fmt17(conj.evaluate(jmap(PhaseVector::from_flat(w)).flat()));
    out << "\n";
    Eigen::Index i = 0;
    for (; i < d; ++i) {
      if (++idx[static_cast<size_t>(i)] < res) break;
      idx[static_cast<size_t>(i)] = 0;
    }
    if (i == d) break;
  }
  atomic_write(resolve(opt, cfg.conjugate_csv), out.str());
  return 0;
}

int run(int argc, char** argv) {
  CLI::App app{"finite-dimensional dissipative Hamiltonian solver toolkit"};
  app.require_subcommand(1);

  std::string config_path;
  Options opt;
  double dt_override = 0.0;
  bool have_dt = false;

  auto add_common = [&](CLI::App* sub) {
    sub->add_option("config", config_path, "run configuration file")->required();
    sub->add_option("--out-dir", opt.out_dir, "directory for relative output paths");
    sub->add_option("--dt-override", dt_override, "override the time step")
        ->each([&](const std::string&) { have_dt = true; });
    sub->add_flag("--quiet", opt.quiet, "suppress log output");
  };
  CLI::App* sim = app.add_subcommand("simulate", "run a solver and write outputs");
  CLI::App* ver = app.add_subcommand("verify", "re-check a written trajectory");
  CLI::App* cmp = app.add_subcommand("compare", "solver vs oracle at three step sizes");
  CLI::App* con = app.add_subcommand("conjugate", "tabulate conjugates over a grid");
  for (CLI::App* sub : {sim, ver, cmp, con}) add_common(sub);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : 1;
  }

  try {
    if (have_dt) opt.dt_override = dt_override;
    const RunConfig cfg = parse_config_file(config_path);
    if (sim->parsed()) return cmd_simulate(cfg, opt);
    if (ver->parsed()) return cmd_verify(cfg, opt);
    if (cmp->parsed()) return cmd_compare(cfg, opt);
    if (con->parsed()) return cmd_conjugate(cfg, opt);
    return 1;
  } catch (const SolveError& e) {
    log(3, false, std::string("solver failure: ") + e.what());
    return 1;
  } catch (const std::exception& e) {
    log(3, false, e.what());
    return 1;
  }
}

}  // namespace sben::cli
