#include "maser/runner.hpp"

#include <atomic>
#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <fstream>
#include <iomanip>
#include <sstream>
#include <thread>

#include "maser/field_optics.hpp"
#include "maser/work_quantifiers.hpp"

namespace maser {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

const std::pair<OutputKind, const char*> kOutputNames[] = {
    {OutputKind::LedgerCsv, "ledger_csv"},         {OutputKind::QGrid, "qgrid"},
    {OutputKind::EfficiencyJson, "efficiency_json"}, {OutputKind::AuditJson, "audit_json"},
    {OutputKind::PnumCsv, "pnum_csv"},             {OutputKind::LandscapeCsv, "landscape_csv"}};

[[noreturn]] void config_error(const std::string& what) { throw DomainError("config: " + what); }

bool integer_ratio(double num, double den) {
  const double r = num / den;
  return r >= 1.0 - 1e-9 && std::abs(r - std::round(r)) <= 1e-9 * r;
}

void reject_unknown_keys(const json& j, std::initializer_list<const char*> allowed, const char* where) {
  for (const auto& [key, value] : j.items()) {
    bool ok = false;
    for (const char* a : allowed) ok = ok || key == a;
    if (!ok) config_error(std::string("unknown key '") + key + "' in " + where);
  }
}

template <class T>
T get(const json& j, const char* key, const char* where) {
  if (!j.contains(key)) config_error(std::string("missing '") + key + "' in " + where);
  try {
    return j.at(key).get<T>();
  } catch (const json::exception&) {
    config_error(std::string("wrong type for '") + key + "' in " + where);
  }
}

json params_to_json(const EngineParams& p) {
  return {{"omega1", p.omega1}, {"omega2", p.omega2}, {"omega3", p.omega3},
          {"omega_f", p.omega_f}, {"g", p.g},         {"gamma_c", p.gamma_c},
          {"gamma_h", p.gamma_h}, {"T_c", p.T_c},     {"T_h", p.T_h},
          {"n_field", p.n_field}};
}

EngineParams params_from_json(const json& j) {
  if (!j.is_object()) config_error("'params' must be an object");
  reject_unknown_keys(j, {"omega1", "omega2", "omega3", "omega_f", "g", "gamma_c", "gamma_h", "T_c",
                          "T_h", "n_field"},
                      "params");
  const char* w = "params";
  EngineParams p;
  p.omega1 = get<double>(j, "omega1", w);
  p.omega2 = get<double>(j, "omega2", w);
  p.omega3 = get<double>(j, "omega3", w);
  p.omega_f = get<double>(j, "omega_f", w);
  p.g = get<double>(j, "g", w);
  p.gamma_c = get<double>(j, "gamma_c", w);
  p.gamma_h = get<double>(j, "gamma_h", w);
  p.T_c = get<double>(j, "T_c", w);
  p.T_h = get<double>(j, "T_h", w);
  p.n_field = get<int>(j, "n_field", w);
  return p;
}

json initial_to_json(const InitialStateSpec& s) {
  using K = InitialStateSpec::Kind;
  switch (s.kind) {
    case K::GroundVacuum: return {{"kind", "ground_vacuum"}};
    case K::Gibbs: return {{"kind", "gibbs"}, {"T_atom", s.T_atom}, {"T_field", s.T_field}};
    case K::GibbsPoisson: return {{"kind", "gibbs_poisson"}, {"T_atom", s.T_atom}, {"mean", s.mean}};
    case K::Custom: return {{"kind", "custom"}, {"path", s.path}};
  }
  return {};
}

InitialStateSpec initial_from_json(const json& j) {
  if (!j.is_object()) config_error("'initial_state' must be an object");
  const char* w = "initial_state";
  const auto kind = get<std::string>(j, "kind", w);
  InitialStateSpec s;
  using K = InitialStateSpec::Kind;
  if (kind == "ground_vacuum") {
    reject_unknown_keys(j, {"kind"}, w);
    s.kind = K::GroundVacuum;
  } else if (kind == "gibbs") {
    reject_unknown_keys(j, {"kind", "T_atom", "T_field"}, w);
    s.kind = K::Gibbs;
    s.T_atom = get<double>(j, "T_atom", w);
    s.T_field = get<double>(j, "T_field", w);
  } else if (kind == "gibbs_poisson") {
    reject_unknown_keys(j, {"kind", "T_atom", "mean"}, w);
    s.kind = K::GibbsPoisson;
    s.T_atom = get<double>(j, "T_atom", w);
    s.mean = get<double>(j, "mean", w);
  } else if (kind == "custom") {
    reject_unknown_keys(j, {"kind", "path"}, w);
    s.kind = K::Custom;
    s.path = get<std::string>(j, "path", w);
  } else {
    config_error("unknown initial_state kind '" + kind + "'");
  }
  return s;
}

void write_double(std::ostream& os, double x) {
  if (std::isnan(x))
    os << "nan";
  else
    os << x;
}

struct OutputRecord {
  OutputKind kind;
  fs::path path;
};

std::ofstream open_out(const fs::path& path) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw std::runtime_error("cannot write " + path.string());
  os << std::setprecision(17);
  return os;
}

void write_json_file(const fs::path& path, const json& j) {
  std::ofstream os = open_out(path);
  os << j.dump(2) << '\n';
}

QOperator load_custom_state(const std::string& path) {
  std::ifstream is(path);
  if (!is) config_error("cannot read custom initial state '" + path + "'");
  json j;
  try {
    is >> j;
  } catch (const json::exception& e) {
    config_error("custom initial state is not valid JSON: " + std::string(e.what()));
  }
  const char* w = "custom initial state";
  const auto dim = get<Index>(j, "dim", w);
  const auto re = get<std::vector<std::vector<double>>>(j, "re", w);
  const auto im = get<std::vector<std::vector<double>>>(j, "im", w);
  if (dim <= 0 || Index(re.size()) != dim || Index(im.size()) != dim)
    config_error("custom initial state: 're'/'im' must be dim x dim");
  QOperator rho(dim, dim);
  for (Index r = 0; r < dim; ++r) {
    if (Index(re[std::size_t(r)].size()) != dim || Index(im[std::size_t(r)].size()) != dim)
      config_error("custom initial state: ragged row");
    for (Index c = 0; c < dim; ++c) rho(r, c) = {re[std::size_t(r)][std::size_t(c)], im[std::size_t(r)][std::size_t(c)]};
  }
  return rho;
}

QOperator diagonal_state(const std::vector<double>& p) {
  QOperator rho = QOperator::Zero(Index(p.size()), Index(p.size()));
  for (std::size_t k = 0; k < p.size(); ++k) rho(Index(k), Index(k)) = p[k];
  return rho;
}

QOperator atom_gibbs(const EngineParams& p, double T) {
  const double levels[] = {p.omega1, p.omega2, p.omega3};
  return diagonal_state(gibbs_populations(levels, T));
}

std::vector<double> field_levels(const EngineParams& p) {
  std::vector<double> levels(std::size_t(p.n_field));
  for (int n = 0; n < p.n_field; ++n) levels[std::size_t(n)] = p.omega_f * double(n);
  return levels;
}

double max_audit(const Trajectory& t, double RecordAudit::*field) {
  double m = 0.0;
  for (const auto& a : t.audit) m = std::max(m, a.*field);
  return m;
}

double min_eigenvalue(const Trajectory& t) {
  double m = std::numeric_limits<double>::infinity();
  for (const auto& a : t.audit) m = std::min(m, a.min_eigenvalue);
  return m;
}

std::vector<std::vector<double>> read_csv_rows(const fs::path& path, std::vector<std::string>& header) {
  std::ifstream is(path);
  if (!is) throw std::runtime_error("cannot read " + path.string());
  std::string line;
  std::getline(is, line);
  header.clear();
  {
    std::istringstream ls(line);
    std::string cell;
    while (std::getline(ls, cell, ',')) header.push_back(cell);
  }
  std::vector<std::vector<double>> rows;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    std::istringstream ls(line);
    std::string cell;
    std::vector<double> row;
    while (std::getline(ls, cell, ',')) {
      std::size_t used = 0;
      const double v = cell == "nan" ? std::nan("") : std::stod(cell, &used);
      if (cell != "nan" && used != cell.size()) throw std::runtime_error("bad number '" + cell + "'");
      row.push_back(v);
    }
    if (row.size() != header.size())
      throw std::runtime_error("row " + std::to_string(rows.size() + 1) + " has " + std::to_string(row.size()) +
                               " cells, header has " + std::to_string(header.size()));
    rows.push_back(std::move(row));
  }
  return rows;
}

Trajectory simulate_from(const RunConfig& c, const QOperator& rho0) {
  IntegrationOptions opt;
  opt.t_final = c.t_final;
  opt.dt = c.dt;
  opt.record_every = c.record_every;
  opt.frame = c.frame;
  return integrate(rho0, c.params, opt, {thermo_observer(c.params, c.frame)});
}

// Integrate task: every output except the landscape.
void run_integration(const RunConfig& c, const QOperator& rho0, const fs::path& out,
                     std::vector<OutputRecord>& written, json& manifest, int& exit_code) {
  const EngineParams& p = c.params;
  const Trajectory traj = simulate_from(c, rho0);
  manifest["complete"] = traj.complete;
  manifest["diagnostic"] = traj.diagnostic;
  manifest["records"] = traj.size();
  if (!traj.complete) exit_code = kExitAudit;

  std::optional<EntropyProduction> ep;
  if (traj.size() >= 3) ep = entropy_production_rate(traj, p);
  if (ep && !ep->passed) exit_code = kExitAudit;
  const double max_trace = max_audit(traj, &RecordAudit::trace_error);
  const double min_eig = min_eigenvalue(traj);
  const bool positivity = max_trace < 1e-8 && min_eig >= -1e-8;
  if (!positivity) exit_code = kExitAudit;

  const TimeWindow window = [&] {
    if (traj.size() < 2) return TimeWindow{};
    TimeWindow w = default_window(traj);
    if (c.window_start) w.start = *c.window_start;
    if (c.window_end) w.end = *c.window_end;
    return w;
  }();

  if (c.outputs.count(OutputKind::LedgerCsv)) {
    const fs::path path = out / output_file(OutputKind::LedgerCsv);
    std::ofstream os = open_out(path);
    for (std::size_t k = 0; k < kLedgerColumns.size(); ++k) os << (k ? "," : "") << kLedgerColumns[k];
    os << '\n';
    for (std::size_t r = 0; r < traj.size(); ++r) {
      os << traj.times[r];
      for (std::size_t k = 1; k + 1 < kLedgerColumns.size(); ++k) {
        os << ',';
        write_double(os, traj.series(kLedgerColumns[k])[r]);
      }
      os << ',';
      write_double(os, ep ? ep->sigma[r] : std::nan(""));
      os << '\n';
    }
    written.push_back({OutputKind::LedgerCsv, path});
  }

  if (c.outputs.count(OutputKind::EfficiencyJson)) {
    json j;
    try {
      j = to_json(efficiency_report(traj, window, p));
      j["status"] = "ok";
    } catch (const PreconditionError& e) {
      j = {{"status", "rejected"}, {"reason", e.what()}, {"t_start", window.start}, {"t_end", window.end}};
    }
    const fs::path path = out / output_file(OutputKind::EfficiencyJson);
    write_json_file(path, j);
    written.push_back({OutputKind::EfficiencyJson, path});
  }

  if (c.outputs.count(OutputKind::AuditJson)) {
    json j;
    j["complete"] = traj.complete;
    j["diagnostic"] = traj.diagnostic;
    j["max_trace_error"] = max_trace;
    j["max_hermiticity_error"] = max_audit(traj, &RecordAudit::hermiticity_error);
    j["min_eigenvalue"] = min_eig;
    j["max_tail_population"] = max_audit(traj, &RecordAudit::tail_population);
    j["positivity_passed"] = positivity;
    if (ep) {
      j["sigma_min"] = ep->sigma_min;
      j["sigma_max_abs"] = ep->sigma_max_abs;
      j["second_law_passed"] = ep->passed;
      const EhrenfestResiduals er = ehrenfest_residuals(traj, p);
      j["ehrenfest_max_photon"] = er.max_photon();
      j["ehrenfest_max_p2"] = er.max_p2();
      j["ehrenfest_max_p3"] = er.max_p3();
      const SteadyStateCheck ss = steady_state_check(traj, window);
      j["steady_state"] = {{"ok", ss.ok},
                           {"max_population_rate", ss.max_population_rate},
                           {"mean_J_h", ss.mean_J_h},
                           {"violation", ss.violation}};
      try {
        const CarnotCheck cc = carnot_af_check(traj, window, p);
        j["carnot_af"] = {{"ratio", cc.ratio},
                          {"margin", cc.margin},
                          {"min_record_margin", cc.min_record_margin},
                          {"passed", cc.passed}};
      } catch (const PreconditionError& e) {
        j["carnot_af"] = {{"rejected", e.what()}};
      }
      try {
        const SubadditivityAudit sa = subadditivity_audit(traj, window);
        j["subadditivity"] = {{"worst_margin", sa.worst_margin}, {"passed", sa.passed}};
      } catch (const PreconditionError& e) {
        j["subadditivity"] = {{"rejected", e.what()}};
      }
    }
    const fs::path path = out / output_file(OutputKind::AuditJson);
    write_json_file(path, j);
    written.push_back({OutputKind::AuditJson, path});
  }

  const QOperator rho_f = partial_trace(traj.final_state, Subsystem::Field, p.dims());
  if (c.outputs.count(OutputKind::PnumCsv)) {
    const fs::path path = out / output_file(OutputKind::PnumCsv);
    std::ofstream os = open_out(path);
    os << "n,p_n\n";
    const PhotonStats ps = photon_stats(rho_f);
    for (std::size_t n = 0; n < ps.distribution.size(); ++n) os << n << ',' << ps.distribution[n] << '\n';
    written.push_back({OutputKind::PnumCsv, path});
  }
  if (c.outputs.count(OutputKind::QGrid)) {
    Warnings warnings;
    const QGrid q = q_function(rho_f, QGridSpec::around(photon_stats(rho_f).mean), &warnings);
    const fs::path path = out / output_file(OutputKind::QGrid);
    std::ofstream os = open_out(path);
    q.write_csv(os);
    written.push_back({OutputKind::QGrid, path});
    for (const auto& w : warnings) manifest["warnings"].push_back(w);
  }
}

void run_landscape(const RunConfig& c, const fs::path& out, std::vector<OutputRecord>& written,
                   json& manifest) {
  const LandscapeSpec& s = c.landscape;
  std::vector<double> grid(std::size_t(s.points));
  for (int k = 0; k < s.points; ++k)
    grid[std::size_t(k)] = s.e_min + (s.e_max - s.e_min) * double(k) / double(s.points - 1);
  const Landscape l = free_energy_landscape_levels(field_levels(c.params), s.T_ref, grid);
  for (const auto& w : l.warnings) manifest["warnings"].push_back(w);
  manifest["complete"] = true;
  if (c.outputs.count(OutputKind::LandscapeCsv)) {
    const fs::path path = out / output_file(OutputKind::LandscapeCsv);
    std::ofstream os = open_out(path);
    os << "E,T,thermal_F,pure_F\n";
    for (const auto& pt : l.points)
      os << pt.energy << ',' << pt.temperature << ',' << pt.thermal_F << ',' << pt.pure_F << '\n';
    written.push_back({OutputKind::LandscapeCsv, path});
  }
}

}  // namespace

std::string to_string(OutputKind k) {
  for (const auto& [kind, name] : kOutputNames)
    if (kind == k) return name;
  return "?";
}

OutputKind output_from_string(const std::string& s) {
  for (const auto& [kind, name] : kOutputNames)
    if (s == name) return kind;
  config_error("unknown output '" + s + "'");
}

std::string output_file(OutputKind k) {
  switch (k) {
    case OutputKind::LedgerCsv: return "ledger.csv";
    case OutputKind::QGrid: return "qgrid.csv";
    case OutputKind::EfficiencyJson: return "efficiency.json";
    case OutputKind::AuditJson: return "audit.json";
    case OutputKind::PnumCsv: return "pnum.csv";
    case OutputKind::LandscapeCsv: return "landscape.csv";
  }
  return "";
}

void RunConfig::validate() const {
  if (name.empty() || name.find_first_of("/\\") != std::string::npos || name == "." || name == "..")
    config_error("name must be a plain non-empty file name");
  params.validate();
  if (task == Task::Landscape) {
    if (!(landscape.T_ref > 0.0)) config_error("landscape.T_ref must be > 0");
    if (landscape.points < 2) config_error("landscape.points must be >= 2");
    if (!(landscape.e_min >= 0.0) || !(landscape.e_max > landscape.e_min))
      config_error("landscape energies need 0 <= e_min < e_max");
    for (OutputKind k : outputs)
      if (k != OutputKind::LandscapeCsv) config_error("landscape task only writes landscape_csv");
    return;
  }
  if (!(dt > 0.0) || !(record_every >= dt) || !(t_final >= record_every))
    config_error("need 0 < dt <= record_every <= t_final");
  if (!integer_ratio(record_every, dt)) config_error("record_every must be an integer multiple of dt");
  if (!integer_ratio(t_final, record_every))
    config_error("t_final must be an integer multiple of record_every");
  if (t_final / record_every < 2.0) config_error("need at least 3 record times");
  using K = InitialStateSpec::Kind;
  if ((initial.kind == K::Gibbs || initial.kind == K::GibbsPoisson) && !(initial.T_atom > 0.0))
    config_error("initial_state.T_atom must be > 0");
  if (initial.kind == K::Gibbs && !(initial.T_field > 0.0)) config_error("initial_state.T_field must be > 0");
  if (initial.kind == K::GibbsPoisson && !(initial.mean >= 0.0))
    config_error("initial_state.mean must be >= 0");
  if (initial.kind == K::Custom && initial.path.empty()) config_error("initial_state.path is empty");
  for (OutputKind k : outputs)
    if (k == OutputKind::LandscapeCsv) config_error("landscape_csv needs task 'landscape'");
  const double ws = window_start.value_or(0.0), we = window_end.value_or(t_final);
  if (!(ws >= 0.0) || !(we <= t_final) || !(we > ws)) config_error("window must satisfy 0 <= start < end <= t_final");
}

json to_json(const RunConfig& c) {
  json j;
  j["units"] = kUnitConvention;
  j["name"] = c.name;
  j["task"] = c.task == RunConfig::Task::Landscape ? "landscape" : "integrate";
  j["params"] = params_to_json(c.params);
  std::vector<std::string> outs;
  for (OutputKind k : c.outputs) outs.push_back(to_string(k));
  j["outputs"] = outs;
  if (c.task == RunConfig::Task::Landscape) {
    j["landscape"] = {{"T_ref", c.landscape.T_ref},
                      {"e_min", c.landscape.e_min},
                      {"e_max", c.landscape.e_max},
                      {"points", c.landscape.points}};
    return j;
  }
  j["initial_state"] = initial_to_json(c.initial);
  j["t_final"] = c.t_final;
  j["dt"] = c.dt;
  j["record_every"] = c.record_every;
  j["frame"] = to_string(c.frame);
  json w = json::object();
  if (c.window_start) w["start"] = *c.window_start;
  if (c.window_end) w["end"] = *c.window_end;
  j["window"] = w;
  return j;
}

RunConfig config_from_json(const json& j) {
  if (!j.is_object()) config_error("top level must be a JSON object");
  if (!j.contains("units")) config_error("missing \"units\" field (expected \"" + std::string(kUnitConvention) + "\")");
  if (!j.at("units").is_string() || j.at("units").get<std::string>() != kUnitConvention)
    config_error("unsupported units (expected \"" + std::string(kUnitConvention) + "\")");
  const char* w = "config";
  RunConfig c;
  const std::string task = j.value("task", std::string("integrate"));
  c.name = get<std::string>(j, "name", w);
  c.params = params_from_json(get<json>(j, "params", w));
  for (const auto& s : get<std::vector<std::string>>(j, "outputs", w)) c.outputs.insert(output_from_string(s));
  if (task == "landscape") {
    reject_unknown_keys(j, {"units", "name", "task", "params", "outputs", "landscape"}, w);
    c.task = RunConfig::Task::Landscape;
    const json l = get<json>(j, "landscape", w);
    reject_unknown_keys(l, {"T_ref", "e_min", "e_max", "points"}, "landscape");
    c.landscape.T_ref = get<double>(l, "T_ref", "landscape");
    c.landscape.e_min = get<double>(l, "e_min", "landscape");
    c.landscape.e_max = get<double>(l, "e_max", "landscape");
    c.landscape.points = get<int>(l, "points", "landscape");
  } else if (task == "integrate") {
    reject_unknown_keys(j, {"units", "name", "task", "params", "outputs", "initial_state", "t_final", "dt",
                            "record_every", "frame", "window"},
                        w);
    c.initial = initial_from_json(get<json>(j, "initial_state", w));
    c.t_final = get<double>(j, "t_final", w);
    c.dt = get<double>(j, "dt", w);
    c.record_every = get<double>(j, "record_every", w);
    c.frame = frame_from_string(j.value("frame", std::string("rotating")));
    if (j.contains("window")) {
      const json& win = j.at("window");
      if (!win.is_object()) config_error("'window' must be an object");
      reject_unknown_keys(win, {"start", "end"}, "window");
      if (win.contains("start")) c.window_start = get<double>(win, "start", "window");
      if (win.contains("end")) c.window_end = get<double>(win, "end", "window");
    }
  } else {
    config_error("unknown task '" + task + "'");
  }
  c.validate();
  return c;
}

RunConfig load_config(const fs::path& file) {
  std::ifstream is(file);
  if (!is) config_error("cannot read " + file.string());
  json j;
  try {
    is >> j;
  } catch (const json::exception& e) {
    config_error("invalid JSON in " + file.string() + ": " + e.what());
  }
  return config_from_json(j);
}

std::vector<RunConfig> presets() {
  const std::set<OutputKind> all = {OutputKind::LedgerCsv, OutputKind::QGrid, OutputKind::EfficiencyJson,
                                    OutputKind::AuditJson, OutputKind::PnumCsv};
  auto engine = [&](const char* name, double omega3, int n_field, double t_final, double dt) {
    RunConfig c;
    c.name = name;
    c.params.omega3 = omega3;
    c.params.n_field = n_field;
    c.t_final = t_final;
    c.dt = dt;
    c.record_every = 0.5;
    c.outputs = all;
    return c;
  };
  std::vector<RunConfig> out;
  // Truncations keep the top-5 Fock populations below the 1e-7 monitor over
  // the whole run. dt = 0.01 is not converged to 1e-6 in Im<sigma+ a>.
  out.push_back(engine("below", 34.0, 110, 100.0, 0.005));
  out.push_back(engine("at_threshold", 37.5, 80, 100.0, 0.005));
  out.push_back(engine("above", 150.0, 40, 100.0, 0.005));
  out.push_back(engine("above_long", 150.0, 110, 400.0, 0.005));

  RunConfig l;
  l.name = "landscape";
  l.task = RunConfig::Task::Landscape;
  l.params.T_h = 10.0 * l.params.omega_f;
  l.params.n_field = 110;
  l.landscape = {l.params.T_h, 0.0, 20.0 * l.params.omega_f, 101};
  l.outputs = {OutputKind::LandscapeCsv};
  out.push_back(l);
  return out;
}

RunConfig preset(const std::string& name) {
  for (const auto& c : presets())
    if (c.name == name) return c;
  config_error("unknown preset '" + name + "'");
}

QOperator initial_state(const RunConfig& c) {
  const EngineParams& p = c.params;
  using K = InitialStateSpec::Kind;
  switch (c.initial.kind) {
    case K::GroundVacuum: return ground_vacuum(p);
    case K::Gibbs:
      return product_state(atom_gibbs(p, c.initial.T_atom),
                           diagonal_state(gibbs_populations(field_levels(p), c.initial.T_field)));
    case K::GibbsPoisson:
      return product_state(atom_gibbs(p, c.initial.T_atom), poisson_state(c.initial.mean, p.n_field));
    case K::Custom: {
      QOperator rho = load_custom_state(c.initial.path);
      if (rho.rows() != p.dim()) config_error("custom initial state dimension does not match 3 x n_field");
      require_density(rho, "custom initial state");
      return rho;
    }
  }
  config_error("bad initial state");
}

Trajectory simulate(const RunConfig& c) {
  c.validate();
  if (c.task != RunConfig::Task::Integrate) throw DomainError("simulate: config is not an integrate task");
  return simulate_from(c, initial_state(c));
}

std::string content_hash(const fs::path& file) {
  std::ifstream is(file, std::ios::binary);
  if (!is) throw std::runtime_error("cannot read " + file.string());
  std::uint64_t h = 0xcbf29ce484222325ULL;
  char buf[1 << 16];
  while (is.read(buf, sizeof buf) || is.gcount() > 0) {
    for (std::streamsize k = 0; k < is.gcount(); ++k) {
      h ^= static_cast<unsigned char>(buf[k]);
      h *= 0x100000001b3ULL;
    }
  }
  std::ostringstream os;
  os << std::hex << std::setw(16) << std::setfill('0') << h;
  return os.str();
}

RunResult run(const RunConfig& c, const fs::path& out_dir) {
  RunResult result;
  QOperator rho0;
  try {
    c.validate();
    if (c.task == RunConfig::Task::Integrate) rho0 = initial_state(c);
  } catch (const std::exception& e) {
    result.exit_code = kExitConfig;
    result.message = e.what();
    return result;
  }
  std::error_code ec;
  fs::create_directories(out_dir, ec);
  if (ec) {
    result.exit_code = kExitConfig;
    result.message = "cannot create output directory " + out_dir.string() + ": " + ec.message();
    return result;
  }

  json manifest;
  manifest["config"] = to_json(c);
  manifest["warnings"] = json::array();
  std::vector<OutputRecord> written;
  int exit_code = kExitOk;
  try {
    if (c.task == RunConfig::Task::Landscape)
      run_landscape(c, out_dir, written, manifest);
    else
      run_integration(c, rho0, out_dir, written, manifest, exit_code);
  } catch (const std::exception& e) {
    exit_code = kExitAudit;
    result.message = e.what();
    manifest["error"] = e.what();
  }

  manifest["exit_code"] = exit_code;
  manifest["partial"] = exit_code != kExitOk;
  json outputs = json::array();
  for (const auto& w : written) {
    outputs.push_back({{"kind", to_string(w.kind)},
                       {"file", w.path.filename().string()},
                       {"bytes", fs::file_size(w.path)},
                       {"fnv1a64", content_hash(w.path)}});
    result.files.push_back(w.path);
  }
  manifest["outputs"] = outputs;
  const fs::path mpath = out_dir / "manifest.json";
  write_json_file(mpath, manifest);
  result.files.push_back(mpath);
  result.exit_code = exit_code;
  if (result.message.empty() && exit_code == kExitAudit) result.message = "audit failure (see audit.json)";
  return result;
}

AuditResult audit_directory(const fs::path& dir) {
  AuditResult r;
  auto fail = [&](int code, const std::string& line) {
    r.exit_code = std::max(r.exit_code, code);
    r.lines.push_back("FAIL " + line);
  };
  auto ok = [&](const std::string& line) { r.lines.push_back("ok   " + line); };

  json manifest;
  {
    std::ifstream is(dir / "manifest.json");
    if (!is) {
      fail(kExitConfig, "no manifest.json in " + dir.string());
      return r;
    }
    try {
      is >> manifest;
    } catch (const json::exception& e) {
      fail(kExitConfig, std::string("manifest.json unreadable: ") + e.what());
      return r;
    }
  }
  RunConfig c;
  try {
    c = config_from_json(manifest.at("config"));
  } catch (const std::exception& e) {
    fail(kExitConfig, std::string("manifest config invalid: ") + e.what());
    return r;
  }

  for (const auto& o : manifest.value("outputs", json::array())) {
    const fs::path f = dir / o.at("file").get<std::string>();
    if (!fs::exists(f)) {
      fail(kExitAudit, "missing output " + f.filename().string());
      continue;
    }
    const std::string h = content_hash(f);
    if (h != o.at("fnv1a64").get<std::string>())
      fail(kExitAudit, "hash mismatch for " + f.filename().string());
    else
      ok("hash " + f.filename().string() + " " + h);
  }
  if (manifest.value("partial", false)) fail(kExitAudit, "run flagged partial in manifest");

  const fs::path ledger_path = dir / output_file(OutputKind::LedgerCsv);
  if (fs::exists(ledger_path)) {
    std::vector<std::string> header;
    std::vector<std::vector<double>> rows;
    bool parsed = true;
    try {
      rows = read_csv_rows(ledger_path, header);
    } catch (const std::exception& e) {
      parsed = false;
      fail(kExitAudit, std::string("ledger.csv unreadable: ") + e.what());
    }
    if (parsed && header != kLedgerColumns) {
      fail(kExitAudit, "ledger.csv column order differs from the documented layout");
    } else if (parsed) {
      const std::size_t si = kLedgerColumns.size() - 1;
      double smin = std::numeric_limits<double>::infinity(), smax = 0.0;
      for (const auto& row : rows) {
        smin = std::min(smin, row[si]);
        smax = std::max(smax, std::abs(row[si]));
      }
      std::ostringstream os;
      os << "second law: sigma_min = " << smin << " over " << rows.size() << " records";
      if (smin >= -1e-9 * std::max(1.0, smax))
        ok(os.str());
      else
        fail(kExitAudit, os.str());
    }
  }

  const fs::path audit_path = dir / output_file(OutputKind::AuditJson);
  if (fs::exists(audit_path)) {
    std::ifstream is(audit_path);
    json a;
    is >> a;
    std::ostringstream os;
    os << "positivity: max trace error " << a.value("max_trace_error", 0.0) << ", min eigenvalue "
       << a.value("min_eigenvalue", 0.0);
    if (a.value("positivity_passed", false))
      ok(os.str());
    else
      fail(kExitAudit, os.str());
  }
  return r;
}

int worker_count() {
  const char* v = std::getenv("MASER_WORKERS");
  if (!v || !*v) return 1;
  char* end = nullptr;
  const long n = std::strtol(v, &end, 10);
  if (*end != '\0' || n < 1) return 1;
  return int(std::min<long>(n, 64));
}

std::vector<RunResult> run_all(const std::vector<RunConfig>& configs, const fs::path& out_dir,
                               int workers) {
  std::vector<RunResult> results(configs.size());
  if (configs.size() == 1) {
    results[0] = run(configs[0], out_dir);
    return results;
  }
  std::atomic<std::size_t> next{0};
  auto work = [&] {
    for (std::size_t k = next++; k < configs.size(); k = next++)
      results[k] = run(configs[k], out_dir / configs[k].name);
  };
  std::vector<std::thread> pool;
  for (int w = 1; w < std::min<int>(workers, int(configs.size())); ++w) pool.emplace_back(work);
  work();
  for (auto& t : pool) t.join();
  return results;
}

}  // namespace maser
