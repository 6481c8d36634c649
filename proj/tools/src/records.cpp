#include "records.hpp"

#include <cstdlib>
#include <fstream>
#include <stdexcept>

namespace qwa::cli {

namespace fs = std::filesystem;

std::string version_tag() { return "qwa " QWA_VERSION; }

json manifest(const std::string& command, json parameters, json inputs, json outputs) {
  return {{"type", "manifest"},
          {"command", command},
          {"version", version_tag()},
          {"parameters", std::move(parameters)},
          {"inputs", std::move(inputs)},
          {"outputs", std::move(outputs)},
          {"fields", field_definitions(command)}};
}

json field_definitions(const std::string& kind) {
  json common = {
      {"energy", "energy of H = -sum J_ij s_i s_j - gamma sum X_i - sum h_i s_i, in units of max|J| = 1"},
      {"gamma", "transverse field, same units as J"},
      {"work", "sum over eigensolver calls of m_left * m_right * Lanczos iterations (dimensionless)"},
      {"wall_seconds", "wall-clock seconds; hardware dependent and not reproducible"},
  };
  if (kind == "anneal") {
    common.update({{"s_max", "largest bond entanglement entropy, natural log"},
                   {"m_max", "largest MPS bond dimension"},
                   {"max_discarded", "largest discarded weight of any cut in the step"},
                   {"classical_energy", "energy of the read-out configuration at gamma = 0, no break field"},
                   {"energy_density", "classical_energy / n_sites"},
                   {"oracle_energy", "reference minimum (exact enumeration or best STA)"},
                   {"success", "|classical_energy - oracle_energy| <= 1e-9"},
                   {"config", "read-out spins by site, '+' for sigma^z = +1"}});
  } else if (kind == "sweep") {
    common.update({{"gap", "lowest excitation with the break field present; above the ground doublet once E1 is the global flip of E0"},
                   {"doublet_splitting", "E1 - E0 when gap is taken above the doublet, else null"},
                   {"chi_sg", "(1/N) sum_ij (d<sigma^z_i>/dh_j)^2 by finite differences"},
                   {"amplitude", "<c|psi> for a tracked configuration, folded over the global flip when h = 0"}});
  } else if (kind == "bench") {
    common.update({{"success_pct", "percentage of runs whose classical energy matches the oracle within 1e-9"},
                   {"sweeps", "DMRG sweeps summed over the anneal"}});
  } else if (kind == "oracle") {
    common.update({{"flips_attempted", "Metropolis single-spin-flip attempts"},
                   {"hits", "number of runs that quenched into this minimum"}});
  }
  return common;
}

json to_json(const AnnealParams& p) {
  json j = {{"gamma0", p.gamma0},
            {"gamma_min", p.gamma_min},
            {"dgamma_cap", p.dgamma_cap},
            {"dgamma_coeff", p.dgamma_coeff},
            {"h_break", p.h_break},
            {"eta", p.policy.eta},
            {"m_max", p.policy.m_max},
            {"m_min", p.policy.m_min},
            {"sweeps", p.sweeps.max_sweeps},
            {"first_step_sweeps", p.first_step_sweeps},
            {"energy_tol_per_site", p.sweeps.energy_tol_per_site},
            {"lanczos_max_iterations", p.sweeps.lanczos.max_iterations},
            {"lanczos_krylov_dim", p.sweeps.lanczos.krylov_dim},
            {"lanczos_tolerance", p.sweeps.lanczos.tolerance}};
  j["break_site"] = p.break_site ? json(*p.break_site) : json(nullptr);
  j["break_seed"] = p.break_seed ? json(*p.break_seed) : json(nullptr);
  return j;
}

json to_json(const StaParams& p) {
  return {{"beta0", p.beta0},   {"beta_max", p.beta_max}, {"r", p.r},
          {"steps_per_beta", p.steps_per_beta}, {"seed", p.seed}, {"levels", p.n_levels()}};
}

json to_json(const TraceRecord& r) {
  return {{"type", "step"},         {"gamma", r.gamma},
          {"energy", r.energy},     {"s_max", r.s_max},
          {"m_max", r.m_max},       {"max_discarded", r.max_discarded},
          {"sweeps", r.sweeps_used}, {"converged", r.converged},
          {"work", r.work}};
}

TraceRecord trace_record_from_json(const json& j) {
  TraceRecord r;
  r.gamma = j.at("gamma").get<double>();
  r.energy = j.at("energy").get<double>();
  r.s_max = j.at("s_max").get<double>();
  r.m_max = j.at("m_max").get<int>();
  r.max_discarded = j.at("max_discarded").get<double>();
  r.sweeps_used = j.at("sweeps").get<int>();
  r.converged = j.at("converged").get<bool>();
  r.work = j.at("work").get<double>();
  return r;
}

json to_json(const RunResult& r) {
  double s_max = 0.0;
  int m_max = 1;
  for (const auto& t : r.trace) {
    s_max = std::max(s_max, t.s_max);
    m_max = std::max(m_max, t.m_max);
  }
  const int n = static_cast<int>(r.config.size());
  json j = {{"type", "result"},
            {"config", config_string(r.config)},
            {"classical_energy", r.classical_energy},
            {"energy_density", n > 0 ? r.classical_energy / n : 0.0},
            {"ambiguous_readout", r.ambiguous_readout},
            {"break_site", r.break_site},
            {"bandwidth", r.bandwidth},
            {"mpo_bond_dim", r.mpo_bond_dim},
            {"steps", r.trace.size()},
            {"sweeps", r.total_sweeps},
            {"s_max", s_max},
            {"m_max", m_max},
            {"work", r.work},
            {"wall_seconds", r.wall_seconds}};
  j["oracle_energy"] = r.oracle_energy ? json(*r.oracle_energy) : json(nullptr);
  j["success"] = r.success ? json(*r.success) : json(nullptr);
  return j;
}

json to_json(const SweepPoint& p) {
  json j = {{"type", "point"}, {"gamma", p.gamma}, {"energy", p.energy},
            {"s_max", p.s_max}, {"m_max", p.m_max}, {"failed", p.failed}};
  j["gap"] = p.gap ? json(*p.gap) : json(nullptr);
  j["doublet_splitting"] = p.doublet_splitting ? json(*p.doublet_splitting) : json(nullptr);
  j["chi_sg"] = p.chi_sg ? json(*p.chi_sg) : json(nullptr);
  if (!p.chi_probe_sites.empty()) j["chi_probe_sites"] = p.chi_probe_sites;
  json tracked = json::array();
  for (const auto& t : p.tracked) tracked.push_back({{"id", t.id}, {"amplitude", t.amplitude}});
  j["tracked"] = std::move(tracked);
  if (p.failed) j["error"] = p.error;
  return j;
}

json instance_summary(const Instance& instance, const std::string& path) {
  return {{"file", path},
          {"geometry", geometry_label(instance.geometry())},
          {"seed", instance.seed()},
          {"n_sites", instance.n_sites()}};
}

fs::path output_path(const std::string& path) {
  fs::path p(path);
  if (p.is_relative()) {
    if (const char* dir = std::getenv("QWA_OUTPUT_DIR"); dir && *dir) return fs::path(dir) / p;
  }
  return p;
}

void write_file_atomic(const fs::path& path, const std::string& content) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  fs::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write " + tmp.string());
    out << content;
    if (!out.flush()) throw std::runtime_error("write failed for " + tmp.string());
  }
  fs::rename(tmp, path);
}

std::vector<SpinConfiguration> read_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  std::vector<SpinConfiguration> out;
  std::string line;
  while (std::getline(in, line)) {
    const auto start = line.find_first_not_of(" \t\r");
    if (start == std::string::npos || line[start] == '#') continue;
    const auto stop = line.find_first_of(" \t\r", start);
    out.push_back(parse_config(line.substr(start, stop - start)));
  }
  return out;
}

}  // namespace qwa::cli
