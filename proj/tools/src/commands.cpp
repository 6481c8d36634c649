#include "commands.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <ostream>
#include <map>
#include <numeric>
#include <sstream>
#include <thread>

#include "qwa/hamiltonian.hpp"
#include "qwa/observables.hpp"
#include "records.hpp"

namespace qwa::cli {

namespace fs = std::filesystem;

namespace {

// Runs f(0..count-1) on up to `jobs` threads. f must not throw.
template <class F>
void parallel_for(int count, int jobs, F&& f) {
  jobs = std::clamp(jobs, 1, std::max(1, count));
  if (jobs == 1) {
    for (int i = 0; i < count; ++i) f(i);
    return;
  }
  std::atomic<int> next{0};
  std::vector<std::jthread> pool;
  for (int t = 0; t < jobs; ++t)
    pool.emplace_back([&] {
      for (int i = next++; i < count; i = next++) f(i);
    });
}

void require(bool ok, const std::string& message) {
  if (!ok) throw UsageError(message);
}

void validate_params(const AnnealParams& p) {
  try {
    p.validate();
  } catch (const std::invalid_argument& e) {
    throw UsageError(e.what());
  }
}

StaParams sta_preset(const std::string& name, std::uint64_t seed) {
  if (name == "paper") {
    StaParams p;
    p.seed = seed;
    return p;
  }
  if (name == "robust") return StaParams::robust(seed);
  if (name == "weak") return StaParams::weak(seed);
  throw UsageError("unknown STA preset '" + name + "' (paper, robust, weak)");
}

struct OracleValue {
  std::string method;
  double energy = 0.0;
};

std::optional<OracleValue> run_oracle(const Instance& instance, const OracleChoice& choice) {
  std::string method = choice.method;
  if (method == "none") return std::nullopt;
  if (method == "auto") method = instance.n_sites() <= kBruteForceCap ? "exact" : "sta";
  if (method == "exact") return OracleValue{method, brute_force(instance).min_energy};
  if (method == "sta") {
    auto p = sta_preset(choice.sta_preset, instance.seed());
    return OracleValue{method, sta_best_of(instance, p, choice.sta_restarts).energy};
  }
  throw UsageError("unknown oracle '" + choice.method + "'");
}

std::string jsonl(const std::vector<json>& lines) {
  std::string s;
  for (const auto& j : lines) s += j.dump() + "\n";
  return s;
}

// Writes to `path` (atomically) or to `out` when the path is empty.
void emit(const std::string& path, const std::string& content, std::ostream& out) {
  if (path.empty()) out << content << std::flush;
  else write_file_atomic(output_path(path), content);
}

std::vector<std::string> expand_inputs(const std::vector<std::string>& inputs) {
  std::vector<std::string> files;
  for (const auto& in : inputs) {
    if (fs::is_directory(in)) {
      std::vector<std::string> found;
      for (const auto& e : fs::directory_iterator(in))
        if (e.is_regular_file()) found.push_back(e.path().string());
      std::sort(found.begin(), found.end());
      files.insert(files.end(), found.begin(), found.end());
    } else {
      files.push_back(in);
    }
  }
  return files;
}

std::string file_stem(const std::string& path) { return fs::path(path).stem().string(); }

json anneal_parameters(const AnnealOptions& o) {
  return {{"anneal", to_json(o.params)},
          {"oracle", o.oracle.method},
          {"sta_preset", o.oracle.sta_preset},
          {"sta_restarts", o.oracle.sta_restarts},
          {"jobs", o.jobs},
          {"checkpoint", o.checkpoint},
          {"resume", o.resume}};
}

// Checkpoint: one JSON line (instance, parameters, trace) then the MPS.
void write_checkpoint(const fs::path& path, const json& instance, const json& params,
                      const AnnealTrace& trace, const MatrixProductState& psi) {
  json head = {{"type", "checkpoint"}, {"instance", instance}, {"parameters", params}};
  json steps = json::array();
  for (const auto& r : trace) steps.push_back(to_json(r));
  head["trace"] = std::move(steps);
  std::ostringstream s;
  s << head.dump() << "\n";
  write_mps(psi, s);
  write_file_atomic(path, s.str());
}

ResumePoint read_checkpoint(const std::string& path, const json& instance, const json& params) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open checkpoint " + path);
  std::string line;
  std::getline(in, line);
  const json head = json::parse(line);
  if (head.value("type", "") != "checkpoint") throw std::runtime_error(path + " is not a checkpoint");
  const auto same = [&](const char* key) {
    return head.at("instance").at(key) == instance.at(key);
  };
  if (!same("geometry") || !same("seed") || !same("n_sites"))
    throw UsageError("checkpoint " + path + " belongs to a different instance");
  if (head.at("parameters") != params)
    throw UsageError("checkpoint " + path + " was written with different anneal parameters");
  ResumePoint rp;
  for (const auto& j : head.at("trace")) rp.trace.push_back(trace_record_from_json(j));
  rp.state = read_mps(in);
  return rp;
}

struct AnnealJob {
  json record;
  std::vector<json> trace;
  bool failed = false;
};

AnnealJob anneal_one(const std::string& file, const AnnealOptions& o) {
  AnnealJob job;
  const Instance inst = read_instance_file(file);
  const json summary = instance_summary(inst, file);
  const json params = to_json(o.params);

  std::optional<ResumePoint> resume;
  if (!o.resume.empty()) resume = read_checkpoint(o.resume, summary, params);

  AnnealTrace so_far = resume ? resume->trace : AnnealTrace{};
  AnnealHooks hooks;
  if (!o.checkpoint.empty()) {
    const auto path = output_path(o.checkpoint);
    hooks.on_step = [&, path](const TraceRecord& rec, const MatrixProductState& psi) {
      so_far.push_back(rec);
      write_checkpoint(path, summary, params, so_far, psi);
    };
  }

  try {
    auto outcome = anneal_with_state(inst, o.params, hooks, std::move(resume));
    RunResult& r = outcome.result;
    if (auto oracle = run_oracle(inst, o.oracle)) attach_oracle(r, oracle->energy);
    job.record = to_json(r);
    job.record["instance"] = summary;
    job.record["oracle"] = o.oracle.method;
    for (const auto& t : r.trace) job.trace.push_back(to_json(t));
  } catch (const AnnealError& e) {
    job.failed = true;
    job.record = {{"type", "error"}, {"instance", summary}, {"message", e.what()},
                  {"steps", e.trace().size()}};
    for (const auto& t : e.trace()) job.trace.push_back(to_json(t));
  }
  return job;
}

std::vector<double> parse_gamma_list(const std::string& text) {
  std::vector<double> out;
  std::stringstream in(text);
  std::string tok;
  while (std::getline(in, tok, ',')) {
    try {
      std::size_t used = 0;
      out.push_back(std::stod(tok, &used));
      require(used == tok.size(), "bad gamma '" + tok + "'");
    } catch (const std::logic_error&) {
      throw UsageError("bad gamma '" + tok + "'");
    }
  }
  return out;
}

std::vector<double> parse_grid(const std::string& text) {
  const auto parts = parse_gamma_list([&] {
    std::string t = text;
    std::replace(t.begin(), t.end(), ':', ',');
    return t;
  }());
  require(parts.size() == 3, "grid must be start:stop:step");
  const double start = parts[0], stop = parts[1], step = parts[2];
  require(step > 0.0 && start >= stop && stop >= 0.0, "grid needs start >= stop >= 0 and step > 0");
  std::vector<double> out;
  for (long k = 0;; ++k) {
    const double g = start - static_cast<double>(k) * step;
    if (g < stop - 1e-9 * step) break;
    out.push_back(g);
  }
  return out;
}

double mean(const std::vector<double>& v) {
  return v.empty() ? 0.0 : std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

double stddev(const std::vector<double>& v) {
  if (v.size() < 2) return 0.0;
  const double m = mean(v);
  double s = 0.0;
  for (double x : v) s += (x - m) * (x - m);
  return std::sqrt(s / static_cast<double>(v.size() - 1));
}

std::string csv_number(double x) {
  std::ostringstream s;
  s.precision(10);
  s << x;
  return s.str();
}

std::string csv_field(const std::string& text) {
  if (text.find_first_of(",\"\n") == std::string::npos) return text;
  std::string q = "\"";
  for (char c : text) q += c == '"' ? std::string("\"\"") : std::string(1, c);
  return q + "\"";
}

}  // namespace

int cmd_gen(const GenOptions& o, std::ostream& out) {
  std::string text;
  for (const auto& t : o.geometry) text += (text.empty() ? "" : " ") + t;
  Geometry g;
  try {
    g = parse_geometry(text);
  } catch (const std::invalid_argument& e) {
    throw UsageError(e.what());
  }
  require(o.count >= 1, "--count must be >= 1");
  std::string label = geometry_label(g);
  std::replace(label.begin(), label.end(), ' ', '_');
  const fs::path dir = output_path(o.out_dir);
  for (int k = 0; k < o.count; ++k) {
    const std::uint64_t seed = o.seed + static_cast<std::uint64_t>(k);
    const fs::path path = dir / (label + "_seed" + std::to_string(seed) + ".inst");
    write_file_atomic(path, serialize(generate(g, seed)));
    out << path.string() << "\n";
  }
  return 0;
}

int cmd_anneal(const AnnealOptions& o, std::ostream& out, std::ostream& err) {
  require(!o.files.empty(), "no instance files given");
  validate_params(o.params);
  require(o.jobs >= 1, "--jobs must be >= 1");
  const bool single = o.files.size() == 1;
  require(single || (o.checkpoint.empty() && o.resume.empty()),
          "--checkpoint and --resume take a single instance");
  if (o.oracle.method != "none") sta_preset(o.oracle.sta_preset, 0);
  require(o.oracle.sta_restarts >= 1, "--sta-restarts must be >= 1");

  const json params = anneal_parameters(o);
  json outputs = {{"json_out", o.json_out}, {"trace_out", o.trace_out}};
  const json head = manifest("anneal", params, o.files, outputs);

  std::vector<AnnealJob> jobs(o.files.size());
  std::vector<std::string> errors(o.files.size());
  parallel_for(static_cast<int>(o.files.size()), o.jobs, [&](int i) {
    try {
      jobs[i] = anneal_one(o.files[i], o);
    } catch (const UsageError& e) {
      errors[i] = std::string("usage: ") + e.what();
    } catch (const std::exception& e) {
      errors[i] = e.what();
    }
  });

  int status = 0;
  std::vector<json> lines{head};
  for (std::size_t i = 0; i < jobs.size(); ++i) {
    if (!errors[i].empty()) {
      err << "error: " << o.files[i] << ": " << errors[i] << "\n";
      lines.push_back({{"type", "error"}, {"instance", {{"file", o.files[i]}}}, {"message", errors[i]}});
      status = std::max(status, errors[i].starts_with("usage: ") ? 2 : 1);
      continue;
    }
    if (jobs[i].failed) {
      err << "error: " << o.files[i] << ": " << jobs[i].record["message"].get<std::string>() << "\n";
      status = std::max(status, 1);
    }
    lines.push_back(jobs[i].record);
  }
  emit(o.json_out, jsonl(lines), out);

  if (!o.trace_out.empty()) {
    for (std::size_t i = 0; i < jobs.size(); ++i) {
      if (!errors[i].empty()) continue;
      std::vector<json> t{manifest("anneal", params, {o.files[i]}, outputs)};
      t.insert(t.end(), jobs[i].trace.begin(), jobs[i].trace.end());
      t.push_back(jobs[i].record);
      const fs::path path = single ? fs::path(o.trace_out)
                                   : fs::path(o.trace_out) / (file_stem(o.files[i]) + ".trace.jsonl");
      write_file_atomic(output_path(path.string()), jsonl(t));
    }
  }
  return status;
}

int cmd_sweep(const SweepCommandOptions& o, std::ostream& out) {
  require(o.gammas.empty() != o.grid.empty(), "give exactly one of --gammas and --grid");
  validate_params(o.params);
  const auto gammas = o.grid.empty() ? parse_gamma_list(o.gammas) : parse_grid(o.grid);
  require(!gammas.empty(), "empty gamma grid");
  for (std::size_t k = 1; k < gammas.size(); ++k)
    require(gammas[k] < gammas[k - 1], "gamma grid must be strictly decreasing");
  require(o.chi_subsample >= 1 && o.point_sweeps >= 1, "subsample and sweeps must be positive");

  const Instance inst = read_instance_file(o.file);
  SweepOptions so;
  so.anneal = o.params;
  so.compute_gap = o.gap;
  so.compute_chi = o.chi;
  so.chi.subsample = o.chi_subsample;
  so.point_sweeps = o.point_sweeps;
  if (!o.track_configs.empty()) {
    so.tracked = read_config_file(o.track_configs);
    for (const auto& c : so.tracked)
      require(static_cast<int>(c.size()) == inst.n_sites(),
              "tracked configuration length differs from the instance size");
  }

  json params = {{"anneal", to_json(o.params)},
                 {"gammas", gammas},
                 {"gap", o.gap},
                 {"chi", o.chi},
                 {"chi_probe_h", so.chi.probe_h},
                 {"chi_subsample", o.chi_subsample},
                 {"point_sweeps", o.point_sweeps},
                 {"track_configs", o.track_configs}};
  std::vector<json> lines{manifest("sweep", params, instance_summary(inst, o.file), {{"out", o.out}})};
  for (std::size_t k = 0; k < so.tracked.size(); ++k)
    lines.push_back({{"type", "tracked"},
                     {"id", k},
                     {"config", config_string(so.tracked[k])},
                     {"classical_energy", classical_energy(inst, so.tracked[k])}});
  const auto points = gamma_sweep(inst, gammas, so);
  bool failed = false;
  for (const auto& p : points) {
    lines.push_back(to_json(p));
    failed = failed || p.failed;
  }
  const auto est = estimate_critical(points);
  json crit = {{"type", "critical"}};
  crit["gamma_gap_min"] = est.gamma_gap_min ? json(*est.gamma_gap_min) : json(nullptr);
  crit["gamma_chi_max"] = est.gamma_chi_max ? json(*est.gamma_chi_max) : json(nullptr);
  lines.push_back(crit);
  emit(o.out, jsonl(lines), out);
  return failed ? 1 : 0;
}

int cmd_bench(const BenchOptions& o, std::ostream& out, std::ostream& err) {
  validate_params(o.params);
  require(!o.etas.empty(), "no eta values");
  for (double eta : o.etas) require(eta >= 0.0 && eta < 1.0, "eta must lie in [0, 1)");
  require(o.jobs >= 1, "--jobs must be >= 1");
  if (o.oracle.method != "none") sta_preset(o.oracle.sta_preset, 0);
  const auto files = expand_inputs(o.inputs);
  require(!files.empty(), "no instance files found");

  struct Run {
    std::string file, geometry, status = "ok", message;
    std::uint64_t seed = 0;
    int n = 0;
    double eta = 0.0;
    RunResult result;
  };
  const int n_eta = static_cast<int>(o.etas.size());
  std::vector<Run> runs(files.size() * o.etas.size());
  std::vector<std::optional<Instance>> instances(files.size());
  std::vector<std::optional<double>> oracle(files.size());
  std::vector<std::string> load_errors(files.size());

  parallel_for(static_cast<int>(files.size()), o.jobs, [&](int i) {
    try {
      instances[i] = read_instance_file(files[i]);
      if (auto v = run_oracle(*instances[i], o.oracle)) oracle[i] = v->energy;
    } catch (const std::exception& e) {
      load_errors[i] = e.what();
    }
  });
  parallel_for(static_cast<int>(runs.size()), o.jobs, [&](int k) {
    const int i = k / n_eta;
    Run& r = runs[k];
    r.file = files[i];
    r.eta = o.etas[k % n_eta];
    if (!load_errors[i].empty()) {
      r.status = "error";
      r.message = load_errors[i];
      return;
    }
    const Instance& inst = *instances[i];
    r.geometry = geometry_label(inst.geometry());
    r.seed = inst.seed();
    r.n = inst.n_sites();
    AnnealParams p = o.params;
    p.policy.eta = r.eta;
    try {
      r.result = anneal(inst, p);
      if (oracle[i]) attach_oracle(r.result, *oracle[i]);
    } catch (const std::exception& e) {
      r.status = "error";
      r.message = e.what();
    }
  });

  json params = {{"anneal", to_json(o.params)},
                 {"etas", o.etas},
                 {"oracle", o.oracle.method},
                 {"sta_preset", o.oracle.sta_preset},
                 {"sta_restarts", o.oracle.sta_restarts},
                 {"jobs", o.jobs}};
  const json head = manifest("bench", params, files, {{"out", o.out}, {"runs_out", o.runs_out}});

  struct Group {
    int n = 0, samples = 0, successes = 0, judged = 0, errors = 0, ambiguous = 0;
    std::vector<double> sweeps, work, wall, density;
  };
  std::map<std::pair<std::string, double>, Group> groups;
  int status = 0;
  for (const auto& r : runs) {
    if (r.status != "ok") {
      err << "error: " << r.file << " (eta " << r.eta << "): " << r.message << "\n";
      status = 1;
    }
    auto& g = groups[{r.geometry.empty() ? "unreadable" : r.geometry, r.eta}];
    g.n = r.n;
    ++g.samples;
    if (r.status != "ok") {
      ++g.errors;
      continue;
    }
    if (r.result.success) {
      ++g.judged;
      g.successes += *r.result.success ? 1 : 0;
    }
    g.ambiguous += r.result.ambiguous_readout ? 1 : 0;
    g.sweeps.push_back(r.result.total_sweeps);
    g.work.push_back(r.result.work);
    g.wall.push_back(r.result.wall_seconds);
    g.density.push_back(r.result.classical_energy / r.n);
  }

  std::ostringstream table;
  table << "# manifest: " << head.dump() << "\n";
  table << "geometry,n_sites,eta,samples,successes,success_pct,errors,ambiguous,sweeps_mean,"
           "sweeps_sd,work_mean,work_sd,wall_mean_s,wall_sd_s,energy_density_mean\n";
  for (const auto& [key, g] : groups) {
    // Failed anneals count against the success rate.
    const int judged = g.judged + g.errors;
    table << csv_field(key.first) << "," << g.n << "," << csv_number(key.second) << ","
          << g.samples << "," << (g.judged > 0 ? std::to_string(g.successes) : "") << ","
          << (g.judged > 0 ? csv_number(100.0 * g.successes / judged) : "") << "," << g.errors
          << "," << g.ambiguous << "," << csv_number(mean(g.sweeps)) << ","
          << csv_number(stddev(g.sweeps)) << "," << csv_number(mean(g.work)) << ","
          << csv_number(stddev(g.work)) << "," << csv_number(mean(g.wall)) << ","
          << csv_number(stddev(g.wall)) << "," << csv_number(mean(g.density)) << "\n";
  }
  emit(o.out, table.str(), out);

  if (!o.runs_out.empty()) {
    std::ostringstream rows;
    rows << "# manifest: " << head.dump() << "\n";
    rows << "file,geometry,seed,n_sites,eta,status,classical_energy,oracle_energy,success,sweeps,"
            "work,wall_seconds,message\n";
    for (const auto& r : runs) {
      const bool ok = r.status == "ok";
      rows << csv_field(r.file) << "," << csv_field(r.geometry) << "," << r.seed << "," << r.n
           << "," << csv_number(r.eta) << "," << r.status << ","
           << (ok ? csv_number(r.result.classical_energy) : "") << ","
           << (ok && r.result.oracle_energy ? csv_number(*r.result.oracle_energy) : "") << ","
           << (ok && r.result.success ? (*r.result.success ? "true" : "false") : "") << ","
           << (ok ? std::to_string(r.result.total_sweeps) : "") << ","
           << (ok ? csv_number(r.result.work) : "") << ","
           << (ok ? csv_number(r.result.wall_seconds) : "") << "," << csv_field(r.message)
           << "\n";
    }
    write_file_atomic(output_path(o.runs_out), rows.str());
  }
  return status;
}

int cmd_oracle(const OracleOptions& o, std::ostream& out, std::ostream& err) {
  require(!o.files.empty(), "no instance files given");
  require(o.method == "exact" || o.method == "sta" || o.method == "minima",
          "oracle method must be exact, sta or minima");
  require(o.restarts >= 1 && o.runs >= 1 && o.jobs >= 1, "counts must be positive");
  require(o.configs_out.empty() || (o.method == "minima" && o.files.size() == 1),
          "--configs-out needs minima on a single instance");
  const std::string preset = o.preset.empty() ? (o.method == "minima" ? "weak" : "paper") : o.preset;
  auto params_for = [&](std::uint64_t seed) {
    StaParams p = sta_preset(preset, seed);
    if (o.r) p.r = *o.r;
    if (o.steps_per_beta) p.steps_per_beta = *o.steps_per_beta;
    if (o.beta0) p.beta0 = *o.beta0;
    if (o.beta_max) p.beta_max = *o.beta_max;
    try {
      p.validate();
    } catch (const std::invalid_argument& e) {
      throw UsageError(e.what());
    }
    return p;
  };
  const StaParams shown = params_for(o.seed);

  json params = {{"method", o.method}, {"jobs", o.jobs}};
  if (o.method != "exact") {
    params["preset"] = preset;
    params["sta"] = to_json(shown);
    params[o.method == "sta" ? "restarts" : "runs"] = o.method == "sta" ? o.restarts : o.runs;
  }
  const json head = manifest("oracle", params, o.files, {{"out", o.out}, {"configs_out", o.configs_out}});

  std::vector<std::vector<json>> records(o.files.size());
  std::vector<std::string> configs(o.files.size());
  std::vector<std::string> errors(o.files.size());
  parallel_for(static_cast<int>(o.files.size()), o.jobs, [&](int i) {
    try {
      const Instance inst = read_instance_file(o.files[i]);
      const json summary = instance_summary(inst, o.files[i]);
      const int n = inst.n_sites();
      if (o.method == "exact") {
        const auto r = brute_force(inst);
        records[i].push_back({{"type", "result"},
                              {"method", "exact"},
                              {"instance", summary},
                              {"classical_energy", r.min_energy},
                              {"energy_density", r.min_energy / n},
                              {"config", config_string(r.minimizers.front())},
                              {"n_minimizers", r.minimizers.size()}});
      } else if (o.method == "sta") {
        const auto r = sta_best_of(inst, params_for(o.seed), o.restarts);
        records[i].push_back({{"type", "result"},
                              {"method", "sta"},
                              {"instance", summary},
                              {"classical_energy", r.energy},
                              {"energy_density", r.energy / n},
                              {"config", config_string(r.config)},
                              {"flips_attempted", r.flips_attempted}});
      } else {
        const auto minima = sample_local_minima(inst, params_for(o.seed), o.runs);
        for (std::size_t k = 0; k < minima.size(); ++k) {
          records[i].push_back({{"type", "minimum"},
                                {"instance", summary},
                                {"rank", k},
                                {"energy", minima[k].energy},
                                {"config", config_string(minima[k].config)},
                                {"hits", minima[k].hits}});
          configs[i] += config_string(minima[k].config) + "  # E = " + format_exact(minima[k].energy) + "\n";
        }
      }
    } catch (const std::exception& e) {
      errors[i] = e.what();
    }
  });

  int status = 0;
  std::vector<json> lines{head};
  for (std::size_t i = 0; i < o.files.size(); ++i) {
    if (!errors[i].empty()) {
      lines.push_back({{"type", "error"}, {"instance", {{"file", o.files[i]}}}, {"message", errors[i]}});
      status = 1;
    }
    lines.insert(lines.end(), records[i].begin(), records[i].end());
  }
  emit(o.out, jsonl(lines), out);
  if (!o.configs_out.empty()) write_file_atomic(output_path(o.configs_out), configs[0]);
  if (status != 0) {
    for (std::size_t i = 0; i < errors.size(); ++i)
      if (!errors[i].empty()) err << "error: " << o.files[i] << ": " << errors[i] << "\n";
  }
  return status;
}

}  // namespace qwa::cli
