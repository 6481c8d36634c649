#include <ostream>

#include "CLI11.hpp"
#include "commands.hpp"

namespace qwa::cli {

namespace {

void add_anneal_flags(CLI::App& cmd, AnnealParams& p, bool with_eta) {
  if (with_eta) cmd.add_option("--eta", p.policy.eta, "Discarded weight tolerated per cut")->capture_default_str();
  cmd.add_option("--gamma0", p.gamma0, "Initial transverse field")->capture_default_str();
  cmd.add_option("--gamma-min", p.gamma_min, "Final transverse field")->capture_default_str();
  cmd.add_option("--dgamma-cap", p.dgamma_cap, "Largest gamma step")->capture_default_str();
  cmd.add_option("--dgamma-coeff", p.dgamma_coeff, "Step is coeff / S_max below the cap")->capture_default_str();
  cmd.add_option("--h-break", p.h_break, "Symmetry-breaking longitudinal field")->capture_default_str();
  cmd.add_option_function<int>("--break-site", [&p](int s) { p.break_site = s; },
                               "Site carrying h-break (default: drawn from the instance seed)");
  cmd.add_option_function<std::uint64_t>("--break-seed", [&p](std::uint64_t s) { p.break_seed = s; },
                                         "Seed for drawing the break site");
  cmd.add_option("--m-max", p.policy.m_max, "Bond dimension ceiling")->capture_default_str();
  cmd.add_option("--m-min", p.policy.m_min, "Bond dimension floor")->capture_default_str();
  cmd.add_option("--sweeps", p.sweeps.max_sweeps, "Sweep budget per gamma step")->capture_default_str();
  cmd.add_option("--first-sweeps", p.first_step_sweeps, "Sweep budget at gamma0")->capture_default_str();
}

void add_oracle_flags(CLI::App& cmd, OracleChoice& o) {
  cmd.add_option("--oracle", o.method, "Reference energy: none, exact, sta or auto")
      ->check(CLI::IsMember({"none", "exact", "sta", "auto"}))
      ->capture_default_str();
  cmd.add_option("--sta-preset", o.sta_preset, "STA schedule for the sta oracle")
      ->check(CLI::IsMember({"paper", "robust", "weak"}))
      ->capture_default_str();
  cmd.add_option("--sta-restarts", o.sta_restarts, "Independent STA runs, best kept")->capture_default_str();
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Quantum wavefunction annealing for Ising spin glasses", "qwa"};
  app.require_subcommand(1);
  app.set_version_flag("--version", QWA_VERSION);

  GenOptions gen;
  auto* gen_cmd = app.add_subcommand("gen", "Write random instances");
  gen_cmd->add_option("geometry", gen.geometry, "chain L | ladder L w | rrg N K")->required()->expected(2, 3);
  gen_cmd->add_option("--seed", gen.seed, "First seed")->capture_default_str();
  gen_cmd->add_option("--count", gen.count, "Number of instances (seeds seed..seed+count-1)")->capture_default_str();
  gen_cmd->add_option("--out", gen.out_dir, "Output directory")->capture_default_str();

  AnnealOptions an;
  auto* an_cmd = app.add_subcommand("anneal", "Anneal instances and read out spins");
  an_cmd->add_option("instances", an.files, "Instance files")->required()->check(CLI::ExistingFile);
  add_anneal_flags(*an_cmd, an.params, true);
  add_oracle_flags(*an_cmd, an.oracle);
  an_cmd->add_option("--json-out", an.json_out, "Result records (JSONL); stdout when absent");
  an_cmd->add_option("--trace-out", an.trace_out, "Per-step trace (a directory for several instances)");
  an_cmd->add_option("--checkpoint", an.checkpoint, "Rewrite this checkpoint after every gamma step");
  an_cmd->add_option("--resume", an.resume, "Continue from a checkpoint")->check(CLI::ExistingFile);
  an_cmd->add_option("--jobs", an.jobs, "Instances run in parallel")->capture_default_str();

  SweepCommandOptions sw;
  auto* sw_cmd = app.add_subcommand("sweep", "Observables along a decreasing gamma grid");
  sw_cmd->add_option("instance", sw.file, "Instance file")->required()->check(CLI::ExistingFile);
  sw_cmd->add_option("--gammas", sw.gammas, "Comma-separated decreasing values");
  sw_cmd->add_option("--grid", sw.grid, "start:stop:step");
  add_anneal_flags(*sw_cmd, sw.params, true);
  sw_cmd->add_flag("--chi", sw.chi, "Measure the spin-glass susceptibility");
  sw_cmd->add_flag("!--no-gap", sw.gap, "Skip the first excited state");
  sw_cmd->add_option("--chi-subsample", sw.chi_subsample, "Probe sites above 40 spins")->capture_default_str();
  sw_cmd->add_option("--point-sweeps", sw.point_sweeps, "Sweep budget per grid point")->capture_default_str();
  sw_cmd->add_option("--track-configs", sw.track_configs, "File of +/- configurations to trace")
      ->check(CLI::ExistingFile);
  sw_cmd->add_option("--out", sw.out, "Output file (JSONL); stdout when absent");

  BenchOptions be;
  auto* be_cmd = app.add_subcommand("bench", "Success rate and cost table over a corpus");
  be_cmd->add_option("inputs", be.inputs, "Instance files or directories")->required()->check(CLI::ExistingPath);
  be_cmd->add_option("--etas", be.etas, "Truncation tolerances")->delimiter(',')->capture_default_str();
  add_anneal_flags(*be_cmd, be.params, false);
  add_oracle_flags(*be_cmd, be.oracle);
  be_cmd->add_option("--out", be.out, "Summary CSV; stdout when absent");
  be_cmd->add_option("--runs-out", be.runs_out, "Per-run CSV");
  be_cmd->add_option("--jobs", be.jobs, "Runs in parallel")->capture_default_str();

  OracleOptions orc;
  auto* or_cmd = app.add_subcommand("oracle", "Classical reference solvers");
  or_cmd->add_option("method", orc.method, "exact, sta or minima")
      ->required()
      ->check(CLI::IsMember({"exact", "sta", "minima"}));
  or_cmd->add_option("instances", orc.files, "Instance files")->required()->check(CLI::ExistingFile);
  or_cmd->add_option("--preset", orc.preset, "paper (sta default), robust, weak (minima default)")
      ->check(CLI::IsMember({"paper", "robust", "weak"}));
  or_cmd->add_option_function<double>("--r", [&orc](double v) { orc.r = v; }, "Inverse temperature ratio");
  or_cmd->add_option_function<long>("--steps-per-beta", [&orc](long v) { orc.steps_per_beta = v; },
                                    "Flip attempts per temperature");
  or_cmd->add_option_function<double>("--beta0", [&orc](double v) { orc.beta0 = v; }, "Initial inverse temperature");
  or_cmd->add_option_function<double>("--beta-max", [&orc](double v) { orc.beta_max = v; }, "Final inverse temperature");
  or_cmd->add_option("--seed", orc.seed, "STA seed")->capture_default_str();
  or_cmd->add_option("--restarts", orc.restarts, "sta: independent runs, best kept")->capture_default_str();
  or_cmd->add_option("--runs", orc.runs, "minima: number of weak anneals")->capture_default_str();
  or_cmd->add_option("--out", orc.out, "Output file (JSONL); stdout when absent");
  or_cmd->add_option("--configs-out", orc.configs_out, "minima: configurations for sweep --track-configs");
  or_cmd->add_option("--jobs", orc.jobs, "Instances run in parallel")->capture_default_str();

  std::vector<const char*> argv{"qwa"};
  for (const auto& a : args) argv.push_back(a.c_str());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::Success& e) {
    return app.exit(e, out, err);
  } catch (const CLI::ParseError& e) {
    app.exit(e, out, err);
    return 2;
  }

  try {
    if (*gen_cmd) return cmd_gen(gen, out);
    if (*an_cmd) return cmd_anneal(an, out, err);
    if (*sw_cmd) return cmd_sweep(sw, out);
    if (*be_cmd) return cmd_bench(be, out, err);
    if (*or_cmd) return cmd_oracle(orc, out, err);
  } catch (const UsageError& e) {
    err << "usage error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return 1;
  }
  return 2;
}

}  // namespace qwa::cli
