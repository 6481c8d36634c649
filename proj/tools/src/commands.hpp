#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "qwa/anneal.hpp"
#include "qwa/baselines.hpp"

namespace qwa::cli {

// Bad flags or flag combinations; maps to exit status 2.
class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct GenOptions {
  std::vector<std::string> geometry;  // e.g. {"ladder", "40", "2"}
  std::uint64_t seed = 0;
  int count = 1;
  std::string out_dir = ".";
};

struct OracleChoice {
  std::string method = "none";  // none | exact | sta | auto
  std::string sta_preset = "robust";
  int sta_restarts = 4;
};

struct AnnealOptions {
  std::vector<std::string> files;
  AnnealParams params;
  OracleChoice oracle;
  std::string json_out;
  std::string trace_out;
  std::string checkpoint;
  std::string resume;
  int jobs = 1;
};

struct SweepCommandOptions {
  std::string file;
  std::string gammas;  // comma separated, decreasing
  std::string grid;    // start:stop:step
  AnnealParams params;
  bool chi = false;
  bool gap = true;
  int chi_subsample = 20;
  int point_sweeps = 8;
  std::string track_configs;
  std::string out;
};

struct BenchOptions {
  std::vector<std::string> inputs;  // files or directories
  std::vector<double> etas{1e-8};
  AnnealParams params;
  OracleChoice oracle{"auto", "robust", 4};
  std::string out;
  std::string runs_out;
  int jobs = 1;
};

struct OracleOptions {
  std::string method;  // exact | sta | minima
  std::vector<std::string> files;
  std::string preset;  // paper | robust | weak
  std::optional<double> r;
  std::optional<long> steps_per_beta;
  std::optional<double> beta0;
  std::optional<double> beta_max;
  std::uint64_t seed = 0;
  int restarts = 1;
  int runs = 20;
  std::string out;
  std::string configs_out;
  int jobs = 1;
};

int cmd_gen(const GenOptions& options, std::ostream& out);
int cmd_anneal(const AnnealOptions& options, std::ostream& out, std::ostream& err);
int cmd_sweep(const SweepCommandOptions& options, std::ostream& out);
int cmd_bench(const BenchOptions& options, std::ostream& out, std::ostream& err);
int cmd_oracle(const OracleOptions& options, std::ostream& out, std::ostream& err);

// Parses argv-style arguments and dispatches; returns the exit status.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace qwa::cli
