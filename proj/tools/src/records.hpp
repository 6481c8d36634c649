#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "json.hpp"
#include "qwa/anneal.hpp"
#include "qwa/baselines.hpp"
#include "qwa/observables.hpp"

namespace qwa::cli {

using nlohmann::json;

std::string version_tag();

// Header for every output file: command, full parameter set, inputs,
// outputs, code version and field definitions.
json manifest(const std::string& command, json parameters, json inputs, json outputs);

json field_definitions(const std::string& kind);

json to_json(const AnnealParams& params);
json to_json(const StaParams& params);
json to_json(const TraceRecord& rec);
TraceRecord trace_record_from_json(const json& j);
json to_json(const RunResult& result);
json to_json(const SweepPoint& point);

json instance_summary(const Instance& instance, const std::string& path);

// Relative output paths land under $QWA_OUTPUT_DIR when it is set.
std::filesystem::path output_path(const std::string& path);

// Writes via a temporary file and rename, creating parent directories.
void write_file_atomic(const std::filesystem::path& path, const std::string& content);

std::vector<SpinConfiguration> read_config_file(const std::string& path);

}  // namespace qwa::cli
