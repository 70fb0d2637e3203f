#pragma once

#include "dacd/active_loop.hpp"
#include "dacd/detect.hpp"
#include "dacd/eval.hpp"
#include "dacd/simulate.hpp"

#include <json.hpp>

#include <filesystem>
#include <iosfwd>
#include <string>

namespace dacd {

nlohmann::json to_json(const KernelParams& p);
KernelParams kernel_params_from_json(const nlohmann::json& j);

nlohmann::json to_json(const PosteriorSlice& slice);
PosteriorSlice slice_from_json(const nlohmann::json& j);

nlohmann::json to_json(const DetectionResult& result);
DetectionResult detection_from_json(const nlohmann::json& j);

nlohmann::json to_json(const ScenarioSpec& spec);
ScenarioSpec scenario_from_json(const nlohmann::json& j);

/// One JSON object per iteration, full precision.
void write_trace_jsonl(std::ostream& out, const LoopTrace& trace);
LoopTrace read_trace_jsonl(std::istream& in);

/// Two-column (t, value) delimited text for simulated series.
void write_series_tsv(std::ostream& out, const SimulatedSeries& series);

void write_samples_tsv(std::ostream& out, const SampleSet& samples);

/// Benchmark configuration from JSON; omitted fields keep their defaults.
BenchmarkConfig benchmark_config_from_json(const nlohmann::json& j);
nlohmann::json to_json(const BenchmarkConfig& config);

nlohmann::json to_json(const BenchmarkResult& result);

// Filesystem helpers shared by the CLI.
std::string read_text_file(const std::filesystem::path& path);
void write_text_file(const std::filesystem::path& path, const std::string& content,
                     bool overwrite);

}  // namespace dacd
