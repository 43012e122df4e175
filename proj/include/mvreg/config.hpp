#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "mvreg/benchmark.hpp"
#include "mvreg/pipeline.hpp"
#include "mvreg/saliency.hpp"

namespace mvreg {

/// Every tunable the CLI exposes. The file format is flat "key = value"
/// lines; '#' starts a comment. Keys are listed by config_keys().
struct RunConfig {
  PipelineConfig pipeline;
  RetrievalConfig retrieval;
  unsigned retrieval_threads = 1;
  /// Scene, levels, trials and strategies of `bench`. Its seed and pipeline
  /// fields are filled from `seed` and `pipeline` when the benchmark runs.
  BenchmarkSpec bench;
  std::uint64_t seed = 1;

  void validate() const;
};

struct ConfigKey {
  std::string name;
  std::string help;
};

const std::vector<ConfigKey>& config_keys();

/// Applies the lines of `text` on top of `base`. Throws UnknownConfigKey
/// naming the key, or InvalidArgument for a bad value or a repeated key.
RunConfig parse_config(const std::string& text, RunConfig base = {});
RunConfig read_config(const std::filesystem::path& path, RunConfig base = {});

/// Sets one key from its text value.
void set_config_value(RunConfig& cfg, const std::string& key, const std::string& value);

/// All keys with their current values, in config_keys() order; parses back
/// to the same configuration.
std::string format_config(const RunConfig& cfg);

}  // namespace mvreg
