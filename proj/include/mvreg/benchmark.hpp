#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "mvreg/pipeline.hpp"
#include "mvreg/synthetic.hpp"

namespace mvreg {

enum class Strategy { Chained, AveragedClassic, AveragedAdaptive };

std::string to_string(Strategy s);

struct BenchmarkSpec {
  synthetic::SceneSpec scene;
  std::vector<double> levels = {0.02, 0.04, 0.06};
  int trials = 50;
  std::uint64_t seed = 1;
  std::vector<Strategy> strategies = {Strategy::Chained, Strategy::AveragedAdaptive};
  PipelineConfig pipeline;

  void validate() const;
};

struct BenchmarkRow {
  Strategy strategy = Strategy::Chained;
  double level = 0.0;
  /// Objective per successful trial, in trial order.
  std::vector<double> objectives;
  int failures = 0;
  double mean_objective = 0.0;
  /// Sample standard deviation; 0 with fewer than two successful trials.
  double std_objective = 0.0;
  double mean_seconds = 0.0;
};

struct BenchmarkTable {
  std::vector<BenchmarkRow> rows;
  /// Ordered pairs used by the objective: those that overlap under the truth.
  std::vector<ViewPair> pairs;
};

/// Builds the scene once, then for every level and trial perturbs the truth
/// with a trial seed and registers it with each strategy. The objective is
/// always taken over the pairs gated under the ground truth, so strategies
/// are scored on the same pairs. Failed trials are counted, not fatal.
BenchmarkTable run_benchmark(const BenchmarkSpec& spec);

/// strategy,level,trials,failures,mean_objective,std_objective. Contains no
/// timing, so identical specs give identical text.
std::string format_benchmark(const BenchmarkTable& table);
/// strategy,level,mean_seconds.
std::string format_timing(const BenchmarkTable& table);

}  // namespace mvreg
