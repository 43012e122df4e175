#include "mvreg/benchmark.hpp"

#include <cmath>
#include <fmt/format.h>
#include <numeric>

#include "mvreg/error.hpp"

namespace mvreg {

namespace {

std::uint64_t trial_seed(std::uint64_t base, std::size_t level, int trial) {
  // splitmix64 finaliser over the packed indices
  std::uint64_t z = base + 0x9e3779b97f4a7c15ULL * (1 + level * 100003 + static_cast<std::uint64_t>(trial));
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

void summarize(BenchmarkRow& row, double seconds) {
  const auto n = static_cast<double>(row.objectives.size());
  const int attempts = static_cast<int>(row.objectives.size()) + row.failures;
  row.mean_seconds = attempts > 0 ? seconds / attempts : 0.0;
  if (row.objectives.empty()) return;
  row.mean_objective = std::accumulate(row.objectives.begin(), row.objectives.end(), 0.0) / n;
  if (row.objectives.size() < 2) return;
  double ss = 0.0;
  for (double o : row.objectives) ss += (o - row.mean_objective) * (o - row.mean_objective);
  row.std_objective = std::sqrt(ss / (n - 1.0));
}

}  // namespace

std::string to_string(Strategy s) {
  switch (s) {
    case Strategy::Chained: return "chained-icp";
    case Strategy::AveragedClassic: return "ma-icp";
    case Strategy::AveragedAdaptive: return "ma-aticp";
  }
  return "unknown";
}

void BenchmarkSpec::validate() const {
  if (trials < 1) throw Error(ErrorCode::InvalidArgument, "benchmark needs at least one trial");
  if (levels.empty()) throw Error(ErrorCode::InvalidArgument, "benchmark needs at least one noise level");
  for (double l : levels) {
    if (!(l >= 0.0)) throw Error(ErrorCode::InvalidArgument, fmt::format("noise level {} is negative", l));
  }
  if (strategies.empty()) throw Error(ErrorCode::InvalidArgument, "benchmark needs at least one strategy");
  pipeline.validate();
}

BenchmarkTable run_benchmark(const BenchmarkSpec& spec) {
  spec.validate();
  const synthetic::Scene scene = synthetic::make_scene(spec.scene);
  ViewGraph truth = ViewGraph::with_views(scene.truth.size());
  truth.global_motions = scene.truth;

  BenchmarkTable table;
  table.pairs = gate_pairs(overlap_matrix(scene.clouds, truth, spec.pipeline.icp.coincidence_factor),
                           spec.pipeline.overlap_gate);

  PipelineConfig classic = spec.pipeline;
  classic.pairwise = PairwiseMethod::Classic;
  PipelineConfig adaptive = spec.pipeline;
  adaptive.pairwise = PairwiseMethod::Adaptive;

  for (std::size_t l = 0; l < spec.levels.size(); ++l) {
    std::vector<BenchmarkRow> rows(spec.strategies.size());
    std::vector<double> seconds(spec.strategies.size(), 0.0);
    for (std::size_t s = 0; s < rows.size(); ++s) {
      rows[s].strategy = spec.strategies[s];
      rows[s].level = spec.levels[l];
    }
    for (int trial = 0; trial < spec.trials; ++trial) {
      const ViewGraph init = perturb_graph(truth, spec.levels[l], trial_seed(spec.seed, l, trial));
      for (std::size_t s = 0; s < rows.size(); ++s) {
        try {
          RegistrationReport r;
          switch (rows[s].strategy) {
            case Strategy::Chained: r = register_chained(scene.clouds, init, spec.pipeline); break;
            case Strategy::AveragedClassic: r = register_multiview(scene.clouds, init, classic); break;
            case Strategy::AveragedAdaptive: r = register_multiview(scene.clouds, init, adaptive); break;
          }
          seconds[s] += r.seconds;
          rows[s].objectives.push_back(
              objective_value(scene.clouds, r.graph, table.pairs, spec.pipeline.icp.coincidence_factor));
        } catch (const Error&) {
          ++rows[s].failures;
        }
      }
    }
    for (std::size_t s = 0; s < rows.size(); ++s) {
      summarize(rows[s], seconds[s]);
      table.rows.push_back(std::move(rows[s]));
    }
  }
  return table;
}

std::string format_benchmark(const BenchmarkTable& table) {
  std::string out = "strategy,level,trials,failures,mean_objective,std_objective\n";
  for (const BenchmarkRow& r : table.rows) {
    out += fmt::format("{},{},{},{},{:.9e},{:.9e}\n", to_string(r.strategy), r.level,
                       r.objectives.size() + static_cast<std::size_t>(r.failures), r.failures, r.mean_objective,
                       r.std_objective);
  }
  return out;
}

std::string format_timing(const BenchmarkTable& table) {
  std::string out = "strategy,level,mean_seconds\n";
  for (const BenchmarkRow& r : table.rows) {
    out += fmt::format("{},{},{:.6f}\n", to_string(r.strategy), r.level, r.mean_seconds);
  }
  return out;
}

}  // namespace mvreg
