#include "mvreg/config.hpp"

#include <charconv>
#include <fmt/format.h>
#include <fstream>
#include <functional>
#include <set>
#include <sstream>

#include "mvreg/error.hpp"

namespace mvreg {

namespace {

std::string trim(const std::string& s) {
  const auto a = s.find_first_not_of(" \t\r");
  if (a == std::string::npos) return {};
  const auto b = s.find_last_not_of(" \t\r");
  return s.substr(a, b - a + 1);
}

[[noreturn]] void bad_value(const std::string& key, const std::string& value, const char* expected) {
  throw Error(ErrorCode::InvalidArgument, fmt::format("config key '{}': '{}' is not {}", key, value, expected));
}

template <class T>
T parse_number(const std::string& key, const std::string& value, const char* expected) {
  T out{};
  const char* end = value.data() + value.size();
  const auto [ptr, ec] = std::from_chars(value.data(), end, out);
  if (ec != std::errc() || ptr != end) bad_value(key, value, expected);
  return out;
}

double to_double(const std::string& key, const std::string& v) { return parse_number<double>(key, v, "a number"); }
int to_int(const std::string& key, const std::string& v) { return parse_number<int>(key, v, "an integer"); }
unsigned to_unsigned(const std::string& key, const std::string& v) {
  return parse_number<unsigned>(key, v, "a non-negative integer");
}

bool to_bool(const std::string& key, const std::string& v) {
  if (v == "true" || v == "1") return true;
  if (v == "false" || v == "0") return false;
  bad_value(key, v, "true or false");
}

std::optional<double> to_optional(const std::string& key, const std::string& v) {
  if (v == "none") return std::nullopt;
  return to_double(key, v);
}

std::vector<std::string> split_list(const std::string& v) {
  std::vector<std::string> out;
  std::stringstream in(v);
  std::string item;
  while (std::getline(in, item, ',')) out.push_back(trim(item));
  return out;
}

std::string num(double v) { return fmt::format("{}", v); }
std::string opt(const std::optional<double>& v) { return v ? num(*v) : "none"; }

Strategy to_strategy(const std::string& key, const std::string& v) {
  for (Strategy s : {Strategy::Chained, Strategy::AveragedClassic, Strategy::AveragedAdaptive}) {
    if (to_string(s) == v) return s;
  }
  bad_value(key, v, "chained-icp, ma-icp or ma-aticp");
}

struct Entry {
  ConfigKey key;
  std::function<void(RunConfig&, const std::string&, const std::string&)> set;
  std::function<std::string(const RunConfig&)> get;
};

#define MVREG_DOUBLE(name, field, help)                                                                     \
  Entry {                                                                                                   \
    {name, help}, [](RunConfig& c, const std::string& k, const std::string& v) { c.field = to_double(k, v); }, \
        [](const RunConfig& c) { return num(c.field); }                                                     \
  }
#define MVREG_INT(name, field, help)                                                                     \
  Entry {                                                                                                \
    {name, help}, [](RunConfig& c, const std::string& k, const std::string& v) { c.field = to_int(k, v); }, \
        [](const RunConfig& c) { return std::to_string(c.field); }                                       \
  }
#define MVREG_UNSIGNED(name, field, help)                                                                     \
  Entry {                                                                                                     \
    {name, help}, [](RunConfig& c, const std::string& k, const std::string& v) { c.field = to_unsigned(k, v); }, \
        [](const RunConfig& c) { return std::to_string(c.field); }                                            \
  }
#define MVREG_OPTIONAL(name, field, help)                                                                     \
  Entry {                                                                                                     \
    {name, help}, [](RunConfig& c, const std::string& k, const std::string& v) { c.field = to_optional(k, v); }, \
        [](const RunConfig& c) { return opt(c.field); }                                                       \
  }

const std::vector<Entry>& entries() {
  static const std::vector<Entry> table = {
      Entry{{"seed", "RNG seed for synthetic data and benchmark trials"},
            [](RunConfig& c, const std::string& k, const std::string& v) {
              c.seed = parse_number<std::uint64_t>(k, v, "a non-negative integer");
            },
            [](const RunConfig& c) { return std::to_string(c.seed); }},
      MVREG_DOUBLE("icp.range_accuracy", pipeline.icp.range_accuracy, "R_e, model units"),
      MVREG_INT("icp.max_iterations", pipeline.icp.max_iterations, "N_iter of the adaptive ICP"),
      MVREG_DOUBLE("icp.coincidence_factor", pipeline.icp.coincidence_factor, "c in the c * L_r coincidence cutoff"),
      MVREG_DOUBLE("icp.min_overlap", pipeline.icp.min_overlap, "xi_0, smallest overlap for convergence"),
      MVREG_INT("classic.max_iterations", pipeline.classic.max_iterations, "iterations of the classic ICP baseline"),
      MVREG_DOUBLE("classic.relative_tolerance", pipeline.classic.relative_tolerance,
                   "relative mse decrease that stops classic ICP"),
      MVREG_DOUBLE("pipeline.overlap_gate", pipeline.overlap_gate, "ordered pairs with overlap above this are used"),
      MVREG_INT("pipeline.outer_iterations", pipeline.outer_iterations, "K, outer iteration budget"),
      MVREG_DOUBLE("pipeline.outer_tolerance", pipeline.outer_tolerance, "stop when no view rotates more (rad)"),
      Entry{{"pipeline.pairwise", "adaptive or classic"},
            [](RunConfig& c, const std::string& k, const std::string& v) {
              if (v == "adaptive") {
                c.pipeline.pairwise = PairwiseMethod::Adaptive;
              } else if (v == "classic") {
                c.pipeline.pairwise = PairwiseMethod::Classic;
              } else {
                bad_value(k, v, "adaptive or classic");
              }
            },
            [](const RunConfig& c) {
              return std::string(c.pipeline.pairwise == PairwiseMethod::Adaptive ? "adaptive" : "classic");
            }},
      MVREG_UNSIGNED("pipeline.threads", pipeline.threads, "pairwise ICP workers, 0 = all cores"),
      MVREG_DOUBLE("averaging.epsilon", pipeline.averaging.epsilon, "stop when the correction norm drops below"),
      MVREG_INT("averaging.max_rounds", pipeline.averaging.max_rounds, "averaging rounds per outer iteration"),
      MVREG_DOUBLE("retrieval.scale_fraction", retrieval.scale_fraction, "xi as a fraction of the bbox diagonal"),
      MVREG_DOUBLE("retrieval.saliency_percentile", retrieval.saliency_percentile, "quantile for th_saliency"),
      MVREG_DOUBLE("retrieval.saliency_floor", retrieval.saliency_floor, "th_saliency floor, fraction of max |curvature|"),
      MVREG_OPTIONAL("retrieval.saliency_threshold", retrieval.saliency_threshold,
                     "absolute th_saliency, or none"),
      MVREG_DOUBLE("retrieval.dist_factor", retrieval.dist_factor, "th_dist in units of xi"),
      MVREG_OPTIONAL("retrieval.dist_threshold", retrieval.dist_threshold, "absolute th_dist, or none"),
      MVREG_DOUBLE("retrieval.thres_ft", retrieval.thres_ft, "Thres_FT"),
      MVREG_UNSIGNED("retrieval.threads", retrieval_threads, "models processed in parallel, 0 = all cores"),
      Entry{{"bench.levels", "comma-separated perturbation levels (rad)"},
            [](RunConfig& c, const std::string& k, const std::string& v) {
              c.bench.levels.clear();
              for (const std::string& item : split_list(v)) c.bench.levels.push_back(to_double(k, item));
            },
            [](const RunConfig& c) {
              std::vector<std::string> items;
              for (double l : c.bench.levels) items.push_back(num(l));
              return fmt::format("{}", fmt::join(items, ","));
            }},
      MVREG_INT("bench.trials", bench.trials, "Monte Carlo trials per level"),
      Entry{{"bench.strategies", "comma-separated: chained-icp, ma-icp, ma-aticp"},
            [](RunConfig& c, const std::string& k, const std::string& v) {
              c.bench.strategies.clear();
              for (const std::string& item : split_list(v)) c.bench.strategies.push_back(to_strategy(k, item));
            },
            [](const RunConfig& c) {
              std::vector<std::string> items;
              for (Strategy s : c.bench.strategies) items.push_back(to_string(s));
              return fmt::format("{}", fmt::join(items, ","));
            }},
      Entry{{"scene.views", "views in the benchmark scene"},
            [](RunConfig& c, const std::string& k, const std::string& v) { c.bench.scene.views = to_unsigned(k, v); },
            [](const RunConfig& c) { return std::to_string(c.bench.scene.views); }},
      Entry{{"scene.object_points", "points sampled on the object"},
            [](RunConfig& c, const std::string& k, const std::string& v) {
              c.bench.scene.object_points = to_unsigned(k, v);
            },
            [](const RunConfig& c) { return std::to_string(c.bench.scene.object_points); }},
      MVREG_DOUBLE("scene.scale", bench.scene.scale, "object size, model units"),
      MVREG_DOUBLE("scene.visibility", bench.scene.visibility, "visibility cut on dot(direction, view axis)"),
      MVREG_DOUBLE("scene.view_spacing", bench.scene.view_spacing, "angle between consecutive view axes (rad)"),
      MVREG_DOUBLE("scene.noise_fraction", bench.scene.noise_fraction, "noise sigma as a fraction of resolution"),
      Entry{{"scene.shared_samples", "cut every view from one shared sample (true/false)"},
            [](RunConfig& c, const std::string& k, const std::string& v) {
              c.bench.scene.shared_samples = to_bool(k, v);
            },
            [](const RunConfig& c) { return std::string(c.bench.scene.shared_samples ? "true" : "false"); }},
  };
  return table;
}

#undef MVREG_DOUBLE
#undef MVREG_INT
#undef MVREG_UNSIGNED
#undef MVREG_OPTIONAL

}  // namespace

void RunConfig::validate() const {
  pipeline.validate();
  retrieval.validate();
  BenchmarkSpec b = bench;
  b.pipeline = pipeline;
  b.seed = seed;
  b.validate();
}

const std::vector<ConfigKey>& config_keys() {
  static const std::vector<ConfigKey> keys = [] {
    std::vector<ConfigKey> out;
    for (const Entry& e : entries()) out.push_back(e.key);
    return out;
  }();
  return keys;
}

void set_config_value(RunConfig& cfg, const std::string& key, const std::string& value) {
  for (const Entry& e : entries()) {
    if (e.key.name == key) {
      e.set(cfg, key, value);
      return;
    }
  }
  throw Error(ErrorCode::UnknownConfigKey, fmt::format("unknown config key '{}'", key));
}

RunConfig parse_config(const std::string& text, RunConfig base) {
  std::istringstream in(text);
  std::string line;
  std::set<std::string> seen;
  int number = 0;
  while (std::getline(in, line)) {
    ++number;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw Error(ErrorCode::InvalidArgument, fmt::format("config line {}: expected 'key = value'", number));
    }
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (!seen.insert(key).second) {
      throw Error(ErrorCode::InvalidArgument, fmt::format("config line {}: key '{}' given twice", number, key));
    }
    set_config_value(base, key, value);
  }
  return base;
}

RunConfig read_config(const std::filesystem::path& path, RunConfig base) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::IoError, fmt::format("cannot open config '{}'", path.string()));
  std::stringstream buffer;
  buffer << in.rdbuf();
  return parse_config(buffer.str(), std::move(base));
}

std::string format_config(const RunConfig& cfg) {
  std::string out;
  for (const Entry& e : entries()) out += fmt::format("{} = {}\n", e.key.name, e.get(cfg));
  return out;
}

}  // namespace mvreg
