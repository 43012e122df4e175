#include "mvreg/cli.hpp"

#include <CLI11.hpp>
#include <fmt/format.h>
#include <fmt/ranges.h>
#include <fstream>
#include <sstream>

#include "mvreg/benchmark.hpp"
#include "mvreg/config.hpp"
#include "mvreg/error.hpp"
#include "mvreg/ply.hpp"
#include "mvreg/saliency.hpp"
#include "mvreg/section.hpp"
#include "mvreg/synthetic.hpp"

namespace fs = std::filesystem;

namespace mvreg {

namespace {

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::IoError, fmt::format("cannot write '{}'", path.string()));
  out << text;
  if (!out) throw Error(ErrorCode::IoError, fmt::format("write to '{}' failed", path.string()));
}

PointCloud load_cloud(const std::string& path) { return PointCloud(read_ply(path).vertices); }

TriangleMesh load_mesh(const std::string& path) {
  PlyDocument doc = read_ply(path);
  if (doc.faces.empty()) throw Error(ErrorCode::InvalidArgument, fmt::format("'{}' has no faces", path));
  return {std::move(doc.vertices), std::move(doc.faces)};
}

std::vector<RigidMotion> load_transforms(const std::vector<std::string>& paths, std::size_t views) {
  std::vector<RigidMotion> out(views, RigidMotion::identity());
  if (paths.empty()) return out;
  if (paths.size() != views) {
    throw Error(ErrorCode::ShapeMismatch, fmt::format("{} transforms for {} clouds", paths.size(), views));
  }
  for (std::size_t k = 0; k < views; ++k) out[k] = read_transform(paths[k]);
  return out;
}

std::string history(const std::vector<double>& values) {
  std::vector<std::string> items;
  for (double v : values) items.push_back(fmt::format("{:.9e}", v));
  return fmt::format("{}", fmt::join(items, " "));
}

std::string icp_report(const IcpResult& r) {
  return fmt::format("converged {}\niterations {}\nfinal_rms {:.9e}\noverlap {:.9e}\nthreshold {:.9e}\n",
                     r.converged ? "true" : "false", r.iterations_used, r.final_rms, r.overlap_rate, r.threshold);
}

std::string registration_report(const RegistrationReport& r) {
  std::string pairs;
  for (const auto& [i, j] : r.pairs) pairs += fmt::format(" {}-{}", i, j);
  return fmt::format("views {}\nouter_iterations {}\nobjective {:.9e}\nerror_history {}\nobjective_history {}\npairs{}\n",
                     r.graph.view_count(), r.outer_iterations, r.objective, history(r.error_history),
                     history(r.objective_history), pairs);
}

struct Options {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::string out = ".";
};

RunConfig load_config(const Options& o) {
  RunConfig cfg = o.config.empty() ? RunConfig{} : read_config(o.config);
  if (o.seed) cfg.seed = *o.seed;
  cfg.validate();
  return cfg;
}

fs::path out_dir(const Options& o) {
  const fs::path dir(o.out);
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw Error(ErrorCode::IoError, fmt::format("cannot create '{}': {}", dir.string(), ec.message()));
  return dir;
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Multi-view point cloud registration and saliency-based face retrieval"};
  app.name("mvreg");
  app.require_subcommand(0, 1);
  Options o;
  app.add_option("--config", o.config, "flat key = value configuration file")->check(CLI::ExistingFile);
  app.add_option("--seed", o.seed, "RNG seed (overrides the config)");
  app.add_option("--out", o.out, "output directory")->capture_default_str();
  bool list_keys = false;
  app.add_flag("--config-keys", list_keys, "print every config key with its default and exit");

  std::vector<std::string> inputs;
  std::vector<std::string> transforms;
  std::string init, method = "adaptive";
  bool chained = false;
  std::string axis = "z";
  double position = 0.0, thickness = 0.01;
  std::string standard;
  std::string synth_kind = "scene";

  auto* pairwise = app.add_subcommand("pairwise", "register SOURCE onto TARGET; writes transform.txt");
  pairwise->add_option("source", inputs, "source PLY, then target PLY")->required()->expected(2);
  pairwise->add_option("--init", init, "initial transform file");
  pairwise->add_option("--method", method, "adaptive or classic")->check(CLI::IsMember({"adaptive", "classic"}));

  auto* reg = app.add_subcommand("register", "multi-view registration; writes view_K.txt, fused.ply, report.txt");
  reg->add_option("clouds", inputs, "view PLY files")->required()->expected(2, -1);
  reg->add_option("--init", transforms, "initial global transform per view")->expected(0, -1);
  reg->add_flag("--chained", chained, "run the chained classic ICP baseline instead");

  auto* section = app.add_subcommand("section", "cross-section of placed clouds; writes section.csv");
  section->add_option("clouds", inputs, "view PLY files")->required()->expected(1, -1);
  section->add_option("--transforms", transforms, "global transform per view")->expected(0, -1);
  section->add_option("--axis", axis, "x, y or z")->check(CLI::IsMember({"x", "y", "z"}))->capture_default_str();
  section->add_option("--position", position, "slab centre")->capture_default_str();
  section->add_option("--thickness", thickness, "slab thickness")->capture_default_str();

  auto* sal = app.add_subcommand("saliency", "per-vertex saliency; writes saliency.ply");
  sal->add_option("mesh", inputs, "mesh PLY")->required()->expected(1);

  auto* retrieve = app.add_subcommand("retrieve", "face retrieval; writes retrieval.csv");
  retrieve->add_option("standard", standard, "standard triangle file")->required();
  retrieve->add_option("models", inputs, "mesh PLY files")->required()->expected(1, -1);

  auto* bench = app.add_subcommand("bench", "Monte Carlo benchmark; writes bench.csv and bench_timing.csv");

  auto* synth = app.add_subcommand("synth", "write synthetic data: scene (views + truth) or battery (meshes)");
  synth->add_option("kind", synth_kind, "scene or battery")->check(CLI::IsMember({"scene", "battery"}));

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return 0;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n" << app.help();
    return 1;
  }
  if (list_keys) {
    const std::string defaults = format_config(RunConfig{});
    std::istringstream lines(defaults);
    std::string line;
    for (const ConfigKey& k : config_keys()) {
      std::getline(lines, line);
      out << fmt::format("{:<44} # {}\n", line, k.help);
    }
    return 0;
  }
  if (app.get_subcommands().empty()) {
    err << "error: a subcommand is required\n" << app.help();
    return 1;
  }

  try {
    const RunConfig cfg = load_config(o);
    const fs::path dir = out_dir(o);

    if (*pairwise) {
      const PointCloud source = load_cloud(inputs[0]);
      const PointCloud target = load_cloud(inputs[1]);
      const RigidMotion start = init.empty() ? RigidMotion::identity() : read_transform(init);
      const IcpResult r = method == "classic" ? icp_classic(source, target, start, cfg.pipeline.classic)
                                              : icp_adaptive(source, target, start, cfg.pipeline.icp);
      write_transform(dir / "transform.txt", r.motion);
      write_text(dir / "pairwise_report.txt", icp_report(r));
      out << icp_report(r);
    } else if (*reg) {
      std::vector<PointCloud> clouds;
      for (const std::string& p : inputs) clouds.push_back(load_cloud(p));
      ViewGraph graph = ViewGraph::with_views(clouds.size());
      graph.global_motions = load_transforms(transforms, clouds.size());
      graph = graph.anchored();
      const RegistrationReport r = chained ? register_chained(clouds, graph, cfg.pipeline)
                                           : register_multiview(clouds, graph, cfg.pipeline);
      PlyDocument fused;
      PlyScalar view{"view", {}};
      for (std::size_t k = 0; k < clouds.size(); ++k) {
        write_transform(dir / fmt::format("view_{}.txt", k), r.graph.global_motions[k]);
        const PointCloud placed = clouds[k].transformed(r.graph.global_motions[k]);
        for (const Point3& p : placed.points()) {
          fused.vertices.push_back(p);
          view.values.push_back(static_cast<double>(k));
        }
      }
      fused.scalars.push_back(std::move(view));
      write_ply(fused, dir / "fused.ply");
      write_text(dir / "report.txt", registration_report(r));
      out << registration_report(r);
    } else if (*section) {
      std::vector<PointCloud> clouds;
      for (const std::string& p : inputs) clouds.push_back(load_cloud(p));
      const auto motions = load_transforms(transforms, clouds.size());
      for (std::size_t k = 0; k < clouds.size(); ++k) clouds[k] = clouds[k].transformed(motions[k]);
      const auto points = cross_section(clouds, parse_axis(axis), position, thickness);
      write_text(dir / "section.csv", format_section(points));
      out << fmt::format("{} points in section\n", points.size());
    } else if (*sal) {
      const TriangleMesh mesh = load_mesh(inputs[0]);
      const SaliencyField field = saliency(mesh, cfg.retrieval);
      PlyDocument doc{mesh.vertices(), mesh.faces(), {{"saliency", field.values}}};
      write_ply(doc, dir / "saliency.ply");
      const auto clusters = cluster_salient(field, mesh, cfg.retrieval);
      out << fmt::format("xi {:.9e}\nthreshold {:.9e}\nclusters {}\n", field.xi, saliency_threshold(field, cfg.retrieval),
                         clusters.size());
    } else if (*retrieve) {
      const FacialTriangle tri = read_standard_triangle(standard);
      std::vector<TriangleMesh> models;
      for (const std::string& p : inputs) models.push_back(load_mesh(p));
      const auto results = retrieve_faces(models, tri, cfg.retrieval, cfg.retrieval_threads);
      write_text(dir / "retrieval.csv", format_retrieval(results));
      out << format_retrieval(results);
    } else if (*bench) {
      BenchmarkSpec spec = cfg.bench;
      spec.seed = cfg.seed;
      spec.pipeline = cfg.pipeline;
      const BenchmarkTable table = run_benchmark(spec);
      write_text(dir / "bench.csv", format_benchmark(table));
      write_text(dir / "bench_timing.csv", format_timing(table));
      out << format_benchmark(table);
    } else if (*synth) {
      if (synth_kind == "scene") {
        synthetic::SceneSpec spec = cfg.bench.scene;
        spec.seed = cfg.seed;
        const synthetic::Scene scene = synthetic::make_scene(spec);
        for (std::size_t k = 0; k < scene.clouds.size(); ++k) {
          const auto pts = scene.clouds[k].points();
          write_ply({{pts.begin(), pts.end()}, {}, {}}, dir / fmt::format("view_{}.ply", k));
          write_transform(dir / fmt::format("truth_{}.txt", k), scene.truth[k]);
        }
        out << fmt::format("{} views, resolution {:.9e}\n", scene.clouds.size(), scene.resolution);
      } else {
        const auto battery = synthetic::face_battery(cfg.seed);
        std::string index = "model,file,face,kind\n";
        for (std::size_t k = 0; k < battery.size(); ++k) {
          const std::string name = fmt::format("model_{:02}.ply", k);
          write_ply({battery[k].mesh.vertices(), battery[k].mesh.faces(), {}}, dir / name);
          index += fmt::format("{},{},{},{}\n", k, name, battery[k].face ? "true" : "false", battery[k].kind);
        }
        const FacialTriangle tri = synthetic::standard_face_triangle();
        const auto& v = tri.vertices();
        write_text(dir / "standard.txt", fmt::format("eye_l {} {} {}\neye_r {} {} {}\nnose {} {} {}\n", v[0].x(),
                                                     v[0].y(), v[0].z(), v[1].x(), v[1].y(), v[1].z(), v[2].x(),
                                                     v[2].y(), v[2].z()));
        write_text(dir / "battery.csv", index);
        out << fmt::format("{} models\n", battery.size());
      }
    }
    return 0;
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return is_input_error(e.code()) ? 1 : 2;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return 2;
  }
}

}  // namespace mvreg
