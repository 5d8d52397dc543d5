// Command-line front end: clustering, skill construction, learning
// experiments, scans and exports.

#include <cstdio>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "lsh/experiment.hpp"
#include "lsh/serialize.hpp"

namespace {

using namespace lsh;

constexpr int kConfigExit = 2;
constexpr int kRuntimeExit = 3;

struct GraphSource {
  std::string env = "rooms";
  std::string graph_file;
  std::uint64_t seed = 0;

  void add(CLI::App* cmd) {
    cmd->add_option("--env", env, "Environment whose transition graph to use");
    cmd->add_option("--graph", graph_file, "Graph JSON file (overrides --env)");
  }
  WeightedDigraph load() const {
    if (!graph_file.empty()) return load_graph(graph_file);
    return extract_transition_graph(*make_env(EnvSpec::parse(env), seed)).graph;
  }
};

void emit(const std::string& out, const std::string& text) {
  if (out.empty() || out == "-")
    std::cout << text;
  else
    write_text(out, text);
}

std::string level_summary(const ClusterHierarchy& h) {
  std::ostringstream s;
  s << "raw levels " << h.level_count() << ", pruned " << prune(h).level_count() << ", clusters";
  for (const auto& level : h.levels) s << ' ' << level.cluster_count();
  return s.str();
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Louvain skill hierarchies: cluster transition graphs, build options, run experiments"};
  app.require_subcommand(1);
  app.set_config("--config", "", "Read options from a TOML/INI file");

  std::uint64_t seed = 0;
  double rho = 0.05;
  std::size_t runs = 40;
  std::string out;
  auto common = [&](CLI::App* cmd, bool with_runs) {
    cmd->add_option("--seed", seed, "Base seed")->capture_default_str();
    cmd->add_option("--rho", rho, "Modularity resolution")->capture_default_str();
    if (with_runs) cmd->add_option("--runs", runs, "Independent runs")->capture_default_str();
  };

  // cluster
  GraphSource cluster_src;
  auto* cluster = app.add_subcommand("cluster", "Run Louvain and write the hierarchy as JSON");
  cluster_src.add(cluster);
  common(cluster, false);
  cluster->add_option("--out,-o", out, "Output file (default stdout)");

  // skills
  std::string skills_env = "rooms";
  std::string skills_agent = "louvain";
  auto* skills = app.add_subcommand("skills", "Build and train an option hierarchy");
  skills->add_option("--env", skills_env, "Environment")->capture_default_str();
  skills->add_option("--agent", skills_agent, "louvain | louvain-flat | level:<k>")->capture_default_str();
  common(skills, false);
  skills->add_option("--out,-o", out, "Output file (default stdout)");

  // train
  std::string train_env = "rooms";
  std::string train_agent = "louvain";
  std::size_t epochs = 40;
  std::size_t epoch_length = 0;
  std::string out_dir = "out";
  bool serial = false;
  auto* train = app.add_subcommand("train", "Learning-curve experiment");
  train->add_option("--env", train_env, "Environment")->capture_default_str();
  train->add_option("--agent", train_agent,
                    "primitive | louvain | louvain-flat | level:<k> | incremental:<variant>")
      ->capture_default_str();
  train->add_option("--epochs", epochs, "Epochs")->capture_default_str();
  train->add_option("--epoch-length", epoch_length, "Decision stages per epoch (0 = domain default)");
  train->add_option("--out-dir", out_dir, "Directory for curves.csv, summary.csv, hierarchy.json")
      ->capture_default_str();
  train->add_flag("--serial", serial, "Run the seeds one after another");
  common(train, true);

  // incremental
  std::string inc_env = "rooms";
  std::string variant = "update";
  std::vector<std::size_t> schedule{100, 500, 1000, 3000, 5000};
  std::size_t inc_epochs = 60;
  auto* incremental = app.add_subcommand("incremental", "Online skill discovery");
  incremental->add_option("--env", inc_env, "Environment")->capture_default_str();
  incremental->add_option("--variant", variant, "replace | update")->capture_default_str();
  incremental->add_option("--schedule", schedule, "Decision stages after which to revise")
      ->delimiter(',');
  incremental->add_option("--epochs", inc_epochs, "Epochs")->capture_default_str();
  incremental->add_option("--out-dir", out_dir, "Output directory")->capture_default_str();
  common(incremental, true);

  // res-scan
  GraphSource scan_src;
  scan_src.env = "hanoi";
  std::vector<double> rhos{10, 5, 3.3, 1, 0.05};
  auto* res_scan = app.add_subcommand("res-scan", "Hierarchy shape across resolutions (CSV)");
  scan_src.add(res_scan);
  res_scan->add_option("--rhos", rhos, "Resolutions")->delimiter(',');
  res_scan->add_option("--seed", seed, "Seed")->capture_default_str();
  res_scan->add_option("--out,-o", out, "Output file (default stdout)");

  // depth-scan
  std::vector<std::size_t> floors{1, 2, 5, 10, 20, 50, 100};
  auto* depth = app.add_subcommand("depth-scan", "Hierarchy depth of the multi-floor office (CSV)");
  depth->add_option("--floors", floors, "Floor counts")->delimiter(',');
  common(depth, false);
  depth->add_option("--out,-o", out, "Output file (default stdout)");

  // pinball-graph
  std::string geometry;
  std::size_t samples = 4000;
  std::size_t k = 10;
  double scale = 4.0;
  std::string hierarchy_out;
  auto* pinball = app.add_subcommand("pinball-graph", "kNN graph over sampled Pinball positions");
  pinball->add_option("--geometry", geometry, "Geometry JSON (default: shipped layout)");
  pinball->add_option("--samples", samples, "Sampled positions")->capture_default_str();
  pinball->add_option("--k", k, "Neighbours per point")->capture_default_str();
  pinball->add_option("--scale", scale, "Edge weight exp(-scale d^2)")->capture_default_str();
  pinball->add_option("--hierarchy", hierarchy_out, "Also cluster and write the hierarchy here");
  common(pinball, false);
  pinball->add_option("--out,-o", out, "Graph JSON output (default stdout)");

  // export-dot
  GraphSource dot_src;
  std::size_t level = 1;
  auto* dot = app.add_subcommand("export-dot", "Graphviz rendering of one hierarchy level");
  dot_src.add(dot);
  dot->add_option("--level", level, "Level (1 = finest raw level)")->capture_default_str();
  common(dot, false);
  dot->add_option("--out,-o", out, "Output file (default stdout)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::Success& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kConfigExit;
  }

  try {
    if (*cluster) {
      cluster_src.seed = seed;
      const auto h = run_louvain(cluster_src.load(), rho, seed);
      std::cerr << level_summary(h) << '\n';
      emit(out, hierarchy_to_json(h).dump(2) + "\n");
    } else if (*skills) {
      const auto env = make_env(EnvSpec::parse(skills_env), seed);
      const auto agent = AgentSpec::parse(skills_agent);
      if (agent.kind == AgentSpec::Kind::primitive || agent.kind == AgentSpec::Kind::incremental)
        throw ConfigError("skills needs a louvain, louvain-flat or level:<k> agent");
      const auto rs = build_run_skills(*env, agent, rho, seed);
      std::cerr << level_summary(rs.raw) << "; " << rs.skills.size() << " options, "
                << rs.unconverged << " not converged\n";
      Json j = options_to_json(*rs.skills.options);
      j["hierarchy"] = hierarchy_to_json(rs.pruned);
      emit(out, j.dump(2) + "\n");
    } else if (*train || *incremental) {
      ExperimentConfig cfg;
      cfg.rho = rho;
      cfg.runs = runs;
      cfg.seed = seed;
      if (*train) {
        cfg.env = EnvSpec::parse(train_env);
        cfg.agent = AgentSpec::parse(train_agent);
        cfg.epochs = epochs;
        cfg.epoch_length = epoch_length;
        cfg.parallel = !serial;
      } else {
        cfg.env = EnvSpec::parse(inc_env);
        cfg.agent = AgentSpec::parse("incremental:" + variant);
        cfg.epochs = inc_epochs;
        cfg.schedule = schedule;
      }
      const auto result = run_experiment(cfg);
      write_experiment(out_dir, result);
      const auto last = cfg.epochs - 1;
      std::cerr << cfg.agent.name() << " on " << cfg.env.name() << ": final mean "
                << result.curve.mean(last) << " +/- " << result.curve.stderr_of_mean(last) << '\n';
    } else if (*res_scan) {
      scan_src.seed = seed;
      std::ostringstream csv;
      csv << "rho,raw_levels,pruned_levels,cluster_counts\n";
      for (const auto& row : resolution_scan(scan_src.load(), rhos, seed)) {
        csv << format_double(row.rho) << ',' << row.raw_levels << ',' << row.pruned_levels << ',';
        for (std::size_t i = 0; i < row.cluster_counts.size(); ++i)
          csv << (i ? ";" : "") << row.cluster_counts[i];
        csv << '\n';
      }
      emit(out, csv.str());
    } else if (*depth) {
      std::ostringstream csv;
      csv << "floors,states,raw_depth,pruned_depth\n";
      for (const auto& row : depth_scan(floors, rho, seed))
        csv << row.floors << ',' << row.states << ',' << row.raw_depth << ',' << row.pruned_depth
            << '\n';
      emit(out, csv.str());
    } else if (*pinball) {
      const auto geom = PinballGeometry::load(geometry.empty() ? data_dir() / "pinball.json"
                                                               : std::filesystem::path(geometry));
      const auto points = sample_pinball_states(geom, samples, seed);
      const auto g = knn_graph(points, k, scale);
      Json j = graph_to_json(g);
      Json coords = Json::array();
      for (std::size_t i = 0; i < points.size(); ++i)
        coords.push_back({points.point(i)[0], points.point(i)[1]});
      j["positions"] = std::move(coords);
      emit(out, j.dump() + "\n");
      if (!hierarchy_out.empty()) {
        const auto h = run_louvain(g, rho, seed);
        std::cerr << level_summary(h) << '\n';
        write_text(hierarchy_out, hierarchy_to_json(h).dump(2) + "\n");
      }
    } else if (*dot) {
      dot_src.seed = seed;
      const auto g = dot_src.load();
      emit(out, export_dot(run_louvain(g, rho, seed), g, level));
    }
  } catch (const ConfigError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kConfigExit;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kRuntimeExit;
  }
  return 0;
}
