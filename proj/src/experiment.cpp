#include "lsh/experiment.hpp"

#include <cmath>
#include <cstdlib>
#include <deque>
#include <fstream>
#include <limits>
#include <sstream>

#include "lsh/serialize.hpp"

namespace lsh {

std::filesystem::path data_dir() {
  if (const char* env = std::getenv("LSH_DATA_DIR")) return env;
  return LSH_DATA_DIR;
}

// ---------------------------------------------------------------------------
// Specs

namespace {

std::size_t parse_count(const std::string& text, const std::string& what) {
  std::size_t pos = 0;
  unsigned long long v = 0;
  try {
    v = std::stoull(text, &pos);
  } catch (const std::exception&) {
    pos = 0;
  }
  if (pos == 0 || pos != text.size() || v == 0)
    throw ConfigError("invalid " + what + " '" + text + "'");
  return static_cast<std::size_t>(v);
}

GridLayout layout(const std::string& name) { return GridLayout::load(data_dir() / "layouts" / (name + ".txt")); }

}  // namespace

EnvSpec EnvSpec::parse(const std::string& text) {
  EnvSpec spec;
  const std::string multi = "office-multi:";
  if (text == "rooms") spec.kind = Kind::rooms;
  else if (text == "grid") spec.kind = Kind::grid;
  else if (text == "maze") spec.kind = Kind::maze;
  else if (text == "office") spec.kind = Kind::office;
  else if (text == "taxi") spec.kind = Kind::taxi;
  else if (text == "hanoi") spec.kind = Kind::hanoi;
  else if (text.rfind(multi, 0) == 0) {
    spec.kind = Kind::office_multi;
    spec.floors = parse_count(text.substr(multi.size()), "floor count");
  } else {
    throw ConfigError("unknown environment '" + text +
                      "' (expected rooms, grid, maze, office, office-multi:<floors>, taxi, hanoi)");
  }
  return spec;
}

std::string EnvSpec::name() const {
  switch (kind) {
    case Kind::rooms: return "rooms";
    case Kind::grid: return "grid";
    case Kind::maze: return "maze";
    case Kind::office: return "office";
    case Kind::office_multi: return "office-multi:" + std::to_string(floors);
    case Kind::taxi: return "taxi";
    case Kind::hanoi: return "hanoi";
  }
  return "?";
}

std::size_t EnvSpec::epoch_length() const {
  switch (kind) {
    case Kind::rooms:
    case Kind::hanoi: return 100;
    case Kind::taxi: return 300;
    case Kind::maze:
    case Kind::grid: return 750;
    case Kind::office:
    case Kind::office_multi: return 1000;
  }
  return 100;
}

std::unique_ptr<Env> make_env(const EnvSpec& spec, std::uint64_t seed) {
  Rng rng(derive_seed(seed, 0x656e76));
  switch (spec.kind) {
    case EnvSpec::Kind::rooms:
    case EnvSpec::Kind::grid:
    case EnvSpec::Kind::maze:
    case EnvSpec::Kind::office:
      return std::make_unique<GridWorld>(
          GridWorld::with_random_endpoints(layout(spec.name()), rng, spec.name()));
    case EnvSpec::Kind::office_multi:
      return std::make_unique<MultiFloorOffice>(
          MultiFloorOffice::with_random_endpoints(spec.floors, layout("office"), rng));
    case EnvSpec::Kind::taxi: return std::make_unique<Taxi>();
    case EnvSpec::Kind::hanoi: return std::make_unique<Hanoi>(spec.discs);
  }
  throw ConfigError("unsupported environment");
}

AgentSpec AgentSpec::parse(const std::string& text) {
  AgentSpec spec;
  const std::string level = "level:";
  const std::string incremental = "incremental:";
  if (text == "primitive") spec.kind = Kind::primitive;
  else if (text == "louvain") spec.kind = Kind::louvain;
  else if (text == "louvain-flat") spec.kind = Kind::louvain_flat;
  else if (text.rfind(level, 0) == 0) {
    spec.kind = Kind::level;
    spec.level = parse_count(text.substr(level.size()), "level");
  } else if (text.rfind(incremental, 0) == 0) {
    spec.kind = Kind::incremental;
    spec.variant = parse_revision(text.substr(incremental.size()));
  } else {
    throw ConfigError("unknown agent '" + text +
                      "' (expected primitive, louvain, louvain-flat, level:<k>, "
                      "incremental:<replace|update>)");
  }
  return spec;
}

std::string AgentSpec::name() const {
  switch (kind) {
    case Kind::primitive: return "primitive";
    case Kind::louvain: return "louvain";
    case Kind::louvain_flat: return "louvain-flat";
    case Kind::level: return "level:" + std::to_string(level);
    case Kind::incremental: return "incremental:" + to_string(variant);
  }
  return "?";
}

void ExperimentConfig::validate() const {
  if (runs < 1) throw ConfigError("runs must be at least 1");
  if (epochs < 1) throw ConfigError("epochs must be at least 1");
  if (!(rho > 0.0)) throw ConfigError("resolution must be positive");
  if (agent.kind == AgentSpec::Kind::incremental) {
    if (schedule.empty()) throw ConfigError("incremental agents need a revision schedule");
    for (std::size_t i = 1; i < schedule.size(); ++i)
      if (schedule[i] <= schedule[i - 1])
        throw ConfigError("revision schedule must be strictly increasing");
  }
}

// ---------------------------------------------------------------------------
// Runs

RunSkills build_run_skills(const Env& env, const AgentSpec& agent, double rho, std::uint64_t seed,
                           const OptionTrainingParams& training) {
  RunSkills out;
  out.graph = extract_transition_graph(env);
  if (agent.kind == AgentSpec::Kind::primitive || agent.kind == AgentSpec::Kind::incremental)
    return out;
  out.raw = run_louvain(out.graph.graph, rho, seed);
  out.pruned = prune(out.raw);
  const auto model = PrimitiveModel::from_env(env, out.graph.index);
  auto params = training;
  params.seed = derive_seed(seed, 0x6f7074);

  auto oh = OptionHierarchy::build(out.pruned, model);
  if (agent.kind == AgentSpec::Kind::louvain) {
    out.unconverged = train_option_policies(oh, model, params);
  } else if (agent.kind == AgentSpec::Kind::louvain_flat) {
    oh = oh.flattened(model);
    out.unconverged = train_option_policies(oh, model, params);
  } else if (oh.level_count() > 0) {
    // runs whose hierarchy is shallower than the requested level use their top level
    oh = oh.single_level(std::min(agent.level, oh.level_count()), model);
    out.unconverged = train_option_policies(oh, model, params);
  }
  out.skills.options = std::make_shared<const OptionHierarchy>(std::move(oh));
  out.skills.index = std::make_shared<const StateIndex>(out.graph.index);
  return out;
}

double optimal_return(const Env& env) {
  const auto starts = env.start_support();
  if (starts.size() != 1) return std::numeric_limits<double>::quiet_NaN();
  const auto tg = extract_transition_graph(env);
  const auto& g = tg.graph;
  std::vector<std::size_t> dist(g.node_count(), std::numeric_limits<std::size_t>::max());
  const NodeId start = *tg.index.find(starts[0]);
  std::deque<NodeId> queue{start};
  dist[start] = 0;
  while (!queue.empty()) {
    const NodeId u = queue.front();
    queue.pop_front();
    if (env.is_goal(tg.index.state(u))) return 1.0 - 0.001 * double(dist[u]);
    if (env.is_terminal(tg.index.state(u))) continue;
    for (const auto& a : g.out_arcs(u)) {
      if (dist[a.node] != std::numeric_limits<std::size_t>::max()) continue;
      dist[a.node] = dist[u] + 1;
      queue.push_back(a.node);
    }
  }
  return std::numeric_limits<double>::quiet_NaN();
}

namespace {

struct RunOutput {
  std::vector<double> returns;
  std::optional<ClusterHierarchy> hierarchy;
  double optimal = 0.0;
  std::size_t unconverged = 0;
};

RunOutput one_run(const ExperimentConfig& cfg, std::size_t run) {
  const std::uint64_t seed = cfg.seed + run;
  const auto env = make_env(cfg.env, seed);
  const std::size_t epoch_length = cfg.epoch_length ? cfg.epoch_length : cfg.env.epoch_length();
  RunOutput out;
  out.optimal = optimal_return(*env);
  if (cfg.agent.kind == AgentSpec::Kind::incremental) {
    IncrementalConfig ic;
    ic.variant = cfg.agent.variant;
    ic.schedule = cfg.schedule;
    ic.rho = cfg.rho;
    ic.learning = cfg.learning;
    ic.option_training = cfg.option_training;
    ic.epochs = cfg.epochs;
    ic.epoch_length = epoch_length;
    ic.seed = derive_seed(seed, 1);
    auto res = incremental_run(*env, ic);
    out.returns = std::move(res.returns);
    out.hierarchy = std::move(res.final_hierarchy);
    return out;
  }
  auto skills = build_run_skills(*env, cfg.agent, cfg.rho, seed, cfg.option_training);
  if (cfg.agent.kind != AgentSpec::Kind::primitive) out.hierarchy = skills.raw;
  out.unconverged = skills.unconverged;
  out.returns =
      run_training(*env, skills.skills, cfg.learning, cfg.epochs, epoch_length, derive_seed(seed, 1))
          .returns;
  return out;
}

}  // namespace

ExperimentResult run_experiment(const ExperimentConfig& cfg) {
  cfg.validate();
  std::vector<RunOutput> runs(cfg.runs);
  const auto n = static_cast<std::ptrdiff_t>(cfg.runs);
  if (cfg.parallel) {
    // the first exception is rethrown after the loop; OpenMP regions must not throw
    std::exception_ptr error;
#pragma omp parallel for schedule(dynamic)
    for (std::ptrdiff_t r = 0; r < n; ++r) {
      try {
        runs[r] = one_run(cfg, static_cast<std::size_t>(r));
      } catch (...) {
#pragma omp critical
        if (!error) error = std::current_exception();
      }
    }
    if (error) std::rethrow_exception(error);
  } else {
    for (std::ptrdiff_t r = 0; r < n; ++r) runs[r] = one_run(cfg, static_cast<std::size_t>(r));
  }

  ExperimentResult result;
  result.curve = LearningCurve(cfg.runs, cfg.epochs);
  for (std::size_t r = 0; r < cfg.runs; ++r) {
    result.curve.set_run(r, runs[r].returns);
    result.optimal.push_back(runs[r].optimal);
    result.unconverged_options += runs[r].unconverged;
  }
  if (!runs.empty()) result.hierarchy = std::move(runs[0].hierarchy);
  return result;
}

void write_experiment(const std::filesystem::path& dir, const ExperimentResult& result) {
  std::ostringstream curves;
  write_curves_csv(curves, result.curve);
  write_text(dir / "curves.csv", curves.str());
  std::ostringstream summary;
  write_summary_csv(summary, result.curve);
  write_text(dir / "summary.csv", summary.str());
  if (result.hierarchy) write_text(dir / "hierarchy.json", hierarchy_to_json(*result.hierarchy).dump(2) + "\n");
}

// ---------------------------------------------------------------------------
// Scans

std::vector<ResolutionRow> resolution_scan(const WeightedDigraph& g, const std::vector<double>& rhos,
                                           std::uint64_t seed) {
  for (const double rho : rhos)
    if (!(rho > 0.0)) throw ConfigError("resolution values must be positive");
  std::vector<ResolutionRow> rows(rhos.size());
  const auto n = static_cast<std::ptrdiff_t>(rhos.size());
#pragma omp parallel for schedule(dynamic)
  for (std::ptrdiff_t i = 0; i < n; ++i) {
    auto h = run_louvain(g, rhos[i], seed);
    ResolutionRow row;
    row.rho = rhos[i];
    row.raw_levels = h.level_count();
    for (const auto& level : h.levels) row.cluster_counts.push_back(level.cluster_count());
    row.pruned_levels = prune(h).level_count();
    row.hierarchy = std::move(h);
    rows[i] = std::move(row);
  }
  return rows;
}

std::vector<DepthRow> depth_scan(const std::vector<std::size_t>& floor_counts, double rho,
                                 std::uint64_t seed) {
  const auto office = layout("office");
  std::vector<DepthRow> rows;
  for (const auto floors : floor_counts) {
    if (floors < 1) throw ConfigError("floor counts must be at least 1");
    Rng rng(derive_seed(seed, floors));
    const auto env = MultiFloorOffice::with_random_endpoints(floors, office, rng);
    const auto tg = extract_transition_graph(env);
    const auto h = run_louvain(tg.graph, rho, seed);
    rows.push_back({floors, tg.graph.node_count(), h.level_count(), prune(h).level_count()});
  }
  return rows;
}

}  // namespace lsh
