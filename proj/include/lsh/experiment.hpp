#pragma once

#include <cstdint>
#include <filesystem>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "lsh/environment.hpp"
#include "lsh/incremental.hpp"
#include "lsh/learning.hpp"
#include "lsh/louvain.hpp"
#include "lsh/skills.hpp"

namespace lsh {

/// Directory holding the shipped layouts and geometry.
std::filesystem::path data_dir();

struct EnvSpec {
  enum class Kind { rooms, grid, maze, office, office_multi, taxi, hanoi };
  Kind kind = Kind::rooms;
  std::size_t floors = 1;
  std::size_t discs = 4;

  /// rooms | grid | maze | office | office-multi:<floors> | taxi | hanoi
  static EnvSpec parse(const std::string& text);
  std::string name() const;
  /// Decision stages per epoch used for this domain's learning curves.
  std::size_t epoch_length() const;
};

/// Builds the environment for one run; `seed` picks start and goal where the
/// domain offers several candidates.
std::unique_ptr<Env> make_env(const EnvSpec& spec, std::uint64_t seed);

struct AgentSpec {
  enum class Kind { primitive, louvain, louvain_flat, level, incremental };
  Kind kind = Kind::louvain;
  std::size_t level = 1;
  Revision variant = Revision::update;

  /// primitive | louvain | louvain-flat | level:<k> | incremental:<replace|update>
  static AgentSpec parse(const std::string& text);
  std::string name() const;
};

struct ExperimentConfig {
  EnvSpec env;
  AgentSpec agent;
  double rho = 0.05;
  std::size_t runs = 40;
  std::size_t epochs = 40;
  /// 0 = the domain default.
  std::size_t epoch_length = 0;
  std::uint64_t seed = 0;
  std::vector<std::size_t> schedule{100, 500, 1000, 3000, 5000};
  LearningParams learning{};
  OptionTrainingParams option_training{};
  bool parallel = true;

  /// Throws ConfigError on an invalid combination.
  void validate() const;
};

/// Skills for one run: options trained offline on the full transition graph.
struct RunSkills {
  TransitionGraph graph;
  ClusterHierarchy raw;
  ClusterHierarchy pruned;
  SkillSet skills;
  std::size_t unconverged = 0;
};

/// Clusters the environment's transition graph with Louvain (seeded), prunes,
/// builds and trains the inventory required by `agent`.
RunSkills build_run_skills(const Env& env, const AgentSpec& agent, double rho, std::uint64_t seed,
                           const OptionTrainingParams& training = {});

struct ExperimentResult {
  LearningCurve curve;
  /// Unpruned hierarchy of the first run, if the agent uses one.
  std::optional<ClusterHierarchy> hierarchy;
  /// Best achievable return of each run (single-start domains), else NaN.
  std::vector<double> optimal;
  std::size_t unconverged_options = 0;
};

/// Runs seeds seed..seed+runs-1, fanned out over threads unless
/// cfg.parallel is false; results do not depend on the thread count.
ExperimentResult run_experiment(const ExperimentConfig& cfg);

/// Writes curves.csv, summary.csv and (when available) hierarchy.json.
void write_experiment(const std::filesystem::path& dir, const ExperimentResult& result);

/// 1 - 0.001 * (shortest path length from the start to a goal), NaN if the
/// start is not unique or no goal is reachable.
double optimal_return(const Env& env);

struct ResolutionRow {
  double rho;
  std::size_t raw_levels;
  std::vector<std::size_t> cluster_counts;
  std::size_t pruned_levels;
  ClusterHierarchy hierarchy;
};

/// Clusters one graph at every rho (in parallel), same seed for each.
std::vector<ResolutionRow> resolution_scan(const WeightedDigraph& g, const std::vector<double>& rhos,
                                           std::uint64_t seed);

struct DepthRow {
  std::size_t floors;
  std::size_t states;
  std::size_t raw_depth;
  std::size_t pruned_depth;
};

/// Hierarchy depth of the multi-floor office as the floor count grows.
std::vector<DepthRow> depth_scan(const std::vector<std::size_t>& floor_counts, double rho,
                                 std::uint64_t seed);

}  // namespace lsh
