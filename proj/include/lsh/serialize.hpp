#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>

#include "json.hpp"
#include "lsh/graph.hpp"
#include "lsh/learning.hpp"
#include "lsh/louvain.hpp"
#include "lsh/modularity.hpp"
#include "lsh/skills.hpp"

namespace lsh {

using Json = nlohmann::json;

/// {"nodes": [{"id", "label"?}], "edges": [{"src", "dst", "weight"}]}
Json graph_to_json(const WeightedDigraph& g);
/// Throws ConfigError on malformed input.
WeightedDigraph graph_from_json(const Json& j);
WeightedDigraph load_graph(const std::filesystem::path& path);

/// [{"node", "cluster"}] in node order.
Json partition_to_json(const Partition& p);

/// {"rho", "node_count", "levels": [{"raw_index", "clusters": [[node ids]],
/// "aggregate_edges": [[src, dst, weight]]}]}; clusters hold original node ids.
Json hierarchy_to_json(const ClusterHierarchy& h);

/// Option inventory with greedy policies (node -> child slot).
Json options_to_json(const OptionHierarchy& oh);

/// Graphviz digraph of g with nodes filled by cluster at `level` (1-based
/// over h.levels). Output is a pure function of the inputs. Throws
/// ConfigError if the level is out of range.
std::string export_dot(const ClusterHierarchy& h, const WeightedDigraph& g, std::size_t level);

/// `run,epoch,return`
void write_curves_csv(std::ostream& out, const LearningCurve& curve);
/// `epoch,mean,stderr`
void write_summary_csv(std::ostream& out, const LearningCurve& curve);

/// Shortest round-trip decimal form of a double.
std::string format_double(double v);

void write_text(const std::filesystem::path& path, const std::string& text);

}  // namespace lsh
