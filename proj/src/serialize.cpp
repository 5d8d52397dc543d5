#include "lsh/serialize.hpp"

#include <charconv>
#include <fstream>
#include <ostream>
#include <sstream>

namespace lsh {

std::string format_double(double v) {
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

Json graph_to_json(const WeightedDigraph& g) {
  Json nodes = Json::array();
  for (NodeId u = 0; u < g.node_count(); ++u) {
    Json n = {{"id", u}};
    if (u < g.labels().size()) n["label"] = g.labels()[u];
    nodes.push_back(std::move(n));
  }
  Json edges = Json::array();
  for (const auto& e : g.edges()) edges.push_back({{"src", e.src}, {"dst", e.dst}, {"weight", e.weight}});
  return {{"nodes", std::move(nodes)}, {"edges", std::move(edges)}};
}

WeightedDigraph graph_from_json(const Json& j) {
  try {
    const auto& nodes = j.at("nodes");
    std::vector<std::string> labels(nodes.size());
    std::vector<char> seen(nodes.size(), 0);
    bool labelled = false;
    for (const auto& n : nodes) {
      const auto id = n.at("id").get<std::size_t>();
      if (id >= nodes.size() || seen[id])
        throw ConfigError("node ids must be distinct and dense in 0..n-1");
      seen[id] = 1;
      if (n.contains("label")) {
        labels[id] = n["label"].get<std::string>();
        labelled = true;
      }
    }
    std::vector<WeightedEdge> edges;
    for (const auto& e : j.at("edges"))
      edges.push_back({e.at("src").get<NodeId>(), e.at("dst").get<NodeId>(),
                       e.at("weight").get<double>()});
    auto g = build_graph(nodes.size(), edges);
    if (labelled) g.set_labels(std::move(labels));
    return g;
  } catch (const Json::exception& ex) {
    throw ConfigError(std::string("malformed graph JSON: ") + ex.what());
  }
}

WeightedDigraph load_graph(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open graph file " + path.string());
  Json j;
  try {
    in >> j;
  } catch (const Json::exception& ex) {
    throw ConfigError("cannot parse " + path.string() + ": " + ex.what());
  }
  return graph_from_json(j);
}

Json partition_to_json(const Partition& p) {
  Json out = Json::array();
  for (NodeId u = 0; u < p.node_count(); ++u) out.push_back({{"node", u}, {"cluster", p.cluster_of(u)}});
  return out;
}

Json hierarchy_to_json(const ClusterHierarchy& h) {
  Json levels = Json::array();
  for (const auto& level : h.levels) {
    std::vector<std::vector<NodeId>> clusters(level.cluster_count());
    for (NodeId u = 0; u < level.base.size(); ++u) clusters[level.base[u]].push_back(u);
    Json edges = Json::array();
    for (const auto& e : level.aggregate.edges()) edges.push_back({e.src, e.dst, e.weight});
    levels.push_back({{"raw_index", level.raw_index},
                      {"clusters", clusters},
                      {"aggregate_edges", std::move(edges)}});
  }
  return {{"rho", h.rho}, {"node_count", h.node_count}, {"levels", std::move(levels)}};
}

Json options_to_json(const OptionHierarchy& oh) {
  Json options = Json::array();
  for (std::size_t id = 0; id < oh.size(); ++id) {
    const auto& o = oh.option(id);
    Json policy = Json::object();
    for (std::size_t i = 0; i < o.region.size(); ++i) {
      const auto slot = o.greedy(i);
      if (slot < 0) continue;
      policy[std::to_string(o.region[i])] =
          o.calls_primitives() ? static_cast<std::size_t>(slot) : o.children[slot];
    }
    options.push_back({{"id", id},
                       {"level", o.level},
                       {"raw_level", o.raw_level},
                       {"source", o.source},
                       {"target", o.target},
                       {"calls", o.calls_primitives() ? "primitives" : "options"},
                       {"children", o.children},
                       {"converged", o.converged},
                       {"episodes", o.episodes_trained},
                       {"policy", std::move(policy)}});
  }
  Json levels = Json::array();
  for (std::size_t l = 1; l <= oh.level_count(); ++l)
    levels.push_back({{"level", l}, {"raw_level", oh.raw_level(l)}, {"clusters", oh.cluster_count(l)}});
  return {{"action_count", oh.action_count()}, {"levels", std::move(levels)},
          {"options", std::move(options)}};
}

namespace {

constexpr const char* kPalette[] = {
    "#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd", "#8c564b", "#e377c2", "#7f7f7f",
    "#bcbd22", "#17becf", "#aec7e8", "#ffbb78", "#98df8a", "#ff9896", "#c5b0d5", "#c49c94",
    "#f7b6d2", "#c7c7c7", "#dbdb8d", "#9edae5"};

std::string quoted(const std::string& s) {
  std::string out = "\"";
  for (const char c : s) {
    if (c == '"' || c == '\\') out += '\\';
    out += c;
  }
  return out + '"';
}

}  // namespace

std::string export_dot(const ClusterHierarchy& h, const WeightedDigraph& g, std::size_t level) {
  if (level < 1 || level > h.level_count())
    throw ConfigError("level " + std::to_string(level) + " outside 1.." +
                      std::to_string(h.level_count()));
  const auto& base = h.levels[level - 1].base;
  if (base.size() != g.node_count()) throw ConfigError("hierarchy does not cover the graph");
  const std::size_t k = h.levels[level - 1].cluster_count();
  std::vector<std::vector<NodeId>> members(k);
  for (NodeId u = 0; u < base.size(); ++u) members[base[u]].push_back(u);

  std::ostringstream out;
  out << "digraph level_" << level << " {\n";
  out << "  node [shape=circle, style=filled, label=\"\"];\n";
  constexpr std::size_t palette = std::size(kPalette);
  for (std::size_t c = 0; c < k; ++c) {
    const char* color = kPalette[c % palette];
    out << "  subgraph cluster_" << c << " {\n";
    out << "    label=\"" << c << "\"; color=" << quoted(color) << ";\n";
    for (const NodeId u : members[c]) {
      out << "    n" << u << " [fillcolor=" << quoted(color);
      if (u < g.labels().size()) out << ", tooltip=" << quoted(g.labels()[u]);
      out << "];\n";
    }
    out << "  }\n";
  }
  for (const auto& e : g.edges()) {
    if (e.src == e.dst) continue;
    out << "  n" << e.src << " -> n" << e.dst;
    if (e.weight != 1.0) out << " [weight=" << format_double(e.weight) << "]";
    out << ";\n";
  }
  out << "}\n";
  return out.str();
}

void write_curves_csv(std::ostream& out, const LearningCurve& curve) {
  out << "run,epoch,return\n";
  for (std::size_t r = 0; r < curve.runs(); ++r)
    for (std::size_t e = 0; e < curve.epochs(); ++e)
      out << r << ',' << e << ',' << format_double(curve.at(r, e)) << '\n';
}

void write_summary_csv(std::ostream& out, const LearningCurve& curve) {
  out << "epoch,mean,stderr\n";
  for (std::size_t e = 0; e < curve.epochs(); ++e)
    out << e << ',' << format_double(curve.mean(e)) << ',' << format_double(curve.stderr_of_mean(e))
        << '\n';
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << text;
  if (!out) throw std::runtime_error("failed writing " + path.string());
}

}  // namespace lsh
