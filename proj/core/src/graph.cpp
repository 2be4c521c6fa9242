#include "dagn/graph.hpp"

#include <atomic>
#include <sstream>

#include "dagn/error.hpp"
#include "json.hpp"

namespace dagn {

namespace {
std::atomic<std::uint64_t> g_graph_builds{0};
}

const char* to_string(EdgeType type) {
  return type == EdgeType::Explicit ? "explicit" : "punct";
}

const char* to_string(GraphVariant v) {
  switch (v) {
    case GraphVariant::Standard: return "standard";
    case GraphVariant::SingleEdgeType: return "single_edge_type";
    case GraphVariant::FullyConnected: return "fully_connected";
  }
  return "standard";
}

GraphVariant variant_from_string(std::string_view s) {
  if (s == "standard") return GraphVariant::Standard;
  if (s == "single_edge_type") return GraphVariant::SingleEdgeType;
  if (s == "fully_connected") return GraphVariant::FullyConnected;
  raise(ErrorKind::Argument, "unknown graph variant '" + std::string(s) + "'");
}

std::size_t DiscourseGraph::in_degree(std::size_t id) const {
  std::size_t deg = 0;
  for (const GraphEdge& e : edges) {
    if (e.dst == id) ++deg;
  }
  return deg;
}

DiscourseGraph build_graph(const Segmentation& context, const Segmentation& option,
                           std::size_t option_index) {
  g_graph_builds.fetch_add(1, std::memory_order_relaxed);
  if (context.edus.empty() && option.edus.empty()) {
    raise(ErrorKind::EmptyGraph,
          "build_graph: option " + std::to_string(option_index) + " has zero EDUs");
  }

  DiscourseGraph g;
  g.option_index = option_index;
  for (const Edu& edu : context.edus) {
    g.nodes.push_back(GraphNode{g.nodes.size(), SourceTag::Context, edu.text});
  }
  std::size_t offset = g.nodes.size();
  for (const Edu& edu : option.edus) {
    g.nodes.push_back(GraphNode{g.nodes.size(), SourceTag::Option, edu.text});
  }

  auto connect = [&g](const std::vector<DelimiterHit>& hits, std::size_t base) {
    for (const DelimiterHit& hit : hits) {
      if (!hit.before_edu || !hit.after_edu) continue;
      EdgeType type = hit.kind == DelimiterKind::Explicit ? EdgeType::Explicit : EdgeType::Punct;
      std::size_t a = base + *hit.before_edu;
      std::size_t b = base + *hit.after_edu;
      g.edges.insert(GraphEdge{a, type, b});
      g.edges.insert(GraphEdge{b, type, a});
    }
  };
  connect(context.hits, 0);
  connect(option.hits, offset);
  return g;
}

DiscourseGraph apply_variant(const DiscourseGraph& g, GraphVariant v) {
  switch (v) {
    case GraphVariant::Standard:
      return g;
    case GraphVariant::SingleEdgeType: {
      DiscourseGraph out = g;
      out.edges.clear();
      for (const GraphEdge& e : g.edges) {
        out.edges.insert(GraphEdge{e.src, EdgeType::Explicit, e.dst});
      }
      return out;
    }
    case GraphVariant::FullyConnected: {
      DiscourseGraph out = g;
      out.edges.clear();
      for (std::size_t i = 0; i < g.nodes.size(); ++i) {
        for (std::size_t j = 0; j < g.nodes.size(); ++j) {
          if (i != j) out.edges.insert(GraphEdge{i, EdgeType::Explicit, j});
        }
      }
      return out;
    }
  }
  return g;
}

std::uint64_t graph_build_count() { return g_graph_builds.load(std::memory_order_relaxed); }

void reset_graph_build_count() { g_graph_builds.store(0, std::memory_order_relaxed); }

std::string graph_to_json(const DiscourseGraph& g) {
  nlohmann::json j;
  j["option_index"] = g.option_index;
  j["nodes"] = nlohmann::json::array();
  for (const GraphNode& n : g.nodes) {
    j["nodes"].push_back({{"id", n.id},
                          {"source", n.source == SourceTag::Context ? "context" : "option"},
                          {"text", n.text}});
  }
  j["edges"] = nlohmann::json::array();
  for (const GraphEdge& e : g.edges) {
    j["edges"].push_back({{"src", e.src}, {"type", to_string(e.type)}, {"dst", e.dst}});
  }
  return j.dump(2);
}

std::string graph_to_dot(const DiscourseGraph& g) {
  std::ostringstream out;
  out << "digraph discourse {\n";
  for (const GraphNode& n : g.nodes) {
    std::string label = n.text;
    for (std::size_t pos = 0; (pos = label.find('"', pos)) != std::string::npos; pos += 2) {
      label.replace(pos, 1, "\\\"");
    }
    out << "  n" << n.id << " [label=\"" << n.id << ": " << label << "\""
        << (n.source == SourceTag::Option ? ", shape=box" : "") << "];\n";
  }
  for (const GraphEdge& e : g.edges) {
    out << "  n" << e.src << " -> n" << e.dst << " [label=\"" << to_string(e.type) << "\"];\n";
  }
  out << "}\n";
  return out.str();
}

}  // namespace dagn
