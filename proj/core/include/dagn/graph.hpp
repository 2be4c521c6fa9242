#pragma once

#include <cstdint>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "dagn/segmenter.hpp"

namespace dagn {

// Two edge types: one for explicit connectives, one for punctuation marks.
enum class EdgeType { Explicit, Punct };

const char* to_string(EdgeType type);

struct GraphEdge {
  std::size_t src;
  EdgeType type;
  std::size_t dst;

  auto operator<=>(const GraphEdge&) const = default;
};

struct GraphNode {
  std::size_t id;  // equals its position in the node list
  SourceTag source;
  std::string text;
};

// Per-option discourse graph: context EDUs plus one option's EDUs as nodes,
// directed edge triplets in both directions for every delimiter that sits
// between two surviving EDUs. Context and option node runs are not linked to
// each other.
struct DiscourseGraph {
  std::vector<GraphNode> nodes;
  std::set<GraphEdge> edges;
  std::size_t option_index = 0;

  std::size_t node_count() const { return nodes.size(); }
  bool has_edge(std::size_t src, EdgeType type, std::size_t dst) const {
    return edges.count(GraphEdge{src, type, dst}) > 0;
  }
  // In-degree by edge count (one per directed triplet ending at id).
  std::size_t in_degree(std::size_t id) const;
};

enum class GraphVariant { Standard, SingleEdgeType, FullyConnected };

const char* to_string(GraphVariant v);
GraphVariant variant_from_string(std::string_view s);

// Builds the option-k graph from the context segmentation and one option's
// segmentation. Context EDUs keep their ids; option EDUs are offset past
// them. Throws an empty-graph error when both segmentations have zero EDUs.
DiscourseGraph build_graph(const Segmentation& context, const Segmentation& option,
                           std::size_t option_index);

// Standard: identity. SingleEdgeType: every edge becomes Explicit, topology
// kept. FullyConnected: edges (i, Explicit, j) for all i != j.
DiscourseGraph apply_variant(const DiscourseGraph& g, GraphVariant v);

// Instrumentation: how many graphs build_graph has constructed in this
// process. Lets tests assert the graph-free ablation never builds one.
std::uint64_t graph_build_count();
void reset_graph_build_count();

std::string graph_to_json(const DiscourseGraph& g);
std::string graph_to_dot(const DiscourseGraph& g);

}  // namespace dagn
