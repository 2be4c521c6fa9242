#pragma once

#include <vector>

#include "dagn/autodiff.hpp"
#include "dagn/graph.hpp"

namespace dagn {

// Weights of the graph reasoning module: node weighting, one projection per
// edge type, and the node update.
struct ReasonerWeights {
  Parameter node_weight;      // [H x 1]
  Parameter node_weight_bias; // [1]
  Parameter proj_explicit;    // [H x H]
  Parameter proj_punct;       // [H x H]
  Parameter update_weight;    // [H x H]
  Parameter update_bias;      // [H]

  ReasonerWeights(std::size_t hidden, Rng& rng);
  std::vector<Parameter*> parameters();
};

// Node states across message-passing rounds.
struct NodeState {
  Var states;  // [N x H]
  std::size_t iteration = 0;
};

// v_i := e_i, round counter zero.
NodeState init_nodes(const Var& edu_embeddings);

// alpha_i = sigmoid(states_i . w + b), rank-1 [N], all in (0, 1).
Var node_weights(const NodeState& state, ReasonerWeights& weights);

// Neighbor-averaged, weight-scaled, edge-type-projected messages: each
// incoming edge (j, r, i) contributes alpha_j * (v_j projected by r); the sum
// is divided by the in-edge count. Nodes with no incoming edge get zero.
Var propagate(const NodeState& state, const DiscourseGraph& graph, const Var& alpha,
              ReasonerWeights& weights);

// v'_i = ReLU(W_u v_i + message_i + b_u); bumps the round counter.
NodeState update(const NodeState& state, const Var& messages, ReasonerWeights& weights);

// init_nodes, then `iterations` rounds of node_weights -> propagate -> update.
// Alpha and messages are recomputed every round from the current states and
// the weights are shared across rounds. Optionally dumps each round's state.
Var reason(Tape& tape, const Var& edu_embeddings, const DiscourseGraph& graph,
           ReasonerWeights& weights, std::size_t iterations,
           std::vector<Tensor>* state_dump = nullptr);

// t'_l = t_l + v_n for every position l in span n; all other positions
// (specials, question, delimiters) pass through unchanged.
Var enhance_tokens(const Var& tokens, const Var& final_states,
                   const std::vector<std::vector<std::size_t>>& edu_spans);

}  // namespace dagn
