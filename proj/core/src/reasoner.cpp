#include "dagn/reasoner.hpp"

#include "dagn/error.hpp"

namespace dagn {

ReasonerWeights::ReasonerWeights(std::size_t hidden, Rng& rng)
    : node_weight(Parameter::uniform_init("reasoner.node_weight", {hidden, 1}, hidden, rng)),
      node_weight_bias(Parameter("reasoner.node_weight_bias", Tensor::zeros({1}))),
      proj_explicit(Parameter::uniform_init("reasoner.proj_explicit", {hidden, hidden}, hidden, rng)),
      proj_punct(Parameter::uniform_init("reasoner.proj_punct", {hidden, hidden}, hidden, rng)),
      update_weight(Parameter::uniform_init("reasoner.update_weight", {hidden, hidden}, hidden, rng)),
      update_bias(Parameter("reasoner.update_bias", Tensor::zeros({hidden}))) {}

std::vector<Parameter*> ReasonerWeights::parameters() {
  return {&node_weight, &node_weight_bias, &proj_explicit,
          &proj_punct,  &update_weight,    &update_bias};
}

NodeState init_nodes(const Var& edu_embeddings) {
  if (edu_embeddings.value().rank() != 2) {
    raise(ErrorKind::EmptyGraph, "init_nodes: expected [N x H] embeddings");
  }
  return NodeState{edu_embeddings, 0};
}

Var node_weights(const NodeState& state, ReasonerWeights& weights) {
  Tape& tape = *state.states.tape();
  Var scores = add_row_broadcast(matmul(state.states, tape.leaf(weights.node_weight)),
                                 tape.leaf(weights.node_weight_bias));
  return reshape(sigmoid(scores), {state.states.value().rows()});
}

Var propagate(const NodeState& state, const DiscourseGraph& graph, const Var& alpha,
              ReasonerWeights& weights) {
  Tape& tape = *state.states.tape();
  std::size_t n = state.states.value().rows();
  if (graph.node_count() != n) {
    raise(ErrorKind::Dimension, "propagate: graph has " + std::to_string(graph.node_count()) +
                                    " nodes but states have " + std::to_string(n) + " rows");
  }

  // Dense per-type adjacency masks: mask[i, j] = 1 when edge (j, r, i) exists.
  Tensor mask_explicit = Tensor::zeros({n, n});
  Tensor mask_punct = Tensor::zeros({n, n});
  std::vector<double> in_degree(n, 0.0);
  for (const GraphEdge& e : graph.edges) {
    (e.type == EdgeType::Explicit ? mask_explicit : mask_punct).at(e.dst, e.src) = 1.0;
    in_degree[e.dst] += 1.0;
  }
  Tensor inv_degree = Tensor::zeros({n});
  for (std::size_t i = 0; i < n; ++i) {
    inv_degree.at(i) = in_degree[i] > 0.0 ? 1.0 / in_degree[i] : 0.0;
  }

  Var weighted = scale_rows(state.states, alpha);
  Var by_explicit =
      matmul(matmul(tape.constant(std::move(mask_explicit)), weighted), tape.leaf(weights.proj_explicit));
  Var by_punct =
      matmul(matmul(tape.constant(std::move(mask_punct)), weighted), tape.leaf(weights.proj_punct));
  return scale_rows(add(by_explicit, by_punct), tape.constant(std::move(inv_degree)));
}

NodeState update(const NodeState& state, const Var& messages, ReasonerWeights& weights) {
  Tape& tape = *state.states.tape();
  Var pre = add_row_broadcast(add(matmul(state.states, tape.leaf(weights.update_weight)), messages),
                              tape.leaf(weights.update_bias));
  return NodeState{relu(pre), state.iteration + 1};
}

Var reason(Tape& tape, const Var& edu_embeddings, const DiscourseGraph& graph,
           ReasonerWeights& weights, std::size_t iterations, std::vector<Tensor>* state_dump) {
  if (edu_embeddings.tape() != &tape) {
    raise(ErrorKind::Argument, "reason: embeddings recorded on a different tape");
  }
  if (iterations == 0) {
    raise(ErrorKind::Config, "reason: iteration count must be at least 1");
  }
  if (graph.node_count() == 0) {
    raise(ErrorKind::EmptyGraph, "reason: graph has no nodes");
  }
  NodeState state = init_nodes(edu_embeddings);
  for (std::size_t k = 0; k < iterations; ++k) {
    Var alpha = node_weights(state, weights);
    Var messages = propagate(state, graph, alpha, weights);
    state = update(state, messages, weights);
    if (state_dump) state_dump->push_back(state.states.value());
  }
  return state.states;
}

Var enhance_tokens(const Var& tokens, const Var& final_states,
                   const std::vector<std::vector<std::size_t>>& edu_spans) {
  return span_add(tokens, final_states, edu_spans);
}

}  // namespace dagn
