#include <cmath>

#include "doctest.h"

#include "dagn/error.hpp"
#include "dagn/gradcheck.hpp"
#include "dagn/reasoner.hpp"
#include "oracles.hpp"

using namespace dagn;

namespace {

ReasonerWeights make_weights(std::size_t hidden, std::uint64_t seed) {
  Rng rng(seed);
  return ReasonerWeights(hidden, rng);
}

void set_identity(Parameter& p) {
  p.value = Tensor::zeros(p.value.shape());
  for (std::size_t i = 0; i < p.value.rows(); ++i) p.value.at(i, i) = 1.0;
}

void set_zero(Parameter& p) { p.value = Tensor::zeros(p.value.shape()); }

DiscourseGraph empty_graph(std::size_t n) {
  DiscourseGraph g;
  for (std::size_t i = 0; i < n; ++i) {
    g.nodes.push_back(GraphNode{i, SourceTag::Context, ""});
  }
  return g;
}

// Dense-oracle comparison of one propagation round on the given graph.
void check_propagate_against_oracle(const DiscourseGraph& g, std::uint64_t seed) {
  std::size_t n = g.node_count();
  std::size_t h = 5;
  Rng rng(seed);
  ReasonerWeights weights = make_weights(h, seed * 31 + 1);
  Tensor states = oracles::random_tensor({n, h}, rng);

  Tape tape;
  NodeState node_state = init_nodes(tape.constant(states));
  Var alpha = node_weights(node_state, weights);
  Tensor messages = propagate(node_state, g, alpha, weights).value();

  Tensor expected = oracles::dense_messages(states, alpha.value(), g, weights.proj_explicit.value,
                                            weights.proj_punct.value);
  REQUIRE(messages.shape() == expected.shape());
  for (std::size_t i = 0; i < messages.numel(); ++i) {
    CHECK(std::abs(messages.at(i) - expected.at(i)) <= 1e-12);
  }
}

}  // namespace

TEST_CASE("init_nodes copies embeddings verbatim") {
  Tape tape;
  Rng rng(51);
  Tensor e = oracles::random_tensor({4, 6}, rng);
  NodeState state = init_nodes(tape.constant(e));
  CHECK(state.iteration == 0);
  CHECK(state.states.value() == e);

  NodeState zero = init_nodes(tape.constant(Tensor::zeros({3, 6})));
  for (std::size_t i = 0; i < zero.states.value().numel(); ++i) {
    CHECK(zero.states.value().at(i) == 0.0);
  }
}

TEST_CASE("node weights sit in (0,1) and follow the closed forms") {
  std::size_t h = 4;
  ReasonerWeights weights = make_weights(h, 52);
  Rng rng(53);

  // zero weight and bias: every node gets 0.5
  set_zero(weights.node_weight);
  set_zero(weights.node_weight_bias);
  Tape tape;
  NodeState state = init_nodes(tape.constant(oracles::random_tensor({5, h}, rng)));
  Tensor alpha = node_weights(state, weights).value();
  REQUIRE(alpha.shape() == Shape{5});
  for (std::size_t i = 0; i < 5; ++i) CHECK(alpha.at(i) == 0.5);

  // zero states: alpha = sigmoid(bias). A parameter leafs once per tape, so
  // the mutated bias needs a fresh tape.
  weights.node_weight_bias.value.at(0) = 0.7;
  Tape tape_b;
  NodeState zeros = init_nodes(tape_b.constant(Tensor::zeros({3, h})));
  Tensor alpha2 = node_weights(zeros, weights).value();
  double expected = 1.0 / (1.0 + std::exp(-0.7));
  for (std::size_t i = 0; i < 3; ++i) CHECK(alpha2.at(i) == doctest::Approx(expected).epsilon(1e-14));

  // moving along +w strictly increases alpha
  ReasonerWeights probe = make_weights(h, 54);
  Tensor base = oracles::random_tensor({1, h}, rng);
  Tensor moved = base;
  for (std::size_t c = 0; c < h; ++c) moved.at(0, c) += 0.5 * probe.node_weight.value.at(c, 0);
  Tensor a_base = node_weights(init_nodes(tape.constant(base)), probe).value();
  Tensor a_moved = node_weights(init_nodes(tape.constant(moved)), probe).value();
  CHECK(a_moved.at(0) > a_base.at(0));
  CHECK(a_base.at(0) > 0.0);
  CHECK(a_base.at(0) < 1.0);
}

TEST_CASE("propagate hand example and isolated nodes") {
  std::size_t h = 2;
  ReasonerWeights weights = make_weights(h, 55);
  set_identity(weights.proj_explicit);
  set_zero(weights.node_weight);      // alpha = 0.5 everywhere
  set_zero(weights.node_weight_bias);

  DiscourseGraph g = empty_graph(2);
  g.edges.insert(GraphEdge{1, EdgeType::Explicit, 0});  // one directed edge 1 -> 0

  Tape tape;
  Tensor states = Tensor::zeros({2, h});
  states.at(1, 0) = 2.0;
  NodeState node_state = init_nodes(tape.constant(states));
  Var alpha = node_weights(node_state, weights);
  Tensor messages = propagate(node_state, g, alpha, weights).value();

  CHECK(messages.at(0, 0) == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(messages.at(0, 1) == 0.0);
  // node 1 has no incoming edge
  CHECK(messages.at(1, 0) == 0.0);
  CHECK(messages.at(1, 1) == 0.0);
}

TEST_CASE("propagate matches the dense oracle on a path graph") {
  DiscourseGraph g = empty_graph(3);
  g.edges.insert(GraphEdge{0, EdgeType::Explicit, 1});
  g.edges.insert(GraphEdge{1, EdgeType::Explicit, 0});
  g.edges.insert(GraphEdge{1, EdgeType::Punct, 2});
  g.edges.insert(GraphEdge{2, EdgeType::Punct, 1});
  check_propagate_against_oracle(g, 56);
}

TEST_CASE("propagate matches the dense oracle exhaustively up to 4 nodes") {
  for (std::size_t n = 1; n <= 4; ++n) {
    std::vector<std::pair<std::size_t, std::size_t>> pairs;
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = i + 1; j < n; ++j) pairs.emplace_back(i, j);
    }
    std::size_t combos = 1;
    for (std::size_t p = 0; p < pairs.size(); ++p) combos *= 3;
    for (std::size_t code = 0; code < combos; ++code) {
      DiscourseGraph g = empty_graph(n);
      std::size_t c = code;
      for (const auto& [i, j] : pairs) {
        std::size_t pick = c % 3;
        c /= 3;
        if (pick == 0) continue;
        EdgeType type = pick == 1 ? EdgeType::Explicit : EdgeType::Punct;
        g.edges.insert(GraphEdge{i, type, j});
        g.edges.insert(GraphEdge{j, type, i});
      }
      check_propagate_against_oracle(g, 57 + code);
    }
  }
}

TEST_CASE("propagate matches the dense oracle on random graphs up to 6 nodes") {
  Rng rng(58);
  for (int trial = 0; trial < 50; ++trial) {
    std::size_t n = 2 + rng.next_below(5);
    DiscourseGraph g = oracles::random_graph(n, rng);
    check_propagate_against_oracle(g, 59 + trial);
  }
}

TEST_CASE("update applies the gated recurrence") {
  std::size_t h = 2;
  ReasonerWeights weights = make_weights(h, 60);
  set_identity(weights.update_weight);
  set_zero(weights.update_bias);

  Tape tape;
  Tensor v = Tensor::from({1, 2}, {-1.0, 2.0});
  NodeState state = init_nodes(tape.constant(v));
  NodeState next = update(state, tape.constant(Tensor::zeros({1, 2})), weights);
  CHECK(next.iteration == 1);
  CHECK(next.states.value().at(0, 0) == 0.0);
  CHECK(next.states.value().at(0, 1) == 2.0);

  set_zero(weights.update_weight);
  Tape tape_b;
  NodeState state_b = init_nodes(tape_b.constant(v));
  NodeState all_zero = update(state_b, tape_b.constant(Tensor::zeros({1, 2})), weights);
  for (std::size_t i = 0; i < 2; ++i) CHECK(all_zero.states.value().at(i) == 0.0);

  // ReLU range: never negative
  Rng rng(61);
  ReasonerWeights random_weights = make_weights(4, 62);
  NodeState rand_state = init_nodes(tape.constant(oracles::random_tensor({5, 4}, rng)));
  NodeState updated = update(rand_state, tape.constant(oracles::random_tensor({5, 4}, rng)),
                             random_weights);
  for (std::size_t i = 0; i < updated.states.value().numel(); ++i) {
    CHECK(updated.states.value().at(i) >= 0.0);
  }
}

TEST_CASE("reason composes rounds and validates arguments") {
  std::size_t h = 4;
  ReasonerWeights weights = make_weights(h, 63);
  Rng rng(64);
  DiscourseGraph g = empty_graph(3);
  g.edges.insert(GraphEdge{0, EdgeType::Explicit, 1});
  g.edges.insert(GraphEdge{1, EdgeType::Explicit, 0});
  Tensor e = oracles::random_tensor({3, h}, rng);

  // K = 1 equals one manual round
  Tape tape;
  Var ev = tape.constant(e);
  Tensor reasoned = reason(tape, ev, g, weights, 1).value();
  NodeState manual = init_nodes(tape.constant(e));
  Var alpha = node_weights(manual, weights);
  NodeState stepped = update(manual, propagate(manual, g, alpha, weights), weights);
  for (std::size_t i = 0; i < reasoned.numel(); ++i) {
    CHECK(reasoned.at(i) == stepped.states.value().at(i));
  }

  CHECK_THROWS_AS((void)reason(tape, ev, g, weights, 0), Error);
  try {
    (void)reason(tape, ev, g, weights, 0);
  } catch (const Error& err) {
    CHECK(err.kind() == ErrorKind::Config);
  }

  std::vector<Tensor> dump;
  (void)reason(tape, ev, g, weights, 3, &dump);
  CHECK(dump.size() == 3);
  CHECK(dump[0].shape() == Shape{3, static_cast<std::size_t>(h)});
}

TEST_CASE("edgeless graphs reduce to a per-node recurrence") {
  std::size_t h = 3;
  ReasonerWeights weights = make_weights(h, 65);
  Rng rng(66);
  std::size_t n = 4, rounds = 3;
  Tensor e = oracles::random_tensor({n, h}, rng);

  Tape tape;
  Tensor out = reason(tape, tape.constant(e), empty_graph(n), weights, rounds).value();

  // oracle: iterate each node independently, messages always zero
  for (std::size_t node = 0; node < n; ++node) {
    std::vector<double> v(h);
    for (std::size_t c = 0; c < h; ++c) v[c] = e.at(node, c);
    for (std::size_t k = 0; k < rounds; ++k) {
      std::vector<double> next(h, 0.0);
      for (std::size_t c = 0; c < h; ++c) {
        double acc = weights.update_bias.value.at(c);
        for (std::size_t r = 0; r < h; ++r) acc += v[r] * weights.update_weight.value.at(r, c);
        next[c] = acc > 0.0 ? acc : 0.0;
      }
      v = next;
    }
    for (std::size_t c = 0; c < h; ++c) {
      CHECK(std::abs(out.at(node, c) - v[c]) <= 1e-12);
    }
  }
}

TEST_CASE("reason is permutation-equivariant") {
  std::size_t h = 4;
  ReasonerWeights weights = make_weights(h, 67);
  Rng rng(68);
  for (int trial = 0; trial < 50; ++trial) {
    std::size_t n = 2 + rng.next_below(5);
    DiscourseGraph g = oracles::random_graph(n, rng);
    Tensor e = oracles::random_tensor({n, h}, rng);
    std::size_t rounds = 1 + rng.next_below(3);

    std::vector<std::size_t> perm(n);
    for (std::size_t i = 0; i < n; ++i) perm[i] = i;
    for (std::size_t i = n; i > 1; --i) std::swap(perm[i - 1], perm[rng.next_below(i)]);

    DiscourseGraph pg = empty_graph(n);
    for (const GraphEdge& edge : g.edges) {
      pg.edges.insert(GraphEdge{perm[edge.src], edge.type, perm[edge.dst]});
    }
    Tensor pe = Tensor::zeros({n, h});
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t c = 0; c < h; ++c) pe.at(perm[i], c) = e.at(i, c);
    }

    Tape tape;
    Tensor out = reason(tape, tape.constant(e), g, weights, rounds).value();
    Tensor pout = reason(tape, tape.constant(pe), pg, weights, rounds).value();
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t c = 0; c < h; ++c) {
        CHECK(std::abs(pout.at(perm[i], c) - out.at(i, c)) <= 1e-10);
      }
    }
  }
}

TEST_CASE("single edge type with shared projections matches the standard graph") {
  std::size_t h = 4;
  ReasonerWeights weights = make_weights(h, 69);
  weights.proj_punct.value = weights.proj_explicit.value;
  Rng rng(70);
  DiscourseGraph g = oracles::random_graph(5, rng);
  DiscourseGraph single = apply_variant(g, GraphVariant::SingleEdgeType);
  Tensor e = oracles::random_tensor({5, h}, rng);

  Tape tape;
  Tensor a = reason(tape, tape.constant(e), g, weights, 2).value();
  Tensor b = reason(tape, tape.constant(e), single, weights, 2).value();
  for (std::size_t i = 0; i < a.numel(); ++i) {
    CHECK(std::abs(a.at(i) - b.at(i)) <= 1e-12);
  }
}

TEST_CASE("enhance_tokens shifts exactly the spanned positions") {
  Tape tape;
  Rng rng(71);
  Tensor tokens = oracles::random_tensor({5, 3}, rng);
  Tensor states = oracles::random_tensor({1, 3}, rng);
  std::vector<std::vector<std::size_t>> spans = {{1, 2}};

  Tensor out = enhance_tokens(tape.constant(tokens), tape.constant(states), spans).value();
  for (std::size_t c = 0; c < 3; ++c) {
    CHECK(out.at(0, c) == tokens.at(0, c));
    CHECK(out.at(1, c) == doctest::Approx(tokens.at(1, c) + states.at(0, c)).epsilon(1e-15));
    CHECK(out.at(2, c) == doctest::Approx(tokens.at(2, c) + states.at(0, c)).epsilon(1e-15));
    CHECK(out.at(3, c) == tokens.at(3, c));
    CHECK(out.at(4, c) == tokens.at(4, c));
  }

  Tensor zero_out =
      enhance_tokens(tape.constant(tokens), tape.constant(Tensor::zeros({1, 3})), spans).value();
  CHECK(zero_out == tokens);
}

TEST_CASE("reason and enhance pass gradient checks for one to three rounds") {
  std::size_t h = 4, n = 5;
  Rng rng(72);
  DiscourseGraph g = oracles::random_graph(n, rng);
  Tensor token_base = oracles::random_tensor({7, h}, rng);
  std::vector<std::vector<std::size_t>> spans = {{0}, {1, 2}, {3}, {4}, {6}};

  for (std::size_t rounds : {1u, 2u, 3u}) {
    ReasonerWeights weights = make_weights(h, 73 + rounds);
    Parameter tokens("tokens", token_base);
    std::vector<Parameter*> params = {&tokens};
    for (Parameter* p : weights.parameters()) params.push_back(p);

    GradCheckReport report = finite_diff_check(
        [&](Tape& tape) {
          Var tok = tape.leaf(tokens);
          Var embeddings = span_sum(tok, spans);
          Var states = reason(tape, embeddings, g, weights, rounds);
          Var enhanced = enhance_tokens(tok, states, spans);
          Rng wr(74);
          return sum(mul(enhanced, tape.constant(oracles::random_tensor(enhanced.value().shape(), wr))));
        },
        params, 1e-5, 1e-4);
    INFO("rounds " << rounds << " max rel err " << report.max_rel_err);
    CHECK(report.pass);
  }
}
