// Acceptance suite: one self-contained check per shipped guarantee, each
// printed as a PASS/FAIL line with its measured quantity and runtime. The
// process exits non-zero if any line fails.

#include <unistd.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "dagn/checkpoint.hpp"
#include "dagn/gradcheck.hpp"
#include "dagn/model.hpp"
#include "dagn/trainer.hpp"
#include "oracles.hpp"

using namespace dagn;

namespace {

int g_failures = 0;

void report(int index, const std::string& name, bool pass, const std::string& detail,
            double seconds) {
  std::printf("[%s] %d. %s — %s (%.2f s)\n", pass ? "PASS" : "FAIL", index, name.c_str(),
              detail.c_str(), seconds);
  std::fflush(stdout);
  if (!pass) ++g_failures;
}

void run_criterion(int index, const std::string& name,
                   const std::function<std::pair<bool, std::string>()>& body,
                   double max_seconds = 0.0) {
  auto start = std::chrono::steady_clock::now();
  bool pass = false;
  std::string detail;
  try {
    auto [ok, text] = body();
    pass = ok;
    detail = text;
  } catch (const std::exception& e) {
    detail = std::string("exception: ") + e.what();
  }
  double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  if (max_seconds > 0.0 && seconds > max_seconds) {
    pass = false;
    std::ostringstream slow;
    slow << detail << "; OVER TIME BUDGET of " << max_seconds << " s";
    detail = slow.str();
  }
  report(index, name, pass, detail, seconds);
}

// Independent transcription of the delimiter table, alphabetical order.
const std::vector<std::string>& reference_connectives() {
  static const std::vector<std::string> list = {
      "accordingly", "additionally", "after", "afterward",
      "also", "alternatively", "although", "and",
      "as", "as a result", "as an alternative", "as if",
      "as long as", "as soon as", "as though", "as well",
      "because", "before", "before and after", "besides",
      "but", "by comparison", "by contrast", "by then",
      "consequently", "conversely", "earlier", "either or",
      "else", "except", "finally", "for",
      "for example", "for instance", "further", "furthermore",
      "hence", "however", "if", "if and when",
      "if then", "in addition", "in contrast", "in fact",
      "in other words", "in particular", "in short", "in sum",
      "in the end", "in turn", "indeed", "insofar as",
      "instead", "later", "lest", "likewise",
      "meantime", "meanwhile", "moreover", "much as",
      "neither nor", "nevertheless", "next", "nonetheless",
      "nor", "now that", "on the contrary", "on the one hand on the other hand",
      "on the other hand", "once", "or", "otherwise",
      "overall", "plus", "previously", "rather",
      "regardless", "separately", "similarly", "simultaneously",
      "since", "so", "so that", "specifically",
      "still", "then", "thereafter", "thereby",
      "therefore", "though", "thus", "till",
      "ultimately", "unless", "until", "when",
      "when and if", "whereas", "while", "yet",
  };
  return list;
}

std::pair<bool, std::string> criterion_delimiter_fidelity() {
  const DelimiterLibrary& lib = load_delimiter_library();
  std::set<std::string> actual(lib.connectives.begin(), lib.connectives.end());
  std::set<std::string> expected(reference_connectives().begin(), reference_connectives().end());
  bool sets_equal = actual == expected;
  bool count_ok = lib.connectives.size() == 100 && lib.punctuation.size() == 4;
  bool punct_ok = std::set<std::string>(lib.punctuation.begin(), lib.punctuation.end()) ==
                  std::set<std::string>{".", ",", ";", ":"};
  std::uint64_t checksum = library_checksum(lib);
  bool checksum_ok = checksum == 0x22997d676cac5b45ULL;
  std::ostringstream detail;
  detail << lib.connectives.size() << " connectives, set equality "
         << (sets_equal ? "ok" : "BROKEN") << ", checksum "
         << (checksum_ok ? "pinned" : "CHANGED");
  return {sets_equal && count_ok && punct_ok && checksum_ok, detail.str()};
}

std::pair<bool, std::string> criterion_segmentation_oracle() {
  const DelimiterLibrary& lib = load_delimiter_library();
  std::vector<std::string> corpus = oracles::segmentation_corpus(200, 7);
  std::size_t matched = 0, total = 0;
  for (const std::string& text : corpus) {
    for (Granularity g : {Granularity::Edu, Granularity::Clause, Granularity::Sentence}) {
      Segmentation seg = segment(text, lib, g);
      oracles::SplitResult expected = oracles::brute_force_split(seg.tokens, active_delimiters(lib, g));
      bool same = seg.edus.size() == expected.edu_spans.size() &&
                  seg.hits.size() == expected.hit_spans.size();
      if (same) {
        for (std::size_t i = 0; i < seg.edus.size(); ++i) {
          same = same && seg.edus[i].first_token == expected.edu_spans[i].first &&
                 seg.edus[i].last_token == expected.edu_spans[i].second;
        }
        for (std::size_t i = 0; i < seg.hits.size(); ++i) {
          same = same && seg.hits[i].first_token == expected.hit_spans[i].first &&
                 seg.hits[i].last_token == expected.hit_spans[i].second;
        }
      }
      ++total;
      if (same) ++matched;
    }
  }

  Segmentation fig = segment(
      "digital systems are the best information systems because error cannot occur in the "
      "emission of digital signals",
      lib, Granularity::Edu);
  bool fig_ok = fig.edus.size() == 2 && fig.hits.size() == 1 && fig.hits[0].phrase == "because" &&
                fig.edus[0].text == "digital systems are the best information systems" &&
                fig.edus[1].text == "error cannot occur in the emission of digital signals";

  std::ostringstream detail;
  detail << matched << "/" << total << " corpus cases match, two-unit example "
         << (fig_ok ? "ok" : "BROKEN");
  return {matched == total && fig_ok, detail.str()};
}

std::pair<bool, std::string> criterion_graph_oracle() {
  const DelimiterLibrary& lib = load_delimiter_library();
  std::vector<std::string> corpus = oracles::segmentation_corpus(220, 31);
  std::size_t compared = 0, matched = 0;
  bool invariants_ok = true;
  for (std::size_t i = 0; i + 1 < corpus.size() && compared < 100; i += 2) {
    Segmentation ctx = segment(corpus[i], lib, Granularity::Edu, SourceTag::Context);
    Segmentation opt = segment(corpus[i + 1], lib, Granularity::Edu, SourceTag::Option);
    if (ctx.edus.empty() && opt.edus.empty()) continue;
    DiscourseGraph g = build_graph(ctx, opt, 0);
    std::vector<GraphEdge> expected = oracles::brute_force_edges(ctx, opt);
    std::vector<GraphEdge> actual(g.edges.begin(), g.edges.end());
    ++compared;
    if (actual == expected) ++matched;
    for (const GraphEdge& e : g.edges) {
      invariants_ok = invariants_ok && e.src != e.dst && g.has_edge(e.dst, e.type, e.src) &&
                      e.src < g.node_count() && e.dst < g.node_count();
    }
  }

  bool full_ok = true;
  for (std::size_t n = 2; n <= 8; ++n) {
    Rng rng(n * 17);
    DiscourseGraph base = oracles::random_graph(n, rng);
    DiscourseGraph fc = apply_variant(base, GraphVariant::FullyConnected);
    full_ok = full_ok && fc.edges.size() == n * (n - 1);
  }

  std::ostringstream detail;
  detail << matched << "/" << compared << " graphs match the oracle, invariants "
         << (invariants_ok ? "hold" : "BROKEN") << ", fully-connected counts "
         << (full_ok ? "ok" : "BROKEN");
  return {compared == 100 && matched == compared && invariants_ok && full_ok, detail.str()};
}

std::pair<bool, std::string> criterion_message_passing_oracle() {
  double worst = 0.0;
  std::size_t checked = 0;
  auto check_graph = [&](const DiscourseGraph& g, std::uint64_t seed) {
    std::size_t n = g.node_count(), h = 5;
    Rng rng(seed);
    Rng wrng(seed * 31 + 1);
    ReasonerWeights weights(h, wrng);
    Tensor states = oracles::random_tensor({n, h}, rng);
    Tape tape;
    NodeState state = init_nodes(tape.constant(states));
    Var alpha = node_weights(state, weights);
    Tensor actual = propagate(state, g, alpha, weights).value();
    Tensor expected = oracles::dense_messages(states, alpha.value(), g, weights.proj_explicit.value,
                                              weights.proj_punct.value);
    for (std::size_t i = 0; i < actual.numel(); ++i) {
      worst = std::max(worst, std::abs(actual.at(i) - expected.at(i)));
    }
    ++checked;
  };

  // exhaustive typed topologies on up to 4 nodes
  for (std::size_t n = 1; n <= 4; ++n) {
    std::vector<std::pair<std::size_t, std::size_t>> pairs;
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = i + 1; j < n; ++j) pairs.emplace_back(i, j);
    }
    std::size_t combos = 1;
    for (std::size_t p = 0; p < pairs.size(); ++p) combos *= 3;
    for (std::size_t code = 0; code < combos; ++code) {
      DiscourseGraph g;
      for (std::size_t i = 0; i < n; ++i) {
        g.nodes.push_back(GraphNode{i, SourceTag::Context, ""});
      }
      std::size_t c = code;
      for (const auto& [i, j] : pairs) {
        std::size_t pick = c % 3;
        c /= 3;
        if (pick == 0) continue;
        EdgeType type = pick == 1 ? EdgeType::Explicit : EdgeType::Punct;
        g.edges.insert(GraphEdge{i, type, j});
        g.edges.insert(GraphEdge{j, type, i});
      }
      check_graph(g, 1000 + code);
    }
  }
  // 50 random graphs up to 6 nodes
  Rng rng(58);
  for (int trial = 0; trial < 50; ++trial) {
    std::size_t n = 2 + rng.next_below(5);
    DiscourseGraph g = oracles::random_graph(n, rng);
    check_graph(g, 2000 + trial);
  }

  std::ostringstream detail;
  detail << checked << " topologies, max abs deviation " << worst;
  return {worst <= 1e-12, detail.str()};
}

std::pair<bool, std::string> criterion_gradient_suite() {
  double worst = 0.0;
  bool all_pass = true;
  auto run_check = [&](const std::function<Var(Tape&)>& f, std::vector<Parameter*> params) {
    GradCheckReport report = finite_diff_check(f, params, 1e-5, 1e-4);
    worst = std::max(worst, report.max_rel_err);
    all_pass = all_pass && report.pass;
  };

  // core ops, inputs kept away from relu kinks
  {
    Rng rng(301);
    Parameter a("a", oracles::random_tensor({4, 3}, rng));
    Parameter b("b", oracles::random_tensor({3, 2}, rng));
    run_check([&](Tape& t) { return sum(sigmoid(matmul(t.leaf(a), t.leaf(b)))); }, {&a, &b});
    Parameter x("x", oracles::random_tensor({6}, rng, -2.0, 2.0));
    run_check([&](Tape& t) { return cross_entropy(softmax(t.leaf(x)), 2); }, {&x});
    run_check([&](Tape& t) { return sum(gelu(t.leaf(x))); }, {&x});
    Parameter gain("gain", oracles::random_tensor({6}, rng, 0.5, 1.5));
    Parameter bias("bias", oracles::random_tensor({6}, rng));
    Parameter rows("rows", oracles::random_tensor({3, 6}, rng));
    run_check(
        [&](Tape& t) {
          Rng wr(302);
          Var normed = layer_norm(t.leaf(rows), t.leaf(gain), t.leaf(bias));
          return sum(mul(normed, t.constant(oracles::random_tensor(normed.value().shape(), wr))));
        },
        {&rows, &gain, &bias});
  }
  // segment-indexed ops
  {
    Rng rng(303);
    Parameter tokens("tokens", oracles::random_tensor({6, 4}, rng));
    Parameter states("states", oracles::random_tensor({2, 4}, rng));
    std::vector<std::vector<std::size_t>> spans = {{1, 2}, {4}};
    run_check(
        [&](Tape& t) {
          Rng wr(304);
          Var v = span_add(t.leaf(tokens), t.leaf(states), spans);
          return sum(mul(v, t.constant(oracles::random_tensor(v.value().shape(), wr))));
        },
        {&tokens, &states});
    run_check(
        [&](Tape& t) {
          Rng wr(305);
          Var v = span_sum(t.leaf(tokens), spans);
          return sum(mul(v, t.constant(oracles::random_tensor(v.value().shape(), wr))));
        },
        {&tokens});
  }
  // graph reasoning stack on a 5-node graph
  {
    Rng rng(306);
    DiscourseGraph g = oracles::random_graph(5, rng);
    Parameter embeddings("embeddings", oracles::random_tensor({5, 4}, rng));
    Rng wrng(307);
    ReasonerWeights weights(4, wrng);
    std::vector<Parameter*> params = {&embeddings};
    for (Parameter* p : weights.parameters()) params.push_back(p);
    run_check(
        [&](Tape& t) {
          Rng wr(308);
          Var out = reason(t, t.leaf(embeddings), g, weights, 2);
          return sum(mul(out, t.constant(oracles::random_tensor(out.value().shape(), wr))));
        },
        params);
  }
  // sequence head
  {
    Rng rng(309);
    Rng wrng(310);
    PredictorWeights weights(4, wrng);
    Parameter input("input", oracles::random_tensor({5, 4}, rng));
    std::vector<Parameter*> params = {&input};
    for (Parameter* p : weights.parameters()) params.push_back(p);
    run_check(
        [&](Tape& t) {
          Var seq = encode_sequence(t, t.leaf(input), weights);
          Var pc = pool_segment(seq, {0, 1, 2}, t.leaf(weights.pool_context));
          Var pq = pool_segment(seq, {3, 4}, t.leaf(weights.pool_question_option));
          return prediction_head(t, pc, pq, row(seq, 0), weights);
        },
        params);
  }
  // full loss through predict at H = 8 for every reasoning depth
  {
    QASample s;
    s.id = "grad";
    s.context = "alpha because bravo";
    s.question = "why ?";
    s.options = {"bravo so alpha", "alpha but bravo", "alpha so bravo", "bravo and alpha"};
    s.label = 0;
    for (std::size_t rounds : {1u, 2u, 3u}) {
      ExperimentConfig config;
      config.hidden = 8;
      config.max_len = 32;
      config.iterations = rounds;
      config.dropout = 0.1;
      config.seed = 11 + rounds;
      DagnModel model(config, Vocabulary::build_from_samples({s}));
      run_check([&](Tape& t) { return model.sample_loss(t, s); }, model.parameters());
    }
  }

  std::ostringstream detail;
  detail << "max rel err " << worst << " (tolerance 1e-4)";
  return {all_pass, detail.str()};
}

std::pair<bool, std::string> criterion_equivariance() {
  double worst_reason = 0.0;
  Rng rng(68);
  ReasonerWeights weights(4, rng);
  for (int trial = 0; trial < 50; ++trial) {
    std::size_t n = 2 + rng.next_below(5), h = 4;
    DiscourseGraph g = oracles::random_graph(n, rng);
    Tensor e = oracles::random_tensor({n, h}, rng);
    std::size_t rounds = 1 + rng.next_below(3);

    std::vector<std::size_t> perm(n);
    for (std::size_t i = 0; i < n; ++i) perm[i] = i;
    for (std::size_t i = n; i > 1; --i) std::swap(perm[i - 1], perm[rng.next_below(i)]);

    DiscourseGraph pg;
    for (std::size_t i = 0; i < n; ++i) pg.nodes.push_back(GraphNode{i, SourceTag::Context, ""});
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
        worst_reason = std::max(worst_reason, std::abs(pout.at(perm[i], c) - out.at(i, c)));
      }
    }
  }

  // option permutation through predict on tie-free samples
  double worst_predict = 0.0;
  bool argmax_ok = true;
  std::vector<QASample> samples = generate_synthetic(50, 77);
  ExperimentConfig config;
  config.hidden = 16;
  config.max_len = 64;
  config.seed = 21;
  DagnModel model(config, Vocabulary::build_from_samples(samples));
  Rng perm_rng(78);
  std::size_t used = 0;
  for (const QASample& s : samples) {
    OptionScore base = model.predict(s);
    bool tie_free = true;
    for (int i = 0; i < 4; ++i) {
      for (int j = i + 1; j < 4; ++j) tie_free = tie_free && base.logits[i] != base.logits[j];
    }
    if (!tie_free) continue;
    ++used;
    std::array<int, 4> perm = {0, 1, 2, 3};
    for (int i = 4; i > 1; --i) {
      std::swap(perm[i - 1], perm[perm_rng.next_below(static_cast<std::uint64_t>(i))]);
    }
    QASample shuffled = s;
    for (int k = 0; k < 4; ++k) shuffled.options[perm[k]] = s.options[k];
    OptionScore moved = model.predict(shuffled);
    for (int k = 0; k < 4; ++k) {
      worst_predict =
          std::max(worst_predict, std::abs(moved.probabilities[perm[k]] - base.probabilities[k]));
    }
    argmax_ok = argmax_ok && moved.predicted == perm[base.predicted];
  }

  std::ostringstream detail;
  detail << "reason deviation " << worst_reason << ", predict deviation " << worst_predict << " on "
         << used << " tie-free samples, argmax " << (argmax_ok ? "follows" : "BROKEN");
  return {worst_reason <= 1e-10 && worst_predict <= 1e-10 && used >= 45 && argmax_ok, detail.str()};
}

ExperimentConfig synthetic_experiment_config() {
  ExperimentConfig config;
  config.dataset = DatasetKind::Synthetic;
  config.synthetic_train = 256;
  config.synthetic_dev = 64;
  config.hidden = 32;
  config.epochs = 20;
  config.seed = 0;
  return config;
}

struct TrainingArtifacts {
  double best_accuracy = 0.0;
  std::string checkpoint_bytes;
  std::string report_json;
};

TrainingArtifacts run_synthetic_training() {
  ExperimentConfig config = synthetic_experiment_config();
  TrainedModel trained = train(config);
  TrainingArtifacts artifacts;
  artifacts.best_accuracy =
      trained.outcome.best_dev.has_accuracy ? trained.outcome.best_dev.accuracy : 0.0;
  auto path = std::filesystem::temp_directory_path() /
              ("dagn_acceptance_" + std::to_string(::getpid()) + ".ckpt");
  save_checkpoint(path, CheckpointHeader{config.seed, config.model_hash()},
                  trained.model->parameters());
  std::ifstream in(path, std::ios::binary);
  artifacts.checkpoint_bytes.assign(std::istreambuf_iterator<char>(in),
                                    std::istreambuf_iterator<char>());
  std::filesystem::remove(path);
  artifacts.report_json = trained.outcome.best_dev.to_json();
  return artifacts;
}

TrainingArtifacts g_first_run;  // shared between the end-to-end and determinism checks

std::pair<bool, std::string> criterion_synthetic_end_to_end() {
  ExperimentConfig config = synthetic_experiment_config();
  auto [train_samples, dev_samples] = load_experiment_data(config);
  (void)train_samples;

  std::size_t solver_correct = 0;
  for (const QASample& s : dev_samples) {
    if (solve_synthetic(s) == *s.label) ++solver_correct;
  }
  bool solver_ok = solver_correct == dev_samples.size();

  g_first_run = run_synthetic_training();
  bool model_ok = g_first_run.best_accuracy >= 0.95;

  std::ostringstream detail;
  detail << "dev accuracy " << g_first_run.best_accuracy << " (needs >= 0.95), symbolic solver "
         << solver_correct << "/" << dev_samples.size();
  return {model_ok && solver_ok, detail.str()};
}

std::pair<bool, std::string> criterion_ablation_plumbing() {
  ExperimentConfig config;
  config.dataset = DatasetKind::Synthetic;
  config.synthetic_train = 32;
  config.synthetic_dev = 16;
  config.hidden = 16;
  config.epochs = 2;
  config.seed = 4;

  std::vector<AblationRow> rows = run_ablation(config);
  std::vector<AblationRow> again = run_ablation(config);

  static const std::vector<std::string> expected_order = {
      "standard", "clause_nodes", "sentence_nodes", "single_edge_type", "fully_connected",
      "no_graph"};
  bool order_ok = rows.size() == 6;
  for (std::size_t i = 0; order_ok && i < rows.size(); ++i) {
    order_ok = rows[i].name == expected_order[i];
  }
  bool deterministic = ablation_to_json(rows) == ablation_to_json(again);
  bool reports_valid = true;
  for (const AblationRow& row : rows) {
    reports_valid = reports_valid && row.dev.has_accuracy && row.dev.labeled == 16 &&
                    row.dev.accuracy >= 0.0 && row.dev.accuracy <= 1.0;
  }

  // the graph-free row must never construct a graph
  reset_graph_build_count();
  ExperimentConfig no_graph = config;
  no_graph.use_graph = false;
  (void)train(no_graph);
  bool hook_ok = graph_build_count() == 0;

  std::ostringstream detail;
  detail << rows.size() << " rows, order " << (order_ok ? "ok" : "BROKEN") << ", two runs "
         << (deterministic ? "identical" : "DIFFER") << ", graph-free hook "
         << (hook_ok ? "clean" : "FIRED");
  return {order_ok && deterministic && reports_valid && hook_ok, detail.str()};
}

std::pair<bool, std::string> criterion_determinism() {
  TrainingArtifacts second = run_synthetic_training();
  bool checkpoints_equal = second.checkpoint_bytes == g_first_run.checkpoint_bytes;
  bool reports_equal = second.report_json == g_first_run.report_json;
  std::ostringstream detail;
  detail << "checkpoints " << (checkpoints_equal ? "byte-identical" : "DIFFER") << ", reports "
         << (reports_equal ? "identical" : "DIFFER");
  return {checkpoints_equal && reports_equal, detail.str()};
}

}  // namespace

int main() {
  std::printf("acceptance suite\n");
  run_criterion(1, "delimiter library fidelity", criterion_delimiter_fidelity, 1.0);
  run_criterion(2, "segmentation matches the brute-force splitter", criterion_segmentation_oracle);
  run_criterion(3, "graph construction matches the adjacency oracle", criterion_graph_oracle);
  run_criterion(4, "message passing matches the dense-loop oracle", criterion_message_passing_oracle);
  run_criterion(5, "gradients match finite differences", criterion_gradient_suite, 120.0);
  run_criterion(6, "permutation behavior of reason and predict", criterion_equivariance);
  run_criterion(7, "synthetic end-to-end training", criterion_synthetic_end_to_end, 300.0);
  run_criterion(8, "ablation runner emits six deterministic rows", criterion_ablation_plumbing);
  run_criterion(9, "repeated training is byte-identical", criterion_determinism);

  if (g_failures == 0) {
    std::printf("all criteria passed\n");
    return 0;
  }
  std::printf("%d criteria FAILED\n", g_failures);
  return 1;
}
