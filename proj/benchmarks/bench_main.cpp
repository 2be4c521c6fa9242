#include <benchmark/benchmark.h>

#include "dagn/model.hpp"
#include "dagn/trainer.hpp"

using namespace dagn;

namespace {

QASample sample_for_bench() {
  return generate_synthetic(1, 42).front();
}

ExperimentConfig config_for_bench(std::size_t hidden) {
  ExperimentConfig config;
  config.hidden = hidden;
  config.max_len = 128;
  config.dropout = 0.0;
  config.seed = 42;
  return config;
}

}  // namespace

static void BM_Segment(benchmark::State& state) {
  const DelimiterLibrary& lib = load_delimiter_library();
  std::string text;
  for (int i = 0; i < 16; ++i) {
    text += "the committee rejected the proposal because the evidence was weak , however the "
            "board approved it after further review . ";
  }
  for (auto _ : state) {
    Segmentation seg = segment(text, lib, Granularity::Edu);
    benchmark::DoNotOptimize(seg);
  }
  state.SetBytesProcessed(static_cast<int64_t>(state.iterations()) *
                          static_cast<int64_t>(text.size()));
}
BENCHMARK(BM_Segment);

static void BM_Reason(benchmark::State& state) {
  std::size_t n = static_cast<std::size_t>(state.range(0));
  std::size_t hidden = 32;
  Rng rng(7);
  ReasonerWeights weights(hidden, rng);
  DiscourseGraph graph;
  for (std::size_t i = 0; i < n; ++i) {
    graph.nodes.push_back(GraphNode{i, SourceTag::Context, ""});
  }
  for (std::size_t i = 0; i + 1 < n; ++i) {
    graph.edges.insert(GraphEdge{i, EdgeType::Explicit, i + 1});
    graph.edges.insert(GraphEdge{i + 1, EdgeType::Explicit, i});
  }
  Tensor embeddings = Tensor::full({n, hidden}, 0.1);
  for (auto _ : state) {
    Tape tape;
    Var out = reason(tape, tape.constant(embeddings), graph, weights, 2);
    benchmark::DoNotOptimize(out.value());
  }
}
BENCHMARK(BM_Reason)->Arg(4)->Arg(8)->Arg(16);

static void BM_Predict(benchmark::State& state) {
  QASample sample = sample_for_bench();
  DagnModel model(config_for_bench(32), Vocabulary::build_from_samples({sample}));
  for (auto _ : state) {
    OptionScore score = model.predict(sample);
    benchmark::DoNotOptimize(score);
  }
}
BENCHMARK(BM_Predict);

static void BM_TrainStep(benchmark::State& state) {
  std::vector<QASample> batch = generate_synthetic(4, 42);
  ExperimentConfig config = config_for_bench(32);
  config.dropout = 0.1;
  DagnModel model(config, Vocabulary::build_from_samples(batch));
  AdamW optimizer(model.parameters(), config.lr, config.weight_decay);
  Rng dropout_rng(9);
  for (auto _ : state) {
    Tape tape;
    std::vector<Var> losses;
    for (const QASample& s : batch) losses.push_back(model.sample_loss(tape, s, &dropout_rng));
    Var loss = scale(sum(concat(losses)), 1.0 / static_cast<double>(batch.size()));
    model.zero_grad();
    tape.backward(loss);
    optimizer.step();
    benchmark::DoNotOptimize(loss.value());
  }
}
BENCHMARK(BM_TrainStep);

BENCHMARK_MAIN();
