#include "dagn/model.hpp"

#include "dagn/error.hpp"

namespace dagn {

DagnModel::DagnModel(const ExperimentConfig& config, Vocabulary vocab)
    : config_(config),
      vocab_(std::move(vocab)),
      init_rng_(Rng(config.seed).fork(1)),
      encoder(vocab_.size(), config.hidden, config.max_len, init_rng_),
      reasoner(config.hidden, init_rng_),
      predictor(config.hidden, init_rng_) {
  config_.validate();
}

std::vector<Parameter*> DagnModel::parameters() {
  std::vector<Parameter*> out;
  for (Parameter* p : encoder.parameters()) out.push_back(p);
  for (Parameter* p : reasoner.parameters()) out.push_back(p);
  for (Parameter* p : predictor.parameters()) out.push_back(p);
  return out;
}

void DagnModel::zero_grad() {
  for (Parameter* p : parameters()) p->zero_grad();
}

Tensor dropout_mask(const Shape& shape, double rate, Rng& rng) {
  Tensor mask = Tensor::zeros(shape);
  double keep_scale = 1.0 / (1.0 - rate);
  for (std::size_t i = 0; i < mask.numel(); ++i) {
    mask.at(i) = rng.next_double() < rate ? 0.0 : keep_scale;
  }
  return mask;
}

Var DagnModel::score_option(Tape& tape, const QASample& sample, std::size_t option_index,
                            Rng* dropout_rng, OptionTrace* trace, bool dump_states) {
  const DelimiterLibrary& lib = load_delimiter_library();
  Segmentation context =
      segment(sample.context, lib, config_.granularity, SourceTag::Context);
  Segmentation option =
      segment(sample.options.at(option_index), lib, config_.granularity, SourceTag::Option);

  EncodedInput input =
      build_input(sample, option_index, context, option, vocab_, config_.max_len);

  Var tokens = encode(tape, input.seq, encoder);
  if (dropout_rng && config_.dropout > 0.0) {
    tokens = mul(tokens, tape.constant(dropout_mask(tokens.shape(), config_.dropout, *dropout_rng)));
  }
  Var bos = row(tokens, 0);

  Var enhanced = tokens;
  if (config_.use_graph) {
    DiscourseGraph graph = apply_variant(
        build_graph(input.context, input.option, option_index), config_.variant);
    Var embeddings = edu_embed(tokens, input.seq.edu_spans);
    std::vector<Tensor> dump;
    Var states = reason(tape, embeddings, graph, reasoner, config_.effective_iterations(),
                        dump_states ? &dump : nullptr);
    enhanced = enhance_tokens(tokens, states, input.seq.edu_spans);
    if (trace) {
      trace->node_count = graph.node_count();
      trace->edges.assign(graph.edges.begin(), graph.edges.end());
      trace->node_states = std::move(dump);
    }
  }
  if (trace) {
    for (const Edu& edu : input.context.edus) trace->context_edu_texts.push_back(edu.text);
    for (const Edu& edu : input.option.edus) trace->option_edu_texts.push_back(edu.text);
  }

  Var encoded = encode_sequence(tape, enhanced, predictor);
  Var context_pool =
      pool_segment(encoded, input.seq.context_mask(), tape.leaf(predictor.pool_context));
  Var qo_pool = pool_segment(encoded, input.seq.question_option_mask(),
                             tape.leaf(predictor.pool_question_option));

  const Tensor* head_mask = nullptr;
  Tensor mask_storage;
  if (dropout_rng && config_.dropout > 0.0) {
    mask_storage = dropout_mask({3 * config_.hidden}, config_.dropout, *dropout_rng);
    head_mask = &mask_storage;
  }
  return prediction_head(tape, context_pool, qo_pool, bos, predictor, head_mask);
}

Var DagnModel::option_logits(Tape& tape, const QASample& sample, Rng* dropout_rng,
                             std::vector<OptionTrace>* traces, bool dump_states) {
  std::vector<Var> logits;
  logits.reserve(4);
  for (std::size_t k = 0; k < 4; ++k) {
    OptionTrace* trace = nullptr;
    if (traces) {
      traces->emplace_back();
      trace = &traces->back();
    }
    logits.push_back(score_option(tape, sample, k, dropout_rng, trace, dump_states));
  }
  return concat(logits);
}

Var DagnModel::sample_loss(Tape& tape, const QASample& sample, Rng* dropout_rng) {
  if (!sample.label) {
    raise(ErrorKind::Training, "sample " + sample.id + " has no gold label");
  }
  Var logits = option_logits(tape, sample, dropout_rng);
  return cross_entropy(logits, static_cast<std::size_t>(*sample.label));
}

OptionScore DagnModel::predict(const QASample& sample, std::vector<OptionTrace>* traces,
                               bool dump_states) {
  Tape tape;
  Var logits = option_logits(tape, sample, nullptr, traces, dump_states);
  std::array<double, 4> values{};
  for (std::size_t i = 0; i < 4; ++i) values[i] = logits.value().at(i);
  return OptionScore::from_logits(values);
}

}  // namespace dagn
