#include "dagn/predictor.hpp"

#include <algorithm>
#include <cmath>

#include "dagn/error.hpp"

namespace dagn {

GruCell::GruCell(const std::string& prefix, std::size_t input, std::size_t hidden, Rng& rng)
    : in_update(Parameter::uniform_init(prefix + ".in_update", {input, hidden}, input, rng)),
      rec_update(Parameter::uniform_init(prefix + ".rec_update", {hidden, hidden}, hidden, rng)),
      bias_update(Parameter(prefix + ".bias_update", Tensor::zeros({hidden}))),
      in_reset(Parameter::uniform_init(prefix + ".in_reset", {input, hidden}, input, rng)),
      rec_reset(Parameter::uniform_init(prefix + ".rec_reset", {hidden, hidden}, hidden, rng)),
      bias_reset(Parameter(prefix + ".bias_reset", Tensor::zeros({hidden}))),
      in_cand(Parameter::uniform_init(prefix + ".in_cand", {input, hidden}, input, rng)),
      rec_cand(Parameter::uniform_init(prefix + ".rec_cand", {hidden, hidden}, hidden, rng)),
      bias_cand(Parameter(prefix + ".bias_cand", Tensor::zeros({hidden}))) {}

std::vector<Parameter*> GruCell::parameters() {
  return {&in_update, &rec_update, &bias_update, &in_reset, &rec_reset,
          &bias_reset, &in_cand,   &rec_cand,    &bias_cand};
}

PredictorWeights::PredictorWeights(std::size_t hidden, Rng& rng)
    : ln_pre_gain(Parameter("predictor.ln_pre_gain", Tensor::full({hidden}, 1.0))),
      ln_pre_bias(Parameter("predictor.ln_pre_bias", Tensor::zeros({hidden}))),
      forward_cell("predictor.gru_fwd", hidden, hidden / 2, rng),
      backward_cell("predictor.gru_bwd", hidden, hidden / 2, rng),
      ln_post_gain(Parameter("predictor.ln_post_gain", Tensor::full({hidden}, 1.0))),
      ln_post_bias(Parameter("predictor.ln_post_bias", Tensor::zeros({hidden}))),
      pool_context(Parameter::uniform_init("predictor.pool_context", {hidden, 1}, hidden, rng)),
      pool_question_option(
          Parameter::uniform_init("predictor.pool_question_option", {hidden, 1}, hidden, rng)),
      mlp_hidden(Parameter::uniform_init("predictor.mlp_hidden", {3 * hidden, hidden}, 3 * hidden, rng)),
      mlp_hidden_bias(Parameter("predictor.mlp_hidden_bias", Tensor::zeros({hidden}))),
      mlp_out(Parameter::uniform_init("predictor.mlp_out", {hidden, 1}, hidden, rng)),
      mlp_out_bias(Parameter("predictor.mlp_out_bias", Tensor::zeros({1}))) {
  if (hidden < 2 || hidden % 2 != 0) {
    raise(ErrorKind::Config, "predictor: hidden size must be even and at least 2");
  }
}

std::vector<Parameter*> PredictorWeights::parameters() {
  std::vector<Parameter*> out = {&ln_pre_gain, &ln_pre_bias};
  for (Parameter* p : forward_cell.parameters()) out.push_back(p);
  for (Parameter* p : backward_cell.parameters()) out.push_back(p);
  for (Parameter* p :
       {&ln_post_gain, &ln_post_bias, &pool_context, &pool_question_option, &mlp_hidden,
        &mlp_hidden_bias, &mlp_out, &mlp_out_bias}) {
    out.push_back(p);
  }
  return out;
}

namespace {

// One GRU step: x [1 x H], h [1 x Hd] -> new h [1 x Hd].
Var gru_step(Tape& tape, GruCell& cell, const Var& x, const Var& h) {
  Var z = sigmoid(add_row_broadcast(
      add(matmul(x, tape.leaf(cell.in_update)), matmul(h, tape.leaf(cell.rec_update))),
      tape.leaf(cell.bias_update)));
  Var r = sigmoid(add_row_broadcast(
      add(matmul(x, tape.leaf(cell.in_reset)), matmul(h, tape.leaf(cell.rec_reset))),
      tape.leaf(cell.bias_reset)));
  Var candidate = tanh_act(add_row_broadcast(
      add(matmul(x, tape.leaf(cell.in_cand)), matmul(mul(r, h), tape.leaf(cell.rec_cand))),
      tape.leaf(cell.bias_cand)));
  // h' = (1 - z) * h + z * candidate
  return add(h, mul(z, sub(candidate, h)));
}

std::vector<Var> run_direction(Tape& tape, GruCell& cell, const Var& seq, bool reversed) {
  std::size_t len = seq.value().rows();
  std::size_t hidden = cell.rec_update.value.rows();
  Var h = tape.constant(Tensor::zeros({1, hidden}));
  std::vector<Var> outputs(len);
  for (std::size_t step = 0; step < len; ++step) {
    std::size_t t = reversed ? len - 1 - step : step;
    h = gru_step(tape, cell, row(seq, t), h);
    outputs[t] = h;
  }
  return outputs;
}

}  // namespace

Var encode_sequence(Tape& tape, const Var& t_prime, PredictorWeights& weights) {
  Var normed = layer_norm(t_prime, tape.leaf(weights.ln_pre_gain), tape.leaf(weights.ln_pre_bias));
  std::vector<Var> fwd = run_direction(tape, weights.forward_cell, normed, false);
  std::vector<Var> bwd = run_direction(tape, weights.backward_cell, normed, true);
  Var gru_out = hconcat(stack_rows(fwd), stack_rows(bwd));
  Var residual = add(gru_out, t_prime);
  return layer_norm(residual, tape.leaf(weights.ln_post_gain), tape.leaf(weights.ln_post_bias));
}

Var pool_segment(const Var& seq, const std::vector<std::size_t>& mask, const Var& projection) {
  if (mask.empty()) {
    raise(ErrorKind::Segment, "pool_segment: empty segment mask");
  }
  Var rows = gather_rows(seq, mask);
  Var scores = reshape(matmul(rows, projection), {mask.size()});
  Var pool_weights = softmax(scores);
  return matmul(reshape(pool_weights, {1, mask.size()}), rows);
}

Var prediction_head(Tape& tape, const Var& context_pool, const Var& question_option_pool,
                    const Var& bos_embedding, PredictorWeights& weights,
                    const Tensor* dropout_mask) {
  std::size_t hidden = weights.mlp_hidden_bias.value.numel();
  Var features = concat({reshape(context_pool, {hidden}),
                         reshape(question_option_pool, {hidden}),
                         reshape(bos_embedding, {hidden})});
  if (dropout_mask) {
    features = mul(features, tape.constant(*dropout_mask));
  }
  Var h = gelu(add_row_broadcast(matmul(reshape(features, {1, 3 * hidden}), tape.leaf(weights.mlp_hidden)),
                                 tape.leaf(weights.mlp_hidden_bias)));
  Var logit = add_row_broadcast(matmul(h, tape.leaf(weights.mlp_out)), tape.leaf(weights.mlp_out_bias));
  return reshape(logit, {1});
}

OptionScore OptionScore::from_logits(const std::array<double, 4>& logits) {
  OptionScore score;
  score.logits = logits;
  double mx = *std::max_element(logits.begin(), logits.end());
  double denom = 0.0;
  for (double v : logits) denom += std::exp(v - mx);
  for (std::size_t i = 0; i < 4; ++i) {
    score.probabilities[i] = std::exp(logits[i] - mx) / denom;
  }
  score.predicted = 0;
  for (int i = 1; i < 4; ++i) {
    if (logits[i] > logits[score.predicted]) score.predicted = i;
  }
  return score;
}

}  // namespace dagn
