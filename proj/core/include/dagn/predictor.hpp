#pragma once

#include <array>
#include <vector>

#include "dagn/autodiff.hpp"

namespace dagn {

// One direction of the gated recurrent layer; hidden size H/2 so the
// concatenated bidirectional output is H again.
struct GruCell {
  Parameter in_update, rec_update, bias_update;   // z gate
  Parameter in_reset, rec_reset, bias_reset;      // r gate
  Parameter in_cand, rec_cand, bias_cand;         // candidate state

  GruCell(const std::string& prefix, std::size_t input, std::size_t hidden, Rng& rng);
  std::vector<Parameter*> parameters();
};

struct PredictorWeights {
  Parameter ln_pre_gain, ln_pre_bias;    // [H]
  GruCell forward_cell, backward_cell;   // H -> H/2 each
  Parameter ln_post_gain, ln_post_bias;  // [H]
  Parameter pool_context;                // [H x 1]
  Parameter pool_question_option;        // [H x 1]
  Parameter mlp_hidden;                  // [3H x H]
  Parameter mlp_hidden_bias;             // [H]
  Parameter mlp_out;                     // [H x 1]
  Parameter mlp_out_bias;                // [1]

  PredictorWeights(std::size_t hidden, Rng& rng);
  std::vector<Parameter*> parameters();
};

// LayerNorm -> bidirectional GRU -> residual add of the input -> LayerNorm.
Var encode_sequence(Tape& tape, const Var& t_prime, PredictorWeights& weights);

// Weighted summation over the masked positions; weights are the softmax of a
// linear transformation of the sequence rows. Returns [1 x H].
Var pool_segment(const Var& seq, const std::vector<std::size_t>& mask, const Var& projection);

// Concat(context pool, question-option pool, bos embedding) -> 3H -> H with
// GELU -> 1. Inputs are [1 x H] rows; returns a scalar [1].
Var prediction_head(Tape& tape, const Var& context_pool, const Var& question_option_pool,
                    const Var& bos_embedding, PredictorWeights& weights,
                    const Tensor* dropout_mask = nullptr);

// Final per-sample scores.
struct OptionScore {
  std::array<double, 4> logits{};
  std::array<double, 4> probabilities{};
  int predicted = 0;

  static OptionScore from_logits(const std::array<double, 4>& logits);
};

}  // namespace dagn
