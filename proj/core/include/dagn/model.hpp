#pragma once

#include <optional>
#include <vector>

#include "dagn/config.hpp"
#include "dagn/dataset.hpp"
#include "dagn/encoder.hpp"
#include "dagn/predictor.hpp"
#include "dagn/reasoner.hpp"

namespace dagn {

// Per-option inspection data surfaced by the predict CLI.
struct OptionTrace {
  std::vector<std::string> context_edu_texts;
  std::vector<std::string> option_edu_texts;
  std::size_t node_count = 0;
  std::vector<GraphEdge> edges;
  std::vector<Tensor> node_states;  // one [N x H] per reasoning round, when requested
};

// The full pipeline: segmentation -> per-option graph -> toy encoder -> graph
// reasoning -> token enhancement -> sequence encoding -> pooled prediction
// head. All weights live here; samples are scored one option at a time with
// shared weights.
class DagnModel {
 private:
  ExperimentConfig config_;
  Vocabulary vocab_;
  Rng init_rng_;  // consumed by the weight members below, in declaration order

 public:
  EncoderWeights encoder;
  ReasonerWeights reasoner;
  PredictorWeights predictor;

  DagnModel(const ExperimentConfig& config, Vocabulary vocab);

  const ExperimentConfig& config() const { return config_; }
  const Vocabulary& vocab() const { return vocab_; }

  std::vector<Parameter*> parameters();
  void zero_grad();

  // Scalar [1] logit for one option. A non-null dropout_rng enables training
  // mode: dropout after the encoder and before the prediction head.
  Var score_option(Tape& tape, const QASample& sample, std::size_t option_index,
                   Rng* dropout_rng = nullptr, OptionTrace* trace = nullptr,
                   bool dump_states = false);

  // The four option logits as one rank-1 [4] var.
  Var option_logits(Tape& tape, const QASample& sample, Rng* dropout_rng = nullptr,
                    std::vector<OptionTrace>* traces = nullptr, bool dump_states = false);

  // Cross-entropy of the sample's gold label against the four logits.
  Var sample_loss(Tape& tape, const QASample& sample, Rng* dropout_rng = nullptr);

  // Evaluation-mode prediction (no dropout).
  OptionScore predict(const QASample& sample, std::vector<OptionTrace>* traces = nullptr,
                      bool dump_states = false);
};

// Inverted-dropout mask: entries are 0 with probability rate, else 1/(1-rate).
Tensor dropout_mask(const Shape& shape, double rate, Rng& rng);

}  // namespace dagn
