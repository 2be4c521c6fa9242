#pragma once

#include <memory>
#include <string>
#include <vector>

#include "dagn/model.hpp"

namespace dagn {

struct EvalRecord {
  std::string id;
  int predicted = 0;
  std::optional<int> gold;
  std::array<double, 4> probabilities{};
};

struct EvalReport {
  bool has_accuracy = false;
  double accuracy = 0.0;
  std::size_t correct = 0;
  std::size_t labeled = 0;
  std::vector<EvalRecord> records;
  std::uint64_t config_hash = 0;
  std::uint64_t seed = 0;

  std::string to_json(bool include_records = true) const;
};

// Adam with decoupled weight decay. lr = 0 leaves parameters untouched.
class AdamW {
 public:
  AdamW(std::vector<Parameter*> params, double lr, double weight_decay, double beta1 = 0.9,
        double beta2 = 0.999, double eps = 1e-8);

  void step();
  void zero_grad();

 private:
  std::vector<Parameter*> params_;
  std::vector<Tensor> first_moment_;
  std::vector<Tensor> second_moment_;
  double lr_, weight_decay_, beta1_, beta2_, eps_;
  std::size_t t_ = 0;
};

struct TrainOutcome {
  EvalReport best_dev;
  std::vector<double> step_losses;          // mean batch loss per optimizer step
  std::vector<double> epoch_dev_accuracy;   // dev accuracy after each epoch
  std::size_t best_epoch = 0;               // 1-based epoch of the retained weights
};

struct TrainedModel {
  std::unique_ptr<DagnModel> model;  // best-dev weights restored
  TrainOutcome outcome;
};

// Loads (or generates) the configured dataset and its dev split.
std::pair<std::vector<QASample>, std::vector<QASample>> load_experiment_data(
    const ExperimentConfig& config);

// End-to-end training: builds the vocabulary from the training split,
// initializes from the config seed, runs Adam with cross-entropy over
// shuffled batches, evaluates on dev after every epoch, and retains the
// best-dev weights.
TrainedModel train(const ExperimentConfig& config);

EvalReport evaluate(DagnModel& model, const std::vector<QASample>& samples);

struct AblationRow {
  std::string name;
  ExperimentConfig config;
  EvalReport dev;
};

// Trains and evaluates the six ablation pipelines under the base config's
// seed and budget: standard, clause nodes, sentence nodes, single edge type,
// fully connected edges, and no graph module.
std::vector<AblationRow> run_ablation(const ExperimentConfig& base);

std::string ablation_to_json(const std::vector<AblationRow>& rows);

// One predicted option index per line, the blind-test prediction file shape.
void write_predictions(const std::filesystem::path& path, const EvalReport& report);

}  // namespace dagn
