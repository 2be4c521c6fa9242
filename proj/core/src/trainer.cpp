#include "dagn/trainer.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>

#include "dagn/error.hpp"
#include "json.hpp"

namespace dagn {

std::string EvalReport::to_json(bool include_records) const {
  nlohmann::json j;
  j["labeled"] = labeled;
  j["correct"] = correct;
  if (has_accuracy) {
    j["accuracy"] = accuracy;
  } else {
    j["accuracy"] = nullptr;
  }
  j["config_hash"] = config_hash;
  j["seed"] = seed;
  if (include_records) {
    j["records"] = nlohmann::json::array();
    for (const EvalRecord& r : records) {
      nlohmann::json rec;
      rec["id"] = r.id;
      rec["predicted"] = r.predicted;
      if (r.gold) rec["gold"] = *r.gold;
      rec["probabilities"] = r.probabilities;
      j["records"].push_back(std::move(rec));
    }
  }
  return j.dump(2);
}

AdamW::AdamW(std::vector<Parameter*> params, double lr, double weight_decay, double beta1,
             double beta2, double eps)
    : params_(std::move(params)), lr_(lr), weight_decay_(weight_decay), beta1_(beta1),
      beta2_(beta2), eps_(eps) {
  first_moment_.reserve(params_.size());
  second_moment_.reserve(params_.size());
  for (Parameter* p : params_) {
    first_moment_.push_back(Tensor::zeros(p->value.shape()));
    second_moment_.push_back(Tensor::zeros(p->value.shape()));
  }
}

void AdamW::step() {
  ++t_;
  double bc1 = 1.0 - std::pow(beta1_, static_cast<double>(t_));
  double bc2 = 1.0 - std::pow(beta2_, static_cast<double>(t_));
  for (std::size_t k = 0; k < params_.size(); ++k) {
    Parameter& p = *params_[k];
    Tensor& m = first_moment_[k];
    Tensor& v = second_moment_[k];
    for (std::size_t i = 0; i < p.value.numel(); ++i) {
      double g = p.grad.at(i);
      m.at(i) = beta1_ * m.at(i) + (1.0 - beta1_) * g;
      v.at(i) = beta2_ * v.at(i) + (1.0 - beta2_) * g * g;
      double update = (m.at(i) / bc1) / (std::sqrt(v.at(i) / bc2) + eps_);
      p.value.at(i) -= lr_ * (update + weight_decay_ * p.value.at(i));
    }
  }
}

void AdamW::zero_grad() {
  for (Parameter* p : params_) p->zero_grad();
}

std::pair<std::vector<QASample>, std::vector<QASample>> load_experiment_data(
    const ExperimentConfig& config) {
  switch (config.dataset) {
    case DatasetKind::Synthetic: {
      std::vector<QASample> all =
          generate_synthetic(config.synthetic_train + config.synthetic_dev, config.seed);
      std::vector<QASample> train(all.begin(),
                                  all.begin() + static_cast<std::ptrdiff_t>(config.synthetic_train));
      std::vector<QASample> dev(all.begin() + static_cast<std::ptrdiff_t>(config.synthetic_train),
                                all.end());
      return {std::move(train), std::move(dev)};
    }
    case DatasetKind::Reclor: {
      if (config.train_path.empty() || config.dev_path.empty()) {
        raise(ErrorKind::Config, "reclor dataset requires train_path and dev_path");
      }
      return {load_reclor(resolve_data_path(config.train_path)),
              load_reclor(resolve_data_path(config.dev_path))};
    }
    case DatasetKind::Logiqa: {
      if (config.train_path.empty() || config.dev_path.empty()) {
        raise(ErrorKind::Config, "logiqa dataset requires train_path and dev_path");
      }
      return {load_logiqa(resolve_data_path(config.train_path)),
              load_logiqa(resolve_data_path(config.dev_path))};
    }
  }
  raise(ErrorKind::Config, "unknown dataset kind");
}

EvalReport evaluate(DagnModel& model, const std::vector<QASample>& samples) {
  EvalReport report;
  report.config_hash = model.config().model_hash();
  report.seed = model.config().seed;
  for (const QASample& sample : samples) {
    OptionScore score = model.predict(sample);
    EvalRecord record;
    record.id = sample.id;
    record.predicted = score.predicted;
    record.gold = sample.label;
    record.probabilities = score.probabilities;
    if (sample.label) {
      ++report.labeled;
      if (*sample.label == score.predicted) ++report.correct;
    }
    report.records.push_back(std::move(record));
  }
  if (report.labeled > 0) {
    report.has_accuracy = true;
    report.accuracy = static_cast<double>(report.correct) / static_cast<double>(report.labeled);
  }
  return report;
}

TrainedModel train(const ExperimentConfig& config) {
  config.validate();
  auto [train_samples, dev_samples] = load_experiment_data(config);
  if (train_samples.empty()) raise(ErrorKind::Training, "training split is empty");
  for (const QASample& s : train_samples) {
    if (!s.label) raise(ErrorKind::Training, "training sample " + s.id + " has no gold label");
  }

  TrainedModel result;
  result.model = std::make_unique<DagnModel>(config, Vocabulary::build_from_samples(train_samples));
  DagnModel& model = *result.model;

  AdamW optimizer(model.parameters(), config.lr, config.weight_decay);
  Rng shuffle_rng = Rng(config.seed).fork(2);
  Rng dropout_rng = Rng(config.seed).fork(3);

  std::vector<std::size_t> order(train_samples.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;

  std::vector<Tensor> best_values;
  double best_accuracy = -1.0;

  for (std::size_t epoch = 1; epoch <= config.epochs; ++epoch) {
    for (std::size_t i = order.size(); i > 1; --i) {
      std::swap(order[i - 1], order[shuffle_rng.next_below(i)]);
    }
    for (std::size_t start = 0; start < order.size(); start += config.batch_size) {
      std::size_t end = std::min(order.size(), start + config.batch_size);
      Tape tape;
      std::vector<Var> losses;
      losses.reserve(end - start);
      for (std::size_t i = start; i < end; ++i) {
        losses.push_back(model.sample_loss(tape, train_samples[order[i]], &dropout_rng));
      }
      Var batch_loss = scale(sum(concat(losses)), 1.0 / static_cast<double>(end - start));
      result.outcome.step_losses.push_back(batch_loss.value().at(0));
      model.zero_grad();
      tape.backward(batch_loss);
      optimizer.step();
    }

    EvalReport dev_report = evaluate(model, dev_samples);
    double acc = dev_report.has_accuracy ? dev_report.accuracy : 0.0;
    result.outcome.epoch_dev_accuracy.push_back(acc);
    if (acc > best_accuracy) {
      best_accuracy = acc;
      result.outcome.best_epoch = epoch;
      result.outcome.best_dev = std::move(dev_report);
      best_values.clear();
      for (Parameter* p : model.parameters()) best_values.push_back(p->value);
    }
  }

  std::vector<Parameter*> params = model.parameters();
  for (std::size_t i = 0; i < params.size(); ++i) {
    params[i]->value = best_values[i];
    params[i]->zero_grad();
  }
  return result;
}

std::vector<AblationRow> run_ablation(const ExperimentConfig& base) {
  struct RowSpec {
    const char* name;
    Granularity granularity;
    GraphVariant variant;
    bool use_graph;
  };
  static const RowSpec kRows[] = {
      {"standard", Granularity::Edu, GraphVariant::Standard, true},
      {"clause_nodes", Granularity::Clause, GraphVariant::Standard, true},
      {"sentence_nodes", Granularity::Sentence, GraphVariant::Standard, true},
      {"single_edge_type", Granularity::Edu, GraphVariant::SingleEdgeType, true},
      {"fully_connected", Granularity::Edu, GraphVariant::FullyConnected, true},
      {"no_graph", Granularity::Edu, GraphVariant::Standard, false},
  };

  std::vector<AblationRow> rows;
  for (const RowSpec& spec : kRows) {
    ExperimentConfig config = base;
    config.granularity = spec.granularity;
    config.variant = spec.variant;
    config.use_graph = spec.use_graph;
    TrainedModel trained = train(config);
    rows.push_back(AblationRow{spec.name, config, std::move(trained.outcome.best_dev)});
  }
  return rows;
}

std::string ablation_to_json(const std::vector<AblationRow>& rows) {
  nlohmann::json j = nlohmann::json::array();
  for (const AblationRow& row : rows) {
    nlohmann::json r;
    r["name"] = row.name;
    r["granularity"] = to_string(row.config.granularity);
    r["variant"] = to_string(row.config.variant);
    r["use_graph"] = row.config.use_graph;
    r["accuracy"] = row.dev.has_accuracy ? nlohmann::json(row.dev.accuracy) : nlohmann::json(nullptr);
    r["correct"] = row.dev.correct;
    r["labeled"] = row.dev.labeled;
    j.push_back(std::move(r));
  }
  return j.dump(2);
}

void write_predictions(const std::filesystem::path& path, const EvalReport& report) {
  std::ofstream out(path);
  if (!out) raise(ErrorKind::Io, "cannot write predictions " + path.string());
  for (const EvalRecord& r : report.records) {
    out << r.predicted << '\n';
  }
}

}  // namespace dagn
