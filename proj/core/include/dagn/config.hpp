#pragma once

#include <cstdint>
#include <filesystem>
#include <string>

#include "dagn/graph.hpp"
#include "dagn/segmenter.hpp"

namespace dagn {

enum class DatasetKind { Reclor, Logiqa, Synthetic };

const char* to_string(DatasetKind kind);
DatasetKind dataset_kind_from_string(std::string_view s);

// Full experiment configuration. Understood as a flat key=value file; every
// field can also be overridden from the command line.
struct ExperimentConfig {
  DatasetKind dataset = DatasetKind::Synthetic;
  std::string train_path;
  std::string dev_path;
  std::size_t synthetic_train = 256;
  std::size_t synthetic_dev = 64;

  Granularity granularity = Granularity::Edu;
  GraphVariant variant = GraphVariant::Standard;
  bool use_graph = true;
  std::size_t iterations = 0;  // 0 = auto: 3 for logiqa, 2 otherwise
  std::size_t hidden = 32;
  std::size_t max_len = 256;

  double lr = 3e-3;  // desk-scale stand-in for the reference fine-tuning rate
  double weight_decay = 0.01;
  double dropout = 0.1;
  std::size_t batch_size = 16;
  std::size_t epochs = 10;
  std::uint64_t seed = 0;

  std::size_t effective_iterations() const {
    if (iterations != 0) return iterations;
    return dataset == DatasetKind::Logiqa ? 3 : 2;
  }

  void set(const std::string& key, const std::string& value);
  void validate() const;

  // Deterministic key=value rendering of every field.
  std::string canonical() const;

  // Hash over the fields that fix parameter shapes and the forward graph;
  // recorded in checkpoints so eval can reject an incompatible config.
  std::uint64_t model_hash() const;

  static ExperimentConfig from_file(const std::filesystem::path& path);
};

// Resolves a dataset path against the DAGN_DATA_ROOT environment variable
// when the path is relative and the variable is set.
std::filesystem::path resolve_data_path(const std::string& path);

std::uint64_t fnv1a(std::string_view text);

}  // namespace dagn
