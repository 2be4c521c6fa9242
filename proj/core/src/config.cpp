#include "dagn/config.hpp"

#include <cstdlib>
#include <fstream>
#include <sstream>

#include "dagn/error.hpp"

namespace dagn {

const char* to_string(DatasetKind kind) {
  switch (kind) {
    case DatasetKind::Reclor: return "reclor";
    case DatasetKind::Logiqa: return "logiqa";
    case DatasetKind::Synthetic: return "synthetic";
  }
  return "synthetic";
}

DatasetKind dataset_kind_from_string(std::string_view s) {
  if (s == "reclor") return DatasetKind::Reclor;
  if (s == "logiqa") return DatasetKind::Logiqa;
  if (s == "synthetic") return DatasetKind::Synthetic;
  raise(ErrorKind::Config, "unknown dataset kind '" + std::string(s) + "'");
}

std::uint64_t fnv1a(std::string_view text) {
  std::uint64_t hash = 0xcbf29ce484222325ULL;
  for (unsigned char c : text) {
    hash ^= c;
    hash *= 0x100000001b3ULL;
  }
  return hash;
}

namespace {

std::string trim(const std::string& s) {
  std::size_t begin = s.find_first_not_of(" \t\r\n");
  if (begin == std::string::npos) return "";
  std::size_t end = s.find_last_not_of(" \t\r\n");
  return s.substr(begin, end - begin + 1);
}

bool parse_bool(const std::string& key, const std::string& value) {
  if (value == "true" || value == "1" || value == "yes") return true;
  if (value == "false" || value == "0" || value == "no") return false;
  raise(ErrorKind::Config, key + ": expected a boolean, got '" + value + "'");
}

std::size_t parse_size(const std::string& key, const std::string& value) {
  try {
    long long v = std::stoll(value);
    if (v < 0) throw std::out_of_range("negative");
    return static_cast<std::size_t>(v);
  } catch (const std::exception&) {
    raise(ErrorKind::Config, key + ": expected a non-negative integer, got '" + value + "'");
  }
}

double parse_double(const std::string& key, const std::string& value) {
  try {
    return std::stod(value);
  } catch (const std::exception&) {
    raise(ErrorKind::Config, key + ": expected a number, got '" + value + "'");
  }
}

}  // namespace

void ExperimentConfig::set(const std::string& key, const std::string& value) {
  if (key == "dataset") dataset = dataset_kind_from_string(value);
  else if (key == "train_path") train_path = value;
  else if (key == "dev_path") dev_path = value;
  else if (key == "synthetic_train") synthetic_train = parse_size(key, value);
  else if (key == "synthetic_dev") synthetic_dev = parse_size(key, value);
  else if (key == "granularity") granularity = granularity_from_string(value);
  else if (key == "variant") variant = variant_from_string(value);
  else if (key == "use_graph") use_graph = parse_bool(key, value);
  else if (key == "iterations") iterations = parse_size(key, value);
  else if (key == "hidden") hidden = parse_size(key, value);
  else if (key == "max_len") max_len = parse_size(key, value);
  else if (key == "lr") lr = parse_double(key, value);
  else if (key == "weight_decay") weight_decay = parse_double(key, value);
  else if (key == "dropout") dropout = parse_double(key, value);
  else if (key == "batch_size") batch_size = parse_size(key, value);
  else if (key == "epochs") epochs = parse_size(key, value);
  else if (key == "seed") seed = static_cast<std::uint64_t>(std::stoull(value));
  else raise(ErrorKind::Config, "unknown config key '" + key + "'");
}

void ExperimentConfig::validate() const {
  if (hidden < 2 || hidden % 2 != 0) {
    raise(ErrorKind::Config, "hidden must be even and at least 2, got " + std::to_string(hidden));
  }
  if (max_len < 8) raise(ErrorKind::Config, "max_len must be at least 8");
  if (batch_size == 0) raise(ErrorKind::Config, "batch_size must be positive");
  if (epochs == 0) raise(ErrorKind::Config, "epochs must be positive");
  if (dropout < 0.0 || dropout >= 1.0) raise(ErrorKind::Config, "dropout must lie in [0, 1)");
  if (lr < 0.0) raise(ErrorKind::Config, "lr must be non-negative");
  if (weight_decay < 0.0) raise(ErrorKind::Config, "weight_decay must be non-negative");
  if (dataset == DatasetKind::Synthetic) {
    if (synthetic_train == 0 || synthetic_dev == 0) {
      raise(ErrorKind::Config, "synthetic dataset sizes must be positive");
    }
  }
}

std::string ExperimentConfig::canonical() const {
  std::ostringstream out;
  out << "dataset=" << to_string(dataset) << '\n'
      << "train_path=" << train_path << '\n'
      << "dev_path=" << dev_path << '\n'
      << "synthetic_train=" << synthetic_train << '\n'
      << "synthetic_dev=" << synthetic_dev << '\n'
      << "granularity=" << to_string(granularity) << '\n'
      << "variant=" << to_string(variant) << '\n'
      << "use_graph=" << (use_graph ? "true" : "false") << '\n'
      << "iterations=" << iterations << '\n'
      << "hidden=" << hidden << '\n'
      << "max_len=" << max_len << '\n'
      << "lr=" << lr << '\n'
      << "weight_decay=" << weight_decay << '\n'
      << "dropout=" << dropout << '\n'
      << "batch_size=" << batch_size << '\n'
      << "epochs=" << epochs << '\n'
      << "seed=" << seed << '\n';
  return out.str();
}

std::uint64_t ExperimentConfig::model_hash() const {
  std::ostringstream out;
  out << "granularity=" << to_string(granularity) << ";variant=" << to_string(variant)
      << ";use_graph=" << use_graph << ";iterations=" << effective_iterations()
      << ";hidden=" << hidden << ";max_len=" << max_len;
  return fnv1a(out.str());
}

ExperimentConfig ExperimentConfig::from_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) raise(ErrorKind::Io, "cannot open config " + path.string());
  ExperimentConfig config;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    std::string stripped = trim(line);
    if (stripped.empty() || stripped[0] == '#') continue;
    std::size_t eq = stripped.find('=');
    if (eq == std::string::npos) {
      raise(ErrorKind::Config,
            path.string() + ":" + std::to_string(line_no) + ": expected key=value");
    }
    config.set(trim(stripped.substr(0, eq)), trim(stripped.substr(eq + 1)));
  }
  return config;
}

std::filesystem::path resolve_data_path(const std::string& path) {
  std::filesystem::path p(path);
  if (p.is_absolute()) return p;
  if (const char* root = std::getenv("DAGN_DATA_ROOT")) {
    return std::filesystem::path(root) / p;
  }
  return p;
}

}  // namespace dagn
