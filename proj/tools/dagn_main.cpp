#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "json.hpp"

#include "dagn/checkpoint.hpp"
#include "dagn/error.hpp"
#include "dagn/model.hpp"
#include "dagn/trainer.hpp"

using namespace dagn;
using nlohmann::json;

namespace {

std::string read_all(std::istream& in) {
  return std::string(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
}

std::string read_input(const std::string& path) {
  if (path.empty() || path == "-") return read_all(std::cin);
  std::ifstream in(path);
  if (!in) raise(ErrorKind::Io, "cannot open " + path);
  return read_all(in);
}

void write_output(const std::string& path, const std::string& content) {
  if (path.empty() || path == "-") {
    std::cout << content;
    if (!content.empty() && content.back() != '\n') std::cout << '\n';
    return;
  }
  std::ofstream out(path);
  if (!out) raise(ErrorKind::Io, "cannot write " + path);
  out << content;
}

QASample sample_from_json_text(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    raise(ErrorKind::SampleFormat, std::string("sample JSON: ") + e.what());
  }
  QASample s;
  s.id = j.value("id", "cli-sample");
  if (!j.contains("context") || !j.contains("question") || !j.contains("options")) {
    raise(ErrorKind::SampleFormat, "sample JSON needs context, question and options fields");
  }
  s.context = j.at("context").get<std::string>();
  s.question = j.at("question").get<std::string>();
  const json& opts = j.at("options");
  if (!opts.is_array() || opts.size() != 4) {
    raise(ErrorKind::SampleFormat, "sample JSON needs exactly 4 options");
  }
  for (std::size_t i = 0; i < 4; ++i) s.options[i] = opts[i].get<std::string>();
  if (j.contains("label") && !j.at("label").is_null()) s.label = j.at("label").get<int>();
  return s;
}

json sample_to_json(const QASample& s) {
  json j;
  j["id"] = s.id;
  j["context"] = s.context;
  j["question"] = s.question;
  j["options"] = s.options;
  if (s.label) j["label"] = *s.label;
  return j;
}

ExperimentConfig build_config(const std::string& config_path,
                              const std::vector<std::string>& overrides) {
  ExperimentConfig config;
  if (!config_path.empty()) config = ExperimentConfig::from_file(config_path);
  for (const std::string& kv : overrides) {
    std::size_t eq = kv.find('=');
    if (eq == std::string::npos) {
      raise(ErrorKind::Config, "override '" + kv + "' is not key=value");
    }
    config.set(kv.substr(0, eq), kv.substr(eq + 1));
  }
  config.validate();
  return config;
}

std::vector<QASample> load_by_kind(DatasetKind kind, const std::string& path) {
  std::filesystem::path resolved = resolve_data_path(path);
  return kind == DatasetKind::Logiqa ? load_logiqa(resolved) : load_reclor(resolved);
}

json trace_to_json(const OptionTrace& trace, bool with_states) {
  json t;
  t["context_edus"] = trace.context_edu_texts;
  t["option_edus"] = trace.option_edu_texts;
  t["node_count"] = trace.node_count;
  t["edges"] = json::array();
  for (const GraphEdge& e : trace.edges) {
    t["edges"].push_back({{"src", e.src}, {"type", to_string(e.type)}, {"dst", e.dst}});
  }
  if (with_states) {
    t["node_states"] = json::array();
    for (const Tensor& states : trace.node_states) {
      json round = json::array();
      for (std::size_t i = 0; i < states.rows(); ++i) {
        json row = json::array();
        for (std::size_t c = 0; c < states.cols(); ++c) row.push_back(states.at(i, c));
        round.push_back(std::move(row));
      }
      t["node_states"].push_back(std::move(round));
    }
  }
  return t;
}

int run_segment(const std::string& input, const std::string& granularity) {
  std::string text = read_input(input);
  Segmentation seg =
      segment(text, load_delimiter_library(), granularity_from_string(granularity));
  for (const Edu& edu : seg.edus) {
    json line;
    line["id"] = edu.id;
    line["text"] = edu.text;
    line["token_span"] = {edu.first_token, edu.last_token};
    std::cout << line.dump() << '\n';
  }
  json hits = json::array();
  for (const DelimiterHit& hit : seg.hits) {
    json h;
    h["phrase"] = hit.phrase;
    h["kind"] = to_string(hit.kind);
    h["token_span"] = {hit.first_token, hit.last_token};
    if (hit.before_edu) h["before_edu"] = *hit.before_edu;
    if (hit.after_edu) h["after_edu"] = *hit.after_edu;
    hits.push_back(std::move(h));
  }
  std::cout << json{{"delimiters", std::move(hits)}}.dump() << '\n';
  return 0;
}

int run_graph(const std::string& context, const std::string& option,
              const std::string& granularity, const std::string& variant,
              std::size_t option_index, bool dot) {
  const DelimiterLibrary& lib = load_delimiter_library();
  Granularity g = granularity_from_string(granularity);
  Segmentation ctx = segment(context, lib, g, SourceTag::Context);
  Segmentation opt = segment(option, lib, g, SourceTag::Option);
  DiscourseGraph graph =
      apply_variant(build_graph(ctx, opt, option_index), variant_from_string(variant));
  std::cout << (dot ? graph_to_dot(graph) : graph_to_json(graph));
  if (!dot) std::cout << '\n';
  return 0;
}

int run_predict(const std::string& input, const std::string& checkpoint,
                const std::string& vocab_path, const std::string& config_path,
                const std::vector<std::string>& overrides, bool dump_states) {
  ExperimentConfig config = build_config(config_path, overrides);
  QASample sample = sample_from_json_text(read_input(input));

  Vocabulary vocab = vocab_path.empty() ? Vocabulary::build_from_samples({sample})
                                        : Vocabulary::load(vocab_path);
  DagnModel model(config, std::move(vocab));
  if (!checkpoint.empty()) {
    CheckpointHeader header = load_checkpoint(checkpoint, model.parameters());
    if (header.config_hash != config.model_hash()) {
      raise(ErrorKind::Config, "checkpoint was trained under a different model configuration");
    }
  }

  std::vector<OptionTrace> traces;
  OptionScore score = model.predict(sample, &traces, dump_states);

  json out;
  out["id"] = sample.id;
  out["logits"] = score.logits;
  out["probabilities"] = score.probabilities;
  out["predicted"] = score.predicted;
  if (sample.label) out["gold"] = *sample.label;
  out["options"] = json::array();
  for (const OptionTrace& trace : traces) {
    out["options"].push_back(trace_to_json(trace, dump_states));
  }
  std::cout << out.dump(2) << '\n';
  return 0;
}

int run_train(const std::string& config_path, const std::vector<std::string>& overrides,
              const std::string& out_path, std::string vocab_out, const std::string& report_path) {
  ExperimentConfig config = build_config(config_path, overrides);
  TrainedModel trained = train(config);

  if (vocab_out.empty()) vocab_out = out_path + ".vocab";
  save_checkpoint(out_path, CheckpointHeader{config.seed, config.model_hash()},
                  trained.model->parameters());
  trained.model->vocab().save(vocab_out);

  json report;
  report["checkpoint"] = out_path;
  report["vocab"] = vocab_out;
  report["best_epoch"] = trained.outcome.best_epoch;
  report["epoch_dev_accuracy"] = trained.outcome.epoch_dev_accuracy;
  report["final_step_loss"] =
      trained.outcome.step_losses.empty() ? 0.0 : trained.outcome.step_losses.back();
  report["dev"] = json::parse(trained.outcome.best_dev.to_json(false));
  write_output(report_path, report.dump(2));
  return 0;
}

int run_eval(const std::string& checkpoint, const std::string& vocab_path,
             const std::string& config_path, const std::vector<std::string>& overrides,
             const std::string& data_path, const std::string& format,
             const std::string& predictions_path, const std::string& report_path) {
  ExperimentConfig config = build_config(config_path, overrides);
  DatasetKind kind = format.empty() ? config.dataset : dataset_kind_from_string(format);
  if (kind == DatasetKind::Synthetic) {
    raise(ErrorKind::Config, "eval needs a file-backed dataset; use --format reclor|logiqa");
  }
  std::vector<QASample> samples = load_by_kind(kind, data_path);

  DagnModel model(config, Vocabulary::load(vocab_path));
  CheckpointHeader header = load_checkpoint(checkpoint, model.parameters());
  if (header.config_hash != config.model_hash()) {
    raise(ErrorKind::Config, "checkpoint was trained under a different model configuration");
  }

  EvalReport report = evaluate(model, samples);
  if (!predictions_path.empty()) write_predictions(predictions_path, report);
  write_output(report_path, report.to_json());
  return 0;
}

int run_ablate(const std::string& config_path, const std::vector<std::string>& overrides,
               const std::string& report_path) {
  ExperimentConfig config = build_config(config_path, overrides);
  std::vector<AblationRow> rows = run_ablation(config);
  write_output(report_path, ablation_to_json(rows));
  return 0;
}

int run_gen_synthetic(std::size_t n, std::uint64_t seed, const std::string& out_path) {
  std::ostringstream lines;
  for (const QASample& s : generate_synthetic(n, seed)) {
    lines << sample_to_json(s).dump() << '\n';
  }
  write_output(out_path, lines.str());
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"discourse-aware graph network for multiple-choice logical reasoning"};
  app.require_subcommand(1);

  std::string input, granularity = "edu", variant = "standard";
  std::string context_text, option_text;
  std::size_t option_index = 0;
  bool dot = false, dump_states = false;
  std::string checkpoint, vocab_path, config_path, out_path, vocab_out, report_path;
  std::string data_path, format, predictions_path;
  std::vector<std::string> overrides;
  std::size_t gen_n = 16;
  std::uint64_t gen_seed = 0;

  CLI::App* seg = app.add_subcommand("segment", "split text into discourse units");
  seg->add_option("input", input, "UTF-8 text file ('-' or omitted reads stdin)");
  seg->add_option("--granularity", granularity, "edu|clause|sentence")->capture_default_str();

  CLI::App* gr = app.add_subcommand("graph", "build a per-option discourse graph");
  gr->add_option("--context", context_text, "context text")->required();
  gr->add_option("--option", option_text, "option text")->required();
  gr->add_option("--granularity", granularity, "edu|clause|sentence")->capture_default_str();
  gr->add_option("--variant", variant, "standard|single_edge_type|fully_connected")
      ->capture_default_str();
  gr->add_option("--option-index", option_index, "option slot the graph belongs to");
  gr->add_flag("--dot", dot, "emit DOT instead of JSON");

  CLI::App* pred = app.add_subcommand("predict", "score one sample (JSON on stdin or file)");
  pred->add_option("input", input, "sample JSON file ('-' or omitted reads stdin)");
  pred->add_option("--checkpoint", checkpoint, "trained checkpoint (fresh weights if omitted)");
  pred->add_option("--vocab", vocab_path, "vocabulary file saved by train");
  pred->add_option("--config", config_path, "key=value config file");
  pred->add_option("--set", overrides, "config override key=value")->take_all();
  pred->add_flag("--dump-node-states", dump_states, "include per-round node states");

  CLI::App* tr = app.add_subcommand("train", "train on the configured dataset");
  tr->add_option("--config", config_path, "key=value config file");
  tr->add_option("--set", overrides, "config override key=value")->take_all();
  tr->add_option("--out", out_path, "checkpoint output path")->required();
  tr->add_option("--vocab-out", vocab_out, "vocabulary output path (default <out>.vocab)");
  tr->add_option("--report", report_path, "training report path ('-' = stdout)");

  CLI::App* ev = app.add_subcommand("eval", "evaluate a checkpoint on a dataset file");
  ev->add_option("--checkpoint", checkpoint, "trained checkpoint")->required();
  ev->add_option("--vocab", vocab_path, "vocabulary file")->required();
  ev->add_option("--config", config_path, "key=value config file");
  ev->add_option("--set", overrides, "config override key=value")->take_all();
  ev->add_option("--data", data_path, "dataset file")->required();
  ev->add_option("--format", format, "reclor|logiqa (default: config dataset)");
  ev->add_option("--predictions", predictions_path, "write one predicted index per line");
  ev->add_option("--report", report_path, "report path ('-' = stdout)");

  CLI::App* ab = app.add_subcommand("ablate", "train and evaluate the six ablation rows");
  ab->add_option("--config", config_path, "key=value config file");
  ab->add_option("--set", overrides, "config override key=value")->take_all();
  ab->add_option("--report", report_path, "report path ('-' = stdout)");

  CLI::App* gen = app.add_subcommand("gen-synthetic", "emit synthetic samples as JSON lines");
  gen->add_option("--n", gen_n, "sample count")->capture_default_str();
  gen->add_option("--seed", gen_seed, "generator seed")->capture_default_str();
  gen->add_option("--out", out_path, "output path ('-' = stdout)");

  try {
    app.parse(argc, argv);
    if (seg->parsed()) return run_segment(input, granularity);
    if (gr->parsed()) {
      return run_graph(context_text, option_text, granularity, variant, option_index, dot);
    }
    if (pred->parsed()) {
      return run_predict(input, checkpoint, vocab_path, config_path, overrides, dump_states);
    }
    if (tr->parsed()) return run_train(config_path, overrides, out_path, vocab_out, report_path);
    if (ev->parsed()) {
      return run_eval(checkpoint, vocab_path, config_path, overrides, data_path, format,
                      predictions_path, report_path);
    }
    if (ab->parsed()) return run_ablate(config_path, overrides, report_path);
    if (gen->parsed()) return run_gen_synthetic(gen_n, gen_seed, out_path);
    return 0;
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return app.exit(e);  // --help
    std::cerr << json{{"error", {{"kind", "usage"}, {"message", e.what()}}}}.dump() << '\n';
    return 2;
  } catch (const Error& e) {
    std::cerr << json{{"error", {{"kind", to_string(e.kind())}, {"message", e.what()}}}}.dump()
              << '\n';
    return 1;
  } catch (const std::exception& e) {
    std::cerr << json{{"error", {{"kind", "internal"}, {"message", e.what()}}}}.dump() << '\n';
    return 1;
  }
}
