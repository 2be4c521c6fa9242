#include "dagn/dataset.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

#include "dagn/error.hpp"
#include "dagn/graph.hpp"
#include "dagn/rng.hpp"
#include "dagn/segmenter.hpp"
#include "json.hpp"

namespace dagn {

namespace {

using nlohmann::json;

QASample sample_from_json(const json& j, const char* id_field, const char* options_field,
                          const std::string& where) {
  QASample s;
  if (!j.is_object()) raise(ErrorKind::Ingestion, where + ": expected an object");
  if (j.contains(id_field)) {
    s.id = j.at(id_field).is_string() ? j.at(id_field).get<std::string>()
                                      : j.at(id_field).dump();
  } else {
    s.id = where;
  }
  for (const char* field : {"context", "question"}) {
    if (!j.contains(field) || !j.at(field).is_string()) {
      raise(ErrorKind::Ingestion, "sample " + s.id + ": missing string field '" + field + "'");
    }
  }
  s.context = j.at("context").get<std::string>();
  s.question = j.at("question").get<std::string>();
  if (!j.contains(options_field) || !j.at(options_field).is_array()) {
    raise(ErrorKind::Ingestion, "sample " + s.id + ": missing option array '" + options_field + "'");
  }
  const json& opts = j.at(options_field);
  if (opts.size() != 4) {
    raise(ErrorKind::Ingestion, "sample " + s.id + ": expected 4 options, got " +
                                    std::to_string(opts.size()));
  }
  for (std::size_t i = 0; i < 4; ++i) {
    if (!opts[i].is_string()) {
      raise(ErrorKind::Ingestion, "sample " + s.id + ": option " + std::to_string(i) +
                                      " is not a string");
    }
    s.options[i] = opts[i].get<std::string>();
  }
  if (j.contains("label") && !j.at("label").is_null()) {
    if (!j.at("label").is_number_integer()) {
      raise(ErrorKind::Ingestion, "sample " + s.id + ": label must be an integer");
    }
    int label = j.at("label").get<int>();
    if (label < 0 || label > 3) {
      raise(ErrorKind::Ingestion, "sample " + s.id + ": label " + std::to_string(label) +
                                      " out of range");
    }
    s.label = label;
  }
  return s;
}

}  // namespace

std::vector<QASample> load_reclor(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) raise(ErrorKind::Io, "cannot open " + path.string());
  json root;
  try {
    in >> root;
  } catch (const json::exception& e) {
    raise(ErrorKind::Ingestion, path.string() + ": " + e.what());
  }
  if (!root.is_array()) raise(ErrorKind::Ingestion, path.string() + ": expected a JSON array");
  std::vector<QASample> samples;
  samples.reserve(root.size());
  for (std::size_t i = 0; i < root.size(); ++i) {
    samples.push_back(
        sample_from_json(root[i], "id_string", "answers", path.filename().string() + "#" + std::to_string(i)));
  }
  return samples;
}

std::vector<QASample> load_logiqa(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) raise(ErrorKind::Io, "cannot open " + path.string());
  std::vector<QASample> samples;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    json j;
    try {
      j = json::parse(line);
    } catch (const json::exception& e) {
      raise(ErrorKind::Ingestion,
            path.string() + ": malformed line " + std::to_string(line_no) + ": " + e.what());
    }
    samples.push_back(sample_from_json(j, "id", "options",
                                       path.filename().string() + ":" + std::to_string(line_no)));
  }
  return samples;
}

// --- synthetic data ----------------------------------------------------------

namespace {

const std::vector<std::string>& event_phrases() {
  static const std::vector<std::string> events = {
      "rain falls",   "wind blows",    "ice melts",    "fire spreads",
      "dogs bark",    "birds sing",    "crowds cheer", "engines stall",
  };
  return events;
}

// Causal connectives with the order their arguments take in text:
// cause-first ("X so Y" reads cause -> effect), effect-first ("Y because X").
const std::vector<std::string>& cause_first_connectives() {
  static const std::vector<std::string> conns = {"so", "therefore", "thus", "hence"};
  return conns;
}

const std::vector<std::string>& effect_first_connectives() {
  static const std::vector<std::string> conns = {"because", "since"};
  return conns;
}

const std::vector<std::string>& contrast_connectives() {
  static const std::vector<std::string> conns = {"but", "however", "yet"};
  return conns;
}

bool is_cause_first(const std::string& phrase) {
  const auto& cf = cause_first_connectives();
  return std::find(cf.begin(), cf.end(), phrase) != cf.end();
}

bool is_effect_first(const std::string& phrase) {
  const auto& ef = effect_first_connectives();
  return std::find(ef.begin(), ef.end(), phrase) != ef.end();
}

std::string make_option(const std::string& first, const std::string& conn,
                        const std::string& second) {
  return first + " " + conn + " " + second + ".";
}

std::string normalize_clause(const std::string& text) {
  std::string out;
  for (const Token& tok : tokenize(text)) {
    if (!out.empty()) out += ' ';
    out += tok.lower;
  }
  return out;
}

}  // namespace

std::vector<QASample> generate_synthetic(std::size_t n, std::uint64_t seed) {
  if (n == 0) raise(ErrorKind::Argument, "generate_synthetic: n must be positive");
  Rng rng = Rng(seed).fork(0x5e7);
  const auto& events = event_phrases();

  std::vector<QASample> samples;
  samples.reserve(n);
  std::array<int, 4> labels{};
  for (std::size_t i = 0; i < n; ++i) {
    if (i % 4 == 0) {
      labels = {0, 1, 2, 3};
      for (std::size_t k = 3; k > 0; --k) {
        std::swap(labels[k], labels[rng.next_below(k + 1)]);
      }
    }
    int label = labels[i % 4];

    std::size_t cause_idx = rng.next_below(events.size());
    std::size_t effect_idx = rng.next_below(events.size() - 1);
    if (effect_idx >= cause_idx) ++effect_idx;
    std::size_t wrong_idx = rng.next_below(events.size() - 2);
    for (std::size_t taken : {std::min(cause_idx, effect_idx), std::max(cause_idx, effect_idx)}) {
      if (wrong_idx >= taken) ++wrong_idx;
    }
    const std::string& cause = events[cause_idx];
    const std::string& effect = events[effect_idx];
    const std::string& wrong = events[wrong_idx];

    bool cause_first = rng.next_below(2) == 0;
    const auto& pool = cause_first ? cause_first_connectives() : effect_first_connectives();
    const std::string& conn = pool[rng.next_below(pool.size())];
    const std::string& contrast = contrast_connectives()[rng.next_below(contrast_connectives().size())];

    std::string correct = cause_first ? make_option(cause, conn, effect)
                                      : make_option(effect, conn, cause);
    std::string swapped = cause_first ? make_option(effect, conn, cause)
                                      : make_option(cause, conn, effect);
    std::string contrasted = cause_first ? make_option(cause, contrast, effect)
                                         : make_option(effect, contrast, cause);
    std::string wrong_cause = cause_first ? make_option(wrong, conn, effect)
                                          : make_option(effect, conn, wrong);

    std::array<std::string, 3> distractors = {swapped, contrasted, wrong_cause};
    for (std::size_t k = 2; k > 0; --k) {
      std::swap(distractors[k], distractors[rng.next_below(k + 1)]);
    }

    QASample s;
    s.id = "syn-" + std::to_string(i);
    s.context = effect + " because " + cause + ".";
    s.question = "what follows ?";
    std::size_t d = 0;
    for (int k = 0; k < 4; ++k) {
      s.options[k] = (k == label) ? correct : distractors[d++];
    }
    s.label = label;
    samples.push_back(std::move(s));
  }
  return samples;
}

int solve_synthetic(const QASample& sample) {
  const DelimiterLibrary& lib = load_delimiter_library();
  Segmentation ctx = segment(sample.context, lib, Granularity::Edu, SourceTag::Context);

  // The context states "<effect> because <cause>": read the pair off its
  // causal hit.
  std::string ctx_cause, ctx_effect;
  for (const DelimiterHit& hit : ctx.hits) {
    if (hit.kind != DelimiterKind::Explicit || !hit.before_edu || !hit.after_edu) continue;
    if (is_effect_first(hit.phrase)) {
      ctx_effect = normalize_clause(ctx.edus[*hit.before_edu].text);
      ctx_cause = normalize_clause(ctx.edus[*hit.after_edu].text);
      break;
    }
    if (is_cause_first(hit.phrase)) {
      ctx_cause = normalize_clause(ctx.edus[*hit.before_edu].text);
      ctx_effect = normalize_clause(ctx.edus[*hit.after_edu].text);
      break;
    }
  }
  if (ctx_cause.empty()) {
    raise(ErrorKind::Argument, "solve_synthetic: context of " + sample.id + " has no causal link");
  }

  for (int k = 0; k < 4; ++k) {
    Segmentation opt = segment(sample.options[k], lib, Granularity::Edu, SourceTag::Option);
    DiscourseGraph g = build_graph(ctx, opt, static_cast<std::size_t>(k));
    std::size_t offset = ctx.edus.size();
    for (const DelimiterHit& hit : opt.hits) {
      if (hit.kind != DelimiterKind::Explicit || !hit.before_edu || !hit.after_edu) continue;
      // Only follow hits the graph actually realized as explicit edges.
      std::size_t a = offset + *hit.before_edu;
      std::size_t b = offset + *hit.after_edu;
      if (!g.has_edge(a, EdgeType::Explicit, b) || !g.has_edge(b, EdgeType::Explicit, a)) continue;
      std::string before = normalize_clause(opt.edus[*hit.before_edu].text);
      std::string after = normalize_clause(opt.edus[*hit.after_edu].text);
      if (is_cause_first(hit.phrase) && before == ctx_cause && after == ctx_effect) return k;
      if (is_effect_first(hit.phrase) && before == ctx_effect && after == ctx_cause) return k;
    }
  }
  raise(ErrorKind::Argument, "solve_synthetic: no option of " + sample.id + " matches the context");
}

}  // namespace dagn
