#include "dagn/encoder.hpp"

#include <algorithm>
#include <fstream>
#include <set>

#include "dagn/error.hpp"

namespace dagn {

namespace {
const char* kReservedNames[Vocabulary::kReservedCount] = {"<s>", "</s>", "||", "<unk>", "<pad>"};
}

Vocabulary::Vocabulary() {
  for (std::size_t i = 0; i < kReservedCount; ++i) {
    id_to_token_.emplace_back(kReservedNames[i]);
    token_to_id_.emplace(kReservedNames[i], i);
  }
}

Vocabulary Vocabulary::build_from_texts(const std::vector<std::string>& texts) {
  std::set<std::string> words;
  for (const std::string& text : texts) {
    for (const Token& tok : tokenize(text)) {
      words.insert(tok.lower);
    }
  }
  Vocabulary vocab;
  for (const std::string& word : words) {
    if (vocab.token_to_id_.count(word)) continue;  // reserved symbol spelled out in text
    vocab.token_to_id_.emplace(word, vocab.id_to_token_.size());
    vocab.id_to_token_.push_back(word);
  }
  return vocab;
}

Vocabulary Vocabulary::build_from_samples(const std::vector<QASample>& samples) {
  std::vector<std::string> texts;
  texts.reserve(samples.size() * 6);
  for (const QASample& s : samples) {
    texts.push_back(s.context);
    texts.push_back(s.question);
    for (const std::string& opt : s.options) texts.push_back(opt);
  }
  return build_from_texts(texts);
}

std::size_t Vocabulary::lookup(const std::string& lower_token) const {
  auto it = token_to_id_.find(lower_token);
  return it == token_to_id_.end() ? kUnk : it->second;
}

void Vocabulary::save(const std::filesystem::path& path) const {
  std::ofstream out(path);
  if (!out) raise(ErrorKind::Io, "cannot write " + path.string());
  out << "#dagn-vocab reserved=<s>:0,</s>:1,||:2,<unk>:3,<pad>:4\n";
  std::vector<std::pair<std::string, std::size_t>> entries;
  for (std::size_t id = kReservedCount; id < id_to_token_.size(); ++id) {
    entries.emplace_back(id_to_token_[id], id);
  }
  std::sort(entries.begin(), entries.end());
  for (const auto& [token, id] : entries) {
    out << token << '\t' << id << '\n';
  }
}

Vocabulary Vocabulary::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) raise(ErrorKind::Io, "cannot open " + path.string());
  std::string header;
  std::getline(in, header);
  if (header.rfind("#dagn-vocab ", 0) != 0) {
    raise(ErrorKind::Ingestion, path.string() + ": missing vocabulary header");
  }
  Vocabulary vocab;
  std::string line;
  std::size_t line_no = 1;
  std::vector<std::pair<std::size_t, std::string>> entries;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    std::size_t tab = line.find('\t');
    if (tab == std::string::npos) {
      raise(ErrorKind::Ingestion, path.string() + ": malformed line " + std::to_string(line_no));
    }
    entries.emplace_back(std::stoull(line.substr(tab + 1)), line.substr(0, tab));
  }
  std::sort(entries.begin(), entries.end());
  for (const auto& [id, token] : entries) {
    if (id != vocab.id_to_token_.size()) {
      raise(ErrorKind::Ingestion, path.string() + ": non-contiguous id " + std::to_string(id));
    }
    if (vocab.token_to_id_.count(token)) {
      raise(ErrorKind::Ingestion, path.string() + ": duplicate token '" + token + "'");
    }
    vocab.token_to_id_.emplace(token, id);
    vocab.id_to_token_.push_back(token);
  }
  return vocab;
}

// --- input assembly ----------------------------------------------------------

namespace {

// Removes the first `drop` tokens from a segmentation: EDUs losing tokens are
// re-clipped, emptied EDUs and hits losing any token are removed, and hit
// neighbor annotations are recomputed against the surviving EDUs.
Segmentation clip_front(const Segmentation& seg, std::size_t drop, const std::string& source,
                        SourceTag tag) {
  if (drop == 0) return seg;
  Segmentation out;
  for (std::size_t i = drop; i < seg.tokens.size(); ++i) {
    Token tok = seg.tokens[i];
    tok.index = i - drop;
    out.tokens.push_back(std::move(tok));
  }
  for (const Edu& edu : seg.edus) {
    if (edu.last_token < drop) continue;
    Edu kept;
    kept.id = out.edus.size();
    kept.first_token = edu.first_token < drop ? 0 : edu.first_token - drop;
    kept.last_token = edu.last_token - drop;
    const Token& first = out.tokens[kept.first_token];
    const Token& last = out.tokens[kept.last_token];
    kept.text = source.substr(first.begin, last.end - first.begin);
    kept.source = tag;
    out.edus.push_back(std::move(kept));
  }
  for (const DelimiterHit& hit : seg.hits) {
    if (hit.first_token < drop) continue;  // fully or partially cut delimiters vanish
    DelimiterHit kept = hit;
    kept.first_token = hit.first_token - drop;
    kept.last_token = hit.last_token - drop;
    kept.before_edu.reset();
    kept.after_edu.reset();
    for (const Edu& edu : out.edus) {
      if (kept.first_token > 0 && edu.last_token == kept.first_token - 1) kept.before_edu = edu.id;
      if (edu.first_token == kept.last_token + 1) kept.after_edu = edu.id;
    }
    out.hits.push_back(std::move(kept));
  }
  return out;
}

void append_text_tokens(InputSequence& seq, const Segmentation& seg, const Vocabulary& vocab,
                        PositionTag body_tag) {
  std::vector<PositionTag> tags(seg.tokens.size(), PositionTag::Delimiter);
  for (const Edu& edu : seg.edus) {
    for (std::size_t t = edu.first_token; t <= edu.last_token; ++t) tags[t] = body_tag;
  }
  for (std::size_t t = 0; t < seg.tokens.size(); ++t) {
    seq.ids.push_back(vocab.lookup(seg.tokens[t].lower));
    seq.tags.push_back(tags[t]);
  }
}

}  // namespace

std::vector<std::size_t> InputSequence::context_mask() const {
  std::vector<std::size_t> mask;
  for (std::size_t p = context_begin; p < context_end; ++p) mask.push_back(p);
  return mask;
}

std::vector<std::size_t> InputSequence::question_option_mask() const {
  std::vector<std::size_t> mask;
  for (std::size_t p = question_begin; p < question_end; ++p) mask.push_back(p);
  for (std::size_t p = option_begin; p < option_end; ++p) mask.push_back(p);
  return mask;
}

EncodedInput build_input(const QASample& sample, std::size_t option_index,
                         const Segmentation& context, const Segmentation& option,
                         const Vocabulary& vocab, std::size_t max_len) {
  if (option_index > 3) {
    raise(ErrorKind::Argument, "build_input: option index " + std::to_string(option_index));
  }
  if (option.tokens.empty()) {
    raise(ErrorKind::SampleFormat, "sample " + sample.id + ": option " +
                                       std::to_string(option_index) + " has no tokens");
  }
  std::vector<Token> question_tokens = tokenize(sample.question);

  // <s> ctx </s> q || opt </s> -> 4 specials
  std::size_t fixed = 4 + question_tokens.size() + option.tokens.size();
  if (fixed > max_len) {
    raise(ErrorKind::SampleFormat, "sample " + sample.id +
                                       ": question and option alone exceed max_len " +
                                       std::to_string(max_len));
  }
  std::size_t keep_ctx = std::min(context.tokens.size(), max_len - fixed);
  std::size_t drop = context.tokens.size() - keep_ctx;

  EncodedInput out;
  out.context = clip_front(context, drop, sample.context, SourceTag::Context);
  out.option = option;

  InputSequence& seq = out.seq;
  seq.ids.push_back(Vocabulary::kBos);
  seq.tags.push_back(PositionTag::Special);

  seq.context_begin = seq.ids.size();
  append_text_tokens(seq, out.context, vocab, PositionTag::ContextTok);
  seq.context_end = seq.ids.size();

  seq.ids.push_back(Vocabulary::kEos);
  seq.tags.push_back(PositionTag::Special);

  seq.question_begin = seq.ids.size();
  for (const Token& tok : question_tokens) {
    seq.ids.push_back(vocab.lookup(tok.lower));
    seq.tags.push_back(PositionTag::Question);
  }
  seq.question_end = seq.ids.size();

  seq.ids.push_back(Vocabulary::kSep);
  seq.tags.push_back(PositionTag::Special);

  seq.option_begin = seq.ids.size();
  append_text_tokens(seq, out.option, vocab, PositionTag::Option);
  seq.option_end = seq.ids.size();

  seq.ids.push_back(Vocabulary::kEos);
  seq.tags.push_back(PositionTag::Special);

  for (const Edu& edu : out.context.edus) {
    std::vector<std::size_t> span;
    for (std::size_t t = edu.first_token; t <= edu.last_token; ++t) {
      span.push_back(seq.context_begin + t);
    }
    seq.edu_spans.push_back(std::move(span));
  }
  seq.context_edu_count = out.context.edus.size();
  for (const Edu& edu : out.option.edus) {
    std::vector<std::size_t> span;
    for (std::size_t t = edu.first_token; t <= edu.last_token; ++t) {
      span.push_back(seq.option_begin + t);
    }
    seq.edu_spans.push_back(std::move(span));
  }
  return out;
}

// --- toy encoder -------------------------------------------------------------

EncoderWeights::EncoderWeights(std::size_t vocab_size, std::size_t hidden, std::size_t max_len,
                               Rng& rng)
    : token_embed(Parameter::uniform_init("encoder.token_embed", {vocab_size, hidden}, hidden, rng)),
      pos_embed(Parameter::uniform_init("encoder.pos_embed", {max_len, hidden}, hidden, rng)),
      mix(Parameter::uniform_init("encoder.mix", {hidden, hidden}, hidden, rng)) {}

std::vector<Parameter*> EncoderWeights::parameters() {
  return {&token_embed, &pos_embed, &mix};
}

Var encode(Tape& tape, const InputSequence& seq, EncoderWeights& weights) {
  std::size_t vocab_rows = weights.token_embed.value.rows();
  for (std::size_t id : seq.ids) {
    if (id >= vocab_rows) {
      raise(ErrorKind::Vocabulary, "encode: token id " + std::to_string(id) +
                                       " outside vocabulary of size " + std::to_string(vocab_rows));
    }
  }
  if (seq.length() > weights.pos_embed.value.rows()) {
    raise(ErrorKind::Dimension, "encode: sequence length " + std::to_string(seq.length()) +
                                    " exceeds position table");
  }
  Var table = tape.leaf(weights.token_embed);
  Var positions = tape.leaf(weights.pos_embed);
  Var mix = tape.leaf(weights.mix);

  std::vector<std::size_t> pos_ids(seq.length());
  for (std::size_t i = 0; i < pos_ids.size(); ++i) pos_ids[i] = i;

  Var t = add(gather_rows(table, seq.ids), gather_rows(positions, pos_ids));
  return add(t, relu(matmul(t, mix)));
}

Var edu_embed(const Var& tokens, const std::vector<std::vector<std::size_t>>& edu_spans) {
  return span_sum(tokens, edu_spans);
}

}  // namespace dagn
