#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <unordered_map>
#include <vector>

#include "dagn/autodiff.hpp"
#include "dagn/dataset.hpp"
#include "dagn/segmenter.hpp"

namespace dagn {

// Word-level vocabulary with five fixed reserved ids. Corpus tokens are
// stored lowercased; unknown lookups map to kUnk.
class Vocabulary {
 public:
  static constexpr std::size_t kBos = 0;  // <s>
  static constexpr std::size_t kEos = 1;  // </s>
  static constexpr std::size_t kSep = 2;  // ||
  static constexpr std::size_t kUnk = 3;  // <unk>
  static constexpr std::size_t kPad = 4;  // <pad>
  static constexpr std::size_t kReservedCount = 5;

  Vocabulary();

  static Vocabulary build_from_texts(const std::vector<std::string>& texts);
  static Vocabulary build_from_samples(const std::vector<QASample>& samples);

  std::size_t lookup(const std::string& lower_token) const;
  std::size_t size() const { return id_to_token_.size(); }
  const std::string& token(std::size_t id) const { return id_to_token_[id]; }

  void save(const std::filesystem::path& path) const;
  static Vocabulary load(const std::filesystem::path& path);

 private:
  std::unordered_map<std::string, std::size_t> token_to_id_;
  std::vector<std::string> id_to_token_;
};

enum class PositionTag { Special, ContextTok, Question, Option, Delimiter };

// The assembled model input "<s> context </s> question || option </s>" with
// per-position tags, EDU position sets, and the index ranges of the three
// text regions (specials excluded).
struct InputSequence {
  std::vector<std::size_t> ids;
  std::vector<PositionTag> tags;
  std::vector<std::vector<std::size_t>> edu_spans;  // context EDUs then option EDUs
  std::size_t context_edu_count = 0;
  std::size_t context_begin = 0, context_end = 0;  // [begin, end)
  std::size_t question_begin = 0, question_end = 0;
  std::size_t option_begin = 0, option_end = 0;

  std::size_t length() const { return ids.size(); }
  std::vector<std::size_t> context_mask() const;
  std::vector<std::size_t> question_option_mask() const;
};

struct EncodedInput {
  InputSequence seq;
  Segmentation context;  // post-truncation survivors, EDU ids renumbered
  Segmentation option;
};

// Concatenates the sample's parts around the reserved tokens. When the
// sequence would exceed max_len, tokens are dropped from the context's left
// end; EDU spans losing tokens are re-clipped and EDUs that become empty are
// dropped (their hits lose the corresponding neighbor annotation).
EncodedInput build_input(const QASample& sample, std::size_t option_index,
                         const Segmentation& context, const Segmentation& option,
                         const Vocabulary& vocab, std::size_t max_len);

// Trainable stand-in for a pre-trained encoder: token embedding + learned
// position embedding + one position-wise ReLU mixing layer with residual.
struct EncoderWeights {
  Parameter token_embed;  // [V x H]
  Parameter pos_embed;    // [max_len x H]
  Parameter mix;          // [H x H]

  EncoderWeights(std::size_t vocab_size, std::size_t hidden, std::size_t max_len, Rng& rng);
  std::vector<Parameter*> parameters();
};

// [L x H] contextual token embeddings.
Var encode(Tape& tape, const InputSequence& seq, EncoderWeights& weights);

// Row n is the unweighted sum of the token rows in span n.
Var edu_embed(const Var& tokens, const std::vector<std::vector<std::size_t>>& edu_spans);

}  // namespace dagn
