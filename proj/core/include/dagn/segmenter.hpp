#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace dagn {

// A whitespace/punctuation token with byte offsets into the source text.
// `lower` is the ASCII-lowercased shadow used for delimiter matching; `text`
// preserves the original casing.
struct Token {
  std::string text;
  std::string lower;
  std::size_t begin = 0;  // byte offset, inclusive
  std::size_t end = 0;    // byte offset, exclusive
  std::size_t index = 0;  // position in the token sequence
};

enum class DelimiterKind { Explicit, Punct };

const char* to_string(DelimiterKind kind);

// One matched occurrence of a delimiter: a connective phrase (possibly
// multiword) or a single punctuation mark. Token span is inclusive.
// before_edu/after_edu are filled by segment() when an EDU directly abuts
// the hit on that side.
struct DelimiterHit {
  std::string phrase;  // lowercase form as stored in the library
  DelimiterKind kind = DelimiterKind::Explicit;
  std::size_t first_token = 0;
  std::size_t last_token = 0;
  std::optional<std::size_t> before_edu;
  std::optional<std::size_t> after_edu;
};

enum class SourceTag { Context, Option };

// Elementary discourse unit: a maximal run of non-delimiter tokens.
struct Edu {
  std::size_t id = 0;
  std::size_t first_token = 0;  // inclusive
  std::size_t last_token = 0;   // inclusive
  std::string text;
  SourceTag source = SourceTag::Context;
};

// The fixed discourse delimiter library: explicit connective phrases plus
// the four punctuation marks '.', ',', ';', ':'. Connectives are stored
// longest-first (token count descending) so greedy matching prefers
// multiword phrases.
struct DelimiterLibrary {
  std::vector<std::string> connectives;
  std::vector<std::string> punctuation;
};

// Returns the built-in library. 100 distinct connective phrases; the
// punctuation set has 4 marks.
const DelimiterLibrary& load_delimiter_library();

// FNV-1a over a canonical serialization (connectives sorted lexicographically,
// then punctuation); pins the library contents in tests.
std::uint64_t library_checksum(const DelimiterLibrary& lib);

enum class Granularity { Edu, Clause, Sentence };

const char* to_string(Granularity g);
Granularity granularity_from_string(std::string_view s);

// The delimiter subset active at a granularity:
//   Edu      -> full library
//   Clause   -> punctuation only
//   Sentence -> '.' only
DelimiterLibrary active_delimiters(const DelimiterLibrary& lib, Granularity g);

// Whitespace split, then '.', ',', ';', ':' forced into standalone tokens.
// Empty text gives an empty list.
std::vector<Token> tokenize(std::string_view text);

// Greedy left-to-right scan. At each position connective phrases are tried
// longest-first (case-insensitive whole-token match), then punctuation.
// Matched positions are consumed, so hits never overlap.
std::vector<DelimiterHit> match_delimiters(const std::vector<Token>& tokens,
                                           const DelimiterLibrary& lib);

struct Segmentation {
  std::vector<Edu> edus;
  std::vector<DelimiterHit> hits;
  std::vector<Token> tokens;
};

// Splits text into EDUs at the hits of the active delimiter subset. EDUs are
// the maximal non-empty token runs between consecutive hits; empty runs are
// dropped. Each returned hit carries the ids of the EDUs immediately before
// and after it when both exist. A text with no delimiters yields one EDU
// spanning all tokens.
Segmentation segment(std::string_view text, const DelimiterLibrary& lib, Granularity granularity,
                     SourceTag source = SourceTag::Context);

}  // namespace dagn
