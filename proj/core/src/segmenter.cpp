#include "dagn/segmenter.hpp"

#include <algorithm>
#include <cctype>

#include "dagn/error.hpp"

namespace dagn {

const char* to_string(DelimiterKind kind) {
  return kind == DelimiterKind::Explicit ? "explicit" : "punct";
}

const char* to_string(Granularity g) {
  switch (g) {
    case Granularity::Edu: return "edu";
    case Granularity::Clause: return "clause";
    case Granularity::Sentence: return "sentence";
  }
  return "edu";
}

Granularity granularity_from_string(std::string_view s) {
  if (s == "edu") return Granularity::Edu;
  if (s == "clause") return Granularity::Clause;
  if (s == "sentence") return Granularity::Sentence;
  raise(ErrorKind::Argument, "unknown granularity '" + std::string(s) + "'");
}

namespace {

bool is_punct_delimiter(char c) {
  return c == '.' || c == ',' || c == ';' || c == ':';
}

std::string ascii_lower(std::string_view s) {
  std::string out(s);
  for (char& c : out) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return out;
}

std::vector<std::string> split_words(const std::string& phrase) {
  std::vector<std::string> words;
  std::size_t pos = 0;
  while (pos < phrase.size()) {
    std::size_t space = phrase.find(' ', pos);
    if (space == std::string::npos) {
      words.push_back(phrase.substr(pos));
      break;
    }
    words.push_back(phrase.substr(pos, space - pos));
    pos = space + 1;
  }
  return words;
}

}  // namespace

DelimiterLibrary active_delimiters(const DelimiterLibrary& lib, Granularity g) {
  switch (g) {
    case Granularity::Edu:
      return lib;
    case Granularity::Clause:
      return DelimiterLibrary{{}, lib.punctuation};
    case Granularity::Sentence:
      return DelimiterLibrary{{}, {"."}};
  }
  return lib;
}

std::vector<Token> tokenize(std::string_view text) {
  std::vector<Token> tokens;
  std::size_t i = 0;
  auto emit = [&tokens, text](std::size_t begin, std::size_t end) {
    std::string raw(text.substr(begin, end - begin));
    Token tok;
    tok.lower = ascii_lower(raw);
    tok.text = std::move(raw);
    tok.begin = begin;
    tok.end = end;
    tok.index = tokens.size();
    tokens.push_back(std::move(tok));
  };
  while (i < text.size()) {
    unsigned char c = static_cast<unsigned char>(text[i]);
    if (std::isspace(c)) {
      ++i;
      continue;
    }
    if (is_punct_delimiter(text[i])) {
      emit(i, i + 1);
      ++i;
      continue;
    }
    std::size_t start = i;
    while (i < text.size() && !std::isspace(static_cast<unsigned char>(text[i])) &&
           !is_punct_delimiter(text[i])) {
      ++i;
    }
    emit(start, i);
  }
  return tokens;
}

std::vector<DelimiterHit> match_delimiters(const std::vector<Token>& tokens,
                                           const DelimiterLibrary& lib) {
  // Pre-split connective phrases once; lib order is already longest-first.
  std::vector<std::vector<std::string>> phrases;
  phrases.reserve(lib.connectives.size());
  for (const std::string& phrase : lib.connectives) {
    phrases.push_back(split_words(phrase));
  }

  std::vector<DelimiterHit> hits;
  std::size_t pos = 0;
  while (pos < tokens.size()) {
    bool matched = false;
    for (std::size_t p = 0; p < phrases.size() && !matched; ++p) {
      const std::vector<std::string>& words = phrases[p];
      if (pos + words.size() > tokens.size()) continue;
      bool ok = true;
      for (std::size_t w = 0; w < words.size(); ++w) {
        if (tokens[pos + w].lower != words[w]) {
          ok = false;
          break;
        }
      }
      if (ok) {
        hits.push_back(DelimiterHit{lib.connectives[p], DelimiterKind::Explicit, pos,
                                    pos + words.size() - 1, std::nullopt, std::nullopt});
        pos += words.size();
        matched = true;
      }
    }
    if (matched) continue;
    if (std::find(lib.punctuation.begin(), lib.punctuation.end(), tokens[pos].text) !=
        lib.punctuation.end()) {
      hits.push_back(
          DelimiterHit{tokens[pos].text, DelimiterKind::Punct, pos, pos, std::nullopt, std::nullopt});
      ++pos;
      continue;
    }
    ++pos;
  }
  return hits;
}

Segmentation segment(std::string_view text, const DelimiterLibrary& lib, Granularity granularity,
                     SourceTag source) {
  Segmentation result;
  result.tokens = tokenize(text);
  DelimiterLibrary active = active_delimiters(lib, granularity);
  result.hits = match_delimiters(result.tokens, active);

  auto add_edu = [&result, text, source](std::size_t first, std::size_t last) {
    Edu edu;
    edu.id = result.edus.size();
    edu.first_token = first;
    edu.last_token = last;
    edu.text = std::string(
        text.substr(result.tokens[first].begin, result.tokens[last].end - result.tokens[first].begin));
    edu.source = source;
    result.edus.push_back(std::move(edu));
  };

  std::size_t run_start = 0;
  for (const DelimiterHit& hit : result.hits) {
    if (hit.first_token > run_start) {
      add_edu(run_start, hit.first_token - 1);
    }
    run_start = hit.last_token + 1;
  }
  if (run_start < result.tokens.size()) {
    add_edu(run_start, result.tokens.size() - 1);
  }

  // Annotate hits with the EDUs directly abutting them.
  for (DelimiterHit& hit : result.hits) {
    for (const Edu& edu : result.edus) {
      if (hit.first_token > 0 && edu.last_token == hit.first_token - 1) {
        hit.before_edu = edu.id;
      }
      if (edu.first_token == hit.last_token + 1) {
        hit.after_edu = edu.id;
      }
    }
  }
  return result;
}

}  // namespace dagn
