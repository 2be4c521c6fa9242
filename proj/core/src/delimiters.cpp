#include <algorithm>
#include <array>

#include "dagn/segmenter.hpp"

namespace dagn {

namespace {

// PDTB 2.0 explicit connectives, in source order. "and" appears twice in the
// source table; the loaded library is the 100-phrase distinct set.
constexpr std::array<const char*, 101> kExplicitConnectives = {
    "once", "although", "though", "but", "because",
    "nevertheless", "before", "for example", "until", "if",
    "previously", "when", "and", "so", "then",
    "while", "as long as", "however", "also", "after",
    "separately", "still", "so that", "or", "moreover",
    "in addition", "instead", "on the other hand", "as", "for instance",
    "nonetheless", "unless", "meanwhile", "yet", "since",
    "rather", "in fact", "indeed", "later", "ultimately",
    "as a result", "either or", "therefore", "in turn", "thus",
    "in particular", "further", "afterward", "next", "similarly",
    "besides", "if and when", "nor", "alternatively", "whereas",
    "overall", "by comparison", "till", "in contrast", "finally",
    "otherwise", "as if", "thereby", "now that", "before and after",
    "additionally", "meantime", "by contrast", "if then", "likewise",
    "in the end", "regardless", "thereafter", "earlier", "in other words",
    "as soon as", "except", "in short", "neither nor", "furthermore",
    "lest", "as though", "specifically", "conversely", "consequently",
    "as well", "much as", "plus", "and", "hence",
    "by then", "accordingly", "on the contrary", "simultaneously", "for",
    "in sum", "when and if", "insofar as", "else", "as an alternative",
    "on the one hand on the other hand"};

constexpr std::array<const char*, 4> kPunctuation = {".", ",", ";", ":"};

std::size_t word_count(const std::string& phrase) {
  return static_cast<std::size_t>(std::count(phrase.begin(), phrase.end(), ' ')) + 1;
}

DelimiterLibrary build_library() {
  DelimiterLibrary lib;
  lib.connectives.reserve(kExplicitConnectives.size());
  for (const char* phrase : kExplicitConnectives) {
    if (std::find(lib.connectives.begin(), lib.connectives.end(), phrase) ==
        lib.connectives.end()) {
      lib.connectives.emplace_back(phrase);
    }
  }
  // longest-first so greedy matching prefers multiword phrases; ties broken
  // lexicographically for a deterministic order
  std::stable_sort(lib.connectives.begin(), lib.connectives.end(),
                   [](const std::string& a, const std::string& b) {
                     std::size_t wa = word_count(a), wb = word_count(b);
                     if (wa != wb) return wa > wb;
                     return a < b;
                   });
  lib.punctuation.assign(kPunctuation.begin(), kPunctuation.end());
  return lib;
}

}  // namespace

const DelimiterLibrary& load_delimiter_library() {
  static const DelimiterLibrary lib = build_library();
  return lib;
}

std::uint64_t library_checksum(const DelimiterLibrary& lib) {
  std::vector<std::string> sorted = lib.connectives;
  std::sort(sorted.begin(), sorted.end());
  std::uint64_t hash = 0xcbf29ce484222325ULL;
  auto feed = [&hash](std::string_view s) {
    for (unsigned char c : s) {
      hash ^= c;
      hash *= 0x100000001b3ULL;
    }
    hash ^= '\n';
    hash *= 0x100000001b3ULL;
  };
  for (const std::string& phrase : sorted) feed(phrase);
  feed("--");
  for (const std::string& mark : lib.punctuation) feed(mark);
  return hash;
}

}  // namespace dagn
