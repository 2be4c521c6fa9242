#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace dagn {

// One multiple-choice sample: context passage, question, exactly four answer
// options, and an optional gold label (absent for blind test sets).
struct QASample {
  std::string id;
  std::string context;
  std::string question;
  std::array<std::string, 4> options;
  std::optional<int> label;
};

// JSON array of objects with fields context, question, answers (4 strings),
// label, id_string. A missing label is accepted (blind test split).
std::vector<QASample> load_reclor(const std::filesystem::path& path);

// JSON Lines, one QASample object per line with fields id, context, question,
// options (4 strings), label. Conversion from the upstream raw text format is
// handled by tools/convert_logiqa.py, not here.
std::vector<QASample> load_logiqa(const std::filesystem::path& path);

// Template-generated causal-chain samples. The context asserts an
// effect-because-cause pair; the correct option restates the causal link
// through a connective EDU pair, one distractor swaps the two EDUs (same
// token multiset), one uses a contrast connective, one names a wrong cause.
// Labels are balanced across positions in every block of four samples.
std::vector<QASample> generate_synthetic(std::size_t n, std::uint64_t seed);

// Rule-based reference solver for synthetic samples: segments context and
// options, builds the per-option graphs, and follows causal-connective edges
// to find the option whose cause/effect pair matches the context. Returns
// the chosen option index. By construction it solves every generated sample.
int solve_synthetic(const QASample& sample);

}  // namespace dagn
