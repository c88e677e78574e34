#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "parasent/checkpoint.h"

namespace parasent {

struct TaggedToken {
  std::string form;
  std::string pos;
  std::size_t head = 0;  // 0 = root
  std::string deprel;
};

struct TaggedSentence {
  std::vector<TaggedToken> tokens;
};

struct TaggedCorpus {
  std::vector<TaggedSentence> sentences;
  std::size_t skipped = 0;  // sentences longer than the token cap
};

inline constexpr std::size_t kDefaultTokenCap = 15;

// Blank-line separated records of `ID TAB FORM TAB POS TAB HEAD TAB DEPREL`.
TaggedCorpus load_tagged_corpus(std::istream& in,
                                std::size_t token_cap = kDefaultTokenCap);

// L1 norm of the GRAN-1 gate σ(W_x x_t + W_h h_t + b) at every position.
std::vector<double> gate_l1_per_token(const Encoder& encoder,
                                      const ParameterSet<float>& params,
                                      const TokenSequence& seq);

enum class GroupBy { Pos, Dep, PosDep };

GroupBy parse_group_by(std::string_view name);

struct NormEntry {
  std::string key;
  double mean = 0.0;
  std::size_t count = 0;
  double total = 0.0;
};

// Sorted by descending mean, ties by ascending key.
struct NormTable {
  std::vector<NormEntry> entries;

  std::vector<NormEntry> top(std::size_t k) const;
  std::vector<NormEntry> bottom(std::size_t k) const;
};

// Encodes each sentence exactly as the model was trained (SOS/EOS included
// when enabled) and aggregates the per-token gate norms of the annotated
// positions by the requested key.
NormTable aggregate_norms(const std::vector<TaggedSentence>& sentences,
                          const Model& model, GroupBy group_by);

void write_norm_table(std::ostream& out, const NormTable& table);

}  // namespace parasent
