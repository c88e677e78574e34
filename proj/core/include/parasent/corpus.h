#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "parasent/augment.h"
#include "parasent/eval.h"
#include "parasent/supervised.h"

namespace parasent {

using RawSentence = std::vector<std::string>;

struct RawPair {
  RawSentence first;
  RawSentence second;
  double score = 0.0;  // unused for unscored corpora
};

// `sentence1 TAB sentence2`, pre-tokenized with single spaces.
std::vector<RawPair> read_pair_corpus(std::istream& in);
// `sentence1 TAB sentence2 TAB gold`.
std::vector<RawPair> read_scored_pairs(std::istream& in);

std::vector<SentencePair> encode_pairs(const std::vector<RawPair>& raw,
                                       SequenceTags tags,
                                       const Vocabulary& vocab);

// Gold scores are kept on their [0, 5] scale.
EvalDataset encode_eval_dataset(std::string name,
                                const std::vector<RawPair>& raw,
                                SequenceTags tags, const Vocabulary& vocab);

// Gold scores in [0, 5] are mapped onto [1, K].
std::vector<ScoredPair> encode_scored_pairs(const std::vector<RawPair>& raw,
                                            SequenceTags tags,
                                            const Vocabulary& vocab,
                                            std::size_t classes);

}  // namespace parasent
