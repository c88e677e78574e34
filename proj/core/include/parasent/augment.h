#pragma once

#include <vector>

#include "parasent/numeric.h"
#include "parasent/rng.h"
#include "parasent/vocab.h"

namespace parasent {

struct SentencePair {
  TokenSequence first;
  TokenSequence second;
};

// Inverted-dropout mask: 0 with probability `rate`, else 1/(1-rate).
// rate must lie in [0, 1).
template <class T>
Vec<T> dropout_mask(std::size_t n, double rate, Rng& rng);

// Applies an inverted-dropout mask when training; identity otherwise.
template <class T>
Vec<T> embedding_dropout(const Vec<T>& x, double rate, Rng& rng,
                         bool training = true);

// Removes each token independently with probability `rate`. If every token
// would be removed the original sequence is returned unchanged.
TokenSequence word_dropout(const TokenSequence& seq, double rate, Rng& rng);

// With probability `rate` per pair, permutes both sentences of the pair
// independently. Must run before negative selection.
void scramble(std::vector<SentencePair>& batch, double rate, Rng& rng);

}  // namespace parasent
