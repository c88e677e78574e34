#include "parasent/augment.h"

namespace parasent {

namespace {
void check_rate(double rate, bool allow_one) {
  if (!(rate >= 0.0) || rate > 1.0 || (!allow_one && rate == 1.0)) {
    throw ConfigError("rate " + std::to_string(rate) +
                      (allow_one ? " outside [0, 1]" : " outside [0, 1)"));
  }
}
}  // namespace

template <class T>
Vec<T> dropout_mask(std::size_t n, double rate, Rng& rng) {
  check_rate(rate, false);
  const T keep_scale = T(1) / static_cast<T>(1.0 - rate);
  Vec<T> mask(n);
  for (auto& m : mask) m = rng.uniform() < rate ? T(0) : keep_scale;
  return mask;
}

template <class T>
Vec<T> embedding_dropout(const Vec<T>& x, double rate, Rng& rng,
                         bool training) {
  check_rate(rate, false);
  if (!training || rate == 0.0) return x;
  auto mask = dropout_mask<T>(x.size(), rate, rng);
  for (std::size_t i = 0; i < x.size(); ++i) mask[i] *= x[i];
  return mask;
}

TokenSequence word_dropout(const TokenSequence& seq, double rate, Rng& rng) {
  check_rate(rate, true);
  if (rate == 0.0) return seq;
  std::vector<std::size_t> kept;
  kept.reserve(seq.size());
  for (std::size_t i = 0; i < seq.size(); ++i) {
    if (!(rng.uniform() < rate)) kept.push_back(i);
  }
  if (kept.empty()) return seq;
  return seq.subset(kept);
}

void scramble(std::vector<SentencePair>& batch, double rate, Rng& rng) {
  check_rate(rate, true);
  if (rate == 0.0) return;
  for (auto& pair : batch) {
    if (!(rng.uniform() < rate)) continue;
    for (TokenSequence* s : {&pair.first, &pair.second}) {
      *s = s->subset(seeded_permutation(s->size(), rng));
    }
  }
}

template Vec<float> dropout_mask<float>(std::size_t, double, Rng&);
template Vec<double> dropout_mask<double>(std::size_t, double, Rng&);
template Vec<long double> dropout_mask<long double>(std::size_t, double, Rng&);
template Vec<float> embedding_dropout<float>(const Vec<float>&, double, Rng&,
                                             bool);
template Vec<double> embedding_dropout<double>(const Vec<double>&, double,
                                               Rng&, bool);

}  // namespace parasent
