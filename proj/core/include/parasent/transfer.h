#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "parasent/augment.h"
#include "parasent/encoders.h"
#include "parasent/optimizer.h"
#include "parasent/regularize.h"

namespace parasent {

// Negative example chosen for each side of a pair. Candidates are numbered
// 2 * pair_index + side (side 0 = first sentence, 1 = second), so "lowest
// batch index" is the lowest candidate id.
struct Negatives {
  std::size_t t1 = 0;
  std::size_t t2 = 0;

  static std::size_t pair_of(std::size_t candidate) { return candidate / 2; }
  static std::size_t side_of(std::size_t candidate) { return candidate % 2; }
};

// For every pair, t1 maximises cos(g(s1), g(t)) and t2 maximises
// cos(g(s2), g(t)) over both sentences of every other pair in the batch.
template <class T>
std::vector<Negatives> select_negatives(std::span<const Vec<T>> first,
                                        std::span<const Vec<T>> second);

// Sum of the two hinge terms for one pair given its three cosines.
double pair_hinge(double cos_pair, double cos_first_negative,
                  double cos_second_negative, double margin);

// Mean hinge objective over the batch plus the regularisation penalty,
// evaluated with plain forward passes (no dropout).
template <class T>
double margin_loss(const Encoder& encoder, const ParameterSet<T>& params,
                   std::span<const SentencePair> batch,
                   std::span<const Negatives> negatives, double margin,
                   const Penalty& penalty = {},
                   const Anchors<T>& anchors = {});

// Tape form of the hinge part. `kinks` receives every hinge argument.
template <class T>
struct MarginGraph {
  typename Tape<T>::NodeId loss;
  std::vector<T> kinks;
};

template <class T>
MarginGraph<T> add_margin_terms(
    Tape<T>& tape, std::span<const typename Tape<T>::NodeId> first,
    std::span<const typename Tape<T>::NodeId> second,
    std::span<const Negatives> negatives, double margin);

struct TransferConfig {
  double margin = 0.4;
  Penalty penalty;
  double dropout = 0.0;
  double word_dropout = 0.0;
  double scramble = 0.0;
  int epochs = 1;
  std::size_t batch_size = 100;
  AdamConfig adam;
  std::uint64_t seed = 1;
};

struct TransferResult {
  ParameterSet<float> params;
  // Mean objective (hinge + penalty) over the batches of each epoch.
  std::vector<double> epoch_loss;
};

using EpochCallback = std::function<void(int epoch, double mean_loss)>;

// Margin-based training with in-batch negatives. Per batch: scramble, word
// dropout, encode (with embedding dropout), select negatives, hinge loss,
// backward, Adam. W_w is anchored to `initial_embeddings`.
TransferResult train_transfer(std::span<const SentencePair> corpus,
                              const TransferConfig& config,
                              const Encoder& encoder,
                              ParameterSet<float> params,
                              const Matrix<float>& initial_embeddings,
                              const EpochCallback& on_epoch = {});

}  // namespace parasent
