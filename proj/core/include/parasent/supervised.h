#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "parasent/augment.h"
#include "parasent/encoders.h"
#include "parasent/optimizer.h"
#include "parasent/regularize.h"

namespace parasent {

struct HeadConfig {
  std::size_t hidden = 50;
  std::size_t classes = 5;  // K
};

struct HeadSlots {
  std::size_t W_mul, W_abs, b_h, W_p, b_p;
  std::size_t classes;
};

// Appends head.W_mul, head.W_abs (hidden x input), head.b_h, head.W_p
// (K x hidden) and head.b_p.
template <class T>
void add_head_parameters(ParameterSet<T>& params, std::size_t input_dim,
                         const HeadConfig& config, Rng& rng);

template <class T>
HeadSlots head_layout(const ParameterSet<T>& params);

template <class T>
struct HeadOutput {
  Vec<T> distribution;  // p̂
  T score;              // ŷ = r·p̂ with r = [1..K]
};

template <class T>
HeadOutput<T> similarity_head(std::span<const T> left, std::span<const T> right,
                              const ParameterSet<T>& params,
                              const HeadSlots& slots);

// Two-entry distribution over 1..K whose expectation is y.
template <class T>
Vec<T> target_distribution(double y, std::size_t classes);

// Σ p_i (ln p_i − ln(q_i + floor)) over p_i > 0.
double kl_divergence(std::span<const double> p, std::span<const double> q,
                     double floor = 1e-12);

struct ScoredPair {
  TokenSequence first;
  TokenSequence second;
  double score = 1.0;  // in [1, K]
};

// Maps a [0, 5] gold similarity onto the head's [1, K] range.
double gold_to_head_scale(double gold, std::size_t classes);

// Mean KL(p || p̂) over the pairs (no regularisation term).
template <class T>
double kl_loss(const Encoder& encoder, const ParameterSet<T>& params,
               std::span<const ScoredPair> pairs);

template <class T>
struct KlGraph {
  typename Tape<T>::NodeId loss;
  // Components of h_L − h_R (|·| is non-differentiable at 0).
  std::vector<T> kinks;
};

template <class T>
KlGraph<T> add_kl_terms(Tape<T>& tape, const HeadSlots& slots,
                        std::span<const typename Tape<T>::NodeId> left,
                        std::span<const typename Tape<T>::NodeId> right,
                        std::span<const ScoredPair> pairs);

// ŷ for every pair (evaluation mode).
std::vector<double> predict_scores(const Encoder& encoder,
                                   const ParameterSet<float>& params,
                                   std::span<const ScoredPair> pairs);

struct SupervisedConfig {
  HeadConfig head;
  Penalty penalty;
  double dropout = 0.0;
  double word_dropout = 0.0;
  double scramble = 0.0;
  int epochs = 1;
  std::size_t batch_size = 25;
  AdamConfig adam;
  std::uint64_t seed = 1;
};

struct SupervisedResult {
  ParameterSet<float> params;     // encoder + W_w + head, best dev epoch
  std::vector<double> train_loss;  // mean KL + penalty per epoch
  std::vector<double> dev_pearson; // per epoch; empty without a dev set
  int best_epoch = 0;              // 0 when no selection happened
};

// KL-objective training. `params` holds W_w and the encoder tensors (fresh or
// from a checkpoint); head tensors are added with seeded initialisation when
// absent. Penalties pull toward `anchors` (the head toward zero).
SupervisedResult train_supervised(std::span<const ScoredPair> train,
                                  std::span<const ScoredPair> dev,
                                  const SupervisedConfig& config,
                                  const Encoder& encoder,
                                  ParameterSet<float> params,
                                  const Anchors<float>& anchors);

}  // namespace parasent
