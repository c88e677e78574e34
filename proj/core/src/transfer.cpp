#include "parasent/transfer.h"

#include <algorithm>
#include <cmath>

namespace parasent {

template <class T>
std::vector<Negatives> select_negatives(std::span<const Vec<T>> first,
                                        std::span<const Vec<T>> second) {
  if (first.size() != second.size()) {
    throw DimensionError("select_negatives: column sizes differ");
  }
  const std::size_t n = first.size();
  if (n < 2) throw ConfigError("no negative candidates");

  // Norms computed once; same arithmetic as cosine(), so results match it
  // bit for bit.
  std::vector<T> norms(2 * n);
  auto candidate = [&](std::size_t id) -> const Vec<T>& {
    return Negatives::side_of(id) == 0 ? first[Negatives::pair_of(id)]
                                       : second[Negatives::pair_of(id)];
  };
  for (std::size_t id = 0; id < 2 * n; ++id) {
    const auto& v = candidate(id);
    if (v.size() != candidate(0).size()) {
      throw DimensionError("select_negatives: embedding sizes differ");
    }
    norms[id] = norm(std::span<const T>(v));
    if (norms[id] == T(0)) {
      throw DegenerateVectorError("cosine: zero-norm input vector");
    }
  }
  auto best_for = [&](std::size_t anchor_id, std::size_t self) {
    const auto& anchor = candidate(anchor_id);
    std::size_t best = 0;
    T best_cos = T(0);
    bool have = false;
    for (std::size_t id = 0; id < 2 * n; ++id) {
      if (Negatives::pair_of(id) == self) continue;
      const T c = std::clamp(
          dot(std::span<const T>(anchor), std::span<const T>(candidate(id))) /
              (norms[anchor_id] * norms[id]),
          T(-1), T(1));
      if (!have || c > best_cos) {
        best = id;
        best_cos = c;
        have = true;
      }
    }
    return best;
  };

  std::vector<Negatives> out(n);
  for (std::size_t i = 0; i < n; ++i) {
    out[i].t1 = best_for(2 * i, i);
    out[i].t2 = best_for(2 * i + 1, i);
  }
  return out;
}

double pair_hinge(double cos_pair, double cos_first_negative,
                  double cos_second_negative, double margin) {
  return std::max(0.0, margin - cos_pair + cos_first_negative) +
         std::max(0.0, margin - cos_pair + cos_second_negative);
}

template <class T>
double margin_loss(const Encoder& encoder, const ParameterSet<T>& params,
                   std::span<const SentencePair> batch,
                   std::span<const Negatives> negatives, double margin,
                   const Penalty& penalty, const Anchors<T>& anchors) {
  if (negatives.size() != batch.size()) {
    throw DimensionError("margin_loss: negatives not populated for batch");
  }
  const auto lay = encoder.layout(params);
  std::vector<Vec<T>> first, second;
  first.reserve(batch.size());
  second.reserve(batch.size());
  for (const auto& p : batch) {
    first.push_back(encoder.embed(params, lay, p.first));
    second.push_back(encoder.embed(params, lay, p.second));
  }
  auto cand = [&](std::size_t id) -> const Vec<T>& {
    return Negatives::side_of(id) == 0 ? first[Negatives::pair_of(id)]
                                       : second[Negatives::pair_of(id)];
  };
  double total = 0.0;
  for (std::size_t i = 0; i < batch.size(); ++i) {
    total += pair_hinge(cosine(first[i], second[i]),
                        cosine(first[i], cand(negatives[i].t1)),
                        cosine(second[i], cand(negatives[i].t2)), margin);
  }
  return total / static_cast<double>(batch.size()) +
         penalty_value(params, penalty, anchors);
}

template <class T>
MarginGraph<T> add_margin_terms(
    Tape<T>& tape, std::span<const typename Tape<T>::NodeId> first,
    std::span<const typename Tape<T>::NodeId> second,
    std::span<const Negatives> negatives, double margin) {
  using Id = typename Tape<T>::NodeId;
  const std::size_t n = first.size();
  if (second.size() != n || negatives.size() != n || n == 0) {
    throw DimensionError("add_margin_terms: inconsistent batch");
  }
  auto cand = [&](std::size_t id) {
    return Negatives::side_of(id) == 0 ? first[Negatives::pair_of(id)]
                                       : second[Negatives::pair_of(id)];
  };
  MarginGraph<T> out;
  std::vector<Id> hinges;
  hinges.reserve(2 * n);
  const T delta = static_cast<T>(margin);
  for (std::size_t i = 0; i < n; ++i) {
    const Id pos = tape.cosine(first[i], second[i]);
    const Id neg1 = tape.cosine(first[i], cand(negatives[i].t1));
    const Id neg2 = tape.cosine(second[i], cand(negatives[i].t2));
    for (const Id neg : {neg1, neg2}) {
      const Id arg = tape.add_scalar(tape.sub(neg, pos), delta);
      out.kinks.push_back(tape.scalar(arg));
      hinges.push_back(tape.relu(arg));
    }
  }
  out.loss = tape.scale(tape.sum(std::span<const Id>(hinges)),
                        T(1) / static_cast<T>(n));
  return out;
}

TransferResult train_transfer(std::span<const SentencePair> corpus,
                              const TransferConfig& config,
                              const Encoder& encoder,
                              ParameterSet<float> params,
                              const Matrix<float>& initial_embeddings,
                              const EpochCallback& on_epoch) {
  using Id = Tape<float>::NodeId;
  if (corpus.size() < 2) {
    throw ConfigError("transfer training needs at least 2 pairs");
  }
  if (config.batch_size < 2) throw ConfigError("batch size must be >= 2");
  if (config.epochs < 0) throw ConfigError("epochs must be >= 0");

  const auto lay = encoder.layout(params);
  const Anchors<float> anchors{nullptr, &initial_embeddings};
  AdamState state = AdamState::for_params(params);
  ParameterSet<float> grads = params.zeros_like();
  Rng rng(config.seed);
  TransferResult result;

  for (int epoch = 0; epoch < config.epochs; ++epoch) {
    const auto order = seeded_permutation(corpus.size(), rng);
    double loss_sum = 0.0;
    std::size_t batches = 0;
    for (std::size_t start = 0; start < order.size();
         start += config.batch_size) {
      const std::size_t stop =
          std::min(order.size(), start + config.batch_size);
      if (stop - start < 2) break;

      std::vector<SentencePair> batch;
      batch.reserve(stop - start);
      for (std::size_t k = start; k < stop; ++k) batch.push_back(corpus[order[k]]);
      scramble(batch, config.scramble, rng);
      if (config.word_dropout > 0.0) {
        for (auto& p : batch) {
          p.first = word_dropout(p.first, config.word_dropout, rng);
          p.second = word_dropout(p.second, config.word_dropout, rng);
        }
      }

      Tape<float> tape(params);
      std::vector<Id> first, second;
      std::vector<Vec<float>> first_values, second_values;
      for (const auto& p : batch) {
        first.push_back(encoder.build(tape, lay, p.first, &rng, config.dropout));
        second.push_back(
            encoder.build(tape, lay, p.second, &rng, config.dropout));
        first_values.push_back(tape.value(first.back()));
        second_values.push_back(tape.value(second.back()));
      }
      const auto negatives = select_negatives<float>(first_values, second_values);
      const auto graph = add_margin_terms<float>(tape, first, second, negatives,
                                                 config.margin);
      const double objective = static_cast<double>(tape.scalar(graph.loss)) +
                               penalty_value(params, config.penalty, anchors);
      if (!std::isfinite(objective)) {
        throw NumericalError("non-finite training loss at epoch " +
                             std::to_string(epoch + 1));
      }
      grads.set_zero();
      tape.backward(graph.loss, grads);
      add_penalty_gradient(params, config.penalty, anchors, grads);
      adam_step(params, grads, state, config.adam);
      loss_sum += objective;
      ++batches;
    }
    const double mean = batches ? loss_sum / static_cast<double>(batches) : 0.0;
    result.epoch_loss.push_back(mean);
    if (on_epoch) on_epoch(epoch + 1, mean);
  }
  result.params = std::move(params);
  return result;
}

template std::vector<Negatives> select_negatives<float>(
    std::span<const Vec<float>>, std::span<const Vec<float>>);
template std::vector<Negatives> select_negatives<double>(
    std::span<const Vec<double>>, std::span<const Vec<double>>);
template double margin_loss<float>(const Encoder&, const ParameterSet<float>&,
                                   std::span<const SentencePair>,
                                   std::span<const Negatives>, double,
                                   const Penalty&, const Anchors<float>&);
template double margin_loss<double>(const Encoder&, const ParameterSet<double>&,
                                    std::span<const SentencePair>,
                                    std::span<const Negatives>, double,
                                    const Penalty&, const Anchors<double>&);
template MarginGraph<float> add_margin_terms<float>(
    Tape<float>&, std::span<const Tape<float>::NodeId>,
    std::span<const Tape<float>::NodeId>, std::span<const Negatives>, double);
template MarginGraph<double> add_margin_terms<double>(
    Tape<double>&, std::span<const Tape<double>::NodeId>,
    std::span<const Tape<double>::NodeId>, std::span<const Negatives>, double);
template MarginGraph<long double> add_margin_terms<long double>(
    Tape<long double>&, std::span<const Tape<long double>::NodeId>,
    std::span<const Tape<long double>::NodeId>, std::span<const Negatives>,
    double);

}  // namespace parasent
