#include "parasent/supervised.h"

#include <cmath>
#include <limits>

#include "parasent/eval.h"

namespace parasent {

template <class T>
void add_head_parameters(ParameterSet<T>& params, std::size_t input_dim,
                         const HeadConfig& config, Rng& rng) {
  if (config.classes < 2) throw ConfigError("head needs K >= 2 classes");
  if (config.hidden == 0) throw ConfigError("head hidden size must be > 0");
  auto glorot = [&](std::size_t rows, std::size_t cols) {
    const double a = std::sqrt(6.0 / static_cast<double>(rows + cols));
    Matrix<T> m(rows, cols);
    for (auto& v : m.data()) v = static_cast<T>(rng.uniform(-a, a));
    return m;
  };
  params.add("head.W_mul", glorot(config.hidden, input_dim));
  params.add("head.W_abs", glorot(config.hidden, input_dim));
  params.add("head.b_h", Matrix<T>(config.hidden, 1));
  params.add("head.W_p", glorot(config.classes, config.hidden));
  params.add("head.b_p", Matrix<T>(config.classes, 1));
}

template <class T>
HeadSlots head_layout(const ParameterSet<T>& params) {
  HeadSlots s{};
  s.W_mul = params.index("head.W_mul");
  s.W_abs = params.index("head.W_abs");
  s.b_h = params.index("head.b_h");
  s.W_p = params.index("head.W_p");
  s.b_p = params.index("head.b_p");
  s.classes = params[s.W_p].rows();
  const auto hidden = params[s.W_mul].rows();
  if (params[s.W_abs].rows() != hidden || params[s.b_h].rows() != hidden ||
      params[s.W_p].cols() != hidden || params[s.b_p].rows() != s.classes ||
      params[s.W_abs].cols() != params[s.W_mul].cols()) {
    throw ConfigError("similarity head tensors have inconsistent shapes");
  }
  return s;
}

template <class T>
HeadOutput<T> similarity_head(std::span<const T> left, std::span<const T> right,
                              const ParameterSet<T>& params,
                              const HeadSlots& slots) {
  detail::require(left.size() == right.size(), "similarity_head", left.size(),
                  right.size());
  Vec<T> product(left.size()), distance(left.size());
  for (std::size_t k = 0; k < left.size(); ++k) {
    product[k] = left[k] * right[k];
    distance[k] = std::abs(left[k] - right[k]);
  }
  auto hidden = matvec(params[slots.W_mul], std::span<const T>(product));
  const auto from_distance =
      matvec(params[slots.W_abs], std::span<const T>(distance));
  const auto& b_h = params[slots.b_h].data();
  for (std::size_t k = 0; k < hidden.size(); ++k) {
    hidden[k] = sigmoid(hidden[k] + from_distance[k] + b_h[k]);
  }
  auto logits = affine(params[slots.W_p], std::span<const T>(hidden),
                       std::span<const T>(params[slots.b_p].data()));
  HeadOutput<T> out;
  out.distribution = softmax(std::span<const T>(logits));
  out.score = T(0);
  for (std::size_t k = 0; k < out.distribution.size(); ++k) {
    out.score += static_cast<T>(k + 1) * out.distribution[k];
  }
  return out;
}

template <class T>
Vec<T> target_distribution(double y, std::size_t classes) {
  if (classes < 2) throw ConfigError("target_distribution: K must be >= 2");
  if (!(y >= 1.0) || y > static_cast<double>(classes)) {
    throw RangeError("score " + std::to_string(y) + " outside [1, " +
                     std::to_string(classes) + "]");
  }
  Vec<T> p(classes, T(0));
  const double floor_y = std::floor(y);
  const auto lower = static_cast<std::size_t>(floor_y);  // 1-based class
  p[lower - 1] = static_cast<T>(floor_y - y + 1.0);
  if (lower < classes) p[lower] = static_cast<T>(y - floor_y);
  return p;
}

double kl_divergence(std::span<const double> p, std::span<const double> q,
                     double floor) {
  detail::require(p.size() == q.size(), "kl_divergence", p.size(), q.size());
  double acc = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    if (p[i] > 0.0) acc += p[i] * (std::log(p[i]) - std::log(q[i] + floor));
  }
  return acc;
}

double gold_to_head_scale(double gold, std::size_t classes) {
  if (!(gold >= 0.0) || gold > 5.0) {
    throw RangeError("gold score " + std::to_string(gold) + " outside [0, 5]");
  }
  return 1.0 + static_cast<double>(classes - 1) * gold / 5.0;
}

template <class T>
double kl_loss(const Encoder& encoder, const ParameterSet<T>& params,
               std::span<const ScoredPair> pairs) {
  if (pairs.empty()) throw ConfigError("kl_loss: no pairs");
  const auto lay = encoder.layout(params);
  const auto slots = head_layout(params);
  double total = 0.0;
  for (const auto& pair : pairs) {
    const auto left = encoder.embed(params, lay, pair.first);
    const auto right = encoder.embed(params, lay, pair.second);
    const auto head = similarity_head(std::span<const T>(left),
                                      std::span<const T>(right), params, slots);
    const auto target = target_distribution<double>(pair.score, slots.classes);
    const std::vector<double> q(head.distribution.begin(),
                                head.distribution.end());
    total += kl_divergence(target, q);
  }
  return total / static_cast<double>(pairs.size());
}

template <class T>
KlGraph<T> add_kl_terms(Tape<T>& tape, const HeadSlots& slots,
                        std::span<const typename Tape<T>::NodeId> left,
                        std::span<const typename Tape<T>::NodeId> right,
                        std::span<const ScoredPair> pairs) {
  using Id = typename Tape<T>::NodeId;
  if (left.size() != pairs.size() || right.size() != pairs.size() ||
      pairs.empty()) {
    throw DimensionError("add_kl_terms: inconsistent batch");
  }
  KlGraph<T> out;
  const Id b_h = tape.parameter(slots.b_h);
  const Id b_p = tape.parameter(slots.b_p);
  std::vector<Id> terms;
  terms.reserve(pairs.size());
  for (std::size_t i = 0; i < pairs.size(); ++i) {
    const Id product = tape.mul(left[i], right[i]);
    const Id diff = tape.sub(left[i], right[i]);
    for (T v : tape.value(diff)) out.kinks.push_back(v);
    const Id distance = tape.abs(diff);
    const Id hidden = tape.sigmoid(
        tape.add(tape.add(tape.matvec(slots.W_mul, product),
                          tape.matvec(slots.W_abs, distance)),
                 b_h));
    const Id probs =
        tape.softmax(tape.add(tape.matvec(slots.W_p, hidden), b_p));
    terms.push_back(tape.kl_divergence(
        target_distribution<T>(pairs[i].score, slots.classes), probs));
  }
  out.loss = tape.scale(tape.sum(std::span<const Id>(terms)),
                        T(1) / static_cast<T>(pairs.size()));
  return out;
}

std::vector<double> predict_scores(const Encoder& encoder,
                                   const ParameterSet<float>& params,
                                   std::span<const ScoredPair> pairs) {
  const auto lay = encoder.layout(params);
  const auto slots = head_layout(params);
  std::vector<double> out;
  out.reserve(pairs.size());
  for (const auto& pair : pairs) {
    const auto left = encoder.embed(params, lay, pair.first);
    const auto right = encoder.embed(params, lay, pair.second);
    out.push_back(similarity_head(std::span<const float>(left),
                                  std::span<const float>(right), params, slots)
                      .score);
  }
  return out;
}

namespace {

double dev_pearson(const Encoder& encoder, const ParameterSet<float>& params,
                   std::span<const ScoredPair> dev) {
  const auto predicted = predict_scores(encoder, params, dev);
  std::vector<double> gold;
  gold.reserve(dev.size());
  for (const auto& p : dev) gold.push_back(p.score);
  try {
    return pearson_r(predicted, gold);
  } catch (const NumericalError&) {
    return std::numeric_limits<double>::quiet_NaN();
  }
}

}  // namespace

SupervisedResult train_supervised(std::span<const ScoredPair> train,
                                  std::span<const ScoredPair> dev,
                                  const SupervisedConfig& config,
                                  const Encoder& encoder,
                                  ParameterSet<float> params,
                                  const Anchors<float>& anchors) {
  using Id = Tape<float>::NodeId;
  if (train.empty()) throw ConfigError("supervised training set is empty");
  if (config.batch_size < 1) throw ConfigError("batch size must be >= 1");
  if (config.epochs < 0) throw ConfigError("epochs must be >= 0");

  Rng rng(config.seed);
  if (!params.contains("head.W_mul")) {
    Rng head_rng = rng.fork();
    add_head_parameters(params, encoder.output_dim(), config.head, head_rng);
  }
  const auto lay = encoder.layout(params);
  const auto slots = head_layout(params);
  for (const auto& p : train) {
    if (p.score < 1.0 || p.score > static_cast<double>(slots.classes)) {
      throw RangeError("training score outside [1, K]");
    }
  }

  AdamState state = AdamState::for_params(params);
  ParameterSet<float> grads = params.zeros_like();
  SupervisedResult result;
  ParameterSet<float> best;
  double best_r = -std::numeric_limits<double>::infinity();

  for (int epoch = 0; epoch < config.epochs; ++epoch) {
    const auto order = seeded_permutation(train.size(), rng);
    double loss_sum = 0.0;
    std::size_t batches = 0;
    for (std::size_t start = 0; start < order.size();
         start += config.batch_size) {
      const std::size_t stop = std::min(order.size(), start + config.batch_size);
      std::vector<ScoredPair> batch;
      batch.reserve(stop - start);
      for (std::size_t k = start; k < stop; ++k) batch.push_back(train[order[k]]);
      if (config.scramble > 0.0) {
        std::vector<SentencePair> sides;
        sides.reserve(batch.size());
        for (const auto& p : batch) sides.push_back({p.first, p.second});
        scramble(sides, config.scramble, rng);
        for (std::size_t k = 0; k < batch.size(); ++k) {
          batch[k].first = std::move(sides[k].first);
          batch[k].second = std::move(sides[k].second);
        }
      }
      if (config.word_dropout > 0.0) {
        for (auto& p : batch) {
          p.first = word_dropout(p.first, config.word_dropout, rng);
          p.second = word_dropout(p.second, config.word_dropout, rng);
        }
      }

      Tape<float> tape(params);
      std::vector<Id> left, right;
      for (const auto& p : batch) {
        left.push_back(encoder.build(tape, lay, p.first, &rng, config.dropout));
        right.push_back(
            encoder.build(tape, lay, p.second, &rng, config.dropout));
      }
      const auto graph = add_kl_terms<float>(tape, slots, left, right, batch);
      const double objective = static_cast<double>(tape.scalar(graph.loss)) +
                               penalty_value(params, config.penalty, anchors);
      if (!std::isfinite(objective)) {
        throw NumericalError("non-finite supervised loss at epoch " +
                             std::to_string(epoch + 1));
      }
      grads.set_zero();
      tape.backward(graph.loss, grads);
      add_penalty_gradient(params, config.penalty, anchors, grads);
      adam_step(params, grads, state, config.adam);
      loss_sum += objective;
      ++batches;
    }
    result.train_loss.push_back(loss_sum / static_cast<double>(batches));

    if (!dev.empty()) {
      const double r = dev_pearson(encoder, params, dev);
      result.dev_pearson.push_back(r);
      if (std::isfinite(r) && r > best_r) {
        best_r = r;
        best = params;
        result.best_epoch = epoch + 1;
      }
    }
  }
  result.params = result.best_epoch > 0 ? std::move(best) : std::move(params);
  return result;
}

template void add_head_parameters<float>(ParameterSet<float>&, std::size_t,
                                         const HeadConfig&, Rng&);
template void add_head_parameters<double>(ParameterSet<double>&, std::size_t,
                                          const HeadConfig&, Rng&);
template HeadSlots head_layout<float>(const ParameterSet<float>&);
template HeadSlots head_layout<double>(const ParameterSet<double>&);
template HeadSlots head_layout<long double>(const ParameterSet<long double>&);
template HeadOutput<float> similarity_head<float>(std::span<const float>,
                                                  std::span<const float>,
                                                  const ParameterSet<float>&,
                                                  const HeadSlots&);
template HeadOutput<double> similarity_head<double>(std::span<const double>,
                                                    std::span<const double>,
                                                    const ParameterSet<double>&,
                                                    const HeadSlots&);
template Vec<float> target_distribution<float>(double, std::size_t);
template Vec<double> target_distribution<double>(double, std::size_t);
template Vec<long double> target_distribution<long double>(double,
                                                           std::size_t);
template double kl_loss<float>(const Encoder&, const ParameterSet<float>&,
                               std::span<const ScoredPair>);
template double kl_loss<double>(const Encoder&, const ParameterSet<double>&,
                                std::span<const ScoredPair>);
template KlGraph<float> add_kl_terms<float>(Tape<float>&, const HeadSlots&,
                                            std::span<const Tape<float>::NodeId>,
                                            std::span<const Tape<float>::NodeId>,
                                            std::span<const ScoredPair>);
template KlGraph<double> add_kl_terms<double>(
    Tape<double>&, const HeadSlots&, std::span<const Tape<double>::NodeId>,
    std::span<const Tape<double>::NodeId>, std::span<const ScoredPair>);
template KlGraph<long double> add_kl_terms<long double>(
    Tape<long double>&, const HeadSlots&,
    std::span<const Tape<long double>::NodeId>,
    std::span<const Tape<long double>::NodeId>, std::span<const ScoredPair>);

}  // namespace parasent
