#pragma once

#include <cmath>
#include <string>
#include <vector>

#include "parasent/encoders.h"
#include "parasent/rng.h"

namespace parasent::testing {

inline TokenSequence seq(std::initializer_list<std::uint32_t> ids) {
  TokenSequence s;
  s.ids.assign(ids.begin(), ids.end());
  return s;
}

inline TokenSequence random_seq(Rng& rng, std::size_t vocab,
                                std::size_t min_len, std::size_t max_len) {
  TokenSequence s;
  const auto n = min_len + rng.bounded(max_len - min_len + 1);
  for (std::size_t i = 0; i < n; ++i) {
    s.ids.push_back(static_cast<std::uint32_t>(rng.bounded(vocab)));
  }
  return s;
}

template <class T>
Matrix<T> random_matrix(std::size_t rows, std::size_t cols, Rng& rng,
                        double scale = 1.0) {
  Matrix<T> m(rows, cols);
  for (auto& v : m.data()) v = static_cast<T>(scale * rng.uniform(-1.0, 1.0));
  return m;
}

// W_w plus freshly initialised encoder tensors, all perturbed so that no
// tensor is trivially zero.
template <class T>
ParameterSet<T> random_params(const Encoder& enc, std::size_t vocab, Rng& rng,
                              double noise = 0.2) {
  ParameterSet<T> ps;
  ps.add("W_w", random_matrix<T>(vocab, enc.input_dim(), rng));
  enc.add_parameters(ps, rng);
  for (std::size_t t = 1; t < ps.count(); ++t) {
    for (auto& v : ps[t].data()) v += static_cast<T>(noise * rng.normal());
  }
  return ps;
}

template <class T>
void zero_encoder(ParameterSet<T>& ps) {
  for (std::size_t t = 0; t < ps.count(); ++t) {
    if (ps.name(t) != "W_w") ps[t].fill(T(0));
  }
}

template <class T>
double max_abs_diff(const std::vector<T>& a, const std::vector<T>& b) {
  if (a.size() != b.size()) return INFINITY;
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    m = std::max(m, std::abs(static_cast<double>(a[i]) - static_cast<double>(b[i])));
  }
  return m;
}

template <class T>
void fill(ParameterSet<T>& ps, const std::string& name, double value) {
  ps[name].fill(static_cast<T>(value));
}

// Forces a gate to a constant: weights zeroed, bias at +40 (open) or -40.
template <class T>
void saturate_gate(ParameterSet<T>& ps, const std::string& gate, bool open) {
  for (const char* w : {".W_x", ".W_h"}) fill(ps, gate + w, 0.0);
  if (ps.contains(gate + ".W_a")) fill(ps, gate + ".W_a", 0.0);
  fill(ps, gate + ".b", open ? 40.0 : -40.0);
}

// Plain average of the embedding rows, computed without the library.
inline std::vector<double> reference_average(const Matrix<float>& emb,
                                             const TokenSequence& s) {
  std::vector<double> out(emb.cols(), 0.0);
  for (auto id : s.ids) {
    for (std::size_t j = 0; j < emb.cols(); ++j) out[j] += emb(id, j);
  }
  for (auto& v : out) v /= static_cast<double>(s.size());
  return out;
}

}  // namespace parasent::testing
