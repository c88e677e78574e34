#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "parasent/params.h"
#include "parasent/rng.h"
#include "parasent/tape.h"
#include "parasent/vocab.h"

namespace parasent {

enum class EncoderKind { Avg, LstmFinal, LstmAvg, Gran1, Gran2, Gran3, Gran4, Gran5 };
enum class CombineMode { Sum, TanhLayer };
enum class LstmReadout { Final, Average };

std::string to_string(EncoderKind kind);
std::string to_string(CombineMode mode);
// Accepts avg, lstm, lstm-avg (lstmavg), gran1..gran5 (gran == gran1).
EncoderKind parse_encoder_kind(std::string_view name);
CombineMode parse_combine_mode(std::string_view name);

constexpr bool is_recurrent(EncoderKind k) { return k != EncoderKind::Avg; }
constexpr bool is_gran(EncoderKind k) {
  return k == EncoderKind::Gran1 || k == EncoderKind::Gran2 ||
         k == EncoderKind::Gran3 || k == EncoderKind::Gran4 ||
         k == EncoderKind::Gran5;
}

struct EncoderConfig {
  EncoderKind kind = EncoderKind::Avg;
  bool bidirectional = false;
  CombineMode combine = CombineMode::Sum;
  // 0 means "same as the embedding dimension".
  std::size_t hidden = 0;
};

// Tensor indices into a ParameterSet.
struct LstmSlots {
  std::size_t W_xi, W_hi, w_ci, b_i;
  std::size_t W_xf, W_hf, w_cf, b_f;
  std::size_t W_xo, W_ho, w_co, b_o;
  std::size_t W_xc, W_hc, b_c;
};

struct GateSlots {
  std::size_t W_x = 0, W_h = 0, b = 0;
  std::optional<std::size_t> W_a;  // GRAN-4 only
};

struct DirectionSlots {
  std::optional<LstmSlots> lstm;
  std::optional<GateSlots> gate1;
  std::optional<GateSlots> gate2;
};

struct CombinerSlots {
  std::size_t W, b;
};

struct EncoderLayout {
  std::size_t embeddings = 0;
  DirectionSlots forward;
  std::optional<DirectionSlots> backward;
  std::optional<CombinerSlots> combiner;
};

template <class T>
struct LstmState {
  Vec<T> h;
  Vec<T> c;
};

// Single peephole LSTM step: input/forget peepholes read c_prev, the output
// peephole reads the new cell state.
template <class T>
LstmState<T> lstm_step(std::span<const T> x, std::span<const T> h_prev,
                       std::span<const T> c_prev, const ParameterSet<T>& ps,
                       const LstmSlots& s);

// σ(W_x x + W_h h [+ W_a a_prev] + b)
template <class T>
Vec<T> gate_activation(std::span<const T> x, std::span<const T> h,
                       std::span<const T> a_prev, const ParameterSet<T>& ps,
                       const GateSlots& g);

// Gated vector a_t for one position. `a_prev` is only read by GRAN-3/4.
template <class T>
Vec<T> gran_step(EncoderKind variant, std::span<const T> x,
                 std::span<const T> h, std::span<const T> a_prev,
                 const ParameterSet<T>& ps, const DirectionSlots& s);

template <class T>
Vec<T> encode_avg(const TokenSequence& seq, const Matrix<T>& embeddings);

template <class T>
Vec<T> encode_lstm(const TokenSequence& seq, const Matrix<T>& embeddings,
                   const ParameterSet<T>& ps, const LstmSlots& s,
                   LstmReadout readout);

template <class T>
Vec<T> encode_gran(const TokenSequence& seq, const Matrix<T>& embeddings,
                   const ParameterSet<T>& ps, const DirectionSlots& s,
                   EncoderKind variant);

// Sentence-embedding function g. Owns the configuration and knows how to
// create, locate and evaluate its parameters.
class Encoder {
 public:
  Encoder(EncoderConfig config, std::size_t embedding_dim);

  const EncoderConfig& config() const noexcept { return config_; }
  EncoderKind kind() const noexcept { return config_.kind; }
  std::size_t input_dim() const noexcept { return input_dim_; }
  std::size_t hidden_dim() const noexcept { return hidden_dim_; }
  std::size_t output_dim() const noexcept { return output_dim_; }

  // Appends this encoder's tensors (not W_w) with seeded initialisation.
  template <class T>
  void add_parameters(ParameterSet<T>& ps, Rng& rng) const;

  // Resolves tensor indices; throws ConfigError when a tensor is missing or
  // has the wrong shape.
  template <class T>
  EncoderLayout layout(const ParameterSet<T>& ps) const;

  // Plain forward evaluation (evaluation mode: no dropout).
  template <class T>
  Vec<T> embed(const ParameterSet<T>& ps, const TokenSequence& seq) const;
  template <class T>
  Vec<T> embed(const ParameterSet<T>& ps, const EncoderLayout& layout,
               const TokenSequence& seq) const;

  // Records g(seq) on the tape. When `dropout_rng` is non-null and
  // `dropout_rate` > 0, inverted dropout masks are applied to each word
  // embedding (shared by both directions of a bidirectional model).
  template <class T>
  typename Tape<T>::NodeId build(Tape<T>& tape, const EncoderLayout& layout,
                                 const TokenSequence& seq,
                                 Rng* dropout_rng = nullptr,
                                 double dropout_rate = 0.0) const;

  // GRAN-1 gate activations σ(W_x x_t + W_h h_t + b), one per position.
  template <class T>
  std::vector<Vec<T>> gran1_gates(const ParameterSet<T>& ps,
                                  const TokenSequence& seq) const;

 private:
  template <class T>
  DirectionSlots direction_slots(const ParameterSet<T>& ps,
                                 const std::string& prefix) const;
  template <class T>
  void add_direction(ParameterSet<T>& ps, Rng& rng,
                     const std::string& prefix) const;
  std::size_t gate1_out() const;
  std::size_t gate2_out() const;

  EncoderConfig config_;
  std::size_t input_dim_;
  std::size_t hidden_dim_;
  std::size_t output_dim_;
};

}  // namespace parasent
