#include "parasent/encoders.h"

#include <cmath>

#include "parasent/augment.h"

namespace parasent {

std::string to_string(EncoderKind kind) {
  switch (kind) {
    case EncoderKind::Avg: return "avg";
    case EncoderKind::LstmFinal: return "lstm";
    case EncoderKind::LstmAvg: return "lstm-avg";
    case EncoderKind::Gran1: return "gran1";
    case EncoderKind::Gran2: return "gran2";
    case EncoderKind::Gran3: return "gran3";
    case EncoderKind::Gran4: return "gran4";
    case EncoderKind::Gran5: return "gran5";
  }
  return "?";
}

std::string to_string(CombineMode mode) {
  return mode == CombineMode::Sum ? "sum" : "tanh";
}

EncoderKind parse_encoder_kind(std::string_view name) {
  const auto n = to_lower(name);
  if (n == "avg") return EncoderKind::Avg;
  if (n == "lstm" || n == "lstm-final") return EncoderKind::LstmFinal;
  if (n == "lstm-avg" || n == "lstmavg") return EncoderKind::LstmAvg;
  if (n == "gran" || n == "gran1") return EncoderKind::Gran1;
  if (n == "gran2") return EncoderKind::Gran2;
  if (n == "gran3") return EncoderKind::Gran3;
  if (n == "gran4") return EncoderKind::Gran4;
  if (n == "gran5") return EncoderKind::Gran5;
  throw ConfigError("unknown encoder '" + std::string(name) +
                    "' (expected avg, lstm, lstm-avg, gran1..gran5)");
}

CombineMode parse_combine_mode(std::string_view name) {
  const auto n = to_lower(name);
  if (n == "sum") return CombineMode::Sum;
  if (n == "tanh" || n == "tanh-layer") return CombineMode::TanhLayer;
  throw ConfigError("unknown combine mode '" + std::string(name) +
                    "' (expected sum or tanh)");
}

// ---------------------------------------------------------------------------
// Plain forward kernels.

namespace {

template <class T>
void accumulate(Vec<T>& acc, const Matrix<T>& w, std::span<const T> v) {
  detail::require(w.cols() == v.size(), "matvec", w.cols(), v.size());
  detail::require(w.rows() == acc.size(), "matvec", w.rows(), acc.size());
  for (std::size_t r = 0; r < w.rows(); ++r) {
    const auto row = w.row(r);
    T s = T(0);
    for (std::size_t c = 0; c < row.size(); ++c) s += row[c] * v[c];
    acc[r] += s;
  }
}

template <class T>
Vec<T> bias_copy(const Matrix<T>& b) {
  return b.data();
}

template <class T>
void add_peephole(Vec<T>& acc, const Matrix<T>& w, std::span<const T> c) {
  detail::require(w.size() == c.size(), "peephole", w.size(), c.size());
  for (std::size_t i = 0; i < acc.size(); ++i) acc[i] += w.data()[i] * c[i];
}

template <class T>
void check_sequence(const TokenSequence& seq) {
  if (seq.empty()) throw DimensionError("cannot encode an empty sequence");
}

template <class T>
std::span<const T> row_of(const Matrix<T>& emb, std::uint32_t id) {
  if (id >= emb.rows()) {
    throw DimensionError("token index " + std::to_string(id) +
                         " outside embedding table");
  }
  return emb.row(id);
}

}  // namespace

template <class T>
LstmState<T> lstm_step(std::span<const T> x, std::span<const T> h_prev,
                       std::span<const T> c_prev, const ParameterSet<T>& ps,
                       const LstmSlots& s) {
  Vec<T> i = bias_copy(ps[s.b_i]);
  accumulate(i, ps[s.W_xi], x);
  accumulate(i, ps[s.W_hi], h_prev);
  add_peephole(i, ps[s.w_ci], c_prev);

  Vec<T> f = bias_copy(ps[s.b_f]);
  accumulate(f, ps[s.W_xf], x);
  accumulate(f, ps[s.W_hf], h_prev);
  add_peephole(f, ps[s.w_cf], c_prev);

  Vec<T> g = bias_copy(ps[s.b_c]);
  accumulate(g, ps[s.W_xc], x);
  accumulate(g, ps[s.W_hc], h_prev);

  LstmState<T> out;
  out.c.resize(i.size());
  for (std::size_t k = 0; k < i.size(); ++k) {
    out.c[k] = sigmoid(f[k]) * c_prev[k] + sigmoid(i[k]) * std::tanh(g[k]);
  }

  Vec<T> o = bias_copy(ps[s.b_o]);
  accumulate(o, ps[s.W_xo], x);
  accumulate(o, ps[s.W_ho], h_prev);
  add_peephole(o, ps[s.w_co], std::span<const T>(out.c));

  out.h.resize(o.size());
  for (std::size_t k = 0; k < o.size(); ++k) {
    out.h[k] = sigmoid(o[k]) * std::tanh(out.c[k]);
  }
  return out;
}

template <class T>
Vec<T> gate_activation(std::span<const T> x, std::span<const T> h,
                       std::span<const T> a_prev, const ParameterSet<T>& ps,
                       const GateSlots& g) {
  Vec<T> z = bias_copy(ps[g.b]);
  accumulate(z, ps[g.W_x], x);
  accumulate(z, ps[g.W_h], h);
  if (g.W_a) accumulate(z, ps[*g.W_a], a_prev);
  for (auto& v : z) v = sigmoid(v);
  return z;
}

template <class T>
Vec<T> gran_step(EncoderKind variant, std::span<const T> x,
                 std::span<const T> h, std::span<const T> a_prev,
                 const ParameterSet<T>& ps, const DirectionSlots& s) {
  if (!s.gate1) throw ConfigError("gran_step: missing gate parameters");
  const auto g1 = gate_activation(x, h, a_prev, ps, *s.gate1);
  Vec<T> a(g1.size());
  switch (variant) {
    case EncoderKind::Gran1:
      detail::require(x.size() == g1.size(), "gran1 gate", x.size(), g1.size());
      for (std::size_t k = 0; k < a.size(); ++k) a[k] = x[k] * g1[k];
      return a;
    case EncoderKind::Gran2:
      detail::require(h.size() == g1.size(), "gran2 gate", h.size(), g1.size());
      for (std::size_t k = 0; k < a.size(); ++k) a[k] = h[k] * g1[k];
      return a;
    case EncoderKind::Gran3:
    case EncoderKind::Gran4: {
      const auto g2 = gate_activation(x, h, a_prev, ps, *s.gate2);
      detail::require(a_prev.size() == g2.size(), "gran3/4 gate",
                      a_prev.size(), g2.size());
      for (std::size_t k = 0; k < a.size(); ++k) {
        a[k] = x[k] * g1[k] + a_prev[k] * g2[k];
      }
      return a;
    }
    case EncoderKind::Gran5: {
      const auto g2 = gate_activation(x, h, a_prev, ps, *s.gate2);
      detail::require(h.size() == g2.size(), "gran5 gate", h.size(), g2.size());
      for (std::size_t k = 0; k < a.size(); ++k) {
        a[k] = x[k] * g1[k] + h[k] * g2[k];
      }
      return a;
    }
    default:
      throw ConfigError("gran_step: not a GRAN variant");
  }
}

template <class T>
Vec<T> encode_avg(const TokenSequence& seq, const Matrix<T>& embeddings) {
  check_sequence<T>(seq);
  Vec<T> out(embeddings.cols(), T(0));
  for (auto id : seq.ids) {
    const auto x = row_of(embeddings, id);
    for (std::size_t k = 0; k < out.size(); ++k) out[k] += x[k];
  }
  const T inv = T(1) / static_cast<T>(seq.size());
  for (auto& v : out) v *= inv;
  return out;
}

template <class T>
Vec<T> encode_lstm(const TokenSequence& seq, const Matrix<T>& embeddings,
                   const ParameterSet<T>& ps, const LstmSlots& s,
                   LstmReadout readout) {
  check_sequence<T>(seq);
  const std::size_t dh = ps[s.b_i].size();
  LstmState<T> state{Vec<T>(dh, T(0)), Vec<T>(dh, T(0))};
  Vec<T> total(dh, T(0));
  for (auto id : seq.ids) {
    state = lstm_step(row_of(embeddings, id), std::span<const T>(state.h),
                      std::span<const T>(state.c), ps, s);
    for (std::size_t k = 0; k < dh; ++k) total[k] += state.h[k];
  }
  if (readout == LstmReadout::Final) return state.h;
  const T inv = T(1) / static_cast<T>(seq.size());
  for (auto& v : total) v *= inv;
  return total;
}

template <class T>
Vec<T> encode_gran(const TokenSequence& seq, const Matrix<T>& embeddings,
                   const ParameterSet<T>& ps, const DirectionSlots& s,
                   EncoderKind variant) {
  check_sequence<T>(seq);
  if (!s.lstm || !s.gate1) throw ConfigError("encode_gran: missing params");
  const std::size_t dh = ps[s.lstm->b_i].size();
  LstmState<T> state{Vec<T>(dh, T(0)), Vec<T>(dh, T(0))};
  const bool running =
      variant == EncoderKind::Gran3 || variant == EncoderKind::Gran4;
  Vec<T> a_prev(ps[s.gate1->b].size(), T(0));
  Vec<T> total;
  for (auto id : seq.ids) {
    const auto x = row_of(embeddings, id);
    state = lstm_step(x, std::span<const T>(state.h),
                      std::span<const T>(state.c), ps, *s.lstm);
    auto a = gran_step(variant, x, std::span<const T>(state.h),
                       std::span<const T>(a_prev), ps, s);
    if (total.empty()) total.assign(a.size(), T(0));
    for (std::size_t k = 0; k < a.size(); ++k) total[k] += a[k];
    a_prev = std::move(a);
  }
  const T inv = T(1) / static_cast<T>(seq.size());
  Vec<T> out = running ? a_prev : total;
  for (auto& v : out) v *= inv;
  return out;
}

// ---------------------------------------------------------------------------
// Encoder

Encoder::Encoder(EncoderConfig config, std::size_t embedding_dim)
    : config_(config), input_dim_(embedding_dim) {
  if (embedding_dim == 0) throw ConfigError("embedding dimension must be > 0");
  hidden_dim_ = config_.hidden == 0 ? embedding_dim : config_.hidden;
  if (config_.bidirectional && !is_recurrent(config_.kind)) {
    throw ConfigError("bidirectional encoders require a recurrent kind");
  }
  switch (config_.kind) {
    case EncoderKind::Avg:
      hidden_dim_ = 0;
      output_dim_ = input_dim_;
      break;
    case EncoderKind::LstmFinal:
    case EncoderKind::LstmAvg:
    case EncoderKind::Gran2:
      output_dim_ = hidden_dim_;
      break;
    case EncoderKind::Gran5:
      if (hidden_dim_ != input_dim_) {
        throw ConfigError("gran5 requires hidden size == embedding dimension");
      }
      output_dim_ = input_dim_;
      break;
    default:
      output_dim_ = input_dim_;
  }
}

std::size_t Encoder::gate1_out() const {
  return config_.kind == EncoderKind::Gran2 ? hidden_dim_ : input_dim_;
}

std::size_t Encoder::gate2_out() const {
  return config_.kind == EncoderKind::Gran5 ? hidden_dim_ : input_dim_;
}

namespace {

template <class T>
Matrix<T> glorot(std::size_t rows, std::size_t cols, Rng& rng) {
  const double a = std::sqrt(6.0 / static_cast<double>(rows + cols));
  Matrix<T> m(rows, cols);
  for (auto& v : m.data()) v = static_cast<T>(rng.uniform(-a, a));
  return m;
}

template <class T>
Matrix<T> small_column(std::size_t n, double a, Rng& rng) {
  Matrix<T> m(n, 1);
  for (auto& v : m.data()) v = static_cast<T>(rng.uniform(-a, a));
  return m;
}

}  // namespace

template <class T>
void Encoder::add_direction(ParameterSet<T>& ps, Rng& rng,
                            const std::string& prefix) const {
  const std::size_t d = input_dim_;
  const std::size_t dh = hidden_dim_;
  const std::string l = prefix + "lstm.";
  for (const char gate : {'i', 'f', 'o', 'c'}) {
    const std::string g(1, gate);
    ps.add(l + "W_x" + g, glorot<T>(dh, d, rng));
    ps.add(l + "W_h" + g, glorot<T>(dh, dh, rng));
    if (gate != 'c') ps.add(l + "w_c" + g, small_column<T>(dh, 0.1, rng));
    ps.add(l + "b_" + g, Matrix<T>(dh, 1));
  }
  if (!is_gran(config_.kind)) return;

  auto add_gate = [&](const std::string& name, std::size_t out) {
    ps.add(prefix + name + ".W_x", glorot<T>(out, d, rng));
    ps.add(prefix + name + ".W_h", glorot<T>(out, dh, rng));
    if (config_.kind == EncoderKind::Gran4) {
      ps.add(prefix + name + ".W_a", glorot<T>(out, d, rng));
    }
    ps.add(prefix + name + ".b", Matrix<T>(out, 1));
  };
  add_gate("gate1", gate1_out());
  if (config_.kind == EncoderKind::Gran3 || config_.kind == EncoderKind::Gran4 ||
      config_.kind == EncoderKind::Gran5) {
    add_gate("gate2", gate2_out());
  }
}

template <class T>
void Encoder::add_parameters(ParameterSet<T>& ps, Rng& rng) const {
  if (!is_recurrent(config_.kind)) return;
  if (!config_.bidirectional) {
    add_direction(ps, rng, "");
    return;
  }
  add_direction(ps, rng, "fwd.");
  add_direction(ps, rng, "bwd.");
  if (config_.combine == CombineMode::TanhLayer) {
    ps.add("combine.W", glorot<T>(output_dim_, 2 * output_dim_, rng));
    ps.add("combine.b", Matrix<T>(output_dim_, 1));
  }
}

namespace {

template <class T>
std::size_t expect(const ParameterSet<T>& ps, const std::string& name,
                   std::size_t rows, std::size_t cols) {
  const auto i = ps.find(name);
  if (!i) throw ConfigError("parameter '" + name + "' missing for encoder");
  const auto& m = ps[*i];
  if (m.rows() != rows || m.cols() != cols) {
    throw ConfigError("parameter '" + name + "' has shape " +
                      std::to_string(m.rows()) + "x" + std::to_string(m.cols()) +
                      ", expected " + std::to_string(rows) + "x" +
                      std::to_string(cols));
  }
  return *i;
}

}  // namespace

template <class T>
DirectionSlots Encoder::direction_slots(const ParameterSet<T>& ps,
                                        const std::string& prefix) const {
  const std::size_t d = input_dim_;
  const std::size_t dh = hidden_dim_;
  const std::string l = prefix + "lstm.";
  DirectionSlots s;
  LstmSlots ls{};
  ls.W_xi = expect(ps, l + "W_xi", dh, d);
  ls.W_hi = expect(ps, l + "W_hi", dh, dh);
  ls.w_ci = expect(ps, l + "w_ci", dh, 1);
  ls.b_i = expect(ps, l + "b_i", dh, 1);
  ls.W_xf = expect(ps, l + "W_xf", dh, d);
  ls.W_hf = expect(ps, l + "W_hf", dh, dh);
  ls.w_cf = expect(ps, l + "w_cf", dh, 1);
  ls.b_f = expect(ps, l + "b_f", dh, 1);
  ls.W_xo = expect(ps, l + "W_xo", dh, d);
  ls.W_ho = expect(ps, l + "W_ho", dh, dh);
  ls.w_co = expect(ps, l + "w_co", dh, 1);
  ls.b_o = expect(ps, l + "b_o", dh, 1);
  ls.W_xc = expect(ps, l + "W_xc", dh, d);
  ls.W_hc = expect(ps, l + "W_hc", dh, dh);
  ls.b_c = expect(ps, l + "b_c", dh, 1);
  s.lstm = ls;
  if (!is_gran(config_.kind)) return s;

  auto gate = [&](const std::string& name, std::size_t out) {
    GateSlots g;
    g.W_x = expect(ps, prefix + name + ".W_x", out, d);
    g.W_h = expect(ps, prefix + name + ".W_h", out, dh);
    if (config_.kind == EncoderKind::Gran4) {
      g.W_a = expect(ps, prefix + name + ".W_a", out, d);
    }
    g.b = expect(ps, prefix + name + ".b", out, 1);
    return g;
  };
  s.gate1 = gate("gate1", gate1_out());
  if (config_.kind == EncoderKind::Gran3 || config_.kind == EncoderKind::Gran4 ||
      config_.kind == EncoderKind::Gran5) {
    s.gate2 = gate("gate2", gate2_out());
  }
  return s;
}

template <class T>
EncoderLayout Encoder::layout(const ParameterSet<T>& ps) const {
  EncoderLayout out;
  const auto w = ps.find(kWordEmbeddings);
  if (!w) throw ConfigError("parameter set lacks word embeddings W_w");
  if (ps[*w].cols() != input_dim_) {
    throw ConfigError("word embedding dimension " +
                      std::to_string(ps[*w].cols()) + " != encoder input " +
                      std::to_string(input_dim_));
  }
  out.embeddings = *w;
  if (!is_recurrent(config_.kind)) return out;
  if (!config_.bidirectional) {
    out.forward = direction_slots(ps, "");
    return out;
  }
  out.forward = direction_slots(ps, "fwd.");
  out.backward = direction_slots(ps, "bwd.");
  if (config_.combine == CombineMode::TanhLayer) {
    if (!ps.contains("combine.W") || !ps.contains("combine.b")) {
      throw ConfigError("tanh combine mode requires combiner parameters");
    }
    out.combiner = CombinerSlots{
        expect(ps, "combine.W", output_dim_, 2 * output_dim_),
        expect(ps, "combine.b", output_dim_, 1)};
  }
  return out;
}

template <class T>
Vec<T> Encoder::embed(const ParameterSet<T>& ps,
                      const TokenSequence& seq) const {
  return embed(ps, layout(ps), seq);
}

template <class T>
Vec<T> Encoder::embed(const ParameterSet<T>& ps, const EncoderLayout& lay,
                      const TokenSequence& seq) const {
  const auto& emb = ps[lay.embeddings];
  auto one_direction = [&](const DirectionSlots& s, const TokenSequence& q) {
    switch (config_.kind) {
      case EncoderKind::Avg: return encode_avg(q, emb);
      case EncoderKind::LstmFinal:
        return encode_lstm(q, emb, ps, *s.lstm, LstmReadout::Final);
      case EncoderKind::LstmAvg:
        return encode_lstm(q, emb, ps, *s.lstm, LstmReadout::Average);
      default: return encode_gran(q, emb, ps, s, config_.kind);
    }
  };
  auto fwd = one_direction(lay.forward, seq);
  if (!config_.bidirectional) return fwd;

  const auto bwd = one_direction(*lay.backward, seq.reversed());
  if (config_.combine == CombineMode::Sum) {
    for (std::size_t k = 0; k < fwd.size(); ++k) fwd[k] += bwd[k];
    return fwd;
  }
  if (!lay.combiner) {
    throw ConfigError("tanh combine mode requires combiner parameters");
  }
  Vec<T> both = fwd;
  both.insert(both.end(), bwd.begin(), bwd.end());
  auto out = affine(ps[lay.combiner->W], std::span<const T>(both),
                    std::span<const T>(ps[lay.combiner->b].data()));
  for (auto& v : out) v = std::tanh(v);
  return out;
}

template <class T>
std::vector<Vec<T>> Encoder::gran1_gates(const ParameterSet<T>& ps,
                                         const TokenSequence& seq) const {
  if (config_.kind != EncoderKind::Gran1 || config_.bidirectional) {
    throw ConfigError("gate analysis requires a unidirectional gran1 encoder");
  }
  check_sequence<T>(seq);
  const auto lay = layout(ps);
  const auto& s = lay.forward;
  const auto& emb = ps[lay.embeddings];
  LstmState<T> state{Vec<T>(hidden_dim_, T(0)), Vec<T>(hidden_dim_, T(0))};
  std::vector<Vec<T>> gates;
  gates.reserve(seq.size());
  for (auto id : seq.ids) {
    const auto x = row_of(emb, id);
    state = lstm_step(x, std::span<const T>(state.h),
                      std::span<const T>(state.c), ps, *s.lstm);
    gates.push_back(gate_activation(x, std::span<const T>(state.h),
                                    std::span<const T>(), ps, *s.gate1));
  }
  return gates;
}

// ---------------------------------------------------------------------------
// Tape construction. Mirrors the plain kernels above node for node.

namespace {

template <class T>
typename Tape<T>::NodeId gate_node(Tape<T>& tape, const GateSlots& g,
                                   typename Tape<T>::NodeId bias,
                                   typename Tape<T>::NodeId x,
                                   typename Tape<T>::NodeId h,
                                   std::optional<typename Tape<T>::NodeId> a) {
  auto z = tape.add(tape.add(tape.matvec(g.W_x, x), tape.matvec(g.W_h, h)),
                    bias);
  if (g.W_a) z = tape.add(z, tape.matvec(*g.W_a, *a));
  return tape.sigmoid(z);
}

template <class T>
typename Tape<T>::NodeId build_direction(
    Tape<T>& tape, const DirectionSlots& s, EncoderKind kind,
    const std::vector<typename Tape<T>::NodeId>& xs, std::size_t dh) {
  using Id = typename Tape<T>::NodeId;
  if (kind == EncoderKind::Avg) {
    return tape.mean(std::span<const Id>(xs));
  }
  const auto& l = *s.lstm;
  const Id w_ci = tape.parameter(l.w_ci), w_cf = tape.parameter(l.w_cf),
           w_co = tape.parameter(l.w_co);
  const Id b_i = tape.parameter(l.b_i), b_f = tape.parameter(l.b_f),
           b_o = tape.parameter(l.b_o), b_c = tape.parameter(l.b_c);
  std::optional<Id> g1b, g2b;
  if (s.gate1) g1b = tape.parameter(s.gate1->b);
  if (s.gate2) g2b = tape.parameter(s.gate2->b);

  Id h = tape.constant(Vec<T>(dh, T(0)));
  Id c = h;
  std::optional<Id> a_prev;
  if (kind == EncoderKind::Gran3 || kind == EncoderKind::Gran4) {
    a_prev = tape.constant(Vec<T>(tape.params()[s.gate1->b].size(), T(0)));
  }
  std::vector<Id> outputs;
  outputs.reserve(xs.size());
  for (const Id x : xs) {
    auto pre = [&](std::size_t Wx, std::size_t Wh, Id b) {
      return tape.add(tape.add(tape.matvec(Wx, x), tape.matvec(Wh, h)), b);
    };
    const Id i = tape.sigmoid(
        tape.add(pre(l.W_xi, l.W_hi, b_i), tape.mul(w_ci, c)));
    const Id f = tape.sigmoid(
        tape.add(pre(l.W_xf, l.W_hf, b_f), tape.mul(w_cf, c)));
    const Id cand = tape.tanh(pre(l.W_xc, l.W_hc, b_c));
    const Id c_new = tape.add(tape.mul(f, c), tape.mul(i, cand));
    const Id o = tape.sigmoid(
        tape.add(pre(l.W_xo, l.W_ho, b_o), tape.mul(w_co, c_new)));
    const Id h_new = tape.mul(o, tape.tanh(c_new));
    c = c_new;
    h = h_new;

    switch (kind) {
      case EncoderKind::LstmFinal:
      case EncoderKind::LstmAvg:
        outputs.push_back(h);
        break;
      case EncoderKind::Gran1:
        outputs.push_back(
            tape.mul(x, gate_node(tape, *s.gate1, *g1b, x, h, a_prev)));
        break;
      case EncoderKind::Gran2:
        outputs.push_back(
            tape.mul(h, gate_node(tape, *s.gate1, *g1b, x, h, a_prev)));
        break;
      case EncoderKind::Gran3:
      case EncoderKind::Gran4: {
        const Id g1 = gate_node(tape, *s.gate1, *g1b, x, h, a_prev);
        const Id g2 = gate_node(tape, *s.gate2, *g2b, x, h, a_prev);
        const Id a = tape.add(tape.mul(x, g1), tape.mul(*a_prev, g2));
        a_prev = a;
        outputs.push_back(a);
        break;
      }
      case EncoderKind::Gran5: {
        const Id g1 = gate_node(tape, *s.gate1, *g1b, x, h, a_prev);
        const Id g2 = gate_node(tape, *s.gate2, *g2b, x, h, a_prev);
        outputs.push_back(tape.add(tape.mul(x, g1), tape.mul(h, g2)));
        break;
      }
      case EncoderKind::Avg:
        break;
    }
  }
  const T inv = T(1) / static_cast<T>(xs.size());
  switch (kind) {
    case EncoderKind::LstmFinal:
      return outputs.back();
    case EncoderKind::Gran3:
    case EncoderKind::Gran4:
      return tape.scale(outputs.back(), inv);
    default:
      return tape.mean(std::span<const Id>(outputs));
  }
}

}  // namespace

template <class T>
typename Tape<T>::NodeId Encoder::build(Tape<T>& tape, const EncoderLayout& lay,
                                        const TokenSequence& seq,
                                        Rng* dropout_rng,
                                        double dropout_rate) const {
  using Id = typename Tape<T>::NodeId;
  check_sequence<T>(seq);
  const auto rows = tape.params()[lay.embeddings].rows();
  std::vector<Id> xs;
  xs.reserve(seq.size());
  for (auto id : seq.ids) {
    if (id >= rows) {
      throw DimensionError("token index " + std::to_string(id) +
                           " outside embedding table");
    }
    Id x = tape.row(lay.embeddings, id);
    if (dropout_rng != nullptr && dropout_rate > 0.0) {
      x = tape.mul_const(x, dropout_mask<T>(input_dim_, dropout_rate,
                                            *dropout_rng));
    }
    xs.push_back(x);
  }
  const Id fwd =
      build_direction(tape, lay.forward, config_.kind, xs, hidden_dim_);
  if (!config_.bidirectional) return fwd;

  std::vector<Id> rev(xs.rbegin(), xs.rend());
  const Id bwd =
      build_direction(tape, *lay.backward, config_.kind, rev, hidden_dim_);
  if (config_.combine == CombineMode::Sum) return tape.add(fwd, bwd);
  if (!lay.combiner) {
    throw ConfigError("tanh combine mode requires combiner parameters");
  }
  const Id both = tape.concat(fwd, bwd);
  return tape.tanh(tape.add(tape.matvec(lay.combiner->W, both),
                            tape.parameter(lay.combiner->b)));
}

#define PARASENT_INSTANTIATE(T)                                              \
  template LstmState<T> lstm_step<T>(std::span<const T>, std::span<const T>, \
                                     std::span<const T>,                     \
                                     const ParameterSet<T>&,                 \
                                     const LstmSlots&);                      \
  template Vec<T> gate_activation<T>(std::span<const T>, std::span<const T>, \
                                     std::span<const T>,                     \
                                     const ParameterSet<T>&,                 \
                                     const GateSlots&);                      \
  template Vec<T> gran_step<T>(EncoderKind, std::span<const T>,              \
                               std::span<const T>, std::span<const T>,       \
                               const ParameterSet<T>&,                       \
                               const DirectionSlots&);                       \
  template Vec<T> encode_avg<T>(const TokenSequence&, const Matrix<T>&);     \
  template Vec<T> encode_lstm<T>(const TokenSequence&, const Matrix<T>&,     \
                                 const ParameterSet<T>&, const LstmSlots&,   \
                                 LstmReadout);                               \
  template Vec<T> encode_gran<T>(const TokenSequence&, const Matrix<T>&,     \
                                 const ParameterSet<T>&,                     \
                                 const DirectionSlots&, EncoderKind);        \
  template void Encoder::add_parameters<T>(ParameterSet<T>&, Rng&) const;    \
  template EncoderLayout Encoder::layout<T>(const ParameterSet<T>&) const;   \
  template Vec<T> Encoder::embed<T>(const ParameterSet<T>&,                  \
                                    const TokenSequence&) const;             \
  template Vec<T> Encoder::embed<T>(const ParameterSet<T>&,                  \
                                    const EncoderLayout&,                    \
                                    const TokenSequence&) const;             \
  template typename Tape<T>::NodeId Encoder::build<T>(                       \
      Tape<T>&, const EncoderLayout&, const TokenSequence&, Rng*, double)    \
      const;                                                                 \
  template std::vector<Vec<T>> Encoder::gran1_gates<T>(                      \
      const ParameterSet<T>&, const TokenSequence&) const;

PARASENT_INSTANTIATE(float)
PARASENT_INSTANTIATE(double)
PARASENT_INSTANTIATE(long double)

#undef PARASENT_INSTANTIATE

}  // namespace parasent
