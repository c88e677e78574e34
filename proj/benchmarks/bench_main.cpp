#include <benchmark/benchmark.h>

#include <vector>

#include "parasent/encoders.h"
#include "parasent/tape.h"
#include "parasent/transfer.h"

namespace {

using namespace parasent;

constexpr std::size_t kVocab = 2000;

ParameterSet<float> make_params(const Encoder& enc, std::size_t dim) {
  Rng rng(1);
  ParameterSet<float> ps;
  Matrix<float> w(kVocab, dim);
  for (auto& v : w.data()) v = static_cast<float>(rng.uniform(-1.0, 1.0));
  ps.add(std::string(kWordEmbeddings), std::move(w));
  enc.add_parameters(ps, rng);
  return ps;
}

TokenSequence sentence(Rng& rng, std::size_t len) {
  TokenSequence s;
  for (std::size_t i = 0; i < len; ++i) {
    s.ids.push_back(static_cast<std::uint32_t>(rng.bounded(kVocab)));
  }
  return s;
}

EncoderKind kind_of(int64_t k) { return static_cast<EncoderKind>(k); }

// args: encoder kind, dimension, sentence length
void BM_Forward(benchmark::State& state) {
  const std::size_t dim = state.range(1);
  const Encoder enc({kind_of(state.range(0))}, dim);
  const auto ps = make_params(enc, dim);
  const auto lay = enc.layout(ps);
  Rng rng(2);
  const auto s = sentence(rng, state.range(2));
  for (auto _ : state) benchmark::DoNotOptimize(enc.embed(ps, lay, s));
  state.SetLabel(to_string(enc.kind()));
}

// Tape build for two sentences, their cosine, and the full backward pass.
void BM_ForwardBackward(benchmark::State& state) {
  const std::size_t dim = state.range(1);
  const Encoder enc({kind_of(state.range(0))}, dim);
  const auto ps = make_params(enc, dim);
  const auto lay = enc.layout(ps);
  auto grads = ps.zeros_like();
  Rng rng(3);
  const auto a = sentence(rng, state.range(2));
  const auto b = sentence(rng, state.range(2));
  for (auto _ : state) {
    Tape<float> tape(ps);
    const auto root = tape.cosine(enc.build(tape, lay, a), enc.build(tape, lay, b));
    grads.set_zero();
    tape.backward(root, grads);
    benchmark::ClobberMemory();
  }
  state.SetLabel(to_string(enc.kind()));
}

void encoder_args(benchmark::internal::Benchmark* b) {
  for (auto k : {EncoderKind::Avg, EncoderKind::LstmAvg, EncoderKind::Gran1,
                 EncoderKind::Gran5}) {
    b->Args({static_cast<int64_t>(k), 300, 20});
  }
  b->Args({static_cast<int64_t>(EncoderKind::Gran1), 50, 20});
}

// args: batch size, dimension
void BM_SelectNegatives(benchmark::State& state) {
  const std::size_t n = state.range(0), dim = state.range(1);
  Rng rng(4);
  std::vector<Vec<float>> first(n, Vec<float>(dim)), second(n, Vec<float>(dim));
  for (auto* side : {&first, &second}) {
    for (auto& v : *side) {
      for (auto& x : v) x = static_cast<float>(rng.normal());
    }
  }
  for (auto _ : state) {
    benchmark::DoNotOptimize(select_negatives<float>(first, second));
  }
}

}  // namespace

BENCHMARK(BM_Forward)->Apply(encoder_args)->Unit(benchmark::kMicrosecond);
BENCHMARK(BM_ForwardBackward)->Apply(encoder_args)->Unit(benchmark::kMicrosecond);
BENCHMARK(BM_SelectNegatives)->Args({100, 300})->Args({25, 300})->Unit(benchmark::kMicrosecond);
BENCHMARK_MAIN();
