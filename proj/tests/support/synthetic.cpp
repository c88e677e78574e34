#include "synthetic.h"

#include <atomic>
#include <charconv>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <unistd.h>

namespace parasent::testing {

std::string SyntheticWorld::embedding_text() const {
  std::string out;
  char buf[64];
  for (std::size_t w = 0; w < words.size(); ++w) {
    out += words[w];
    for (double v : vectors[w]) {
      const auto r = std::to_chars(buf, buf + sizeof buf, static_cast<float>(v));
      out += ' ';
      out.append(buf, r.ptr);
    }
    out += '\n';
  }
  return out;
}

SyntheticWorld make_world(std::size_t groups, std::size_t synonyms,
                          std::size_t dim, std::uint64_t seed) {
  SyntheticWorld w;
  w.groups = groups;
  w.synonyms = synonyms;
  w.dim = dim;
  Rng rng(seed);
  for (std::size_t g = 0; g < groups; ++g) {
    for (std::size_t k = 0; k < synonyms; ++k) {
      w.words.push_back("c" + std::to_string(g) + "w" + std::to_string(k));
      std::vector<double> v(dim);
      for (auto& x : v) x = rng.normal() / 2.0;
      w.vectors.push_back(std::move(v));
    }
  }
  return w;
}

std::vector<std::size_t> random_concepts(const SyntheticWorld& world, Rng& rng,
                                         std::size_t min_len,
                                         std::size_t max_len) {
  const auto len = min_len + rng.bounded(max_len - min_len + 1);
  std::vector<std::size_t> c(len);
  for (auto& x : c) x = rng.bounded(world.groups);
  return c;
}

RawSentence realise(const SyntheticWorld& world,
                    const std::vector<std::size_t>& concepts, Rng& rng) {
  RawSentence s;
  for (auto g : concepts) s.push_back(world.word(g, rng.bounded(world.synonyms)));
  return s;
}

std::vector<RawPair> paraphrase_pairs(const SyntheticWorld& world,
                                      std::size_t n, Rng& rng,
                                      std::size_t min_len,
                                      std::size_t max_len) {
  std::vector<RawPair> out;
  for (std::size_t i = 0; i < n; ++i) {
    const auto c = random_concepts(world, rng, min_len, max_len);
    RawSentence a, b;
    for (auto g : c) {
      const auto k = rng.bounded(world.synonyms);
      const auto other = (k + 1 + rng.bounded(world.synonyms - 1)) % world.synonyms;
      a.push_back(world.word(g, k));
      b.push_back(world.word(g, other));
    }
    out.push_back({std::move(a), std::move(b), 0.0});
  }
  return out;
}

std::vector<RawPair> random_pairs(const SyntheticWorld& world, std::size_t n,
                                  Rng& rng, std::size_t min_len,
                                  std::size_t max_len) {
  std::vector<RawPair> out;
  for (std::size_t i = 0; i < n; ++i) {
    auto a = realise(world, random_concepts(world, rng, min_len, max_len), rng);
    auto b = realise(world, random_concepts(world, rng, min_len, max_len), rng);
    out.push_back({std::move(a), std::move(b), 0.0});
  }
  return out;
}

std::vector<RawPair> scored_pairs(const SyntheticWorld& world, std::size_t n,
                                  Rng& rng, std::size_t len) {
  std::vector<RawPair> out;
  for (std::size_t i = 0; i < n; ++i) {
    const auto c = random_concepts(world, rng, len, len);
    const auto keep = rng.bounded(len + 1);
    auto d = c;
    const auto order = seeded_permutation(len, rng);
    for (std::size_t j = keep; j < len; ++j) {
      auto& slot = d[order[j]];
      // Replace with a different concept so the overlap is exactly `keep`.
      slot = (c[order[j]] + 1 + rng.bounded(world.groups - 1)) % world.groups;
    }
    auto a = realise(world, c, rng);
    auto b = realise(world, d, rng);
    out.push_back({std::move(a), std::move(b),
                   5.0 * static_cast<double>(keep) / static_cast<double>(len)});
  }
  return out;
}

std::string pairs_tsv(const std::vector<RawPair>& pairs, bool with_score) {
  std::ostringstream out;
  auto join = [](const RawSentence& s) {
    std::string r;
    for (const auto& t : s) {
      if (!r.empty()) r += ' ';
      r += t;
    }
    return r;
  };
  for (const auto& p : pairs) {
    out << join(p.first) << '\t' << join(p.second);
    if (with_score) out << '\t' << p.score;
    out << '\n';
  }
  return out.str();
}

std::string tagged_corpus_text(const SyntheticWorld& world, std::size_t n,
                               Rng& rng, std::size_t min_len,
                               std::size_t max_len) {
  static const char* pos[] = {"NN", "VB", "JJ", "DT", "IN"};
  static const char* dep[] = {"nsubj", "root", "amod", "det", "prep", "dobj"};
  std::ostringstream out;
  for (std::size_t i = 0; i < n; ++i) {
    const auto c = random_concepts(world, rng, min_len, max_len);
    const auto words = realise(world, c, rng);
    for (std::size_t t = 0; t < words.size(); ++t) {
      const std::size_t head = t == 0 ? 0 : rng.bounded(words.size()) + 1;
      out << t + 1 << '\t' << words[t] << '\t' << pos[c[t] % 5] << '\t'
          << head << '\t' << (t == 0 ? "root" : dep[c[t] % 6]) << '\n';
    }
    out << '\n';
  }
  return out.str();
}

TempDir::TempDir() {
  static std::atomic<unsigned> counter{0};
  const auto base = std::filesystem::temp_directory_path();
  for (;;) {
    path_ = base / ("parasent-test-" + std::to_string(::getpid()) + "-" +
                    std::to_string(counter++));
    if (std::filesystem::create_directory(path_)) break;
  }
}

TempDir::~TempDir() {
  std::error_code ec;
  std::filesystem::remove_all(path_, ec);
}

std::string TempDir::write(const std::string& name,
                           const std::string& text) const {
  const auto p = path_ / name;
  std::ofstream f(p, std::ios::binary);
  f << text;
  if (!f) throw std::runtime_error("cannot write " + p.string());
  return p.string();
}

std::string read_file(const std::filesystem::path& p) {
  std::ifstream f(p, std::ios::binary);
  if (!f) throw std::runtime_error("cannot read " + p.string());
  std::ostringstream s;
  s << f.rdbuf();
  return s.str();
}

EmbeddingTable world_table(const SyntheticWorld& world, std::uint64_t seed) {
  std::istringstream in(world.embedding_text());
  return load_embeddings(in, {.seed = seed});
}

ParameterSet<float> initial_params(const Encoder& encoder,
                                   const EmbeddingTable& table,
                                   std::uint64_t seed) {
  ParameterSet<float> ps;
  ps.add(std::string(kWordEmbeddings), table.vectors());
  Rng rng(seed);
  encoder.add_parameters(ps, rng);
  return ps;
}

Model make_model(const SyntheticWorld& world, const EncoderConfig& config,
                 SequenceTags tags, std::uint64_t seed) {
  const auto table = world_table(world, seed);
  Model m;
  m.encoder = config;
  m.tags = tags;
  m.vocab = table.vocab();
  m.params = initial_params(Encoder(config, table.dim()), table, seed);
  return m;
}

}  // namespace parasent::testing
