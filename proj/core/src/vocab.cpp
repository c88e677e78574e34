#include "parasent/vocab.h"

#include <cctype>
#include <charconv>
#include <istream>
#include <string>

#include "parasent/rng.h"

namespace parasent {

std::uint32_t Vocabulary::add(const std::string& token) {
  auto [it, inserted] =
      index_.emplace(token, static_cast<std::uint32_t>(tokens_.size()));
  if (inserted) tokens_.push_back(token);
  return it->second;
}

std::int64_t Vocabulary::find(std::string_view token) const {
  auto it = index_.find(std::string(token));
  return it == index_.end() ? -1 : static_cast<std::int64_t>(it->second);
}

TokenSequence TokenSequence::reversed() const {
  TokenSequence out;
  out.ids.assign(ids.rbegin(), ids.rend());
  out.surface.assign(surface.rbegin(), surface.rend());
  return out;
}

TokenSequence TokenSequence::subset(
    const std::vector<std::size_t>& positions) const {
  TokenSequence out;
  out.ids.reserve(positions.size());
  for (auto p : positions) {
    out.ids.push_back(ids.at(p));
    if (p < surface.size()) out.surface.push_back(surface[p]);
  }
  return out;
}

EmbeddingTable::EmbeddingTable(Vocabulary vocab, Matrix<float> vectors)
    : vocab_(std::move(vocab)), vectors_(std::move(vectors)) {
  if (vocab_.size() != vectors_.rows()) {
    throw DimensionError("vocabulary size " + std::to_string(vocab_.size()) +
                         " != embedding rows " +
                         std::to_string(vectors_.rows()));
  }
  auto reserved = [this](std::string_view t) {
    const auto i = vocab_.find(t);
    if (i < 0) {
      throw FormatError("embedding table lacks reserved token " +
                        std::string(t));
    }
    return static_cast<std::uint32_t>(i);
  };
  unk_ = reserved(kUnkToken);
  sos_ = reserved(kSosToken);
  eos_ = reserved(kEosToken);
  initial_ = vectors_;
}

std::vector<std::string> split_tokens(std::string_view line) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (start <= line.size()) {
    const auto end = line.find(' ', start);
    const auto stop = end == std::string_view::npos ? line.size() : end;
    if (stop > start) out.emplace_back(line.substr(start, stop - start));
    if (end == std::string_view::npos) break;
    start = end + 1;
  }
  return out;
}

std::string to_lower(std::string_view s) {
  std::string out(s);
  for (auto& c : out) {
    c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  }
  return out;
}

EmbeddingTable load_embeddings(std::istream& in, const LoadOptions& options,
                               std::vector<std::string>* warnings) {
  Vocabulary vocab;
  std::vector<std::vector<float>> rows;
  std::size_t dim = 0;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    const auto fields = split_tokens(line);
    if (fields.empty()) continue;
    if (fields.size() < 2) {
      throw FormatError("expected a token followed by vector values", line_no);
    }
    std::vector<float> values;
    values.reserve(fields.size() - 1);
    for (std::size_t k = 1; k < fields.size(); ++k) {
      float v = 0.0f;
      const auto& f = fields[k];
      const auto [ptr, ec] = std::from_chars(f.data(), f.data() + f.size(), v);
      if (ec != std::errc() || ptr != f.data() + f.size()) {
        throw FormatError("non-numeric field '" + f + "'", line_no);
      }
      values.push_back(v);
    }
    if (dim == 0) {
      dim = values.size();
    } else if (values.size() != dim) {
      throw FormatError("inconsistent dimension: expected " +
                            std::to_string(dim) + ", got " +
                            std::to_string(values.size()),
                        line_no);
    }
    const auto before = vocab.size();
    const auto idx = vocab.add(fields[0]);
    if (vocab.size() == before) {
      if (warnings) {
        warnings->push_back("line " + std::to_string(line_no) +
                            ": duplicate token '" + fields[0] +
                            "', last occurrence wins");
      }
      rows[idx] = std::move(values);
    } else {
      rows.push_back(std::move(values));
    }
  }
  if (rows.empty()) throw FormatError("no embeddings loaded");
  for (auto reserved : {kUnkToken, kSosToken, kEosToken}) {
    if (vocab.find(reserved) >= 0) {
      throw FormatError("embedding file may not define reserved token " +
                        std::string(reserved));
    }
  }

  std::vector<double> mean(dim, 0.0);
  for (const auto& r : rows) {
    for (std::size_t j = 0; j < dim; ++j) mean[j] += r[j];
  }
  for (auto& m : mean) m /= static_cast<double>(rows.size());

  Rng rng(options.seed);
  const std::size_t loaded = rows.size();
  Matrix<float> vectors(loaded + 3, dim);
  for (std::size_t i = 0; i < loaded; ++i) {
    std::copy(rows[i].begin(), rows[i].end(), vectors.row(i).begin());
  }
  vocab.add(std::string(kUnkToken));
  vocab.add(std::string(kSosToken));
  vocab.add(std::string(kEosToken));
  for (std::size_t j = 0; j < dim; ++j) {
    vectors(loaded, j) = static_cast<float>(mean[j]);
  }
  for (std::size_t r = loaded + 1; r < loaded + 3; ++r) {
    for (std::size_t j = 0; j < dim; ++j) {
      vectors(r, j) =
          static_cast<float>(mean[j] + options.tag_noise * rng.normal());
    }
  }
  return EmbeddingTable(std::move(vocab), std::move(vectors));
}

EmbeddingTable restore_embeddings(Vocabulary vocab, Matrix<float> vectors) {
  return EmbeddingTable(std::move(vocab), std::move(vectors));
}

namespace {

TokenSequence encode_with(const std::vector<std::string>& tokens,
                          SequenceTags tags, const Vocabulary& vocab,
                          std::uint32_t unk, std::uint32_t sos,
                          std::uint32_t eos) {
  if (tokens.empty() && !tags.sos && !tags.eos) {
    throw FormatError("empty sentence");
  }
  TokenSequence seq;
  seq.ids.reserve(tokens.size() + 2);
  if (tags.sos) {
    seq.ids.push_back(sos);
    seq.surface.emplace_back(kSosToken);
  }
  for (const auto& t : tokens) {
    const auto i = vocab.find(to_lower(t));
    seq.ids.push_back(i < 0 ? unk : static_cast<std::uint32_t>(i));
    seq.surface.push_back(t);
  }
  if (tags.eos) {
    seq.ids.push_back(eos);
    seq.surface.emplace_back(kEosToken);
  }
  return seq;
}

std::uint32_t reserved_index(const Vocabulary& vocab, std::string_view t) {
  const auto i = vocab.find(t);
  if (i < 0) {
    throw FormatError("vocabulary lacks reserved token " + std::string(t));
  }
  return static_cast<std::uint32_t>(i);
}

}  // namespace

TokenSequence encode(const std::vector<std::string>& tokens, SequenceTags tags,
                     const EmbeddingTable& table) {
  return encode_with(tokens, tags, table.vocab(), table.unk_index(),
                     table.sos_index(), table.eos_index());
}

TokenSequence encode(const std::vector<std::string>& tokens, SequenceTags tags,
                     const Vocabulary& vocab) {
  return encode_with(tokens, tags, vocab, reserved_index(vocab, kUnkToken),
                     reserved_index(vocab, kSosToken),
                     reserved_index(vocab, kEosToken));
}

}  // namespace parasent
