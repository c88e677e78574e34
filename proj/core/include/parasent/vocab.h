#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "parasent/numeric.h"

namespace parasent {

inline constexpr std::string_view kUnkToken = "<unk>";
inline constexpr std::string_view kSosToken = "<s>";
inline constexpr std::string_view kEosToken = "</s>";

class Vocabulary {
 public:
  std::uint32_t add(const std::string& token);
  // Index of `token` or -1.
  std::int64_t find(std::string_view token) const;
  const std::string& token(std::uint32_t i) const { return tokens_.at(i); }
  std::size_t size() const noexcept { return tokens_.size(); }
  const std::vector<std::string>& tokens() const noexcept { return tokens_; }

 private:
  std::vector<std::string> tokens_;
  std::unordered_map<std::string, std::uint32_t> index_;
};

struct TokenSequence {
  std::vector<std::uint32_t> ids;
  // Surface tokens as given (before lowercasing); includes the tag strings
  // for SOS/EOS positions.
  std::vector<std::string> surface;

  std::size_t size() const noexcept { return ids.size(); }
  bool empty() const noexcept { return ids.empty(); }

  TokenSequence reversed() const;
  TokenSequence subset(const std::vector<std::size_t>& positions) const;
};

struct SequenceTags {
  bool sos = false;
  bool eos = false;
};

// Vocabulary plus the trainable embedding matrix and a frozen snapshot of
// its initial value. Three reserved rows are appended after the loaded
// vectors: UNK, SOS and EOS.
class EmbeddingTable {
 public:
  EmbeddingTable(Vocabulary vocab, Matrix<float> vectors);

  const Vocabulary& vocab() const noexcept { return vocab_; }
  std::size_t dim() const noexcept { return vectors_.cols(); }
  std::size_t size() const noexcept { return vectors_.rows(); }

  Matrix<float>& vectors() noexcept { return vectors_; }
  const Matrix<float>& vectors() const noexcept { return vectors_; }
  const Matrix<float>& initial() const noexcept { return initial_; }

  std::uint32_t unk_index() const noexcept { return unk_; }
  std::uint32_t sos_index() const noexcept { return sos_; }
  std::uint32_t eos_index() const noexcept { return eos_; }

 private:
  Vocabulary vocab_;
  Matrix<float> vectors_;
  Matrix<float> initial_;
  std::uint32_t unk_ = 0;
  std::uint32_t sos_ = 0;
  std::uint32_t eos_ = 0;
};

struct LoadOptions {
  std::uint64_t seed = 1;
  // Std-dev of the noise added to the mean vector for SOS/EOS rows.
  double tag_noise = 0.01;
};

// Reads `token f1 ... fd` lines. Duplicate tokens: last occurrence wins and
// a warning is appended to `warnings`.
EmbeddingTable load_embeddings(std::istream& in, const LoadOptions& options,
                               std::vector<std::string>* warnings = nullptr);

// Builds a table from an existing vocabulary that already contains the
// reserved tokens (checkpoint path). The snapshot equals `vectors`.
EmbeddingTable restore_embeddings(Vocabulary vocab, Matrix<float> vectors);

// Splits a pre-tokenized line on single spaces, skipping empty pieces.
std::vector<std::string> split_tokens(std::string_view line);

std::string to_lower(std::string_view s);

TokenSequence encode(const std::vector<std::string>& tokens, SequenceTags tags,
                     const EmbeddingTable& table);
// Same as above for a bare vocabulary holding the reserved tokens.
TokenSequence encode(const std::vector<std::string>& tokens, SequenceTags tags,
                     const Vocabulary& vocab);

}  // namespace parasent
