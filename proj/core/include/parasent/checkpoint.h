#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "parasent/encoders.h"
#include "parasent/vocab.h"

namespace parasent {

inline constexpr std::string_view kCheckpointHeader = "parasent-ckpt v1";

// Everything needed to re-create an embedding function: encoder
// configuration, tagging flags, vocabulary and parameters (W_w, encoder
// tensors, and optionally the supervised head).
struct Model {
  EncoderConfig encoder;
  SequenceTags tags;
  Vocabulary vocab;
  ParameterSet<float> params;

  std::size_t dim() const { return params[kWordEmbeddings].cols(); }
  Encoder make_encoder() const { return Encoder(encoder, dim()); }
  TokenSequence encode(const std::vector<std::string>& tokens) const {
    return parasent::encode(tokens, tags, vocab);
  }
};

// Text layout:
//   parasent-ckpt v1
//   meta <key> <value>          (encoder, bidirectional, combine, hidden,
//                                sos, eos)
//   vocab <n>                   followed by n lines, one token each
//   <name> <rows> <cols>        followed by `rows` lines of `cols` values
// Values are written in shortest round-trip form, so save/load is exact.
void save_checkpoint(std::ostream& out, const Model& model);
void save_checkpoint(const std::string& path, const Model& model);

Model load_checkpoint(std::istream& in);
Model load_checkpoint(const std::string& path);

}  // namespace parasent
