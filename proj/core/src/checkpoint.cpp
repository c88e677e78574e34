#include "parasent/checkpoint.h"

#include <array>
#include <charconv>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

namespace parasent {
namespace {

void write_float(std::ostream& out, float v) {
  std::array<char, 32> buf{};
  const auto [ptr, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), v);
  out.write(buf.data(), ptr - buf.data());
}

class LineReader {
 public:
  explicit LineReader(std::istream& in) : in_(in) {}

  bool next(std::string& line) {
    if (!std::getline(in_, line)) return false;
    ++line_no_;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    return true;
  }
  std::string require() {
    std::string line;
    if (!next(line)) throw FormatError("unexpected end of checkpoint", line_no_);
    return line;
  }
  std::size_t line_no() const { return line_no_; }

 private:
  std::istream& in_;
  std::size_t line_no_ = 0;
};

std::size_t parse_count(const std::string& s, std::size_t line) {
  std::size_t v = 0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size()) {
    throw FormatError("expected a non-negative integer, got '" + s + "'", line);
  }
  return v;
}

bool parse_flag(const std::string& s, std::size_t line) {
  if (s == "0") return false;
  if (s == "1") return true;
  throw FormatError("expected 0 or 1, got '" + s + "'", line);
}

}  // namespace

void save_checkpoint(std::ostream& out, const Model& model) {
  out << kCheckpointHeader << '\n';
  out << "meta encoder " << to_string(model.encoder.kind) << '\n';
  out << "meta bidirectional " << (model.encoder.bidirectional ? 1 : 0) << '\n';
  out << "meta combine " << to_string(model.encoder.combine) << '\n';
  out << "meta hidden " << model.encoder.hidden << '\n';
  out << "meta sos " << (model.tags.sos ? 1 : 0) << '\n';
  out << "meta eos " << (model.tags.eos ? 1 : 0) << '\n';
  out << "vocab " << model.vocab.size() << '\n';
  for (const auto& t : model.vocab.tokens()) out << t << '\n';
  for (std::size_t i = 0; i < model.params.count(); ++i) {
    const auto& m = model.params[i];
    out << model.params.name(i) << ' ' << m.rows() << ' ' << m.cols() << '\n';
    for (std::size_t r = 0; r < m.rows(); ++r) {
      const auto row = m.row(r);
      for (std::size_t c = 0; c < row.size(); ++c) {
        if (c) out << ' ';
        write_float(out, row[c]);
      }
      out << '\n';
    }
  }
  if (!out) throw Error("failed to write checkpoint");
}

void save_checkpoint(const std::string& path, const Model& model) {
  std::ofstream out(path);
  if (!out) throw Error("cannot open '" + path + "' for writing");
  save_checkpoint(out, model);
}

Model load_checkpoint(std::istream& in) {
  LineReader reader(in);
  std::string line;
  if (!reader.next(line) || line != kCheckpointHeader) {
    throw FormatError("missing '" + std::string(kCheckpointHeader) + "' header",
                      1);
  }
  Model model;
  for (;;) {
    line = reader.require();
    const auto fields = split_tokens(line);
    if (fields.empty()) continue;
    if (fields[0] == "vocab") {
      if (fields.size() != 2) throw FormatError("bad vocab line", reader.line_no());
      const auto n = parse_count(fields[1], reader.line_no());
      for (std::size_t i = 0; i < n; ++i) {
        const auto token = reader.require();
        if (token.empty() || token.find(' ') != std::string::npos) {
          throw FormatError("invalid vocabulary token", reader.line_no());
        }
        if (model.vocab.add(token) != i) {
          throw FormatError("duplicate vocabulary token '" + token + "'",
                            reader.line_no());
        }
      }
      break;
    }
    if (fields[0] != "meta" || fields.size() != 3) {
      throw FormatError("expected 'meta <key> <value>' or 'vocab <n>'",
                        reader.line_no());
    }
    const auto& key = fields[1];
    const auto& value = fields[2];
    try {
      if (key == "encoder") {
        model.encoder.kind = parse_encoder_kind(value);
      } else if (key == "bidirectional") {
        model.encoder.bidirectional = parse_flag(value, reader.line_no());
      } else if (key == "combine") {
        model.encoder.combine = parse_combine_mode(value);
      } else if (key == "hidden") {
        model.encoder.hidden = parse_count(value, reader.line_no());
      } else if (key == "sos") {
        model.tags.sos = parse_flag(value, reader.line_no());
      } else if (key == "eos") {
        model.tags.eos = parse_flag(value, reader.line_no());
      } else {
        throw FormatError("unknown meta key '" + key + "'", reader.line_no());
      }
    } catch (const ConfigError& e) {
      throw FormatError(e.what(), reader.line_no());
    }
  }

  while (reader.next(line)) {
    const auto header = split_tokens(line);
    if (header.empty()) continue;
    if (header.size() != 3) {
      throw FormatError("expected '<name> <rows> <cols>'", reader.line_no());
    }
    const auto rows = parse_count(header[1], reader.line_no());
    const auto cols = parse_count(header[2], reader.line_no());
    Matrix<float> m(rows, cols);
    for (std::size_t r = 0; r < rows; ++r) {
      const auto values = split_tokens(reader.require());
      if (values.size() != cols) {
        throw FormatError("tensor '" + header[0] + "' row has " +
                              std::to_string(values.size()) + " values, expected " +
                              std::to_string(cols),
                          reader.line_no());
      }
      for (std::size_t c = 0; c < cols; ++c) {
        const auto& f = values[c];
        const auto [ptr, ec] = std::from_chars(f.data(), f.data() + f.size(), m(r, c));
        if (ec != std::errc() || ptr != f.data() + f.size()) {
          throw FormatError("non-numeric value '" + f + "'", reader.line_no());
        }
      }
    }
    try {
      model.params.add(header[0], std::move(m));
    } catch (const ConfigError& e) {
      throw FormatError(e.what(), reader.line_no());
    }
  }

  if (!model.params.contains(kWordEmbeddings)) {
    throw FormatError("checkpoint has no W_w tensor");
  }
  if (model.params[kWordEmbeddings].rows() != model.vocab.size()) {
    throw FormatError("W_w rows do not match vocabulary size");
  }
  // Validates the encoder tensors against the declared configuration, and
  // rejects leftovers that belong to some other encoder.
  try {
    const auto encoder = model.make_encoder();
    encoder.layout(model.params);
    ParameterSet<float> expected;
    Rng unused(0);
    encoder.add_parameters(expected, unused);
    for (std::size_t i = 0; i < model.params.count(); ++i) {
      const auto& name = model.params.name(i);
      if (name == kWordEmbeddings || is_head(name)) continue;
      if (!expected.contains(name)) {
        throw ConfigError("unexpected tensor '" + name + "'");
      }
    }
  } catch (const ConfigError& e) {
    throw FormatError(std::string("checkpoint/encoder mismatch: ") + e.what());
  }
  return model;
}

Model load_checkpoint(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw FormatError("cannot open checkpoint '" + path + "'");
  return load_checkpoint(in);
}

}  // namespace parasent
