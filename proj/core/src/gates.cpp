#include "parasent/gates.h"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <istream>
#include <map>
#include <ostream>

namespace parasent {
namespace {

std::vector<std::string> split_tabs(const std::string& line) {
  std::vector<std::string> out;
  std::size_t start = 0;
  for (;;) {
    const auto tab = line.find('\t', start);
    out.push_back(line.substr(
        start, tab == std::string::npos ? std::string::npos : tab - start));
    if (tab == std::string::npos) break;
    start = tab + 1;
  }
  return out;
}

std::size_t parse_index(const std::string& s, std::size_t line) {
  std::size_t v = 0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size()) {
    throw FormatError("expected an integer, got '" + s + "'", line);
  }
  return v;
}

}  // namespace

TaggedCorpus load_tagged_corpus(std::istream& in, std::size_t token_cap) {
  TaggedCorpus corpus;
  TaggedSentence current;
  std::size_t first_line = 0;

  auto flush = [&]() {
    if (current.tokens.empty()) return;
    const auto n = current.tokens.size();
    for (const auto& t : current.tokens) {
      if (t.head > n) {
        throw FormatError("head index " + std::to_string(t.head) +
                              " outside sentence of length " + std::to_string(n),
                          first_line);
      }
    }
    if (n > token_cap) {
      ++corpus.skipped;
    } else {
      corpus.sentences.push_back(std::move(current));
    }
    current = TaggedSentence{};
  };

  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.find_first_not_of(" \t") == std::string::npos) {
      flush();
      continue;
    }
    const auto cols = split_tabs(line);
    if (cols.size() != 5) {
      throw FormatError("expected 5 tab-separated columns (ID FORM POS HEAD "
                        "DEPREL), got " + std::to_string(cols.size()),
                        line_no);
    }
    if (current.tokens.empty()) first_line = line_no;
    const auto id = parse_index(cols[0], line_no);
    if (id != current.tokens.size() + 1) {
      throw FormatError("token id " + cols[0] + " out of sequence", line_no);
    }
    for (std::size_t c : {1u, 2u, 4u}) {
      if (cols[c].empty()) throw FormatError("empty column", line_no);
    }
    current.tokens.push_back(
        {cols[1], cols[2], parse_index(cols[3], line_no), cols[4]});
  }
  flush();
  return corpus;
}

std::vector<double> gate_l1_per_token(const Encoder& encoder,
                                      const ParameterSet<float>& params,
                                      const TokenSequence& seq) {
  const auto gates = encoder.gran1_gates(params, seq);
  std::vector<double> norms;
  norms.reserve(gates.size());
  for (const auto& g : gates) {
    double n = 0.0;
    for (float v : g) n += std::abs(static_cast<double>(v));
    norms.push_back(n);
  }
  return norms;
}

GroupBy parse_group_by(std::string_view name) {
  const auto n = to_lower(name);
  if (n == "pos") return GroupBy::Pos;
  if (n == "dep") return GroupBy::Dep;
  if (n == "pos-dep" || n == "posxdep" || n == "pos_x_dep") return GroupBy::PosDep;
  throw ConfigError("unknown grouping '" + std::string(name) +
                    "' (expected pos, dep or pos-dep)");
}

std::vector<NormEntry> NormTable::top(std::size_t k) const {
  const auto n = std::min(k, entries.size());
  return {entries.begin(), entries.begin() + static_cast<std::ptrdiff_t>(n)};
}

std::vector<NormEntry> NormTable::bottom(std::size_t k) const {
  const auto n = std::min(k, entries.size());
  return {entries.end() - static_cast<std::ptrdiff_t>(n), entries.end()};
}

NormTable aggregate_norms(const std::vector<TaggedSentence>& sentences,
                          const Model& model, GroupBy group_by) {
  if (sentences.empty()) {
    throw ConfigError("no sentences survived the token cap");
  }
  const auto encoder = model.make_encoder();
  std::map<std::string, NormEntry> acc;
  for (const auto& s : sentences) {
    std::vector<std::string> forms;
    forms.reserve(s.tokens.size());
    for (const auto& t : s.tokens) forms.push_back(t.form);
    const auto seq = model.encode(forms);
    const auto norms = gate_l1_per_token(encoder, model.params, seq);
    const std::size_t offset = model.tags.sos ? 1 : 0;
    for (std::size_t i = 0; i < s.tokens.size(); ++i) {
      const auto& t = s.tokens[i];
      std::string key;
      switch (group_by) {
        case GroupBy::Pos: key = t.pos; break;
        case GroupBy::Dep: key = t.deprel; break;
        case GroupBy::PosDep: key = t.pos + "/" + t.deprel; break;
      }
      auto& e = acc[key];
      e.key = key;
      e.total += norms[i + offset];
      ++e.count;
    }
  }
  NormTable table;
  for (auto& [key, e] : acc) {
    e.mean = e.total / static_cast<double>(e.count);
    table.entries.push_back(e);
  }
  std::stable_sort(table.entries.begin(), table.entries.end(),
                   [](const NormEntry& a, const NormEntry& b) {
                     if (a.mean != b.mean) return a.mean > b.mean;
                     return a.key < b.key;
                   });
  return table;
}

void write_norm_table(std::ostream& out, const NormTable& table) {
  const auto old = out.precision(10);
  for (const auto& e : table.entries) {
    out << e.key << '\t' << e.mean << '\t' << e.count << '\n';
  }
  out.precision(old);
}

}  // namespace parasent
