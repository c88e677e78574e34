#include "parasent/corpus.h"

#include <charconv>
#include <istream>

namespace parasent {
namespace {

std::vector<std::string> split_tabs(const std::string& line) {
  std::vector<std::string> out;
  std::size_t start = 0;
  for (;;) {
    const auto tab = line.find('\t', start);
    out.push_back(line.substr(start, tab == std::string::npos
                                         ? std::string::npos
                                         : tab - start));
    if (tab == std::string::npos) break;
    start = tab + 1;
  }
  return out;
}

std::vector<RawPair> read_tsv(std::istream& in, std::size_t columns) {
  std::vector<RawPair> out;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto cols = split_tabs(line);
    if (cols.size() != columns) {
      throw FormatError("expected " + std::to_string(columns) +
                            " tab-separated columns, got " +
                            std::to_string(cols.size()),
                        line_no);
    }
    RawPair p;
    p.first = split_tokens(cols[0]);
    p.second = split_tokens(cols[1]);
    if (p.first.empty() || p.second.empty()) {
      throw FormatError("empty sentence", line_no);
    }
    if (columns == 3) {
      const auto& f = cols[2];
      const auto [ptr, ec] =
          std::from_chars(f.data(), f.data() + f.size(), p.score);
      if (ec != std::errc() || ptr != f.data() + f.size()) {
        throw FormatError("non-numeric score '" + f + "'", line_no);
      }
      if (p.score < 0.0 || p.score > 5.0) {
        throw FormatError("gold score outside [0, 5]", line_no);
      }
    }
    out.push_back(std::move(p));
  }
  return out;
}

}  // namespace

std::vector<RawPair> read_pair_corpus(std::istream& in) {
  return read_tsv(in, 2);
}

std::vector<RawPair> read_scored_pairs(std::istream& in) {
  return read_tsv(in, 3);
}

std::vector<SentencePair> encode_pairs(const std::vector<RawPair>& raw,
                                       SequenceTags tags,
                                       const Vocabulary& vocab) {
  std::vector<SentencePair> out;
  out.reserve(raw.size());
  for (const auto& p : raw) {
    out.push_back({encode(p.first, tags, vocab), encode(p.second, tags, vocab)});
  }
  return out;
}

EvalDataset encode_eval_dataset(std::string name,
                                const std::vector<RawPair>& raw,
                                SequenceTags tags, const Vocabulary& vocab) {
  EvalDataset ds;
  ds.name = std::move(name);
  ds.pairs.reserve(raw.size());
  for (const auto& p : raw) {
    ds.pairs.push_back(
        {encode(p.first, tags, vocab), encode(p.second, tags, vocab), p.score});
  }
  return ds;
}

std::vector<ScoredPair> encode_scored_pairs(const std::vector<RawPair>& raw,
                                            SequenceTags tags,
                                            const Vocabulary& vocab,
                                            std::size_t classes) {
  std::vector<ScoredPair> out;
  out.reserve(raw.size());
  for (const auto& p : raw) {
    out.push_back({encode(p.first, tags, vocab), encode(p.second, tags, vocab),
                   gold_to_head_scale(p.score, classes)});
  }
  return out;
}

}  // namespace parasent
