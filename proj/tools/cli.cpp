#include "cli.h"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <istream>
#include <ostream>
#include <optional>
#include <set>
#include <sstream>

#include "CLI11.hpp"
#include "parasent/checkpoint.h"
#include "parasent/corpus.h"
#include "parasent/eval.h"
#include "parasent/gates.h"
#include "parasent/gradcheck.h"
#include "parasent/supervised.h"
#include "parasent/transfer.h"

namespace parasent::cli {

const std::vector<KeySpec>& config_keys() {
  static const std::vector<KeySpec> keys = {
      {"embeddings", "", "word vector file (token v1 ... vd)"},
      {"corpus", "", "paraphrase pair TSV for transfer training"},
      {"train", "", "scored pair TSV for supervised training"},
      {"dev", "", "scored pair TSV for dev-based epoch selection"},
      {"checkpoint", "", "checkpoint to read"},
      {"checkpoints", "", "comma-separated checkpoints to evaluate"},
      {"manifest", "", "evaluation manifest (group: file, ...)"},
      {"input", "", "one pre-tokenized sentence per line"},
      {"tagged", "", "tagged corpus (ID FORM POS HEAD DEPREL)"},
      {"output", "", "output path (checkpoint or table); stdout if empty"},
      {"report", "", "evaluation TSV report path"},
      {"encoder", "avg", "avg, lstm, lstm-avg, gran1..gran5"},
      {"bidirectional", "false", "run the recurrence in both directions"},
      {"combine", "sum", "bidirectional combination: sum or tanh"},
      {"hidden", "0", "recurrent state size (0 = embedding dimension)"},
      {"sos", "false", "prepend the start-of-sentence token"},
      {"eos", "false", "append the end-of-sentence token"},
      {"delta", "0.4", "margin of the hinge loss"},
      {"lambda_c", "0", "L2 weight on compositional parameters"},
      {"lambda_w", "0", "weight of the word-vector drift penalty"},
      {"dropout", "0", "embedding dropout rate"},
      {"word_dropout", "0", "word dropout rate"},
      {"scramble", "0", "probability of scrambling a training pair"},
      {"epochs", "1", "training epochs"},
      {"batch_size", "", "mini-batch size (100 transfer, 25 supervised)"},
      {"lr", "0.001", "Adam learning rate"},
      {"beta1", "0.9", "Adam beta1"},
      {"beta2", "0.999", "Adam beta2"},
      {"epsilon", "1e-8", "Adam epsilon"},
      {"seed", "1", "random seed"},
      {"head_hidden", "50", "hidden size of the similarity head"},
      {"classes", "5", "score classes K of the similarity head"},
      {"selection", "oracle", "model selection: test or oracle"},
      {"held_out", "", "manifest group used for test selection"},
      {"dim", "6", "gradcheck word-vector dimension"},
      {"loss", "both", "gradcheck loss: margin, kl or both"},
      {"instances", "1", "gradcheck instances (seeds seed, seed+1, ...)"},
      {"coordinates", "0", "gradcheck coordinates per instance (0 = all)"},
      {"group_by", "pos", "gate aggregation key: pos, dep or pos-dep"},
      {"token_cap", "15", "skip tagged sentences longer than this"},
      {"top", "0", "keep the k highest-norm keys (0 with bottom 0 = all)"},
      {"bottom", "0", "keep the k lowest-norm keys"},
  };
  return keys;
}

namespace {

const KeySpec* find_key(const std::string& name) {
  for (const auto& k : config_keys()) {
    if (name == k.name) return &k;
  }
  return nullptr;
}

std::string valid_key_list() {
  std::string out;
  for (const auto& k : config_keys()) {
    if (!out.empty()) out += ", ";
    out += k.name;
  }
  return out;
}

std::string trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return std::string(s.substr(first, last - first + 1));
}

}  // namespace

std::map<std::string, std::string> parse_config(std::istream& in) {
  std::map<std::string, std::string> values;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto body = trim(std::string_view(line).substr(0, line.find('#')));
    if (body.empty()) continue;
    const auto eq = body.find('=');
    if (eq == std::string::npos) {
      throw ConfigError("config line " + std::to_string(line_no) +
                        ": expected 'key = value'");
    }
    const auto key = trim(std::string_view(body).substr(0, eq));
    if (!find_key(key)) {
      throw ConfigError("config line " + std::to_string(line_no) +
                        ": unknown key '" + key + "' (valid keys: " +
                        valid_key_list() + ")");
    }
    values[key] = trim(std::string_view(body).substr(eq + 1));
  }
  return values;
}

namespace {

// Keys each command reads, in echo order.
const std::map<std::string, std::vector<std::string>>& command_keys() {
  static const std::vector<std::string> encoder = {
      "encoder", "bidirectional", "combine", "hidden", "sos", "eos"};
  static const std::vector<std::string> optim = {
      "lambda_c", "lambda_w", "dropout", "word_dropout", "scramble", "epochs",
      "batch_size", "lr", "beta1", "beta2", "epsilon", "seed"};
  auto join = [](std::initializer_list<std::vector<std::string>> parts) {
    std::vector<std::string> out;
    for (const auto& p : parts) out.insert(out.end(), p.begin(), p.end());
    return out;
  };
  static const std::map<std::string, std::vector<std::string>> keys = {
      {"train-transfer",
       join({{"embeddings", "corpus", "output"}, encoder, {"delta"}, optim})},
      {"train-supervised",
       join({{"train", "dev", "embeddings", "checkpoint", "output"}, encoder,
             optim, {"head_hidden", "classes"}})},
      {"evaluate", {"checkpoints", "manifest", "selection", "held_out",
                    "report", "seed"}},
      {"embed", {"checkpoint", "input", "output", "seed"}},
      {"gradcheck", {"encoder", "bidirectional", "combine", "dim", "loss",
                     "instances", "coordinates", "seed"}},
      {"analyze-gates", {"checkpoint", "tagged", "group_by", "token_cap",
                         "top", "bottom", "output", "seed"}},
  };
  return keys;
}

const std::map<std::string, std::string>& command_help() {
  static const std::map<std::string, std::string> help = {
      {"train-transfer", "margin-based training on a paraphrase corpus"},
      {"train-supervised", "KL training of the similarity head and encoder"},
      {"evaluate", "correlations of checkpoints on STS-style datasets"},
      {"embed", "print one sentence embedding per input line"},
      {"gradcheck", "finite-difference check of the analytic gradients"},
      {"analyze-gates", "average GRAN gate L1 norms by tag or label"},
  };
  return help;
}

class Settings {
 public:
  Settings(std::string command, std::map<std::string, std::string> values,
           std::set<std::string> explicit_keys)
      : command_(std::move(command)),
        values_(std::move(values)),
        explicit_(std::move(explicit_keys)) {}

  const std::string& command() const { return command_; }
  bool is_explicit(const std::string& key) const {
    return explicit_.count(key) > 0;
  }

  const std::string& str(const std::string& key) const {
    auto it = values_.find(key);
    if (it == values_.end()) throw ConfigError("internal: no key " + key);
    return it->second;
  }

  const std::string& required(const std::string& key) const {
    const auto& v = str(key);
    if (v.empty()) {
      throw UsageError(command_ + ": missing required option --" + key);
    }
    return v;
  }

  double real(const std::string& key) const {
    const auto& v = str(key);
    double out = 0.0;
    const auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
    if (ec != std::errc() || p != v.data() + v.size() || !std::isfinite(out)) {
      throw ConfigError(key + ": expected a number, got '" + v + "'");
    }
    return out;
  }

  std::uint64_t integer(const std::string& key) const {
    const auto& v = str(key);
    std::uint64_t out = 0;
    const auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
    if (ec != std::errc() || p != v.data() + v.size()) {
      throw ConfigError(key + ": expected a non-negative integer, got '" + v +
                        "'");
    }
    return out;
  }

  bool boolean(const std::string& key) const {
    const auto v = to_lower(str(key));
    if (v == "true" || v == "1" || v == "yes" || v == "on") return true;
    if (v == "false" || v == "0" || v == "no" || v == "off") return false;
    throw ConfigError(key + ": expected true or false, got '" + str(key) +
                      "'");
  }

  double rate(const std::string& key, bool allow_one = true) const {
    const double r = real(key);
    if (r < 0.0 || r > 1.0 || (!allow_one && r == 1.0)) {
      throw ConfigError(key + " must lie in [0, 1" + (allow_one ? "]" : ")") +
                        ", got " + str(key));
    }
    return r;
  }

  void echo(std::ostream& err) const {
    err << "# parasent " << command_ << " effective config ("
        << Rng::kAlgorithm << ")\n";
    for (const auto& key : command_keys().at(command_)) {
      err << key << " = " << values_.at(key) << '\n';
    }
  }

 private:
  std::string command_;
  std::map<std::string, std::string> values_;
  std::set<std::string> explicit_;
};

std::ifstream open_input(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open '" + path + "'");
  return in;
}

template <class Fn>
auto with_file(const std::string& path, Fn&& fn) {
  auto in = open_input(path);
  try {
    return fn(in);
  } catch (const FormatError& e) {
    throw FormatError(path + ": " + e.what());
  }
}

// Writes to `path`, or to `fallback` when the path is empty.
template <class Fn>
void with_output(const std::string& path, std::ostream& fallback, Fn&& fn) {
  if (path.empty()) {
    fn(fallback);
    return;
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write '" + path + "'");
  fn(out);
  out.flush();
  if (!out) throw Error("error writing '" + path + "'");
}

std::string exact(double v) {
  char buf[64];
  const auto r = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, r.ptr);
}

std::string exact(float v) {
  char buf[64];
  const auto r = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, r.ptr);
}

EncoderConfig encoder_config(const Settings& s) {
  EncoderConfig c;
  c.kind = parse_encoder_kind(s.str("encoder"));
  c.bidirectional = s.boolean("bidirectional");
  c.combine = parse_combine_mode(s.str("combine"));
  if (s.command() != "gradcheck") c.hidden = s.integer("hidden");
  return c;
}

SequenceTags tags(const Settings& s) { return {s.boolean("sos"), s.boolean("eos")}; }

AdamConfig adam(const Settings& s) {
  AdamConfig a;
  a.learning_rate = s.real("lr");
  a.beta1 = s.real("beta1");
  a.beta2 = s.real("beta2");
  a.epsilon = s.real("epsilon");
  if (a.learning_rate <= 0.0) throw ConfigError("lr must be positive");
  if (a.beta1 < 0.0 || a.beta1 >= 1.0 || a.beta2 < 0.0 || a.beta2 >= 1.0) {
    throw ConfigError("beta1 and beta2 must lie in [0, 1)");
  }
  if (a.epsilon <= 0.0) throw ConfigError("epsilon must be positive");
  return a;
}

std::size_t batch_size(const Settings& s, std::size_t fallback) {
  return s.str("batch_size").empty() ? fallback
                                     : static_cast<std::size_t>(s.integer("batch_size"));
}

int epochs(const Settings& s) {
  const auto e = s.integer("epochs");
  if (e > 1000000) throw ConfigError("epochs is unreasonably large");
  return static_cast<int>(e);
}

EmbeddingTable load_table(const Settings& s, std::ostream& err) {
  std::vector<std::string> warnings;
  LoadOptions opts;
  opts.seed = s.integer("seed");
  auto table = with_file(s.required("embeddings"), [&](std::istream& in) {
    return load_embeddings(in, opts, &warnings);
  });
  for (const auto& w : warnings) err << "warning: " << w << '\n';
  err << "# loaded " << table.size() - 3 << " vectors of dimension "
      << table.dim() << '\n';
  return table;
}

void write_epoch(std::ostream& out, const std::string& what, int epoch,
                 double value) {
  out << "epoch " << epoch << ' ' << what << ' ' << exact(value) << '\n';
}

int cmd_train_transfer(const Settings& s, std::ostream& out,
                       std::ostream& err) {
  const auto output = s.required("output");
  const auto corpus_path = s.required("corpus");
  TransferConfig cfg;
  cfg.margin = s.real("delta");
  if (cfg.margin != 0.4 && cfg.margin != 0.6 && cfg.margin != 0.8) {
    err << "warning: delta " << s.str("delta")
        << " is outside the default grid {0.4, 0.6, 0.8}\n";
  }
  cfg.penalty = {s.real("lambda_c"), s.real("lambda_w")};
  cfg.dropout = s.rate("dropout", false);
  cfg.word_dropout = s.rate("word_dropout");
  cfg.scramble = s.rate("scramble");
  cfg.epochs = epochs(s);
  cfg.batch_size = batch_size(s, 100);
  cfg.adam = adam(s);
  cfg.seed = s.integer("seed");

  auto table = load_table(s, err);
  Model model;
  model.encoder = encoder_config(s);
  model.tags = tags(s);
  model.vocab = table.vocab();
  const auto encoder = Encoder(model.encoder, table.dim());

  const auto raw = with_file(corpus_path, [](std::istream& in) {
    return read_pair_corpus(in);
  });
  const auto pairs = encode_pairs(raw, model.tags, model.vocab);
  err << "# " << pairs.size() << " training pairs\n";

  ParameterSet<float> params;
  params.add(std::string(kWordEmbeddings), table.vectors());
  Rng init = Rng(cfg.seed).fork();
  encoder.add_parameters(params, init);

  auto result = train_transfer(
      pairs, cfg, encoder, std::move(params), table.initial(),
      [&](int epoch, double loss) { write_epoch(out, "loss", epoch, loss); });
  model.params = std::move(result.params);
  save_checkpoint(output, model);
  err << "# wrote " << output << '\n';
  return kOk;
}

void require_match(const Settings& s, const std::string& key,
                   const std::string& from_checkpoint, bool same) {
  if (s.is_explicit(key) && !same) {
    throw ConfigError("checkpoint/encoder mismatch: " + key + " = " +
                      s.str(key) + " but the checkpoint has " +
                      from_checkpoint);
  }
}

int cmd_train_supervised(const Settings& s, std::ostream& out,
                         std::ostream& err) {
  const auto output = s.required("output");
  const auto train_path = s.required("train");
  const bool universal = !s.str("checkpoint").empty();
  if (universal == !s.str("embeddings").empty()) {
    throw UsageError(
        "train-supervised: give exactly one of --embeddings (fresh) or "
        "--checkpoint (universal)");
  }
  SupervisedConfig cfg;
  cfg.head.hidden = s.integer("head_hidden");
  cfg.head.classes = s.integer("classes");
  if (cfg.head.hidden == 0) throw ConfigError("head_hidden must be positive");
  if (cfg.head.classes < 2) throw ConfigError("classes must be >= 2");
  cfg.penalty = {s.real("lambda_c"), s.real("lambda_w")};
  cfg.dropout = s.rate("dropout", false);
  cfg.word_dropout = s.rate("word_dropout");
  cfg.scramble = s.rate("scramble");
  cfg.epochs = epochs(s);
  cfg.batch_size = batch_size(s, 25);
  cfg.adam = adam(s);
  cfg.seed = s.integer("seed");

  Model model;
  Matrix<float> initial_words;
  std::optional<ParameterSet<float>> anchor_set;
  if (universal) {
    model = load_checkpoint(s.str("checkpoint"));
    const auto requested = encoder_config(s);
    const auto& have = model.encoder;
    require_match(s, "encoder", to_string(have.kind),
                  requested.kind == have.kind);
    require_match(s, "bidirectional", have.bidirectional ? "true" : "false",
                  requested.bidirectional == have.bidirectional);
    require_match(s, "combine", to_string(have.combine),
                  requested.combine == have.combine);
    require_match(s, "hidden", std::to_string(have.hidden),
                  requested.hidden == have.hidden);
    const auto t = tags(s);
    require_match(s, "sos", model.tags.sos ? "true" : "false",
                  t.sos == model.tags.sos);
    require_match(s, "eos", model.tags.eos ? "true" : "false",
                  t.eos == model.tags.eos);
    initial_words = model.params[kWordEmbeddings];
    anchor_set = model.params;
    err << "# universal setting: anchored to " << s.str("checkpoint") << '\n';
  } else {
    auto table = load_table(s, err);
    model.encoder = encoder_config(s);
    model.tags = tags(s);
    model.vocab = table.vocab();
    model.params.add(std::string(kWordEmbeddings), table.vectors());
    Rng init = Rng(cfg.seed).fork();
    Encoder(model.encoder, table.dim()).add_parameters(model.params, init);
    initial_words = table.initial();
  }
  const auto encoder = model.make_encoder();

  auto load_scored = [&](const std::string& path) {
    const auto raw =
        with_file(path, [](std::istream& in) { return read_scored_pairs(in); });
    return encode_scored_pairs(raw, model.tags, model.vocab, cfg.head.classes);
  };
  const auto train = load_scored(train_path);
  const auto dev = s.str("dev").empty() ? std::vector<ScoredPair>{}
                                        : load_scored(s.str("dev"));
  err << "# " << train.size() << " training pairs, " << dev.size()
      << " dev pairs\n";

  const Anchors<float> anchors{anchor_set ? &*anchor_set : nullptr,
                               &initial_words};
  auto result =
      train_supervised(train, dev, cfg, encoder, std::move(model.params), anchors);
  for (std::size_t e = 0; e < result.train_loss.size(); ++e) {
    write_epoch(out, "loss", static_cast<int>(e + 1), result.train_loss[e]);
    if (e < result.dev_pearson.size()) {
      write_epoch(out, "dev_pearson", static_cast<int>(e + 1),
                  result.dev_pearson[e]);
    }
  }
  if (result.best_epoch > 0) out << "best_epoch " << result.best_epoch << '\n';
  model.params = std::move(result.params);

  if (train.size() >= 2) {
    const auto predicted = predict_scores(encoder, model.params, train);
    std::vector<double> gold;
    for (const auto& p : train) gold.push_back(p.score);
    try {
      out << "train_pearson " << exact(pearson_r(predicted, gold)) << '\n';
    } catch (const NumericalError&) {
      out << "train_pearson nan\n";
    }
  }
  save_checkpoint(output, model);
  err << "# wrote " << output << '\n';
  return kOk;
}

std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::stringstream in(s);
  std::string item;
  while (std::getline(in, item, ',')) {
    auto t = trim(item);
    if (!t.empty()) out.push_back(std::move(t));
  }
  return out;
}

int cmd_evaluate(const Settings& s, std::ostream& out, std::ostream& err) {
  const auto checkpoints = split_list(s.required("checkpoints"));
  if (checkpoints.empty()) throw UsageError("evaluate: no checkpoints given");
  const auto manifest_path = s.required("manifest");
  const auto mode = parse_selection_mode(s.str("selection"));
  const auto manifest = with_file(
      manifest_path, [](std::istream& in) { return parse_manifest(in); });
  const auto base = std::filesystem::path(manifest_path).parent_path();

  std::vector<std::pair<std::string, std::vector<RawPair>>> raw;
  for (const auto& g : manifest.groups) {
    for (const auto& f : g.files) {
      const auto path = (base / f).string();
      raw.emplace_back(f, with_file(path, [](std::istream& in) {
                         return read_scored_pairs(in);
                       }));
    }
  }

  std::vector<EvalReport> reports;
  for (const auto& ck : checkpoints) {
    const auto model = load_checkpoint(ck);
    const auto encoder = model.make_encoder();
    std::vector<EvalDataset> datasets;
    for (const auto& [name, pairs] : raw) {
      datasets.push_back(
          encode_eval_dataset(name, pairs, model.tags, model.vocab));
    }
    reports.push_back(
        evaluate_datasets(ck, datasets, manifest, encoder, model.params));
  }
  const auto selection = aggregate(reports, mode, manifest, s.str("held_out"));
  write_report_text(out, reports, manifest, &selection, mode);
  out << "selected " << reports[selection.winner].configuration << " by "
      << to_string(mode) << " criterion over "
      << selection.selection_datasets.size() << " datasets\n";
  if (!s.str("report").empty()) {
    with_output(s.str("report"), out,
                [&](std::ostream& o) { write_report_tsv(o, reports); });
    err << "# wrote " << s.str("report") << '\n';
  }
  return kOk;
}

int cmd_embed(const Settings& s, std::ostream& out, std::ostream&) {
  const auto model = load_checkpoint(s.required("checkpoint"));
  const auto encoder = model.make_encoder();
  const auto lay = encoder.layout(model.params);
  auto in = open_input(s.required("input"));
  with_output(s.str("output"), out, [&](std::ostream& o) {
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
      ++line_no;
      if (!line.empty() && line.back() == '\r') line.pop_back();
      TokenSequence seq;
      try {
        seq = model.encode(split_tokens(line));
      } catch (const FormatError& e) {
        throw FormatError(s.str("input") + ": " + e.what(), line_no);
      }
      const auto v = encoder.embed(model.params, lay, seq);
      for (std::size_t j = 0; j < v.size(); ++j) {
        if (j) o << ' ';
        o << exact(v[j]);
      }
      o << '\n';
    }
  });
  return kOk;
}

int cmd_gradcheck(const Settings& s, std::ostream& out, std::ostream&) {
  const auto enc = encoder_config(s);
  const auto dim = static_cast<std::size_t>(s.integer("dim"));
  const auto instances = s.integer("instances");
  const auto seed = s.integer("seed");
  if (instances == 0) throw ConfigError("instances must be >= 1");
  std::vector<LossKind> losses;
  const auto loss = to_lower(s.str("loss"));
  if (loss == "margin" || loss == "both") losses.push_back(LossKind::Margin);
  if (loss == "kl" || loss == "both") losses.push_back(LossKind::Kl);
  if (losses.empty()) {
    throw ConfigError("loss must be margin, kl or both, got '" + s.str("loss") +
                      "'");
  }
  FdOptions fd;
  fd.max_coordinates = s.integer("coordinates");
  fd.seed = seed;

  bool ok = true;
  for (auto l : losses) {
    GradReport total;
    for (std::uint64_t i = 0; i < instances; ++i) {
      const auto inst = make_instance(enc, l, dim, seed + i);
      const auto r = fd_check(inst.objective, inst.params,
                              inst.gradient(inst.params), fd);
      out << inst.description << ": max_rel " << std::scientific
          << std::setprecision(3) << r.max_rel << std::defaultfloat
          << (r.passed() ? " ok" : " FAIL") << '\n';
      total.merge(r);
    }
    out << "== " << to_string(l) << " loss\n";
    write_grad_report(out, total);
    ok = ok && total.passed();
  }
  out << (ok ? "PASS" : "FAIL") << " (tolerance 1e-4)\n";
  return ok ? kOk : kNumerical;
}

int cmd_analyze_gates(const Settings& s, std::ostream& out,
                      std::ostream& err) {
  const auto model = load_checkpoint(s.required("checkpoint"));
  const auto group_by = parse_group_by(s.str("group_by"));
  const auto cap = static_cast<std::size_t>(s.integer("token_cap"));
  const auto corpus = with_file(s.required("tagged"), [&](std::istream& in) {
    return load_tagged_corpus(in, cap);
  });
  err << "# " << corpus.sentences.size() << " sentences, " << corpus.skipped
      << " skipped over the " << cap << "-token cap\n";
  auto table = aggregate_norms(corpus.sentences, model, group_by);
  const auto top = s.integer("top");
  const auto bottom = s.integer("bottom");
  if (top > 0 || bottom > 0) {
    const auto n = table.entries.size();
    std::vector<NormEntry> kept;
    for (std::size_t i = 0; i < n; ++i) {
      if (i < top || i + bottom >= n) kept.push_back(table.entries[i]);
    }
    table.entries = std::move(kept);
  }
  with_output(s.str("output"), out,
              [&](std::ostream& o) { write_norm_table(o, table); });
  return kOk;
}

using Command = int (*)(const Settings&, std::ostream&, std::ostream&);

Command command_fn(const std::string& name) {
  if (name == "train-transfer") return cmd_train_transfer;
  if (name == "train-supervised") return cmd_train_supervised;
  if (name == "evaluate") return cmd_evaluate;
  if (name == "embed") return cmd_embed;
  if (name == "gradcheck") return cmd_gradcheck;
  return cmd_analyze_gates;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out,
        std::ostream& err) {
  CLI::App app{"Paraphrastic sentence embeddings: training, evaluation and "
               "analysis",
               "parasent"};
  app.require_subcommand(1, 1);
  app.set_help_all_flag("--help-all", "Show help for every command");

  struct Sub {
    CLI::App* app;
    std::string config;
    std::map<std::string, std::string> flags;
    std::map<std::string, CLI::Option*> options;
  };
  std::map<std::string, Sub> subs;
  for (const auto& [name, keys] : command_keys()) {
    auto& sub = subs[name];
    sub.app = app.add_subcommand(name, command_help().at(name));
    sub.app->add_option("--config", sub.config, "key = value config file");
    for (const auto& key : keys) {
      const auto* spec = find_key(key);
      std::string names = "--" + key;
      if (key.find('_') != std::string::npos) {
        auto dashed = key;
        std::replace(dashed.begin(), dashed.end(), '_', '-');
        names += ",--" + dashed;
      }
      std::string help = spec->help;
      if (*spec->default_value) {
        help += std::string(" [") + spec->default_value + "]";
      }
      sub.options[key] = sub.app->add_option(names, sub.flags[key], help)
                             ->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);
    }
  }

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n\n";
    auto* chosen = app.get_subcommands().empty() ? &app
                                                 : app.get_subcommands()[0];
    err << chosen->help();
    return kUsage;
  }

  auto* chosen = app.get_subcommands().front();
  const auto name = chosen->get_name();
  auto& sub = subs.at(name);
  try {
    std::map<std::string, std::string> values;
    std::set<std::string> explicit_keys;
    for (const auto& key : command_keys().at(name)) {
      values[key] = find_key(key)->default_value;
    }
    if (!sub.config.empty()) {
      auto in = open_input(sub.config);
      for (auto& [k, v] : parse_config(in)) {
        // Keys that this command does not read are accepted and ignored so
        // one file can drive several commands.
        if (values.count(k)) {
          values[k] = v;
          explicit_keys.insert(k);
        }
      }
    }
    for (const auto& [key, opt] : sub.options) {
      if (opt->count() > 0) {
        values[key] = sub.flags[key];
        explicit_keys.insert(key);
      }
    }
    const Settings settings(name, std::move(values), std::move(explicit_keys));
    settings.echo(err);
    return command_fn(name)(settings, out, err);
  } catch (const UsageError& e) {
    err << "error: " << e.what() << "\n\n" << chosen->help();
    return kUsage;
  } catch (const NumericalError& e) {
    err << "numerical error: " << e.what() << '\n';
    return kNumerical;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kDataError;
  }
}

}  // namespace parasent::cli
