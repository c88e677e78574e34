#include <gtest/gtest.h>

#include <sstream>

#include "cli.h"
#include "synthetic.h"

namespace parasent {
namespace {

struct Result {
  int code;
  std::string out;
  std::string err;
};

Result run(std::vector<std::string> args) {
  std::ostringstream out, err;
  const int code = cli::run(args, out, err);
  return {code, out.str(), err.str()};
}

class Cli : public ::testing::Test {
 protected:
  Cli() : world(testing::make_world(12, 3, 6, 5)) {
    Rng rng(2);
    emb = dir.write("emb.txt", world.embedding_text());
    corpus = dir.write("pairs.tsv",
                       testing::pairs_tsv(testing::paraphrase_pairs(world, 60, rng), false));
    train = dir.write("train.tsv",
                      testing::pairs_tsv(testing::scored_pairs(world, 30, rng), true));
    dev = dir.write("dev.tsv",
                    testing::pairs_tsv(testing::scored_pairs(world, 15, rng), true));
    dir.write("a.tsv", testing::pairs_tsv(testing::scored_pairs(world, 15, rng), true));
    dir.write("b.tsv", testing::pairs_tsv(testing::scored_pairs(world, 15, rng), true));
    manifest = dir.write("manifest.txt", "y1: a.tsv\ny2: b.tsv\n");
    tagged = dir.write("tagged.conll", testing::tagged_corpus_text(world, 20, rng));
  }

  std::string transfer(const std::string& name, std::vector<std::string> extra = {}) {
    const auto path = dir.file(name).string();
    std::vector<std::string> args = {"train-transfer", "--embeddings", emb,
                                     "--corpus", corpus, "--output", path,
                                     "--encoder", "gran1", "--epochs", "2",
                                     "--batch-size", "20"};
    args.insert(args.end(), extra.begin(), extra.end());
    const auto r = run(args);
    EXPECT_EQ(r.code, 0) << r.err;
    return path;
  }

  testing::SyntheticWorld world;
  testing::TempDir dir;
  std::string emb, corpus, train, dev, manifest, tagged;
};

TEST_F(Cli, HelpExitsZero) {
  const auto r = run({"--help"});
  EXPECT_EQ(r.code, 0);
  EXPECT_NE(r.out.find("train-transfer"), std::string::npos);
}

TEST_F(Cli, NoCommandIsUsageError) { EXPECT_EQ(run({}).code, 1); }

TEST_F(Cli, GradcheckPasses) {
  const auto r = run({"gradcheck", "--encoder", "gran1", "--dim", "3",
                      "--instances", "2", "--seed", "4"});
  EXPECT_EQ(r.code, 0) << r.out << r.err;
  EXPECT_NE(r.out.find("PASS"), std::string::npos);
  EXPECT_NE(r.out.find("== margin loss"), std::string::npos);
  EXPECT_NE(r.out.find("== kl loss"), std::string::npos);
}

TEST_F(Cli, MissingRequiredFlag) {
  const auto r = run({"train-transfer", "--embeddings", emb, "--corpus", corpus});
  EXPECT_EQ(r.code, 1);
  EXPECT_NE(r.err.find("missing required option --output"), std::string::npos);
}

TEST_F(Cli, UnknownFlag) {
  EXPECT_EQ(run({"embed", "--colour", "red"}).code, 1);
}

TEST_F(Cli, OverrideOrder) {
  const auto cfg = dir.write("run.cfg", "# comment\nseed = 3\nlr = 0.05\n");
  auto seed_line = [](const std::string& err) {
    const auto p = err.find("\nseed = ");
    return err.substr(p + 1, err.find('\n', p + 1) - p - 1);
  };
  const auto base = std::vector<std::string>{"gradcheck", "--dim", "2"};
  auto with = [&](std::vector<std::string> extra) {
    auto a = base;
    a.insert(a.end(), extra.begin(), extra.end());
    return run(a);
  };
  EXPECT_EQ(seed_line(with({}).err), "seed = 1");
  EXPECT_EQ(seed_line(with({"--config", cfg}).err), "seed = 3");
  EXPECT_EQ(seed_line(with({"--config", cfg, "--seed", "4"}).err), "seed = 4");
  EXPECT_EQ(seed_line(with({"--seed", "4", "--config", cfg}).err), "seed = 4");
  EXPECT_NE(with({}).err.find("xoshiro256**/splitmix64"), std::string::npos);
}

TEST_F(Cli, UnknownConfigKey) {
  const auto cfg = dir.write("bad.cfg", "sede = 3\n");
  const auto r = run({"gradcheck", "--config", cfg});
  EXPECT_EQ(r.code, 2);
  EXPECT_NE(r.err.find("sede"), std::string::npos);
  EXPECT_NE(r.err.find("lambda_w"), std::string::npos);
}

TEST_F(Cli, ParseConfig) {
  std::istringstream in("a_b = 1\n");
  EXPECT_THROW(cli::parse_config(in), ConfigError);
  std::istringstream ok("  lr=0.5  # trailing\n\nseed = 2\n");
  const auto kv = cli::parse_config(ok);
  ASSERT_EQ(kv.size(), 2u);
}

TEST_F(Cli, OffGridDeltaWarns) {
  std::ostringstream out, err;
  const auto path = dir.file("d.ckpt").string();
  const int code = cli::run({"train-transfer", "--embeddings", emb, "--corpus", corpus,
                             "--output", path, "--delta", "0.5", "--epochs", "0"},
                            out, err);
  EXPECT_EQ(code, 0) << err.str();
  EXPECT_NE(err.str().find("warning: delta 0.5"), std::string::npos);
}

TEST_F(Cli, TrainEmbedShape) {
  const auto ckpt = transfer("m.ckpt");
  const auto input = dir.write("sent.txt", "c0w0 c1w1\nc2w2\nUNSEEN words\n");
  const auto r = run({"embed", "--checkpoint", ckpt, "--input", input});
  ASSERT_EQ(r.code, 0) << r.err;
  std::istringstream lines(r.out);
  std::string line;
  int n = 0;
  while (std::getline(lines, line)) {
    ++n;
    std::istringstream vals(line);
    double v;
    int k = 0;
    while (vals >> v) ++k;
    EXPECT_EQ(k, 6);
  }
  EXPECT_EQ(n, 3);
}

TEST_F(Cli, EmbedEmptyLineIsDataError) {
  const auto ckpt = transfer("m.ckpt");
  const auto input = dir.write("sent.txt", "c0w0\n\n");
  const auto r = run({"embed", "--checkpoint", ckpt, "--input", input});
  EXPECT_EQ(r.code, 2);
  EXPECT_NE(r.err.find("line 2"), std::string::npos);
}

TEST_F(Cli, TrainingIsReproducible) {
  const auto a = transfer("a.ckpt", {"--dropout", "0.1", "--scramble", "0.2"});
  const auto b = transfer("b.ckpt", {"--dropout", "0.1", "--scramble", "0.2"});
  EXPECT_EQ(testing::read_file(a), testing::read_file(b));
  const auto c = transfer("c.ckpt", {"--dropout", "0.1", "--seed", "9"});
  EXPECT_NE(testing::read_file(a), testing::read_file(c));
}

TEST_F(Cli, EpochLossesOnStdout) {
  std::ostringstream out, err;
  cli::run({"train-transfer", "--embeddings", emb, "--corpus", corpus, "--output",
            dir.file("e.ckpt").string(), "--epochs", "2"},
           out, err);
  EXPECT_EQ(out.str().rfind("epoch 1 loss ", 0), 0u);
  EXPECT_NE(out.str().find("\nepoch 2 loss "), std::string::npos);
}

TEST_F(Cli, SupervisedFreshAndUniversal) {
  const auto fresh = dir.file("fresh.ckpt").string();
  auto r = run({"train-supervised", "--embeddings", emb, "--train", train, "--dev", dev,
                "--output", fresh, "--epochs", "3", "--head-hidden", "8"});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_NE(r.out.find("best_epoch"), std::string::npos);
  EXPECT_NE(r.out.find("train_pearson"), std::string::npos);

  const auto pre = transfer("pre.ckpt");
  r = run({"train-supervised", "--checkpoint", pre, "--train", train, "--output",
           dir.file("uni.ckpt").string(), "--epochs", "1", "--lambda-w", "1"});
  EXPECT_EQ(r.code, 0) << r.err;
  EXPECT_NE(r.err.find("universal"), std::string::npos);

  r = run({"train-supervised", "--checkpoint", pre, "--train", train, "--output",
           dir.file("bad.ckpt").string(), "--encoder", "lstm"});
  EXPECT_EQ(r.code, 2);
  EXPECT_NE(r.err.find("checkpoint/encoder mismatch"), std::string::npos);

  r = run({"train-supervised", "--checkpoint", pre, "--embeddings", emb, "--train",
           train, "--output", dir.file("x.ckpt").string()});
  EXPECT_EQ(r.code, 1);
}

TEST_F(Cli, EvaluateSelects) {
  const auto a = transfer("a.ckpt");
  const auto b = transfer("b.ckpt", {"--encoder", "avg"});
  const auto report = dir.file("report.tsv").string();
  auto r = run({"evaluate", "--checkpoints", a + "," + b, "--manifest", manifest,
                "--report", report});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_NE(r.out.find("selected "), std::string::npos);
  EXPECT_NE(testing::read_file(report).find("a.tsv"), std::string::npos);
  r = run({"evaluate", "--checkpoints", a, "--manifest", manifest, "--selection",
           "test", "--held-out", "y2"});
  EXPECT_EQ(r.code, 0) << r.err;
  EXPECT_NE(r.out.find("by test criterion over 1 datasets"), std::string::npos);
  r = run({"evaluate", "--checkpoints", a, "--manifest", manifest, "--selection", "test"});
  EXPECT_EQ(r.code, 2);
}

TEST_F(Cli, AnalyzeGates) {
  const auto ckpt = transfer("g.ckpt");
  const auto r = run({"analyze-gates", "--checkpoint", ckpt, "--tagged", tagged,
                      "--group-by", "pos", "--top", "2", "--bottom", "1"});
  ASSERT_EQ(r.code, 0) << r.err;
  std::istringstream lines(r.out);
  std::string line;
  int n = 0;
  while (std::getline(lines, line)) {
    ++n;
    EXPECT_EQ(std::count(line.begin(), line.end(), '\t'), 2);
  }
  EXPECT_EQ(n, 3);
  const auto avg = transfer("avg.ckpt", {"--encoder", "avg"});
  EXPECT_EQ(run({"analyze-gates", "--checkpoint", avg, "--tagged", tagged}).code, 2);
}

TEST_F(Cli, MissingInputFileIsDataError) {
  const auto r = run({"embed", "--checkpoint", dir.file("nope").string(), "--input",
                      emb});
  EXPECT_EQ(r.code, 2);
}

}  // namespace
}  // namespace parasent
