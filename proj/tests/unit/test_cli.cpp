#include <gtest/gtest.h>

#include <cmath>
#include <fstream>
#include <limits>
#include <memory>
#include <sstream>

#include "cli.hpp"
#include "fgnmt/analysis.hpp"
#include "fgnmt/data.hpp"
#include "fgnmt/decoding.hpp"
#include "fgnmt/evaluation.hpp"
#include "fgnmt/model.hpp"
#include "oracles.hpp"

using namespace fgnmt;
using fgnmt::testing::TempDir;

namespace {

struct Outcome {
  int code;
  std::string out;
  std::string err;
};

Outcome run(std::vector<std::string> args) {
  std::ostringstream out, err;
  const int code = cli::run(args, out, err);
  return {code, out.str(), err.str()};
}

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::vector<std::string> toy_train_args(const std::filesystem::path& ckpt, std::string seed) {
  return {"train",         "--task",       "copy",  "--toy-vocab",      "6",
          "--toy-max-len", "5",            "--toy-train", "60",         "--toy-valid",
          "8",             "--emb-dim",    "6",     "--hidden-dim",     "5",
          "--batch-size",  "10",           "--max-steps", "20",         "--valid-interval",
          "10",            "--seed",       seed,    "--output",         ckpt.string()};
}

class CliTest : public ::testing::Test {
 protected:
  static void SetUpTestSuite() {
    dir_ = std::make_unique<TempDir>();
    ckpt_ = (*dir_ / "model.ckpt").string();
    const Outcome r = run(toy_train_args(ckpt_, "3"));
    ASSERT_EQ(r.code, cli::kExitOk) << r.err;
    input_ = (*dir_ / "input.txt").string();
    write_lines(input_, {"s1 s2 s3", "s0", "", "s5 s4 s3 s2 s1"});
  }
  static void TearDownTestSuite() { dir_.reset(); }

  static std::unique_ptr<TempDir> dir_;
  static std::string ckpt_;
  static std::string input_;
};

std::unique_ptr<TempDir> CliTest::dir_;
std::string CliTest::ckpt_;
std::string CliTest::input_;

}  // namespace

TEST(Cli, UsageErrorsExitTwo) {
  EXPECT_EQ(run({}).code, cli::kExitUsage);
  EXPECT_EQ(run({"fly"}).code, cli::kExitUsage);
  EXPECT_EQ(run({"score", "--hyp", "a", "--ref", "b", "--bogus"}).code, cli::kExitUsage);
  EXPECT_EQ(run({"translate", "--input", "x"}).code, cli::kExitUsage);
  EXPECT_EQ(run({"translate", "--checkpoint", "/nonexistent.ckpt", "--input", "x"}).code,
            cli::kExitUsage);
  EXPECT_EQ(run({"train", "--task", "sort"}).code, cli::kExitUsage);
  EXPECT_EQ(run({"--help"}).code, cli::kExitOk);
}

TEST(Cli, TrainIsReproducible) {
  TempDir dir;
  const Outcome a = run(toy_train_args(dir / "a.ckpt", "7"));
  const Outcome b = run(toy_train_args(dir / "b.ckpt", "7"));
  ASSERT_EQ(a.code, 0) << a.err;
  ASSERT_EQ(b.code, 0) << b.err;
  EXPECT_EQ(a.out, b.out);
  EXPECT_EQ(slurp(dir / "a.ckpt.log"), slurp(dir / "b.ckpt.log"));
  EXPECT_EQ(slurp(dir / "a.ckpt"), slurp(dir / "b.ckpt"));
  EXPECT_EQ(read_lines(dir / "a.ckpt.log").size(), 2u);
  EXPECT_TRUE(std::filesystem::exists(dir / "a.ckpt.src.vocab"));
  EXPECT_TRUE(std::filesystem::exists(dir / "a.ckpt.tgt.vocab"));
  EXPECT_NE(a.out.find("best validation BLEU"), std::string::npos);
}

TEST(Cli, ConfigFileValuesAreOverriddenByFlags) {
  TempDir dir;
  std::ofstream(dir / "train.cfg") << "# toy run\nmax-steps=10\nvalid-interval=5\nseed=2\n";
  auto args = toy_train_args(dir / "c.ckpt", "7");
  args.insert(args.begin() + 1, {"--config", (dir / "train.cfg").string()});
  ASSERT_EQ(run(args).code, 0);
  // --max-steps 20 and --valid-interval 10 on the command line win.
  EXPECT_EQ(read_lines(dir / "c.ckpt.log").size(), 2u);
  const auto cfg = cli::read_config_file((dir / "train.cfg").string());
  EXPECT_EQ(cfg.size(), 3u);
  EXPECT_EQ(cfg.at("max-steps"), "10");
}

TEST_F(CliTest, TranslateBeamOneEqualsGreedy) {
  const std::string out_path = (*dir_ / "greedy.txt").string();
  const Outcome r = run({"translate", "--checkpoint", ckpt_, "--input", input_, "--beam", "1",
                     "--output", out_path});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto lines = read_lines(out_path);
  ASSERT_EQ(lines.size(), 4u);
  EXPECT_EQ(lines[2], "");

  const Model model = load_checkpoint(ckpt_);
  const Vocabulary src = Vocabulary::load(ckpt_ + ".src.vocab");
  const Vocabulary tgt = Vocabulary::load(ckpt_ + ".tgt.vocab");
  const auto inputs = read_lines(input_);
  for (std::size_t i = 0; i < inputs.size(); ++i) {
    if (inputs[i].empty()) continue;
    const IdSequence ids = src.encode(tokenize(inputs[i]), false);
    const Hypothesis g = greedy(model, ids, default_max_len(ids.size()));
    EXPECT_EQ(lines[i], join(unbpe(tgt.decode(g.tokens))));
  }
}

TEST_F(CliTest, TranslateWritesOneAlignmentPerSentence) {
  const std::filesystem::path align_dir = *dir_ / "align";
  const Outcome r = run({"translate", "--checkpoint", ckpt_, "--input", input_, "--beam", "3",
                     "--emit-align", align_dir.string(), "--workers", "2"});
  ASSERT_EQ(r.code, 0) << r.err;
  std::istringstream out(r.out);
  std::vector<std::string> lines;
  for (std::string l; std::getline(out, l);) lines.push_back(l);
  ASSERT_EQ(lines.size(), 4u);
  const auto inputs = read_lines(input_);
  for (std::size_t i = 0; i < inputs.size(); ++i) {
    char name[32];
    std::snprintf(name, sizeof name, "%06zu.fgat", i);
    if (inputs[i].empty()) {
      EXPECT_FALSE(std::filesystem::exists(align_dir / name));
      continue;
    }
    const AlignmentRecord rec = load_alignment(align_dir / name);
    EXPECT_EQ(rec.source_length, tokenize(inputs[i]).size());
    EXPECT_EQ(rec.dims, 10u);
    EXPECT_EQ(rec.variant, AttentionVariant::atty2d);
    EXPECT_EQ(rec.source, tokenize(inputs[i]));
  }
}

TEST_F(CliTest, TranslateRejectsVariantMismatch) {
  EXPECT_EQ(run({"translate", "--checkpoint", ckpt_, "--input", input_, "--variant", "att"}).code,
            cli::kExitUsage);
  EXPECT_EQ(run({"translate", "--checkpoint", ckpt_, "--input", input_, "--beam", "0"}).code,
            cli::kExitUsage);
}

TEST_F(CliTest, NumericFailureExitsThree) {
  Model model = load_checkpoint(ckpt_);
  Tensor w = model.params().get("out.b");
  w.mutable_data()[0] = std::numeric_limits<double>::quiet_NaN();
  const std::string bad = (*dir_ / "nan.ckpt").string();
  save_checkpoint(model, bad);
  std::filesystem::copy_file(ckpt_ + ".src.vocab", bad + ".src.vocab");
  std::filesystem::copy_file(ckpt_ + ".tgt.vocab", bad + ".tgt.vocab");
  const Outcome r = run({"translate", "--checkpoint", bad, "--input", input_});
  EXPECT_EQ(r.code, cli::kExitNumeric) << r.err;
}

TEST_F(CliTest, AlignSubmodes) {
  const std::filesystem::path align_dir = *dir_ / "align_modes";
  ASSERT_EQ(run({"translate", "--checkpoint", ckpt_, "--input", input_, "--emit-align",
                 align_dir.string()})
                .code,
            0);
  const std::string fgat = (align_dir / "000003.fgat").string();
  const std::string prefix = (align_dir / "s3").string();
  const AlignmentRecord rec = load_alignment(fgat);

  ASSERT_EQ(run({"align", "--input", fgat, "--out", prefix, "--avg-dims"}).code, 0);
  const std::string pgm = slurp(prefix + ".avg_dims.pgm");
  EXPECT_EQ(pgm, render_pgm(avg_over_dims(rec)));
  EXPECT_TRUE(std::filesystem::exists(prefix + ".avg_dims.pgm.axes.txt"));
  EXPECT_EQ(read_lines(prefix + ".avg_dims.tsv").size(), rec.target_length + 1);

  ASSERT_EQ(run({"align", "--input", fgat, "--out", prefix, "--avg-target"}).code, 0);
  EXPECT_EQ(slurp(prefix + ".avg_target.pgm"), render_pgm(avg_over_target(rec)));

  ASSERT_EQ(run({"align", "--input", fgat, "--out", prefix, "--slice", "4"}).code, 0);
  EXPECT_EQ(slurp(prefix + ".slice4.pgm"), render_pgm(slice_dim(rec, 4)));

  ASSERT_EQ(run({"align", "--input", fgat, "--out", prefix, "--avg-dims", "--cols", "1:3"}).code,
            0);
  EXPECT_EQ(slurp(prefix + ".avg_dims.pgm"), render_pgm(avg_over_dims(rec).columns(1, 3)));

  const Outcome top = run({"align", "--input", fgat, "--out", prefix, "--top-dims", "0", "3"});
  ASSERT_EQ(top.code, 0);
  EXPECT_EQ(read_lines(prefix + ".top.tsv").size(), 3u);
  EXPECT_EQ(std::stoul(top.out), top_dims(rec, 0, 3)[0].first);

  EXPECT_EQ(run({"align", "--input", fgat, "--slice", "10"}).code, cli::kExitUsage);
  EXPECT_EQ(run({"align", "--input", fgat, "--top-dims", "9", "1"}).code, cli::kExitUsage);
  EXPECT_EQ(run({"align", "--input", fgat, "--avg-dims", "--slice", "1"}).code, cli::kExitUsage);
  EXPECT_EQ(run({"align", "--input", fgat, "--cols", "3"}).code, cli::kExitUsage);
}

TEST(Cli, ScoreMatchesLibraryAndGoldens) {
  TempDir dir;
  write_lines(dir / "ref.txt", {"the cat sat on the mat", "a b c d"});
  write_lines(dir / "bad.txt", {"q r s t", "u v w x"});
  const Outcome perfect = run({"score", "--hyp", (dir / "ref.txt").string(), "--ref",
                           (dir / "ref.txt").string()});
  ASSERT_EQ(perfect.code, 0);
  EXPECT_NEAR(std::stod(perfect.out), 100.0, 1e-9);
  const Outcome zero = run({"score", "--hyp", (dir / "bad.txt").string(), "--ref",
                        (dir / "ref.txt").string()});
  EXPECT_EQ(std::stod(zero.out), 0.0);

  const std::string hyp = fgnmt::testing::golden_path("bleu/corpus3.hyp");
  const std::string ref = fgnmt::testing::golden_path("bleu/corpus3.ref");
  std::vector<Sentence> h, r;
  for (const auto& l : read_lines(hyp)) h.push_back(tokenize(l));
  for (const auto& l : read_lines(ref)) r.push_back(tokenize(l));
  EXPECT_EQ(run({"score", "--hyp", hyp, "--ref", ref}).out, bleu(h, r).to_line() + "\n");
  EXPECT_EQ(run({"score", "--hyp", hyp, "--ref", ref, "--smooth"}).out,
            bleu(h, r, true).to_line() + "\n");
  write_lines(dir / "one.txt", {"x"});
  EXPECT_EQ(run({"score", "--hyp", (dir / "one.txt").string(), "--ref",
                 (dir / "ref.txt").string()})
                .code,
            cli::kExitUsage);
}

TEST(Cli, BpeApplyThenUndoIsIdentity) {
  TempDir dir;
  const std::vector<std::string> text{"the lowest newer widest", "slow low lower", "newest"};
  write_lines(dir / "text.txt", text);
  const std::string merges = (dir / "merges.txt").string();
  ASSERT_EQ(run({"bpe", "learn", "--input", (dir / "text.txt").string(), "--merges", merges,
                 "--num-merges", "12"})
                .code,
            0);
  EXPECT_EQ(load_merges(merges).size(), 12u);
  ASSERT_EQ(run({"bpe", "apply", "--merges", merges, "--input", (dir / "text.txt").string(),
                 "--output", (dir / "sub.txt").string()})
                .code,
            0);
  EXPECT_NE(slurp(dir / "sub.txt").find("@@"), std::string::npos);
  const Outcome undo = run({"bpe", "undo", "--input", (dir / "sub.txt").string()});
  ASSERT_EQ(undo.code, 0);
  EXPECT_EQ(undo.out, "the lowest newer widest\nslow low lower\nnewest\n");
  EXPECT_EQ(run({"bpe", "apply", "--merges", (dir / "none.txt").string(), "--input",
                 (dir / "text.txt").string()})
                .code,
            cli::kExitUsage);
  EXPECT_EQ(run({"bpe"}).code, cli::kExitUsage);
}
