// Acceptance criteria 1-8. `fgnmt_acceptance N` runs criterion N; no argument
// runs all of them. Each criterion prints one PASS/FAIL line.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "fgnmt/analysis.hpp"
#include "fgnmt/data.hpp"
#include "fgnmt/decoding.hpp"
#include "fgnmt/evaluation.hpp"
#include "fgnmt/model.hpp"
#include "fgnmt/training.hpp"
#include "oracles.hpp"

using namespace fgnmt;
using fgnmt::testing::exhaustive_search;
using fgnmt::testing::golden_path;
using fgnmt::testing::random_ids;
using fgnmt::testing::TempDir;
using fgnmt::testing::tiny_config;
using Clock = std::chrono::steady_clock;

namespace {

constexpr AttentionVariant kVariants[] = {AttentionVariant::att, AttentionVariant::atty,
                                          AttentionVariant::atty2d};

struct Verdict {
  bool pass = true;
  std::string detail;

  void require(bool ok, const std::string& what) {
    if (!ok) {
      if (pass) detail = what;
      pass = false;
    }
  }
};

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

std::string fmt(const char* format, double a, double b = 0.0, double c = 0.0) {
  char buf[256];
  std::snprintf(buf, sizeof buf, format, a, b, c);
  return buf;
}

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::string label(AttentionVariant v, bool ctx) { return to_string(v) + (ctx ? "+ctx" : ""); }

// ---- 1 --------------------------------------------------------------------

Verdict gradient_suite() {
  Verdict v;
  const auto start = Clock::now();
  double worst = 0.0;
  std::mt19937_64 rng(1001);
  for (auto variant : kVariants) {
    for (bool ctx : {false, true}) {
      for (std::uint64_t point = 0; point < 20; ++point) {
        Model m(tiny_config(variant, ctx, 7, 7, 8, 6, 5000 + point));
        const IdSequence src = random_ids(rng, 5, 7);
        IdSequence tgt = random_ids(rng, 3, 7);
        tgt.push_back(kEosId);
        std::vector<Tensor> xs;
        for (const auto& [name, t] : m.params()) xs.push_back(t);
        const double err =
            grad_check([&] { return m.sentence_log_likelihood(src, tgt); }, xs, 1e-5);
        worst = std::max(worst, err);
        v.require(err < 1e-4, label(variant, ctx) + fmt(" point %.0f: error %.3g", point, err));
      }
    }
  }
  const double elapsed = seconds_since(start);
  v.require(elapsed < 60.0, fmt("runtime %.1f s exceeds 60 s", elapsed));
  if (v.pass) v.detail = fmt("6 configurations x 20 points, max rel. error %.3g, %.1f s", worst, elapsed);
  return v;
}

// ---- 2 --------------------------------------------------------------------

Verdict simplex_suite() {
  Verdict v;
  double worst = 0.0;
  std::size_t slices = 0;
  const ParallelCorpus corpus = toy_corpus(ToyTask::copy, 100, 20, 10, 2002);
  const Vocabulary src_vocab = build_vocab(corpus.source, 100);
  const Vocabulary tgt_vocab = build_vocab(corpus.target, 100);
  for (auto variant : kVariants) {
    Model m(tiny_config(variant, false, src_vocab.size(), tgt_vocab.size(), 16, 16, 2003));
    // A short burst of training moves attention away from its initial shape.
    TrainSchedule sched;
    sched.batch_size = 16;
    Trainer trainer(m, prepare_pairs(corpus, src_vocab, tgt_vocab, sched), sched,
                    AdamOptions{3e-3});
    for (int k = 0; k < 50; ++k) trainer.step();
    std::vector<IdSequence> sources;
    for (const auto& s : corpus.source) sources.push_back(src_vocab.encode(s, false));
    DecodeOptions opts;
    opts.beam_width = 4;
    for (const Hypothesis& h : translate_all(m, sources, opts)) {
      for (const Tensor& alpha : h.alphas) {
        const std::size_t T = alpha.dim(0);
        const std::size_t D = alpha.rank() == 2 ? alpha.dim(1) : 1;
        for (std::size_t d = 0; d < D; ++d) {
          double sum = 0.0;
          for (std::size_t t = 0; t < T; ++t) {
            const double a = alpha.at(t * D + d);
            v.require(a > 0.0, to_string(variant) + ": non-positive attention weight");
            sum += a;
          }
          worst = std::max(worst, std::abs(sum - 1.0));
          ++slices;
        }
      }
    }
  }
  v.require(worst < 1e-9, fmt("max |sum - 1| = %.3g", worst));
  if (v.pass) v.detail = fmt("%.0f distributions, max |sum - 1| = %.3g", double(slices), worst);
  return v;
}

// ---- 3 --------------------------------------------------------------------

ParameterSet replicated_scores(const Model& temporal, std::size_t dims) {
  ParameterSet out;
  for (const auto& [name, t] : temporal.params()) {
    Tensor value = t.clone();
    if (name == "att.W2" || name == "att.b2") {
      std::vector<double> rows;
      for (std::size_t d = 0; d < dims; ++d)
        rows.insert(rows.end(), t.data().begin(), t.data().end());
      value = name == "att.W2" ? Tensor::matrix(dims, t.dim(1), rows) : Tensor::vector(rows);
    }
    out.add(name, value.detach());
  }
  return out;
}

Verdict reduction_equivalence() {
  Verdict v;
  NoGradGuard no_grad;
  std::mt19937_64 rng(3003);
  double worst = 0.0;
  for (int s = 0; s < 50; ++s) {
    ModelConfig ct = tiny_config(AttentionVariant::atty, s % 2 == 1, 15, 12, 8, 6, 3100 + s);
    Model temporal(ct);
    ModelConfig cf = ct;
    cf.variant = AttentionVariant::atty2d;
    Model fine(cf, replicated_scores(temporal, ct.annotation_dim()));
    const IdSequence src = random_ids(rng, 1 + s % 9, 15);
    IdSequence tgt = random_ids(rng, 1 + s % 7, 12);
    tgt.push_back(kEosId);
    EncodedSource et = temporal.encode_source(src), ef = fine.encode_source(src);
    DecoderState st = et.initial, sf = ef.initial;
    std::size_t prev = kBosId;
    for (std::size_t y : tgt) {
      StepOutput ot = temporal.decoder_step(st, prev, et);
      StepOutput of = fine.decoder_step(sf, prev, ef);
      for (std::size_t k = 0; k < ct.tgt_vocab; ++k)
        worst = std::max(worst, std::abs(ot.log_probs.at(k) - of.log_probs.at(k)));
      st = ot.state;
      sf = of.state;
      prev = y;
    }
  }
  v.require(worst < 1e-9, fmt("max per-step log-prob difference %.3g", worst));
  if (v.pass) v.detail = fmt("50 sentences, max per-step log-prob difference %.3g", worst);
  return v;
}

// ---- 4 --------------------------------------------------------------------

Verdict beam_oracle() {
  Verdict v;
  std::mt19937_64 rng(4004);
  double worst = 0.0;
  for (std::uint64_t k = 0; k < 20; ++k) {
    const AttentionVariant variant = kVariants[k % 3];
    Model m(tiny_config(variant, k % 2 == 0, 6, 4, 5, 4, 4100 + k));
    const IdSequence src = random_ids(rng, 1 + k % 5, 6);
    const auto oracle = exhaustive_search(m, src, 3);
    const Hypothesis h = beam_search(m, src, 12, 3);
    v.require(h.tokens == oracle.tokens, fmt("model %.0f: sequence differs", double(k)));
    worst = std::max(worst, std::abs(h.log_prob - oracle.log_prob));
  }
  v.require(worst < 1e-9, fmt("max score difference %.3g", worst));
  if (v.pass) v.detail = fmt("20 models, identical sequences, max score difference %.3g", worst);
  return v;
}

// ---- 5 --------------------------------------------------------------------

struct ToyRun {
  double bleu = 0.0;
  std::size_t steps = 0;
  std::size_t best_step = 0;
  double seconds = 0.0;
};

ToyRun train_toy(ToyTask task, AttentionVariant variant, std::optional<double> target,
                 std::size_t max_steps) {
  const std::uint64_t seed = 1;
  const ParallelCorpus train = toy_corpus(task, 2000, 20, 10, seed);
  const ParallelCorpus valid = toy_corpus(task, 200, 20, 10, seed + 1);
  const Vocabulary src_vocab = build_vocab(train.source, 30000);
  const Vocabulary tgt_vocab = build_vocab(train.target, 30000);
  ModelConfig config =
      ModelConfig::toy(variant, src_vocab.size(), tgt_vocab.size(), 32, 32, seed);
  Model model(config);
  TrainSchedule sched;
  sched.batch_size = 16;
  sched.valid_interval = 200;
  sched.patience = 10;
  sched.max_steps = max_steps;
  sched.seed = seed;
  sched.target_bleu = target;
  const auto start = Clock::now();
  const EarlyStopResult r =
      early_stop_loop(model, prepare_pairs(train, src_vocab, tgt_vocab, sched),
                      make_validation_set(valid, src_vocab), tgt_vocab, sched, AdamOptions{3e-3});
  return {r.best_bleu, r.steps, r.best_step, seconds_since(start)};
}

Verdict toy_convergence() {
  Verdict v;
  std::string report;
  for (auto variant : kVariants) {
    // Stops at the first validation strictly above 95.
    const ToyRun r = train_toy(ToyTask::copy, variant, std::nextafter(95.0, 100.0), 20000);
    std::printf("  copy %-6s BLEU %6.2f at step %5zu, %6.1f s\n", to_string(variant).c_str(),
                r.bleu, r.best_step, r.seconds);
    v.require(r.bleu > 95.0, "copy " + to_string(variant) + fmt(": BLEU %.2f", r.bleu));
    v.require(r.seconds < 900.0, "copy " + to_string(variant) + fmt(": %.0f s", r.seconds));
    report += "copy/" + to_string(variant) + fmt(" %.1f ", r.bleu);
  }
  std::vector<double> poly;
  for (auto variant : kVariants) {
    const ToyRun r = train_toy(ToyTask::polysemy, variant, std::nullopt, 3000);
    std::printf("  polysemy %-6s BLEU %6.2f at step %5zu, %6.1f s\n",
                to_string(variant).c_str(), r.bleu, r.best_step, r.seconds);
    v.require(r.bleu > 80.0, "polysemy " + to_string(variant) + fmt(": BLEU %.2f", r.bleu));
    report += "polysemy/" + to_string(variant) + fmt(" %.1f ", r.bleu);
    poly.push_back(r.bleu);
  }
  std::printf("  polysemy ordering atty2d %s atty (reported only)\n",
              poly[2] > poly[1] ? ">" : (poly[2] == poly[1] ? "=" : "<"));
  std::fflush(stdout);
  if (v.pass) v.detail = report;
  return v;
}

// ---- 6 --------------------------------------------------------------------

Matrix read_matrix(const std::filesystem::path& path) {
  Matrix m;
  for (const auto& line : read_lines(path)) {
    std::istringstream in(line);
    std::size_t cols = 0;
    for (double x; in >> x; ++cols) m.values.push_back(x);
    m.cols = cols;
    ++m.rows;
  }
  return m;
}

Verdict analysis_algebra() {
  Verdict v;
  std::mt19937_64 rng(6006);
  double worst_col = 0.0;
  std::size_t records = 0;
  TempDir dir;
  for (auto variant : kVariants) {
    Model m(tiny_config(variant, true, 12, 12, 8, 6, 6100));
    for (int s = 0; s < 20; ++s) {
      const IdSequence src = random_ids(rng, 2 + s % 8, 12);
      const Hypothesis h = beam_search(m, src, 3, 12);
      Sentence st, tt;
      for (auto id : src) st.push_back("x" + std::to_string(id));
      for (auto id : h.tokens) tt.push_back("y" + std::to_string(id));
      const AlignmentRecord rec = make_record(alignment_of(m, h), st, tt, m.fingerprint());
      ++records;
      const Matrix avg = avg_over_dims(rec);
      for (std::size_t i = 0; i < rec.target_length; ++i) {
        for (std::size_t j = 0; j < rec.source_length; ++j) {
          double acc = 0.0;
          for (std::size_t d = 0; d < rec.dims; ++d) acc += slice_dim(rec, d).at(i, j);
          v.require(acc / static_cast<double>(rec.dims) == avg.at(i, j),
                    "mean of slices differs from avg_over_dims");
        }
      }
      const Matrix tgt_avg = avg_over_target(rec);
      for (std::size_t d = 0; d < tgt_avg.cols; ++d) {
        double sum = 0.0;
        for (std::size_t t = 0; t < tgt_avg.rows; ++t) sum += tgt_avg.at(t, d);
        worst_col = std::max(worst_col, std::abs(sum - 1.0));
      }
      if (s == 0) {
        heatmap(avg, dir / "first.pgm", rec.target, rec.source);
        heatmap(avg, dir / "second.pgm", rec.target, rec.source);
        v.require(slurp(dir / "first.pgm") == slurp(dir / "second.pgm"),
                  "model heatmap differs between runs");
        v.require(slurp(dir / "first.pgm.axes.txt") == slurp(dir / "second.pgm.axes.txt"),
                  "axes sidecar differs between runs");
      }
    }
  }
  v.require(worst_col < 1e-9, fmt("avg_over_target column sum off by %.3g", worst_col));
  std::size_t goldens = 0;
  for (const char* name : {"ramp", "checker", "constant", "diagonal"}) {
    const Matrix m = read_matrix(golden_path(std::string("heatmap/") + name + ".tsv"));
    const std::string expected = slurp(golden_path(std::string("heatmap/") + name + ".pgm"));
    for (int run = 0; run < 2; ++run) {
      const auto path = dir / (std::string(name) + std::to_string(run) + ".pgm");
      heatmap(m, path);
      v.require(slurp(path) == expected, std::string("golden heatmap mismatch: ") + name);
    }
    ++goldens;
  }
  if (v.pass)
    v.detail = fmt("%.0f records bitwise consistent, column sums within %.3g, %.0f goldens",
                   double(records), worst_col, double(goldens));
  return v;
}

// ---- 7 --------------------------------------------------------------------

Verdict round_trips() {
  Verdict v;
  std::size_t sentences = 0;
  for (auto task : {ToyTask::copy, ToyTask::reverse, ToyTask::polysemy}) {
    const ParallelCorpus corpus = toy_corpus(task, 2000, 20, 10, 1);
    std::vector<Sentence> all = corpus.source;
    all.insert(all.end(), corpus.target.begin(), corpus.target.end());
    for (std::size_t n : {0, 10, 60}) {
      const BPEMerges merges = learn_bpe(all, n);
      for (const auto& s : all) {
        v.require(unbpe(apply_bpe(merges, s)) == s, "unbpe(apply_bpe(x)) != x: " + join(s));
        ++sentences;
      }
    }
  }

  TempDir dir;
  std::mt19937_64 rng(7007);
  for (auto variant : kVariants) {
    for (bool ctx : {false, true}) {
      Model m(tiny_config(variant, ctx, 11, 9, 6, 5, 7100));
      save_checkpoint(m, dir / "a.ckpt");
      const Model back = load_checkpoint(dir / "a.ckpt");
      save_checkpoint(back, dir / "b.ckpt");
      v.require(slurp(dir / "a.ckpt") == slurp(dir / "b.ckpt"),
                "checkpoint bytes differ: " + label(variant, ctx));
      v.require(back.fingerprint() == m.fingerprint(),
                "checkpoint values differ: " + label(variant, ctx));

      const IdSequence src = random_ids(rng, 4, 11);
      const Hypothesis h = beam_search(m, src, 3, 8);
      Sentence st(src.size(), "w"), tt(h.tokens.size(), "v");
      const AlignmentRecord rec = make_record(alignment_of(m, h), st, tt, m.fingerprint());
      save_alignment(rec, dir / "a.fgat");
      const AlignmentRecord loaded = load_alignment(dir / "a.fgat");
      save_alignment(loaded, dir / "b.fgat");
      v.require(slurp(dir / "a.fgat") == slurp(dir / "b.fgat") &&
                    slurp(sidecar_path(dir / "a.fgat")) == slurp(sidecar_path(dir / "b.fgat")),
                "FGAT bytes differ: " + label(variant, ctx));
      bool values_ok = loaded.alpha.size() == rec.alpha.size();
      for (std::size_t i = 0; values_ok && i < rec.alpha.size(); ++i)
        values_ok = loaded.alpha[i] == static_cast<double>(static_cast<float>(rec.alpha[i]));
      v.require(values_ok, "FGAT values differ from their f32 encoding: " + label(variant, ctx));
    }
  }

  double worst = 0.0;
  std::ifstream table(golden_path("bleu/expected.tsv"));
  std::string name;
  double plain, smoothed;
  std::size_t goldens = 0;
  while (table >> name >> plain >> smoothed) {
    std::vector<Sentence> hyps, refs;
    for (const auto& l : read_lines(golden_path("bleu/" + name + ".hyp"))) hyps.push_back(tokenize(l));
    for (const auto& l : read_lines(golden_path("bleu/" + name + ".ref"))) refs.push_back(tokenize(l));
    worst = std::max(worst, std::abs(bleu(hyps, refs, false).bleu - plain));
    worst = std::max(worst, std::abs(bleu(hyps, refs, true).bleu - smoothed));
    ++goldens;
  }
  v.require(goldens == 10, "expected 10 BLEU goldens");
  v.require(worst < 0.01, fmt("BLEU off golden by %.4f", worst));
  if (v.pass)
    v.detail = fmt("%.0f BPE round trips, 6 checkpoints + FGAT files, BLEU max deviation %.2g",
                   double(sentences), worst);
  return v;
}

// ---- 8 --------------------------------------------------------------------

Verdict overhead_probe() {
  Verdict v;
  std::mt19937_64 rng(8008);
  std::vector<IdSequence> sources;
  for (int i = 0; i < 60; ++i) sources.push_back(random_ids(rng, 5 + i % 16, 200));
  DecodeOptions opts;
  opts.beam_width = 12;
  opts.max_len = 25;
  double per_sentence[2] = {0.0, 0.0};
  const AttentionVariant probe[] = {AttentionVariant::atty, AttentionVariant::atty2d};
  for (int k = 0; k < 2; ++k) {
    Model m(ModelConfig::toy(probe[k], 200, 200, 32, 32, 8100));
    // Equal workload: <eos> is suppressed so every hypothesis runs to max_len.
    Tensor bias = m.params().get("out.b");
    bias.mutable_data()[kEosId] = -1e3;
    const auto start = Clock::now();
    const auto hyps = translate_all(m, sources, opts);
    per_sentence[k] = seconds_since(start) / static_cast<double>(sources.size());
    v.require(hyps.size() == sources.size(), "missing hypotheses");
  }
  const double overhead = 100.0 * (per_sentence[1] / per_sentence[0] - 1.0);
  v.detail = fmt("AttY %.2f ms/sentence, AttY2D %.2f ms/sentence, overhead %+.1f%% (informational)",
                 1e3 * per_sentence[0], 1e3 * per_sentence[1], overhead);
  return v;
}

struct Criterion {
  const char* name;
  std::function<Verdict()> run;
};

}  // namespace

int main(int argc, char** argv) {
  const std::vector<Criterion> criteria{
      {"gradient suite", gradient_suite},       {"simplex suite", simplex_suite},
      {"reduction equivalence", reduction_equivalence},
      {"beam oracle", beam_oracle},             {"toy convergence", toy_convergence},
      {"analysis algebra", analysis_algebra},   {"round-trips", round_trips},
      {"overhead probe", overhead_probe}};
  std::vector<std::size_t> selected;
  if (argc < 2) {
    for (std::size_t i = 1; i <= criteria.size(); ++i) selected.push_back(i);
  } else {
    for (int a = 1; a < argc; ++a) {
      const long n = std::strtol(argv[a], nullptr, 10);
      if (n < 1 || n > static_cast<long>(criteria.size())) {
        std::fprintf(stderr, "usage: %s [criterion 1-%zu ...]\n", argv[0], criteria.size());
        return 2;
      }
      selected.push_back(static_cast<std::size_t>(n));
    }
  }
  bool all = true;
  for (std::size_t n : selected) {
    Verdict verdict;
    try {
      verdict = criteria[n - 1].run();
    } catch (const std::exception& e) {
      verdict.pass = false;
      verdict.detail = std::string("exception: ") + e.what();
    }
    std::printf("criterion %zu (%s): %s - %s\n", n, criteria[n - 1].name,
                verdict.pass ? "PASS" : "FAIL", verdict.detail.c_str());
    std::fflush(stdout);
    all = all && verdict.pass;
  }
  return all ? 0 : 1;
}
