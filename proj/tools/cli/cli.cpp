#include "cli.hpp"

#include <CLI11.hpp>

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <set>
#include <sstream>

#include "fgnmt/analysis.hpp"
#include "fgnmt/data.hpp"
#include "fgnmt/decoding.hpp"
#include "fgnmt/error.hpp"
#include "fgnmt/evaluation.hpp"
#include "fgnmt/model.hpp"
#include "fgnmt/special_tokens.hpp"
#include "fgnmt/training.hpp"

namespace fgnmt::cli {

namespace fs = std::filesystem;

namespace {

// Log verbosity comes from FGNMT_LOG (quiet, info, debug); default info.
int log_level() {
  const char* env = std::getenv("FGNMT_LOG");
  if (!env) return 1;
  std::string v(env);
  if (v == "quiet") return 0;
  if (v == "debug") return 2;
  return 1;
}

void require_file(const std::string& path, const char* what) {
  if (!fs::is_regular_file(path)) throw FilesystemError(std::string(what) + " not found: " + path);
}

std::string vocab_path(const std::string& checkpoint, const char* side) {
  return checkpoint + "." + side + ".vocab";
}

void write_output(const std::string& path, const std::vector<std::string>& lines,
                  std::ostream& out) {
  if (path.empty() || path == "-") {
    for (const auto& l : lines) out << l << '\n';
  } else {
    write_lines(path, lines);
  }
}

// ---- train ------------------------------------------------------------------

struct TrainOptions {
  std::string variant = "atty2d";
  bool contextualize = false;
  std::string task;
  std::string train_src, train_tgt, valid_src, valid_tgt;
  std::size_t toy_vocab = 20;
  std::size_t toy_max_len = 10;
  std::size_t toy_train = 2000;
  std::size_t toy_valid = 200;
  std::size_t vocab_cap = 30000;
  std::string preset = "toy";
  std::size_t emb_dim = 32;
  std::size_t hidden_dim = 32;
  std::size_t align_hidden_dim = 0;
  std::size_t batch_size = 16;
  double lr = 3e-3;
  std::size_t max_steps = 20000;
  std::size_t valid_interval = 200;
  std::size_t patience = 10;
  double clip = 1.0;
  std::size_t max_len = 50;
  std::optional<double> target_bleu;
  bool valid_smoothing = false;
  std::uint64_t seed = 1;
  std::size_t workers = 1;
  std::string output = "model.ckpt";
  std::string log;
};

void add_train(CLI::App& app, TrainOptions& o) {
  app.add_option("--variant", o.variant, "Attention variant: att, atty or atty2d")
      ->check(CLI::IsMember({"att", "atty", "atty2d"}));
  app.add_flag("--contextualize", o.contextualize, "Enrich source embeddings with mean context");
  app.add_option("--task", o.task, "Synthetic task instead of corpus files")
      ->check(CLI::IsMember({"copy", "reverse", "polysemy"}));
  app.add_option("--train-src", o.train_src, "Training source file (one sentence per line)");
  app.add_option("--train-tgt", o.train_tgt, "Training target file");
  app.add_option("--valid-src", o.valid_src, "Validation source file");
  app.add_option("--valid-tgt", o.valid_tgt, "Validation target file");
  app.add_option("--toy-vocab", o.toy_vocab, "Synthetic task: number of symbols");
  app.add_option("--toy-max-len", o.toy_max_len, "Synthetic task: maximum sentence length");
  app.add_option("--toy-train", o.toy_train, "Synthetic task: training pairs");
  app.add_option("--toy-valid", o.toy_valid, "Synthetic task: validation pairs");
  app.add_option("--vocab-cap", o.vocab_cap, "Vocabulary size cap including reserved ids");
  app.add_option("--preset", o.preset, "Dimension preset: toy or wmt (620/1000/2000)")
      ->check(CLI::IsMember({"toy", "wmt"}));
  app.add_option("--emb-dim", o.emb_dim, "Word embedding dimension (toy preset)");
  app.add_option("--hidden-dim", o.hidden_dim, "Encoder/decoder hidden size (toy preset)");
  app.add_option("--align-hidden-dim", o.align_hidden_dim,
                 "Score network hidden size; 0 means 2 x hidden");
  app.add_option("--batch-size", o.batch_size, "Sentences per update");
  app.add_option("--lr", o.lr, "Adam step size");
  app.add_option("--max-steps", o.max_steps, "Maximum number of updates");
  app.add_option("--valid-interval", o.valid_interval, "Updates between validations");
  app.add_option("--patience", o.patience, "Validations without improvement before stopping");
  app.add_option("--clip", o.clip, "Global gradient norm clip");
  app.add_option("--max-len", o.max_len, "Skip pairs longer than this on either side");
  app.add_option("--target-bleu", o.target_bleu, "Stop once validation BLEU reaches this");
  app.add_flag("--valid-smoothing", o.valid_smoothing, "Add-one smoothed validation BLEU");
  app.add_option("--seed", o.seed, "Random seed");
  app.add_option("--workers", o.workers, "Threads for validation decoding");
  app.add_option("--output", o.output, "Checkpoint path");
  app.add_option("--log", o.log, "Training log path (default: <output>.log)");
}

int cmd_train(const TrainOptions& o, std::ostream& out, std::ostream& err) {
  ParallelCorpus train_corpus, valid_corpus;
  if (!o.task.empty()) {
    const ToyTask task = parse_toy_task(o.task);
    train_corpus = toy_corpus(task, o.toy_train, o.toy_vocab, o.toy_max_len, o.seed);
    valid_corpus = toy_corpus(task, o.toy_valid, o.toy_vocab, o.toy_max_len, o.seed + 1);
  } else {
    if (o.train_src.empty() || o.train_tgt.empty() || o.valid_src.empty() || o.valid_tgt.empty()) {
      throw ContractError("train needs --task or all of --train-src/--train-tgt/--valid-src/--valid-tgt");
    }
    for (const auto* p : {&o.train_src, &o.train_tgt, &o.valid_src, &o.valid_tgt}) {
      require_file(*p, "corpus file");
    }
    train_corpus = load_parallel(o.train_src, o.train_tgt);
    valid_corpus = load_parallel(o.valid_src, o.valid_tgt);
  }
  const Vocabulary src_vocab = build_vocab(train_corpus.source, o.vocab_cap);
  const Vocabulary tgt_vocab = build_vocab(train_corpus.target, o.vocab_cap);

  ModelConfig config;
  if (o.preset == "wmt") {
    config = ModelConfig::wmt_defaults();
  } else {
    config.emb_dim = o.emb_dim;
    config.hidden_dim = o.hidden_dim;
    config.align_hidden_dim = o.align_hidden_dim ? o.align_hidden_dim : 2 * o.hidden_dim;
  }
  config.variant = parse_variant(o.variant);
  config.contextualization = o.contextualize;
  config.src_vocab = src_vocab.size();
  config.tgt_vocab = tgt_vocab.size();
  config.seed = o.seed;

  TrainSchedule schedule;
  schedule.batch_size = o.batch_size;
  schedule.max_source_len = o.max_len;
  schedule.max_target_len = o.max_len;
  schedule.valid_interval = o.valid_interval;
  schedule.patience = o.patience;
  schedule.max_steps = o.max_steps;
  schedule.seed = o.seed;
  schedule.clip_norm = o.clip;
  schedule.target_bleu = o.target_bleu;
  schedule.valid_smoothing = o.valid_smoothing;
  schedule.valid_workers = o.workers;
  AdamOptions adam;
  adam.alpha = o.lr;

  auto pairs = prepare_pairs(train_corpus, src_vocab, tgt_vocab, schedule);
  const ValidationSet valid = make_validation_set(valid_corpus, src_vocab);
  Model model(config);

  const std::string log_path = o.log.empty() ? o.output + ".log" : o.log;
  std::ofstream log(log_path, std::ios::trunc);
  if (!log) throw FilesystemError("cannot write " + log_path);
  const int verbosity = log_level();
  if (verbosity >= 1) {
    err << "training " << to_string(config.variant) << (config.contextualization ? "+ctx" : "")
        << " on " << pairs.size() << " pairs, " << model.params().scalar_count()
        << " parameters\n";
  }
  EarlyStopResult result =
      early_stop_loop(model, std::move(pairs), valid, tgt_vocab, schedule, adam,
                      [&](const ValidationRecord& r) {
                        log << r.to_line() << '\n';
                        log.flush();
                        if (verbosity >= 1) err << r.to_line() << '\n';
                      });
  save_checkpoint(result.best, o.output);
  src_vocab.save(vocab_path(o.output, "src"));
  tgt_vocab.save(vocab_path(o.output, "tgt"));
  char buf[160];
  std::snprintf(buf, sizeof buf, "best validation BLEU %.2f at step %zu (%zu steps)",
                result.best_bleu, result.best_step, result.steps);
  out << buf << '\n';
  return kExitOk;
}

// ---- translate ----------------------------------------------------------------

struct TranslateOptions {
  std::string checkpoint;
  std::string input;
  std::string output;
  std::size_t beam = 12;
  std::size_t max_len = 0;
  std::string merges;
  std::string emit_align;
  std::size_t workers = 1;
  bool length_norm = false;
  std::string variant;
};

void add_translate(CLI::App& app, TranslateOptions& o) {
  app.add_option("--checkpoint", o.checkpoint, "Model checkpoint")->required();
  app.add_option("--input", o.input, "Source file, one sentence per line")->required();
  app.add_option("--output", o.output, "Output file (default: stdout)");
  app.add_option("--beam", o.beam, "Beam width")->check(CLI::PositiveNumber);
  app.add_option("--max-len", o.max_len, "Maximum output length; 0 means 3 x source + 10");
  app.add_option("--merges", o.merges, "Apply these BPE merges to the input first");
  app.add_option("--emit-align", o.emit_align, "Directory for per-sentence FGAT files");
  app.add_option("--workers", o.workers, "Decoding threads");
  app.add_flag("--length-norm", o.length_norm, "Rank finished hypotheses by per-token log-prob");
  app.add_option("--variant", o.variant, "Expected attention variant of the checkpoint")
      ->check(CLI::IsMember({"att", "atty", "atty2d"}));
}

int cmd_translate(const TranslateOptions& o, std::ostream& out, std::ostream& err) {
  require_file(o.checkpoint, "checkpoint");
  require_file(o.input, "input file");
  const Model model = load_checkpoint(o.checkpoint);
  const Vocabulary src_vocab = Vocabulary::load(vocab_path(o.checkpoint, "src"));
  const Vocabulary tgt_vocab = Vocabulary::load(vocab_path(o.checkpoint, "tgt"));
  if (src_vocab.size() != model.config().src_vocab || tgt_vocab.size() != model.config().tgt_vocab) {
    throw FormatError("vocabulary files do not match the checkpoint configuration");
  }
  if (!o.variant.empty() && parse_variant(o.variant) != model.config().variant) {
    throw FormatError("checkpoint holds a " + to_string(model.config().variant) +
                      " model, not " + o.variant);
  }
  std::optional<BPEMerges> merges;
  if (!o.merges.empty()) {
    require_file(o.merges, "merges file");
    merges = load_merges(o.merges);
  }

  const auto lines = read_lines(o.input);
  std::vector<Sentence> sources;
  std::vector<IdSequence> ids;
  std::vector<std::size_t> index;  // positions of non-empty lines
  for (std::size_t i = 0; i < lines.size(); ++i) {
    Sentence tokens = tokenize(lines[i]);
    if (merges) tokens = apply_bpe(*merges, tokens);
    if (tokens.empty()) continue;
    ids.push_back(src_vocab.encode(tokens, false));
    sources.push_back(std::move(tokens));
    index.push_back(i);
  }
  DecodeOptions options;
  options.beam_width = o.beam;
  options.max_len = o.max_len;
  options.length_normalization = o.length_norm;
  const auto hyps = translate_all(model, ids, options, o.workers);

  std::vector<std::string> outputs(lines.size());
  auto warn = [&](const std::string& msg) {
    if (log_level() >= 1) err << "warning: " << msg << '\n';
  };
  for (std::size_t k = 0; k < hyps.size(); ++k) {
    outputs[index[k]] = join(unbpe(tgt_vocab.decode(hyps[k].tokens), warn));
  }
  write_output(o.output, outputs, out);

  if (!o.emit_align.empty()) {
    fs::create_directories(o.emit_align);
    const std::string fingerprint = model.fingerprint();
    for (std::size_t k = 0; k < hyps.size(); ++k) {
      Sentence target;
      for (auto id : hyps[k].tokens) target.push_back(tgt_vocab.to_token(id));
      AlignmentRecord rec =
          make_record(alignment_of(model, hyps[k]), sources[k], std::move(target), fingerprint);
      char name[32];
      std::snprintf(name, sizeof name, "%06zu.fgat", index[k]);
      save_alignment(rec, fs::path(o.emit_align) / name);
    }
  }
  return kExitOk;
}

// ---- score ------------------------------------------------------------------

struct ScoreOptions {
  std::string hyp;
  std::string ref;
  bool smooth = false;
};

void add_score(CLI::App& app, ScoreOptions& o) {
  app.add_option("--hyp", o.hyp, "Hypothesis file (un-BPE'd, tokenized)")->required();
  app.add_option("--ref", o.ref, "Reference file")->required();
  app.add_flag("--smooth", o.smooth, "Add-one smoothing for n >= 2");
}

int cmd_score(const ScoreOptions& o, std::ostream& out) {
  require_file(o.hyp, "hypothesis file");
  require_file(o.ref, "reference file");
  std::vector<Sentence> hyps, refs;
  for (const auto& l : read_lines(o.hyp)) hyps.push_back(tokenize(l));
  for (const auto& l : read_lines(o.ref)) refs.push_back(tokenize(l));
  out << bleu(hyps, refs, o.smooth).to_line() << '\n';
  return kExitOk;
}

// ---- align ------------------------------------------------------------------

struct AlignOptions {
  std::string input;
  std::string out_prefix;
  bool avg_dims = false;
  bool avg_target = false;
  std::optional<std::size_t> slice;
  std::vector<std::size_t> top_dims;
  std::string cols;
};

void add_align(CLI::App& app, AlignOptions& o) {
  app.add_option("--input", o.input, "FGAT alignment file")->required();
  app.add_option("--out", o.out_prefix, "Output prefix (default: input without extension)");
  auto* a = app.add_flag("--avg-dims", o.avg_dims, "Average over context dimensions");
  auto* b = app.add_flag("--avg-target", o.avg_target, "Average over target steps");
  auto* c = app.add_option("--slice", o.slice, "Single dimension slice");
  auto* d = app.add_option("--top-dims", o.top_dims, "Top k dimensions of source position t")
                ->expected(2)
                ->type_name("T K");
  a->excludes(b, c, d);
  b->excludes(c, d);
  c->excludes(d);
  app.add_option("--cols", o.cols, "Render only columns begin:end of the heatmap");
}

std::pair<std::size_t, std::size_t> parse_range(const std::string& text) {
  auto colon = text.find(':');
  if (colon == std::string::npos) throw ContractError("--cols expects begin:end");
  try {
    return {std::stoul(text.substr(0, colon)), std::stoul(text.substr(colon + 1))};
  } catch (const std::exception&) {
    throw ContractError("--cols expects begin:end with unsigned integers");
  }
}

int cmd_align(const AlignOptions& o, std::ostream& out, std::ostream& err) {
  require_file(o.input, "alignment file");
  const AlignmentRecord rec = load_alignment(o.input);
  const std::string prefix =
      o.out_prefix.empty() ? (fs::path(o.input).parent_path() / fs::path(o.input).stem()).string()
                           : o.out_prefix;
  auto notice = [&](const std::string& msg) {
    if (log_level() >= 1) err << "notice: " << msg << '\n';
  };
  auto index_labels = [](std::size_t n) {
    std::vector<std::string> labels;
    for (std::size_t i = 0; i < n; ++i) labels.push_back(std::to_string(i));
    return labels;
  };

  if (!o.top_dims.empty()) {
    const auto ranked = top_dims(rec, o.top_dims[0], o.top_dims[1]);
    std::ostringstream table;
    char buf[64];
    for (const auto& [dim, mass] : ranked) {
      std::snprintf(buf, sizeof buf, "%zu\t%.6f\n", dim, mass);
      table << buf;
    }
    out << table.str();
    std::ofstream file(prefix + ".top.tsv", std::ios::trunc);
    if (!file) throw FilesystemError("cannot write " + prefix + ".top.tsv");
    file << table.str();
    return kExitOk;
  }

  Matrix m;
  std::vector<std::string> rows, cols;
  std::string suffix;
  if (o.avg_target) {
    m = avg_over_target(rec, notice);
    rows = rec.source;
    cols = index_labels(m.cols);
    suffix = ".avg_target";
  } else if (o.slice) {
    m = slice_dim(rec, *o.slice);
    rows = rec.target;
    cols = rec.source;
    suffix = ".slice" + std::to_string(*o.slice);
  } else {
    m = avg_over_dims(rec, notice);
    rows = rec.target;
    cols = rec.source;
    suffix = ".avg_dims";
  }
  if (!o.cols.empty()) {
    auto [begin, end] = parse_range(o.cols);
    m = m.columns(begin, end);
    cols = std::vector<std::string>(cols.begin() + static_cast<std::ptrdiff_t>(begin),
                                    cols.begin() + static_cast<std::ptrdiff_t>(end));
  }
  heatmap(m, prefix + suffix + ".pgm", rows, cols);
  std::ofstream table(prefix + suffix + ".tsv", std::ios::trunc);
  if (!table) throw FilesystemError("cannot write " + prefix + suffix + ".tsv");
  table << format_table(m, rows, cols);
  out << prefix + suffix + ".pgm" << '\n';
  return kExitOk;
}

// ---- bpe ----------------------------------------------------------------------

struct BpeOptions {
  std::string input;
  std::string output;
  std::string merges;
  std::size_t num_merges = 30000;
};

int cmd_bpe_learn(const BpeOptions& o, std::ostream& out) {
  require_file(o.input, "input file");
  std::vector<Sentence> corpus;
  for (const auto& l : read_lines(o.input)) corpus.push_back(tokenize(l));
  const BPEMerges merges = learn_bpe(corpus, o.num_merges);
  save_merges(merges, o.merges);
  out << merges.size() << " merges written to " << o.merges << '\n';
  return kExitOk;
}

int cmd_bpe_apply(const BpeOptions& o, std::ostream& out) {
  require_file(o.merges, "merges file");
  require_file(o.input, "input file");
  const BPEMerges merges = load_merges(o.merges);
  std::vector<std::string> lines;
  for (const auto& l : read_lines(o.input)) lines.push_back(join(apply_bpe(merges, tokenize(l))));
  write_output(o.output, lines, out);
  return kExitOk;
}

int cmd_bpe_undo(const BpeOptions& o, std::ostream& out, std::ostream& err) {
  require_file(o.input, "input file");
  auto warn = [&](const std::string& msg) {
    if (log_level() >= 1) err << "warning: " << msg << '\n';
  };
  std::vector<std::string> lines;
  for (const auto& l : read_lines(o.input)) lines.push_back(join(unbpe(tokenize(l), warn)));
  write_output(o.output, lines, out);
  return kExitOk;
}

// Splices `--key=value` pairs from --config files right after the subcommand
// path, so that options given on the command line (which come later) win.
std::vector<std::string> expand_config(const std::vector<std::string>& args) {
  std::size_t path_end = 0;
  while (path_end < args.size() && path_end < 2 && !args[path_end].empty() &&
         args[path_end][0] != '-') {
    ++path_end;
  }
  std::vector<std::string> from_config;
  for (std::size_t i = path_end; i < args.size(); ++i) {
    std::string file;
    if (args[i] == "--config" && i + 1 < args.size()) {
      file = args[i + 1];
    } else if (args[i].rfind("--config=", 0) == 0) {
      file = args[i].substr(9);
    } else {
      continue;
    }
    for (const auto& [key, value] : read_config_file(file)) {
      from_config.push_back("--" + key + "=" + value);
    }
  }
  std::vector<std::string> expanded(args.begin(), args.begin() + static_cast<std::ptrdiff_t>(path_end));
  expanded.insert(expanded.end(), from_config.begin(), from_config.end());
  expanded.insert(expanded.end(), args.begin() + static_cast<std::ptrdiff_t>(path_end), args.end());
  return expanded;
}

}  // namespace

std::map<std::string, std::string> read_config_file(const std::string& path) {
  require_file(path, "config file");
  std::map<std::string, std::string> values;
  for (const auto& raw : read_lines(path)) {
    std::string line = raw;
    const auto first = line.find_first_not_of(" \t");
    if (first == std::string::npos || line[first] == '#') continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw ContractError("config line without '=': " + raw);
    auto trim = [](std::string s) {
      const auto b = s.find_first_not_of(" \t");
      const auto e = s.find_last_not_of(" \t");
      return b == std::string::npos ? std::string() : s.substr(b, e - b + 1);
    };
    const std::string key = trim(line.substr(0, eq));
    if (key.empty()) throw ContractError("config line without key: " + raw);
    values[key] = trim(line.substr(eq + 1));
  }
  return values;
}

int run(const std::vector<std::string>& raw_args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Attention-based NMT with temporal and fine-grained attention", "fgnmt"};
  app.option_defaults()->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);
  app.require_subcommand(1);
  std::string config_file;

  TrainOptions train_opts;
  auto* train = app.add_subcommand("train", "Train a model with early stopping on validation BLEU");
  add_train(*train, train_opts);
  train->add_option("--config", config_file, "key=value file; command-line flags override it");

  TranslateOptions translate_opts;
  auto* translate = app.add_subcommand("translate", "Translate a file with beam search");
  add_translate(*translate, translate_opts);
  translate->add_option("--config", config_file, "key=value file; command-line flags override it");

  ScoreOptions score_opts;
  auto* score = app.add_subcommand("score", "Corpus BLEU of a hypothesis file");
  add_score(*score, score_opts);
  score->add_option("--config", config_file, "key=value file; command-line flags override it");

  AlignOptions align_opts;
  auto* align = app.add_subcommand("align", "Analyse an exported alignment tensor");
  add_align(*align, align_opts);
  align->add_option("--config", config_file, "key=value file; command-line flags override it");

  BpeOptions bpe_opts;
  auto* bpe = app.add_subcommand("bpe", "Byte pair encoding utilities");
  bpe->require_subcommand(1);
  auto* learn = bpe->add_subcommand("learn", "Learn merges from a corpus");
  learn->add_option("--input", bpe_opts.input, "Tokenized corpus")->required();
  learn->add_option("--merges", bpe_opts.merges, "Output merges file")->required();
  learn->add_option("--num-merges", bpe_opts.num_merges, "Maximum number of merges");
  auto* apply = bpe->add_subcommand("apply", "Segment a file into subwords");
  apply->add_option("--merges", bpe_opts.merges, "Merges file")->required();
  apply->add_option("--input", bpe_opts.input, "Tokenized text")->required();
  apply->add_option("--output", bpe_opts.output, "Output file (default: stdout)");
  auto* undo = bpe->add_subcommand("undo", "Join @@-marked subwords");
  undo->add_option("--input", bpe_opts.input, "Subword text")->required();
  undo->add_option("--output", bpe_opts.output, "Output file (default: stdout)");
  for (auto* sub : {learn, apply, undo}) {
    sub->add_option("--config", config_file, "key=value file; command-line flags override it");
  }

  try {
    std::vector<std::string> args = expand_config(raw_args);
    // CLI11 consumes arguments from the back.
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    return kExitUsage;
  }

  try {
    if (*train) return cmd_train(train_opts, out, err);
    if (*translate) return cmd_translate(translate_opts, out, err);
    if (*score) return cmd_score(score_opts, out);
    if (*align) {
      if (!align_opts.top_dims.empty() && align_opts.top_dims.size() != 2) {
        throw ContractError("--top-dims expects two values: T K");
      }
      return cmd_align(align_opts, out, err);
    }
    if (*learn) return cmd_bpe_learn(bpe_opts, out);
    if (*apply) return cmd_bpe_apply(bpe_opts, out);
    if (*undo) return cmd_bpe_undo(bpe_opts, out, err);
  } catch (const NumericError& e) {
    err << "numeric failure: " << e.what() << '\n';
    return kExitNumeric;
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitUsage;
  }
  return kExitUsage;
}

}  // namespace fgnmt::cli
