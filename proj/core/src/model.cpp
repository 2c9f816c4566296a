#include "fgnmt/model.hpp"

#include <cstdio>
#include <map>
#include <sstream>

#include "binary_io.hpp"
#include "fgnmt/error.hpp"
#include "fgnmt/special_tokens.hpp"

namespace fgnmt {

namespace {

constexpr std::string_view kCheckpointMagic{"FGNMT\0", 6};

std::size_t parse_size(const std::string& key, const std::string& value) {
  try {
    std::size_t used = 0;
    auto v = std::stoull(value, &used);
    if (used != value.size()) throw std::invalid_argument(value);
    return static_cast<std::size_t>(v);
  } catch (const std::exception&) {
    throw FormatError("config field " + key + ": not an unsigned integer: '" + value + "'");
  }
}

bool parse_bool(const std::string& key, const std::string& value) {
  if (value == "true" || value == "1") return true;
  if (value == "false" || value == "0") return false;
  throw FormatError("config field " + key + ": not a boolean: '" + value + "'");
}

// Builds a freshly initialized parameter set; the draw order is part of the
// reproducibility contract.
ParameterSet init_params(const ModelConfig& c) {
  std::mt19937_64 rng(c.seed);
  ParameterSet p;
  const std::size_t d = c.annotation_dim();
  make_embedding(p, "src_emb", c.emb_dim, c.src_vocab, rng);
  make_embedding(p, "tgt_emb", c.emb_dim, c.tgt_vocab, rng);
  if (c.contextualization) make_ffnn(p, "ctx", c.emb_dim, c.emb_dim, c.emb_dim, rng);
  make_lstm(p, "enc_fwd", c.emb_dim, c.hidden_dim, rng);
  make_lstm(p, "enc_bwd", c.emb_dim, c.hidden_dim, rng);
  if (c.trained_initial_state) {
    for (const char* prefix : {"enc_fwd", "enc_bwd"}) {
      p.add(std::string(prefix) + ".h0", Tensor::zeros({c.hidden_dim}));
      p.add(std::string(prefix) + ".c0", Tensor::zeros({c.hidden_dim}));
    }
  }
  p.add("init.W", glorot_uniform(c.hidden_dim, d, rng));
  p.add("init.b", Tensor::zeros({c.hidden_dim}));
  const std::size_t score_in = c.hidden_dim + d + (uses_target_embedding(c.variant) ? c.emb_dim : 0);
  make_ffnn(p, "att", score_in, c.align_hidden_dim, is_finegrained(c.variant) ? d : 1, rng);
  make_lstm(p, "dec", c.emb_dim + d, c.hidden_dim, rng);
  p.add("out.W", glorot_uniform(c.tgt_vocab, c.hidden_dim, rng));
  p.add("out.b", Tensor::zeros({c.tgt_vocab}));
  return p;
}

void check_ids(std::span<const std::size_t> ids, std::size_t vocab, const char* side) {
  for (auto id : ids) {
    if (id >= vocab) {
      throw VocabularyError(std::string(side) + " id " + std::to_string(id) +
                            " outside vocabulary of size " + std::to_string(vocab));
    }
  }
}

}  // namespace

// ---- ModelConfig ----------------------------------------------------------

ModelConfig ModelConfig::wmt_defaults() {
  ModelConfig c;
  c.variant = AttentionVariant::atty2d;
  c.src_vocab = 30000;
  c.tgt_vocab = 30000;
  c.emb_dim = 620;
  c.hidden_dim = 1000;
  c.align_hidden_dim = 2000;
  return c;
}

ModelConfig ModelConfig::toy(AttentionVariant variant, std::size_t src_vocab,
                             std::size_t tgt_vocab, std::size_t emb_dim, std::size_t hidden_dim,
                             std::uint64_t seed) {
  ModelConfig c;
  c.variant = variant;
  c.src_vocab = src_vocab;
  c.tgt_vocab = tgt_vocab;
  c.emb_dim = emb_dim;
  c.hidden_dim = hidden_dim;
  c.align_hidden_dim = 2 * hidden_dim;
  c.seed = seed;
  return c;
}

void ModelConfig::validate() const {
  if (src_vocab <= kReservedIds || tgt_vocab <= kReservedIds) {
    throw ContractError("vocabulary sizes must exceed the reserved ids");
  }
  if (emb_dim == 0 || hidden_dim == 0 || align_hidden_dim == 0) {
    throw ContractError("model dimensions must be positive");
  }
}

std::string ModelConfig::to_text() const {
  std::ostringstream out;
  out << "variant=" << to_string(variant) << '\n'
      << "contextualization=" << (contextualization ? "true" : "false") << '\n'
      << "src_vocab=" << src_vocab << '\n'
      << "tgt_vocab=" << tgt_vocab << '\n'
      << "emb_dim=" << emb_dim << '\n'
      << "hidden_dim=" << hidden_dim << '\n'
      << "align_hidden_dim=" << align_hidden_dim << '\n'
      << "seed=" << seed << '\n'
      << "trained_initial_state=" << (trained_initial_state ? "true" : "false") << '\n';
  return out.str();
}

ModelConfig ModelConfig::from_text(std::string_view text) {
  std::map<std::string, std::string> fields;
  std::istringstream in{std::string(text)};
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    auto eq = line.find('=');
    if (eq == std::string::npos) throw FormatError("malformed config line: '" + line + "'");
    fields[line.substr(0, eq)] = line.substr(eq + 1);
  }
  ModelConfig c;
  auto take = [&](const std::string& key) {
    auto it = fields.find(key);
    if (it == fields.end()) throw FormatError("config field missing: " + key);
    std::string v = it->second;
    fields.erase(it);
    return v;
  };
  try {
    c.variant = parse_variant(take("variant"));
  } catch (const ContractError& e) {
    throw FormatError(e.what());
  }
  c.contextualization = parse_bool("contextualization", take("contextualization"));
  c.src_vocab = parse_size("src_vocab", take("src_vocab"));
  c.tgt_vocab = parse_size("tgt_vocab", take("tgt_vocab"));
  c.emb_dim = parse_size("emb_dim", take("emb_dim"));
  c.hidden_dim = parse_size("hidden_dim", take("hidden_dim"));
  c.align_hidden_dim = parse_size("align_hidden_dim", take("align_hidden_dim"));
  c.seed = parse_size("seed", take("seed"));
  c.trained_initial_state = parse_bool("trained_initial_state", take("trained_initial_state"));
  if (!fields.empty()) throw FormatError("unknown config field: " + fields.begin()->first);
  return c;
}

// ---- Model ----------------------------------------------------------------

Tensor contextualize(const FeedForwardParams& net, const Tensor& embeddings) {
  if (!embeddings.defined() || embeddings.rank() != 2) {
    throw ContractError("contextualize: expected a non-empty [T x E] embedding matrix");
  }
  const std::size_t e = embeddings.dim(1);
  if (net.input_dim() != e || net.output_dim() != e) {
    throw DimensionError("contextualize: network must map " + std::to_string(e) + " -> " +
                         std::to_string(e));
  }
  Tensor context = mean_rows(ffnn(net, embeddings));
  return add_row(embeddings, context);
}

Model::Model(ModelConfig config) : config_(config) {
  config_.validate();
  params_ = init_params(config_);
}

Model::Model(ModelConfig config, ParameterSet params) : config_(config), params_(std::move(params)) {
  config_.validate();
  ParameterSet expected = init_params(config_);
  if (expected.size() != params_.size()) {
    throw FormatError("parameter count " + std::to_string(params_.size()) +
                      " does not match config (expected " + std::to_string(expected.size()) + ")");
  }
  for (std::size_t i = 0; i < expected.size(); ++i) {
    const auto& [name, tensor] = expected.entries()[i];
    const auto& [got_name, got] = params_.entries()[i];
    if (name != got_name || tensor.shape() != got.shape()) {
      throw FormatError("parameter " + got_name + " " + shape_string(got.shape()) +
                        " does not match config (expected " + name + " " +
                        shape_string(tensor.shape()) + ")");
    }
  }
}

Model Model::clone() const { return Model(config_, params_.clone()); }

EncodedSource Model::encode_source(std::span<const std::size_t> src) const {
  if (src.empty()) throw ContractError("encode_source: empty source sentence");
  check_ids(src, config_.src_vocab, "source");
  Tensor x = embed(embedding_view(params_, "src_emb"), src);
  if (config_.contextualization) x = contextualize(ffnn_view(params_, "ctx"), x);
  LstmParams fwd = lstm_view(params_, "enc_fwd");
  LstmParams bwd = lstm_view(params_, "enc_bwd");
  AnnotationSet annotations;
  if (config_.trained_initial_state) {
    LstmState fwd_init{params_.get("enc_fwd.h0"), params_.get("enc_fwd.c0")};
    LstmState bwd_init{params_.get("enc_bwd.h0"), params_.get("enc_bwd.c0")};
    annotations = bidirectional_encode(fwd, bwd, x, &fwd_init, &bwd_init);
  } else {
    annotations = bidirectional_encode(fwd, bwd, x);
  }
  EncodedSource out{annotations,
                    AttentionScorer(config_.variant, ffnn_view(params_, "att"), annotations,
                                    config_.hidden_dim, config_.emb_dim),
                    {}};
  Tensor mean = mean_rows(annotations.h);
  out.initial.z = tanh(linear(mean, params_.get("init.W"), params_.get("init.b")));
  out.initial.cell = Tensor::zeros({config_.hidden_dim});
  out.initial.step = 0;
  return out;
}

StepOutput Model::decoder_step(const DecoderState& state, std::size_t y_prev_id,
                               const EncodedSource& source) const {
  if (y_prev_id >= config_.tgt_vocab) {
    throw VocabularyError("decoder_step: target id " + std::to_string(y_prev_id) +
                          " outside vocabulary of size " + std::to_string(config_.tgt_vocab));
  }
  const std::size_t id[1] = {y_prev_id};
  Tensor y_prev = reshape(gather_columns(params_.get("tgt_emb"), id), {config_.emb_dim});
  AttentionOutput att = source.scorer.attend(state.z, y_prev);
  LstmState next = lstm_step(lstm_view(params_, "dec"), concat({y_prev, att.context}),
                             {state.z, state.cell});
  Tensor logits = linear(next.h, params_.get("out.W"), params_.get("out.b"));
  return {log_softmax(logits), att.alpha, {next.h, next.c, state.step + 1}};
}

Tensor Model::sequence_log_prob(std::span<const std::size_t> src,
                                std::span<const std::size_t> tgt) const {
  if (tgt.empty()) throw ContractError("empty target sentence");
  check_ids(tgt, config_.tgt_vocab, "target");
  EncodedSource source = encode_source(src);
  DecoderState state = source.initial;
  std::size_t prev = kBosId;
  Tensor total;
  for (std::size_t t = 0; t < tgt.size(); ++t) {
    StepOutput step = decoder_step(state, prev, source);
    Tensor lp = pick(step.log_probs, tgt[t]);
    total = total.defined() ? add(total, lp) : lp;
    state = step.state;
    prev = tgt[t];
  }
  return total;
}

Tensor Model::sentence_log_likelihood(std::span<const std::size_t> src,
                                      std::span<const std::size_t> tgt) const {
  if (tgt.empty()) throw ContractError("empty target sentence");
  if (tgt.back() != kEosId) {
    throw ContractError("target sentence must end with the end-of-sentence id");
  }
  return sequence_log_prob(src, tgt);
}

std::string Model::fingerprint() const {
  // FNV-1a over the serialized checkpoint.
  std::uint64_t hash = 1469598103934665603ull;
  for (unsigned char ch : serialize_checkpoint(*this)) {
    hash ^= ch;
    hash *= 1099511628211ull;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(hash));
  return buf;
}

// ---- checkpoints ----------------------------------------------------------

std::string serialize_checkpoint(const Model& model) {
  std::string out(kCheckpointMagic);
  binary::put_u32(out, kCheckpointVersion);
  const std::string header = model.config().to_text();
  binary::put_u32(out, static_cast<std::uint32_t>(header.size()));
  out += header;
  for (const auto& [name, tensor] : model.params()) {
    binary::put_u32(out, static_cast<std::uint32_t>(name.size()));
    out += name;
    binary::put_u32(out, static_cast<std::uint32_t>(tensor.rank()));
    for (auto extent : tensor.shape()) binary::put_u32(out, static_cast<std::uint32_t>(extent));
    for (double v : tensor.data()) binary::put_f64(out, v);
  }
  return out;
}

Model deserialize_checkpoint(std::string_view bytes) {
  binary::Reader in(bytes);
  if (in.take(kCheckpointMagic.size()) != kCheckpointMagic) {
    throw FormatError("not a checkpoint file (bad magic)");
  }
  const auto version = in.u32();
  if (version != kCheckpointVersion) {
    throw FormatError("unsupported checkpoint version " + std::to_string(version));
  }
  const auto header_len = in.u32();
  ModelConfig config = ModelConfig::from_text(in.take(header_len));
  ParameterSet params;
  while (!in.at_end()) {
    std::string name(in.take(in.u32()));
    const auto rank = in.u32();
    Shape shape(rank);
    for (auto& extent : shape) extent = in.u32();
    std::vector<double> values(shape_size(shape));
    for (auto& v : values) v = in.f64();
    params.add(std::move(name), Tensor::from(std::move(shape), std::move(values)));
  }
  return Model(config, std::move(params));
}

void save_checkpoint(const Model& model, const std::filesystem::path& path) {
  binary::write_file(path.string(), serialize_checkpoint(model));
}

Model load_checkpoint(const std::filesystem::path& path) {
  return deserialize_checkpoint(binary::read_file(path.string()));
}

}  // namespace fgnmt
