#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "fgnmt/attention.hpp"
#include "fgnmt/layers.hpp"
#include "fgnmt/parameters.hpp"
#include "fgnmt/tensor.hpp"

namespace fgnmt {

struct ModelConfig {
  AttentionVariant variant = AttentionVariant::atty2d;
  bool contextualization = false;
  std::size_t src_vocab = 30000;
  std::size_t tgt_vocab = 30000;
  std::size_t emb_dim = 620;
  std::size_t hidden_dim = 1000;
  std::size_t align_hidden_dim = 2000;
  std::uint64_t seed = 1;
  // Learn the encoder's initial LSTM states instead of fixing them at zero.
  bool trained_initial_state = false;

  // Configuration of the large En-De/En-Fi systems.
  static ModelConfig wmt_defaults();
  // Small configuration with the alignment width tied to 2 · hidden.
  static ModelConfig toy(AttentionVariant variant, std::size_t src_vocab, std::size_t tgt_vocab,
                         std::size_t emb_dim, std::size_t hidden_dim, std::uint64_t seed);

  std::size_t annotation_dim() const { return 2 * hidden_dim; }
  void validate() const;

  // key=value lines, fixed key order.
  std::string to_text() const;
  static ModelConfig from_text(std::string_view text);

  bool operator==(const ModelConfig&) const = default;
};

struct DecoderState {
  Tensor z;
  Tensor cell;
  std::size_t step = 0;
};

struct StepOutput {
  Tensor log_probs;  // [|V'|]
  Tensor alpha;      // [T] or [T × D]
  DecoderState state;
};

/// Encoder output for one sentence plus everything the decoder reuses.
struct EncodedSource {
  AnnotationSet annotations;
  AttentionScorer scorer;
  DecoderState initial;
};

/// x̂_t = x_t + (1/T) Σ_k N(x_k)
Tensor contextualize(const FeedForwardParams& net, const Tensor& embeddings);

/// Encoder, attention, decoder recurrence and output softmax for p(Y | X).
class Model {
 public:
  explicit Model(ModelConfig config);
  // Adopts existing parameters; names and shapes must match the config.
  Model(ModelConfig config, ParameterSet params);

  const ModelConfig& config() const { return config_; }
  const ParameterSet& params() const { return params_; }
  ParameterSet& params() { return params_; }
  Model clone() const;

  EncodedSource encode_source(std::span<const std::size_t> src) const;
  StepOutput decoder_step(const DecoderState& state, std::size_t y_prev_id,
                          const EncodedSource& source) const;

  // Σ_t' log p(y_t' | y_<t', X) under teacher forcing; the target must end
  // with the end-of-sentence id.
  Tensor sentence_log_likelihood(std::span<const std::size_t> src,
                                 std::span<const std::size_t> tgt) const;
  // Same sum without the end-of-sentence requirement.
  Tensor sequence_log_prob(std::span<const std::size_t> src,
                           std::span<const std::size_t> tgt) const;

  // Stable digest of config and parameter values.
  std::string fingerprint() const;

 private:
  ModelConfig config_;
  ParameterSet params_;
};

// Checkpoint file layout (all integers u32 little-endian):
//   "FGNMT\0" | version | header length | header text (ModelConfig::to_text)
//   then per parameter until end of file:
//   name length | name | rank | extents... | f64 little-endian values
inline constexpr std::uint32_t kCheckpointVersion = 1;

std::string serialize_checkpoint(const Model& model);
Model deserialize_checkpoint(std::string_view bytes);
void save_checkpoint(const Model& model, const std::filesystem::path& path);
Model load_checkpoint(const std::filesystem::path& path);

}  // namespace fgnmt
