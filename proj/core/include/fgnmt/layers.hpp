#pragma once

#include <cstddef>
#include <random>
#include <span>
#include <string>

#include "fgnmt/parameters.hpp"
#include "fgnmt/tensor.hpp"

namespace fgnmt {

/// Word embedding table of shape [E × |V|]; column w is the vector of word w.
struct EmbeddingMatrix {
  Tensor table;

  std::size_t dim() const { return table.dim(0); }
  std::size_t vocab_size() const { return table.dim(1); }
};

/// Rows t of the result are the embeddings of ids[t]. Throws VocabularyError
/// on an id outside the table.
Tensor embed(const EmbeddingMatrix& embedding, std::span<const std::size_t> ids);

/// LSTM gate parameters. `weight` is [4H × (I + H)] acting on [x; h], with
/// gate blocks stacked in the order input, forget, output, candidate.
struct LstmParams {
  Tensor weight;
  Tensor bias;  // [4H]

  std::size_t hidden_dim() const { return bias.dim(0) / 4; }
  std::size_t input_dim() const { return weight.dim(1) - hidden_dim(); }
};

struct LstmState {
  Tensor h;
  Tensor c;
};

LstmState zero_lstm_state(std::size_t hidden_dim);
LstmState lstm_step(const LstmParams& params, const Tensor& x, const LstmState& state);

/// Single-hidden-layer network: W2 · tanh(W1 · x + b1) + b2.
struct FeedForwardParams {
  Tensor w1;  // [H × I]
  Tensor b1;  // [H]
  Tensor w2;  // [O × H]
  Tensor b2;  // [O]

  std::size_t input_dim() const { return w1.dim(1); }
  std::size_t hidden_dim() const { return w1.dim(0); }
  std::size_t output_dim() const { return w2.dim(0); }
};

/// Applies the network to a vector [I] or row-wise to a matrix [N × I].
Tensor ffnn(const FeedForwardParams& params, const Tensor& input);

/// Encoder output: row t of `h` is the annotation vector h_t.
struct AnnotationSet {
  Tensor h;  // [T × D]

  std::size_t length() const { return h.dim(0); }
  std::size_t dim() const { return h.dim(1); }
};

/// Forward and reverse LSTMs over `embeddings` [T × E]; h_t = [fwd_t; bwd_t].
/// Initial states come from the optional `*_init` arguments, zero otherwise.
AnnotationSet bidirectional_encode(const LstmParams& fwd, const LstmParams& bwd,
                                   const Tensor& embeddings,
                                   const LstmState* fwd_init = nullptr,
                                   const LstmState* bwd_init = nullptr);

// ---- construction ----------------------------------------------------------

EmbeddingMatrix make_embedding(ParameterSet& params, const std::string& name, std::size_t dim,
                               std::size_t vocab_size, std::mt19937_64& rng);
EmbeddingMatrix embedding_view(const ParameterSet& params, const std::string& name);

LstmParams make_lstm(ParameterSet& params, const std::string& prefix, std::size_t input_dim,
                     std::size_t hidden_dim, std::mt19937_64& rng);
LstmParams lstm_view(const ParameterSet& params, const std::string& prefix);

FeedForwardParams make_ffnn(ParameterSet& params, const std::string& prefix,
                            std::size_t input_dim, std::size_t hidden_dim,
                            std::size_t output_dim, std::mt19937_64& rng);
FeedForwardParams ffnn_view(const ParameterSet& params, const std::string& prefix);

}  // namespace fgnmt
