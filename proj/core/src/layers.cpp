#include "fgnmt/layers.hpp"

#include <vector>

#include "fgnmt/error.hpp"

namespace fgnmt {

Tensor embed(const EmbeddingMatrix& embedding, std::span<const std::size_t> ids) {
  if (ids.empty()) throw ContractError("embed: empty id sequence");
  for (auto id : ids) {
    if (id >= embedding.vocab_size()) {
      throw VocabularyError("embed: id " + std::to_string(id) + " outside vocabulary of size " +
                            std::to_string(embedding.vocab_size()));
    }
  }
  return gather_columns(embedding.table, ids);
}

LstmState zero_lstm_state(std::size_t hidden_dim) {
  return {Tensor::zeros({hidden_dim}), Tensor::zeros({hidden_dim})};
}

LstmState lstm_step(const LstmParams& params, const Tensor& x, const LstmState& state) {
  const std::size_t hidden = params.hidden_dim();
  if (x.rank() != 1 || x.dim(0) != params.input_dim()) {
    throw DimensionError("lstm_step: input " + shape_string(x.shape()) + " but cell expects [" +
                         std::to_string(params.input_dim()) + "]");
  }
  if (state.h.shape() != Shape{hidden} || state.c.shape() != Shape{hidden}) {
    throw DimensionError("lstm_step: state shapes " + shape_string(state.h.shape()) + "/" +
                         shape_string(state.c.shape()) + " but cell hidden size is " +
                         std::to_string(hidden));
  }
  Tensor gates = linear(concat({x, state.h}), params.weight, params.bias);
  Tensor in_gate = sigmoid(slice_last(gates, 0, hidden));
  Tensor forget_gate = sigmoid(slice_last(gates, hidden, 2 * hidden));
  Tensor out_gate = sigmoid(slice_last(gates, 2 * hidden, 3 * hidden));
  Tensor candidate = tanh(slice_last(gates, 3 * hidden, 4 * hidden));
  Tensor c = add(mul(forget_gate, state.c), mul(in_gate, candidate));
  Tensor h = mul(out_gate, tanh(c));
  return {h, c};
}

Tensor ffnn(const FeedForwardParams& params, const Tensor& input) {
  const std::size_t width = input.shape().back();
  if (width != params.input_dim()) {
    throw DimensionError("ffnn: input " + shape_string(input.shape()) +
                         " does not match first layer " + shape_string(params.w1.shape()));
  }
  return linear(tanh(linear(input, params.w1, params.b1)), params.w2, params.b2);
}

AnnotationSet bidirectional_encode(const LstmParams& fwd, const LstmParams& bwd,
                                   const Tensor& embeddings, const LstmState* fwd_init,
                                   const LstmState* bwd_init) {
  if (!embeddings.defined() || embeddings.rank() != 2) {
    throw ContractError("bidirectional_encode: expected a [T x E] embedding matrix");
  }
  const std::size_t length = embeddings.dim(0);
  std::vector<Tensor> inputs;
  inputs.reserve(length);
  for (std::size_t t = 0; t < length; ++t) inputs.push_back(row(embeddings, t));

  std::vector<Tensor> forward_states(length), backward_states(length);
  LstmState state = fwd_init ? *fwd_init : zero_lstm_state(fwd.hidden_dim());
  for (std::size_t t = 0; t < length; ++t) {
    state = lstm_step(fwd, inputs[t], state);
    forward_states[t] = state.h;
  }
  state = bwd_init ? *bwd_init : zero_lstm_state(bwd.hidden_dim());
  for (std::size_t t = length; t-- > 0;) {
    state = lstm_step(bwd, inputs[t], state);
    backward_states[t] = state.h;
  }
  std::vector<Tensor> annotations;
  annotations.reserve(length);
  for (std::size_t t = 0; t < length; ++t) {
    annotations.push_back(concat({forward_states[t], backward_states[t]}));
  }
  return {stack_rows(annotations)};
}

EmbeddingMatrix make_embedding(ParameterSet& params, const std::string& name, std::size_t dim,
                               std::size_t vocab_size, std::mt19937_64& rng) {
  return {params.add(name, glorot_uniform(dim, vocab_size, rng))};
}

EmbeddingMatrix embedding_view(const ParameterSet& params, const std::string& name) {
  return {params.get(name)};
}

LstmParams make_lstm(ParameterSet& params, const std::string& prefix, std::size_t input_dim,
                     std::size_t hidden_dim, std::mt19937_64& rng) {
  LstmParams lstm;
  lstm.weight = params.add(prefix + ".W", glorot_uniform(4 * hidden_dim, input_dim + hidden_dim, rng));
  lstm.bias = params.add(prefix + ".b", Tensor::zeros({4 * hidden_dim}));
  return lstm;
}

LstmParams lstm_view(const ParameterSet& params, const std::string& prefix) {
  return {params.get(prefix + ".W"), params.get(prefix + ".b")};
}

FeedForwardParams make_ffnn(ParameterSet& params, const std::string& prefix,
                            std::size_t input_dim, std::size_t hidden_dim,
                            std::size_t output_dim, std::mt19937_64& rng) {
  FeedForwardParams f;
  f.w1 = params.add(prefix + ".W1", glorot_uniform(hidden_dim, input_dim, rng));
  f.b1 = params.add(prefix + ".b1", Tensor::zeros({hidden_dim}));
  f.w2 = params.add(prefix + ".W2", glorot_uniform(output_dim, hidden_dim, rng));
  f.b2 = params.add(prefix + ".b2", Tensor::zeros({output_dim}));
  return f;
}

FeedForwardParams ffnn_view(const ParameterSet& params, const std::string& prefix) {
  return {params.get(prefix + ".W1"), params.get(prefix + ".b1"), params.get(prefix + ".W2"),
          params.get(prefix + ".b2")};
}

}  // namespace fgnmt
