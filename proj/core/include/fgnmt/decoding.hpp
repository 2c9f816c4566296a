#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "fgnmt/attention.hpp"
#include "fgnmt/data.hpp"
#include "fgnmt/model.hpp"

namespace fgnmt {

struct Hypothesis {
  IdSequence tokens;  // ends with <eos> unless force-completed at max_len
  double log_prob = 0.0;
  std::vector<double> step_log_probs;
  std::vector<Tensor> alphas;  // one slice per emitted token
  DecoderState state;

  bool ends_with_eos() const;
};

struct DecodeOptions {
  std::size_t beam_width = 12;
  std::size_t max_len = 0;  // 0: 3 · |source| + 10
  // Rank finished hypotheses by log-prob / length instead of the raw sum.
  bool length_normalization = false;
};

std::size_t default_max_len(std::size_t source_length);

/// Beam search over <eos>-terminated hypotheses. Finished hypotheses leave
/// the beam; those reaching max_len are force-completed. <bos> is never
/// emitted. Ties rank the lower token id, then the earlier parent, first.
Hypothesis beam_search(const Model& model, std::span<const std::size_t> src,
                       std::size_t width, std::size_t max_len,
                       bool length_normalization = false);
Hypothesis beam_search(const Model& model, std::span<const std::size_t> src,
                       const DecodeOptions& options);

/// Argmax chaining until <eos> or max_len.
Hypothesis greedy(const Model& model, std::span<const std::size_t> src, std::size_t max_len);

AlignmentTensor alignment_of(const Model& model, const Hypothesis& hyp);

/// Decodes every source with `workers` threads; output order matches input.
std::vector<Hypothesis> translate_all(const Model& model, const std::vector<IdSequence>& sources,
                                      const DecodeOptions& options, std::size_t workers = 1);

}  // namespace fgnmt
