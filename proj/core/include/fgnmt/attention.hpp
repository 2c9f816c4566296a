#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>

#include "fgnmt/layers.hpp"
#include "fgnmt/tensor.hpp"

namespace fgnmt {

/// Att: score from (z, h). AttY: score from (z, h, y). AttY2D: one score per
/// annotation dimension from (z, h, y), normalized per dimension.
enum class AttentionVariant { att, atty, atty2d };

std::string to_string(AttentionVariant variant);
AttentionVariant parse_variant(const std::string& name);
bool is_finegrained(AttentionVariant variant);
bool uses_target_embedding(AttentionVariant variant);

// Per-annotation score functions. The score network input is the
// concatenation [z_prev; h_t] or [z_prev; h_t; y_prev].
Tensor score_att(const FeedForwardParams& f, const Tensor& z_prev, const Tensor& h_t);
Tensor score_atty(const FeedForwardParams& f, const Tensor& z_prev, const Tensor& h_t,
                  const Tensor& y_prev);
Tensor score_atty2d(const FeedForwardParams& f, const Tensor& z_prev, const Tensor& h_t,
                    const Tensor& y_prev);

// Softmax over source positions: e[T] -> alpha[T].
Tensor normalize_temporal(const Tensor& scores);
// Independent softmax over source positions for every dimension: [T × D].
Tensor normalize_dimensionwise(const Tensor& scores);

// c = Σ_t alpha_t · h_t
Tensor combine_temporal(const Tensor& alpha, const AnnotationSet& annotations);
// c^d = Σ_t alpha^d_t · h^d_t
Tensor combine_finegrained(const Tensor& alpha, const AnnotationSet& annotations);

struct AttentionOutput {
  Tensor alpha;    // [T] temporal, [T × D] fine-grained
  Tensor context;  // [D]
};

/// Scores every annotation of one source sentence at once. The annotation
/// block of the score network's first layer is applied once at construction
/// and reused at every decoder step; results equal the per-annotation score
/// functions above.
class AttentionScorer {
 public:
  AttentionScorer() = default;
  AttentionScorer(AttentionVariant variant, FeedForwardParams score_net,
                  AnnotationSet annotations, std::size_t state_dim,
                  std::size_t target_embedding_dim);

  AttentionVariant variant() const { return variant_; }
  const AnnotationSet& annotations() const { return annotations_; }

  // [T] for temporal variants, [T × D] for fine-grained. y_prev is ignored by Att.
  Tensor scores(const Tensor& z_prev, const Tensor& y_prev) const;
  AttentionOutput attend(const Tensor& z_prev, const Tensor& y_prev) const;

 private:
  AttentionVariant variant_ = AttentionVariant::att;
  FeedForwardParams net_;
  AnnotationSet annotations_;
  Tensor state_block_;      // W1 columns acting on z_prev
  Tensor target_block_;     // W1 columns acting on y_prev (AttY, AttY2D)
  Tensor annotation_part_;  // H · W1_hᵀ + b1, [T × A]
};


/// Attention weights of a whole decode: [T' × T] for temporal variants,
/// [T' × T × D] for fine-grained.
struct AlignmentTensor {
  AttentionVariant variant = AttentionVariant::att;
  Tensor alpha;

  std::size_t target_length() const { return alpha.dim(0); }
  std::size_t source_length() const { return alpha.dim(1); }
  std::size_t dims() const { return alpha.rank() == 3 ? alpha.dim(2) : 1; }
};

/// Stacks per-step alpha slices (all [T] or all [T × D]) along a new leading axis.
AlignmentTensor stack_alignment(AttentionVariant variant, std::span<const Tensor> slices);

}  // namespace fgnmt
