#include "fgnmt/attention.hpp"

#include "fgnmt/error.hpp"

namespace fgnmt {

std::string to_string(AttentionVariant variant) {
  switch (variant) {
    case AttentionVariant::att: return "att";
    case AttentionVariant::atty: return "atty";
    case AttentionVariant::atty2d: return "atty2d";
  }
  return "?";
}

AttentionVariant parse_variant(const std::string& name) {
  if (name == "att") return AttentionVariant::att;
  if (name == "atty") return AttentionVariant::atty;
  if (name == "atty2d") return AttentionVariant::atty2d;
  throw ContractError("unknown attention variant '" + name + "' (expected att, atty or atty2d)");
}

bool is_finegrained(AttentionVariant variant) { return variant == AttentionVariant::atty2d; }

bool uses_target_embedding(AttentionVariant variant) {
  return variant != AttentionVariant::att;
}

namespace {

void require_vector(const Tensor& t, const char* what) {
  if (!t.defined() || t.rank() != 1) {
    throw DimensionError(std::string(what) + " must be a vector");
  }
}

void require_output_dim(const FeedForwardParams& f, std::size_t expected, const char* op) {
  if (f.output_dim() != expected) {
    throw DimensionError(std::string(op) + ": score network has " +
                         std::to_string(f.output_dim()) + " outputs, expected " +
                         std::to_string(expected));
  }
}

}  // namespace

Tensor score_att(const FeedForwardParams& f, const Tensor& z_prev, const Tensor& h_t) {
  require_vector(z_prev, "score_att: z_prev");
  require_vector(h_t, "score_att: h_t");
  require_output_dim(f, 1, "score_att");
  return reshape(ffnn(f, concat({z_prev, h_t})), {});
}

Tensor score_atty(const FeedForwardParams& f, const Tensor& z_prev, const Tensor& h_t,
                  const Tensor& y_prev) {
  require_vector(z_prev, "score_atty: z_prev");
  require_vector(h_t, "score_atty: h_t");
  require_vector(y_prev, "score_atty: y_prev");
  require_output_dim(f, 1, "score_atty");
  return reshape(ffnn(f, concat({z_prev, h_t, y_prev})), {});
}

Tensor score_atty2d(const FeedForwardParams& f, const Tensor& z_prev, const Tensor& h_t,
                    const Tensor& y_prev) {
  require_vector(z_prev, "score_atty2d: z_prev");
  require_vector(h_t, "score_atty2d: h_t");
  require_vector(y_prev, "score_atty2d: y_prev");
  require_output_dim(f, h_t.dim(0), "score_atty2d");
  return ffnn(f, concat({z_prev, h_t, y_prev}));
}

Tensor normalize_temporal(const Tensor& scores) {
  if (!scores.defined() || scores.rank() != 1) {
    throw DimensionError("normalize_temporal: expected scores of shape [T]");
  }
  return softmax(scores, 0);
}

Tensor normalize_dimensionwise(const Tensor& scores) {
  if (!scores.defined() || scores.rank() != 2) {
    throw DimensionError("normalize_dimensionwise: expected scores of shape [T x D]");
  }
  return softmax(scores, 0);
}

Tensor combine_temporal(const Tensor& alpha, const AnnotationSet& annotations) {
  if (alpha.rank() != 1 || alpha.dim(0) != annotations.length()) {
    throw DimensionError("combine_temporal: alpha " + shape_string(alpha.shape()) +
                         " does not match annotations " + shape_string(annotations.h.shape()));
  }
  Tensor weights = reshape(alpha, {1, alpha.dim(0)});
  return reshape(matmul(weights, annotations.h), {annotations.dim()});
}

Tensor combine_finegrained(const Tensor& alpha, const AnnotationSet& annotations) {
  if (alpha.shape() != annotations.h.shape()) {
    throw DimensionError("combine_finegrained: alpha " + shape_string(alpha.shape()) +
                         " does not match annotations " + shape_string(annotations.h.shape()));
  }
  return sum_rows(mul(alpha, annotations.h));
}

AttentionScorer::AttentionScorer(AttentionVariant variant, FeedForwardParams score_net,
                                 AnnotationSet annotations, std::size_t state_dim,
                                 std::size_t target_embedding_dim)
    : variant_(variant), net_(std::move(score_net)), annotations_(std::move(annotations)) {
  const std::size_t d = annotations_.dim();
  const std::size_t y_dim = uses_target_embedding(variant_) ? target_embedding_dim : 0;
  if (net_.input_dim() != state_dim + d + y_dim) {
    throw DimensionError("AttentionScorer: score network input " +
                         std::to_string(net_.input_dim()) + " != " +
                         std::to_string(state_dim + d + y_dim));
  }
  require_output_dim(net_, is_finegrained(variant_) ? d : 1, "AttentionScorer");
  state_block_ = slice_last(net_.w1, 0, state_dim);
  if (y_dim > 0) target_block_ = slice_last(net_.w1, state_dim + d, state_dim + d + y_dim);
  Tensor annotation_block = slice_last(net_.w1, state_dim, state_dim + d);
  annotation_part_ = linear(annotations_.h, annotation_block, net_.b1);
}

Tensor AttentionScorer::scores(const Tensor& z_prev, const Tensor& y_prev) const {
  Tensor query = linear(z_prev, state_block_, Tensor{});
  if (target_block_.defined()) query = add(query, linear(y_prev, target_block_, Tensor{}));
  Tensor hidden = tanh(add_row(annotation_part_, query));
  Tensor e = linear(hidden, net_.w2, net_.b2);  // [T × O]
  if (!is_finegrained(variant_)) return reshape(e, {annotations_.length()});
  return e;
}

AttentionOutput AttentionScorer::attend(const Tensor& z_prev, const Tensor& y_prev) const {
  Tensor e = scores(z_prev, y_prev);
  if (is_finegrained(variant_)) {
    Tensor alpha = normalize_dimensionwise(e);
    return {alpha, combine_finegrained(alpha, annotations_)};
  }
  Tensor alpha = normalize_temporal(e);
  return {alpha, combine_temporal(alpha, annotations_)};
}


AlignmentTensor stack_alignment(AttentionVariant variant, std::span<const Tensor> slices) {
  if (slices.empty()) throw ContractError("stack_alignment: no slices");
  const Shape& slice_shape = slices[0].shape();
  std::vector<double> values;
  values.reserve(slices.size() * slices[0].size());
  for (const auto& s : slices) {
    if (s.shape() != slice_shape) {
      throw DimensionError("stack_alignment: slice shape " + shape_string(s.shape()) + " vs " +
                           shape_string(slice_shape));
    }
    values.insert(values.end(), s.data().begin(), s.data().end());
  }
  Shape shape{slices.size()};
  shape.insert(shape.end(), slice_shape.begin(), slice_shape.end());
  return {variant, Tensor::from(std::move(shape), std::move(values))};
}

}  // namespace fgnmt
