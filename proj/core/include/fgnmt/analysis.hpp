#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "fgnmt/attention.hpp"
#include "fgnmt/data.hpp"

namespace fgnmt {

/// Dense row-major matrix of analysis results.
struct Matrix {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<double> values;

  double at(std::size_t r, std::size_t c) const { return values[r * cols + c]; }
  // Columns [begin, end) as a new matrix.
  Matrix columns(std::size_t begin, std::size_t end) const;
};

/// Alignment tensor of one decoded sentence with its tokens. Values are stored
/// [t'][t][d]; temporal records have dims == 1.
struct AlignmentRecord {
  Sentence source;
  Sentence target;
  AttentionVariant variant = AttentionVariant::atty2d;
  std::string fingerprint;
  std::size_t target_length = 0;
  std::size_t source_length = 0;
  std::size_t dims = 1;
  std::vector<double> alpha;

  double at(std::size_t tp, std::size_t t, std::size_t d) const {
    return alpha[(tp * source_length + t) * dims + d];
  }
  bool finegrained() const { return is_finegrained(variant); }
  // Throws DimensionError when token counts disagree with the extents.
  void validate() const;
};

AlignmentRecord make_record(const AlignmentTensor& alignment, Sentence source, Sentence target,
                            std::string fingerprint);

using Notice = std::function<void(const std::string&)>;

/// A[t', t] = (1/D) Σ_d α^d_{t',t}. Temporal records pass through unchanged
/// and trigger `notice`.
Matrix avg_over_dims(const AlignmentRecord& rec, const Notice& notice = nullptr);
/// A[t, d] = (1/T') Σ_t' α^d_{t',t}. Temporal records are treated as D = 1.
Matrix avg_over_target(const AlignmentRecord& rec, const Notice& notice = nullptr);
/// α^d as a [T' × T] matrix. Throws IndexError when d >= D.
Matrix slice_dim(const AlignmentRecord& rec, std::size_t d);
/// The k dimensions with the largest A[t, d], descending, ties by index.
std::vector<std::pair<std::size_t, double>> top_dims(const AlignmentRecord& rec, std::size_t t,
                                                     std::size_t k);

/// Binary P5 graymap, one pixel per cell: min -> 0, max -> 255, constant
/// matrices -> 128.
std::string render_pgm(const Matrix& m);
/// Writes the graymap to `path` and the axis labels to `path` + ".axes.txt".
void heatmap(const Matrix& m, const std::filesystem::path& path,
             const std::vector<std::string>& row_labels,
             const std::vector<std::string>& col_labels);
void heatmap(const Matrix& m, const std::filesystem::path& path);

// Tab-separated text table with optional labels.
std::string format_table(const Matrix& m, const std::vector<std::string>& row_labels = {},
                         const std::vector<std::string>& col_labels = {});

// FGAT: "FGAT" | u32 version | u32 T' | u32 T | u32 D | f32 values [t'][t][d],
// little-endian; tokens and metadata live in a text sidecar.
inline constexpr std::uint32_t kFgatVersion = 1;

std::string serialize_fgat(const AlignmentRecord& rec);
std::string serialize_fgat_sidecar(const AlignmentRecord& rec);
AlignmentRecord deserialize_fgat(std::string_view bytes, std::string_view sidecar);

std::filesystem::path sidecar_path(const std::filesystem::path& fgat_path);
void save_alignment(const AlignmentRecord& rec, const std::filesystem::path& path);
AlignmentRecord load_alignment(const std::filesystem::path& path);

}  // namespace fgnmt
