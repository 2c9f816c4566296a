#include "fgnmt/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <sstream>

#include "binary_io.hpp"
#include "fgnmt/error.hpp"

namespace fgnmt {

Matrix Matrix::columns(std::size_t begin, std::size_t end) const {
  if (begin >= end || end > cols) {
    throw IndexError("column range [" + std::to_string(begin) + "," + std::to_string(end) +
                     ") invalid for " + std::to_string(cols) + " columns");
  }
  Matrix out{rows, end - begin, {}};
  out.values.reserve(out.rows * out.cols);
  for (std::size_t r = 0; r < rows; ++r) {
    for (std::size_t c = begin; c < end; ++c) out.values.push_back(at(r, c));
  }
  return out;
}

void AlignmentRecord::validate() const {
  if (alpha.size() != target_length * source_length * dims) {
    throw DimensionError("alignment record holds " + std::to_string(alpha.size()) +
                         " values for extents " + std::to_string(target_length) + "x" +
                         std::to_string(source_length) + "x" + std::to_string(dims));
  }
  if (source.size() != source_length || target.size() != target_length) {
    throw DimensionError("alignment record has " + std::to_string(source.size()) + "/" +
                         std::to_string(target.size()) + " source/target tokens for extents " +
                         std::to_string(source_length) + "/" + std::to_string(target_length));
  }
}

AlignmentRecord make_record(const AlignmentTensor& alignment, Sentence source, Sentence target,
                            std::string fingerprint) {
  AlignmentRecord rec;
  rec.variant = alignment.variant;
  rec.target_length = alignment.target_length();
  rec.source_length = alignment.source_length();
  rec.dims = alignment.dims();
  rec.alpha.assign(alignment.alpha.data().begin(), alignment.alpha.data().end());
  rec.source = std::move(source);
  rec.target = std::move(target);
  rec.fingerprint = std::move(fingerprint);
  rec.validate();
  return rec;
}

Matrix avg_over_dims(const AlignmentRecord& rec, const Notice& notice) {
  if (!rec.finegrained() && notice) {
    notice("temporal alignment: averaging over dimensions is the identity");
  }
  Matrix out{rec.target_length, rec.source_length, {}};
  out.values.resize(out.rows * out.cols);
  const double dims = static_cast<double>(rec.dims);
  for (std::size_t tp = 0; tp < rec.target_length; ++tp) {
    for (std::size_t t = 0; t < rec.source_length; ++t) {
      double acc = 0.0;
      for (std::size_t d = 0; d < rec.dims; ++d) acc += rec.at(tp, t, d);
      out.values[tp * out.cols + t] = acc / dims;
    }
  }
  return out;
}

Matrix avg_over_target(const AlignmentRecord& rec, const Notice& notice) {
  if (!rec.finegrained() && notice) {
    notice("temporal alignment: averaging over the target with a single dimension");
  }
  Matrix out{rec.source_length, rec.dims, {}};
  out.values.resize(out.rows * out.cols);
  const double steps = static_cast<double>(rec.target_length);
  for (std::size_t t = 0; t < rec.source_length; ++t) {
    for (std::size_t d = 0; d < rec.dims; ++d) {
      double acc = 0.0;
      for (std::size_t tp = 0; tp < rec.target_length; ++tp) acc += rec.at(tp, t, d);
      out.values[t * out.cols + d] = acc / steps;
    }
  }
  return out;
}

Matrix slice_dim(const AlignmentRecord& rec, std::size_t d) {
  if (d >= rec.dims) {
    throw IndexError("dimension " + std::to_string(d) + " out of range (D = " +
                     std::to_string(rec.dims) + ")");
  }
  Matrix out{rec.target_length, rec.source_length, {}};
  out.values.reserve(out.rows * out.cols);
  for (std::size_t tp = 0; tp < rec.target_length; ++tp) {
    for (std::size_t t = 0; t < rec.source_length; ++t) out.values.push_back(rec.at(tp, t, d));
  }
  return out;
}

std::vector<std::pair<std::size_t, double>> top_dims(const AlignmentRecord& rec, std::size_t t,
                                                     std::size_t k) {
  if (t >= rec.source_length) {
    throw IndexError("source position " + std::to_string(t) + " out of range (T = " +
                     std::to_string(rec.source_length) + ")");
  }
  if (k > rec.dims) {
    throw IndexError("k = " + std::to_string(k) + " exceeds D = " + std::to_string(rec.dims));
  }
  Matrix a = avg_over_target(rec);
  std::vector<std::pair<std::size_t, double>> ranked;
  for (std::size_t d = 0; d < rec.dims; ++d) ranked.emplace_back(d, a.at(t, d));
  std::stable_sort(ranked.begin(), ranked.end(),
                   [](const auto& x, const auto& y) { return x.second > y.second; });
  ranked.resize(k);
  return ranked;
}

// ---- rendering ------------------------------------------------------------

std::string render_pgm(const Matrix& m) {
  if (m.rows == 0 || m.cols == 0) throw ContractError("heatmap: empty matrix");
  for (double v : m.values) {
    if (!std::isfinite(v)) throw ContractError("heatmap: non-finite entry");
  }
  const auto [lo_it, hi_it] = std::minmax_element(m.values.begin(), m.values.end());
  const double lo = *lo_it, hi = *hi_it;
  std::string out = "P5\n" + std::to_string(m.cols) + " " + std::to_string(m.rows) + "\n255\n";
  for (double v : m.values) {
    unsigned char pixel = 128;
    if (hi > lo) pixel = static_cast<unsigned char>(std::lround((v - lo) / (hi - lo) * 255.0));
    out.push_back(static_cast<char>(pixel));
  }
  return out;
}

void heatmap(const Matrix& m, const std::filesystem::path& path,
             const std::vector<std::string>& row_labels,
             const std::vector<std::string>& col_labels) {
  binary::write_file(path.string(), render_pgm(m));
  auto labels_or_indices = [](const std::vector<std::string>& labels, std::size_t n) {
    std::string line;
    for (std::size_t i = 0; i < n; ++i) {
      line += '\t';
      line += i < labels.size() ? labels[i] : std::to_string(i);
    }
    return line;
  };
  std::string axes = "rows" + labels_or_indices(row_labels, m.rows) + "\ncols" +
                     labels_or_indices(col_labels, m.cols) + "\n";
  binary::write_file(path.string() + ".axes.txt", axes);
}

void heatmap(const Matrix& m, const std::filesystem::path& path) { heatmap(m, path, {}, {}); }

std::string format_table(const Matrix& m, const std::vector<std::string>& row_labels,
                         const std::vector<std::string>& col_labels) {
  std::ostringstream out;
  const bool labelled = !row_labels.empty();
  if (!col_labels.empty()) {
    if (labelled) out << '\t';
    for (std::size_t c = 0; c < m.cols; ++c) out << (c ? "\t" : "") << col_labels.at(c);
    out << '\n';
  }
  char buf[32];
  for (std::size_t r = 0; r < m.rows; ++r) {
    if (labelled) out << row_labels.at(r) << '\t';
    for (std::size_t c = 0; c < m.cols; ++c) {
      std::snprintf(buf, sizeof buf, "%.6f", m.at(r, c));
      out << (c ? "\t" : "") << buf;
    }
    out << '\n';
  }
  return out.str();
}

// ---- FGAT -----------------------------------------------------------------

namespace {

constexpr std::string_view kFgatMagic = "FGAT";

}  // namespace

std::string serialize_fgat(const AlignmentRecord& rec) {
  rec.validate();
  std::string out(kFgatMagic);
  binary::put_u32(out, kFgatVersion);
  binary::put_u32(out, static_cast<std::uint32_t>(rec.target_length));
  binary::put_u32(out, static_cast<std::uint32_t>(rec.source_length));
  binary::put_u32(out, static_cast<std::uint32_t>(rec.dims));
  for (double v : rec.alpha) binary::put_f32(out, static_cast<float>(v));
  return out;
}

std::string serialize_fgat_sidecar(const AlignmentRecord& rec) {
  return "variant\t" + to_string(rec.variant) + "\nfingerprint\t" + rec.fingerprint +
         "\nsource\t" + join(rec.source) + "\ntarget\t" + join(rec.target) + "\n";
}

AlignmentRecord deserialize_fgat(std::string_view bytes, std::string_view sidecar) {
  binary::Reader in(bytes);
  if (in.take(kFgatMagic.size()) != kFgatMagic) throw FormatError("not an FGAT file (bad magic)");
  const auto version = in.u32();
  if (version != kFgatVersion) throw FormatError("unsupported FGAT version " + std::to_string(version));
  AlignmentRecord rec;
  rec.target_length = in.u32();
  rec.source_length = in.u32();
  rec.dims = in.u32();
  rec.alpha.resize(rec.target_length * rec.source_length * rec.dims);
  for (auto& v : rec.alpha) v = in.f32();
  if (!in.at_end()) throw FormatError("trailing bytes after FGAT payload");

  std::istringstream side{std::string(sidecar)};
  std::string line;
  bool have_variant = false;
  while (std::getline(side, line)) {
    auto tab = line.find('\t');
    if (tab == std::string::npos) continue;
    const std::string key = line.substr(0, tab);
    const std::string value = line.substr(tab + 1);
    if (key == "variant") {
      try {
        rec.variant = parse_variant(value);
      } catch (const ContractError& e) {
        throw FormatError(e.what());
      }
      have_variant = true;
    } else if (key == "fingerprint") {
      rec.fingerprint = value;
    } else if (key == "source") {
      rec.source = tokenize(value);
    } else if (key == "target") {
      rec.target = tokenize(value);
    } else {
      throw FormatError("unknown FGAT sidecar field: " + key);
    }
  }
  if (!have_variant) throw FormatError("FGAT sidecar lacks a variant line");
  rec.validate();
  return rec;
}

std::filesystem::path sidecar_path(const std::filesystem::path& fgat_path) {
  return fgat_path.string() + ".tok";
}

void save_alignment(const AlignmentRecord& rec, const std::filesystem::path& path) {
  binary::write_file(path.string(), serialize_fgat(rec));
  binary::write_file(sidecar_path(path).string(), serialize_fgat_sidecar(rec));
}

AlignmentRecord load_alignment(const std::filesystem::path& path) {
  return deserialize_fgat(binary::read_file(path.string()),
                          binary::read_file(sidecar_path(path).string()));
}

}  // namespace fgnmt
