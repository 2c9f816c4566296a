#pragma once

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <limits>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "fgnmt/data.hpp"
#include "fgnmt/model.hpp"
#include "fgnmt/special_tokens.hpp"
#include "fgnmt/tensor.hpp"

namespace fgnmt::testing {

// Central differences of a scalar function, written without grad_check so the
// two can be compared.
inline std::vector<double> numeric_gradient(const std::function<double()>& f, Tensor& x,
                                            double eps = 1e-5) {
  std::vector<double> out(x.size());
  auto values = x.mutable_data();
  for (std::size_t i = 0; i < values.size(); ++i) {
    const double saved = values[i];
    values[i] = saved + eps;
    const double up = f();
    values[i] = saved - eps;
    const double down = f();
    values[i] = saved;
    out[i] = (up - down) / (2.0 * eps);
  }
  return out;
}

inline double max_relative_error(std::span<const double> analytic,
                                 const std::vector<double>& numeric) {
  double worst = 0.0;
  for (std::size_t i = 0; i < numeric.size(); ++i) {
    const double a = analytic.empty() ? 0.0 : analytic[i];
    worst = std::max(worst, std::abs(a - numeric[i]) / std::max(1.0, std::abs(a)));
  }
  return worst;
}

inline ModelConfig tiny_config(AttentionVariant variant, bool contextualization,
                               std::size_t src_vocab, std::size_t tgt_vocab, std::size_t emb,
                               std::size_t hidden, std::uint64_t seed) {
  ModelConfig c = ModelConfig::toy(variant, src_vocab, tgt_vocab, emb, hidden, seed);
  c.contextualization = contextualization;
  return c;
}

// Random non-reserved ids.
inline IdSequence random_ids(std::mt19937_64& rng, std::size_t length, std::size_t vocab) {
  std::uniform_int_distribution<std::size_t> pick(kReservedIds, vocab - 1);
  IdSequence ids(length);
  for (auto& id : ids) id = pick(rng);
  return ids;
}

struct ExhaustiveResult {
  IdSequence tokens;
  double log_prob = -std::numeric_limits<double>::infinity();
};

// Best complete output among all sequences that end in <eos> within max_len
// tokens or reach max_len without it, never emitting <bos>.
inline ExhaustiveResult exhaustive_search(const Model& model, const IdSequence& src,
                                          std::size_t max_len) {
  NoGradGuard no_grad;
  const std::size_t vocab = model.config().tgt_vocab;
  ExhaustiveResult best;
  std::vector<std::size_t> prefix;
  std::function<void()> visit = [&] {
    for (std::size_t v = 0; v < vocab; ++v) {
      if (v == kBosId) continue;
      prefix.push_back(v);
      if (v == kEosId || prefix.size() == max_len) {
        const double lp = model.sequence_log_prob(src, prefix).item();
        if (lp > best.log_prob) best = {prefix, lp};
      } else {
        visit();
      }
      prefix.pop_back();
    }
  };
  visit();
  return best;
}

class TempDir {
 public:
  TempDir() {
    static std::mt19937_64 rng{std::random_device{}()};
    path_ = std::filesystem::temp_directory_path() / ("fgnmt-test-" + std::to_string(rng()));
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;
  const std::filesystem::path& path() const { return path_; }
  std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

 private:
  std::filesystem::path path_;
};

inline std::string golden_path(const std::string& relative) {
  return std::string(FGNMT_GOLDEN_DIR) + "/" + relative;
}

}  // namespace fgnmt::testing
