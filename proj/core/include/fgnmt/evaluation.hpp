#pragma once

#include <array>
#include <cstddef>
#include <string>
#include <vector>

#include "fgnmt/data.hpp"

namespace fgnmt {

struct BleuReport {
  double bleu = 0.0;  // in [0, 100]
  std::array<double, 4> precisions{};
  double brevity_penalty = 0.0;
  std::size_t hypothesis_length = 0;
  std::size_t reference_length = 0;

  // BLEU, p1..p4, BP, hypothesis length, reference length; tab-separated.
  std::string to_line() const;
};

/// Corpus BLEU-4 with clipped n-gram counts and a brevity penalty, one
/// reference per hypothesis. With `smoothing`, n-gram orders 2..4 use
/// (matches + 1) / (total + 1).
BleuReport bleu(const std::vector<Sentence>& hypotheses, const std::vector<Sentence>& references,
                bool smoothing = false);

}  // namespace fgnmt
