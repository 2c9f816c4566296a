#include "fgnmt/evaluation.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>

#include "fgnmt/error.hpp"

namespace fgnmt {

namespace {

using NgramCounts = std::map<std::vector<std::string>, std::size_t>;

NgramCounts count_ngrams(const Sentence& tokens, std::size_t n) {
  NgramCounts counts;
  for (std::size_t i = 0; i + n <= tokens.size(); ++i) {
    ++counts[std::vector<std::string>(tokens.begin() + i, tokens.begin() + i + n)];
  }
  return counts;
}

}  // namespace

std::string BleuReport::to_line() const {
  char buf[256];
  std::snprintf(buf, sizeof buf, "%.2f\t%.4f\t%.4f\t%.4f\t%.4f\t%.4f\t%zu\t%zu", bleu,
                precisions[0], precisions[1], precisions[2], precisions[3], brevity_penalty,
                hypothesis_length, reference_length);
  return buf;
}

BleuReport bleu(const std::vector<Sentence>& hypotheses, const std::vector<Sentence>& references,
                bool smoothing) {
  if (hypotheses.size() != references.size()) {
    throw DataError("bleu: " + std::to_string(hypotheses.size()) + " hypotheses vs " +
                    std::to_string(references.size()) + " references");
  }
  std::array<std::size_t, 4> matches{}, totals{};
  BleuReport report;
  for (std::size_t s = 0; s < hypotheses.size(); ++s) {
    const auto& hyp = hypotheses[s];
    const auto& ref = references[s];
    report.hypothesis_length += hyp.size();
    report.reference_length += ref.size();
    for (std::size_t n = 1; n <= 4; ++n) {
      NgramCounts hyp_counts = count_ngrams(hyp, n);
      NgramCounts ref_counts = count_ngrams(ref, n);
      for (const auto& [gram, count] : hyp_counts) {
        auto it = ref_counts.find(gram);
        if (it != ref_counts.end()) matches[n - 1] += std::min(count, it->second);
        totals[n - 1] += count;
      }
    }
  }

  double log_sum = 0.0;
  bool zero = report.hypothesis_length == 0;
  for (std::size_t n = 0; n < 4; ++n) {
    double num = static_cast<double>(matches[n]);
    double den = static_cast<double>(totals[n]);
    if (smoothing && n > 0) {
      num += 1.0;
      den += 1.0;
    }
    report.precisions[n] = den > 0.0 ? num / den : 0.0;
    if (report.precisions[n] <= 0.0) {
      zero = true;
    } else {
      log_sum += std::log(report.precisions[n]);
    }
  }
  const double c = static_cast<double>(report.hypothesis_length);
  const double r = static_cast<double>(report.reference_length);
  if (c == 0.0) {
    report.brevity_penalty = 0.0;
  } else {
    report.brevity_penalty = c > r ? 1.0 : std::exp(1.0 - r / c);
  }
  report.bleu = zero ? 0.0 : 100.0 * report.brevity_penalty * std::exp(log_sum / 4.0);
  report.bleu = std::clamp(report.bleu, 0.0, 100.0);
  return report;
}

}  // namespace fgnmt
