#include "fgnmt/decoding.hpp"

#include <algorithm>
#include <atomic>
#include <exception>
#include <limits>
#include <mutex>
#include <thread>

#include "fgnmt/error.hpp"
#include "fgnmt/special_tokens.hpp"

namespace fgnmt {

bool Hypothesis::ends_with_eos() const { return !tokens.empty() && tokens.back() == kEosId; }

std::size_t default_max_len(std::size_t source_length) { return 3 * source_length + 10; }

namespace {

struct Candidate {
  double score;
  std::size_t token;
  std::size_t parent;
};

double ranking_score(const Hypothesis& h, bool length_normalization) {
  if (!length_normalization || h.tokens.empty()) return h.log_prob;
  return h.log_prob / static_cast<double>(h.tokens.size());
}

Hypothesis extend(const Hypothesis& parent, const StepOutput& out, std::size_t token) {
  Hypothesis h;
  h.tokens = parent.tokens;
  h.tokens.push_back(token);
  h.step_log_probs = parent.step_log_probs;
  h.step_log_probs.push_back(out.log_probs.data()[token]);
  h.log_prob = parent.log_prob + h.step_log_probs.back();
  h.alphas = parent.alphas;
  h.alphas.push_back(out.alpha);
  h.state = out.state;
  return h;
}

}  // namespace

Hypothesis beam_search(const Model& model, std::span<const std::size_t> src, std::size_t width,
                       std::size_t max_len, bool length_normalization) {
  if (width < 1) throw ContractError("beam_search: width must be at least 1");
  if (max_len < 1) throw ContractError("beam_search: max_len must be at least 1");
  if (src.empty()) throw ContractError("beam_search: empty source sentence");
  NoGradGuard no_grad;
  const EncodedSource source = model.encode_source(src);
  const std::size_t vocab = model.config().tgt_vocab;

  std::vector<Hypothesis> live(1);
  live[0].state = source.initial;
  std::vector<Hypothesis> completed;

  for (std::size_t step = 0; step < max_len && !live.empty(); ++step) {
    std::vector<StepOutput> outputs;
    outputs.reserve(live.size());
    std::vector<Candidate> candidates;
    candidates.reserve(live.size() * vocab);
    for (std::size_t i = 0; i < live.size(); ++i) {
      const std::size_t prev = live[i].tokens.empty() ? kBosId : live[i].tokens.back();
      outputs.push_back(model.decoder_step(live[i].state, prev, source));
      auto lp = outputs.back().log_probs.data();
      for (std::size_t v = 0; v < vocab; ++v) {
        if (v == kBosId) continue;
        candidates.push_back({live[i].log_prob + lp[v], v, i});
      }
    }
    const std::size_t keep = std::min(width, candidates.size());
    std::partial_sort(candidates.begin(), candidates.begin() + static_cast<std::ptrdiff_t>(keep),
                      candidates.end(), [](const Candidate& a, const Candidate& b) {
                        if (a.score != b.score) return a.score > b.score;
                        if (a.token != b.token) return a.token < b.token;
                        return a.parent < b.parent;
                      });
    std::vector<Hypothesis> next;
    for (std::size_t k = 0; k < keep; ++k) {
      const auto& c = candidates[k];
      Hypothesis h = extend(live[c.parent], outputs[c.parent], c.token);
      if (c.token == kEosId || step + 1 == max_len) {
        completed.push_back(std::move(h));
      } else {
        next.push_back(std::move(h));
      }
    }
    live = std::move(next);

    // Log-probabilities only decrease, so no live hypothesis can overtake a
    // finished one that already scores higher.
    if (!length_normalization && !completed.empty() && !live.empty()) {
      double best_done = -std::numeric_limits<double>::infinity();
      for (const auto& h : completed) best_done = std::max(best_done, h.log_prob);
      double best_live = -std::numeric_limits<double>::infinity();
      for (const auto& h : live) best_live = std::max(best_live, h.log_prob);
      if (best_done > best_live) live.clear();
    }
  }

  std::size_t best = 0;
  for (std::size_t i = 1; i < completed.size(); ++i) {
    if (ranking_score(completed[i], length_normalization) >
        ranking_score(completed[best], length_normalization)) {
      best = i;
    }
  }
  return std::move(completed[best]);
}

Hypothesis beam_search(const Model& model, std::span<const std::size_t> src,
                       const DecodeOptions& options) {
  const std::size_t max_len = options.max_len ? options.max_len : default_max_len(src.size());
  return beam_search(model, src, options.beam_width, max_len, options.length_normalization);
}

Hypothesis greedy(const Model& model, std::span<const std::size_t> src, std::size_t max_len) {
  if (max_len < 1) throw ContractError("greedy: max_len must be at least 1");
  if (src.empty()) throw ContractError("greedy: empty source sentence");
  NoGradGuard no_grad;
  const EncodedSource source = model.encode_source(src);
  Hypothesis h;
  h.state = source.initial;
  while (h.tokens.size() < max_len) {
    const std::size_t prev = h.tokens.empty() ? kBosId : h.tokens.back();
    StepOutput out = model.decoder_step(h.state, prev, source);
    auto lp = out.log_probs.data();
    std::size_t arg = kEosId;
    for (std::size_t v = 0; v < lp.size(); ++v) {
      if (v == kBosId) continue;
      if (lp[v] > lp[arg]) arg = v;
    }
    h = extend(h, out, arg);
    if (arg == kEosId) break;
  }
  return h;
}

AlignmentTensor alignment_of(const Model& model, const Hypothesis& hyp) {
  return stack_alignment(model.config().variant, hyp.alphas);
}

std::vector<Hypothesis> translate_all(const Model& model, const std::vector<IdSequence>& sources,
                                      const DecodeOptions& options, std::size_t workers) {
  std::vector<Hypothesis> results(sources.size());
  auto decode_one = [&](std::size_t i) {
    const std::size_t max_len =
        options.max_len ? options.max_len : default_max_len(sources[i].size());
    results[i] = options.beam_width == 1
                     ? greedy(model, sources[i], max_len)
                     : beam_search(model, sources[i], options.beam_width, max_len,
                                   options.length_normalization);
  };
  workers = std::max<std::size_t>(1, std::min(workers, sources.size()));
  if (workers == 1) {
    for (std::size_t i = 0; i < sources.size(); ++i) decode_one(i);
    return results;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  std::vector<std::thread> pool;
  for (std::size_t w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      for (std::size_t i = next++; i < sources.size(); i = next++) {
        try {
          decode_one(i);
        } catch (...) {
          std::lock_guard lock(failure_mutex);
          if (!failure) failure = std::current_exception();
        }
      }
    });
  }
  for (auto& t : pool) t.join();
  if (failure) std::rethrow_exception(failure);
  return results;
}

}  // namespace fgnmt
