#include "fgnmt/training.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>

#include "fgnmt/decoding.hpp"
#include "fgnmt/error.hpp"
#include "fgnmt/evaluation.hpp"
#include "fgnmt/special_tokens.hpp"

namespace fgnmt {

AdamState::AdamState(const ParameterSet& params, AdamOptions opts) : options(opts) {
  for (const auto& [name, t] : params) {
    first_moment.emplace_back(t.size(), 0.0);
    second_moment.emplace_back(t.size(), 0.0);
  }
}

void adam_step(ParameterSet& params, AdamState& state) {
  if (state.first_moment.size() != params.size()) {
    throw DimensionError("adam_step: optimizer state tracks " +
                         std::to_string(state.first_moment.size()) + " parameters, model has " +
                         std::to_string(params.size()));
  }
  for (std::size_t k = 0; k < params.size(); ++k) {
    const auto& [name, t] = params.entries()[k];
    if (state.first_moment[k].size() != t.size()) {
      throw DimensionError("adam_step: moment buffer for " + name + " has the wrong size");
    }
    for (double g : t.grad()) {
      if (!std::isfinite(g)) throw NumericError("adam_step: non-finite gradient in " + name);
    }
  }
  ++state.step_count;
  const auto& o = state.options;
  const double step = static_cast<double>(state.step_count);
  const double correction1 = 1.0 - std::pow(o.beta1, step);
  const double correction2 = 1.0 - std::pow(o.beta2, step);
  for (std::size_t k = 0; k < params.size(); ++k) {
    Tensor t = params.entries()[k].second;
    auto grad = t.grad();
    auto values = t.mutable_data();
    auto& m = state.first_moment[k];
    auto& v = state.second_moment[k];
    for (std::size_t i = 0; i < values.size(); ++i) {
      const double g = grad.empty() ? 0.0 : grad[i];
      m[i] = o.beta1 * m[i] + (1.0 - o.beta1) * g;
      v[i] = o.beta2 * v[i] + (1.0 - o.beta2) * g * g;
      const double m_hat = m[i] / correction1;
      const double v_hat = v[i] / correction2;
      values[i] -= o.alpha * m_hat / (std::sqrt(v_hat) + o.epsilon);
    }
  }
}

double gradient_norm(const ParameterSet& params) {
  double sq = 0.0;
  for (const auto& [name, t] : params) {
    for (double g : t.grad()) sq += g * g;
  }
  return std::sqrt(sq);
}

double clip_gradients(ParameterSet& params, double max_norm) {
  const double norm = gradient_norm(params);
  if (norm > max_norm && norm > 0.0) {
    const double factor = max_norm / norm;
    for (const auto& [name, t] : params) {
      if (!t.has_grad()) continue;
      auto* node = t.node();
      for (auto& g : node->grad) g *= factor;
    }
  }
  return norm;
}

std::vector<TrainingPair> prepare_pairs(const ParallelCorpus& corpus, const Vocabulary& src_vocab,
                                        const Vocabulary& tgt_vocab,
                                        const TrainSchedule& schedule) {
  std::vector<TrainingPair> pairs;
  for (std::size_t i = 0; i < corpus.size(); ++i) {
    const auto& s = corpus.source[i];
    const auto& t = corpus.target[i];
    if (s.empty() || t.empty()) continue;
    if (s.size() > schedule.max_source_len || t.size() > schedule.max_target_len) continue;
    pairs.push_back({src_vocab.encode(s, false), tgt_vocab.encode(t, true)});
  }
  if (pairs.empty()) throw DataError("no training pairs left after length filtering");
  return pairs;
}

// ---- Trainer --------------------------------------------------------------

Trainer::Trainer(Model& model, std::vector<TrainingPair> pairs, TrainSchedule schedule,
                 AdamOptions adam)
    : model_(model),
      pairs_(std::move(pairs)),
      schedule_(schedule),
      adam_(model.params(), adam),
      rng_(schedule.seed) {
  if (pairs_.empty()) throw DataError("Trainer: empty training set");
  if (schedule_.batch_size == 0) throw ContractError("Trainer: batch size must be positive");
}

void Trainer::start_epoch() {
  std::vector<std::size_t> order(pairs_.size());
  std::iota(order.begin(), order.end(), 0);
  std::shuffle(order.begin(), order.end(), rng_);
  // Sort by source length inside windows of 20 batches so each batch holds
  // sentences of similar length, then shuffle the batch order.
  const std::size_t window = 20 * schedule_.batch_size;
  for (std::size_t begin = 0; begin < order.size(); begin += window) {
    auto first = order.begin() + static_cast<std::ptrdiff_t>(begin);
    auto last = order.begin() + static_cast<std::ptrdiff_t>(std::min(order.size(), begin + window));
    std::stable_sort(first, last, [&](std::size_t a, std::size_t b) {
      return pairs_[a].source.size() < pairs_[b].source.size();
    });
  }
  batches_.clear();
  for (std::size_t begin = 0; begin < order.size(); begin += schedule_.batch_size) {
    const std::size_t end = std::min(order.size(), begin + schedule_.batch_size);
    batches_.emplace_back(order.begin() + static_cast<std::ptrdiff_t>(begin),
                          order.begin() + static_cast<std::ptrdiff_t>(end));
  }
  std::shuffle(batches_.begin(), batches_.end(), rng_);
  next_batch_ = 0;
}

double Trainer::run_batch(const std::vector<std::size_t>& batch, std::size_t* tokens) {
  std::size_t n_tokens = 0;
  for (auto i : batch) n_tokens += pairs_[i].target.size();
  model_.params().zero_grad();
  double total_nll = 0.0;
  const double weight = -1.0 / static_cast<double>(n_tokens);
  for (auto i : batch) {
    Tensor ll = model_.sentence_log_likelihood(pairs_[i].source, pairs_[i].target);
    total_nll -= ll.item();
    // Each sentence gets its own graph; gradients accumulate on the leaves.
    backward(scale(ll, weight));
  }
  const double norm = clip_gradients(model_.params(), schedule_.clip_norm);
  last_clipped_norm_ = std::min(norm, schedule_.clip_norm);
  adam_step(model_.params(), adam_);
  ++steps_;
  if (tokens) *tokens = n_tokens;
  return total_nll / static_cast<double>(n_tokens);
}

double Trainer::step() {
  if (next_batch_ >= batches_.size()) start_epoch();
  return run_batch(batches_[next_batch_++], nullptr);
}

double Trainer::train_epoch() {
  if (next_batch_ >= batches_.size()) start_epoch();
  double nll_sum = 0.0;
  std::size_t token_sum = 0;
  while (next_batch_ < batches_.size()) {
    std::size_t tokens = 0;
    const double mean = run_batch(batches_[next_batch_++], &tokens);
    nll_sum += mean * static_cast<double>(tokens);
    token_sum += tokens;
  }
  return nll_sum / static_cast<double>(token_sum);
}

double evaluate_loss(const Model& model, const std::vector<TrainingPair>& pairs) {
  NoGradGuard no_grad;
  double nll = 0.0;
  std::size_t tokens = 0;
  for (const auto& p : pairs) {
    nll -= model.sentence_log_likelihood(p.source, p.target).item();
    tokens += p.target.size();
  }
  return tokens ? nll / static_cast<double>(tokens) : 0.0;
}

// ---- validation and early stopping ----------------------------------------

ValidationSet make_validation_set(const ParallelCorpus& corpus, const Vocabulary& src_vocab) {
  if (corpus.size() == 0) throw DataError("validation corpus is empty");
  ValidationSet valid;
  for (std::size_t i = 0; i < corpus.size(); ++i) {
    valid.sources.push_back(src_vocab.encode(corpus.source[i], false));
    valid.references.push_back(unbpe(corpus.target[i]));
  }
  return valid;
}

double validation_bleu(const Model& model, const ValidationSet& valid, const Vocabulary& tgt_vocab,
                       bool smoothing, std::size_t workers) {
  DecodeOptions options;
  options.beam_width = 1;
  auto hyps = translate_all(model, valid.sources, options, workers);
  std::vector<Sentence> outputs;
  outputs.reserve(hyps.size());
  for (const auto& h : hyps) outputs.push_back(unbpe(tgt_vocab.decode(h.tokens)));
  return bleu(outputs, valid.references, smoothing).bleu;
}

std::string ValidationRecord::to_line() const {
  char buf[128];
  std::snprintf(buf, sizeof buf, "%zu\t%.6f\t%.2f", step, train_loss, bleu);
  return buf;
}

EarlyStopResult early_stop_loop(Model& model, std::vector<TrainingPair> train,
                                const ValidationSet& valid, const Vocabulary& tgt_vocab,
                                const TrainSchedule& schedule, AdamOptions adam,
                                const std::function<void(const ValidationRecord&)>& on_validate) {
  if (valid.sources.empty()) throw DataError("validation corpus is empty");
  if (schedule.valid_interval == 0) throw ContractError("validation interval must be positive");
  Trainer trainer(model, std::move(train), schedule, adam);
  EarlyStopResult result{model.clone(), -1.0, 0, 0, {}};
  std::size_t since_improvement = 0;
  double loss_sum = 0.0;
  std::size_t loss_count = 0;
  while (trainer.steps_taken() < schedule.max_steps) {
    loss_sum += trainer.step();
    ++loss_count;
    const bool last = trainer.steps_taken() == schedule.max_steps;
    if (trainer.steps_taken() % schedule.valid_interval != 0 && !last) continue;

    ValidationRecord record;
    record.step = trainer.steps_taken();
    record.train_loss = loss_sum / static_cast<double>(loss_count);
    record.bleu = validation_bleu(model, valid, tgt_vocab, schedule.valid_smoothing,
                                  schedule.valid_workers);
    loss_sum = 0.0;
    loss_count = 0;
    result.history.push_back(record);
    if (on_validate) on_validate(record);

    if (record.bleu > result.best_bleu) {
      result.best = model.clone();
      result.best_bleu = record.bleu;
      result.best_step = record.step;
      since_improvement = 0;
    } else if (++since_improvement >= schedule.patience) {
      break;
    }
    if (schedule.target_bleu && result.best_bleu >= *schedule.target_bleu) break;
  }
  result.steps = trainer.steps_taken();
  if (result.best_bleu < 0.0) result.best_bleu = 0.0;
  return result;
}

}  // namespace fgnmt
