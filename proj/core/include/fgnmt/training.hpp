#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "fgnmt/data.hpp"
#include "fgnmt/model.hpp"
#include "fgnmt/parameters.hpp"

namespace fgnmt {

struct AdamOptions {
  double alpha = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
};

/// First/second moment buffers aligned with a ParameterSet's entry order.
struct AdamState {
  AdamOptions options;
  std::vector<std::vector<double>> first_moment;
  std::vector<std::vector<double>> second_moment;
  std::size_t step_count = 0;

  AdamState() = default;
  AdamState(const ParameterSet& params, AdamOptions opts);
};

/// Bias-corrected Adam update from the gradients stored on `params`; a
/// parameter without a gradient buffer counts as zero gradient. Throws
/// NumericError naming the parameter when a gradient is not finite.
void adam_step(ParameterSet& params, AdamState& state);

/// Rescales all gradients so their global L2 norm is at most max_norm.
/// Returns the norm before clipping.
double clip_gradients(ParameterSet& params, double max_norm);
double gradient_norm(const ParameterSet& params);

struct TrainSchedule {
  std::size_t batch_size = 32;
  std::size_t max_source_len = 50;
  std::size_t max_target_len = 50;
  std::size_t valid_interval = 500;
  std::size_t patience = 5;
  std::size_t max_steps = 20000;
  std::uint64_t seed = 1;
  double clip_norm = 1.0;
  // Stop as soon as validation BLEU reaches this value (disabled when unset).
  std::optional<double> target_bleu;
  bool valid_smoothing = false;
  std::size_t valid_workers = 1;
};

struct TrainingPair {
  IdSequence source;
  IdSequence target;  // ends with <eos>
};

/// Encodes a corpus and drops pairs longer than the schedule allows on either
/// side. Throws DataError if nothing survives.
std::vector<TrainingPair> prepare_pairs(const ParallelCorpus& corpus, const Vocabulary& src_vocab,
                                        const Vocabulary& tgt_vocab,
                                        const TrainSchedule& schedule);

/// Teacher-forced maximum-likelihood training over length-bucketed minibatches.
class Trainer {
 public:
  Trainer(Model& model, std::vector<TrainingPair> pairs, TrainSchedule schedule,
          AdamOptions adam = {});

  // One clipped Adam update; returns the batch's mean NLL per target token.
  double step();
  // Runs the remaining batches of the current epoch; returns the epoch's mean
  // NLL per target token.
  double train_epoch();

  std::size_t steps_taken() const { return steps_; }
  const AdamState& adam() const { return adam_; }
  // Global gradient norm handed to the last Adam update (after clipping).
  double last_clipped_norm() const { return last_clipped_norm_; }

 private:
  void start_epoch();
  double run_batch(const std::vector<std::size_t>& batch, std::size_t* tokens);

  Model& model_;
  std::vector<TrainingPair> pairs_;
  TrainSchedule schedule_;
  AdamState adam_;
  std::mt19937_64 rng_;
  std::vector<std::vector<std::size_t>> batches_;
  std::size_t next_batch_ = 0;
  std::size_t steps_ = 0;
  double last_clipped_norm_ = 0.0;
};

/// Mean NLL per target token without updating anything.
double evaluate_loss(const Model& model, const std::vector<TrainingPair>& pairs);

struct ValidationSet {
  std::vector<IdSequence> sources;
  std::vector<Sentence> references;  // already un-BPE'd
};

ValidationSet make_validation_set(const ParallelCorpus& corpus, const Vocabulary& src_vocab);

/// Greedy-decodes the validation sources and scores them with corpus BLEU.
double validation_bleu(const Model& model, const ValidationSet& valid, const Vocabulary& tgt_vocab,
                       bool smoothing = false, std::size_t workers = 1);

struct ValidationRecord {
  std::size_t step = 0;
  double train_loss = 0.0;  // mean batch loss since the previous validation
  double bleu = 0.0;

  // step, train loss, validation BLEU; tab-separated.
  std::string to_line() const;
};

struct EarlyStopResult {
  Model best;
  double best_bleu = 0.0;
  std::size_t best_step = 0;
  std::size_t steps = 0;
  std::vector<ValidationRecord> history;
};

/// Trains, validating every schedule.valid_interval steps, and keeps the best
/// model by validation BLEU. Stops after `patience` validations without
/// improvement, at max_steps, or on reaching target_bleu.
EarlyStopResult early_stop_loop(Model& model, std::vector<TrainingPair> train,
                                const ValidationSet& valid, const Vocabulary& tgt_vocab,
                                const TrainSchedule& schedule, AdamOptions adam = {},
                                const std::function<void(const ValidationRecord&)>& on_validate =
                                    nullptr);

}  // namespace fgnmt
