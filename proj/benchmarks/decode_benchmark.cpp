#include <benchmark/benchmark.h>

#include <random>

#include "fgnmt/decoding.hpp"
#include "fgnmt/model.hpp"
#include "fgnmt/special_tokens.hpp"
#include "fgnmt/training.hpp"

using namespace fgnmt;

namespace {

constexpr std::size_t kVocab = 1000;

Model make_model(AttentionVariant variant, std::size_t dim) {
  Model m(ModelConfig::toy(variant, kVocab, kVocab, dim, dim, 17));
  // Every hypothesis runs to max_len so variants decode the same number of steps.
  Tensor bias = m.params().get("out.b");
  bias.mutable_data()[kEosId] = -1e3;
  return m;
}

IdSequence source(std::size_t length, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<std::size_t> id(kReservedIds, kVocab - 1);
  IdSequence src(length);
  for (auto& x : src) x = id(rng);
  return src;
}

// Args: source length, hidden size, beam width.
void BM_Decode(benchmark::State& state, AttentionVariant variant) {
  const Model m = make_model(variant, static_cast<std::size_t>(state.range(1)));
  const IdSequence src = source(static_cast<std::size_t>(state.range(0)), 3);
  const auto width = static_cast<std::size_t>(state.range(2));
  for (auto _ : state) {
    Hypothesis h = beam_search(m, src, width, src.size() + 5);
    benchmark::DoNotOptimize(h.log_prob);
  }
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(src.size() + 5));
}

void BM_TrainStep(benchmark::State& state, AttentionVariant variant) {
  Model m(ModelConfig::toy(variant, kVocab, kVocab, 32, 32, 5));
  std::vector<TrainingPair> pairs;
  for (std::uint64_t i = 0; i < 64; ++i) {
    IdSequence tgt = source(10, 100 + i);
    tgt.push_back(kEosId);
    pairs.push_back({source(10, i), tgt});
  }
  TrainSchedule sched;
  sched.batch_size = 16;
  Trainer trainer(m, pairs, sched);
  for (auto _ : state) benchmark::DoNotOptimize(trainer.step());
}

}  // namespace

BENCHMARK_CAPTURE(BM_Decode, att, AttentionVariant::att)
    ->Args({20, 32, 12})
    ->Args({20, 64, 12})
    ->Unit(benchmark::kMillisecond);
BENCHMARK_CAPTURE(BM_Decode, atty, AttentionVariant::atty)
    ->Args({20, 32, 12})
    ->Args({20, 64, 12})
    ->Unit(benchmark::kMillisecond);
BENCHMARK_CAPTURE(BM_Decode, atty2d, AttentionVariant::atty2d)
    ->Args({20, 32, 12})
    ->Args({20, 64, 12})
    ->Unit(benchmark::kMillisecond);
BENCHMARK_CAPTURE(BM_TrainStep, atty, AttentionVariant::atty)->Unit(benchmark::kMillisecond);
BENCHMARK_CAPTURE(BM_TrainStep, atty2d, AttentionVariant::atty2d)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
