#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "nushu/corpus.hpp"
#include "nushu/eval.hpp"
#include "nushu/seq2seq.hpp"

namespace nushu::mt {

struct ExperimentConfig {
  Seq2SeqConfig model;
  // Translate Nüshu to Chinese (target -> source of each pair) unless false.
  bool nushu_to_chinese = true;
  // Independent (size, seed) cells run on this many threads.
  std::size_t workers = 1;
  // Upper bounds (inclusive) of test-set source-length strata; empty disables
  // stratified evaluation.
  std::vector<std::size_t> length_strata;
};

struct StratumResult {
  std::size_t max_length = 0;  // inclusive upper bound
  std::size_t count = 0;
  eval::EvalResult result;
};

struct ExperimentCell {
  std::size_t size = 0;
  uint64_t seed = 0;
  eval::EvalResult result;
  std::vector<StratumResult> strata;
  std::vector<double> epoch_loss;
};

struct ExperimentResults {
  std::vector<std::size_t> sizes;
  std::vector<uint64_t> seeds;
  std::vector<ExperimentCell> cells;  // size-major, then seed

  const ExperimentCell& cell(std::size_t size_index, std::size_t seed_index) const {
    return cells[size_index * seeds.size() + seed_index];
  }
};

/// Training order: gold pairs, then each round's validated silver pairs in
/// round order. A size of s trains on the first s pairs of that order.
std::vector<SentencePair> training_order(std::span<const SentencePair> gold,
                                         std::span<const std::vector<SentencePair>> silver_by_round);

/// Gold size followed by the cumulative size after each silver round.
std::vector<std::size_t> round_sizes(std::size_t gold_size, std::span<const std::vector<SentencePair>> silver_by_round);

/// Trains from scratch for every (size, seed) and evaluates on `test`. Sizes
/// must be ascending and within the training order; a training pair whose
/// source sentence also occurs in the test set is an ArgumentError.
ExperimentResults incremental_experiment(std::span<const SentencePair> gold,
                                         std::span<const std::vector<SentencePair>> silver_by_round,
                                         std::span<const std::size_t> sizes, std::span<const SentencePair> test,
                                         std::span<const uint64_t> seeds, const ExperimentConfig& config);

/// "Train Data", "Seed", then BLEU-1..3, METEOR, ROUGE-1/2/L; one row per
/// cell followed by a "mean" row per size.
std::string render_results(const ExperimentResults& results);
/// Per-stratum rows: size, seed, max length, count, then the metric columns.
std::string render_strata(const ExperimentResults& results);

}  // namespace nushu::mt
