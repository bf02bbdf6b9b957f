#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "nushu/corpus.hpp"
#include "nushu/dictionary.hpp"
#include "nushu/provider.hpp"
#include "nushu/seed_pool.hpp"

namespace nushu {

struct PipelineConfig {
  std::size_t pool_size = 35;
  std::size_t promote_count = 5;
  int max_retries = 7;
  int rounds = 6;
  std::size_t batch_per_round = 30;
  bool control_mode = false;
  uint64_t seed = 0;
  std::size_t workers = 1;
  std::string instruction = kDefaultInstruction;

  /// Throws ArgumentError on non-positive counts or promote_count >= pool_size.
  void validate() const;
  int max_attempts() const { return max_retries + 1; }
};

/// True iff both sides hold the same number of Unicode scalar values.
bool validate_length(std::u32string_view source, std::u32string_view candidate);

struct RetryOutcome {
  SentencePair pair;  // status validated or failed; failed pairs have an empty target
  int attempts = 0;
  int refusals = 0;
  int transport_errors = 0;
};

/// Queries the provider until a reply passes validate_length or the attempt
/// budget (1 + max_retries) is spent. Refusals and transport errors consume
/// the budget like length mismatches. Request ids are derived from
/// `request_base` and the attempt number.
RetryOutcome translate_with_retry(Provider& provider, const SeedPool& pool,
                                  std::u32string_view sentence, const PipelineConfig& config,
                                  uint64_t request_base, int round);

struct NovelCharFlag {
  std::string pair_id;
  Text characters;  // distinct, first-occurrence order

  friend bool operator==(const NovelCharFlag&, const NovelCharFlag&) = default;
};

struct RoundReport {
  int round = 0;
  std::size_t successes = 0;
  std::size_t failures = 0;
  std::size_t refusals = 0;
  std::size_t transport_errors = 0;
  std::map<int, std::size_t> retry_histogram;  // attempts used -> sentence count
  std::vector<NovelCharFlag> novel_chars;

  std::size_t total() const { return successes + failures; }
  friend bool operator==(const RoundReport&, const RoundReport&) = default;
};

struct RoundResult {
  std::vector<SentencePair> pairs;
  RoundReport report;
};

/// Translates every sentence of a batch. Per-sentence request streams derive
/// from (config.seed, round, index), so results do not depend on `workers`.
RoundResult run_round(Provider& provider, const SeedPool& pool, std::span<const Text> batch,
                      int round, const PipelineConfig& config, const MappingTable& table);

struct Rotation {
  SeedPool pool;
  bool rotated = false;
  std::string notice;
};

/// Seeded shuffle of the round's validated pairs, the first promote_count go
/// to the front of the pool and as many are evicted from the back. Control
/// mode returns the pool untouched; too few validated pairs skips rotation
/// with a notice.
Rotation rotate_pool(const SeedPool& pool, std::span<const SentencePair> new_validated, int round,
                     const PipelineConfig& config);

struct CampaignOptions {
  std::optional<std::filesystem::path> checkpoint;
  // Stop (as if interrupted) after this round has been checkpointed.
  std::optional<int> stop_after_round;
};

struct CampaignResult {
  std::vector<SentencePair> silver;  // validated and failed pairs, round order
  std::vector<RoundReport> reports;
  SeedPool final_pool;
  bool completed = false;
  int resumed_from_round = 1;
};

/// Runs every round in order. The initial pool is the first pool_size pairs
/// of `gold`. With a checkpoint path, state is saved after each round and an
/// existing compatible checkpoint is resumed.
CampaignResult run_campaign(Provider& provider, std::span<const SentencePair> gold,
                            std::span<const std::vector<Text>> bins, const PipelineConfig& config,
                            const MappingTable& table, const CampaignOptions& options = {});

/// Applies a corrections TSV (`pair id<TAB>corrected target`). Corrected pairs
/// become provenance=corrected, status=validated. Throws ParseError naming
/// the row for unknown ids, gold ids, or length-rule violations.
std::vector<SentencePair> apply_corrections(std::vector<SentencePair> pairs, std::string_view corrections,
                                            const std::string& name = "<corrections>");

}  // namespace nushu
