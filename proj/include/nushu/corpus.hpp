#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "nushu/dictionary.hpp"
#include "nushu/unicode.hpp"

namespace nushu {

enum class Provenance { Gold, Silver, Corrected };
enum class Status { Validated, Failed, Pending };

const char* provenance_name(Provenance p);
const char* status_name(Status s);

// One parallel sentence. `source` is the Chinese side, `target` the Nüshu
// side. A validated pair has equal scalar counts on both sides; silver and
// corrected pairs carry the round that produced them.
struct SentencePair {
  Text source;
  Text target;
  Provenance provenance = Provenance::Gold;
  std::optional<int> round;
  Status status = Status::Pending;
  // Stable identifier, derived from position rather than stored in the TSV:
  // gold rows are g1, g2, ...; round rows are r<round>.<k> in file order.
  std::string id;

  friend bool operator==(const SentencePair&, const SentencePair&) = default;
};

/// Throws ValidationError when a pair breaks the length or round invariant.
void check_pair(const SentencePair& pair);

/// Fills in `id` for every pair from its provenance, round and position.
void assign_ids(std::vector<SentencePair>& pairs);

/// Removes Unicode punctuation and ASCII digits; nothing else changes.
Text normalize_sentence(std::u32string_view raw);

/// Corpus TSV: source, target, provenance, round, status. No header, UTF-8,
/// fields escaped with io::escape_field. Ids are assigned on load.
std::vector<SentencePair> parse_corpus(std::string_view content, const std::string& name = "<corpus>");
std::vector<SentencePair> load_corpus(const std::filesystem::path& path);
std::string render_corpus(std::span<const SentencePair> pairs);
void save_corpus(std::span<const SentencePair> pairs, const std::filesystem::path& path);

/// Plain text, one sentence per line, normalized on read. Empty lines after
/// normalization are dropped.
std::vector<Text> load_sentences(const std::filesystem::path& path);

struct Split {
  std::vector<SentencePair> train;
  std::vector<SentencePair> test;
};

/// Seeded shuffle, then the first `test_size` items form the test set.
Split split_fixed(std::span<const SentencePair> pairs, std::size_t test_size, uint64_t seed);

struct RoundBin {
  int round;
  std::size_t first;  // 1-based, inclusive
  std::size_t last;   // 1-based, inclusive
  std::optional<double> expected_mean_length;
};

class RoundSchedule {
 public:
  /// Bins must be contiguous from sample 1, ascending and non-empty.
  explicit RoundSchedule(std::vector<RoundBin> bins);

  /// Six rounds of thirty with the reference mean lengths per round.
  static RoundSchedule canonical();
  static RoundSchedule uniform(int rounds, std::size_t per_round);

  const std::vector<RoundBin>& bins() const { return bins_; }
  std::size_t total() const { return bins_.empty() ? 0 : bins_.back().last; }
  std::size_t size() const { return bins_.size(); }

 private:
  std::vector<RoundBin> bins_;
};

/// Stable ascending sort by scalar length, then sliced by the schedule.
/// The input size must equal schedule.total().
std::vector<std::vector<Text>> bin_by_length(std::span<const Text> sentences, const RoundSchedule& schedule);

/// Seeded sample of `count` sentences, kept in input order.
std::vector<Text> sample_sentences(std::span<const Text> sentences, std::size_t count, uint64_t seed);

/// Synthetic gold pairs drawn from dictionary-covered characters; each target
/// is the per-character first candidate.
std::vector<SentencePair> synth_fixture_corpus(const MappingTable& table, std::size_t n,
                                               std::size_t min_len, std::size_t max_len,
                                               uint64_t seed);

/// Per-character first-candidate translation. Throws ArgumentError on an
/// uncovered character.
Text first_candidate_translation(const MappingTable& table, std::u32string_view source);

}  // namespace nushu
