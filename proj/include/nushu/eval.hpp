#pragma once

#include <span>
#include <string>

#include "nushu/unicode.hpp"

// Character-level MT metrics. Every token is one Unicode scalar value.
namespace nushu::eval {

struct EvalResult {
  double exact_match_rate = 0;
  double mean_char_accuracy = 0;
  double bleu[3] = {0, 0, 0};  // cumulative BLEU-1, BLEU-2, BLEU-3
  double meteor = 0;
  double rouge1 = 0;
  double rouge2 = 0;
  double rougeL = 0;
};

double exact_match_accuracy(std::span<const Text> predictions, std::span<const Text> references);

/// Positional matches over max(len(pred), len(ref)); two empty strings score 1.
double char_accuracy(std::u32string_view prediction, std::u32string_view reference);
double mean_char_accuracy(std::span<const Text> predictions, std::span<const Text> references);

// Cumulative BLEU of order n in {1,2,3}: uniform-weight geometric mean of the
// clipped n-gram precisions for orders 1..n, times the brevity penalty.
// Orders >= 2 use add-one smoothing; the unigram precision is unsmoothed, so
// no unigram overlap gives 0. The reference length for the brevity penalty is
// the closest one, ties going to the shorter.
double bleu(std::u32string_view prediction, std::span<const Text> references, int n);
double bleu(std::u32string_view prediction, std::u32string_view reference, int n);

struct MeteorStats {
  int matches = 0;
  int chunks = 0;
};

/// Exact-match unigram alignment with the most matches and, among those, the
/// fewest chunks.
MeteorStats meteor_alignment(std::u32string_view prediction, std::u32string_view reference);

// F = 10PR/(R+9P), penalty = 0.5 (chunks/m)^3, score = F (1 - penalty).
double meteor(std::u32string_view prediction, std::u32string_view reference);

/// F1 over clipped n-gram multiset overlap.
double rouge_n(std::u32string_view prediction, std::u32string_view reference, int n);
/// F1 from longest-common-subsequence length.
double rouge_l(std::u32string_view prediction, std::u32string_view reference);
std::size_t lcs_length(std::u32string_view a, std::u32string_view b);

/// Mean of per-sentence scores. Throws ArgumentError on empty or unaligned input.
EvalResult evaluate_suite(std::span<const Text> predictions, std::span<const Text> references);

/// Column names in reporting order: BLEU-1..3, METEOR, ROUGE-1/2/L, then
/// exact match and character accuracy.
std::string tsv_header();
std::string tsv_row(const EvalResult& r);
std::string to_json(const EvalResult& r);

}  // namespace nushu::eval
