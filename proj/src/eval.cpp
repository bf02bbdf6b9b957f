#include "nushu/eval.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdint>
#include <limits>
#include <map>
#include <optional>
#include <unordered_map>
#include <vector>

#include <json.hpp>

#include "nushu/errors.hpp"

namespace nushu::eval {

namespace {

void require_aligned(std::span<const Text> predictions, std::span<const Text> references) {
  if (predictions.empty()) throw ArgumentError("evaluation needs at least one prediction");
  if (predictions.size() != references.size()) {
    throw ArgumentError("got " + std::to_string(predictions.size()) + " predictions for " +
                        std::to_string(references.size()) + " references");
  }
}

// n-grams as sorted views; equal grams end up adjacent.
std::vector<std::u32string_view> sorted_ngrams(std::u32string_view s, std::size_t n) {
  std::vector<std::u32string_view> grams;
  if (n == 0 || s.size() < n) return grams;
  grams.reserve(s.size() - n + 1);
  for (std::size_t i = 0; i + n <= s.size(); ++i) grams.push_back(s.substr(i, n));
  std::sort(grams.begin(), grams.end());
  return grams;
}

// Multiset intersection size of two sorted gram lists.
int clipped_overlap(const std::vector<std::u32string_view>& a, const std::vector<std::u32string_view>& b) {
  int overlap = 0;
  std::size_t i = 0, j = 0;
  while (i < a.size() && j < b.size()) {
    if (a[i] < b[j]) {
      ++i;
    } else if (b[j] < a[i]) {
      ++j;
    } else {
      ++overlap;
      ++i;
      ++j;
    }
  }
  return overlap;
}

double f1(double overlap, double pred_total, double ref_total) {
  if (pred_total == 0 || ref_total == 0 || overlap == 0) return 0.0;
  const double p = overlap / pred_total;
  const double r = overlap / ref_total;
  return 2 * p * r / (p + r);
}

}  // namespace

double exact_match_accuracy(std::span<const Text> predictions, std::span<const Text> references) {
  require_aligned(predictions, references);
  std::size_t hits = 0;
  for (std::size_t i = 0; i < predictions.size(); ++i) hits += predictions[i] == references[i];
  return static_cast<double>(hits) / static_cast<double>(predictions.size());
}

double char_accuracy(std::u32string_view prediction, std::u32string_view reference) {
  const std::size_t longest = std::max(prediction.size(), reference.size());
  if (longest == 0) return 1.0;
  std::size_t hits = 0;
  for (std::size_t i = 0; i < std::min(prediction.size(), reference.size()); ++i) {
    hits += prediction[i] == reference[i];
  }
  return static_cast<double>(hits) / static_cast<double>(longest);
}

double mean_char_accuracy(std::span<const Text> predictions, std::span<const Text> references) {
  require_aligned(predictions, references);
  double sum = 0;
  for (std::size_t i = 0; i < predictions.size(); ++i) sum += char_accuracy(predictions[i], references[i]);
  return sum / static_cast<double>(predictions.size());
}

double bleu(std::u32string_view prediction, std::span<const Text> references, int n) {
  if (n < 1 || n > 3) throw ArgumentError("BLEU order must be 1, 2 or 3");
  if (references.empty()) throw ArgumentError("BLEU needs at least one reference");
  if (prediction.empty()) return 0.0;

  double log_sum = 0;
  for (int k = 1; k <= n; ++k) {
    const auto kk = static_cast<std::size_t>(k);
    const auto pred = sorted_ngrams(prediction, kk);
    int matched = 0;
    if (references.size() == 1) {
      matched = clipped_overlap(pred, sorted_ngrams(references[0], kk));
    } else {
      // clip each n-gram by its maximum count over the references
      std::map<std::u32string_view, int> max_ref;
      for (const auto& ref : references) {
        std::map<std::u32string_view, int> counts;
        for (const auto& g : sorted_ngrams(ref, kk)) ++counts[g];
        for (const auto& [g, c] : counts) max_ref[g] = std::max(max_ref[g], c);
      }
      for (std::size_t i = 0; i < pred.size();) {
        std::size_t j = i;
        while (j < pred.size() && pred[j] == pred[i]) ++j;
        const auto it = max_ref.find(pred[i]);
        if (it != max_ref.end()) matched += std::min(static_cast<int>(j - i), it->second);
        i = j;
      }
    }
    const int total = static_cast<int>(prediction.size()) - k + 1;
    double p;
    if (k == 1) {
      if (matched == 0) return 0.0;
      p = static_cast<double>(matched) / total;
    } else {
      p = (matched + 1.0) / (std::max(total, 0) + 1.0);
    }
    log_sum += std::log(p);
  }

  const auto c = static_cast<double>(prediction.size());
  double r = static_cast<double>(references[0].size());
  for (const auto& ref : references) {
    const auto len = static_cast<double>(ref.size());
    const double d = std::abs(len - c), best = std::abs(r - c);
    if (d < best || (d == best && len < r)) r = len;
  }
  const double bp = c < r ? std::exp(1.0 - r / c) : 1.0;
  return bp * std::exp(log_sum / n);
}

double bleu(std::u32string_view prediction, std::u32string_view reference, int n) {
  const Text refs[] = {Text(reference)};
  return bleu(prediction, refs, n);
}

namespace {

// Greedy tiling: repeatedly take the longest run of unmatched tokens common to
// both strings (leftmost in prediction, then in reference). Used only when the
// exact search below exceeds its state budget.
MeteorStats greedy_tiling(std::u32string_view pred, std::u32string_view ref) {
  std::vector<bool> used_p(pred.size()), used_r(ref.size());
  MeteorStats stats;
  for (;;) {
    std::size_t best_len = 0, best_i = 0, best_j = 0;
    for (std::size_t i = 0; i < pred.size(); ++i) {
      for (std::size_t j = 0; j < ref.size(); ++j) {
        std::size_t len = 0;
        while (i + len < pred.size() && j + len < ref.size() && !used_p[i + len] && !used_r[j + len] &&
               pred[i + len] == ref[j + len]) {
          ++len;
        }
        if (len > best_len) {
          best_len = len;
          best_i = i;
          best_j = j;
        }
      }
    }
    if (best_len == 0) return stats;
    for (std::size_t k = 0; k < best_len; ++k) used_p[best_i + k] = used_r[best_j + k] = true;
    stats.matches += static_cast<int>(best_len);
    ++stats.chunks;
  }
}

class ChunkSearch {
 public:
  ChunkSearch(std::u32string_view pred, std::u32string_view ref) : pred_(pred), ref_(ref) {
    // remaining_same_[i]: occurrences of pred[i] later in the prediction
    std::vector<std::pair<char32_t, std::size_t>> order;
    order.reserve(pred.size());
    for (std::size_t i = 0; i < pred.size(); ++i) order.emplace_back(pred[i], i);
    std::sort(order.begin(), order.end());
    remaining_same_.assign(pred.size(), 0);
    for (std::size_t a = 0; a < order.size();) {
      std::size_t b = a;
      while (b < order.size() && order[b].first == order[a].first) ++b;
      for (std::size_t k = a; k < b; ++k) remaining_same_[order[k].second] = static_cast<int>(b - k - 1);
      a = b;
    }
    // Short inputs: branch and bound over maximum matchings (at most 8!
    // paths) is cheaper than building a memo.
    memoize_ = pred.size() > kPlainSearchMax || ref.size() > kPlainSearchMax;
  }

  std::optional<MeteorStats> run() {
    std::u32string p(pred_), r(ref_);
    std::sort(p.begin(), p.end());
    std::sort(r.begin(), r.end());
    MeteorStats s;
    for (std::size_t i = 0, j = 0; i < p.size() && j < r.size();) {
      if (p[i] < r[j]) {
        ++i;
      } else if (r[j] < p[i]) {
        ++j;
      } else {
        ++s.matches;
        ++i;
        ++j;
      }
    }
    if (s.matches == 0) return s;
    if (!memoize_) {
      best_ = kInfeasible;
      bound(0, 0, -1, 0);
      s.chunks = best_;
      return s;
    }
    const int chunks = solve(0, 0, -1);
    if (overflow_) return std::nullopt;
    s.chunks = chunks;
    return s;
  }

 private:
  static constexpr int kInfeasible = std::numeric_limits<int>::max() / 2;
  static constexpr std::size_t kStateBudget = 1u << 20;
  static constexpr std::size_t kPlainSearchMax = 8;

  struct Key {
    uint64_t used;
    int prev;
    std::size_t i;
    bool operator==(const Key&) const = default;
  };
  struct KeyHash {
    std::size_t operator()(const Key& k) const {
      return std::hash<uint64_t>()(k.used * 0x9E3779B97F4A7C15ull ^ (static_cast<uint64_t>(k.prev + 1) << 8) ^ k.i);
    }
  };

  int unused_ref_of(char32_t c, uint64_t used) const {
    int n = 0;
    for (std::size_t j = 0; j < ref_.size(); ++j) n += ref_[j] == c && !(used >> j & 1);
    return n;
  }

  // Depth-first branch and bound over maximum matchings; extending the
  // current chunk is tried first so a tight bound appears early.
  void bound(std::size_t i, uint64_t used, int prev, int chunks) {
    if (chunks >= best_) return;
    if (i == pred_.size()) {
      best_ = chunks;
      return;
    }
    const char32_t c = pred_[i];
    if (prev >= 0 && static_cast<std::size_t>(prev) + 1 < ref_.size()) {
      const std::size_t j = static_cast<std::size_t>(prev) + 1;
      if (ref_[j] == c && !(used >> j & 1)) bound(i + 1, used | (uint64_t{1} << j), static_cast<int>(j), chunks);
    }
    for (std::size_t j = 0; j < ref_.size(); ++j) {
      if (ref_[j] != c || (used >> j & 1)) continue;
      if (prev >= 0 && static_cast<std::size_t>(prev) + 1 == j) continue;
      bound(i + 1, used | (uint64_t{1} << j), static_cast<int>(j), chunks + 1);
    }
    if (unused_ref_of(c, used) <= remaining_same_[i]) bound(i + 1, used, -1, chunks);
  }

  // Fewest chunks for pred[i..] given the used reference positions and the
  // reference position matched by pred[i-1] (-1 if unmatched).
  int solve(std::size_t i, uint64_t used, int prev) {
    if (i == pred_.size()) return 0;
    const Key key{used, prev, i};
    if (memoize_) {
      if (auto it = memo_.find(key); it != memo_.end()) return it->second;
    }
    if (states_++ > kStateBudget) {
      overflow_ = true;
      return kInfeasible;
    }
    const char32_t c = pred_[i];
    int best = kInfeasible;
    // leave pred[i] unmatched only if enough later occurrences remain to use up the reference
    if (unused_ref_of(c, used) <= remaining_same_[i]) best = solve(i + 1, used, -1);
    for (std::size_t j = 0; j < ref_.size() && !overflow_; ++j) {
      if (ref_[j] != c || (used >> j & 1)) continue;
      const int opens = (prev >= 0 && static_cast<std::size_t>(prev) + 1 == j) ? 0 : 1;
      const int sub = solve(i + 1, used | (uint64_t{1} << j), static_cast<int>(j));
      best = std::min(best, sub + opens);
    }
    if (memoize_) memo_.emplace(key, best);
    return best;
  }

  std::u32string_view pred_, ref_;
  std::vector<int> remaining_same_;
  std::unordered_map<Key, int, KeyHash> memo_;
  bool memoize_ = true;
  int best_ = 0;
  std::size_t states_ = 0;
  bool overflow_ = false;
};

}  // namespace

MeteorStats meteor_alignment(std::u32string_view prediction, std::u32string_view reference) {
  if (reference.size() <= 64) {
    if (auto exact = ChunkSearch(prediction, reference).run()) return *exact;
  }
  return greedy_tiling(prediction, reference);
}

double meteor(std::u32string_view prediction, std::u32string_view reference) {
  const MeteorStats s = meteor_alignment(prediction, reference);
  if (s.matches == 0) return 0.0;
  const double m = s.matches;
  const double p = m / static_cast<double>(prediction.size());
  const double r = m / static_cast<double>(reference.size());
  const double f = 10 * p * r / (r + 9 * p);
  const double frag = static_cast<double>(s.chunks) / m;
  return f * (1.0 - 0.5 * frag * frag * frag);
}

double rouge_n(std::u32string_view prediction, std::u32string_view reference, int n) {
  if (n < 1) throw ArgumentError("ROUGE order must be positive");
  const auto k = static_cast<std::size_t>(n);
  const auto pred = sorted_ngrams(prediction, k);
  const auto ref = sorted_ngrams(reference, k);
  const double pred_total = prediction.size() >= k ? static_cast<double>(prediction.size() - k + 1) : 0;
  const double ref_total = reference.size() >= k ? static_cast<double>(reference.size() - k + 1) : 0;
  return f1(clipped_overlap(pred, ref), pred_total, ref_total);
}

std::size_t lcs_length(std::u32string_view a, std::u32string_view b) {
  std::vector<std::size_t> row(b.size() + 1, 0);
  for (std::size_t i = 1; i <= a.size(); ++i) {
    std::size_t diag = 0;
    for (std::size_t j = 1; j <= b.size(); ++j) {
      const std::size_t up = row[j];
      row[j] = a[i - 1] == b[j - 1] ? diag + 1 : std::max(row[j], row[j - 1]);
      diag = up;
    }
  }
  return row[b.size()];
}

double rouge_l(std::u32string_view prediction, std::u32string_view reference) {
  return f1(static_cast<double>(lcs_length(prediction, reference)), static_cast<double>(prediction.size()),
            static_cast<double>(reference.size()));
}

EvalResult evaluate_suite(std::span<const Text> predictions, std::span<const Text> references) {
  require_aligned(predictions, references);
  EvalResult r;
  r.exact_match_rate = exact_match_accuracy(predictions, references);
  r.mean_char_accuracy = mean_char_accuracy(predictions, references);
  for (std::size_t i = 0; i < predictions.size(); ++i) {
    const auto& p = predictions[i];
    const auto& ref = references[i];
    for (int n = 1; n <= 3; ++n) r.bleu[n - 1] += bleu(p, ref, n);
    r.meteor += meteor(p, ref);
    r.rouge1 += rouge_n(p, ref, 1);
    r.rouge2 += rouge_n(p, ref, 2);
    r.rougeL += rouge_l(p, ref);
  }
  const auto count = static_cast<double>(predictions.size());
  for (double& b : r.bleu) b /= count;
  r.meteor /= count;
  r.rouge1 /= count;
  r.rouge2 /= count;
  r.rougeL /= count;
  return r;
}

std::string tsv_header() {
  return "BLEU-1\tBLEU-2\tBLEU-3\tMETEOR\tROUGE-1\tROUGE-2\tROUGE-L\tExactMatch\tCharAccuracy";
}

std::string tsv_row(const EvalResult& r) {
  char buf[256];
  std::snprintf(buf, sizeof buf, "%.4f\t%.4f\t%.4f\t%.4f\t%.4f\t%.4f\t%.4f\t%.4f\t%.4f", r.bleu[0], r.bleu[1],
                r.bleu[2], r.meteor, r.rouge1, r.rouge2, r.rougeL, r.exact_match_rate, r.mean_char_accuracy);
  return buf;
}

std::string to_json(const EvalResult& r) {
  nlohmann::ordered_json j;
  j["bleu1"] = r.bleu[0];
  j["bleu2"] = r.bleu[1];
  j["bleu3"] = r.bleu[2];
  j["meteor"] = r.meteor;
  j["rouge1"] = r.rouge1;
  j["rouge2"] = r.rouge2;
  j["rougeL"] = r.rougeL;
  j["exact_match_rate"] = r.exact_match_rate;
  j["mean_char_accuracy"] = r.mean_char_accuracy;
  return j.dump(2);
}

}  // namespace nushu::eval
