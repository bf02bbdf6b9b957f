#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "nushu/corpus.hpp"
#include "nushu/unicode.hpp"

namespace nushu::embed {

// Character vocabulary sorted by descending frequency (ties by codepoint).
struct Vocab {
  std::vector<char32_t> tokens;
  std::vector<uint64_t> counts;
  std::vector<double> noise;      // counts^0.75, normalized
  std::vector<double> noise_cdf;  // running sum of noise, last entry exactly 1
  std::unordered_map<char32_t, int> index;

  std::size_t size() const { return tokens.size(); }
  bool empty() const { return tokens.empty(); }
  /// -1 when the token is not in the vocabulary.
  int lookup(char32_t c) const;
  /// Inverse-CDF draw from the noise distribution for u in [0, 1).
  int sample_noise(double u) const;
};

Vocab build_vocab(std::span<const Text> sentences, uint64_t min_count);

// Input (center) and output (context) vectors, both vocab x dim, row-major.
struct EmbeddingTable {
  std::size_t vocab = 0;
  std::size_t dim = 0;
  std::vector<double> input;
  std::vector<double> output;

  EmbeddingTable() = default;
  EmbeddingTable(std::size_t v, std::size_t d) : vocab(v), dim(d), input(v * d), output(v * d) {}

  std::span<double> in_row(std::size_t i) { return {input.data() + i * dim, dim}; }
  std::span<const double> in_row(std::size_t i) const { return {input.data() + i * dim, dim}; }
  std::span<double> out_row(std::size_t i) { return {output.data() + i * dim, dim}; }
  std::span<const double> out_row(std::size_t i) const { return {output.data() + i * dim, dim}; }

  friend bool operator==(const EmbeddingTable&, const EmbeddingTable&) = default;
};

/// -log s(u_ctx . v_c) - sum_neg log s(-u_neg . v_c), without updating.
double sgns_loss(const EmbeddingTable& t, int center, int context, std::span<const int> negatives);

/// One SGD step on the loss above. All dot products use the parameters as
/// they were on entry, so the update is exactly -lr times the gradient even
/// when a row repeats among the negatives. Returns the loss before the step.
double sgns_step(EmbeddingTable& t, int center, int context, std::span<const int> negatives, double lr);

struct SkipgramConfig {
  std::size_t dim = 300;
  std::size_t window = 10;
  uint64_t min_count = 5;
  std::size_t negatives = 10;
  int epochs = 20;
  double lr = 0.05;
  uint64_t seed = 1;
};

struct SkipgramModel {
  Vocab vocab;
  EmbeddingTable table;
  std::vector<double> epoch_loss;  // mean loss per (center, context) pair
};

/// Single-threaded SGNS training. Each position draws an effective window
/// in [1, window]; the learning rate decays linearly to 1e-4 * lr.
SkipgramModel train_skipgram(std::span<const Text> corpus, const SkipgramConfig& config);

struct Neighbor {
  char32_t token;
  double similarity;
};

/// Cosine ranking over input vectors, the query itself excluded, ties by index.
std::vector<Neighbor> nearest_neighbors(const EmbeddingTable& table, const Vocab& vocab, char32_t token,
                                        std::size_t k);

double cosine(std::span<const double> a, std::span<const double> b);

/// Splits pairs into independent source and target lines and shuffles them.
std::vector<Text> bilingual_lines(std::span<const SentencePair> pairs, uint64_t seed);

/// Word-vector text format: "V D", then `token v1 ... vD` per line.
std::string render_vectors(const SkipgramModel& model);
void save_vectors(const SkipgramModel& model, const std::filesystem::path& path);

}  // namespace nushu::embed
