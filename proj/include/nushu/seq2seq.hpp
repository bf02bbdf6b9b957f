#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <span>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "nushu/unicode.hpp"

namespace nushu::mt {

inline constexpr int kPad = 0;
inline constexpr int kBos = 1;
inline constexpr int kEos = 2;
inline constexpr int kUnk = 3;
inline constexpr int kFirstChar = 4;

// Character vocabulary with the four reserved ids above.
class CharVocab {
 public:
  CharVocab() = default;
  /// Characters of `texts`, in codepoint order, after the reserved ids.
  static CharVocab build(std::span<const Text> texts);
  static CharVocab from_chars(std::vector<char32_t> chars);

  std::size_t size() const { return chars_.size() + kFirstChar; }
  int id(char32_t c) const;  // kUnk when unseen
  char32_t character(int id) const;
  std::vector<int> encode(std::u32string_view text) const;
  const std::vector<char32_t>& chars() const { return chars_; }

  friend bool operator==(const CharVocab& a, const CharVocab& b) { return a.chars_ == b.chars_; }

 private:
  std::vector<char32_t> chars_;
  std::unordered_map<char32_t, int> ids_;
};

struct Matrix {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<double> data;

  Matrix() = default;
  Matrix(std::size_t r, std::size_t c) : rows(r), cols(c), data(r * c, 0.0) {}
  double* row(std::size_t r) { return data.data() + r * cols; }
  const double* row(std::size_t r) const { return data.data() + r * cols; }

  friend bool operator==(const Matrix&, const Matrix&) = default;
};

// Gated recurrent cell with gates stacked as [update; reset; candidate]:
//   gx = W x + bw, gh = U h + bu
//   z = s(gx_z + gh_z), r = s(gx_r + gh_r), n = tanh(gx_n + r * gh_n)
//   h' = (1 - z) * n + z * h
struct GruParams {
  Matrix w;   // 3H x in
  Matrix u;   // 3H x H
  Matrix bw;  // 3H x 1
  Matrix bu;  // 3H x 1

  friend bool operator==(const GruParams&, const GruParams&) = default;
};

struct Seq2SeqConfig {
  std::size_t embed_dim = 32;
  std::size_t hidden_dim = 64;
  bool attention = false;  // dot-product attention over encoder states
  double lr = 0.05;
  double clip_norm = 5.0;
  std::size_t batch_size = 3;
  int epochs = 15;
  uint64_t seed = 1;
  double init_scale = 0.1;
};

struct Seq2SeqParams {
  std::size_t embed_dim = 0;
  std::size_t hidden_dim = 0;
  bool attention = false;
  Matrix src_embed;  // Vs x E
  Matrix tgt_embed;  // Vt x E
  GruParams encoder;
  GruParams decoder;
  Matrix out_w;   // Vt x H
  Matrix out_b;   // Vt x 1
  Matrix attn_w;  // Vt x H, context projection; empty without attention

  /// Shapes for the given vocab sizes, all zeros.
  static Seq2SeqParams zeros(std::size_t src_vocab, std::size_t tgt_vocab, std::size_t embed_dim,
                             std::size_t hidden_dim, bool attention);
  /// Embeddings and recurrent weights uniform in [-scale, scale]; biases and
  /// the output layer zero, so the initial prediction is uniform.
  static Seq2SeqParams init(std::size_t src_vocab, std::size_t tgt_vocab, const Seq2SeqConfig& config);

  std::size_t src_vocab() const { return src_embed.rows; }
  std::size_t tgt_vocab() const { return tgt_embed.rows; }

  /// Visits every parameter block in a fixed order.
  void for_each_block(const std::function<void(const char*, Matrix&)>& f);
  void for_each_block(const std::function<void(const char*, const Matrix&)>& f) const;
  std::size_t parameter_count() const;

  friend bool operator==(const Seq2SeqParams&, const Seq2SeqParams&) = default;
};

struct ForwardResult {
  double loss = 0;            // mean cross-entropy over predicted tokens
  std::size_t tokens = 0;     // predicted (non-PAD) target tokens
  std::size_t correct = 0;    // teacher-forced argmax hits
};

/// Teacher-forced loss for a padded batch. Source rows hold ids padded with
/// kPad; target rows are [kBos, ..., kEos] padded with kPad. When `grads` is
/// non-null it is overwritten with d(loss)/d(params). PAD positions add no
/// loss and no gradient. Throws ArgumentError for out-of-vocabulary ids.
ForwardResult forward_loss(const Seq2SeqParams& params, std::span<const std::vector<int>> sources,
                           std::span<const std::vector<int>> targets, Seq2SeqParams* grads = nullptr);

struct TrainPair {
  std::vector<int> source;  // unpadded ids
  std::vector<int> target;  // unpadded, wrapped in kBos/kEos
};

struct Translator {
  CharVocab src_vocab;
  CharVocab tgt_vocab;
  Seq2SeqParams params;
};

struct TrainRun {
  Seq2SeqConfig config;
  std::vector<double> epoch_loss;
  std::vector<double> epoch_accuracy;  // teacher-forced token accuracy
  Translator model;
};

/// Builds vocabularies from the pairs and trains from scratch with plain
/// gradient descent and global-norm clipping. Single-threaded and
/// deterministic per seed. Throws ArgumentError on an empty training set.
TrainRun train_mt(std::span<const std::pair<Text, Text>> pairs, const Seq2SeqConfig& config);

/// Continues training an existing model, appending to the histories.
void train_epochs(Translator& model, std::span<const std::pair<Text, Text>> pairs, const Seq2SeqConfig& config,
                  int epochs, std::vector<double>& epoch_loss, std::vector<double>& epoch_accuracy);

/// Argmax decoding from BOS until EOS or source length + 5 tokens.
Text greedy_decode(const Translator& model, std::u32string_view source);

/// Teacher-forced token accuracy of the model on the pairs.
double teacher_forced_accuracy(const Translator& model, std::span<const std::pair<Text, Text>> pairs);

/// Versioned little-endian binary checkpoint.
void save_model(const Translator& model, const std::filesystem::path& path);
Translator load_model(const std::filesystem::path& path);

}  // namespace nushu::mt
