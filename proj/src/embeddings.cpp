#include "nushu/embeddings.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>

#include "nushu/errors.hpp"
#include "nushu/io.hpp"
#include "nushu/kernels.hpp"
#include "nushu/random.hpp"

namespace nushu::embed {

namespace {

double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

// log(1 + e^x) without overflow
double softplus(double x) { return x > 0 ? x + std::log1p(std::exp(-x)) : std::log1p(std::exp(x)); }

void check_index(const EmbeddingTable& t, int i) {
  if (i < 0 || static_cast<std::size_t>(i) >= t.vocab) {
    throw ArgumentError("token index " + std::to_string(i) + " outside vocabulary of " + std::to_string(t.vocab));
  }
}

}  // namespace

int Vocab::lookup(char32_t c) const {
  auto it = index.find(c);
  return it == index.end() ? -1 : it->second;
}

int Vocab::sample_noise(double u) const {
  auto it = std::upper_bound(noise_cdf.begin(), noise_cdf.end(), u);
  if (it == noise_cdf.end()) --it;
  return static_cast<int>(it - noise_cdf.begin());
}

Vocab build_vocab(std::span<const Text> sentences, uint64_t min_count) {
  std::map<char32_t, uint64_t> counts;
  for (const auto& s : sentences) {
    for (char32_t c : s) ++counts[c];
  }
  std::vector<std::pair<char32_t, uint64_t>> kept;
  for (const auto& [c, n] : counts) {
    if (n >= min_count) kept.emplace_back(c, n);
  }
  std::stable_sort(kept.begin(), kept.end(), [](const auto& a, const auto& b) { return a.second > b.second; });

  Vocab v;
  double total = 0;
  for (const auto& [c, n] : kept) {
    v.index.emplace(c, static_cast<int>(v.tokens.size()));
    v.tokens.push_back(c);
    v.counts.push_back(n);
    v.noise.push_back(std::pow(static_cast<double>(n), 0.75));
    total += v.noise.back();
  }
  double running = 0;
  for (double& p : v.noise) {
    p /= total;
    running += p;
    v.noise_cdf.push_back(running);
  }
  if (!v.noise_cdf.empty()) v.noise_cdf.back() = 1.0;
  return v;
}

double sgns_loss(const EmbeddingTable& t, int center, int context, std::span<const int> negatives) {
  check_index(t, center);
  check_index(t, context);
  const auto v = t.in_row(static_cast<std::size_t>(center));
  double loss = softplus(-kernels::dot(t.out_row(static_cast<std::size_t>(context)), v));
  for (int k : negatives) {
    check_index(t, k);
    loss += softplus(kernels::dot(t.out_row(static_cast<std::size_t>(k)), v));
  }
  return loss;
}

double sgns_step(EmbeddingTable& t, int center, int context, std::span<const int> negatives, double lr) {
  check_index(t, center);
  check_index(t, context);
  for (int k : negatives) check_index(t, k);
  if (!(lr >= 0)) throw ArgumentError("learning rate must be non-negative");

  const auto& K = kernels::active();
  const std::size_t d = t.dim;
  const std::vector<double> v(t.in_row(static_cast<std::size_t>(center)).begin(),
                              t.in_row(static_cast<std::size_t>(center)).end());
  std::vector<double> grad_v(d, 0.0);

  const std::size_t n = negatives.size() + 1;
  std::vector<int> rows(n);
  std::vector<double> coeff(n);
  rows[0] = context;
  for (std::size_t i = 0; i < negatives.size(); ++i) rows[i + 1] = negatives[i];

  double loss = 0;
  for (std::size_t i = 0; i < n; ++i) {
    const double* u = t.output.data() + static_cast<std::size_t>(rows[i]) * d;
    const double score = K.dot(u, v.data(), d);
    const double label = i == 0 ? 1.0 : 0.0;
    loss += i == 0 ? softplus(-score) : softplus(score);
    coeff[i] = sigmoid(score) - label;  // dL/dscore
    K.axpy(coeff[i], u, grad_v.data(), d);
  }
  for (std::size_t i = 0; i < n; ++i) {
    K.axpy(-lr * coeff[i], v.data(), t.output.data() + static_cast<std::size_t>(rows[i]) * d, d);
  }
  K.axpy(-lr, grad_v.data(), t.input.data() + static_cast<std::size_t>(center) * d, d);
  return loss;
}

SkipgramModel train_skipgram(std::span<const Text> corpus, const SkipgramConfig& config) {
  if (config.dim == 0 || config.window == 0 || config.epochs <= 0 || !(config.lr > 0)) {
    throw ArgumentError("skip-gram dimensions, window, epochs and learning rate must be positive");
  }
  SkipgramModel model;
  model.vocab = build_vocab(corpus, config.min_count);
  if (model.vocab.empty()) throw ArgumentError("corpus yields an empty vocabulary");
  const std::size_t V = model.vocab.size();
  const std::size_t D = config.dim;
  model.table = EmbeddingTable(V, D);

  Rng init(derive_seed({config.seed, 0x494e4954}));
  for (double& x : model.table.input) x = init.uniform(-0.5 / static_cast<double>(D), 0.5 / static_cast<double>(D));

  std::vector<std::vector<int>> lines;
  std::size_t total_tokens = 0;
  for (const auto& s : corpus) {
    std::vector<int> ids;
    for (char32_t c : s) {
      if (int i = model.vocab.lookup(c); i >= 0) ids.push_back(i);
    }
    total_tokens += ids.size();
    lines.push_back(std::move(ids));
  }

  const double planned = static_cast<double>(total_tokens) * config.epochs;
  const double min_lr = config.lr * 1e-4;
  std::size_t processed = 0;
  std::vector<int> negatives;
  negatives.reserve(config.negatives);

  for (int epoch = 0; epoch < config.epochs; ++epoch) {
    Rng rng(derive_seed({config.seed, static_cast<uint64_t>(epoch) + 1}));
    double loss_sum = 0;
    std::size_t pairs = 0;
    for (const auto& ids : lines) {
      for (std::size_t i = 0; i < ids.size(); ++i, ++processed) {
        const double lr = std::max(config.lr * (1.0 - static_cast<double>(processed) / planned), min_lr);
        const auto reach = static_cast<std::size_t>(rng.below(config.window)) + 1;
        const std::size_t lo = i >= reach ? i - reach : 0;
        const std::size_t hi = std::min(ids.size() - 1, i + reach);
        for (std::size_t j = lo; j <= hi; ++j) {
          if (j == i) continue;
          negatives.clear();
          for (std::size_t k = 0; k < config.negatives; ++k) {
            const int neg = model.vocab.sample_noise(rng.uniform());
            if (neg != ids[j]) negatives.push_back(neg);
          }
          loss_sum += sgns_step(model.table, ids[i], ids[j], negatives, lr);
          ++pairs;
        }
      }
    }
    model.epoch_loss.push_back(pairs ? loss_sum / static_cast<double>(pairs) : 0.0);
  }
  return model;
}

double cosine(std::span<const double> a, std::span<const double> b) {
  const double na = std::sqrt(kernels::dot(a, a));
  const double nb = std::sqrt(kernels::dot(b, b));
  if (na == 0 || nb == 0) return 0.0;
  return kernels::dot(a, b) / (na * nb);
}

std::vector<Neighbor> nearest_neighbors(const EmbeddingTable& table, const Vocab& vocab, char32_t token,
                                        std::size_t k) {
  const int q = vocab.lookup(token);
  if (q < 0) throw ArgumentError("token " + codepoint_label(token) + " is not in the vocabulary");
  if (k >= vocab.size()) throw ArgumentError("k must be smaller than the vocabulary size");
  std::vector<std::pair<double, int>> scored;
  const auto qv = table.in_row(static_cast<std::size_t>(q));
  for (std::size_t i = 0; i < vocab.size(); ++i) {
    if (static_cast<int>(i) == q) continue;
    scored.emplace_back(cosine(qv, table.in_row(i)), static_cast<int>(i));
  }
  std::stable_sort(scored.begin(), scored.end(), [](const auto& a, const auto& b) { return a.first > b.first; });
  std::vector<Neighbor> out;
  for (std::size_t i = 0; i < k; ++i) out.push_back({vocab.tokens[static_cast<std::size_t>(scored[i].second)], scored[i].first});
  return out;
}

std::vector<Text> bilingual_lines(std::span<const SentencePair> pairs, uint64_t seed) {
  std::vector<Text> lines;
  for (const auto& p : pairs) {
    if (!p.source.empty()) lines.push_back(p.source);
    if (!p.target.empty()) lines.push_back(p.target);
  }
  Rng rng(seed);
  rng.shuffle(std::span(lines));
  return lines;
}

std::string render_vectors(const SkipgramModel& model) {
  std::string out = std::to_string(model.vocab.size()) + " " + std::to_string(model.table.dim) + "\n";
  char buf[32];
  for (std::size_t i = 0; i < model.vocab.size(); ++i) {
    out += to_utf8(model.vocab.tokens[i]);
    for (double x : model.table.in_row(i)) {
      std::snprintf(buf, sizeof buf, " %.6f", x);
      out += buf;
    }
    out += '\n';
  }
  return out;
}

void save_vectors(const SkipgramModel& model, const std::filesystem::path& path) {
  io::write_file_atomic(path, render_vectors(model));
}

}  // namespace nushu::embed
