#include <doctest.h>

#include <cmath>
#include <numeric>
#include <sstream>

#include "gradcheck.hpp"
#include "nushu/embeddings.hpp"
#include "nushu/errors.hpp"
#include "support.hpp"

using namespace nushu;
using namespace nushu::embed;

TEST_CASE("build_vocab") {
  CHECK(build_vocab({}, 5).empty());

  const std::vector<Text> lines = {U"aaaab", U"bbbbb", U"ccccc"};
  const Vocab v = build_vocab(lines, 5);
  // 'a' occurs 4 times and is dropped
  CHECK(v.size() == 2);
  CHECK(v.lookup(U'a') == -1);
  CHECK(v.tokens[0] == U'b');  // 6 occurrences
  CHECK(v.tokens[1] == U'c');
  CHECK(v.counts[0] == 6);
  CHECK(std::abs(std::accumulate(v.noise.begin(), v.noise.end(), 0.0) - 1.0) < 1e-12);
  CHECK(v.noise_cdf.back() == 1.0);
  CHECK(v.noise[0] == doctest::Approx(std::pow(6.0, 0.75) / (std::pow(6.0, 0.75) + std::pow(5.0, 0.75))));

  const std::vector<Text> uniform = {U"xyzxyz"};
  const Vocab u = build_vocab(uniform, 1);
  CHECK(u.tokens == std::vector<char32_t>{U'x', U'y', U'z'});
  for (double p : u.noise) CHECK(p == doctest::Approx(1.0 / 3.0));
  CHECK(u.sample_noise(0.0) == 0);
  CHECK(u.sample_noise(0.5) == 1);
  CHECK(u.sample_noise(0.999) == 2);

  // pure function of the corpus
  CHECK(build_vocab(lines, 1).tokens == build_vocab(lines, 1).tokens);
}

TEST_CASE("sgns gradient matches finite differences") {
  for (uint64_t seed = 1; seed <= 100; ++seed) {
    CAPTURE(seed);
    CHECK(gradcheck::sgns(seed, 8) < 1e-4);
  }
}

TEST_CASE("sgns_step edge cases") {
  Rng rng(4);
  EmbeddingTable t(5, 4);
  for (double& x : t.input) x = rng.uniform(-1, 1);
  for (double& x : t.output) x = rng.uniform(-1, 1);
  const std::vector<int> negs = {1, 2, 2};

  EmbeddingTable same = t;
  const double loss = sgns_step(same, 0, 3, negs, 0.0);
  CHECK(same == t);
  CHECK(loss == doctest::Approx(sgns_loss(t, 0, 3, negs)));

  // only the touched rows change
  EmbeddingTable moved = t;
  sgns_step(moved, 0, 3, negs, 0.1);
  for (std::size_t i = 1; i < 5; ++i) CHECK(std::equal(t.in_row(i).begin(), t.in_row(i).end(), moved.in_row(i).begin()));
  CHECK(std::equal(t.out_row(0).begin(), t.out_row(0).end(), moved.out_row(0).begin()));
  CHECK(std::equal(t.out_row(4).begin(), t.out_row(4).end(), moved.out_row(4).begin()));

  // saturated positive pair: the context row barely moves
  EmbeddingTable sat(2, 3);
  for (double& x : sat.input) x = 10;
  for (double& x : sat.output) x = 10;
  EmbeddingTable sat2 = sat;
  sgns_step(sat2, 0, 1, {}, 0.1);
  for (std::size_t i = 0; i < 3; ++i) CHECK(std::abs(sat2.out_row(1)[i] - sat.out_row(1)[i]) < 1e-12);

  CHECK_THROWS_AS(sgns_step(t, 5, 0, negs, 0.1), ArgumentError);
  CHECK_THROWS_AS(sgns_step(t, 0, -1, negs, 0.1), ArgumentError);
  const std::vector<int> bad = {7};
  CHECK_THROWS_AS(sgns_loss(t, 0, 1, bad), ArgumentError);
  CHECK_THROWS_AS(sgns_step(t, 0, 1, negs, -1.0), ArgumentError);
}

namespace {

// A and B always appear together in one set of contexts; C lives in another.
std::vector<Text> cooccurrence_corpus(uint64_t seed) {
  Rng rng(seed);
  const std::u32string left = U"defghi", right = U"jklmno";
  std::vector<Text> lines;
  for (int i = 0; i < 150; ++i) {
    Text a;
    for (int k = 0; k < 3; ++k) a += left[rng.below(left.size())];
    a += U"AB";
    for (int k = 0; k < 3; ++k) a += left[rng.below(left.size())];
    lines.push_back(a);
    Text c;
    for (int k = 0; k < 3; ++k) c += right[rng.below(right.size())];
    c += U'C';
    for (int k = 0; k < 3; ++k) c += right[rng.below(right.size())];
    lines.push_back(c);
  }
  return lines;
}

SkipgramConfig small_config(uint64_t seed) {
  SkipgramConfig c;
  c.dim = 16;
  c.window = 3;
  c.min_count = 1;
  c.negatives = 5;
  c.epochs = 5;
  c.lr = 0.05;
  c.seed = seed;
  return c;
}

}  // namespace

TEST_CASE("co-occurring tokens end up closer") {
  int wins = 0;
  for (uint64_t seed = 1; seed <= 20; ++seed) {
    const auto corpus = cooccurrence_corpus(seed);
    const auto m = train_skipgram(corpus, small_config(seed));
    const auto row = [&](char32_t c) { return m.table.in_row(static_cast<std::size_t>(m.vocab.lookup(c))); };
    wins += cosine(row(U'A'), row(U'B')) > cosine(row(U'A'), row(U'C'));
  }
  CHECK(wins >= 19);
}

TEST_CASE("training is deterministic and the loss falls") {
  const auto corpus = cooccurrence_corpus(3);
  auto cfg = small_config(9);
  cfg.epochs = 20;
  const auto a = train_skipgram(corpus, cfg);
  const auto b = train_skipgram(corpus, cfg);
  CHECK(a.table == b.table);
  CHECK(a.epoch_loss == b.epoch_loss);
  REQUIRE(a.epoch_loss.size() == 20);
  for (double l : a.epoch_loss) CHECK(std::isfinite(l));
  CHECK(a.epoch_loss.back() < a.epoch_loss.front());
  cfg.seed = 10;
  CHECK_FALSE(train_skipgram(corpus, cfg).table == a.table);
}

TEST_CASE("aligned characters are neighbours in a bilingual corpus") {
  // Each aligned pair i gets its own two anchor tokens shared by both
  // scripts, so Han i and Nüshu i see the same contexts on separate lines.
  const std::size_t n = 12;
  const char32_t anchor = 0x41;
  Rng rng(21);
  std::vector<SentencePair> pairs;
  for (int s = 0; s < 300; ++s) {
    SentencePair p;
    for (int seg = 0; seg < 3; ++seg) {
      const char32_t i = static_cast<char32_t>(rng.below(n));
      p.source += Text{anchor + 2 * i, testing::kHanBase + i, anchor + 2 * i + 1};
      p.target += Text{anchor + 2 * i, testing::kNushuBase + i, anchor + 2 * i + 1};
    }
    pairs.push_back(p);
  }
  const auto lines = bilingual_lines(pairs, 5);
  CHECK(lines.size() == 600);
  auto cfg = small_config(2);
  cfg.window = 2;
  cfg.epochs = 10;
  const auto m = train_skipgram(lines, cfg);
  int hits = 0;
  for (char32_t i = 0; i < n; ++i) {
    for (const auto& nb : nearest_neighbors(m.table, m.vocab, testing::kNushuBase + i, 10)) {
      hits += nb.token == testing::kHanBase + i;
    }
    for (const auto& nb : nearest_neighbors(m.table, m.vocab, testing::kHanBase + i, 10)) {
      hits += nb.token == testing::kNushuBase + i;
    }
  }
  CHECK(hits == 2 * static_cast<int>(n));
}

TEST_CASE("nearest_neighbors") {
  Vocab v;
  v.tokens = {U'a', U'b', U'c', U'd'};
  for (int i = 0; i < 4; ++i) v.index[v.tokens[static_cast<std::size_t>(i)]] = i;
  EmbeddingTable t(4, 4);
  for (std::size_t i = 0; i < 4; ++i) t.in_row(i)[i] = 1.0;
  CHECK(nearest_neighbors(t, v, U'a', 0).empty());
  const auto ortho = nearest_neighbors(t, v, U'a', 3);
  REQUIRE(ortho.size() == 3);
  for (const auto& n : ortho) CHECK(n.similarity == 0.0);
  CHECK(ortho[0].token == U'b');  // ties by index

  t.in_row(2)[0] = 1.0;
  t.in_row(2)[2] = 0.0;
  const auto dup = nearest_neighbors(t, v, U'a', 1);
  CHECK(dup[0].token == U'c');
  CHECK(dup[0].similarity == doctest::Approx(1.0));

  CHECK_THROWS_AS(nearest_neighbors(t, v, U'z', 1), ArgumentError);
  CHECK_THROWS_AS(nearest_neighbors(t, v, U'a', 4), ArgumentError);
}

TEST_CASE("vector file format and errors") {
  const std::vector<Text> lines = {U"abab", U"ba"};
  auto cfg = small_config(1);
  cfg.dim = 3;
  cfg.epochs = 1;
  const auto m = train_skipgram(lines, cfg);
  std::istringstream in(render_vectors(m));
  std::size_t V = 0, D = 0;
  in >> V >> D;
  CHECK(V == 2);
  CHECK(D == 3);
  std::string line;
  std::getline(in, line);
  int rows = 0;
  while (std::getline(in, line)) {
    ++rows;
    CHECK(std::count(line.begin(), line.end(), ' ') == 3);
  }
  CHECK(rows == 2);

  cfg.min_count = 100;
  CHECK_THROWS_AS(train_skipgram(lines, cfg), ArgumentError);
  cfg = small_config(1);
  cfg.dim = 0;
  CHECK_THROWS_AS(train_skipgram(lines, cfg), ArgumentError);
}

TEST_CASE("initial input vectors lie in the small uniform band") {
  const std::vector<Text> lines = {U"ab"};
  auto cfg = small_config(1);
  cfg.dim = 10;
  cfg.epochs = 1;
  cfg.lr = 1e-12;
  const auto m = train_skipgram(lines, cfg);
  for (double x : m.table.input) CHECK(std::abs(x) <= 0.05 + 1e-9);
}
