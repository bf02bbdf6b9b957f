#include <doctest.h>

#include <algorithm>
#include <numeric>

#include "nushu/corpus.hpp"
#include "nushu/errors.hpp"
#include "nushu/io.hpp"
#include "support.hpp"

using namespace nushu;

TEST_CASE("normalize_sentence examples") {
  CHECK(normalize_sentence(U"") == U"");
  CHECK(normalize_sentence(U"春眠不觉晓，") == U"春眠不觉晓");
  CHECK(normalize_sentence(U"第1章：起") == U"第章起");
  CHECK(normalize_sentence(U"“你好！”（2024）") == U"你好");
}

TEST_CASE("property: normalization is idempotent and only deletes") {
  Rng rng(1);
  const std::u32string alphabet = U"阳洋，。1a!：9𛅰 ";
  for (int i = 0; i < 500; ++i) {
    const Text raw = testing::random_text(rng, alphabet, 0, 12);
    const Text once = normalize_sentence(raw);
    CHECK(normalize_sentence(once) == once);
    CHECK(once.size() <= raw.size());
    // what remains is a subsequence of the input
    std::size_t j = 0;
    for (char32_t c : raw) {
      if (j < once.size() && once[j] == c) ++j;
    }
    CHECK(j == once.size());
  }
}

TEST_CASE("check_pair invariants") {
  SentencePair p{U"阳洋", U"𛅰𛅰", Provenance::Gold, std::nullopt, Status::Validated, ""};
  CHECK_NOTHROW(check_pair(p));
  p.target = U"𛅰";
  CHECK_THROWS_AS(check_pair(p), ValidationError);
  p.status = Status::Failed;
  CHECK_NOTHROW(check_pair(p));
  p.provenance = Provenance::Silver;
  CHECK_THROWS_AS(check_pair(p), ValidationError);  // silver needs a round
  p.round = 2;
  CHECK_NOTHROW(check_pair(p));
  p.round = 0;
  CHECK_THROWS_AS(check_pair(p), ValidationError);
  p = {U"阳", U"a", Provenance::Gold, std::nullopt, Status::Pending, ""};
  CHECK_THROWS_AS(check_pair(p), ValidationError);
}

TEST_CASE("corpus TSV round trip and ids") {
  CHECK(parse_corpus("").empty());
  std::vector<SentencePair> pairs = {
      {U"阳洋", U"𛅰𛅰", Provenance::Gold, std::nullopt, Status::Validated, ""},
      {U"洋", U"𛅰", Provenance::Silver, 1, Status::Validated, ""},
      {U"阳\t月", U"", Provenance::Silver, 1, Status::Failed, ""},
      {U"洋", U"𛅰", Provenance::Corrected, 2, Status::Validated, ""},
  };
  assign_ids(pairs);
  CHECK(pairs[0].id == "g1");
  CHECK(pairs[1].id == "r1.1");
  CHECK(pairs[2].id == "r1.2");
  CHECK(pairs[3].id == "r2.1");
  const auto dir = testing::temp_dir("corpus");
  save_corpus(pairs, dir / "c.tsv");
  CHECK(load_corpus(dir / "c.tsv") == pairs);
  CHECK(render_corpus(parse_corpus(render_corpus(pairs))) == render_corpus(pairs));
}

TEST_CASE("corpus load errors carry the row") {
  const std::string bad = "阳\t𛅰\tgold\t\tvalidated\n阳洋月星阳\t𛅰𛅰𛅰𛅰\tgold\t\tvalidated\n";
  try {
    parse_corpus(bad, "c.tsv");
    FAIL("expected an error");
  } catch (const ParseError& e) {
    CHECK(e.line() == 2);
  }
  CHECK_THROWS_AS(parse_corpus("阳\t𛅰\tgold\n"), ParseError);
  CHECK_THROWS_AS(parse_corpus("阳\t𛅰\tbronze\t\tvalidated\n"), ParseError);
  CHECK_THROWS_AS(parse_corpus("阳\t𛅰\tsilver\tx\tvalidated\n"), ParseError);
}

TEST_CASE("split_fixed") {
  const auto table = testing::fixture_table();
  const auto pairs = testing::gold_pairs(table, 500, 3);
  const auto s = split_fixed(pairs, 100, 9);
  CHECK(s.train.size() == 400);
  CHECK(s.test.size() == 100);
  const auto again = split_fixed(pairs, 100, 9);
  CHECK(again.train == s.train);
  CHECK(again.test == s.test);
  std::vector<std::string> ids;
  for (const auto& p : s.train) ids.push_back(p.id);
  for (const auto& p : s.test) ids.push_back(p.id);
  std::sort(ids.begin(), ids.end());
  CHECK(std::adjacent_find(ids.begin(), ids.end()) == ids.end());
  CHECK(ids.size() == 500);
  const auto zero = split_fixed(pairs, 0, 1);
  CHECK(zero.test.empty());
  CHECK(zero.train.size() == 500);
  CHECK_THROWS_AS(split_fixed(pairs, 501, 1), ArgumentError);
  CHECK(split_fixed(pairs, 100, 10).test != s.test);
}

TEST_CASE("round schedules") {
  const auto c = RoundSchedule::canonical();
  REQUIRE(c.size() == 6);
  CHECK(c.total() == 180);
  for (int r = 1; r <= 6; ++r) {
    CHECK(c.bins()[r - 1].first == static_cast<std::size_t>((r - 1) * 30 + 1));
    CHECK(c.bins()[r - 1].last == static_cast<std::size_t>(r * 30));
  }
  CHECK(c.bins()[5].expected_mean_length.value() == doctest::Approx(31.73));
  CHECK_THROWS_AS(RoundSchedule({{1, 1, 10, {}}, {2, 12, 20, {}}}), ArgumentError);
  CHECK_THROWS_AS(RoundSchedule({{1, 2, 10, {}}}), ArgumentError);
  CHECK(RoundSchedule::uniform(3, 4).total() == 12);
}

TEST_CASE("bin_by_length") {
  Rng rng(5);
  const auto schedule = RoundSchedule::canonical();
  std::vector<Text> sents;
  for (int i = 0; i < 180; ++i) sents.push_back(testing::random_text(rng, U"阳洋月", 1, 40));
  const auto bins = bin_by_length(sents, schedule);
  REQUIRE(bins.size() == 6);
  std::vector<Text> flat;
  double prev_mean = 0;
  for (const auto& b : bins) {
    CHECK(b.size() == 30);
    double mean = 0;
    for (const auto& s : b) mean += static_cast<double>(s.size()) / 30.0;
    CHECK(mean >= prev_mean);
    prev_mean = mean;
    flat.insert(flat.end(), b.begin(), b.end());
  }
  CHECK(std::is_sorted(flat.begin(), flat.end(), [](const Text& a, const Text& b) { return a.size() < b.size(); }));
  auto x = flat, y = sents;
  std::sort(x.begin(), x.end());
  std::sort(y.begin(), y.end());
  CHECK(x == y);

  std::vector<Text> same;
  for (int i = 0; i < 180; ++i) same.push_back(Text(4, static_cast<char32_t>(0x4E00 + i)));
  const auto sb = bin_by_length(same, schedule);
  CHECK(sb[0][0] == same[0]);
  CHECK(sb[5][29] == same[179]);

  CHECK_THROWS_AS(bin_by_length(std::span(sents).first(179), schedule), ArgumentError);
}

TEST_CASE("sample_sentences keeps input order") {
  std::vector<Text> s;
  for (int i = 0; i < 50; ++i) s.push_back(Text(1, static_cast<char32_t>(0x4E00 + i)));
  const auto a = sample_sentences(s, 20, 3);
  CHECK(a.size() == 20);
  CHECK(std::is_sorted(a.begin(), a.end()));
  CHECK(sample_sentences(s, 20, 3) == a);
  CHECK_THROWS_AS(sample_sentences(s, 51, 3), ArgumentError);
}

TEST_CASE("synth_fixture_corpus") {
  const auto table = testing::fixture_table();
  CHECK(synth_fixture_corpus(table, 0, 1, 5, 1).empty());
  const auto a = synth_fixture_corpus(table, 50, 2, 9, 4);
  CHECK(a == synth_fixture_corpus(table, 50, 2, 9, 4));
  for (const auto& p : a) {
    CHECK(sentence_coverage(table, p.source).fully_covered);
    CHECK(p.source.size() == p.target.size());
    CHECK_NOTHROW(check_pair(p));
  }
  CHECK_THROWS_AS(synth_fixture_corpus(MappingTable{}, 5, 1, 3, 1), ArgumentError);
}
