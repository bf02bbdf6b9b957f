#include <doctest.h>

#include <algorithm>

#include "nushu/dictionary.hpp"
#include "nushu/errors.hpp"
#include "support.hpp"

using namespace nushu;

namespace {

const char32_t kN0 = 0x1B170;  // 𛅰

MappingTable yang() { return parse_dictionary("𛅰\t阳洋\n").table; }

bool consistent(const MappingTable& t) {
  for (const auto& [s, targets] : t.forward()) {
    for (char32_t n : targets) {
      const auto& back = t.candidates_for_target(n);
      if (std::find(back.begin(), back.end(), s) == back.end()) return false;
    }
  }
  for (const auto& [n, sources] : t.backward()) {
    for (char32_t s : sources) {
      if (!t.contains(s, n)) return false;
    }
  }
  return true;
}

}  // namespace

TEST_CASE("empty dictionary") {
  const auto d = parse_dictionary("");
  CHECK(d.table.empty());
  CHECK(d.duplicate_pairs == 0);
}

TEST_CASE("two-candidate line builds both directions") {
  const auto t = yang();
  CHECK(t.candidates_for_source(U'阳') == std::vector<char32_t>{kN0});
  CHECK(t.candidates_for_source(U'洋') == std::vector<char32_t>{kN0});
  CHECK(t.candidates_for_target(kN0) == std::vector<char32_t>{U'阳', U'洋'});
  CHECK(t.origin(U'阳', kN0) == Origin::Official);
  const auto typed = t.candidates_for_target(ScriptChar::target(kN0));
  REQUIRE(typed.size() == 2);
  CHECK(typed[0] == ScriptChar::source(U'阳'));
}

TEST_CASE("dictionary errors name the line") {
  try {
    parse_dictionary("𛅰\t阳\n一\t阳\n", "d.tsv");
    FAIL("expected an error");
  } catch (const ParseError& e) {
    CHECK(e.line() == 2);
    CHECK(std::string(e.what()).find("d.tsv:2") != std::string::npos);
  }
  CHECK_THROWS_AS(parse_dictionary("𛅰\n"), ParseError);
  CHECK_THROWS_AS(parse_dictionary("𛅰\t阳\textra\n"), ParseError);
  CHECK_THROWS_AS(parse_dictionary("𛅰\t𛅱\n"), ValidationError);  // Nüshu on the source side
}

TEST_CASE("duplicates collapse with a count; blank lines skipped") {
  const auto d = parse_dictionary("𛅰\t阳阳\n\n𛅰\t阳\n");
  CHECK(d.duplicate_pairs == 2);
  CHECK(d.table.candidates_for_target(kN0) == std::vector<char32_t>{U'阳'});
}

TEST_CASE("candidate lookups") {
  const auto t = parse_dictionary("𛅰\t阳\n𛅱\t阳\n𛅲\t阳\n").table;
  CHECK(t.candidates_for_source(U'月').empty());
  CHECK(t.candidates_for_target(0x1B180).empty());
  CHECK(t.candidates_for_source(U'阳') == std::vector<char32_t>{0x1B170, 0x1B171, 0x1B172});
}

TEST_CASE("ScriptChar enforces the block") {
  CHECK_THROWS_AS(ScriptChar::target(U'阳'), ValidationError);
  CHECK_THROWS_AS(ScriptChar::source(kN0), ValidationError);
  CHECK(ScriptChar::target(kN0).script() == Script::Target);
}

TEST_CASE("sentence coverage") {
  const auto t = yang();
  const auto empty = sentence_coverage(t, U"");
  CHECK(empty.fully_covered);
  CHECK(empty.covered.empty());
  CHECK(empty.missing.empty());
  CHECK(sentence_coverage(t, U"阳洋").fully_covered);
  const auto r = sentence_coverage(t, U"阳月月星阳");
  CHECK_FALSE(r.fully_covered);
  CHECK(r.missing == U"月星");
  CHECK(r.covered == U"阳");
}

TEST_CASE("filter_corpus") {
  const auto t = yang();
  CHECK(filter_corpus(t, {}).kept.empty());
  const std::vector<Text> in = {U"阳洋", U"阳月"};
  const auto r = filter_corpus(t, in);
  CHECK(r.kept == std::vector<Text>{U"阳洋"});
  CHECK(r.rejected == std::vector<Text>{U"阳月"});
  const std::vector<Text> all = {U"阳", U"洋阳"};
  CHECK(filter_corpus(t, all).rejected.empty());
}

TEST_CASE("register_mapping") {
  const auto t = yang();
  const auto r = register_mapping(t, U'洁', kN0);
  CHECK(r.added);
  CHECK(r.table.candidates_for_source(U'洁') == std::vector<char32_t>{kN0});
  CHECK(r.table.candidates_for_target(kN0).size() == t.candidates_for_target(kN0).size() + 1);
  CHECK(r.table.origin(U'洁', kN0) == Origin::Registered);
  const auto again = register_mapping(r.table, U'洁', kN0);
  CHECK_FALSE(again.added);
  CHECK(again.table.forward() == r.table.forward());
  CHECK(again.table.registered() == r.table.registered());
  CHECK_THROWS_AS(register_mapping(t, 0x1B171, kN0), ValidationError);
  CHECK_THROWS_AS(register_mapping(t, U'洁', U'洁'), ValidationError);
  // the base table is untouched
  CHECK(t.candidates_for_source(U'洁').empty());
}

TEST_CASE("overlay round-trip keeps registered origin") {
  auto r = register_mapping(yang(), U'洁', kN0).table;
  r = register_mapping(r, U'月', 0x1B171).table;
  const std::string overlay = render_overlay(r);
  const auto back = parse_overlay(yang(), overlay);
  CHECK(back.table.forward() == r.forward());
  CHECK(back.table.origin(U'月', 0x1B171) == Origin::Registered);
  CHECK(back.table.registered() == r.registered());
  const auto dir = testing::temp_dir("overlay");
  save_overlay(r, dir / "o.tsv");
  CHECK(load_overlay(yang(), dir / "o.tsv").table.backward() == r.backward());
}

TEST_CASE("property: load and register sequences keep both directions consistent") {
  Rng rng(42);
  for (int trial = 0; trial < 200; ++trial) {
    std::string tsv;
    const auto lines = rng.below(6);
    for (uint64_t i = 0; i < lines; ++i) {
      tsv += to_utf8(static_cast<char32_t>(0x1B170 + rng.below(8))) + "\t";
      const auto k = 1 + rng.below(4);
      for (uint64_t j = 0; j < k; ++j) tsv += to_utf8(static_cast<char32_t>(0x4E00 + rng.below(10)));
      tsv += "\n";
    }
    MappingTable t = parse_dictionary(tsv).table;
    const auto regs = rng.below(6);
    for (uint64_t i = 0; i < regs; ++i) {
      t = register_mapping(t, static_cast<char32_t>(0x4E00 + rng.below(12)),
                           static_cast<char32_t>(0x1B170 + rng.below(10))).table;
    }
    REQUIRE(consistent(t));
    for (const auto& [s, list] : t.forward()) {
      std::vector<char32_t> sorted = list;
      std::sort(sorted.begin(), sorted.end());
      CHECK(std::adjacent_find(sorted.begin(), sorted.end()) == sorted.end());
    }
  }
}

TEST_CASE("property: filtering is idempotent and coverage ignores order") {
  const auto t = testing::fixture_table();
  Rng rng(7);
  Text alphabet;
  for (int i = 0; i < 50; ++i) alphabet.push_back(static_cast<char32_t>(0x4E00 + i));  // some uncovered
  for (int trial = 0; trial < 200; ++trial) {
    std::vector<Text> sents;
    for (int i = 0; i < 8; ++i) sents.push_back(testing::random_text(rng, alphabet, 0, 10));
    const auto once = filter_corpus(t, sents);
    CHECK(once.kept.size() + once.rejected.size() == sents.size());
    CHECK(filter_corpus(t, once.kept).kept == once.kept);

    Text s = sents[0];
    Text shuffled = s;
    rng.shuffle(std::span(shuffled));
    const auto a = sentence_coverage(t, s), b = sentence_coverage(t, shuffled);
    CHECK(a.fully_covered == b.fully_covered);
    Text am = a.missing, bm = b.missing;
    std::sort(am.begin(), am.end());
    std::sort(bm.begin(), bm.end());
    CHECK(am == bm);
  }
}
