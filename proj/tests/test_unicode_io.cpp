#include <doctest.h>

#include <fstream>

#include "nushu/errors.hpp"
#include "nushu/io.hpp"
#include "nushu/random.hpp"
#include "nushu/unicode.hpp"
#include "support.hpp"

using namespace nushu;

TEST_CASE("utf8 round trip covers astral Nüshu characters") {
  const Text t = {U'阳', 0x1B170, U'a', 0x1B2FB};
  CHECK(to_utf8(t) == "阳\xF0\x9B\x85\xB0" "a\xF0\x9B\x8B\xBB");
  CHECK(from_utf8(to_utf8(t)) == t);
  CHECK(scalar_length(to_utf8(t)) == 4);
}

TEST_CASE("malformed utf8 and a leading BOM are rejected") {
  CHECK_THROWS_AS(from_utf8("\xC3"), EncodingError);
  CHECK_THROWS_AS(from_utf8("\xED\xA0\x80"), EncodingError);  // surrogate
  CHECK_THROWS_AS(from_utf8("\xEF\xBB\xBFx"), EncodingError);
}

TEST_CASE("Nüshu block bounds") {
  CHECK(is_nushu(0x1B170));
  CHECK(is_nushu(0x1B2FB));
  CHECK_FALSE(is_nushu(0x1B16F));
  CHECK_FALSE(is_nushu(0x1B2FC));
  CHECK_FALSE(is_nushu(U'阳'));
}

TEST_CASE("normalization drops punctuation, fullwidth symbols and ASCII digits only") {
  for (char32_t c : std::u32string_view(U"，。：！？、「」.,;!-()0123456789＋＄")) {
    CHECK_MESSAGE(is_normalization_dropped(c), codepoint_label(c));
  }
  for (char32_t c : std::u32string_view(U"阳aZ+$ ²٣")) CHECK_FALSE(is_normalization_dropped(c));
  CHECK_FALSE(is_normalization_dropped(0x1B170));
}

TEST_CASE("split_lines handles CRLF and a trailing newline") {
  CHECK(io::split_lines("") == std::vector<std::string>{});
  CHECK(io::split_lines("a\nb\n") == std::vector<std::string>{"a", "b"});
  CHECK(io::split_lines("a\r\nb") == std::vector<std::string>{"a", "b"});
  CHECK(io::split_lines("a\n\nb") == std::vector<std::string>{"a", "", "b"});
}

TEST_CASE("field escaping round-trips arbitrary text") {
  Rng rng(3);
  const std::string alphabet = "ab\\\t\n\rnt";
  for (int i = 0; i < 500; ++i) {
    std::string s;
    const auto len = rng.below(12);
    for (uint64_t k = 0; k < len; ++k) s += alphabet[rng.below(alphabet.size())];
    const std::string e = io::escape_field(s);
    CHECK(e.find('\t') == std::string::npos);
    CHECK(e.find('\n') == std::string::npos);
    CHECK(io::unescape_field(e) == s);
  }
}

TEST_CASE("atomic write replaces the file and leaves no temp files") {
  const auto dir = testing::temp_dir("io");
  const auto p = dir / "sub" / "f.txt";
  io::write_file_atomic(p, "one");
  io::write_file_atomic(p, "two");
  CHECK(io::read_file(p) == "two");
  std::size_t n = 0;
  for ([[maybe_unused]] const auto& e : std::filesystem::directory_iterator(dir / "sub")) ++n;
  CHECK(n == 1);
}

TEST_CASE("derive_seed separates streams and Rng is reproducible") {
  CHECK(derive_seed({1, 2}) != derive_seed({2, 1}));
  CHECK(derive_seed({1, 2}) == derive_seed({1, 2}));
  Rng a(9), b(9);
  for (int i = 0; i < 100; ++i) CHECK(a.next() == b.next());
  Rng r(5);
  for (int i = 0; i < 1000; ++i) {
    const double u = r.uniform();
    CHECK(u >= 0.0);
    CHECK(u < 1.0);
    CHECK(r.below(7) < 7);
  }
}

TEST_CASE("Rng::below is close to uniform") {
  Rng r(11);
  std::vector<int> counts(5);
  const int n = 50000;
  for (int i = 0; i < n; ++i) ++counts[r.below(5)];
  for (int c : counts) CHECK(std::abs(c - n / 5) < 5 * std::sqrt(n * 0.2 * 0.8));
}
