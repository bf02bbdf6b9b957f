#include "support.hpp"

#include <unistd.h>

namespace testing {

using namespace nushu;

std::string fixture_dictionary_tsv(std::size_t n) {
  std::string out;
  for (std::size_t i = 0; i < n; ++i) {
    Text sources{static_cast<char32_t>(kHanBase + i)};
    if (i % 4 == 0) sources.push_back(static_cast<char32_t>(kHanBase + 200 + i));
    out += to_utf8(static_cast<char32_t>(kNushuBase + i)) + "\t" + to_utf8(sources) + "\n";
  }
  for (std::size_t i = 0; i < n; i += 5) {
    out += to_utf8(static_cast<char32_t>(kNushuBase + n + i / 5)) + "\t" +
           to_utf8(static_cast<char32_t>(kHanBase + i)) + "\n";
  }
  return out;
}

MappingTable fixture_table(std::size_t n) { return parse_dictionary(fixture_dictionary_tsv(n)).table; }

Text random_text(Rng& rng, std::u32string_view alphabet, std::size_t min_len, std::size_t max_len) {
  const std::size_t len = min_len + rng.below(max_len - min_len + 1);
  Text t;
  for (std::size_t i = 0; i < len; ++i) t.push_back(alphabet[rng.below(alphabet.size())]);
  return t;
}

std::vector<SentencePair> gold_pairs(const MappingTable& table, std::size_t n, uint64_t seed, std::size_t min_len,
                                     std::size_t max_len) {
  return synth_fixture_corpus(table, n, min_len, max_len, seed);
}

std::vector<Text> covered_sentences(const MappingTable& table, std::size_t n, uint64_t seed, std::size_t min_len,
                                    std::size_t max_len) {
  std::vector<Text> out;
  for (auto& p : synth_fixture_corpus(table, n, min_len, max_len, seed)) out.push_back(std::move(p.source));
  return out;
}

std::filesystem::path temp_dir(const std::string& tag) {
  static int counter = 0;
  auto dir = std::filesystem::temp_directory_path() /
             ("nushu_test_" + tag + "_" + std::to_string(::getpid()) + "_" + std::to_string(counter++));
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

uint64_t hash_bytes(std::string_view s) {
  uint64_t h = 0xcbf29ce484222325ull;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ull;
  }
  return h;
}

}  // namespace testing
