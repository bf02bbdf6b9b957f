#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "nushu/corpus.hpp"
#include "nushu/dictionary.hpp"
#include "nushu/random.hpp"
#include "nushu/unicode.hpp"

namespace testing {

inline constexpr char32_t kHanBase = 0x4E00;
inline constexpr char32_t kNushuBase = 0x1B170;

// Nüshu i <-> Han i for i < n. Every fourth Nüshu character also reads a
// second Han character (Han 200 + i), and every fifth Han character has a
// second Nüshu reading (Nüshu n + i/5), so both directions are ambiguous.
std::string fixture_dictionary_tsv(std::size_t n = 40);
nushu::MappingTable fixture_table(std::size_t n = 40);

// Random text over `alphabet`.
nushu::Text random_text(nushu::Rng& rng, std::u32string_view alphabet, std::size_t min_len, std::size_t max_len);

// Pairs "<prefix>1".. with explicit ids, validated gold.
std::vector<nushu::SentencePair> gold_pairs(const nushu::MappingTable& table, std::size_t n, uint64_t seed,
                                            std::size_t min_len = 3, std::size_t max_len = 8);

// Covered Han sentences (no translation attached).
std::vector<nushu::Text> covered_sentences(const nushu::MappingTable& table, std::size_t n, uint64_t seed,
                                           std::size_t min_len, std::size_t max_len);

// Fresh empty directory under the system temp dir.
std::filesystem::path temp_dir(const std::string& tag);

// 64-bit FNV-1a of a byte string, for comparing run outputs.
uint64_t hash_bytes(std::string_view s);

}  // namespace testing
