#pragma once

#include <cstddef>
#include <filesystem>
#include <map>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "nushu/unicode.hpp"

namespace nushu {

enum class Script { Source, Target };

/// One character tagged with its script. Target characters are always in the
/// Nüshu block and source characters never are; the factories enforce it.
class ScriptChar {
 public:
  static ScriptChar source(char32_t c);
  static ScriptChar target(char32_t c);

  char32_t codepoint() const { return cp_; }
  Script script() const { return script_; }

  friend bool operator==(const ScriptChar&, const ScriptChar&) = default;

 private:
  ScriptChar(char32_t c, Script s) : cp_(c), script_(s) {}
  char32_t cp_;
  Script script_;
};

enum class Origin { Official, Registered };

const char* origin_name(Origin o);

struct CoverageReport {
  Text covered;  // distinct, first-occurrence order
  Text missing;  // distinct, first-occurrence order
  bool fully_covered = true;
};

struct FilterResult {
  std::vector<Text> kept;
  std::vector<Text> rejected;
};

// Bidirectional source<->target character multi-mapping. Candidate lists keep
// insertion (file) order and never hold duplicates. Instances are not mutated
// after construction; registration produces a new table.
class MappingTable {
 public:
  MappingTable() = default;

  const std::vector<char32_t>& candidates_for_source(char32_t source) const;
  const std::vector<char32_t>& candidates_for_target(char32_t target) const;
  std::vector<ScriptChar> candidates_for_source(ScriptChar c) const;
  std::vector<ScriptChar> candidates_for_target(ScriptChar c) const;

  bool contains(char32_t source, char32_t target) const;
  bool has_target(char32_t target) const { return backward_.contains(target); }
  Origin origin(char32_t source, char32_t target) const;

  bool empty() const { return forward_.empty(); }
  std::size_t pair_count() const { return origins_.size(); }

  /// Source characters that have at least one candidate, in codepoint order.
  std::vector<char32_t> covered_sources() const;

  const std::map<char32_t, std::vector<char32_t>>& forward() const { return forward_; }
  const std::map<char32_t, std::vector<char32_t>>& backward() const { return backward_; }

  /// Registered pairs in registration order.
  const std::vector<std::pair<char32_t, char32_t>>& registered() const { return registered_; }

  // Used by loaders and register_mapping. Returns false if the pair existed.
  bool insert(char32_t source, char32_t target, Origin origin);

 private:
  std::map<char32_t, std::vector<char32_t>> forward_;
  std::map<char32_t, std::vector<char32_t>> backward_;
  std::map<std::pair<char32_t, char32_t>, Origin> origins_;
  std::vector<std::pair<char32_t, char32_t>> registered_;
};

struct DictionaryLoad {
  MappingTable table;
  std::size_t duplicate_pairs = 0;
};

/// Dictionary TSV: one line per target character, `target<TAB>sources` with
/// all source candidates concatenated. Blank lines are skipped.
DictionaryLoad load_dictionary(const std::filesystem::path& path);
DictionaryLoad parse_dictionary(std::string_view content, const std::string& name = "<dictionary>");

/// Overlay TSV: `target<TAB>sources<TAB>origin`. Pairs are merged into
/// `base`; the base file is never rewritten.
DictionaryLoad load_overlay(MappingTable base, const std::filesystem::path& path);
DictionaryLoad parse_overlay(MappingTable base, std::string_view content,
                             const std::string& name = "<overlay>");
std::string render_overlay(const MappingTable& table);
void save_overlay(const MappingTable& table, const std::filesystem::path& path);

CoverageReport sentence_coverage(const MappingTable& table, std::u32string_view sentence);
FilterResult filter_corpus(const MappingTable& table, std::span<const Text> sentences);

struct Registration {
  MappingTable table;
  bool added = false;  // false: pair already present, table unchanged
};

/// Throws ValidationError if `target` is outside the Nüshu block or `source`
/// is inside it.
Registration register_mapping(const MappingTable& table, char32_t source, char32_t target);

}  // namespace nushu
