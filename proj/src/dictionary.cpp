#include "nushu/dictionary.hpp"

#include <algorithm>
#include <unordered_set>

#include "nushu/errors.hpp"
#include "nushu/io.hpp"

namespace nushu {

namespace {

const std::vector<char32_t> kNoCandidates;

char32_t parse_target_field(std::string_view field, const std::string& name, std::size_t line) {
  Text t;
  try {
    t = from_utf8(field);
  } catch (const EncodingError& e) {
    throw ParseError(name, line, e.what());
  }
  if (t.size() != 1) {
    throw ParseError(name, line, "target field must hold exactly one character");
  }
  if (!is_nushu(t[0])) {
    throw ParseError(name, line, "target character " + codepoint_label(t[0]) +
                                     " is outside the Nüshu block");
  }
  return t[0];
}

Text parse_source_field(std::string_view field, const std::string& name, std::size_t line) {
  Text s;
  try {
    s = from_utf8(field);
  } catch (const EncodingError& e) {
    throw ParseError(name, line, e.what());
  }
  for (char32_t c : s) {
    if (is_nushu(c)) {
      throw ParseError(name, line, "source candidate " + codepoint_label(c) +
                                       " lies in the Nüshu block");
    }
  }
  return s;
}

}  // namespace

ScriptChar ScriptChar::source(char32_t c) {
  if (is_nushu(c)) {
    throw ValidationError("source character " + codepoint_label(c) + " lies in the Nüshu block");
  }
  return {c, Script::Source};
}

ScriptChar ScriptChar::target(char32_t c) {
  if (!is_nushu(c)) {
    throw ValidationError("target character " + codepoint_label(c) +
                          " is outside the Nüshu block");
  }
  return {c, Script::Target};
}

const char* origin_name(Origin o) { return o == Origin::Official ? "official" : "registered"; }

const std::vector<char32_t>& MappingTable::candidates_for_source(char32_t source) const {
  auto it = forward_.find(source);
  return it == forward_.end() ? kNoCandidates : it->second;
}

const std::vector<char32_t>& MappingTable::candidates_for_target(char32_t target) const {
  auto it = backward_.find(target);
  return it == backward_.end() ? kNoCandidates : it->second;
}

std::vector<ScriptChar> MappingTable::candidates_for_source(ScriptChar c) const {
  std::vector<ScriptChar> out;
  for (char32_t t : candidates_for_source(c.codepoint())) out.push_back(ScriptChar::target(t));
  return out;
}

std::vector<ScriptChar> MappingTable::candidates_for_target(ScriptChar c) const {
  std::vector<ScriptChar> out;
  for (char32_t s : candidates_for_target(c.codepoint())) out.push_back(ScriptChar::source(s));
  return out;
}

bool MappingTable::contains(char32_t source, char32_t target) const {
  return origins_.contains({source, target});
}

Origin MappingTable::origin(char32_t source, char32_t target) const {
  auto it = origins_.find({source, target});
  if (it == origins_.end()) {
    throw ArgumentError("pair " + codepoint_label(source) + "/" + codepoint_label(target) +
                        " is not in the table");
  }
  return it->second;
}

std::vector<char32_t> MappingTable::covered_sources() const {
  std::vector<char32_t> out;
  out.reserve(forward_.size());
  for (const auto& [c, cands] : forward_) {
    if (!cands.empty()) out.push_back(c);
  }
  return out;
}

bool MappingTable::insert(char32_t source, char32_t target, Origin origin) {
  if (!origins_.emplace(std::pair{source, target}, origin).second) return false;
  forward_[source].push_back(target);
  backward_[target].push_back(source);
  if (origin == Origin::Registered) registered_.emplace_back(source, target);
  return true;
}

DictionaryLoad parse_dictionary(std::string_view content, const std::string& name) {
  DictionaryLoad result;
  const auto lines = io::split_lines(content);
  for (std::size_t i = 0; i < lines.size(); ++i) {
    const std::size_t lineno = i + 1;
    if (lines[i].empty()) continue;
    const auto fields = io::split(lines[i], '\t');
    if (fields.size() != 2) {
      throw ParseError(name, lineno, "expected 2 tab-separated fields, found " +
                                         std::to_string(fields.size()));
    }
    const char32_t target = parse_target_field(fields[0], name, lineno);
    for (char32_t source : parse_source_field(fields[1], name, lineno)) {
      if (!result.table.insert(source, target, Origin::Official)) ++result.duplicate_pairs;
    }
  }
  return result;
}

DictionaryLoad load_dictionary(const std::filesystem::path& path) {
  return parse_dictionary(io::read_file(path), path.string());
}

DictionaryLoad parse_overlay(MappingTable base, std::string_view content, const std::string& name) {
  DictionaryLoad result{std::move(base), 0};
  const auto lines = io::split_lines(content);
  for (std::size_t i = 0; i < lines.size(); ++i) {
    const std::size_t lineno = i + 1;
    if (lines[i].empty()) continue;
    const auto fields = io::split(lines[i], '\t');
    if (fields.size() != 3) {
      throw ParseError(name, lineno, "expected 3 tab-separated fields, found " +
                                         std::to_string(fields.size()));
    }
    Origin origin;
    if (fields[2] == "registered") {
      origin = Origin::Registered;
    } else if (fields[2] == "official") {
      origin = Origin::Official;
    } else {
      throw ParseError(name, lineno, "unknown origin '" + std::string(fields[2]) + "'");
    }
    const char32_t target = parse_target_field(fields[0], name, lineno);
    for (char32_t source : parse_source_field(fields[1], name, lineno)) {
      if (!result.table.insert(source, target, origin)) ++result.duplicate_pairs;
    }
  }
  return result;
}

DictionaryLoad load_overlay(MappingTable base, const std::filesystem::path& path) {
  return parse_overlay(std::move(base), io::read_file(path), path.string());
}

std::string render_overlay(const MappingTable& table) {
  // Group by target, keeping first-registration order of targets.
  std::vector<char32_t> targets;
  std::map<char32_t, Text> sources;
  for (const auto& [s, t] : table.registered()) {
    auto [it, fresh] = sources.try_emplace(t);
    if (fresh) targets.push_back(t);
    it->second.push_back(s);
  }
  std::string out;
  for (char32_t t : targets) {
    out += to_utf8(t);
    out += '\t';
    out += to_utf8(sources[t]);
    out += "\tregistered\n";
  }
  return out;
}

void save_overlay(const MappingTable& table, const std::filesystem::path& path) {
  io::write_file_atomic(path, render_overlay(table));
}

CoverageReport sentence_coverage(const MappingTable& table, std::u32string_view sentence) {
  CoverageReport report;
  std::unordered_set<char32_t> seen;
  for (char32_t c : sentence) {
    if (!seen.insert(c).second) continue;
    if (table.candidates_for_source(c).empty()) {
      report.missing.push_back(c);
    } else {
      report.covered.push_back(c);
    }
  }
  report.fully_covered = report.missing.empty();
  return report;
}

FilterResult filter_corpus(const MappingTable& table, std::span<const Text> sentences) {
  FilterResult result;
  for (const auto& s : sentences) {
    (sentence_coverage(table, s).fully_covered ? result.kept : result.rejected).push_back(s);
  }
  return result;
}

Registration register_mapping(const MappingTable& table, char32_t source, char32_t target) {
  ScriptChar::target(target);
  ScriptChar::source(source);
  Registration r{table, false};
  r.added = r.table.insert(source, target, Origin::Registered);
  return r;
}

}  // namespace nushu
