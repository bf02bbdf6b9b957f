#include "nushu/corpus.hpp"

#include <algorithm>
#include <map>
#include <numeric>

#include "nushu/errors.hpp"
#include "nushu/io.hpp"
#include "nushu/random.hpp"

namespace nushu {

const char* provenance_name(Provenance p) {
  switch (p) {
    case Provenance::Gold: return "gold";
    case Provenance::Silver: return "silver";
    case Provenance::Corrected: return "corrected";
  }
  return "?";
}

const char* status_name(Status s) {
  switch (s) {
    case Status::Validated: return "validated";
    case Status::Failed: return "failed";
    case Status::Pending: return "pending";
  }
  return "?";
}

void check_pair(const SentencePair& pair) {
  if (pair.status == Status::Validated && pair.source.size() != pair.target.size()) {
    throw ValidationError("validated pair has source length " + std::to_string(pair.source.size()) +
                          " but target length " + std::to_string(pair.target.size()));
  }
  const bool needs_round = pair.provenance != Provenance::Gold;
  if (needs_round != pair.round.has_value()) {
    throw ValidationError(needs_round ? "silver/corrected pair without a round"
                                      : "gold pair must not carry a round");
  }
  if (pair.round && *pair.round < 1) {
    throw ValidationError("round must be positive");
  }
  for (char32_t c : pair.target) {
    if (!is_nushu(c)) {
      throw ValidationError("target contains non-Nüshu character " + codepoint_label(c));
    }
  }
}

void assign_ids(std::vector<SentencePair>& pairs) {
  std::size_t gold = 0;
  std::map<int, std::size_t> per_round;
  for (auto& p : pairs) {
    if (p.round) {
      p.id = "r" + std::to_string(*p.round) + "." + std::to_string(++per_round[*p.round]);
    } else {
      p.id = "g" + std::to_string(++gold);
    }
  }
}

Text normalize_sentence(std::u32string_view raw) {
  Text out;
  out.reserve(raw.size());
  for (char32_t c : raw) {
    if (!is_normalization_dropped(c)) out.push_back(c);
  }
  return out;
}

namespace {

Provenance parse_provenance(std::string_view s, const std::string& name, std::size_t line) {
  if (s == "gold") return Provenance::Gold;
  if (s == "silver") return Provenance::Silver;
  if (s == "corrected") return Provenance::Corrected;
  throw ParseError(name, line, "unknown provenance '" + std::string(s) + "'");
}

Status parse_status(std::string_view s, const std::string& name, std::size_t line) {
  if (s == "validated") return Status::Validated;
  if (s == "failed") return Status::Failed;
  if (s == "pending") return Status::Pending;
  throw ParseError(name, line, "unknown status '" + std::string(s) + "'");
}

std::optional<int> parse_round(std::string_view s, const std::string& name, std::size_t line) {
  if (s.empty()) return std::nullopt;
  int value = 0;
  for (char c : s) {
    if (c < '0' || c > '9' || value > 100000) {
      throw ParseError(name, line, "round must be a positive integer");
    }
    value = value * 10 + (c - '0');
  }
  return value;
}

}  // namespace

std::vector<SentencePair> parse_corpus(std::string_view content, const std::string& name) {
  std::vector<SentencePair> pairs;
  const auto lines = io::split_lines(content);
  for (std::size_t i = 0; i < lines.size(); ++i) {
    const std::size_t lineno = i + 1;
    const auto fields = io::split(lines[i], '\t');
    if (fields.size() != 5) {
      throw ParseError(name, lineno, "expected 5 tab-separated fields, found " +
                                         std::to_string(fields.size()));
    }
    SentencePair p;
    try {
      p.source = from_utf8(io::unescape_field(fields[0]));
      p.target = from_utf8(io::unescape_field(fields[1]));
    } catch (const EncodingError& e) {
      throw ParseError(name, lineno, e.what());
    }
    p.provenance = parse_provenance(fields[2], name, lineno);
    p.round = parse_round(fields[3], name, lineno);
    p.status = parse_status(fields[4], name, lineno);
    try {
      check_pair(p);
    } catch (const ValidationError& e) {
      throw ParseError(name, lineno, e.what());
    }
    pairs.push_back(std::move(p));
  }
  assign_ids(pairs);
  return pairs;
}

std::vector<SentencePair> load_corpus(const std::filesystem::path& path) {
  return parse_corpus(io::read_file(path), path.string());
}

std::string render_corpus(std::span<const SentencePair> pairs) {
  std::string out;
  for (const auto& p : pairs) {
    out += io::escape_field(to_utf8(p.source));
    out += '\t';
    out += io::escape_field(to_utf8(p.target));
    out += '\t';
    out += provenance_name(p.provenance);
    out += '\t';
    if (p.round) out += std::to_string(*p.round);
    out += '\t';
    out += status_name(p.status);
    out += '\n';
  }
  return out;
}

void save_corpus(std::span<const SentencePair> pairs, const std::filesystem::path& path) {
  io::write_file_atomic(path, render_corpus(pairs));
}

std::vector<Text> load_sentences(const std::filesystem::path& path) {
  std::vector<Text> out;
  const auto lines = io::read_lines(path);
  for (std::size_t i = 0; i < lines.size(); ++i) {
    Text t;
    try {
      t = normalize_sentence(from_utf8(lines[i]));
    } catch (const EncodingError& e) {
      throw ParseError(path.string(), i + 1, e.what());
    }
    if (!t.empty()) out.push_back(std::move(t));
  }
  return out;
}

Split split_fixed(std::span<const SentencePair> pairs, std::size_t test_size, uint64_t seed) {
  if (test_size > pairs.size()) {
    throw ArgumentError("test size " + std::to_string(test_size) + " exceeds corpus size " +
                        std::to_string(pairs.size()));
  }
  std::vector<SentencePair> shuffled(pairs.begin(), pairs.end());
  Rng rng(seed);
  rng.shuffle(std::span(shuffled));
  Split split;
  const auto cut = shuffled.begin() + static_cast<std::ptrdiff_t>(test_size);
  split.test.assign(shuffled.begin(), cut);
  split.train.assign(cut, shuffled.end());
  return split;
}

RoundSchedule::RoundSchedule(std::vector<RoundBin> bins) : bins_(std::move(bins)) {
  std::size_t next = 1;
  for (const auto& b : bins_) {
    if (b.first != next || b.last < b.first) {
      throw ArgumentError("round schedule must be contiguous, ascending and non-empty");
    }
    next = b.last + 1;
  }
}

RoundSchedule RoundSchedule::canonical() {
  static constexpr double kMeans[] = {10.33, 13.63, 16.27, 19.40, 23.10, 31.73};
  std::vector<RoundBin> bins;
  for (int r = 0; r < 6; ++r) {
    const std::size_t first = static_cast<std::size_t>(r) * 30 + 1;
    bins.push_back({r + 1, first, first + 29, kMeans[r]});
  }
  return RoundSchedule(std::move(bins));
}

RoundSchedule RoundSchedule::uniform(int rounds, std::size_t per_round) {
  if (rounds <= 0 || per_round == 0) {
    throw ArgumentError("rounds and per-round size must be positive");
  }
  std::vector<RoundBin> bins;
  for (int r = 0; r < rounds; ++r) {
    const std::size_t first = static_cast<std::size_t>(r) * per_round + 1;
    bins.push_back({r + 1, first, first + per_round - 1, std::nullopt});
  }
  return RoundSchedule(std::move(bins));
}

std::vector<std::vector<Text>> bin_by_length(std::span<const Text> sentences,
                                             const RoundSchedule& schedule) {
  if (sentences.size() != schedule.total()) {
    throw ArgumentError("schedule needs exactly " + std::to_string(schedule.total()) +
                        " sentences, got " + std::to_string(sentences.size()));
  }
  std::vector<Text> sorted(sentences.begin(), sentences.end());
  std::stable_sort(sorted.begin(), sorted.end(),
                   [](const Text& a, const Text& b) { return a.size() < b.size(); });
  std::vector<std::vector<Text>> bins;
  for (const auto& b : schedule.bins()) {
    bins.emplace_back(sorted.begin() + static_cast<std::ptrdiff_t>(b.first - 1),
                      sorted.begin() + static_cast<std::ptrdiff_t>(b.last));
  }
  return bins;
}

std::vector<Text> sample_sentences(std::span<const Text> sentences, std::size_t count, uint64_t seed) {
  if (count > sentences.size()) {
    throw ArgumentError("cannot sample " + std::to_string(count) + " of " +
                        std::to_string(sentences.size()) + " sentences");
  }
  std::vector<std::size_t> idx(sentences.size());
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  Rng rng(seed);
  rng.shuffle(std::span(idx));
  idx.resize(count);
  std::sort(idx.begin(), idx.end());
  std::vector<Text> out;
  out.reserve(count);
  for (std::size_t i : idx) out.push_back(sentences[i]);
  return out;
}

Text first_candidate_translation(const MappingTable& table, std::u32string_view source) {
  Text out;
  out.reserve(source.size());
  for (char32_t c : source) {
    const auto& cands = table.candidates_for_source(c);
    if (cands.empty()) {
      throw ArgumentError("character " + codepoint_label(c) + " is not in the dictionary");
    }
    out.push_back(cands.front());
  }
  return out;
}

std::vector<SentencePair> synth_fixture_corpus(const MappingTable& table, std::size_t n,
                                               std::size_t min_len, std::size_t max_len,
                                               uint64_t seed) {
  const auto alphabet = table.covered_sources();
  if (alphabet.empty()) throw ArgumentError("fixture generation needs a non-empty dictionary");
  if (min_len == 0 || min_len > max_len) throw ArgumentError("length range must satisfy 1 <= min <= max");
  Rng rng(seed);
  std::vector<SentencePair> out;
  out.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t len = min_len + static_cast<std::size_t>(rng.below(max_len - min_len + 1));
    SentencePair p;
    for (std::size_t k = 0; k < len; ++k) {
      p.source.push_back(alphabet[static_cast<std::size_t>(rng.below(alphabet.size()))]);
    }
    p.target = first_candidate_translation(table, p.source);
    p.provenance = Provenance::Gold;
    p.status = Status::Validated;
    out.push_back(std::move(p));
  }
  assign_ids(out);
  return out;
}

}  // namespace nushu
