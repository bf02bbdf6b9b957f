#include "nushu/checkpoint.hpp"

#include <charconv>

#include "nushu/errors.hpp"
#include "nushu/io.hpp"

namespace nushu {

namespace {

constexpr std::string_view kMagic = "#nushu-checkpoint\t1";

std::string join(const std::vector<std::string>& items, char sep) {
  std::string out;
  for (std::size_t i = 0; i < items.size(); ++i) {
    if (i) out += sep;
    out += items[i];
  }
  return out;
}

std::vector<std::string> split_list(std::string_view s, char sep) {
  std::vector<std::string> out;
  if (s.empty()) return out;
  for (auto part : io::split(s, sep)) out.emplace_back(part);
  return out;
}

uint64_t to_u64(std::string_view s, const std::string& name, std::size_t line) {
  uint64_t v = 0;
  auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || p != s.data() + s.size()) {
    throw ParseError(name, line, "expected an unsigned integer, got '" + std::string(s) + "'");
  }
  return v;
}

std::string render_report(const RoundReport& r) {
  std::string out = "#report\t" + std::to_string(r.round) + '\t' + std::to_string(r.successes) +
                    '\t' + std::to_string(r.failures) + '\t' + std::to_string(r.refusals) + '\t' +
                    std::to_string(r.transport_errors) + '\t';
  bool first = true;
  for (const auto& [attempts, count] : r.retry_histogram) {
    if (!first) out += ',';
    first = false;
    out += std::to_string(attempts) + ':' + std::to_string(count);
  }
  out += '\t';
  first = true;
  for (const auto& f : r.novel_chars) {
    if (!first) out += ',';
    first = false;
    out += f.pair_id + ':' + to_utf8(f.characters);
  }
  return out + '\n';
}

RoundReport parse_report(const std::vector<std::string_view>& f, const std::string& name, std::size_t line) {
  if (f.size() != 8) throw ParseError(name, line, "malformed #report line");
  RoundReport r;
  r.round = static_cast<int>(to_u64(f[1], name, line));
  r.successes = to_u64(f[2], name, line);
  r.failures = to_u64(f[3], name, line);
  r.refusals = to_u64(f[4], name, line);
  r.transport_errors = to_u64(f[5], name, line);
  for (const auto& item : split_list(f[6], ',')) {
    const auto colon = item.find(':');
    if (colon == std::string::npos) throw ParseError(name, line, "malformed retry histogram");
    r.retry_histogram[static_cast<int>(to_u64(std::string_view(item).substr(0, colon), name, line))] =
        to_u64(std::string_view(item).substr(colon + 1), name, line);
  }
  for (const auto& item : split_list(f[7], ',')) {
    const auto colon = item.find(':');
    if (colon == std::string::npos) throw ParseError(name, line, "malformed novel-character flag");
    r.novel_chars.push_back({item.substr(0, colon), from_utf8(item.substr(colon + 1))});
  }
  return r;
}

}  // namespace

uint64_t fnv1a(std::string_view bytes, uint64_t h) {
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ull;
  }
  return h;
}

std::string render_checkpoint(const CampaignState& state) {
  std::string out(kMagic);
  out += '\n';
  out += "#fingerprint\t" + std::to_string(state.fingerprint) + '\n';
  out += "#next_round\t" + std::to_string(state.next_round) + '\n';
  out += "#pool\t" + join(state.pool_ids, ',') + '\n';
  for (const auto& e : state.rotation_log) {
    out += "#rotation\t" + std::to_string(e.round) + '\t' + join(e.inserted, ',') + '\t' +
           join(e.evicted, ',') + '\n';
  }
  for (const auto& r : state.reports) out += render_report(r);
  out += "#end\n";
  out += render_corpus(state.silver);
  return out;
}

CampaignState parse_checkpoint(std::string_view content, const std::string& name) {
  const auto lines = io::split_lines(content);
  if (lines.empty() || lines[0] != kMagic) {
    throw ParseError(name, 1, "not a campaign checkpoint");
  }
  CampaignState state;
  std::size_t i = 1;
  bool ended = false;
  for (; i < lines.size(); ++i) {
    const std::size_t lineno = i + 1;
    const auto f = io::split(lines[i], '\t');
    if (f[0] == "#end") {
      ended = true;
      ++i;
      break;
    } else if (f[0] == "#fingerprint" && f.size() == 2) {
      state.fingerprint = to_u64(f[1], name, lineno);
    } else if (f[0] == "#next_round" && f.size() == 2) {
      state.next_round = static_cast<int>(to_u64(f[1], name, lineno));
    } else if (f[0] == "#pool" && f.size() == 2) {
      state.pool_ids = split_list(f[1], ',');
    } else if (f[0] == "#rotation" && f.size() == 4) {
      state.rotation_log.push_back({static_cast<int>(to_u64(f[1], name, lineno)),
                                    split_list(f[2], ','), split_list(f[3], ',')});
    } else if (f[0] == "#report") {
      state.reports.push_back(parse_report(f, name, lineno));
    } else {
      throw ParseError(name, lineno, "unknown checkpoint header line");
    }
  }
  if (!ended) throw ParseError(name, lines.size(), "checkpoint header is not terminated by #end");
  std::string rest;
  for (; i < lines.size(); ++i) {
    rest += lines[i];
    rest += '\n';
  }
  state.silver = parse_corpus(rest, name + " (silver rows)");
  return state;
}

void save_checkpoint(const CampaignState& state, const std::filesystem::path& path) {
  io::write_file_atomic(path, render_checkpoint(state));
}

std::optional<CampaignState> load_checkpoint(const std::filesystem::path& path) {
  if (!std::filesystem::exists(path)) return std::nullopt;
  return parse_checkpoint(io::read_file(path), path.string());
}

}  // namespace nushu
