#include "nushu/config.hpp"

#include <charconv>
#include <cstdio>
#include <set>

#include "nushu/errors.hpp"
#include "nushu/io.hpp"

namespace nushu {

namespace {

std::string_view trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t");
  return s.substr(b, e - b + 1);
}

bool is_bare_key(std::string_view k) {
  if (k.empty()) return false;
  for (char c : k) {
    if (!(std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '-')) return false;
  }
  return true;
}

class ValueParser {
 public:
  ValueParser(std::string_view text, const std::string& file, std::size_t line)
      : s_(text), file_(file), line_(line) {}

  ConfigFile::Value parse() {
    skip_ws();
    ConfigFile::Value v;
    if (peek() == '[') {
      ++pos_;
      std::vector<ConfigFile::Scalar> items;
      skip_ws();
      if (peek() == ']') {
        ++pos_;
      } else {
        for (;;) {
          items.push_back(scalar());
          skip_ws();
          if (peek() == ',') {
            ++pos_;
            skip_ws();
            if (peek() == ']') {
              ++pos_;
              break;
            }
            continue;
          }
          if (peek() == ']') {
            ++pos_;
            break;
          }
          fail("expected ',' or ']' in array");
        }
      }
      v = std::move(items);
    } else {
      std::visit([&](auto&& x) { v = x; }, scalar());
    }
    skip_ws();
    if (pos_ < s_.size() && s_[pos_] != '#') fail("unexpected text after value");
    return v;
  }

 private:
  char peek() const { return pos_ < s_.size() ? s_[pos_] : '\0'; }
  void skip_ws() {
    while (pos_ < s_.size() && (s_[pos_] == ' ' || s_[pos_] == '\t')) ++pos_;
  }
  [[noreturn]] void fail(const std::string& what) const { throw ParseError(file_, line_, what); }

  ConfigFile::Scalar scalar() {
    if (peek() == '"') return quoted();
    if (peek() == '\'') return literal();
    const std::size_t start = pos_;
    while (pos_ < s_.size() && s_[pos_] != ',' && s_[pos_] != ']' && s_[pos_] != '#' && s_[pos_] != ' ' &&
           s_[pos_] != '\t') {
      ++pos_;
    }
    const std::string_view tok = s_.substr(start, pos_ - start);
    if (tok == "true") return true;
    if (tok == "false") return false;
    if (tok.empty()) fail("missing value");
    std::string clean;
    for (char c : tok) {
      if (c != '_') clean += c;
    }
    int64_t i = 0;
    auto [p, ec] = std::from_chars(clean.data(), clean.data() + clean.size(), i);
    if (ec == std::errc() && p == clean.data() + clean.size()) return i;
    double d = 0;
    auto [pd, ecd] = std::from_chars(clean.data(), clean.data() + clean.size(), d);
    if (ecd == std::errc() && pd == clean.data() + clean.size()) return d;
    fail("cannot parse value '" + std::string(tok) + "'");
  }

  // single-quoted: no escapes
  std::string literal() {
    const std::size_t end = s_.find('\'', ++pos_);
    if (end == std::string_view::npos) fail("unterminated string");
    std::string out(s_.substr(pos_, end - pos_));
    pos_ = end + 1;
    return out;
  }

  std::string quoted() {
    ++pos_;
    std::string out;
    while (pos_ < s_.size() && s_[pos_] != '"') {
      char c = s_[pos_++];
      if (c == '\\') {
        if (pos_ >= s_.size()) break;
        switch (char e = s_[pos_++]) {
          case 'n': out += '\n'; break;
          case 't': out += '\t'; break;
          case 'r': out += '\r'; break;
          case '"': out += '"'; break;
          case '\\': out += '\\'; break;
          default: fail(std::string("unknown escape \\") + e);
        }
      } else {
        out += c;
      }
    }
    if (pos_ >= s_.size()) fail("unterminated string");
    ++pos_;
    return out;
  }

  std::string_view s_;
  const std::string& file_;
  std::size_t line_;
  std::size_t pos_ = 0;
};

std::string render_scalar(const ConfigFile::Scalar& s) {
  return std::visit(
      [](auto&& x) -> std::string {
        using T = std::decay_t<decltype(x)>;
        if constexpr (std::is_same_v<T, std::string>) {
          std::string out = "\"";
          for (char c : x) {
            switch (c) {
              case '"': out += "\\\""; break;
              case '\\': out += "\\\\"; break;
              case '\n': out += "\\n"; break;
              case '\t': out += "\\t"; break;
              case '\r': out += "\\r"; break;
              default: out += c;
            }
          }
          return out + "\"";
        } else if constexpr (std::is_same_v<T, bool>) {
          return x ? "true" : "false";
        } else if constexpr (std::is_same_v<T, int64_t>) {
          return std::to_string(x);
        } else {
          char buf[64];
          std::snprintf(buf, sizeof buf, "%.17g", x);
          std::string s = buf;
          if (s.find_first_of(".eEn") == std::string::npos) s += ".0";
          return s;
        }
      },
      s);
}

std::string render_value(const ConfigFile::Value& v) {
  if (const auto* arr = std::get_if<std::vector<ConfigFile::Scalar>>(&v)) {
    std::string out = "[";
    for (std::size_t i = 0; i < arr->size(); ++i) out += (i ? ", " : "") + render_scalar((*arr)[i]);
    return out + "]";
  }
  ConfigFile::Scalar s;
  std::visit(
      [&](auto&& x) {
        if constexpr (!std::is_same_v<std::decay_t<decltype(x)>, std::vector<ConfigFile::Scalar>>) s = x;
      },
      v);
  return render_scalar(s);
}

const char* type_name(const ConfigFile::Value& v) {
  switch (v.index()) {
    case 0: return "string";
    case 1: return "integer";
    case 2: return "float";
    case 3: return "boolean";
    default: return "array";
  }
}

}  // namespace

ConfigFile ConfigFile::parse(std::string_view content, const std::string& name) {
  ConfigFile cfg;
  cfg.name_ = name;
  std::string section;
  const auto lines = io::split_lines(content);
  for (std::size_t i = 0; i < lines.size(); ++i) {
    const std::size_t lineno = i + 1;
    const std::string_view line = trim(lines[i]);
    if (line.empty() || line.front() == '#') continue;
    if (line.front() == '[') {
      const auto close = line.find(']');
      if (close == std::string_view::npos) throw ParseError(name, lineno, "unterminated section header");
      const auto rest = trim(line.substr(close + 1));
      if (!rest.empty() && rest.front() != '#') throw ParseError(name, lineno, "unexpected text after section header");
      section = std::string(trim(line.substr(1, close - 1)));
      if (!is_bare_key(section)) throw ParseError(name, lineno, "invalid section name '" + section + "'");
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string_view::npos) throw ParseError(name, lineno, "expected key = value");
    const std::string key(trim(line.substr(0, eq)));
    if (!is_bare_key(key)) throw ParseError(name, lineno, "invalid key '" + key + "'");
    const std::string full = section.empty() ? key : section + "." + key;
    Value v = ValueParser(line.substr(eq + 1), name, lineno).parse();
    if (!cfg.values_.emplace(full, std::move(v)).second) throw ParseError(name, lineno, "duplicate key " + full);
  }
  return cfg;
}

ConfigFile ConfigFile::load(const std::filesystem::path& path) { return parse(io::read_file(path), path.string()); }

namespace {

[[noreturn]] void type_mismatch(const std::string& file, const std::string& key, const char* want,
                                const ConfigFile::Value& got) {
  throw ValidationError(file + ": " + key + " must be " + want + ", got " + type_name(got));
}

}  // namespace

std::optional<std::string> ConfigFile::get_string(const std::string& key) const {
  auto it = values_.find(key);
  if (it == values_.end()) return std::nullopt;
  if (const auto* s = std::get_if<std::string>(&it->second)) return *s;
  type_mismatch(name_, key, "a string", it->second);
}

std::optional<int64_t> ConfigFile::get_int(const std::string& key) const {
  auto it = values_.find(key);
  if (it == values_.end()) return std::nullopt;
  if (const auto* i = std::get_if<int64_t>(&it->second)) return *i;
  type_mismatch(name_, key, "an integer", it->second);
}

std::optional<double> ConfigFile::get_double(const std::string& key) const {
  auto it = values_.find(key);
  if (it == values_.end()) return std::nullopt;
  if (const auto* d = std::get_if<double>(&it->second)) return *d;
  if (const auto* i = std::get_if<int64_t>(&it->second)) return static_cast<double>(*i);
  type_mismatch(name_, key, "a number", it->second);
}

std::optional<bool> ConfigFile::get_bool(const std::string& key) const {
  auto it = values_.find(key);
  if (it == values_.end()) return std::nullopt;
  if (const auto* b = std::get_if<bool>(&it->second)) return *b;
  type_mismatch(name_, key, "a boolean", it->second);
}

std::optional<std::vector<std::string>> ConfigFile::get_strings(const std::string& key) const {
  auto it = values_.find(key);
  if (it == values_.end()) return std::nullopt;
  const auto* arr = std::get_if<std::vector<Scalar>>(&it->second);
  if (!arr) type_mismatch(name_, key, "an array of strings", it->second);
  std::vector<std::string> out;
  for (const auto& s : *arr) {
    const auto* str = std::get_if<std::string>(&s);
    if (!str) throw ValidationError(name_ + ": " + key + " must be an array of strings");
    out.push_back(*str);
  }
  return out;
}

std::optional<std::vector<int64_t>> ConfigFile::get_ints(const std::string& key) const {
  auto it = values_.find(key);
  if (it == values_.end()) return std::nullopt;
  const auto* arr = std::get_if<std::vector<Scalar>>(&it->second);
  if (!arr) type_mismatch(name_, key, "an array of integers", it->second);
  std::vector<int64_t> out;
  for (const auto& s : *arr) {
    const auto* i = std::get_if<int64_t>(&s);
    if (!i) throw ValidationError(name_ + ": " + key + " must be an array of integers");
    out.push_back(*i);
  }
  return out;
}

void ConfigFile::reject_unknown(const std::vector<std::string>& allowed) const {
  const std::set<std::string> ok(allowed.begin(), allowed.end());
  for (const auto& [key, _] : values_) {
    const auto dot = key.find('.');
    if (dot != std::string::npos && ok.count(key.substr(0, dot + 1))) continue;
    if (!ok.count(key)) throw ValidationError(name_ + ": unknown setting " + key);
  }
}

std::string ConfigFile::render() const {
  std::string out;
  std::string current = "\x01";
  // top-level keys first, then sections
  for (int pass = 0; pass < 2; ++pass) {
    for (const auto& [key, v] : values_) {
      const auto dot = key.find('.');
      if ((dot == std::string::npos) != (pass == 0)) continue;
      std::string section = dot == std::string::npos ? "" : key.substr(0, dot);
      const std::string leaf = dot == std::string::npos ? key : key.substr(dot + 1);
      if (section != current) {
        if (!section.empty()) out += (out.empty() ? "" : "\n") + ("[" + section + "]\n");
        current = section;
      }
      out += leaf + " = " + render_value(v) + "\n";
    }
  }
  return out;
}

// ---------------------------------------------------------------------------

namespace {

const std::vector<std::string> kCampaignKeys = {
    "dictionary", "overlay", "gold", "sentences", "out_dir", "schedule", "sample_seed",
    "provider.kind", "provider.seed", "provider.length_error_p", "provider.substitution_p", "provider.refusal_p",
    "provider.endpoint", "provider.model", "provider.token_env", "provider.timeout_seconds", "provider.context_mode",
    "pipeline.pool_size", "pipeline.promote_count", "pipeline.max_retries", "pipeline.rounds",
    "pipeline.batch_per_round", "pipeline.control_mode", "pipeline.seed", "pipeline.workers", "pipeline.instruction",
};

std::filesystem::path existing(const std::filesystem::path& base, const std::string& p, const char* what) {
  std::filesystem::path path(p);
  if (path.is_relative()) path = base / path;
  if (!std::filesystem::exists(path)) throw ValidationError(std::string(what) + " not found: " + path.string());
  return path;
}

uint64_t non_negative(const std::string& key, int64_t v) {
  if (v < 0) throw ValidationError(key + " must be non-negative");
  return static_cast<uint64_t>(v);
}

}  // namespace

CampaignConfig CampaignConfig::from_file(const ConfigFile& f, const std::filesystem::path& base) {
  f.reject_unknown(kCampaignKeys);
  CampaignConfig c;
  auto required = [&](const char* key) {
    auto v = f.get_string(key);
    if (!v) throw ValidationError(std::string("missing required setting ") + key);
    return *v;
  };
  c.dictionary = existing(base, required("dictionary"), "dictionary");
  if (auto v = f.get_string("overlay")) c.overlay = existing(base, *v, "overlay");
  c.gold = existing(base, required("gold"), "gold corpus");
  c.sentences = existing(base, required("sentences"), "sentence file");
  c.out_dir = base / f.get_string("out_dir").value_or(c.out_dir.string());
  if (auto v = f.get_string("schedule")) c.schedule = *v;
  if (c.schedule != "canonical" && c.schedule != "uniform") {
    throw ValidationError("schedule must be \"canonical\" or \"uniform\"");
  }
  if (auto v = f.get_int("sample_seed")) c.sample_seed = non_negative("sample_seed", *v);

  if (auto v = f.get_string("provider.kind")) c.provider = *v;
  if (c.provider != "mock" && c.provider != "http") throw ValidationError("provider.kind must be \"mock\" or \"http\"");
  if (auto v = f.get_int("provider.seed")) c.mock_seed = non_negative("provider.seed", *v);
  if (auto v = f.get_double("provider.length_error_p")) c.noise.length_error_p = *v;
  if (auto v = f.get_double("provider.substitution_p")) c.noise.substitution_p = *v;
  if (auto v = f.get_double("provider.refusal_p")) c.noise.refusal_p = *v;
  for (double p : {c.noise.length_error_p, c.noise.substitution_p, c.noise.refusal_p}) {
    if (!(p >= 0 && p <= 1)) throw ValidationError("provider probabilities must lie in [0, 1]");
  }
  if (auto v = f.get_string("provider.endpoint")) c.http.endpoint = *v;
  if (auto v = f.get_string("provider.model")) c.http.model = *v;
  if (auto v = f.get_string("provider.token_env")) c.http.token_env = *v;
  if (auto v = f.get_double("provider.timeout_seconds")) c.http.timeout_seconds = *v;
  if (auto v = f.get_string("provider.context_mode")) {
    if (*v == "inline") c.http.context_mode = ContextMode::Inline;
    else if (*v == "attachment") c.http.context_mode = ContextMode::Attachment;
    else throw ValidationError("provider.context_mode must be \"inline\" or \"attachment\"");
  }
  if (c.provider == "http" && (c.http.endpoint.empty() || c.http.model.empty())) {
    throw ValidationError("http provider needs provider.endpoint and provider.model");
  }

  auto& p = c.pipeline;
  if (auto v = f.get_int("pipeline.pool_size")) p.pool_size = non_negative("pipeline.pool_size", *v);
  if (auto v = f.get_int("pipeline.promote_count")) p.promote_count = non_negative("pipeline.promote_count", *v);
  if (auto v = f.get_int("pipeline.max_retries")) p.max_retries = static_cast<int>(*v);
  if (auto v = f.get_int("pipeline.rounds")) p.rounds = static_cast<int>(*v);
  if (auto v = f.get_int("pipeline.batch_per_round")) p.batch_per_round = non_negative("pipeline.batch_per_round", *v);
  if (auto v = f.get_bool("pipeline.control_mode")) p.control_mode = *v;
  if (auto v = f.get_int("pipeline.seed")) p.seed = non_negative("pipeline.seed", *v);
  if (auto v = f.get_int("pipeline.workers")) p.workers = non_negative("pipeline.workers", *v);
  if (auto v = f.get_string("pipeline.instruction")) p.instruction = *v;
  try {
    p.validate();
  } catch (const ArgumentError& e) {
    throw ValidationError(e.what());
  }
  if (c.schedule == "canonical" && (p.rounds != 6 || p.batch_per_round != 30)) {
    throw ValidationError("the canonical schedule is 6 rounds of 30; use schedule = \"uniform\" otherwise");
  }
  return c;
}

ConfigFile CampaignConfig::resolved() const {
  ConfigFile f;
  f.set("dictionary", dictionary.string());
  if (overlay) f.set("overlay", overlay->string());
  f.set("gold", gold.string());
  f.set("sentences", sentences.string());
  f.set("out_dir", out_dir.string());
  f.set("schedule", schedule);
  f.set("sample_seed", static_cast<int64_t>(sample_seed));
  f.set("provider.kind", provider);
  if (provider == "mock") {
    f.set("provider.seed", static_cast<int64_t>(mock_seed));
    f.set("provider.length_error_p", noise.length_error_p);
    f.set("provider.substitution_p", noise.substitution_p);
    f.set("provider.refusal_p", noise.refusal_p);
  } else {
    f.set("provider.endpoint", http.endpoint);
    f.set("provider.model", http.model);
    f.set("provider.token_env", http.token_env);
    f.set("provider.timeout_seconds", http.timeout_seconds);
    f.set("provider.context_mode", std::string(http.context_mode == ContextMode::Inline ? "inline" : "attachment"));
  }
  f.set("pipeline.pool_size", static_cast<int64_t>(pipeline.pool_size));
  f.set("pipeline.promote_count", static_cast<int64_t>(pipeline.promote_count));
  f.set("pipeline.max_retries", static_cast<int64_t>(pipeline.max_retries));
  f.set("pipeline.rounds", static_cast<int64_t>(pipeline.rounds));
  f.set("pipeline.batch_per_round", static_cast<int64_t>(pipeline.batch_per_round));
  f.set("pipeline.control_mode", pipeline.control_mode);
  f.set("pipeline.seed", static_cast<int64_t>(pipeline.seed));
  f.set("pipeline.workers", static_cast<int64_t>(pipeline.workers));
  f.set("pipeline.instruction", pipeline.instruction);
  return f;
}

}  // namespace nushu
