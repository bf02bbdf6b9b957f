#include "nushu/provider.hpp"

#include <cstdio>

#include "nushu/errors.hpp"
#include "nushu/io.hpp"
#include "nushu/random.hpp"

namespace nushu {

const char* const kDefaultInstruction =
    "You are translating Chinese into Nüshu script. The attached examples pair a Chinese "
    "sentence with its Nüshu transcription, one Nüshu character per Chinese character. "
    "Use the examples and the Nüshu-Chinese dictionary to translate the final sentence. "
    "Reply with the Nüshu characters only, exactly one per Chinese character.";

std::string PromptBundle::render_examples() const {
  std::string out;
  for (const auto& [src, tgt] : examples) {
    out += io::escape_field(to_utf8(src));
    out += '\t';
    out += io::escape_field(to_utf8(tgt));
    out += '\n';
  }
  return out;
}

std::string PromptBundle::render() const {
  std::string out = instruction;
  out += "\n\n";
  out += render_examples();
  out += '\n';
  out += io::escape_field(to_utf8(query));
  out += '\n';
  return out;
}

PromptBundle assemble_prompt(const SeedPool& pool, std::u32string_view query, std::string instruction) {
  if (!pool.full()) {
    throw StateError("seed pool holds " + std::to_string(pool.size()) + " of " +
                     std::to_string(pool.capacity()) + " examples");
  }
  PromptBundle bundle;
  bundle.instruction = std::move(instruction);
  bundle.examples.reserve(pool.size());
  for (const auto& m : pool.members()) bundle.examples.emplace_back(m.source, m.target);
  bundle.query = Text(query);
  return bundle;
}

ProviderReply ProviderReply::translation(Text text) {
  if (text.empty()) throw ValidationError("translation reply is empty");
  for (char32_t c : text) {
    if (!is_nushu(c)) {
      throw ValidationError("translation reply contains non-Nüshu " + codepoint_label(c));
    }
  }
  return {Kind::Translation, std::move(text), {}};
}

ProviderReply ProviderReply::refusal(std::string detail) {
  return {Kind::Refusal, {}, std::move(detail)};
}

ProviderReply ProviderReply::transport_error(std::string detail) {
  return {Kind::TransportError, {}, std::move(detail)};
}

const char* reply_kind_name(ProviderReply::Kind k) {
  switch (k) {
    case ProviderReply::Kind::Translation: return "translation";
    case ProviderReply::Kind::Refusal: return "refusal";
    case ProviderReply::Kind::TransportError: return "transport_error";
  }
  return "?";
}

MockOracle::MockOracle(MappingTable table, MockNoise noise, uint64_t seed)
    : table_(std::move(table)), noise_(noise), seed_(seed) {
  for (double p : {noise.length_error_p, noise.substitution_p, noise.refusal_p}) {
    if (!(p >= 0.0 && p <= 1.0)) throw ArgumentError("mock noise probabilities must lie in [0, 1]");
  }
}

ProviderReply MockOracle::translate(const PromptBundle& bundle) {
  const Text& query = bundle.query;
  if (query.empty()) return ProviderReply::refusal("nothing to translate");
  for (char32_t c : query) {
    if (table_.candidates_for_source(c).empty()) {
      return ProviderReply::refusal("untranslatable character " + codepoint_label(c));
    }
  }

  Rng rng(derive_seed({seed_, bundle.request_id}));
  if (rng.bernoulli(noise_.refusal_p)) return ProviderReply::refusal("mock refusal");

  Text out;
  out.reserve(query.size() + 1);
  for (char32_t c : query) out.push_back(table_.candidates_for_source(c).front());

  if (rng.bernoulli(noise_.substitution_p)) {
    std::vector<std::size_t> ambiguous;
    for (std::size_t i = 0; i < query.size(); ++i) {
      if (table_.candidates_for_source(query[i]).size() > 1) ambiguous.push_back(i);
    }
    if (!ambiguous.empty()) {
      const std::size_t pos = ambiguous[rng.below(ambiguous.size())];
      const auto& cands = table_.candidates_for_source(query[pos]);
      // any candidate except the first one, which is what `out` holds
      out[pos] = cands[1 + rng.below(cands.size() - 1)];
    }
  }

  if (rng.bernoulli(noise_.length_error_p)) {
    const std::size_t pos = rng.below(out.size());
    const bool drop = rng.bernoulli(0.5);
    if (drop && out.size() >= 2) {
      out.erase(pos, 1);
    } else {
      out.insert(out.begin() + static_cast<std::ptrdiff_t>(pos), out[pos]);
    }
  }
  return ProviderReply::translation(std::move(out));
}

std::string MockOracle::describe() const {
  char buf[160];
  std::snprintf(buf, sizeof buf, "mock(length_error_p=%g, substitution_p=%g, refusal_p=%g, seed=%llu)",
                noise_.length_error_p, noise_.substitution_p, noise_.refusal_p,
                static_cast<unsigned long long>(seed_));
  return buf;
}

}  // namespace nushu
