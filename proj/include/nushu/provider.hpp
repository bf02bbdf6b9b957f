#pragma once

#include <cstdint>
#include <memory>
#include <string>
#include <utility>
#include <vector>

#include "nushu/dictionary.hpp"
#include "nushu/seed_pool.hpp"
#include "nushu/unicode.hpp"

namespace nushu {

// Everything a provider sees for one request.
struct PromptBundle {
  std::string instruction;
  std::vector<std::pair<Text, Text>> examples;  // source, target
  Text query;
  // Request number assigned by the caller. Providers that draw random numbers
  // derive them from this so replies do not depend on call order.
  uint64_t request_id = 0;

  /// Instruction, blank line, one `source<TAB>target` line per example, blank
  /// line, query. TAB/LF/CR/backslash inside fields are escaped.
  std::string render() const;
  /// Just the example lines of render().
  std::string render_examples() const;

  friend bool operator==(const PromptBundle&, const PromptBundle&) = default;
};

/// Default instruction text; deployments override it through configuration.
extern const char* const kDefaultInstruction;

/// Throws StateError when the pool is not full.
PromptBundle assemble_prompt(const SeedPool& pool, std::u32string_view query, std::string instruction);

class ProviderReply {
 public:
  enum class Kind { Translation, Refusal, TransportError };

  /// Throws ValidationError unless `text` is non-empty and all Nüshu.
  static ProviderReply translation(Text text);
  static ProviderReply refusal(std::string detail = {});
  static ProviderReply transport_error(std::string detail);

  Kind kind() const { return kind_; }
  bool is_translation() const { return kind_ == Kind::Translation; }
  const Text& text() const { return text_; }
  const std::string& detail() const { return detail_; }

 private:
  ProviderReply(Kind k, Text t, std::string d) : kind_(k), text_(std::move(t)), detail_(std::move(d)) {}
  Kind kind_;
  Text text_;
  std::string detail_;
};

const char* reply_kind_name(ProviderReply::Kind k);

// Synchronous translation backend. Implementations must tolerate concurrent
// translate() calls and must report failures as replies, never by throwing.
class Provider {
 public:
  virtual ~Provider() = default;
  virtual ProviderReply translate(const PromptBundle& bundle) = 0;
  virtual std::string describe() const = 0;
};

struct MockNoise {
  double length_error_p = 0.0;
  double substitution_p = 0.0;
  double refusal_p = 0.0;
};

// Deterministic stand-in for an LLM. Without noise every character maps to
// its first dictionary candidate. Each reply draws from a stream seeded by
// (seed, request_id), so replies are reproducible and order-independent.
class MockOracle final : public Provider {
 public:
  MockOracle(MappingTable table, MockNoise noise, uint64_t seed);

  ProviderReply translate(const PromptBundle& bundle) override;
  std::string describe() const override;

  const MockNoise& noise() const { return noise_; }

 private:
  MappingTable table_;
  MockNoise noise_;
  uint64_t seed_;
};

}  // namespace nushu
