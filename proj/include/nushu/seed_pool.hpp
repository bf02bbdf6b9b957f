#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "nushu/corpus.hpp"

namespace nushu {

struct RotationEntry {
  int round = 0;
  std::vector<std::string> inserted;
  std::vector<std::string> evicted;

  friend bool operator==(const RotationEntry&, const RotationEntry&) = default;
};

// Ordered few-shot example list handed to the provider. Every member is a
// validated pair; once full the pool stays at exactly `capacity` members.
class SeedPool {
 public:
  SeedPool(std::size_t capacity, std::vector<SentencePair> members);

  std::size_t capacity() const { return capacity_; }
  std::size_t size() const { return members_.size(); }
  bool full() const { return members_.size() == capacity_; }

  const std::vector<SentencePair>& members() const { return members_; }
  const std::vector<RotationEntry>& rotation_log() const { return log_; }
  std::vector<std::string> member_ids() const;

  /// Puts `promoted` at the front, drops the same number from the back and
  /// records the exchange. Requires a full pool and promoted.size() < capacity.
  void promote(int round, std::vector<SentencePair> promoted);

  void restore_log(std::vector<RotationEntry> log) { log_ = std::move(log); }

  friend bool operator==(const SeedPool&, const SeedPool&) = default;

 private:
  std::size_t capacity_;
  std::vector<SentencePair> members_;
  std::vector<RotationEntry> log_;
};

}  // namespace nushu
