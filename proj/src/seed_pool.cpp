#include "nushu/seed_pool.hpp"

#include "nushu/errors.hpp"

namespace nushu {

SeedPool::SeedPool(std::size_t capacity, std::vector<SentencePair> members)
    : capacity_(capacity), members_(std::move(members)) {
  if (capacity_ == 0) throw ArgumentError("seed pool capacity must be positive");
  if (members_.size() > capacity_) {
    throw ArgumentError("seed pool holds " + std::to_string(members_.size()) +
                        " members but capacity is " + std::to_string(capacity_));
  }
  for (const auto& m : members_) {
    if (m.status != Status::Validated) {
      throw ValidationError("seed pool member " + m.id + " is not validated");
    }
  }
}

std::vector<std::string> SeedPool::member_ids() const {
  std::vector<std::string> ids;
  ids.reserve(members_.size());
  for (const auto& m : members_) ids.push_back(m.id);
  return ids;
}

void SeedPool::promote(int round, std::vector<SentencePair> promoted) {
  if (!full()) throw StateError("cannot rotate an underfull seed pool");
  if (promoted.size() >= capacity_) {
    throw ArgumentError("promotion count must be smaller than the pool");
  }
  RotationEntry entry{round, {}, {}};
  for (const auto& p : promoted) {
    if (p.status != Status::Validated) {
      throw ValidationError("cannot promote unvalidated pair " + p.id);
    }
    entry.inserted.push_back(p.id);
  }
  const std::size_t keep = capacity_ - promoted.size();
  for (std::size_t i = keep; i < members_.size(); ++i) entry.evicted.push_back(members_[i].id);
  members_.resize(keep);
  promoted.insert(promoted.end(), std::make_move_iterator(members_.begin()),
                  std::make_move_iterator(members_.end()));
  members_ = std::move(promoted);
  log_.push_back(std::move(entry));
}

}  // namespace nushu
