#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "nushu/corpus.hpp"
#include "nushu/pipeline.hpp"
#include "nushu/seed_pool.hpp"

namespace nushu {

// Campaign state persisted between rounds. The file is a header of `#key`
// lines closed by `#end`, followed by the silver rows as corpus TSV.
struct CampaignState {
  uint64_t fingerprint = 0;
  int next_round = 1;
  std::vector<std::string> pool_ids;
  std::vector<RotationEntry> rotation_log;
  std::vector<RoundReport> reports;
  std::vector<SentencePair> silver;
};

std::string render_checkpoint(const CampaignState& state);
CampaignState parse_checkpoint(std::string_view content, const std::string& name = "<checkpoint>");

void save_checkpoint(const CampaignState& state, const std::filesystem::path& path);
std::optional<CampaignState> load_checkpoint(const std::filesystem::path& path);

/// Stable FNV-1a hash used to tie a checkpoint to its inputs.
uint64_t fnv1a(std::string_view bytes, uint64_t h = 0xcbf29ce484222325ull);

}  // namespace nushu
