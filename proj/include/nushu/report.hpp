#pragma once

#include <optional>
#include <span>
#include <string>

#include "nushu/pipeline.hpp"

namespace nushu {

struct RenderedReport {
  std::string text;  // per-round bars for the terminal
  std::string data;  // TSV, one row per (campaign, round) plus totals
};

/// Success/failure per round as text bars ('#' success, '.' failure, scaled
/// to a fixed width per round) and a TSV. With `control`, the two campaigns
/// are shown side by side. Throws ArgumentError when `reports` is empty.
RenderedReport report_render(std::span<const RoundReport> reports,
                             std::optional<std::span<const RoundReport>> control = std::nullopt);

}  // namespace nushu
