#include "nushu/report.hpp"

#include <algorithm>
#include <cstdio>

#include "nushu/errors.hpp"

namespace nushu {

namespace {

constexpr std::size_t kBarWidth = 30;

std::string bar(const RoundReport& r) {
  const std::size_t total = r.total();
  std::size_t filled = 0;
  if (total > 0) filled = (r.successes * kBarWidth + total / 2) / total;
  // a round with any success shows at least one mark, any failure leaves a gap
  if (r.successes > 0 && filled == 0) filled = 1;
  if (r.failures > 0 && filled == kBarWidth) filled = kBarWidth - 1;
  return std::string(filled, '#') + std::string(kBarWidth - filled, '.');
}

std::string cell(const RoundReport* r) {
  char buf[96];
  if (r == nullptr) {
    std::snprintf(buf, sizeof buf, "%-*s %9s", static_cast<int>(kBarWidth), "", "");
  } else {
    std::snprintf(buf, sizeof buf, "%s %4zu/%-4zu", bar(*r).c_str(), r->successes, r->failures);
  }
  return buf;
}

struct Totals {
  std::size_t successes = 0, failures = 0, refusals = 0, transport = 0;
};

Totals sum(std::span<const RoundReport> reports) {
  Totals t;
  for (const auto& r : reports) {
    t.successes += r.successes;
    t.failures += r.failures;
    t.refusals += r.refusals;
    t.transport += r.transport_errors;
  }
  return t;
}

void data_rows(std::string& out, const char* campaign, std::span<const RoundReport> reports) {
  char buf[160];
  for (const auto& r : reports) {
    std::snprintf(buf, sizeof buf, "%s\t%d\t%zu\t%zu\t%zu\t%zu\t%zu\n", campaign, r.round, r.successes, r.failures,
                  r.refusals, r.transport_errors, r.total());
    out += buf;
  }
  const Totals t = sum(reports);
  std::snprintf(buf, sizeof buf, "%s\ttotal\t%zu\t%zu\t%zu\t%zu\t%zu\n", campaign, t.successes, t.failures, t.refusals,
                t.transport, t.successes + t.failures);
  out += buf;
}

const RoundReport* find_round(std::span<const RoundReport> reports, int round) {
  for (const auto& r : reports) {
    if (r.round == round) return &r;
  }
  return nullptr;
}

}  // namespace

RenderedReport report_render(std::span<const RoundReport> reports,
                             std::optional<std::span<const RoundReport>> control) {
  if (reports.empty()) throw ArgumentError("no round reports to render");
  RenderedReport out;
  const bool pair = control.has_value();

  std::vector<int> rounds;
  for (const auto& r : reports) rounds.push_back(r.round);
  if (pair) {
    for (const auto& r : *control) rounds.push_back(r.round);
  }
  std::sort(rounds.begin(), rounds.end());
  rounds.erase(std::unique(rounds.begin(), rounds.end()), rounds.end());

  char buf[256];
  if (pair) {
    std::snprintf(buf, sizeof buf, "%-6s %-*s %9s   %-*s %9s\n", "round", static_cast<int>(kBarWidth), "rotating",
                  "ok/fail", static_cast<int>(kBarWidth), "control", "ok/fail");
  } else {
    std::snprintf(buf, sizeof buf, "%-6s %-*s %9s\n", "round", static_cast<int>(kBarWidth), "", "ok/fail");
  }
  out.text += buf;
  for (int round : rounds) {
    std::string line = "R" + std::to_string(round);
    line.resize(6, ' ');
    line += " " + cell(find_round(reports, round));
    if (pair) line += "   " + cell(find_round(*control, round));
    while (!line.empty() && line.back() == ' ') line.pop_back();
    out.text += line + "\n";
  }
  const Totals t = sum(reports);
  std::snprintf(buf, sizeof buf, "total  %zu succeeded, %zu failed", t.successes, t.failures);
  out.text += buf;
  if (pair) {
    const Totals c = sum(*control);
    std::snprintf(buf, sizeof buf, " | control %zu succeeded, %zu failed", c.successes, c.failures);
    out.text += buf;
  }
  out.text += "\n";

  out.data = "campaign\tround\tsuccesses\tfailures\trefusals\ttransport_errors\ttotal\n";
  data_rows(out.data, pair ? "rotating" : "campaign", reports);
  if (pair) data_rows(out.data, "control", *control);
  return out;
}

}  // namespace nushu
