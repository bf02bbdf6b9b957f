#include "nushu/pipeline.hpp"

#include <algorithm>
#include <iostream>
#include <thread>
#include <unordered_map>
#include <unordered_set>

#include "nushu/checkpoint.hpp"
#include "nushu/errors.hpp"
#include "nushu/io.hpp"
#include "nushu/random.hpp"

namespace nushu {

namespace {

// Stream tags keep rotation and per-sentence seeds from colliding.
constexpr uint64_t kSentenceStream = 0x53454e54;  // "SENT"
constexpr uint64_t kRotationStream = 0x524f5441;  // "ROTA"

}  // namespace

void PipelineConfig::validate() const {
  if (pool_size == 0 || promote_count == 0 || rounds <= 0 || batch_per_round == 0 || workers == 0) {
    throw ArgumentError("pipeline counts must be positive");
  }
  if (max_retries < 0) throw ArgumentError("max_retries must not be negative");
  if (promote_count >= pool_size) throw ArgumentError("promote_count must be smaller than pool_size");
}

bool validate_length(std::u32string_view source, std::u32string_view candidate) {
  return source.size() == candidate.size();
}

RetryOutcome translate_with_retry(Provider& provider, const SeedPool& pool,
                                  std::u32string_view sentence, const PipelineConfig& config,
                                  uint64_t request_base, int round) {
  PromptBundle bundle = assemble_prompt(pool, sentence, config.instruction);
  RetryOutcome out;
  out.pair.source = Text(sentence);
  out.pair.provenance = Provenance::Silver;
  out.pair.round = round;
  out.pair.status = Status::Failed;
  for (int attempt = 1; attempt <= config.max_attempts(); ++attempt) {
    out.attempts = attempt;
    bundle.request_id = derive_seed({request_base, static_cast<uint64_t>(attempt)});
    ProviderReply reply = [&] {
      try {
        return provider.translate(bundle);
      } catch (const std::exception& e) {
        return ProviderReply::transport_error(e.what());
      }
    }();
    switch (reply.kind()) {
      case ProviderReply::Kind::Refusal: ++out.refusals; continue;
      case ProviderReply::Kind::TransportError: ++out.transport_errors; continue;
      case ProviderReply::Kind::Translation: break;
    }
    if (validate_length(sentence, reply.text())) {
      out.pair.target = reply.text();
      out.pair.status = Status::Validated;
      return out;
    }
  }
  return out;
}

RoundResult run_round(Provider& provider, const SeedPool& pool, std::span<const Text> batch,
                      int round, const PipelineConfig& config, const MappingTable& table) {
  std::vector<RetryOutcome> outcomes(batch.size());
  auto work = [&](std::size_t begin, std::size_t step) {
    for (std::size_t i = begin; i < batch.size(); i += step) {
      const uint64_t base = derive_seed({config.seed, kSentenceStream, static_cast<uint64_t>(round), i});
      outcomes[i] = translate_with_retry(provider, pool, batch[i], config, base, round);
    }
  };
  const std::size_t workers = std::min(config.workers, std::max<std::size_t>(batch.size(), 1));
  if (workers <= 1) {
    work(0, 1);
  } else {
    std::vector<std::jthread> threads;
    for (std::size_t w = 0; w < workers; ++w) threads.emplace_back(work, w, workers);
  }

  RoundResult result;
  result.report.round = round;
  for (std::size_t i = 0; i < outcomes.size(); ++i) {
    auto& o = outcomes[i];
    o.pair.id = "r" + std::to_string(round) + "." + std::to_string(i + 1);
    auto& rep = result.report;
    ++rep.retry_histogram[o.attempts];
    rep.refusals += static_cast<std::size_t>(o.refusals);
    rep.transport_errors += static_cast<std::size_t>(o.transport_errors);
    if (o.pair.status == Status::Validated) {
      ++rep.successes;
      NovelCharFlag flag{o.pair.id, {}};
      for (char32_t c : o.pair.target) {
        if (!table.has_target(c) && flag.characters.find(c) == Text::npos) flag.characters.push_back(c);
      }
      if (!flag.characters.empty()) rep.novel_chars.push_back(std::move(flag));
    } else {
      ++rep.failures;
    }
    result.pairs.push_back(std::move(o.pair));
  }
  return result;
}

Rotation rotate_pool(const SeedPool& pool, std::span<const SentencePair> new_validated, int round,
                     const PipelineConfig& config) {
  Rotation r{pool, false, {}};
  if (config.control_mode) return r;
  std::vector<SentencePair> candidates;
  for (const auto& p : new_validated) {
    if (p.status == Status::Validated) candidates.push_back(p);
  }
  if (candidates.size() < config.promote_count) {
    r.notice = "round " + std::to_string(round) + " produced " + std::to_string(candidates.size()) +
               " validated pairs, fewer than " + std::to_string(config.promote_count) +
               "; seed pool not rotated";
    return r;
  }
  Rng rng(derive_seed({config.seed, kRotationStream, static_cast<uint64_t>(round)}));
  rng.shuffle(std::span(candidates));
  candidates.resize(config.promote_count);
  r.pool.promote(round, std::move(candidates));
  r.rotated = true;
  return r;
}

namespace {

uint64_t campaign_fingerprint(std::span<const SentencePair> gold, std::span<const std::vector<Text>> bins,
                              const PipelineConfig& c, const Provider& provider) {
  std::string key = std::to_string(c.pool_size) + '/' + std::to_string(c.promote_count) + '/' +
                    std::to_string(c.max_retries) + '/' + std::to_string(c.rounds) + '/' +
                    std::to_string(c.batch_per_round) + '/' + (c.control_mode ? "control" : "rotate") +
                    '/' + std::to_string(c.seed) + '/' + c.instruction + '/' + provider.describe() + '\n';
  uint64_t h = fnv1a(key);
  h = fnv1a(render_corpus(gold.first(std::min(gold.size(), c.pool_size))), h);
  for (const auto& bin : bins) {
    for (const auto& s : bin) h = fnv1a(to_utf8(s) + '\n', h);
    h = fnv1a("|", h);
  }
  return h;
}

SeedPool rebuild_pool(const CampaignState& state, std::span<const SentencePair> gold, std::size_t capacity) {
  std::unordered_map<std::string, const SentencePair*> by_id;
  for (const auto& g : gold) by_id.emplace(g.id, &g);
  for (const auto& s : state.silver) by_id.emplace(s.id, &s);
  std::vector<SentencePair> members;
  for (const auto& id : state.pool_ids) {
    auto it = by_id.find(id);
    if (it == by_id.end()) throw ValidationError("checkpoint pool references unknown pair " + id);
    members.push_back(*it->second);
  }
  SeedPool pool(capacity, std::move(members));
  pool.restore_log(state.rotation_log);
  return pool;
}

}  // namespace

CampaignResult run_campaign(Provider& provider, std::span<const SentencePair> gold,
                            std::span<const std::vector<Text>> bins, const PipelineConfig& config,
                            const MappingTable& table, const CampaignOptions& options) {
  config.validate();
  if (bins.size() != static_cast<std::size_t>(config.rounds)) {
    throw ArgumentError("campaign configured for " + std::to_string(config.rounds) + " rounds but " +
                        std::to_string(bins.size()) + " batches were given");
  }
  if (gold.size() < config.pool_size) {
    throw StateError("need " + std::to_string(config.pool_size) + " gold pairs for the seed pool, have " +
                     std::to_string(gold.size()));
  }

  std::vector<SentencePair> gold_ids(gold.begin(), gold.end());
  if (std::any_of(gold_ids.begin(), gold_ids.end(), [](const auto& p) { return p.id.empty(); })) {
    assign_ids(gold_ids);
  }

  const uint64_t fingerprint = campaign_fingerprint(gold_ids, bins, config, provider);
  CampaignState state;
  state.fingerprint = fingerprint;
  SeedPool pool(config.pool_size,
                std::vector<SentencePair>(gold_ids.begin(), gold_ids.begin() + static_cast<std::ptrdiff_t>(config.pool_size)));

  CampaignResult result{{}, {}, pool, false, 1};
  if (options.checkpoint) {
    if (auto saved = load_checkpoint(*options.checkpoint)) {
      if (saved->fingerprint != fingerprint) {
        throw StateError("checkpoint " + options.checkpoint->string() +
                         " was written for a different campaign configuration");
      }
      state = std::move(*saved);
      pool = rebuild_pool(state, gold_ids, config.pool_size);
      result.resumed_from_round = state.next_round;
    }
  }

  for (int round = state.next_round; round <= config.rounds; ++round) {
    const auto& batch = bins[static_cast<std::size_t>(round - 1)];
    RoundResult rr = run_round(provider, pool, batch, round, config, table);
    if (round < config.rounds) {
      Rotation rot = rotate_pool(pool, rr.pairs, round, config);
      if (!rot.notice.empty()) std::cerr << "notice: " << rot.notice << '\n';
      pool = std::move(rot.pool);
    }
    state.silver.insert(state.silver.end(), rr.pairs.begin(), rr.pairs.end());
    state.reports.push_back(std::move(rr.report));
    state.next_round = round + 1;
    state.pool_ids = pool.member_ids();
    state.rotation_log = pool.rotation_log();
    if (options.checkpoint) save_checkpoint(state, *options.checkpoint);
    if (options.stop_after_round && round == *options.stop_after_round && round < config.rounds) {
      result.silver = state.silver;
      result.reports = state.reports;
      result.final_pool = pool;
      return result;
    }
  }

  result.silver = std::move(state.silver);
  result.reports = std::move(state.reports);
  result.final_pool = std::move(pool);
  result.completed = true;
  return result;
}

std::vector<SentencePair> apply_corrections(std::vector<SentencePair> pairs, std::string_view corrections,
                                            const std::string& name) {
  std::unordered_map<std::string, std::size_t> index;
  for (std::size_t i = 0; i < pairs.size(); ++i) index.emplace(pairs[i].id, i);
  const auto lines = io::split_lines(corrections);
  for (std::size_t i = 0; i < lines.size(); ++i) {
    const std::size_t lineno = i + 1;
    if (lines[i].empty()) continue;
    const auto f = io::split(lines[i], '\t');
    if (f.size() != 2) throw ParseError(name, lineno, "expected `pair id<TAB>corrected target`");
    auto it = index.find(std::string(f[0]));
    if (it == index.end()) throw ParseError(name, lineno, "unknown pair id '" + std::string(f[0]) + "'");
    SentencePair& p = pairs[it->second];
    if (!p.round) throw ParseError(name, lineno, "gold pair " + p.id + " cannot be corrected");
    Text target;
    try {
      target = from_utf8(io::unescape_field(f[1]));
    } catch (const EncodingError& e) {
      throw ParseError(name, lineno, e.what());
    }
    if (!validate_length(p.source, target)) {
      throw ParseError(name, lineno, "correction has " + std::to_string(target.size()) +
                                         " characters, source has " + std::to_string(p.source.size()));
    }
    for (char32_t c : target) {
      if (!is_nushu(c)) throw ParseError(name, lineno, "correction contains non-Nüshu " + codepoint_label(c));
    }
    p.target = std::move(target);
    p.provenance = Provenance::Corrected;
    p.status = Status::Validated;
  }
  return pairs;
}

}  // namespace nushu
