#include <doctest.h>

#include <algorithm>
#include <atomic>
#include <mutex>

#include "nushu/checkpoint.hpp"
#include "nushu/errors.hpp"
#include "nushu/io.hpp"
#include "nushu/pipeline.hpp"
#include "support.hpp"

using namespace nushu;

namespace {

struct Fixture {
  MappingTable table = testing::fixture_table();
  std::vector<SentencePair> gold = testing::gold_pairs(table, 40, 11);
  SeedPool pool{35, std::vector<SentencePair>(gold.begin(), gold.begin() + 35)};
};

std::vector<std::vector<Text>> uniform_bins(const MappingTable& table, int rounds, std::size_t per_round,
                                            uint64_t seed) {
  const auto sents = testing::covered_sentences(table, static_cast<std::size_t>(rounds) * per_round, seed, 2, 12);
  return bin_by_length(sents, RoundSchedule::uniform(rounds, per_round));
}

// Replies with a fixed script, one entry per call, to drive retry paths.
class ScriptedProvider final : public Provider {
 public:
  explicit ScriptedProvider(std::vector<ProviderReply> replies) : replies_(std::move(replies)) {}
  ProviderReply translate(const PromptBundle&) override {
    std::lock_guard lock(mu_);
    if (next_ >= replies_.size()) return ProviderReply::refusal();
    return replies_[next_++];
  }
  std::string describe() const override { return "scripted"; }
  std::size_t calls() const { return next_; }

 private:
  std::mutex mu_;
  std::vector<ProviderReply> replies_;
  std::size_t next_ = 0;
};

class ThrowingProvider final : public Provider {
 public:
  ProviderReply translate(const PromptBundle&) override { throw std::runtime_error("socket closed"); }
  std::string describe() const override { return "throwing"; }
};

}  // namespace

TEST_CASE("validate_length") {
  CHECK(validate_length(U"", U""));
  CHECK(validate_length(U"春眠不觉晓", U"𛅰𛅱𛅲𛅳𛅴"));
  CHECK_FALSE(validate_length(U"春眠不觉晓", U"𛅰𛅱𛅲𛅳"));
}

TEST_CASE("pipeline config validation") {
  PipelineConfig c;
  CHECK_NOTHROW(c.validate());
  CHECK(c.max_attempts() == 8);
  c.promote_count = 35;
  CHECK_THROWS_AS(c.validate(), ArgumentError);
  c = {};
  c.rounds = 0;
  CHECK_THROWS_AS(c.validate(), ArgumentError);
}

TEST_CASE("translate_with_retry") {
  Fixture f;
  PipelineConfig cfg;
  const Text s = {testing::kHanBase + 1, testing::kHanBase + 2};

  MockOracle perfect(f.table, {}, 1);
  auto ok = translate_with_retry(perfect, f.pool, s, cfg, 5, 1);
  CHECK(ok.pair.status == Status::Validated);
  CHECK(ok.attempts == 1);
  CHECK(ok.pair.target == first_candidate_translation(f.table, s));
  CHECK(ok.pair.round == 1);
  CHECK(ok.pair.provenance == Provenance::Silver);

  MockOracle broken(f.table, {1.0, 0, 0}, 1);
  auto bad = translate_with_retry(broken, f.pool, s, cfg, 5, 1);
  CHECK(bad.pair.status == Status::Failed);
  CHECK(bad.attempts == 8);
  CHECK(bad.pair.target.empty());

  ScriptedProvider scripted({ProviderReply::refusal(), ProviderReply::transport_error("t"),
                             ProviderReply::translation(U"𛅰"), ProviderReply::translation(U"𛅰𛅱")});
  auto mixed = translate_with_retry(scripted, f.pool, s, cfg, 5, 2);
  CHECK(mixed.pair.status == Status::Validated);
  CHECK(mixed.attempts == 4);
  CHECK(mixed.refusals == 1);
  CHECK(mixed.transport_errors == 1);

  ThrowingProvider thrower;
  auto thrown = translate_with_retry(thrower, f.pool, s, cfg, 5, 1);
  CHECK(thrown.pair.status == Status::Failed);
  CHECK(thrown.transport_errors == 8);

  cfg.max_retries = 0;
  ScriptedProvider once({ProviderReply::refusal(), ProviderReply::translation(U"𛅰𛅱")});
  CHECK(translate_with_retry(once, f.pool, s, cfg, 5, 1).attempts == 1);
}

TEST_CASE("property: attempts within budget and validated implies equal length") {
  Fixture f;
  Rng rng(3);
  for (int trial = 0; trial < 50; ++trial) {
    PipelineConfig cfg;
    cfg.max_retries = static_cast<int>(rng.below(8));
    const MockNoise noise{rng.uniform(), rng.uniform(), rng.uniform() * 0.5};
    MockOracle mock(f.table, noise, rng.next());
    for (const auto& s : testing::covered_sentences(f.table, 10, rng.next(), 1, 10)) {
      const auto out = translate_with_retry(mock, f.pool, s, cfg, rng.next(), 1);
      CHECK(out.attempts >= 1);
      CHECK(out.attempts <= cfg.max_retries + 1);
      if (out.pair.status == Status::Validated) CHECK(validate_length(s, out.pair.target));
    }
  }
}

TEST_CASE("run_round reports") {
  Fixture f;
  PipelineConfig cfg;
  const auto batch = testing::covered_sentences(f.table, 30, 4, 2, 10);

  MockOracle perfect(f.table, {}, 1);
  const auto good = run_round(perfect, f.pool, batch, 1, cfg, f.table);
  CHECK(good.report.successes == 30);
  CHECK(good.report.failures == 0);
  CHECK(good.report.retry_histogram == std::map<int, std::size_t>{{1, 30}});
  CHECK(good.pairs[0].id == "r1.1");
  CHECK(good.pairs[29].id == "r1.30");

  MockOracle refuse(f.table, {0, 0, 1.0}, 1);
  const auto bad = run_round(refuse, f.pool, batch, 2, cfg, f.table);
  CHECK(bad.report.successes == 0);
  CHECK(bad.report.failures == 30);
  CHECK(bad.report.refusals == 240);
  CHECK(bad.report.retry_histogram == std::map<int, std::size_t>{{8, 30}});

  MockOracle noisy(f.table, {0.6, 0.3, 0.2}, 8);
  const auto a = run_round(noisy, f.pool, batch, 3, cfg, f.table);
  const auto b = run_round(noisy, f.pool, batch, 3, cfg, f.table);
  CHECK(a.report == b.report);
  CHECK(a.pairs == b.pairs);
  std::size_t hist = 0;
  for (const auto& [k, v] : a.report.retry_histogram) hist += v;
  CHECK(hist == a.report.total());
  CHECK(a.report.total() == 30);

  cfg.workers = 4;
  const auto threaded = run_round(noisy, f.pool, batch, 3, cfg, f.table);
  CHECK(threaded.pairs == a.pairs);
  CHECK(threaded.report == a.report);
}

TEST_CASE("novel characters are flagged") {
  Fixture f;
  PipelineConfig cfg;
  const char32_t unknown = 0x1B2F0;  // not in the fixture dictionary
  ScriptedProvider p({ProviderReply::translation(Text{unknown, 0x1B170})});
  const std::vector<Text> batch = {Text{testing::kHanBase, testing::kHanBase + 1}};
  const auto r = run_round(p, f.pool, batch, 1, cfg, f.table);
  REQUIRE(r.report.novel_chars.size() == 1);
  CHECK(r.report.novel_chars[0].pair_id == "r1.1");
  CHECK(r.report.novel_chars[0].characters == Text{unknown});
}

TEST_CASE("rotate_pool") {
  Fixture f;
  PipelineConfig cfg;
  MockOracle perfect(f.table, {}, 1);
  const auto batch = testing::covered_sentences(f.table, 30, 4, 2, 10);
  const auto r1 = run_round(perfect, f.pool, batch, 1, cfg, f.table);
  const Rotation rot = rotate_pool(f.pool, r1.pairs, 1, cfg);
  CHECK(rot.rotated);
  const auto ids = rot.pool.member_ids();
  REQUIRE(ids.size() == 35);
  for (int i = 0; i < 5; ++i) CHECK(ids[static_cast<std::size_t>(i)].rfind("r1.", 0) == 0);
  for (int i = 0; i < 30; ++i) CHECK(ids[5 + static_cast<std::size_t>(i)] == "g" + std::to_string(i + 1));
  REQUIRE(rot.pool.rotation_log().size() == 1);
  CHECK(rot.pool.rotation_log()[0].evicted == std::vector<std::string>{"g31", "g32", "g33", "g34", "g35"});
  CHECK(rotate_pool(f.pool, r1.pairs, 1, cfg).pool == rot.pool);

  cfg.control_mode = true;
  CHECK(rotate_pool(f.pool, r1.pairs, 1, cfg).pool == f.pool);
  cfg.control_mode = false;
  const auto few = rotate_pool(f.pool, std::span(r1.pairs).first(4), 1, cfg);
  CHECK_FALSE(few.rotated);
  CHECK(few.pool == f.pool);
  CHECK_FALSE(few.notice.empty());
}

TEST_CASE("property: pool keeps its size and promoted members are newest first") {
  Fixture f;
  MockOracle perfect(f.table, {}, 1);
  for (int rounds = 1; rounds <= 9; ++rounds) {
    PipelineConfig cfg;
    cfg.rounds = rounds + 1;
    cfg.batch_per_round = 6;
    cfg.seed = static_cast<uint64_t>(rounds);
    SeedPool pool = f.pool;
    for (int r = 1; r <= rounds; ++r) {
      const auto batch = testing::covered_sentences(f.table, 6, static_cast<uint64_t>(r), 1, 5);
      const auto rr = run_round(perfect, pool, batch, r, cfg, f.table);
      pool = rotate_pool(pool, rr.pairs, r, cfg).pool;
      REQUIRE(pool.size() == 35);
    }
    const auto ids = pool.member_ids();
    const std::size_t promoted = std::min<std::size_t>(5 * static_cast<std::size_t>(rounds), 35);
    for (std::size_t i = 0; i < 35; ++i) {
      if (i < promoted) {
        const int expect_round = rounds - static_cast<int>(i / 5);
        CHECK(ids[i].rfind("r" + std::to_string(expect_round) + ".", 0) == 0);
      } else {
        CHECK(ids[i] == "g" + std::to_string(i - promoted + 1));
      }
    }
    for (const auto& m : pool.members()) CHECK(m.status == Status::Validated);
  }
}

TEST_CASE("campaign over the full schedule with a perfect oracle") {
  Fixture f;
  PipelineConfig cfg;
  const auto sents = testing::covered_sentences(f.table, 180, 2, 2, 20);
  const auto bins = bin_by_length(sents, RoundSchedule::canonical());
  MockOracle perfect(f.table, {}, 1);
  const auto result = run_campaign(perfect, f.gold, bins, cfg, f.table);
  CHECK(result.completed);
  CHECK(result.silver.size() == 180);
  CHECK(result.reports.size() == 6);
  for (const auto& p : result.silver) CHECK(p.status == Status::Validated);

  cfg.control_mode = true;
  const auto control = run_campaign(perfect, f.gold, bins, cfg, f.table);
  CHECK(control.final_pool.member_ids() == f.pool.member_ids());
  // a perfect oracle ignores its examples, so only the pool differs
  CHECK(control.silver == result.silver);
  CHECK(control.final_pool != result.final_pool);
}

TEST_CASE("campaign preconditions") {
  Fixture f;
  PipelineConfig cfg;
  MockOracle perfect(f.table, {}, 1);
  const auto bins = uniform_bins(f.table, 5, 30, 1);
  CHECK_THROWS_AS(run_campaign(perfect, f.gold, bins, cfg, f.table), ArgumentError);
  const auto six = uniform_bins(f.table, 6, 30, 1);
  CHECK_THROWS_AS(run_campaign(perfect, std::span(f.gold).first(20), six, cfg, f.table), StateError);
}

TEST_CASE("resume after interruption matches an uninterrupted run") {
  Fixture f;
  PipelineConfig cfg;
  cfg.seed = 99;
  cfg.workers = 3;
  const auto bins = uniform_bins(f.table, 6, 30, 5);
  const MockNoise noise{0.5, 0.3, 0.1};
  const auto dir = testing::temp_dir("resume");

  MockOracle a(f.table, noise, 3);
  const auto full = run_campaign(a, f.gold, bins, cfg, f.table);

  MockOracle b(f.table, noise, 3);
  CampaignOptions opts;
  opts.checkpoint = dir / "ck.txt";
  opts.stop_after_round = 3;
  const auto partial = run_campaign(b, f.gold, bins, cfg, f.table, opts);
  CHECK_FALSE(partial.completed);
  CHECK(partial.reports.size() == 3);
  opts.stop_after_round.reset();
  const auto resumed = run_campaign(b, f.gold, bins, cfg, f.table, opts);
  CHECK(resumed.completed);
  CHECK(resumed.resumed_from_round == 4);
  CHECK(resumed.silver == full.silver);
  CHECK(resumed.reports == full.reports);
  CHECK(resumed.final_pool == full.final_pool);

  // a finished checkpoint replays to the same result without new requests
  const auto again = run_campaign(b, f.gold, bins, cfg, f.table, opts);
  CHECK(again.silver == full.silver);

  PipelineConfig other = cfg;
  other.seed = 100;
  CHECK_THROWS_AS(run_campaign(b, f.gold, bins, other, f.table, opts), StateError);
}

TEST_CASE("apply_corrections") {
  Fixture f;
  std::vector<SentencePair> pairs = f.gold;
  pairs.resize(2);
  const Text src = {testing::kHanBase, testing::kHanBase + 1, testing::kHanBase + 2};
  pairs.push_back({src, first_candidate_translation(f.table, src), Provenance::Silver, 1, Status::Validated, ""});
  pairs.push_back({src, U"", Provenance::Silver, 1, Status::Failed, ""});
  assign_ids(pairs);

  CHECK(apply_corrections(pairs, "") == pairs);

  // Han 0 has an alternative reading
  const char32_t alt = f.table.candidates_for_source(testing::kHanBase)[1];
  Text fixed = pairs[2].target;
  fixed[0] = alt;
  const auto out = apply_corrections(pairs, "r1.1\t" + to_utf8(fixed) + "\nr1.2\t" + to_utf8(fixed) + "\n");
  CHECK(out[2].provenance == Provenance::Corrected);
  CHECK(out[2].target == fixed);
  CHECK(out[3].status == Status::Validated);
  CHECK(out[0] == pairs[0]);

  auto row_of = [&](const std::string& text) -> std::size_t {
    try {
      apply_corrections(pairs, text);
    } catch (const ParseError& e) {
      return e.line();
    }
    return 0;
  };
  CHECK(row_of("r1.1\t" + to_utf8(fixed) + "\nr1.1\t𛅰𛅰\n") == 2);
  CHECK(row_of("r9.9\t𛅰𛅰𛅰\n") == 1);
  CHECK(row_of("g1\t𛅰\n") == 1);
  CHECK(row_of("r1.1\t阳阳阳\n") == 1);
  CHECK(row_of("r1.1\n") == 1);
}
