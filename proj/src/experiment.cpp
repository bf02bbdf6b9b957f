#include "nushu/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <mutex>
#include <cstdio>
#include <set>
#include <thread>

#include "nushu/errors.hpp"

namespace nushu::mt {

namespace {

std::pair<Text, Text> directed(const SentencePair& p, bool nushu_to_chinese) {
  return nushu_to_chinese ? std::pair{p.target, p.source} : std::pair{p.source, p.target};
}

eval::EvalResult score(const Translator& model, std::span<const std::pair<Text, Text>> test) {
  std::vector<Text> preds, refs;
  for (const auto& [src, ref] : test) {
    preds.push_back(greedy_decode(model, src));
    refs.push_back(ref);
  }
  return eval::evaluate_suite(preds, refs);
}

std::string metric_columns(const eval::EvalResult& r) {
  char buf[160];
  std::snprintf(buf, sizeof buf, "%.4f\t%.4f\t%.4f\t%.4f\t%.4f\t%.4f\t%.4f", r.bleu[0], r.bleu[1], r.bleu[2], r.meteor,
                r.rouge1, r.rouge2, r.rougeL);
  return buf;
}

constexpr const char* kMetricHeader = "BLEU-1\tBLEU-2\tBLEU-3\tMETEOR\tROUGE-1\tROUGE-2\tROUGE-L";

}  // namespace

std::vector<SentencePair> training_order(std::span<const SentencePair> gold,
                                         std::span<const std::vector<SentencePair>> silver_by_round) {
  std::vector<SentencePair> out(gold.begin(), gold.end());
  for (const auto& round : silver_by_round) {
    for (const auto& p : round) {
      if (p.status == Status::Validated) out.push_back(p);
    }
  }
  return out;
}

std::vector<std::size_t> round_sizes(std::size_t gold_size, std::span<const std::vector<SentencePair>> silver_by_round) {
  std::vector<std::size_t> sizes{gold_size};
  for (const auto& round : silver_by_round) {
    sizes.push_back(sizes.back() + static_cast<std::size_t>(std::count_if(
                                       round.begin(), round.end(),
                                       [](const SentencePair& p) { return p.status == Status::Validated; })));
  }
  return sizes;
}

ExperimentResults incremental_experiment(std::span<const SentencePair> gold,
                                         std::span<const std::vector<SentencePair>> silver_by_round,
                                         std::span<const std::size_t> sizes, std::span<const SentencePair> test,
                                         std::span<const uint64_t> seeds, const ExperimentConfig& config) {
  if (sizes.empty() || seeds.empty()) throw ArgumentError("experiment needs at least one size and one seed");
  if (test.empty()) throw ArgumentError("test set is empty");
  const std::vector<SentencePair> order = training_order(gold, silver_by_round);
  for (std::size_t i = 0; i < sizes.size(); ++i) {
    if (sizes[i] == 0 || sizes[i] > order.size()) {
      throw ArgumentError("training size " + std::to_string(sizes[i]) + " outside 1.." + std::to_string(order.size()));
    }
    if (i > 0 && sizes[i] <= sizes[i - 1]) throw ArgumentError("training sizes must be strictly ascending");
  }
  std::set<Text> test_sources;
  for (const auto& p : test) test_sources.insert(p.source);
  for (std::size_t i = 0; i < sizes.back(); ++i) {
    if (test_sources.count(order[i].source)) {
      throw ArgumentError("training pair " + order[i].id + " overlaps the test set");
    }
  }

  std::vector<std::pair<Text, Text>> train_all, test_pairs;
  for (const auto& p : order) train_all.push_back(directed(p, config.nushu_to_chinese));
  for (const auto& p : test) test_pairs.push_back(directed(p, config.nushu_to_chinese));

  ExperimentResults results;
  results.sizes.assign(sizes.begin(), sizes.end());
  results.seeds.assign(seeds.begin(), seeds.end());
  results.cells.resize(sizes.size() * seeds.size());

  auto run_cell = [&](std::size_t c) {
    ExperimentCell& cell = results.cells[c];
    cell.size = sizes[c / seeds.size()];
    cell.seed = seeds[c % seeds.size()];
    Seq2SeqConfig mc = config.model;
    mc.seed = cell.seed;
    TrainRun run = train_mt(std::span(train_all).first(cell.size), mc);
    cell.epoch_loss = std::move(run.epoch_loss);
    cell.result = score(run.model, test_pairs);
    std::size_t lower = 0;
    for (std::size_t bound : config.length_strata) {
      std::vector<std::pair<Text, Text>> stratum;
      for (const auto& tp : test_pairs) {
        if (tp.first.size() > lower && tp.first.size() <= bound) stratum.push_back(tp);
      }
      StratumResult s{bound, stratum.size(), {}};
      if (!stratum.empty()) s.result = score(run.model, stratum);
      cell.strata.push_back(s);
      lower = bound;
    }
  };

  const std::size_t workers = std::max<std::size_t>(1, std::min(config.workers, results.cells.size()));
  if (workers == 1) {
    for (std::size_t c = 0; c < results.cells.size(); ++c) run_cell(c);
  } else {
    std::atomic<std::size_t> next{0};
    std::exception_ptr failure;
    std::mutex failure_mu;
    {
      std::vector<std::jthread> pool;
      for (std::size_t w = 0; w < workers; ++w) {
        pool.emplace_back([&] {
          for (std::size_t c; (c = next.fetch_add(1)) < results.cells.size();) {
            try {
              run_cell(c);
            } catch (...) {
              std::lock_guard lock(failure_mu);
              if (!failure) failure = std::current_exception();
            }
          }
        });
      }
    }
    if (failure) std::rethrow_exception(failure);
  }
  return results;
}

std::string render_results(const ExperimentResults& results) {
  std::string out = std::string("Train Data\tSeed\t") + kMetricHeader + "\n";
  for (std::size_t i = 0; i < results.sizes.size(); ++i) {
    eval::EvalResult mean;
    const double n = static_cast<double>(results.seeds.size());
    for (std::size_t j = 0; j < results.seeds.size(); ++j) {
      const auto& r = results.cell(i, j).result;
      out += std::to_string(results.sizes[i]) + "\t" + std::to_string(results.seeds[j]) + "\t" + metric_columns(r) + "\n";
      for (int k = 0; k < 3; ++k) mean.bleu[k] += r.bleu[k] / n;
      mean.meteor += r.meteor / n;
      mean.rouge1 += r.rouge1 / n;
      mean.rouge2 += r.rouge2 / n;
      mean.rougeL += r.rougeL / n;
    }
    out += std::to_string(results.sizes[i]) + "\tmean\t" + metric_columns(mean) + "\n";
  }
  return out;
}

std::string render_strata(const ExperimentResults& results) {
  std::string out = std::string("Train Data\tSeed\tMaxLength\tCount\t") + kMetricHeader + "\n";
  for (const auto& cell : results.cells) {
    for (const auto& s : cell.strata) {
      out += std::to_string(cell.size) + "\t" + std::to_string(cell.seed) + "\t" + std::to_string(s.max_length) + "\t" +
             std::to_string(s.count) + "\t" + metric_columns(s.result) + "\n";
    }
  }
  return out;
}

}  // namespace nushu::mt
