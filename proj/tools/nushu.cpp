// Command-line entry point. Exit codes: 0 success, 1 invalid input or failed
// run, 2 usage error.

#include <CLI11.hpp>

#include <cstdio>
#include <filesystem>
#include <functional>
#include <iostream>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "nushu/config.hpp"
#include "nushu/corpus.hpp"
#include "nushu/dictionary.hpp"
#include "nushu/embeddings.hpp"
#include "nushu/errors.hpp"
#include "nushu/eval.hpp"
#include "nushu/experiment.hpp"
#include "nushu/http_provider.hpp"
#include "nushu/io.hpp"
#include "nushu/kernels.hpp"
#include "nushu/pipeline.hpp"
#include "nushu/report.hpp"
#include "nushu/seq2seq.hpp"

namespace fs = std::filesystem;
using namespace nushu;

namespace {

// Prints the settings a run actually used, and keeps a copy next to its
// outputs when there is an output directory. The copy leaves out the
// directory itself so equal runs give equal trees wherever they land.
void log_resolved(const std::string& command, const ConfigFile& cfg, const std::optional<fs::path>& dir = {}) {
  std::cerr << "# nushu " << command << "\n" << cfg.render();
  if (!dir) return;
  ConfigFile copy = cfg;
  copy.erase("out_dir");
  io::write_file_atomic(*dir / "resolved_config.toml", "# nushu " + command + "\n" + copy.render());
}

MappingTable load_table(const std::string& dict, const std::string& overlay) {
  DictionaryLoad d = load_dictionary(dict);
  if (d.duplicate_pairs) std::cerr << "note: " << d.duplicate_pairs << " duplicate dictionary pairs ignored\n";
  if (!overlay.empty() && fs::exists(overlay)) d = load_overlay(std::move(d.table), overlay);
  return std::move(d.table);
}

char32_t single_char(const std::string& s, const char* what) {
  const Text t = from_utf8(s);
  if (t.size() != 1) throw ArgumentError(std::string(what) + " must be exactly one character");
  return t[0];
}

std::vector<Text> read_text_lines(const std::string& path) {
  std::vector<Text> out;
  for (const auto& line : io::read_lines(path)) out.push_back(from_utf8(io::unescape_field(line)));
  return out;
}

std::string join_lines(const std::vector<Text>& lines) {
  std::string out;
  for (const auto& l : lines) out += io::escape_field(to_utf8(l)) + "\n";
  return out;
}

void emit(const std::string& out_path, const std::string& content) {
  if (out_path.empty() || out_path == "-") {
    std::cout << content;
  } else {
    io::write_file_atomic(out_path, content);
  }
}

std::vector<std::pair<Text, Text>> directed(std::span<const SentencePair> pairs, bool nushu_to_chinese) {
  std::vector<std::pair<Text, Text>> out;
  for (const auto& p : pairs) {
    if (p.status != Status::Validated) continue;
    out.emplace_back(nushu_to_chinese ? p.target : p.source, nushu_to_chinese ? p.source : p.target);
  }
  return out;
}

RoundSchedule make_schedule(const std::string& name, int rounds, std::size_t per_round) {
  if (name == "canonical") return RoundSchedule::canonical();
  if (name == "uniform") return RoundSchedule::uniform(rounds, per_round);
  throw ArgumentError("unknown schedule " + name);
}

// ---------------------------------------------------------------------------
// dict

struct DictOptions {
  std::string dict, overlay, in, out, rejected, ch, source, target;
};

void add_dict(CLI::App& app, std::function<int()>& action) {
  auto* dict = app.add_subcommand("dict", "Dictionary coverage, lookup and registration");
  dict->require_subcommand(1);
  auto o = std::make_shared<DictOptions>();
  auto common = [&](CLI::App* sub) {
    sub->add_option("--dict", o->dict, "Dictionary TSV (target<TAB>sources)")->required();
    sub->add_option("--overlay", o->overlay, "Overlay TSV with registered mappings");
  };

  auto* coverage = dict->add_subcommand("coverage", "Per-line coverage of a sentence file");
  common(coverage);
  coverage->add_option("--in", o->in, "Sentences, one per line")->required();
  coverage->add_option("--out", o->out, "Output file (default stdout)");
  coverage->callback([&action, o] {
    action = [o] {
      ConfigFile cfg;
      cfg.set("dict", o->dict);
      cfg.set("overlay", o->overlay);
      cfg.set("in", o->in);
      log_resolved("dict coverage", cfg);
      const MappingTable table = load_table(o->dict, o->overlay);
      std::string out = "line\tstatus\tcovered\tmissing\n";
      std::size_t full = 0, total = 0;
      const auto lines = io::read_lines(o->in);
      for (std::size_t i = 0; i < lines.size(); ++i) {
        const Text s = normalize_sentence(from_utf8(lines[i]));
        if (s.empty()) continue;
        const CoverageReport r = sentence_coverage(table, s);
        ++total;
        full += r.fully_covered;
        out += std::to_string(i + 1) + "\t" + (r.fully_covered ? "covered" : "missing") + "\t" + to_utf8(r.covered) +
               "\t" + to_utf8(r.missing) + "\n";
      }
      emit(o->out, out);
      std::cerr << full << " of " << total << " sentences fully covered\n";
      return 0;
    };
  });

  auto* lookup = dict->add_subcommand("lookup", "Candidates for one character, either direction");
  common(lookup);
  lookup->add_option("--char", o->ch, "Chinese or Nüshu character")->required();
  lookup->callback([&action, o] {
    action = [o] {
      const MappingTable table = load_table(o->dict, o->overlay);
      const char32_t c = single_char(o->ch, "--char");
      const auto& cands = is_nushu(c) ? table.candidates_for_target(c) : table.candidates_for_source(c);
      for (char32_t k : cands) {
        const char32_t s = is_nushu(c) ? k : c, t = is_nushu(c) ? c : k;
        std::cout << to_utf8(k) << "\t" << codepoint_label(k) << "\t" << origin_name(table.origin(s, t)) << "\n";
      }
      if (cands.empty()) std::cerr << "no candidates for " << codepoint_label(c) << "\n";
      return 0;
    };
  });

  auto* reg = dict->add_subcommand("register", "Add a mapping to the overlay file");
  common(reg);
  reg->get_option("--overlay")->required();
  reg->add_option("--source", o->source, "Chinese character")->required();
  reg->add_option("--target", o->target, "Nüshu character")->required();
  reg->callback([&action, o] {
    action = [o] {
      const MappingTable table = load_table(o->dict, o->overlay);
      const Registration r =
          register_mapping(table, single_char(o->source, "--source"), single_char(o->target, "--target"));
      if (!r.added) {
        std::cerr << "mapping already present\n";
        return 0;
      }
      save_overlay(r.table, o->overlay);
      std::cerr << "registered " << o->source << " -> " << o->target << " in " << o->overlay << "\n";
      return 0;
    };
  });

  auto* filter = dict->add_subcommand("filter", "Keep sentences whose characters are all covered");
  common(filter);
  filter->add_option("--in", o->in, "Sentences, one per line")->required();
  filter->add_option("--out", o->out, "Kept sentences")->required();
  filter->add_option("--rejected", o->rejected, "Where to write rejected sentences");
  filter->callback([&action, o] {
    action = [o] {
      ConfigFile cfg;
      cfg.set("dict", o->dict);
      cfg.set("overlay", o->overlay);
      cfg.set("in", o->in);
      log_resolved("dict filter", cfg);
      const MappingTable table = load_table(o->dict, o->overlay);
      const FilterResult r = filter_corpus(table, load_sentences(o->in));
      emit(o->out, join_lines(r.kept));
      if (!o->rejected.empty()) emit(o->rejected, join_lines(r.rejected));
      std::cerr << "kept " << r.kept.size() << ", rejected " << r.rejected.size() << "\n";
      return 0;
    };
  });
}

// ---------------------------------------------------------------------------
// corpus

struct CorpusOptions {
  std::string in, out, corpus, train_out, test_out, dict, overlay, out_dir, schedule = "canonical";
  std::size_t test_size = 100, n = 0, min_len = 5, max_len = 18, per_round = 30;
  int rounds = 6;
  uint64_t seed = 0;
};

void add_corpus(CLI::App& app, std::function<int()>& action) {
  auto* corpus = app.add_subcommand("corpus", "Sentence normalization, splitting and binning");
  corpus->require_subcommand(1);
  auto o = std::make_shared<CorpusOptions>();

  auto* norm = corpus->add_subcommand("normalize", "Strip punctuation and digits from each line");
  norm->add_option("--in", o->in)->required();
  norm->add_option("--out", o->out)->required();
  norm->callback([&action, o] {
    action = [o] {
      const auto s = load_sentences(o->in);
      emit(o->out, join_lines(s));
      std::cerr << s.size() << " sentences\n";
      return 0;
    };
  });

  auto* split = corpus->add_subcommand("split", "Seeded train/test split of a corpus TSV");
  split->add_option("--corpus", o->corpus)->required();
  split->add_option("--test-size", o->test_size)->capture_default_str();
  split->add_option("--seed", o->seed)->capture_default_str();
  split->add_option("--train-out", o->train_out)->required();
  split->add_option("--test-out", o->test_out)->required();
  split->callback([&action, o] {
    action = [o] {
      ConfigFile cfg;
      cfg.set("corpus", o->corpus);
      cfg.set("test_size", static_cast<int64_t>(o->test_size));
      cfg.set("seed", static_cast<int64_t>(o->seed));
      log_resolved("corpus split", cfg);
      const Split s = split_fixed(load_corpus(o->corpus), o->test_size, o->seed);
      save_corpus(s.train, o->train_out);
      save_corpus(s.test, o->test_out);
      std::cerr << "train " << s.train.size() << ", test " << s.test.size() << "\n";
      return 0;
    };
  });

  auto* bin = corpus->add_subcommand("bin", "Sample and bin sentences into rounds by length");
  bin->add_option("--in", o->in)->required();
  bin->add_option("--out-dir", o->out_dir)->required();
  bin->add_option("--schedule", o->schedule, "canonical or uniform")->capture_default_str();
  bin->add_option("--rounds", o->rounds)->capture_default_str();
  bin->add_option("--per-round", o->per_round)->capture_default_str();
  bin->add_option("--seed", o->seed)->capture_default_str();
  bin->callback([&action, o] {
    action = [o] {
      const RoundSchedule schedule = make_schedule(o->schedule, o->rounds, o->per_round);
      ConfigFile cfg;
      cfg.set("in", o->in);
      cfg.set("schedule", o->schedule);
      cfg.set("rounds", static_cast<int64_t>(schedule.size()));
      cfg.set("seed", static_cast<int64_t>(o->seed));
      fs::create_directories(o->out_dir);
      log_resolved("corpus bin", cfg, fs::path(o->out_dir));
      const auto all = load_sentences(o->in);
      const auto sample = sample_sentences(all, schedule.total(), o->seed);
      const auto bins = bin_by_length(sample, schedule);
      std::string summary = "round\tcount\tmean_length\n";
      for (std::size_t r = 0; r < bins.size(); ++r) {
        io::write_file_atomic(fs::path(o->out_dir) / ("round_" + std::to_string(r + 1) + ".txt"), join_lines(bins[r]));
        double total = 0;
        for (const auto& s : bins[r]) total += static_cast<double>(s.size());
        char buf[64];
        std::snprintf(buf, sizeof buf, "%zu\t%zu\t%.2f\n", r + 1, bins[r].size(), total / static_cast<double>(bins[r].size()));
        summary += buf;
      }
      io::write_file_atomic(fs::path(o->out_dir) / "bins.tsv", summary);
      std::cout << summary;
      return 0;
    };
  });

  auto* synth = corpus->add_subcommand("synth", "Synthetic gold corpus from dictionary characters");
  synth->add_option("--dict", o->dict)->required();
  synth->add_option("--overlay", o->overlay);
  synth->add_option("--n", o->n)->required();
  synth->add_option("--min-len", o->min_len)->capture_default_str();
  synth->add_option("--max-len", o->max_len)->capture_default_str();
  synth->add_option("--seed", o->seed)->capture_default_str();
  synth->add_option("--out", o->out)->required();
  synth->callback([&action, o] {
    action = [o] {
      ConfigFile cfg;
      cfg.set("dict", o->dict);
      cfg.set("n", static_cast<int64_t>(o->n));
      cfg.set("min_len", static_cast<int64_t>(o->min_len));
      cfg.set("max_len", static_cast<int64_t>(o->max_len));
      cfg.set("seed", static_cast<int64_t>(o->seed));
      log_resolved("corpus synth", cfg);
      const MappingTable table = load_table(o->dict, o->overlay);
      save_corpus(synth_fixture_corpus(table, o->n, o->min_len, o->max_len, o->seed), o->out);
      return 0;
    };
  });
}

// ---------------------------------------------------------------------------
// generate

struct GenerateOptions {
  std::string config, out;
  bool mock = false, control = false, compare = false, fresh = false;
  std::optional<uint64_t> seed;
  std::optional<std::size_t> workers;
  std::optional<int> stop_after;
};

std::unique_ptr<Provider> make_provider(const CampaignConfig& c, const MappingTable& table) {
  if (c.provider == "mock") return std::make_unique<MockOracle>(table, c.noise, c.mock_seed);
  return std::make_unique<HttpProvider>(c.http);
}

struct CampaignRun {
  CampaignResult result;
  bool stopped = false;
};

CampaignRun run_one(const CampaignConfig& c, const PipelineConfig& pipeline, const fs::path& dir,
                    std::span<const SentencePair> gold, std::span<const std::vector<Text>> bins,
                    const MappingTable& table, const GenerateOptions& o) {
  fs::create_directories(dir);
  CampaignConfig resolved = c;
  resolved.pipeline = pipeline;
  resolved.out_dir = dir;
  log_resolved("generate", resolved.resolved(), dir);

  const fs::path checkpoint = dir / "checkpoint.txt";
  if (o.fresh) fs::remove(checkpoint);
  auto provider = make_provider(c, table);
  CampaignOptions opts;
  opts.checkpoint = checkpoint;
  opts.stop_after_round = o.stop_after;
  CampaignRun run{run_campaign(*provider, gold, bins, pipeline, table, opts), false};
  if (run.result.resumed_from_round > 1) {
    std::cerr << "resumed from round " << run.result.resumed_from_round << "\n";
  }

  save_corpus(run.result.silver, dir / "silver.tsv");
  if (!run.result.reports.empty()) {
    const RenderedReport rep = report_render(run.result.reports);
    io::write_file_atomic(dir / "report.txt", rep.text);
    io::write_file_atomic(dir / "report.tsv", rep.data);
  }
  std::string pool;
  for (const auto& id : run.result.final_pool.member_ids()) pool += id + "\n";
  io::write_file_atomic(dir / "pool.txt", pool);
  std::string flags = "pair_id\tnovel_characters\n";
  for (const auto& r : run.result.reports) {
    for (const auto& f : r.novel_chars) flags += f.pair_id + "\t" + to_utf8(f.characters) + "\n";
  }
  io::write_file_atomic(dir / "novel_chars.tsv", flags);
  run.stopped = !run.result.completed;
  return run;
}

void add_generate(CLI::App& app, std::function<int()>& action) {
  auto* gen = app.add_subcommand("generate", "Run a silver-data campaign (resumes from its checkpoint)");
  auto o = std::make_shared<GenerateOptions>();
  gen->add_option("--config", o->config, "Campaign config file")->required();
  gen->add_flag("--mock", o->mock, "Use the dictionary mock provider");
  gen->add_option("--seed", o->seed, "Overrides pipeline and mock seeds");
  gen->add_option("--out", o->out, "Output directory (overrides out_dir)");
  gen->add_flag("--control", o->control, "Control group: never rotate the seed pool");
  gen->add_flag("--compare", o->compare, "Run rotating and control campaigns and compare them");
  gen->add_flag("--fresh", o->fresh, "Discard an existing checkpoint");
  gen->add_option("--workers", o->workers, "Concurrent provider requests");
  gen->add_option("--stop-after", o->stop_after, "Stop after this round (checkpoint kept)");
  gen->callback([&action, o] {
    action = [o] {
      const fs::path cfg_path(o->config);
      CampaignConfig c = CampaignConfig::from_file(ConfigFile::load(cfg_path), cfg_path.parent_path());
      if (o->mock) c.provider = "mock";
      if (o->seed) {
        c.pipeline.seed = *o->seed;
        c.mock_seed = *o->seed;
        c.sample_seed = *o->seed;
      }
      if (o->workers) c.pipeline.workers = *o->workers;
      if (!o->out.empty()) c.out_dir = o->out;
      if (o->control) c.pipeline.control_mode = true;

      const MappingTable table = load_table(c.dictionary.string(), c.overlay ? c.overlay->string() : "");
      std::vector<SentencePair> gold;
      for (auto& p : load_corpus(c.gold)) {
        if (p.provenance == Provenance::Gold && p.status == Status::Validated) gold.push_back(std::move(p));
      }
      const RoundSchedule schedule = make_schedule(c.schedule, c.pipeline.rounds, c.pipeline.batch_per_round);
      const FilterResult filtered = filter_corpus(table, load_sentences(c.sentences));
      if (!filtered.rejected.empty()) {
        std::cerr << filtered.rejected.size() << " sentences dropped for uncovered characters\n";
      }
      if (filtered.kept.size() < schedule.total()) {
        throw ValidationError("need " + std::to_string(schedule.total()) + " covered sentences, have " +
                              std::to_string(filtered.kept.size()));
      }
      const auto bins = bin_by_length(sample_sentences(filtered.kept, schedule.total(), c.sample_seed), schedule);

      if (!o->compare) {
        const CampaignRun run = run_one(c, c.pipeline, c.out_dir, gold, bins, table, *o);
        if (!run.result.reports.empty()) std::cout << report_render(run.result.reports).text;
        if (run.stopped) std::cerr << "stopped before the last round; rerun to resume\n";
        return 0;
      }
      PipelineConfig rotating = c.pipeline, control = c.pipeline;
      rotating.control_mode = false;
      control.control_mode = true;
      const CampaignRun a = run_one(c, rotating, c.out_dir / "rotating", gold, bins, table, *o);
      const CampaignRun b = run_one(c, control, c.out_dir / "control", gold, bins, table, *o);
      if (a.result.reports.empty()) return 0;
      const RenderedReport rep = report_render(a.result.reports, std::span<const RoundReport>(b.result.reports));
      io::write_file_atomic(c.out_dir / "comparison.txt", rep.text);
      io::write_file_atomic(c.out_dir / "comparison.tsv", rep.data);
      std::cout << rep.text;
      return 0;
    };
  });
}

// ---------------------------------------------------------------------------
// review

void add_review(CLI::App& app, std::function<int()>& action) {
  auto* review = app.add_subcommand("review", "Apply a corrections file (pair id<TAB>target) to a corpus");
  auto corpus = std::make_shared<std::string>(), corrections = std::make_shared<std::string>(),
       out = std::make_shared<std::string>();
  review->add_option("--corpus", *corpus, "Corpus TSV")->required();
  review->add_option("--corrections", *corrections, "Corrections TSV")->required();
  review->add_option("--out", *out, "Output corpus TSV")->required();
  review->callback([&action, corpus, corrections, out] {
    action = [corpus, corrections, out] {
      const auto fixed = apply_corrections(load_corpus(*corpus), io::read_file(*corrections), *corrections);
      save_corpus(fixed, *out);
      std::size_t n = 0;
      for (const auto& p : fixed) n += p.provenance == Provenance::Corrected;
      std::cerr << n << " corrected pairs\n";
      return 0;
    };
  });
}

// ---------------------------------------------------------------------------
// eval

void add_eval(CLI::App& app, std::function<int()>& action) {
  auto* ev = app.add_subcommand("eval", "Score predictions against references, one sentence per line");
  auto pred = std::make_shared<std::string>(), ref = std::make_shared<std::string>(),
       json = std::make_shared<std::string>();
  ev->add_option("--pred", *pred, "Predictions")->required();
  ev->add_option("--ref", *ref, "References")->required();
  ev->add_option("--json", *json, "Also write the scores as JSON");
  ev->callback([&action, pred, ref, json] {
    action = [pred, ref, json] {
      const auto p = read_text_lines(*pred);
      const auto r = read_text_lines(*ref);
      if (p.size() != r.size()) {
        throw ValidationError(std::to_string(p.size()) + " predictions but " + std::to_string(r.size()) + " references");
      }
      const eval::EvalResult res = eval::evaluate_suite(p, r);
      std::cout << eval::tsv_header() << "\n" << eval::tsv_row(res) << "\n";
      if (!json->empty()) io::write_file_atomic(*json, eval::to_json(res) + "\n");
      return 0;
    };
  });
}

// ---------------------------------------------------------------------------
// embed

void add_embed(CLI::App& app, std::function<int()>& action) {
  auto* em = app.add_subcommand("embed", "Train skip-gram character embeddings on a corpus");
  struct Opts {
    std::string corpus, out, neighbors;
    std::size_t k = 10;
    embed::SkipgramConfig sg;
  };
  auto o = std::make_shared<Opts>();
  em->add_option("--corpus", o->corpus, "Corpus TSV; both sides become training lines")->required();
  em->add_option("--out", o->out, "Vectors output (text format)")->required();
  em->add_option("--dim", o->sg.dim)->capture_default_str();
  em->add_option("--window", o->sg.window)->capture_default_str();
  em->add_option("--min-count", o->sg.min_count)->capture_default_str();
  em->add_option("--negatives", o->sg.negatives)->capture_default_str();
  em->add_option("--epochs", o->sg.epochs)->capture_default_str();
  em->add_option("--lr", o->sg.lr)->capture_default_str();
  em->add_option("--seed", o->sg.seed)->capture_default_str();
  em->add_option("--neighbors", o->neighbors, "Print nearest neighbours of these characters");
  em->add_option("--k", o->k)->capture_default_str();
  em->callback([&action, o] {
    action = [o] {
      ConfigFile cfg;
      cfg.set("corpus", o->corpus);
      cfg.set("dim", static_cast<int64_t>(o->sg.dim));
      cfg.set("window", static_cast<int64_t>(o->sg.window));
      cfg.set("min_count", static_cast<int64_t>(o->sg.min_count));
      cfg.set("negatives", static_cast<int64_t>(o->sg.negatives));
      cfg.set("epochs", static_cast<int64_t>(o->sg.epochs));
      cfg.set("lr", o->sg.lr);
      cfg.set("seed", static_cast<int64_t>(o->sg.seed));
      cfg.set("simd", std::string(kernels::active().name));
      log_resolved("embed", cfg);
      const auto pairs = load_corpus(o->corpus);
      const auto lines = embed::bilingual_lines(pairs, o->sg.seed);
      const embed::SkipgramModel model = embed::train_skipgram(lines, o->sg);
      embed::save_vectors(model, o->out);
      std::cerr << "vocabulary " << model.vocab.size() << ", final epoch loss " << model.epoch_loss.back() << "\n";
      for (char32_t c : from_utf8(o->neighbors)) {
        std::cout << to_utf8(c);
        for (const auto& n : embed::nearest_neighbors(model.table, model.vocab, c, o->k)) {
          char buf[32];
          std::snprintf(buf, sizeof buf, ":%.4f", n.similarity);
          std::cout << "\t" << to_utf8(n.token) << buf;
        }
        std::cout << "\n";
      }
      return 0;
    };
  });
}

// ---------------------------------------------------------------------------
// mt

struct MtOptions {
  std::string train, model, in, out, direction = "nu2zh";
  mt::Seq2SeqConfig cfg;
};

void add_model_options(CLI::App* sub, mt::Seq2SeqConfig& c) {
  sub->add_option("--embed-dim", c.embed_dim)->capture_default_str();
  sub->add_option("--hidden-dim", c.hidden_dim)->capture_default_str();
  sub->add_flag("--attention", c.attention, "Dot-product attention over encoder states");
  sub->add_option("--lr", c.lr)->capture_default_str();
  sub->add_option("--clip", c.clip_norm)->capture_default_str();
  sub->add_option("--batch", c.batch_size)->capture_default_str();
  sub->add_option("--epochs", c.epochs)->capture_default_str();
  sub->add_option("--seed", c.seed)->capture_default_str();
}

ConfigFile model_config(const mt::Seq2SeqConfig& c) {
  ConfigFile f;
  f.set("model.embed_dim", static_cast<int64_t>(c.embed_dim));
  f.set("model.hidden_dim", static_cast<int64_t>(c.hidden_dim));
  f.set("model.attention", c.attention);
  f.set("model.lr", c.lr);
  f.set("model.clip_norm", c.clip_norm);
  f.set("model.batch_size", static_cast<int64_t>(c.batch_size));
  f.set("model.epochs", static_cast<int64_t>(c.epochs));
  f.set("model.seed", static_cast<int64_t>(c.seed));
  f.set("model.init_scale", c.init_scale);
  f.set("simd", std::string(kernels::active().name));
  return f;
}

bool nushu_to_chinese(const std::string& direction) {
  if (direction == "nu2zh") return true;
  if (direction == "zh2nu") return false;
  throw ArgumentError("direction must be nu2zh or zh2nu");
}

void add_mt(CLI::App& app, std::function<int()>& action) {
  auto* m = app.add_subcommand("mt", "Character-level encoder-decoder training and decoding");
  m->require_subcommand(1);
  auto o = std::make_shared<MtOptions>();

  auto* train = m->add_subcommand("train", "Train a model on a corpus TSV");
  train->add_option("--train", o->train, "Training corpus TSV")->required();
  train->add_option("--model", o->model, "Model checkpoint to write")->required();
  train->add_option("--direction", o->direction, "nu2zh or zh2nu")->capture_default_str();
  add_model_options(train, o->cfg);
  train->callback([&action, o] {
    action = [o] {
      ConfigFile cfg = model_config(o->cfg);
      cfg.set("train", o->train);
      cfg.set("direction", o->direction);
      log_resolved("mt train", cfg);
      const auto pairs = directed(load_corpus(o->train), nushu_to_chinese(o->direction));
      const mt::TrainRun run = mt::train_mt(pairs, o->cfg);
      for (std::size_t e = 0; e < run.epoch_loss.size(); ++e) {
        std::fprintf(stderr, "epoch %zu loss %.4f accuracy %.4f\n", e + 1, run.epoch_loss[e], run.epoch_accuracy[e]);
      }
      mt::save_model(run.model, o->model);
      return 0;
    };
  });

  auto* decode = m->add_subcommand("decode", "Greedy decoding, one source sentence per line");
  decode->add_option("--model", o->model)->required();
  decode->add_option("--in", o->in)->required();
  decode->add_option("--out", o->out, "Output file (default stdout)");
  decode->callback([&action, o] {
    action = [o] {
      const mt::Translator model = mt::load_model(o->model);
      std::vector<Text> out;
      for (const auto& s : read_text_lines(o->in)) out.push_back(mt::greedy_decode(model, s));
      emit(o->out, join_lines(out));
      return 0;
    };
  });
}

// ---------------------------------------------------------------------------
// experiment

struct ExperimentOptions {
  std::string gold, silver, out, strata_out, direction = "nu2zh";
  std::size_t test_size = 100;
  uint64_t split_seed = 0;
  std::vector<std::size_t> sizes = {100, 200, 300, 400};
  std::vector<uint64_t> seeds = {1, 2, 3, 4, 5};
  std::vector<std::size_t> strata;
  bool silver_sizes = true;
  std::size_t workers = 1;
  mt::Seq2SeqConfig cfg;
};

void add_experiment(CLI::App& app, std::function<int()>& action) {
  auto* ex = app.add_subcommand("experiment", "Incremental training-size experiment");
  auto o = std::make_shared<ExperimentOptions>();
  ex->add_option("--gold", o->gold, "Gold corpus TSV")->required();
  ex->add_option("--silver", o->silver, "Silver corpus TSV, appended round by round");
  ex->add_option("--out", o->out, "Results TSV")->required();
  ex->add_option("--strata-out", o->strata_out, "Length-stratified results TSV");
  ex->add_option("--strata", o->strata, "Upper source-length bounds for stratified scores")->delimiter(',');
  ex->add_option("--test-size", o->test_size)->capture_default_str();
  ex->add_option("--split-seed", o->split_seed)->capture_default_str();
  ex->add_option("--sizes", o->sizes, "Gold training sizes")->delimiter(',')->capture_default_str();
  ex->add_option("--seeds", o->seeds)->delimiter(',')->capture_default_str();
  ex->add_flag("!--no-silver-sizes", o->silver_sizes, "Do not add the per-round silver sizes");
  ex->add_option("--direction", o->direction)->capture_default_str();
  ex->add_option("--workers", o->workers)->capture_default_str();
  add_model_options(ex, o->cfg);
  ex->callback([&action, o] {
    action = [o] {
      std::vector<SentencePair> gold;
      for (auto& p : load_corpus(o->gold)) {
        if (p.provenance == Provenance::Gold) gold.push_back(std::move(p));
      }
      const Split split = split_fixed(gold, o->test_size, o->split_seed);
      std::map<int, std::vector<SentencePair>> by_round;
      if (!o->silver.empty()) {
        for (auto& p : load_corpus(o->silver)) {
          if (p.round) by_round[*p.round].push_back(std::move(p));
        }
      }
      std::vector<std::vector<SentencePair>> silver;
      for (auto& [_, v] : by_round) silver.push_back(std::move(v));

      std::vector<std::size_t> sizes = o->sizes;
      if (o->silver_sizes && !silver.empty()) {
        const auto extra = mt::round_sizes(split.train.size(), silver);
        sizes.insert(sizes.end(), extra.begin() + 1, extra.end());
      }
      mt::ExperimentConfig ec;
      ec.model = o->cfg;
      ec.nushu_to_chinese = nushu_to_chinese(o->direction);
      ec.workers = o->workers;
      ec.length_strata = o->strata;

      ConfigFile cfg = model_config(o->cfg);
      cfg.set("gold", o->gold);
      cfg.set("silver", o->silver);
      cfg.set("test_size", static_cast<int64_t>(o->test_size));
      cfg.set("split_seed", static_cast<int64_t>(o->split_seed));
      std::vector<ConfigFile::Scalar> sz, sd, st;
      for (auto s : sizes) sz.emplace_back(static_cast<int64_t>(s));
      for (auto s : o->seeds) sd.emplace_back(static_cast<int64_t>(s));
      for (auto s : o->strata) st.emplace_back(static_cast<int64_t>(s));
      cfg.set("sizes", sz);
      cfg.set("seeds", sd);
      cfg.set("strata", st);
      cfg.set("direction", o->direction);
      log_resolved("experiment", cfg);

      const mt::ExperimentResults res =
          mt::incremental_experiment(split.train, silver, sizes, split.test, o->seeds, ec);
      const std::string table = mt::render_results(res);
      emit(o->out, table);
      if (!o->strata_out.empty()) emit(o->strata_out, mt::render_strata(res));
      if (o->out != "-") std::cout << table;
      return 0;
    };
  });
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Nüshu-Chinese corpus tooling: dictionary, silver-data campaigns, metrics and models"};
  app.require_subcommand(1);
  app.set_version_flag("--version", "nushu 1.0");
  std::function<int()> action;
  add_dict(app, action);
  add_corpus(app, action);
  add_generate(app, action);
  add_review(app, action);
  add_eval(app, action);
  add_embed(app, action);
  add_mt(app, action);
  add_experiment(app, action);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << "error: " << e.what() << "\n\n" << app.help();
    return 2;
  }
  try {
    return action ? action() : 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
