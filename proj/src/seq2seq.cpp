#include "nushu/seq2seq.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <numeric>

#include "nushu/errors.hpp"
#include "nushu/io.hpp"
#include "nushu/kernels.hpp"
#include "nushu/random.hpp"

namespace nushu::mt {

// ---------------------------------------------------------------------------
// Vocabulary

CharVocab CharVocab::from_chars(std::vector<char32_t> chars) {
  CharVocab v;
  v.chars_ = std::move(chars);
  for (std::size_t i = 0; i < v.chars_.size(); ++i) {
    if (!v.ids_.emplace(v.chars_[i], static_cast<int>(i) + kFirstChar).second) {
      throw ArgumentError("duplicate character in vocabulary");
    }
  }
  return v;
}

CharVocab CharVocab::build(std::span<const Text> texts) {
  std::vector<char32_t> chars;
  for (const auto& t : texts) chars.insert(chars.end(), t.begin(), t.end());
  std::sort(chars.begin(), chars.end());
  chars.erase(std::unique(chars.begin(), chars.end()), chars.end());
  return from_chars(std::move(chars));
}

int CharVocab::id(char32_t c) const {
  auto it = ids_.find(c);
  return it == ids_.end() ? kUnk : it->second;
}

char32_t CharVocab::character(int id) const {
  if (id < kFirstChar || static_cast<std::size_t>(id) >= size()) {
    throw ArgumentError("id " + std::to_string(id) + " is not a character");
  }
  return chars_[static_cast<std::size_t>(id - kFirstChar)];
}

std::vector<int> CharVocab::encode(std::u32string_view text) const {
  std::vector<int> out;
  out.reserve(text.size());
  for (char32_t c : text) out.push_back(id(c));
  return out;
}

// ---------------------------------------------------------------------------
// Parameters

namespace {

GruParams gru_zeros(std::size_t in, std::size_t hidden) {
  return {Matrix(3 * hidden, in), Matrix(3 * hidden, hidden), Matrix(3 * hidden, 1), Matrix(3 * hidden, 1)};
}

}  // namespace

Seq2SeqParams Seq2SeqParams::zeros(std::size_t src_vocab, std::size_t tgt_vocab, std::size_t embed_dim,
                                   std::size_t hidden_dim, bool attention) {
  Seq2SeqParams p;
  p.embed_dim = embed_dim;
  p.hidden_dim = hidden_dim;
  p.attention = attention;
  p.src_embed = Matrix(src_vocab, embed_dim);
  p.tgt_embed = Matrix(tgt_vocab, embed_dim);
  p.encoder = gru_zeros(embed_dim, hidden_dim);
  p.decoder = gru_zeros(embed_dim, hidden_dim);
  p.out_w = Matrix(tgt_vocab, hidden_dim);
  p.out_b = Matrix(tgt_vocab, 1);
  if (attention) p.attn_w = Matrix(tgt_vocab, hidden_dim);
  return p;
}

Seq2SeqParams Seq2SeqParams::init(std::size_t src_vocab, std::size_t tgt_vocab, const Seq2SeqConfig& config) {
  Seq2SeqParams p = zeros(src_vocab, tgt_vocab, config.embed_dim, config.hidden_dim, config.attention);
  Rng rng(derive_seed({config.seed, 0x50415241}));
  const double s = config.init_scale;
  for (Matrix* m : {&p.src_embed, &p.tgt_embed, &p.encoder.w, &p.encoder.u, &p.decoder.w, &p.decoder.u}) {
    for (double& x : m->data) x = rng.uniform(-s, s);
  }
  return p;
}

void Seq2SeqParams::for_each_block(const std::function<void(const char*, Matrix&)>& f) {
  f("src_embed", src_embed);
  f("tgt_embed", tgt_embed);
  f("encoder.w", encoder.w);
  f("encoder.u", encoder.u);
  f("encoder.bw", encoder.bw);
  f("encoder.bu", encoder.bu);
  f("decoder.w", decoder.w);
  f("decoder.u", decoder.u);
  f("decoder.bw", decoder.bw);
  f("decoder.bu", decoder.bu);
  f("out_w", out_w);
  f("out_b", out_b);
  f("attn_w", attn_w);
}

void Seq2SeqParams::for_each_block(const std::function<void(const char*, const Matrix&)>& f) const {
  const_cast<Seq2SeqParams*>(this)->for_each_block([&](const char* name, Matrix& m) { f(name, m); });
}

std::size_t Seq2SeqParams::parameter_count() const {
  std::size_t n = 0;
  for_each_block([&](const char*, const Matrix& m) { n += m.data.size(); });
  return n;
}

// ---------------------------------------------------------------------------
// Forward / backward

namespace {

double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

struct GruStep {
  std::vector<double> x, h_prev, z, r, n, gh_n, h;
};

void gru_forward(const GruParams& p, std::size_t hidden, const double* x, std::size_t in, const double* h_prev,
                 GruStep& s) {
  const auto& K = kernels::active();
  const std::size_t H = hidden;
  std::vector<double> gx(p.bw.data), gh(p.bu.data);
  K.gemv_acc(p.w.data.data(), 3 * H, in, x, gx.data());
  K.gemv_acc(p.u.data.data(), 3 * H, H, h_prev, gh.data());
  s.x.assign(x, x + in);
  s.h_prev.assign(h_prev, h_prev + H);
  s.z.resize(H);
  s.r.resize(H);
  s.n.resize(H);
  s.gh_n.resize(H);
  s.h.resize(H);
  for (std::size_t k = 0; k < H; ++k) {
    s.z[k] = sigmoid(gx[k] + gh[k]);
    s.r[k] = sigmoid(gx[H + k] + gh[H + k]);
    s.gh_n[k] = gh[2 * H + k];
    s.n[k] = std::tanh(gx[2 * H + k] + s.r[k] * s.gh_n[k]);
    s.h[k] = (1.0 - s.z[k]) * s.n[k] + s.z[k] * h_prev[k];
  }
}

// dh: gradient w.r.t. the step output. Accumulates parameter gradients into
// g, adds the input gradient into dx and writes the gradient for h_prev.
void gru_backward(const GruParams& p, std::size_t hidden, const GruStep& s, const double* dh, GruParams& g,
                  double* dx, double* dh_prev) {
  const auto& K = kernels::active();
  const std::size_t H = hidden;
  const std::size_t in = s.x.size();
  std::vector<double> dgx(3 * H), dgh(3 * H);
  for (std::size_t k = 0; k < H; ++k) {
    const double dn = dh[k] * (1.0 - s.z[k]);
    const double dz = dh[k] * (s.h_prev[k] - s.n[k]);
    const double dn_pre = dn * (1.0 - s.n[k] * s.n[k]);
    const double dr = dn_pre * s.gh_n[k];
    const double dz_pre = dz * s.z[k] * (1.0 - s.z[k]);
    const double dr_pre = dr * s.r[k] * (1.0 - s.r[k]);
    dgx[k] = dgh[k] = dz_pre;
    dgx[H + k] = dgh[H + k] = dr_pre;
    dgx[2 * H + k] = dn_pre;
    dgh[2 * H + k] = dn_pre * s.r[k];
    dh_prev[k] = dh[k] * s.z[k];
  }
  K.ger_acc(1.0, dgx.data(), 3 * H, s.x.data(), in, g.w.data.data());
  K.ger_acc(1.0, dgh.data(), 3 * H, s.h_prev.data(), H, g.u.data.data());
  K.axpy(1.0, dgx.data(), g.bw.data.data(), 3 * H);
  K.axpy(1.0, dgh.data(), g.bu.data.data(), 3 * H);
  K.gemv_t_acc(p.w.data.data(), 3 * H, in, dgx.data(), dx);
  K.gemv_t_acc(p.u.data.data(), 3 * H, H, dgh.data(), dh_prev);
}

struct DecoderStep {
  GruStep gru;
  std::vector<double> alpha;    // attention weights over encoder states
  std::vector<double> context;  // sum_i alpha_i enc_i
  std::vector<double> probs;    // softmax over target vocabulary
};

// Fills probs (and attention) for decoder state `d`.
void output_layer(const Seq2SeqParams& p, const std::vector<GruStep>& enc, const std::vector<double>& d,
                  DecoderStep& step) {
  const auto& K = kernels::active();
  const std::size_t H = p.hidden_dim;
  const std::size_t V = p.tgt_vocab();
  std::vector<double> logits(p.out_b.data);
  K.gemv_acc(p.out_w.data.data(), V, H, d.data(), logits.data());
  if (p.attention) {
    step.context.assign(H, 0.0);
    step.alpha.assign(enc.size(), 0.0);
    if (!enc.empty()) {
      double mx = -INFINITY;
      for (std::size_t i = 0; i < enc.size(); ++i) {
        step.alpha[i] = K.dot(enc[i].h.data(), d.data(), H);
        mx = std::max(mx, step.alpha[i]);
      }
      double sum = 0;
      for (double& a : step.alpha) sum += (a = std::exp(a - mx));
      for (std::size_t i = 0; i < enc.size(); ++i) {
        step.alpha[i] /= sum;
        K.axpy(step.alpha[i], enc[i].h.data(), step.context.data(), H);
      }
    }
    K.gemv_acc(p.attn_w.data.data(), V, H, step.context.data(), logits.data());
  }
  const double mx = *std::max_element(logits.begin(), logits.end());
  double sum = 0;
  for (double& l : logits) sum += (l = std::exp(l - mx));
  for (double& l : logits) l /= sum;
  step.probs = std::move(logits);
}

void check_ids(std::span<const int> ids, std::size_t vocab, const char* what) {
  for (int id : ids) {
    if (id < 0 || static_cast<std::size_t>(id) >= vocab) {
      throw ArgumentError(std::string(what) + " token id " + std::to_string(id) + " outside vocabulary of " +
                          std::to_string(vocab));
    }
  }
}

std::vector<int> strip_pad(std::span<const int> row) {
  std::vector<int> out;
  for (int id : row) {
    if (id != kPad) out.push_back(id);
  }
  return out;
}

std::vector<GruStep> encode(const Seq2SeqParams& p, std::span<const int> src) {
  const std::size_t H = p.hidden_dim, E = p.embed_dim;
  std::vector<GruStep> steps(src.size());
  std::vector<double> h(H, 0.0);
  for (std::size_t i = 0; i < src.size(); ++i) {
    gru_forward(p.encoder, H, p.src_embed.row(static_cast<std::size_t>(src[i])), E, h.data(), steps[i]);
    h = steps[i].h;
  }
  return steps;
}

}  // namespace

ForwardResult forward_loss(const Seq2SeqParams& params, std::span<const std::vector<int>> sources,
                           std::span<const std::vector<int>> targets, Seq2SeqParams* grads) {
  if (sources.size() != targets.size()) throw ArgumentError("source and target batch sizes differ");
  for (const auto& s : sources) check_ids(s, params.src_vocab(), "source");
  for (const auto& t : targets) check_ids(t, params.tgt_vocab(), "target");

  const auto& K = kernels::active();
  const std::size_t H = params.hidden_dim, E = params.embed_dim, V = params.tgt_vocab();

  ForwardResult result;
  for (const auto& t : targets) {
    const auto tgt = strip_pad(t);
    if (tgt.size() > 1) result.tokens += tgt.size() - 1;
  }
  if (grads) *grads = Seq2SeqParams::zeros(params.src_vocab(), V, E, H, params.attention);
  if (result.tokens == 0) return result;
  const double scale = 1.0 / static_cast<double>(result.tokens);

  double total_loss = 0;
  for (std::size_t b = 0; b < sources.size(); ++b) {
    const auto src = strip_pad(sources[b]);
    const auto tgt = strip_pad(targets[b]);
    if (tgt.size() < 2) continue;

    const std::vector<GruStep> enc = encode(params, src);
    std::vector<double> d(H, 0.0);
    if (!enc.empty()) d = enc.back().h;

    std::vector<DecoderStep> dec(tgt.size() - 1);
    for (std::size_t t = 1; t < tgt.size(); ++t) {
      auto& step = dec[t - 1];
      gru_forward(params.decoder, H, params.tgt_embed.row(static_cast<std::size_t>(tgt[t - 1])), E, d.data(),
                  step.gru);
      d = step.gru.h;
      output_layer(params, enc, d, step);
      const auto gold = static_cast<std::size_t>(tgt[t]);
      total_loss -= std::log(step.probs[gold]);
      const auto best = static_cast<std::size_t>(std::max_element(step.probs.begin(), step.probs.end()) - step.probs.begin());
      result.correct += best == gold;
    }
    if (!grads) continue;

    Seq2SeqParams& g = *grads;
    std::vector<std::vector<double>> d_enc(enc.size(), std::vector<double>(H, 0.0));
    std::vector<double> dd(H, 0.0), dd_prev(H), dlogits(V), dx(E);
    for (std::size_t t = dec.size(); t-- > 0;) {
      const auto& step = dec[t];
      const auto gold = static_cast<std::size_t>(tgt[t + 1]);
      for (std::size_t v = 0; v < V; ++v) dlogits[v] = scale * step.probs[v];
      dlogits[gold] -= scale;

      K.ger_acc(1.0, dlogits.data(), V, step.gru.h.data(), H, g.out_w.data.data());
      K.axpy(1.0, dlogits.data(), g.out_b.data.data(), V);
      K.gemv_t_acc(params.out_w.data.data(), V, H, dlogits.data(), dd.data());

      if (params.attention && !enc.empty()) {
        std::vector<double> dctx(H, 0.0);
        K.ger_acc(1.0, dlogits.data(), V, step.context.data(), H, g.attn_w.data.data());
        K.gemv_t_acc(params.attn_w.data.data(), V, H, dlogits.data(), dctx.data());
        std::vector<double> dalpha(enc.size());
        double weighted = 0;
        for (std::size_t i = 0; i < enc.size(); ++i) {
          dalpha[i] = K.dot(dctx.data(), enc[i].h.data(), H);
          weighted += step.alpha[i] * dalpha[i];
        }
        for (std::size_t i = 0; i < enc.size(); ++i) {
          const double dscore = step.alpha[i] * (dalpha[i] - weighted);
          K.axpy(step.alpha[i], dctx.data(), d_enc[i].data(), H);
          K.axpy(dscore, step.gru.h.data(), d_enc[i].data(), H);
          K.axpy(dscore, enc[i].h.data(), dd.data(), H);
        }
      }

      std::fill(dx.begin(), dx.end(), 0.0);
      gru_backward(params.decoder, H, step.gru, dd.data(), g.decoder, dx.data(), dd_prev.data());
      K.axpy(1.0, dx.data(), g.tgt_embed.row(static_cast<std::size_t>(tgt[t])), E);
      dd.swap(dd_prev);
    }
    // dd now holds the gradient w.r.t. the decoder's initial state
    for (std::size_t i = enc.size(); i-- > 0;) {
      K.axpy(1.0, d_enc[i].data(), dd.data(), H);
      std::fill(dx.begin(), dx.end(), 0.0);
      gru_backward(params.encoder, H, enc[i], dd.data(), g.encoder, dx.data(), dd_prev.data());
      K.axpy(1.0, dx.data(), g.src_embed.row(static_cast<std::size_t>(src[i])), E);
      dd.swap(dd_prev);
    }
  }
  result.loss = total_loss * scale;
  return result;
}

// ---------------------------------------------------------------------------
// Training and decoding

namespace {

TrainPair encode_pair(const Translator& m, const std::pair<Text, Text>& p) {
  TrainPair tp;
  tp.source = m.src_vocab.encode(p.first);
  tp.target.push_back(kBos);
  for (int id : m.tgt_vocab.encode(p.second)) tp.target.push_back(id);
  tp.target.push_back(kEos);
  return tp;
}

void pad_batch(std::vector<std::vector<int>>& rows) {
  std::size_t longest = 0;
  for (const auto& r : rows) longest = std::max(longest, r.size());
  for (auto& r : rows) r.resize(longest, kPad);
}

double clip_and_step(Seq2SeqParams& params, Seq2SeqParams& grads, double lr, double clip) {
  double sq = 0;
  grads.for_each_block([&](const char*, const Matrix& m) {
    for (double x : m.data) sq += x * x;
  });
  const double norm = std::sqrt(sq);
  const double factor = (clip > 0 && norm > clip) ? clip / norm : 1.0;
  std::vector<Matrix*> gblocks;
  grads.for_each_block([&](const char*, Matrix& m) { gblocks.push_back(&m); });
  std::size_t i = 0;
  const auto& K = kernels::active();
  params.for_each_block([&](const char*, Matrix& m) {
    K.axpy(-lr * factor, gblocks[i]->data.data(), m.data.data(), m.data.size());
    ++i;
  });
  return norm;
}

}  // namespace

void train_epochs(Translator& model, std::span<const std::pair<Text, Text>> pairs, const Seq2SeqConfig& config,
                  int epochs, std::vector<double>& epoch_loss, std::vector<double>& epoch_accuracy) {
  if (pairs.empty()) throw ArgumentError("training set is empty");
  if (config.batch_size == 0) throw ArgumentError("batch size must be positive");
  std::vector<TrainPair> data;
  data.reserve(pairs.size());
  for (const auto& p : pairs) data.push_back(encode_pair(model, p));

  std::vector<std::size_t> order(data.size());
  Seq2SeqParams grads;
  const int first_epoch = static_cast<int>(epoch_loss.size());
  for (int e = 0; e < epochs; ++e) {
    std::iota(order.begin(), order.end(), std::size_t{0});
    Rng rng(derive_seed({config.seed, 0x45504f43, static_cast<uint64_t>(first_epoch + e)}));
    rng.shuffle(std::span(order));
    double loss_sum = 0;
    std::size_t tokens = 0, correct = 0;
    for (std::size_t start = 0; start < order.size(); start += config.batch_size) {
      std::vector<std::vector<int>> src, tgt;
      for (std::size_t k = start; k < std::min(order.size(), start + config.batch_size); ++k) {
        src.push_back(data[order[k]].source);
        tgt.push_back(data[order[k]].target);
      }
      pad_batch(src);
      pad_batch(tgt);
      const ForwardResult fr = forward_loss(model.params, src, tgt, &grads);
      loss_sum += fr.loss * static_cast<double>(fr.tokens);
      tokens += fr.tokens;
      correct += fr.correct;
      if (fr.tokens > 0) clip_and_step(model.params, grads, config.lr, config.clip_norm);
    }
    epoch_loss.push_back(tokens ? loss_sum / static_cast<double>(tokens) : 0.0);
    epoch_accuracy.push_back(tokens ? static_cast<double>(correct) / static_cast<double>(tokens) : 0.0);
  }
}

TrainRun train_mt(std::span<const std::pair<Text, Text>> pairs, const Seq2SeqConfig& config) {
  if (pairs.empty()) throw ArgumentError("training set is empty");
  if (config.embed_dim == 0 || config.hidden_dim == 0 || config.epochs < 0 || !(config.lr > 0)) {
    throw ArgumentError("invalid seq2seq configuration");
  }
  std::vector<Text> srcs, tgts;
  for (const auto& [s, t] : pairs) {
    srcs.push_back(s);
    tgts.push_back(t);
  }
  TrainRun run;
  run.config = config;
  run.model.src_vocab = CharVocab::build(srcs);
  run.model.tgt_vocab = CharVocab::build(tgts);
  run.model.params = Seq2SeqParams::init(run.model.src_vocab.size(), run.model.tgt_vocab.size(), config);
  train_epochs(run.model, pairs, config, config.epochs, run.epoch_loss, run.epoch_accuracy);
  return run;
}

Text greedy_decode(const Translator& model, std::u32string_view source) {
  const auto& p = model.params;
  const std::size_t H = p.hidden_dim, E = p.embed_dim;
  const std::vector<int> src = model.src_vocab.encode(source);
  const std::vector<GruStep> enc = encode(p, src);
  std::vector<double> d(H, 0.0);
  if (!enc.empty()) d = enc.back().h;

  Text out;
  int prev = kBos;
  const std::size_t cap = source.size() + 5;
  DecoderStep step;
  for (std::size_t t = 0; t < cap; ++t) {
    gru_forward(p.decoder, H, p.tgt_embed.row(static_cast<std::size_t>(prev)), E, d.data(), step.gru);
    d = step.gru.h;
    output_layer(p, enc, d, step);
    // PAD and BOS are never emitted
    int best = kEos;
    for (std::size_t v = kEos; v < step.probs.size(); ++v) {
      if (step.probs[v] > step.probs[static_cast<std::size_t>(best)]) best = static_cast<int>(v);
    }
    if (best == kEos) break;
    if (best >= kFirstChar) out.push_back(model.tgt_vocab.character(best));
    prev = best;
  }
  return out;
}

double teacher_forced_accuracy(const Translator& model, std::span<const std::pair<Text, Text>> pairs) {
  std::size_t tokens = 0, correct = 0;
  for (const auto& p : pairs) {
    const TrainPair tp = encode_pair(model, p);
    const std::vector<int> src[] = {tp.source};
    const std::vector<int> tgt[] = {tp.target};
    const ForwardResult fr = forward_loss(model.params, src, tgt, nullptr);
    tokens += fr.tokens;
    correct += fr.correct;
  }
  return tokens ? static_cast<double>(correct) / static_cast<double>(tokens) : 0.0;
}

// ---------------------------------------------------------------------------
// Checkpoint: "NUSHUS2S" magic, u32 version, u32 E, H, attention, u32 source
// and target character counts with their codepoints, then each parameter
// block as u32 rows, u32 cols and row-major f64 values.

namespace {

static_assert(std::endian::native == std::endian::little, "checkpoint format is little-endian");

constexpr char kMagic[8] = {'N', 'U', 'S', 'H', 'U', 'S', '2', 'S'};
constexpr uint32_t kVersion = 1;

void put_u32(std::string& out, uint32_t v) { out.append(reinterpret_cast<const char*>(&v), 4); }

class Reader {
 public:
  explicit Reader(std::string data) : data_(std::move(data)) {}
  void bytes(void* dst, std::size_t n) {
    if (pos_ + n > data_.size()) throw ValidationError("model checkpoint is truncated");
    std::memcpy(dst, data_.data() + pos_, n);
    pos_ += n;
  }
  uint32_t u32() {
    uint32_t v;
    bytes(&v, 4);
    return v;
  }
  bool done() const { return pos_ == data_.size(); }

 private:
  std::string data_;
  std::size_t pos_ = 0;
};

}  // namespace

void save_model(const Translator& model, const std::filesystem::path& path) {
  std::string out(kMagic, sizeof kMagic);
  const auto& p = model.params;
  put_u32(out, kVersion);
  put_u32(out, static_cast<uint32_t>(p.embed_dim));
  put_u32(out, static_cast<uint32_t>(p.hidden_dim));
  put_u32(out, p.attention ? 1u : 0u);
  for (const CharVocab* v : {&model.src_vocab, &model.tgt_vocab}) {
    put_u32(out, static_cast<uint32_t>(v->chars().size()));
    for (char32_t c : v->chars()) put_u32(out, static_cast<uint32_t>(c));
  }
  p.for_each_block([&](const char*, const Matrix& m) {
    put_u32(out, static_cast<uint32_t>(m.rows));
    put_u32(out, static_cast<uint32_t>(m.cols));
    out.append(reinterpret_cast<const char*>(m.data.data()), m.data.size() * sizeof(double));
  });
  io::write_file_atomic(path, out);
}

Translator load_model(const std::filesystem::path& path) {
  Reader in(io::read_file(path));
  char magic[8];
  in.bytes(magic, 8);
  if (std::memcmp(magic, kMagic, 8) != 0) throw ValidationError(path.string() + " is not a model checkpoint");
  if (const uint32_t v = in.u32(); v != kVersion) {
    throw ValidationError("unsupported model checkpoint version " + std::to_string(v));
  }
  const std::size_t E = in.u32(), H = in.u32();
  const bool attention = in.u32() != 0;
  Translator m;
  for (CharVocab* v : {&m.src_vocab, &m.tgt_vocab}) {
    std::vector<char32_t> chars(in.u32());
    for (auto& c : chars) c = static_cast<char32_t>(in.u32());
    *v = CharVocab::from_chars(std::move(chars));
  }
  m.params = Seq2SeqParams::zeros(m.src_vocab.size(), m.tgt_vocab.size(), E, H, attention);
  m.params.for_each_block([&](const char* name, Matrix& block) {
    const std::size_t rows = in.u32(), cols = in.u32();
    if (rows != block.rows || cols != block.cols) {
      throw ValidationError(std::string("model checkpoint block ") + name + " has unexpected shape");
    }
    in.bytes(block.data.data(), block.data.size() * sizeof(double));
  });
  if (!in.done()) throw ValidationError("model checkpoint has trailing bytes");
  return m;
}

}  // namespace nushu::mt
