#include "factedit/generator.hpp"

#include <algorithm>
#include <cmath>

namespace factedit {

std::string gen_mode_name(GenMode m) {
  switch (m) {
    case GenMode::TWO_ENCODER: return "TWO_ENCODER";
    case GenMode::CONCAT: return "CONCAT";
    case GenMode::NO_COPY: return "NO_COPY";
    case GenMode::CLAIM_ONLY: return "CLAIM_ONLY";
  }
  throw CorpusError("bad generator mode");
}

GenMode gen_mode_from_name(const std::string& s) {
  if (s == "TWO_ENCODER") return GenMode::TWO_ENCODER;
  if (s == "CONCAT") return GenMode::CONCAT;
  if (s == "NO_COPY") return GenMode::NO_COPY;
  if (s == "CLAIM_ONLY") return GenMode::CLAIM_ONLY;
  throw CorpusError("unknown generator mode '" + s + "'");
}

namespace {
const std::string kEosTok = "<eos>";
}  // namespace

std::pair<Tokens, Tokens> route_sources(GenMode mode, const Tokens& residual,
                                        const Tokens& claim) {
  switch (mode) {
    case GenMode::TWO_ENCODER:
    case GenMode::NO_COPY:
      return {residual, claim};
    case GenMode::CONCAT: {
      Tokens joined = residual;
      joined.push_back(kEosTok);
      joined.insert(joined.end(), claim.begin(), claim.end());
      return {joined, joined};
    }
    case GenMode::CLAIM_ONLY:
      return {claim, claim};
  }
  throw CorpusError("bad generator mode");
}

namespace {

TensorPtr as_scalar(const TensorPtr& t) { return pick(t, 0); }

TensorPtr const_scalar(double v) { return scalar_tensor(v); }

}  // namespace

int ExtendedVocab::extend(const std::string& tok) {
  for (std::size_t i = 0; i < oov_tokens.size(); ++i)
    if (oov_tokens[i] == tok) return base_size + static_cast<int>(i);
  oov_tokens.push_back(tok);
  return base_size + static_cast<int>(oov_tokens.size()) - 1;
}

int ExtendedVocab::lookup(const Vocab& vocab, const std::string& tok) const {
  const int id = vocab.id_of(tok);
  if (id != kUnk || tok == vocab.id_to_token[kUnk]) return id;
  for (std::size_t i = 0; i < oov_tokens.size(); ++i)
    if (oov_tokens[i] == tok) return base_size + static_cast<int>(i);
  return -1;
}

std::string ExtendedVocab::surface(const Vocab& vocab, int ext_id) const {
  if (ext_id < base_size) return vocab.id_to_token[ext_id];
  return oov_tokens.at(ext_id - base_size);
}

GeneratorModel::GeneratorModel(int vocab_size, int emb_dim, int hidden_dim,
                               std::mt19937_64& rng)
    : emb(std::make_shared<EmbeddingTable>(vocab_size, emb_dim, rng, "gen")),
      encoder(std::make_shared<BiLSTMEncoder>(emb_dim, hidden_dim, rng, "gen.enc")),
      decoder(2 * hidden_dim + emb_dim, 2 * hidden_dim, rng, "gen.dec"),
      gen_gate(6 * hidden_dim + emb_dim, 1, rng, "gen.pgen"),
      src_gate(6 * hidden_dim + emb_dim, 1, rng, "gen.penc1"),
      vocab_proj(4 * hidden_dim, vocab_size, rng, "gen.vocab") {
  const auto h2 = static_cast<std::size_t>(2 * hidden_dim);
  attn_u = zeros({h2, 1}, true);
  attn_u->name = "gen.attn_u";
  glorot_init(*attn_u, rng);
  enc_gate_u = zeros({2 * h2, 1}, true);
  enc_gate_u->name = "gen.enc_gate_u";
  glorot_init(*enc_gate_u, rng);
}

std::vector<TensorPtr> GeneratorModel::params() const {
  std::vector<TensorPtr> ps = {emb->weight};
  for (const auto& grp : {encoder->params(), gen_gate.params(), src_gate.params(),
                          vocab_proj.params()})
    ps.insert(ps.end(), grp.begin(), grp.end());
  ps.push_back(decoder.w);
  ps.push_back(decoder.b);
  ps.push_back(attn_u);
  ps.push_back(enc_gate_u);
  return ps;
}

EncodedSources GeneratorModel::encode_pair(const Tokens& source1, const Tokens& source2,
                                           const Vocab& vocab) const {
  if (source1.empty() || source2.empty())
    throw CorpusError("encode_pair: empty source");
  EncodedSources out;
  out.ext.base_size = vocab.size();
  auto encode_side = [&](const Tokens& toks, std::vector<int>& ids, std::vector<int>& ext) {
    for (const auto& tok : toks) {
      const int id = vocab.id_of(tok);
      ids.push_back(id);
      if (id != kUnk || tok == vocab.id_to_token[kUnk])
        ext.push_back(id);
      else
        ext.push_back(out.ext.extend(tok));
    }
  };
  encode_side(source1, out.ids1, out.ext1);
  encode_side(source2, out.ids2, out.ext2);
  TensorPtr f1, b1, f2, b2;
  out.r1 = encoder->run_with_finals(emb->embed(out.ids1), f1, b1);
  out.r2 = encoder->run_with_finals(emb->embed(out.ids2), f2, b2);
  auto fin1 = concat_cols({f1, b1});
  auto fin2 = concat_cols({f2, b2});
  out.h0 = scale(add(fin1, fin2), 0.5);
  return out;
}

DecoderState GeneratorModel::initial_state(const EncodedSources& src) const {
  DecoderState st;
  st.h = src.h0;
  st.c = zeros({1, src.h0->cols()});
  st.prev_token = kBos;
  st.step = 0;
  return st;
}

ExtendedDistribution GeneratorModel::decode_step(DecoderState& state,
                                                 const EncodedSources& src,
                                                 const GateFloors& floors) const {
  auto attend = [&](const TensorPtr& r) {
    auto h_rows = matmul(full({r->rows(), 1}, 1.0), state.h);
    auto scores = matmul(tanh_t(add(r, h_rows)), attn_u);  // [l x 1]
    auto a = softmax_rows(transpose(scores));              // [1 x l]
    auto ctx = matmul(a, r);                               // [1 x 2H]
    return std::make_pair(a, ctx);
  };
  auto [a1, c1] = attend(src.r1);
  auto [a2, c2] = attend(src.r2);

  TensorPtr alpha = sigmoid(matmul(concat_cols({c1, c2}), enc_gate_u));  // [1 x 1]
  if (mode == GenMode::CONCAT) alpha = make_tensor({1, 1}, {1.0});
  if (floors.claim_context > 0.0 && 1.0 - alpha->values[0] < floors.claim_context)
    alpha = make_tensor({1, 1}, {1.0 - floors.claim_context});
  auto one_minus_alpha = sub(make_tensor({1, 1}, {1.0}), alpha);
  auto r = add(matmul(alpha, c1), matmul(one_minus_alpha, c2));

  auto x = concat_cols({r, emb->embed(std::span<const int>(&state.prev_token, 1))});
  auto [h_new, c_new] = decoder.step(x, state.h, state.c);

  auto gate_in = concat_cols({x, h_new, r});
  TensorPtr p_gen = sigmoid(gen_gate.apply(gate_in));
  if (mode == GenMode::NO_COPY) p_gen = make_tensor({1, 1}, {1.0});
  TensorPtr p_enc1 = sigmoid(src_gate.apply(gate_in));
  if (mode == GenMode::CONCAT) p_enc1 = make_tensor({1, 1}, {1.0});
  if (floors.claim_copy > 0.0 && mode != GenMode::CONCAT &&
      1.0 - p_enc1->values[0] < floors.claim_copy)
    p_enc1 = make_tensor({1, 1}, {1.0 - floors.claim_copy});

  auto p_vocab = softmax_rows(vocab_proj.apply(concat_cols({h_new, r})));

  state.h = h_new;
  state.c = c_new;
  state.last_a1 = a1;
  state.last_a2 = a2;
  ++state.step;

  ExtendedDistribution dist;
  dist.alpha = alpha;
  dist.p_gen = p_gen;
  dist.p_enc1 = p_enc1;
  dist.p_vocab = p_vocab;
  dist.a1 = a1;
  dist.a2 = a2;
  dist.src = &src;
  return dist;
}

TensorPtr ExtendedDistribution::prob_of(int ext_id) const {
  auto pg = as_scalar(p_gen);
  auto pe = as_scalar(p_enc1);
  auto one = const_scalar(1.0);
  TensorPtr total;
  if (ext_id < src->ext.base_size)
    total = mul(pg, pick(p_vocab, ext_id));
  else
    total = const_scalar(0.0);
  auto copy_mass = [&](const TensorPtr& a, const std::vector<int>& ext_ids) -> TensorPtr {
    std::vector<double> sel(ext_ids.size(), 0.0);
    bool any = false;
    for (std::size_t j = 0; j < ext_ids.size(); ++j)
      if (ext_ids[j] == ext_id) {
        sel[j] = 1.0;
        any = true;
      }
    if (!any) return nullptr;
    auto sel_t = make_tensor({ext_ids.size(), 1}, std::move(sel));
    return as_scalar(matmul(a, sel_t));
  };
  if (auto m1 = copy_mass(a1, src->ext1))
    total = add(total, mul(mul(sub(one, pg), pe), m1));
  if (auto m2 = copy_mass(a2, src->ext2))
    total = add(total, mul(mul(sub(one, pg), sub(one, pe)), m2));
  return total;
}

std::vector<double> ExtendedDistribution::dense() const {
  const int v = src->ext.base_size;
  std::vector<double> out(src->ext.total_size(), 0.0);
  const double pg = p_gen->values[0], pe = p_enc1->values[0];
  for (int w = 0; w < v; ++w) out[w] = pg * p_vocab->values[w];
  for (std::size_t j = 0; j < src->ext1.size(); ++j)
    out[src->ext1[j]] += (1.0 - pg) * pe * a1->values[j];
  for (std::size_t j = 0; j < src->ext2.size(); ++j)
    out[src->ext2[j]] += (1.0 - pg) * (1.0 - pe) * a2->values[j];
  return out;
}

namespace {

struct DecodeOut {
  Tokens tokens;
  std::vector<double> alphas, p_gens, p_enc1s;
};

DecodeOut decode_impl(const GeneratorModel& model, const Tokens& source1,
                      const Tokens& source2, const Vocab& vocab,
                      const InferenceConfig& config, const GateFloors& floors) {
  auto src = model.encode_pair(source1, source2, vocab);
  auto state = model.initial_state(src);
  DecodeOut out;
  for (int t = 0; t < config.max_len; ++t) {
    auto dist = model.decode_step(state, src, floors);
    out.alphas.push_back(dist.alpha->values[0]);
    out.p_gens.push_back(dist.p_gen->values[0]);
    out.p_enc1s.push_back(dist.p_enc1->values[0]);
    auto probs = dist.dense();
    // Never emit padding, BOS or the deletion placeholder.
    probs[kPad] = probs[kBos] = probs[kMaskTok] = -1.0;
    const int best = static_cast<int>(
        std::max_element(probs.begin(), probs.end()) - probs.begin());
    if (best == kEos) break;
    out.tokens.push_back(src.ext.surface(vocab, best));
    state.prev_token = best < vocab.size() ? best : kUnk;
  }
  return out;
}

}  // namespace

Tokens GeneratorModel::greedy_decode(const Tokens& source1, const Tokens& source2,
                                     const Vocab& vocab, const InferenceConfig& config,
                                     const GateFloors& floors) const {
  auto [s1, s2] = route_sources(mode, source1, source2);
  return decode_impl(*this, s1, s2, vocab, config, floors).tokens;
}

TensorPtr generator_nll(const GeneratorModel& model, const Tokens& source1,
                        const Tokens& source2, const Tokens& target, const Vocab& vocab,
                        int max_target_len) {
  auto src = model.encode_pair(source1, source2, vocab);
  Tokens tgt = target;
  if (static_cast<int>(tgt.size()) > max_target_len) tgt.resize(max_target_len);
  tgt.push_back(kEosTok);
  std::vector<int> tgt_ext;
  for (const auto& tok : tgt) {
    const int id = src.ext.lookup(vocab, tok);
    if (id < 0) return nullptr;  // unreachable even via copying
    tgt_ext.push_back(id);
  }
  auto state = model.initial_state(src);
  TensorPtr nll;
  for (std::size_t t = 0; t < tgt.size(); ++t) {
    auto dist = model.decode_step(state, src);
    auto term = scale(log_t(add_const(dist.prob_of(tgt_ext[t]), 1e-12)), -1.0);
    nll = nll ? add(nll, term) : term;
    const int vid = vocab.id_of(tgt[t]);
    state.prev_token = vid;  // teacher forcing; OOV targets feed <unk>
  }
  return scale(nll, 1.0 / static_cast<double>(tgt.size()));
}

GeneratorReport train_generator(GeneratorModel& model, const LabeledCorpus& agree_pairs,
                                const MaskerModel* masker, const StanceModel* stance,
                                const Vocab& vocab, const MaskerConfig& masker_config,
                                const GeneratorTrainConfig& config) {
  struct Instance {
    Tokens src1, src2, target;
  };
  GeneratorReport report;
  std::vector<Instance> instances;
  for (const auto& p : agree_pairs) {
    if (p.relation != Relation::AGREE) continue;
    Tokens residual = p.sentence;
    if (masker && stance) {
      auto s = vocab.encode(p.sentence);
      auto c = vocab.encode(p.claim);
      auto probs = masker->mask_probs(s, c);
      for (std::size_t i = 0; i < residual.size(); ++i)
        if (probs[i] >= masker_config.rounding_threshold) residual[i] = "<mask>";
    }
    auto [s1, s2] = route_sources(model.mode, residual, p.claim);
    instances.push_back({std::move(s1), std::move(s2), p.sentence});
  }
  if (instances.empty()) throw CorpusError("train_generator: no AGREE pairs");

  std::mt19937_64 rng(config.seed);
  std::shuffle(instances.begin(), instances.end(), rng);
  auto params = model.params();
  Optimizer opt(OptMethod::ADAM, config.lr);
  std::size_t cursor = 0;
  double window_loss = 0.0;
  long window_count = 0;
  for (int step = 0; step < config.steps; ++step) {
    TensorPtr batch_loss;
    int in_batch = 0;
    for (int k = 0; k < config.batch_size; ++k) {
      const auto& inst = instances[cursor];
      cursor = (cursor + 1) % instances.size();
      if (cursor == 0) std::shuffle(instances.begin(), instances.end(), rng);
      auto nll = generator_nll(model, inst.src1, inst.src2, inst.target, vocab,
                               config.max_target_len);
      if (!nll) {
        ++report.examples_skipped;
        continue;
      }
      window_loss += nll->scalar();
      ++window_count;
      batch_loss = batch_loss ? add(batch_loss, nll) : nll;
      ++in_batch;
    }
    if (!batch_loss) continue;
    Tape::backward(scale(batch_loss, 1.0 / in_batch));
    opt.step(params);
    ++report.steps_run;
    if ((step + 1) % config.report_every == 0) {
      report.loss_curve.push_back(window_count ? window_loss / window_count : 0.0);
      window_loss = 0.0;
      window_count = 0;
    }
  }
  return report;
}

RewriteResult rewrite_with_escalation(const GeneratorModel& model, const StanceModel& stance,
                                      const Tokens& residual, const Tokens& claim,
                                      const Vocab& vocab, const InferenceConfig& config) {
  if (!stance.trained_frozen)
    throw CorpusError("rewrite_with_escalation: stance classifier must be frozen");
  auto [s1, s2] = route_sources(config.mode, residual, claim);
  RewriteResult result;
  auto claim_ids = vocab.encode(claim);
  for (double tau : config.escalation) {
    GateFloors floors{tau, tau};
    auto out = decode_impl(model, s1, s2, vocab, config, floors);
    result.output = out.tokens;
    result.tau_used = tau;
    result.alphas = out.alphas;
    result.p_gens = out.p_gens;
    result.p_enc1s = out.p_enc1s;
    if (out.tokens.empty()) {
      result.achieved = Relation::NEUTRAL;
      continue;
    }
    result.achieved = stance.predict(vocab.encode(out.tokens), claim_ids);
    if (result.achieved == Relation::AGREE) break;
  }
  return result;
}

}  // namespace factedit
