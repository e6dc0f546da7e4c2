#include "factedit/stance.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace factedit {

StanceModel::StanceModel(int vocab_size, int emb_dim, int hidden_dim, std::mt19937_64& rng)
    : emb(std::make_shared<EmbeddingTable>(vocab_size, emb_dim, rng, "stance")),
      encoder(std::make_shared<BiLSTMEncoder>(emb_dim, hidden_dim, rng, "stance.enc")),
      align(2 * hidden_dim, rng, "stance.align"),
      head(16 * hidden_dim, 2 * hidden_dim, 3, rng, "stance.head") {}

std::vector<TensorPtr> StanceModel::params() const {
  std::vector<TensorPtr> ps = {emb->weight};
  auto enc = encoder->params();
  ps.insert(ps.end(), enc.begin(), enc.end());
  auto att = align.params();
  ps.insert(ps.end(), att.begin(), att.end());
  auto hd = head.params();
  ps.insert(ps.end(), hd.begin(), hd.end());
  return ps;
}

void StanceModel::freeze() {
  for (auto& p : params()) {
    p->frozen = true;
    p->requires_grad = false;
  }
  trained_frozen = true;
}

TensorPtr StanceModel::probs_from_embeddings(const TensorPtr& sentence_emb,
                                             std::span<const int> claim) const {
  if (sentence_emb->rows() == 0 || claim.empty())
    throw CorpusError("classify: empty sentence or claim");
  auto enc_s = encoder->run(sentence_emb);
  auto enc_c = encoder->run(emb->embed(claim));
  auto [ws, ctx_s] = align.attend(enc_s, enc_c);
  auto [wc, ctx_c] = align.attend(enc_c, enc_s);
  auto feats = concat_cols({max_cols(enc_s), mean_cols(enc_s), max_cols(enc_c),
                            mean_cols(enc_c), max_cols(ctx_s), mean_cols(ctx_s),
                            max_cols(ctx_c), mean_cols(ctx_c)});
  return softmax_rows(head.apply(feats));
}

std::array<double, 3> StanceModel::classify(std::span<const int> sentence,
                                            std::span<const int> claim) const {
  if (sentence.empty() || claim.empty())
    throw CorpusError("classify: empty sentence or claim");
  auto p = probs_from_embeddings(emb->embed(sentence), claim);
  return {p->values[0], p->values[1], p->values[2]};
}

Relation StanceModel::predict(std::span<const int> sentence,
                              std::span<const int> claim) const {
  return argmax_relation(classify(sentence, claim));
}

TensorPtr StanceModel::neutrality_prob(const TensorPtr& sentence_emb,
                                       std::span<const int> claim) const {
  return pick(probs_from_embeddings(sentence_emb, claim), 2);
}

double StanceModel::neutrality_prob(std::span<const int> sentence,
                                    std::span<const int> claim) const {
  return classify(sentence, claim)[2];
}

Relation argmax_relation(const std::array<double, 3>& p) {
  const double mx = std::max({p[0], p[1], p[2]});
  if (p[2] == mx) return Relation::NEUTRAL;  // ties break toward NEUTRAL
  return p[0] >= p[1] ? Relation::AGREE : Relation::DISAGREE;
}

LabeledCorpus build_neutral_negatives(const LabeledCorpus& corpus, std::uint64_t seed,
                                      long* skipped_out) {
  std::mt19937_64 rng(seed);
  LabeledCorpus added;
  long skipped = 0;
  for (const auto& p : corpus) {
    if (p.relation == Relation::NEUTRAL) continue;
    std::vector<const Tokens*> candidates;
    for (const auto& sib : p.siblings)
      if (sib != p.sentence) candidates.push_back(&sib);
    if (candidates.empty()) {
      ++skipped;
      continue;
    }
    std::uniform_int_distribution<std::size_t> d(0, candidates.size() - 1);
    ClaimPair n;
    n.id = p.id + "-neg";
    n.claim = p.claim;
    n.sentence = *candidates[d(rng)];
    n.relation = Relation::NEUTRAL;
    n.paragraph_id = p.paragraph_id;
    added.push_back(std::move(n));
  }
  if (skipped_out) *skipped_out = skipped;
  return added;
}

LabeledCorpus build_masked_negatives(const LabeledCorpus& corpus, std::uint64_t seed,
                                     long* skipped_out) {
  std::mt19937_64 rng(seed);
  LabeledCorpus added;
  long skipped = 0;
  const std::string mask_tok = "<mask>";
  for (const auto& p : corpus) {
    if (p.relation == Relation::NEUTRAL) continue;
    int g0 = -1, g1 = -1;  // gold span [g0, g1)
    if (p.gold_mask) {
      for (std::size_t i = 0; i < p.gold_mask->size(); ++i)
        if ((*p.gold_mask)[i]) {
          if (g0 < 0) g0 = static_cast<int>(i);
          g1 = static_cast<int>(i) + 1;
        }
    }
    if (g0 < 0) {
      ++skipped;
      continue;
    }
    const int len = static_cast<int>(p.sentence.size());
    // Covering variants: spans containing the whole gold span are
    // NEUTRAL — one masking exactly the fact (so minimal deletions are
    // learned reliably) and one extended by 0-1 tokens per side (so
    // slightly wider deletions are too). Extensions stay small to keep
    // covering and disjoint span widths overlapping; otherwise the
    // classifier can key on mask width instead of mask position.
    std::uniform_int_distribution<int> ext(0, 1);
    for (int variant = 0; variant < 2; ++variant) {
      const int a = variant == 0 ? g0 : std::max(0, g0 - ext(rng));
      const int b = variant == 0 ? g1 : std::min(len, g1 + ext(rng));
      ClaimPair n = p;
      n.id = p.id + "-mneu" + std::to_string(variant);
      n.relation = Relation::NEUTRAL;
      n.siblings.clear();
      n.gold_mask.reset();
      n.gold_updated.reset();
      for (int i = a; i < b; ++i) n.sentence[i] = mask_tok;
      added.push_back(std::move(n));
    }
    // Disjoint variant: masking away from the fact keeps the label.
    {
      std::uniform_int_distribution<int> span_len(1, 3);
      const int l = span_len(rng);
      std::vector<int> starts;
      for (int s = 0; s + l <= len; ++s)
        if (s + l <= g0 || s >= g1) starts.push_back(s);
      if (!starts.empty()) {
        std::uniform_int_distribution<std::size_t> pickd(0, starts.size() - 1);
        const int s = starts[pickd(rng)];
        ClaimPair n = p;
        n.id = p.id + "-mpol";
        n.siblings.clear();
        n.gold_mask.reset();
        n.gold_updated.reset();
        for (int i = s; i < s + l; ++i) n.sentence[i] = mask_tok;
        added.push_back(std::move(n));
      }
    }
  }
  if (skipped_out) *skipped_out = skipped;
  return added;
}

namespace {

int label_index(Relation r) { return static_cast<int>(r); }

double eval_accuracy(const StanceModel& model, const Vocab& vocab,
                     const std::vector<const ClaimPair*>& pairs) {
  long hits = 0;
  for (const auto* p : pairs) {
    auto s = vocab.encode(p->sentence);
    auto c = vocab.encode(p->claim);
    if (model.predict(s, c) == p->relation) ++hits;
  }
  return pairs.empty() ? 0.0 : static_cast<double>(hits) / pairs.size();
}

}  // namespace

StanceReport train_stance(StanceModel& model, const Vocab& vocab,
                          const LabeledCorpus& corpus, const StanceTrainConfig& config) {
  bool seen[3] = {false, false, false};
  for (const auto& p : corpus) seen[label_index(p.relation)] = true;
  if (!(seen[0] && seen[1] && seen[2]))
    throw CorpusError("train_stance: corpus must contain AGREE, DISAGREE and NEUTRAL pairs");

  std::mt19937_64 rng(config.seed);
  std::vector<const ClaimPair*> all;
  for (const auto& p : corpus) all.push_back(&p);
  std::shuffle(all.begin(), all.end(), rng);
  const std::size_t n_dev = std::max<std::size_t>(1, all.size() * config.dev_fraction);
  std::vector<const ClaimPair*> dev(all.begin(), all.begin() + n_dev);
  std::vector<const ClaimPair*> train(all.begin() + n_dev, all.end());

  auto params = model.params();
  Optimizer opt(OptMethod::ADAM, config.lr);
  StanceReport report;
  double best_acc = -1.0;
  std::vector<std::vector<double>> best_params;

  for (int epoch = 0; epoch < config.epochs; ++epoch) {
    std::shuffle(train.begin(), train.end(), rng);
    for (std::size_t i = 0; i < train.size(); i += config.batch_size) {
      const std::size_t end = std::min(train.size(), i + config.batch_size);
      TensorPtr batch_loss;
      for (std::size_t k = i; k < end; ++k) {
        const auto* p = train[k];
        auto s = vocab.encode(p->sentence);
        auto c = vocab.encode(p->claim);
        auto probs = model.probs_from_embeddings(model.emb->embed(s), c);
        auto nll = scale(log_t(add_const(pick(probs, label_index(p->relation)), 1e-12)), -1.0);
        batch_loss = batch_loss ? add(batch_loss, nll) : nll;
      }
      Tape::backward(scale(batch_loss, 1.0 / static_cast<double>(end - i)));
      opt.step(params);
    }
    const double acc = eval_accuracy(model, vocab, dev);
    report.dev_accuracy.push_back(acc);
    ++report.epochs_run;
    if (acc > best_acc) {
      best_acc = acc;
      best_params.clear();
      for (const auto& p : params) best_params.push_back(p->values);
    }
  }
  for (std::size_t i = 0; i < params.size(); ++i) params[i]->values = best_params[i];
  report.best_dev_accuracy = best_acc;
  model.freeze();
  return report;
}

}  // namespace factedit
