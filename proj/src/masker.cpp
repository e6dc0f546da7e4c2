#include "factedit/masker.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <sstream>

#include "factedit/metrics.hpp"

namespace factedit {

MaskerModel::MaskerModel(int vocab_size, int emb_dim, int hidden_dim, std::mt19937_64& rng)
    : emb(std::make_shared<EmbeddingTable>(vocab_size, emb_dim, rng, "masker")),
      enc_f(std::make_shared<BiLSTMEncoder>(emb_dim, hidden_dim, rng, "masker.f")),
      align(2 * hidden_dim, rng, "masker.align"),
      enc_g(std::make_shared<BiLSTMEncoder>(2 * hidden_dim, hidden_dim, rng, "masker.g")),
      head(2 * hidden_dim, 1, rng, "masker.head") {}

std::vector<TensorPtr> MaskerModel::params() const {
  std::vector<TensorPtr> ps = {emb->weight};
  for (const auto& grp : {enc_f->params(), align.params(), enc_g->params(), head.params()})
    ps.insert(ps.end(), grp.begin(), grp.end());
  return ps;
}

TensorPtr MaskerModel::mask_logits(std::span<const int> sentence,
                                   std::span<const int> claim) const {
  if (sentence.empty() || claim.empty())
    throw CorpusError("mask_probs: empty sentence or claim");
  auto e = enc_f->run(emb->embed(sentence));
  auto c = enc_f->run(emb->embed(claim));
  auto [a, ctx] = align.attend(e, c);
  auto z = add(e, ctx);
  auto g = enc_g->run(z);
  return head.apply(g);  // [l x 1]
}

Mask MaskerModel::mask_probs(std::span<const int> sentence,
                             std::span<const int> claim) const {
  auto p = sigmoid(mask_logits(sentence, claim));
  return Mask(p->values.begin(), p->values.end());
}

TensorPtr apply_soft_mask(const TensorPtr& sentence_emb, const TensorPtr& soft_mask,
                          const EmbeddingTable& table) {
  const std::size_t l = sentence_emb->rows();
  if (soft_mask->rows() != l || soft_mask->cols() != 1)
    throw CorpusError("apply_soft_mask: mask length " + std::to_string(soft_mask->rows()) +
                      " does not match sentence length " + std::to_string(l));
  const std::size_t e = sentence_emb->cols();
  auto ones_row = full({1, e}, 1.0);
  auto m_full = matmul(soft_mask, ones_row);               // [l x e]
  auto keep = sub(full({l, e}, 1.0), m_full);
  auto star = matmul(full({l, 1}, 1.0), table.mask_row()); // [l x e]
  return add(mul(keep, sentence_emb), mul(m_full, star));
}

std::vector<int> apply_hard_mask(std::span<const int> sentence, const Mask& mask,
                                 double threshold) {
  if (sentence.size() != mask.size())
    throw CorpusError("apply_hard_mask: length mismatch");
  std::vector<int> out(sentence.begin(), sentence.end());
  for (std::size_t i = 0; i < out.size(); ++i)
    if (mask[i] >= threshold) out[i] = kMaskTok;
  return out;
}

std::vector<int> hard_mask_vector(const Mask& mask, double threshold) {
  std::vector<int> out(mask.size());
  for (std::size_t i = 0; i < mask.size(); ++i) out[i] = mask[i] >= threshold ? 1 : 0;
  return out;
}

TensorPtr masker_loss(const MaskerModel& model, const StanceModel& stance,
                      std::span<const int> sentence, std::span<const int> claim,
                      const MaskerConfig& config, const Mask* target_mask) {
  const auto l = static_cast<double>(sentence.size());
  auto m = sigmoid(model.mask_logits(sentence, claim));
  auto soft = apply_soft_mask(stance.emb->embed(sentence), m, *stance.emb);
  auto p_n = stance.neutrality_prob(soft, claim);
  auto loss = scale(log_t(add_const(p_n, 1e-12)), -1.0);
  if (config.lambda > 0.0)
    loss = add(loss, scale(sum(m), config.lambda / l));
  if (config.syntactic_reg && target_mask != nullptr) {
    if (target_mask->size() != sentence.size())
      throw CorpusError("masker_loss: target mask length mismatch");
    auto target = make_tensor({sentence.size(), 1},
                              std::vector<double>(target_mask->begin(), target_mask->end()));
    auto diff = sub(m, target);
    loss = add(loss, scale(sum(mul(diff, diff)), config.reg_weight / l));
  }
  return loss;
}

std::optional<Mask> target_mask_oracle(const StanceModel& stance,
                                       std::span<const int> sentence,
                                       std::span<const int> claim,
                                       const MaskerConfig& config) {
  const int l = static_cast<int>(sentence.size());
  for (int len = config.span_min; len <= std::min(config.span_max, l); ++len) {
    double best_pn = -1.0;
    int best_start = -1;
    for (int start = 0; start + len <= l; ++start) {
      std::vector<int> residual(sentence.begin(), sentence.end());
      std::fill(residual.begin() + start, residual.begin() + start + len, kMaskTok);
      auto probs = stance.classify(residual, claim);
      if (argmax_relation(probs) == Relation::NEUTRAL && probs[2] > best_pn) {
        best_pn = probs[2];
        best_start = start;
      }
    }
    if (best_start >= 0) {
      Mask m(sentence.size(), 0.0);
      std::fill(m.begin() + best_start, m.begin() + best_start + len, 1.0);
      return m;
    }
  }
  return std::nullopt;
}

namespace {

MaskerEpochMetrics eval_masker(const MaskerModel& model, const StanceModel& stance,
                               const Vocab& vocab,
                               const std::vector<const ClaimPair*>& pairs,
                               const MaskerConfig& config) {
  MaskerEpochMetrics m;
  if (pairs.empty()) return m;
  long neutral = 0;
  double size_sum = 0.0;
  for (const auto* p : pairs) {
    auto s = vocab.encode(p->sentence);
    auto c = vocab.encode(p->claim);
    Mask probs = model.mask_probs(s, c);
    auto residual = apply_hard_mask(s, probs, config.rounding_threshold);
    if (stance.predict(residual, c) == Relation::NEUTRAL) ++neutral;
    long masked = std::count(residual.begin(), residual.end(), kMaskTok) -
                  std::count(s.begin(), s.end(), kMaskTok);
    size_sum += static_cast<double>(masked) / static_cast<double>(s.size());
  }
  m.neutrality_accuracy = static_cast<double>(neutral) / pairs.size();
  m.mean_mask_size = size_sum / pairs.size();
  return m;
}

}  // namespace

MaskerReport train_masker(MaskerModel& model, const StanceModel& stance,
                          const Vocab& vocab, const LabeledCorpus& corpus,
                          const MaskerConfig& config) {
  if (!stance.trained_frozen)
    throw CorpusError("train_masker: stance classifier must be trained and frozen");
  std::vector<const ClaimPair*> polar;
  for (const auto& p : corpus)
    if (p.relation != Relation::NEUTRAL) polar.push_back(&p);
  if (polar.empty()) throw CorpusError("train_masker: no AGREE/DISAGREE pairs");

  std::mt19937_64 rng(config.seed);
  std::shuffle(polar.begin(), polar.end(), rng);
  const std::size_t n_dev = std::max<std::size_t>(1, polar.size() / 10);
  std::vector<const ClaimPair*> dev(polar.begin(), polar.begin() + n_dev);
  std::vector<const ClaimPair*> train(polar.begin() + n_dev, polar.end());

  MaskerReport report;
  // Precomputed per-pair target masks; classifier queries dominate, so
  // compute once and reuse across epochs.
  std::unordered_map<const ClaimPair*, std::optional<Mask>> target_cache;
  if (config.syntactic_reg) {
    for (const auto* p : train) {
      auto s = vocab.encode(p->sentence);
      auto c = vocab.encode(p->claim);
      auto t = target_mask_oracle(stance, s, c, config);
      if (t) ++report.target_masks_found;
      else ++report.target_masks_missing;
      target_cache.emplace(p, std::move(t));
    }
  }

  auto params = model.params();
  Optimizer opt(OptMethod::ADAM, config.lr);
  double best_delta = -1e9;
  std::vector<std::vector<double>> best_params;
  int since_best = 0;

  for (int epoch = 0; epoch < config.epochs; ++epoch) {
    std::shuffle(train.begin(), train.end(), rng);
    for (std::size_t i = 0; i < train.size(); i += config.batch_size) {
      const std::size_t end = std::min(train.size(), i + config.batch_size);
      TensorPtr batch_loss;
      for (std::size_t k = i; k < end; ++k) {
        const auto* p = train[k];
        auto s = vocab.encode(p->sentence);
        auto c = vocab.encode(p->claim);
        const Mask* target = nullptr;
        if (config.syntactic_reg) {
          auto it = target_cache.find(p);
          if (it != target_cache.end() && it->second) target = &*it->second;
        }
        auto loss = masker_loss(model, stance, s, c, config, target);
        batch_loss = batch_loss ? add(batch_loss, loss) : loss;
      }
      Tape::backward(scale(batch_loss, 1.0 / static_cast<double>(end - i)));
      opt.step(params);
    }
    auto metrics = eval_masker(model, stance, vocab, dev, config);
    report.dev_metrics.push_back(metrics);
    ++report.epochs_run;
    if (metrics.delta() > best_delta) {
      best_delta = metrics.delta();
      report.best = metrics;
      report.best_epoch = epoch;
      best_params.clear();
      for (const auto& p : params) best_params.push_back(p->values);
      since_best = 0;
    } else if (++since_best >= config.patience) {
      break;
    }
  }
  for (std::size_t i = 0; i < params.size(); ++i) params[i]->values = best_params[i];
  return report;
}

std::vector<SweepRow> lambda_sweep(const StanceModel& stance, const Vocab& vocab,
                                   const LabeledCorpus& train_corpus,
                                   const LabeledCorpus& eval_corpus,
                                   const std::vector<double>& lambdas,
                                   const std::vector<bool>& reg_settings,
                                   const MaskerConfig& base_config, int emb_dim,
                                   int hidden_dim) {
  std::vector<SweepRow> rows;
  for (bool reg : reg_settings) {
    for (double lambda : lambdas) {
      MaskerConfig cfg = base_config;
      cfg.lambda = lambda;
      cfg.syntactic_reg = reg;
      std::mt19937_64 rng(cfg.seed);
      MaskerModel model(vocab.size(), emb_dim, hidden_dim, rng);
      train_masker(model, stance, vocab, train_corpus, cfg);

      std::vector<const ClaimPair*> eval_pairs;
      for (const auto& p : eval_corpus)
        if (p.relation != Relation::NEUTRAL) eval_pairs.push_back(&p);
      auto metrics = eval_masker(model, stance, vocab, eval_pairs, cfg);

      std::vector<std::vector<int>> pred, gold;
      for (const auto* p : eval_pairs) {
        if (!p->gold_mask) continue;
        auto s = vocab.encode(p->sentence);
        auto c = vocab.encode(p->claim);
        pred.push_back(hard_mask_vector(model.mask_probs(s, c), cfg.rounding_threshold));
        gold.push_back(*p->gold_mask);
      }
      SweepRow row;
      row.lambda = lambda;
      row.syntactic_reg = reg;
      row.accuracy = 100.0 * metrics.neutrality_accuracy;
      row.mean_size = 100.0 * metrics.mean_mask_size;
      row.delta = row.accuracy - row.mean_size;
      if (!pred.empty()) {
        auto prf = mask_prf(pred, gold);
        row.precision = 100.0 * prf.precision;
        row.recall = 100.0 * prf.recall;
        row.f1 = 100.0 * prf.f1;
      }
      rows.push_back(row);
    }
  }
  return rows;
}

std::string sweep_table_text(const std::vector<SweepRow>& rows) {
  std::ostringstream os;
  os << std::fixed << std::setprecision(1);
  os << std::setw(7) << "lambda" << std::setw(5) << "reg" << std::setw(8) << "acc"
     << std::setw(8) << "size" << std::setw(8) << "delta" << std::setw(8) << "prec"
     << std::setw(8) << "rec" << std::setw(8) << "f1" << '\n';
  for (const auto& r : rows)
    os << std::setw(7) << r.lambda << std::setw(5) << (r.syntactic_reg ? "yes" : "no")
       << std::setw(8) << r.accuracy << std::setw(8) << r.mean_size << std::setw(8)
       << r.delta << std::setw(8) << r.precision << std::setw(8) << r.recall
       << std::setw(8) << r.f1 << '\n';
  return os.str();
}

std::string sweep_table_tsv(const std::vector<SweepRow>& rows) {
  std::ostringstream os;
  os << "lambda\tsyntactic_reg\taccuracy\tmean_size\tdelta\tprecision\trecall\tf1\n";
  for (const auto& r : rows)
    os << r.lambda << '\t' << (r.syntactic_reg ? 1 : 0) << '\t' << r.accuracy << '\t'
       << r.mean_size << '\t' << r.delta << '\t' << r.precision << '\t' << r.recall
       << '\t' << r.f1 << '\n';
  return os.str();
}

}  // namespace factedit
