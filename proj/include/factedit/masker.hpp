#pragma once

#include <unordered_map>

#include "factedit/stance.hpp"

namespace factedit {

using Mask = std::vector<double>;  // per-token in [0,1]; hard masks are 0/1

struct MaskerModel {
  std::shared_ptr<EmbeddingTable> emb;
  std::shared_ptr<BiLSTMEncoder> enc_f;  // shared by sentence and claim
  BilinearAttention align;
  std::shared_ptr<BiLSTMEncoder> enc_g;
  Linear head;  // per-token scalar logit

  MaskerModel() = default;
  MaskerModel(int vocab_size, int emb_dim, int hidden_dim, std::mt19937_64& rng);

  std::vector<TensorPtr> params() const;

  // Per-token masking probabilities as a [l x 1] tensor (differentiable).
  TensorPtr mask_logits(std::span<const int> sentence, std::span<const int> claim) const;
  Mask mask_probs(std::span<const int> sentence, std::span<const int> claim) const;
};

struct MaskerConfig {
  double lambda = 0.2;          // sparsity coefficient
  bool syntactic_reg = false;
  double reg_weight = 1.0;
  double rounding_threshold = 0.5;
  int epochs = 100;
  int patience = 10;
  int batch_size = 16;
  double lr = 1e-3;
  int span_min = 2;
  int span_max = 10;
  std::uint64_t seed = 1;
};

// Soft deletion: row i = (1 - m_i) * emb(x_i) + m_i * emb(<mask>), built on
// the embedding table the downstream classifier reads from.
TensorPtr apply_soft_mask(const TensorPtr& sentence_emb, const TensorPtr& soft_mask,
                          const EmbeddingTable& table);

// Hard deletion: token replaced by <mask> iff m_i >= threshold.
std::vector<int> apply_hard_mask(std::span<const int> sentence, const Mask& mask,
                                 double threshold);
std::vector<int> hard_mask_vector(const Mask& mask, double threshold);

// Eq objective: -log p(N on soft-masked residual) + (lambda / l) * sum(m),
// plus reg_weight/l * ||m - m'||^2 when a target mask is supplied.
TensorPtr masker_loss(const MaskerModel& model, const StanceModel& stance,
                      std::span<const int> sentence, std::span<const int> claim,
                      const MaskerConfig& config, const Mask* target_mask);

// Shortest contiguous span (length span_min..span_max) whose hard-masked
// residual the frozen classifier labels NEUTRAL; ties by highest p(N).
std::optional<Mask> target_mask_oracle(const StanceModel& stance,
                                       std::span<const int> sentence,
                                       std::span<const int> claim,
                                       const MaskerConfig& config);

struct MaskerEpochMetrics {
  double neutrality_accuracy = 0.0;  // fraction of residuals classified NEUTRAL
  double mean_mask_size = 0.0;       // fraction of tokens masked
  double delta() const { return neutrality_accuracy - mean_mask_size; }
};

struct MaskerReport {
  int epochs_run = 0;
  std::vector<MaskerEpochMetrics> dev_metrics;
  MaskerEpochMetrics best;
  int best_epoch = -1;
  long target_masks_found = 0;
  long target_masks_missing = 0;
};

// Trains on A/D pairs against the frozen classifier; early stopping on
// delta = accuracy - size with the configured patience; best-delta
// checkpoint restored before returning.
MaskerReport train_masker(MaskerModel& model, const StanceModel& stance,
                          const Vocab& vocab, const LabeledCorpus& corpus,
                          const MaskerConfig& config);

struct SweepRow {
  double lambda = 0.0;
  bool syntactic_reg = false;
  double accuracy = 0.0;
  double mean_size = 0.0;
  double delta = 0.0;
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
};

// One full train_masker run per (lambda, reg) configuration, evaluated on
// the dev split with gold-mask P/R/F1 where gold masks exist.
std::vector<SweepRow> lambda_sweep(const StanceModel& stance, const Vocab& vocab,
                                   const LabeledCorpus& train_corpus,
                                   const LabeledCorpus& eval_corpus,
                                   const std::vector<double>& lambdas,
                                   const std::vector<bool>& reg_settings,
                                   const MaskerConfig& base_config, int emb_dim,
                                   int hidden_dim);

std::string sweep_table_text(const std::vector<SweepRow>& rows);
std::string sweep_table_tsv(const std::vector<SweepRow>& rows);

}  // namespace factedit
