#pragma once

#include <array>

#include "factedit/corpus.hpp"
#include "factedit/layers.hpp"
#include "factedit/optim.hpp"

namespace factedit {

// Frozen 3-way relation classifier rel(S, C): align both sequences with
// bilinear attention, pool, classify. Supervises the masker through its
// NEUTRAL probability and judges generator outputs.
struct StanceModel {
  std::shared_ptr<EmbeddingTable> emb;
  std::shared_ptr<BiLSTMEncoder> encoder;  // shared between sentence and claim
  BilinearAttention align;
  MLP head;  // 3 logits: AGREE, DISAGREE, NEUTRAL
  bool trained_frozen = false;

  StanceModel() = default;
  StanceModel(int vocab_size, int emb_dim, int hidden_dim, std::mt19937_64& rng);

  std::vector<TensorPtr> params() const;
  void freeze();

  // Probabilities [1 x 3] from raw sentence embedding rows (soft or hard).
  TensorPtr probs_from_embeddings(const TensorPtr& sentence_emb,
                                  std::span<const int> claim) const;
  std::array<double, 3> classify(std::span<const int> sentence,
                                 std::span<const int> claim) const;
  Relation predict(std::span<const int> sentence, std::span<const int> claim) const;
  // p(NEUTRAL); differentiable w.r.t. soft sentence embeddings.
  TensorPtr neutrality_prob(const TensorPtr& sentence_emb,
                            std::span<const int> claim) const;
  double neutrality_prob(std::span<const int> sentence, std::span<const int> claim) const;
};

Relation argmax_relation(const std::array<double, 3>& p);

struct StanceTrainConfig {
  int epochs = 10;
  int batch_size = 16;
  double lr = 1e-3;
  double dev_fraction = 0.1;
  std::uint64_t seed = 1;
};

struct StanceReport {
  int epochs_run = 0;
  std::vector<double> dev_accuracy;  // per epoch
  double best_dev_accuracy = 0.0;
  long neutral_pairs_added = 0;
  long neutral_pairs_skipped = 0;
};

// One NEUTRAL pair per A/D pair, sentence sampled uniformly from the
// paragraph siblings (never the polarizing sentence itself).
LabeledCorpus build_neutral_negatives(const LabeledCorpus& corpus, std::uint64_t seed,
                                      long* skipped = nullptr);

// Mask-corrupted variants of A/D pairs carrying gold span annotations:
// one copy with a contiguous span covering the annotated fact replaced
// by "<mask>" (relabeled NEUTRAL — the residual no longer states the
// fact) and one with a span disjoint from it masked (label unchanged).
// Together they teach the classifier that deleting the fact removes the
// information while deletions elsewhere do not, which is what makes its
// NEUTRAL probability a usable training signal on partially masked
// input. Pairs without a gold span are counted in `skipped`.
LabeledCorpus build_masked_negatives(const LabeledCorpus& corpus, std::uint64_t seed,
                                     long* skipped = nullptr);

// Cross-entropy training; keeps the best checkpoint by dev accuracy and
// freezes the model before returning.
StanceReport train_stance(StanceModel& model, const Vocab& vocab,
                          const LabeledCorpus& corpus, const StanceTrainConfig& config);

}  // namespace factedit
