#pragma once

#include "factedit/masker.hpp"
#include "factedit/stance.hpp"

namespace factedit {

enum class GenMode { TWO_ENCODER, CONCAT, NO_COPY, CLAIM_ONLY };

std::string gen_mode_name(GenMode m);
GenMode gen_mode_from_name(const std::string& s);

// Source routing per mode: CONCAT joins residual ++ "<eos>" ++ claim into a
// single sequence fed to both slots; CLAIM_ONLY uses the claim for both.
std::pair<Tokens, Tokens> route_sources(GenMode mode, const Tokens& residual,
                                        const Tokens& claim);

struct InferenceConfig {
  int max_len = 30;
  // Gate floors stepped through in order; each floors the claim-side
  // weights (1 - alpha) and (1 - p_enc1) from below.
  std::vector<double> escalation = {0.0, 0.15, 0.30, 0.45, 0.60, 0.75, 0.90};
  GenMode mode = GenMode::TWO_ENCODER;
};

// Per-example vocabulary extension: out-of-vocabulary source tokens get
// temporary ids past the fixed vocabulary.
struct ExtendedVocab {
  int base_size = 0;
  std::vector<std::string> oov_tokens;

  int extend(const std::string& tok);  // registers if new, returns ext id
  int lookup(const Vocab& vocab, const std::string& tok) const;  // -1 if unseen
  std::string surface(const Vocab& vocab, int ext_id) const;
  int total_size() const { return base_size + static_cast<int>(oov_tokens.size()); }
};

struct EncodedSources {
  TensorPtr r1, r2;             // [l x 2H] each
  TensorPtr h0;                 // initial decoder state [1 x 2H]
  std::vector<int> ids1, ids2;  // vocab ids (OOV -> <unk>) fed to the encoders
  std::vector<int> ext1, ext2;  // extended ids per source position
  ExtendedVocab ext;
};

struct DecoderState {
  TensorPtr h, c;
  int prev_token = kBos;  // vocab id of previous output (OOV outputs -> <unk>)
  int step = 0;
  TensorPtr last_a1, last_a2;
};

// Copy-mixture output of one decode step (Eq-style three-way mixture of
// vocabulary distribution and per-source copy attention).
struct ExtendedDistribution {
  TensorPtr alpha, p_gen, p_enc1;  // [1 x 1] each
  TensorPtr p_vocab;               // [1 x V]
  TensorPtr a1, a2;                // [1 x l]
  const EncodedSources* src = nullptr;

  // Differentiable probability of one extended-vocabulary id; copy mass
  // accumulates over every source position carrying that token.
  TensorPtr prob_of(int ext_id) const;
  // Full numeric distribution over vocab + OOV ids.
  std::vector<double> dense() const;
};

struct GateFloors {
  double claim_context = 0.0;  // floors (1 - alpha)
  double claim_copy = 0.0;     // floors (1 - p_enc1)
};

struct GeneratorModel {
  std::shared_ptr<EmbeddingTable> emb;
  std::shared_ptr<BiLSTMEncoder> encoder;  // shared by both sources
  LSTMCell decoder;                        // hidden dim 2H
  TensorPtr attn_u;                        // [2H x 1]
  TensorPtr enc_gate_u;                    // [4H x 1]
  Linear gen_gate;                         // [x,h,r] -> 1
  Linear src_gate;                         // [x,h,r] -> 1
  Linear vocab_proj;                       // [h,r] -> V
  GenMode mode = GenMode::TWO_ENCODER;

  GeneratorModel() = default;
  GeneratorModel(int vocab_size, int emb_dim, int hidden_dim, std::mt19937_64& rng);

  std::vector<TensorPtr> params() const;

  EncodedSources encode_pair(const Tokens& source1, const Tokens& source2,
                             const Vocab& vocab) const;
  DecoderState initial_state(const EncodedSources& src) const;
  ExtendedDistribution decode_step(DecoderState& state, const EncodedSources& src,
                                   const GateFloors& floors = {}) const;

  Tokens greedy_decode(const Tokens& source1, const Tokens& source2, const Vocab& vocab,
                       const InferenceConfig& config, const GateFloors& floors = {}) const;
};

struct GeneratorTrainConfig {
  int steps = 3000;
  int batch_size = 64;
  double lr = 1e-3;
  int max_target_len = 30;
  std::uint64_t seed = 1;
  int report_every = 200;
};

struct GeneratorReport {
  int steps_run = 0;
  long examples_skipped = 0;  // target unreachable in extended vocabulary
  std::vector<double> loss_curve;  // mean NLL per report window
};

// Reconstruction training on AGREE pairs: input is the hard-masked
// residual of the sentence plus the claim, target is the original
// sentence. masker/stance may be null, in which case the unmasked
// sentence is used as source 1 (identity-fusion sanity setting).
GeneratorReport train_generator(GeneratorModel& model, const LabeledCorpus& agree_pairs,
                                const MaskerModel* masker, const StanceModel* stance,
                                const Vocab& vocab, const MaskerConfig& masker_config,
                                const GeneratorTrainConfig& config);

// Per-example teacher-forced negative log-likelihood (differentiable).
// Returns nullptr when the target is unreachable.
TensorPtr generator_nll(const GeneratorModel& model, const Tokens& source1,
                        const Tokens& source2, const Tokens& target, const Vocab& vocab,
                        int max_target_len);

struct RewriteResult {
  Tokens output;
  Relation achieved = Relation::NEUTRAL;
  double tau_used = 0.0;
  std::vector<double> alphas, p_gens, p_enc1s;  // per-step diagnostics of final decode
};

// Decode with progressively floored claim-side gates until the frozen
// classifier labels the output AGREE, or the schedule is exhausted.
RewriteResult rewrite_with_escalation(const GeneratorModel& model, const StanceModel& stance,
                                      const Tokens& residual, const Tokens& claim,
                                      const Vocab& vocab, const InferenceConfig& config);

}  // namespace factedit
