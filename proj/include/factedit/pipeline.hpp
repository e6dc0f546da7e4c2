#pragma once

#include "factedit/checkpoint.hpp"
#include "factedit/config.hpp"
#include "factedit/generator.hpp"
#include "factedit/metrics.hpp"

namespace factedit {

class PipelineError : public std::runtime_error {
 public:
  explicit PipelineError(const std::string& msg) : std::runtime_error(msg) {}
};

struct StanceBundle {
  StanceModel model;
  Vocab vocab;
};

// Checkpoint loading; a missing prerequisite names the stage to train first.
StanceBundle load_stance_bundle(const PipelineConfig& cfg);
MaskerModel load_masker_model(const PipelineConfig& cfg, const Vocab& vocab);
GeneratorModel load_generator_model(const PipelineConfig& cfg, const Vocab& vocab);

std::vector<std::string> stance_param_order(const StanceModel& m);

// One fully processed input pair.
struct RewriteRecord {
  std::string id;
  Tokens sentence, claim;
  Tokens residual;  // hard-masked sentence, deletions rendered "<mask>"
  Tokens output;    // S+
  Relation achieved = Relation::NEUTRAL;
  double tau_used = 0.0;
  std::vector<double> alphas, p_gens, p_enc1s;
  std::string error;  // nonempty when the pair could not be processed
};

RewriteRecord rewrite_pair(const StanceModel& stance, const MaskerModel& masker,
                           const GeneratorModel& generator, const Vocab& vocab,
                           const PipelineConfig& cfg, const ClaimPair& pair);

std::vector<RewriteRecord> load_rewrites(const std::string& path);
void save_rewrites(const std::vector<RewriteRecord>& records, const std::string& path);

enum class AugmentMode { PIPELINE, COPY_CLAIM };

struct AugmentResult {
  LabeledCorpus augmented_pairs;  // new AGREE pairs + regenerated DISAGREE pairs
  long new_agree = 0;
  long regenerated_disagree = 0;
  long failed = 0;  // escalation never reached AGREE; excluded from output
};

AugmentResult augment_corpus(const StanceModel& stance, const MaskerModel& masker,
                             const GeneratorModel& generator, const Vocab& vocab,
                             const PipelineConfig& cfg, const LabeledCorpus& corpus,
                             AugmentMode mode);

// ---- CLI entry points; each returns a process exit code ----------------

int cmd_gen_data(const PipelineConfig& cfg);
int cmd_train(const std::string& stage, const PipelineConfig& cfg);
int cmd_rewrite(const PipelineConfig& cfg, const std::string& input_path,
                const std::string& output_path);
int cmd_eval(const PipelineConfig& cfg, const std::string& rewrites_path,
             const std::string& gold_path);
int cmd_sweep_lambda(const PipelineConfig& cfg);
int cmd_augment(const PipelineConfig& cfg, const std::string& corpus_path,
                const std::string& output_path, AugmentMode mode);
int cmd_eval_augmentation(const PipelineConfig& cfg);

// Shared by cmd_eval_augmentation and the acceptance suite.
struct AugmentationExperiment {
  double unaugmented_accuracy = 0.0;
  double augmented_accuracy = 0.0;
  double claim_only_accuracy = 0.0;   // probe on the biased test split
  double majority_fraction = 0.0;     // majority-class share of that split
  long augmented_added = 0;
  long augment_failed = 0;
};

AugmentationExperiment run_augmentation_experiment(const PipelineConfig& cfg);

}  // namespace factedit
