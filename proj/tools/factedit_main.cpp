#include <iostream>
#include <string>

#include "CLI11.hpp"
#include "factedit/pipeline.hpp"

using namespace factedit;

namespace {

struct CommonOpts {
  std::string config_path;
  long seed = -1;         // -1 = keep config value
  std::string out_dir;    // empty = keep config value
};

void add_common(CLI::App* app, CommonOpts& opts) {
  app->add_option("--config", opts.config_path, "key = value configuration file");
  app->add_option("--seed", opts.seed, "override the configured random seed");
  app->add_option("--out", opts.out_dir, "override the configured output directory");
}

PipelineConfig resolve_config(const CommonOpts& opts) {
  KeyValueConfig kv;
  if (!opts.config_path.empty()) kv = KeyValueConfig::from_file(opts.config_path);
  if (opts.seed >= 0) kv.set("seed", std::to_string(opts.seed));
  if (!opts.out_dir.empty()) kv.set("out_dir", opts.out_dir);
  return PipelineConfig::from_config(kv);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"fact-guided sentence modification pipeline"};
  app.require_subcommand(1);

  CommonOpts gen_o, train_o, rewrite_o, eval_o, sweep_o, aug_o, evalaug_o;

  auto* gen = app.add_subcommand("gen-data", "generate the synthetic corpus splits");
  add_common(gen, gen_o);

  std::string train_stage;
  auto* train = app.add_subcommand("train", "train one pipeline stage");
  train->add_option("stage", train_stage, "classifier | masker | generator")->required();
  add_common(train, train_o);

  std::string rw_input, rw_output;
  auto* rewrite = app.add_subcommand("rewrite", "rewrite (sentence, claim) pairs");
  rewrite->add_option("--input", rw_input, "input JSONL pairs")->required();
  rewrite->add_option("--output", rw_output, "output JSONL rewrites")->required();
  add_common(rewrite, rewrite_o);

  std::string ev_rewrites, ev_gold;
  auto* eval = app.add_subcommand("eval", "score rewrites against gold annotations");
  eval->add_option("--rewrites", ev_rewrites, "rewrite JSONL file")->required();
  eval->add_option("--gold", ev_gold, "gold JSONL corpus, aligned by id")->required();
  add_common(eval, eval_o);

  auto* sweep = app.add_subcommand("sweep-lambda", "sparsity coefficient sweep");
  add_common(sweep, sweep_o);

  std::string aug_corpus, aug_output, aug_mode = "pipeline";
  auto* augment = app.add_subcommand("augment", "augment a corpus with generated pairs");
  augment->add_option("--corpus", aug_corpus, "corpus JSONL to augment")->required();
  augment->add_option("--output", aug_output, "augmented corpus JSONL")->required();
  augment->add_option("--mode", aug_mode, "pipeline | copy-claim")
      ->check(CLI::IsMember({"pipeline", "copy-claim"}));
  add_common(augment, aug_o);

  auto* evalaug =
      app.add_subcommand("eval-augmentation", "run the bias-reduction experiment");
  add_common(evalaug, evalaug_o);

  CLI11_PARSE(app, argc, argv);

  try {
    if (gen->parsed()) return cmd_gen_data(resolve_config(gen_o));
    if (train->parsed()) return cmd_train(train_stage, resolve_config(train_o));
    if (rewrite->parsed())
      return cmd_rewrite(resolve_config(rewrite_o), rw_input, rw_output);
    if (eval->parsed()) return cmd_eval(resolve_config(eval_o), ev_rewrites, ev_gold);
    if (sweep->parsed()) return cmd_sweep_lambda(resolve_config(sweep_o));
    if (augment->parsed())
      return cmd_augment(resolve_config(aug_o), aug_corpus, aug_output,
                         aug_mode == "copy-claim" ? AugmentMode::COPY_CLAIM
                                                  : AugmentMode::PIPELINE);
    if (evalaug->parsed()) return cmd_eval_augmentation(resolve_config(evalaug_o));
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  std::cerr << "error: no subcommand\n";
  return 1;
}
