#pragma once

#include <map>
#include <string>
#include <vector>

#include "factedit/corpus.hpp"
#include "factedit/generator.hpp"
#include "factedit/masker.hpp"

namespace factedit {

class ConfigError : public std::runtime_error {
 public:
  explicit ConfigError(const std::string& msg) : std::runtime_error(msg) {}
};

// `key = value` lines, '#' comments. Later assignments win, so CLI
// overrides are applied by re-setting keys.
class KeyValueConfig {
 public:
  static KeyValueConfig from_file(const std::string& path);
  void set(const std::string& key, const std::string& value) { values_[key] = value; }
  bool has(const std::string& key) const { return values_.count(key) > 0; }

  std::string get_str(const std::string& key, const std::string& fallback) const;
  long get_int(const std::string& key, long fallback) const;
  double get_real(const std::string& key, double fallback) const;
  bool get_bool(const std::string& key, bool fallback) const;

 private:
  std::map<std::string, std::string> values_;
};

struct PipelineConfig {
  std::uint64_t seed = 1;
  std::string out_dir = "out";
  std::string corpus_dir;  // defaults to <out_dir>/data

  // Corpus generation.
  SynthConfig synth;
  int vocab_min_count = 1;

  // Model sizes.
  int emb_dim = 100;
  int stance_hidden = 100;
  int masker_hidden = 100;
  int generator_hidden = 256;
  std::string pretrained_embeddings;  // optional text file

  // Training budgets.
  StanceTrainConfig stance_train;
  MaskerConfig masker;
  GeneratorTrainConfig generator_train;
  InferenceConfig inference;

  // Lambda sweep.
  std::vector<double> sweep_lambdas = {0.0, 0.2, 0.4, 0.6};
  bool sweep_both_reg = true;

  std::string checkpoint_path(const std::string& stage) const;
  std::string data_path(const std::string& split) const;

  static PipelineConfig from_config(const KeyValueConfig& kv);
};

}  // namespace factedit
