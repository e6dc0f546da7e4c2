#include "factedit/config.hpp"

#include <fstream>
#include <sstream>

namespace factedit {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

}  // namespace

KeyValueConfig KeyValueConfig::from_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file: " + path);
  KeyValueConfig cfg;
  std::string line;
  long lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw ConfigError(path + ":" + std::to_string(lineno) + ": expected key = value");
    cfg.set(trim(line.substr(0, eq)), trim(line.substr(eq + 1)));
  }
  return cfg;
}

std::string KeyValueConfig::get_str(const std::string& key, const std::string& fallback) const {
  auto it = values_.find(key);
  return it == values_.end() ? fallback : it->second;
}

long KeyValueConfig::get_int(const std::string& key, long fallback) const {
  auto it = values_.find(key);
  if (it == values_.end()) return fallback;
  try {
    return std::stol(it->second);
  } catch (const std::exception&) {
    throw ConfigError("config key '" + key + "': not an integer: " + it->second);
  }
}

double KeyValueConfig::get_real(const std::string& key, double fallback) const {
  auto it = values_.find(key);
  if (it == values_.end()) return fallback;
  try {
    return std::stod(it->second);
  } catch (const std::exception&) {
    throw ConfigError("config key '" + key + "': not a number: " + it->second);
  }
}

bool KeyValueConfig::get_bool(const std::string& key, bool fallback) const {
  auto it = values_.find(key);
  if (it == values_.end()) return fallback;
  if (it->second == "true" || it->second == "1" || it->second == "yes") return true;
  if (it->second == "false" || it->second == "0" || it->second == "no") return false;
  throw ConfigError("config key '" + key + "': not a boolean: " + it->second);
}

std::string PipelineConfig::checkpoint_path(const std::string& stage) const {
  return out_dir + "/" + stage + ".ckpt";
}

std::string PipelineConfig::data_path(const std::string& split) const {
  return (corpus_dir.empty() ? out_dir + "/data" : corpus_dir) + "/" + split + ".jsonl";
}

PipelineConfig PipelineConfig::from_config(const KeyValueConfig& kv) {
  PipelineConfig c;
  c.seed = static_cast<std::uint64_t>(kv.get_int("seed", 1));
  c.out_dir = kv.get_str("out_dir", "out");
  c.corpus_dir = kv.get_str("corpus_dir", "");

  c.synth.seed = c.seed;
  c.synth.num_entities = static_cast<int>(kv.get_int("synth.entities", 120));
  c.synth.pairs_per_entity = static_cast<int>(kv.get_int("synth.pairs_per_entity", 42));
  c.synth.bias_cue = kv.get_str("synth.bias_cue", "");
  c.synth.bias_probability = kv.get_real("synth.bias_probability", 0.0);
  c.synth.frac_agree = kv.get_real("synth.frac_agree", 0.35);
  c.synth.frac_disagree = kv.get_real("synth.frac_disagree", 0.35);
  c.vocab_min_count = static_cast<int>(kv.get_int("vocab.min_count", 1));

  c.emb_dim = static_cast<int>(kv.get_int("model.emb_dim", 100));
  c.stance_hidden = static_cast<int>(kv.get_int("model.stance_hidden", 100));
  c.masker_hidden = static_cast<int>(kv.get_int("model.masker_hidden", 100));
  c.generator_hidden = static_cast<int>(kv.get_int("model.generator_hidden", 256));
  c.pretrained_embeddings = kv.get_str("model.pretrained_embeddings", "");

  c.stance_train.epochs = static_cast<int>(kv.get_int("stance.epochs", 10));
  c.stance_train.batch_size = static_cast<int>(kv.get_int("stance.batch_size", 16));
  c.stance_train.lr = kv.get_real("stance.lr", 1e-3);
  c.stance_train.seed = c.seed;

  c.masker.lambda = kv.get_real("masker.lambda", 0.2);
  c.masker.syntactic_reg = kv.get_bool("masker.syntactic_reg", true);
  c.masker.reg_weight = kv.get_real("masker.reg_weight", 1.0);
  c.masker.rounding_threshold = kv.get_real("masker.threshold", 0.5);
  c.masker.epochs = static_cast<int>(kv.get_int("masker.epochs", 100));
  c.masker.patience = static_cast<int>(kv.get_int("masker.patience", 10));
  c.masker.batch_size = static_cast<int>(kv.get_int("masker.batch_size", 16));
  c.masker.lr = kv.get_real("masker.lr", 1e-3);
  c.masker.seed = c.seed;

  c.generator_train.steps = static_cast<int>(kv.get_int("generator.steps", 3000));
  c.generator_train.batch_size = static_cast<int>(kv.get_int("generator.batch_size", 64));
  c.generator_train.lr = kv.get_real("generator.lr", 1e-3);
  c.generator_train.max_target_len = static_cast<int>(kv.get_int("generator.max_target_len", 30));
  c.generator_train.seed = c.seed;

  c.inference.max_len = static_cast<int>(kv.get_int("inference.max_len", 30));
  c.inference.mode = gen_mode_from_name(kv.get_str("inference.mode", "TWO_ENCODER"));
  {
    std::istringstream ss(kv.get_str("inference.escalation", "0.0 0.15 0.30 0.45 0.60 0.75 0.90"));
    std::vector<double> sched;
    double v;
    while (ss >> v) sched.push_back(v);
    for (std::size_t i = 1; i < sched.size(); ++i)
      if (sched[i] <= sched[i - 1])
        throw ConfigError("inference.escalation must be strictly increasing");
    if (!sched.empty()) c.inference.escalation = sched;
  }

  {
    std::istringstream ss(kv.get_str("sweep.lambdas", "0.0 0.2 0.4 0.6"));
    std::vector<double> ls;
    double v;
    while (ss >> v) ls.push_back(v);
    if (!ls.empty()) c.sweep_lambdas = ls;
  }
  c.sweep_both_reg = kv.get_bool("sweep.both_reg", true);
  return c;
}

}  // namespace factedit
