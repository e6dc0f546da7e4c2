#pragma once

#include <optional>
#include <random>
#include <string>
#include <unordered_map>
#include <vector>

#include "factedit/layers.hpp"

namespace factedit {

enum class Relation { AGREE, DISAGREE, NEUTRAL };

std::string relation_name(Relation r);
Relation relation_from_name(const std::string& s);

using Tokens = std::vector<std::string>;

struct ClaimPair {
  std::string id;
  Tokens claim;
  Tokens sentence;
  Relation relation = Relation::NEUTRAL;
  std::string paragraph_id;
  std::vector<Tokens> siblings;
  std::optional<std::vector<int>> gold_mask;  // 0/1 per sentence token
  std::optional<Tokens> gold_updated;
};

using LabeledCorpus = std::vector<ClaimPair>;

class CorpusError : public std::runtime_error {
 public:
  explicit CorpusError(const std::string& msg) : std::runtime_error(msg) {}
};

// Lowercase, whitespace split, punctuation detached as single-char tokens.
Tokens tokenize(const std::string& text);
std::string detokenize(const Tokens& toks);

// Token <-> id mapping on top of the five reserved ids.
struct Vocab {
  std::vector<std::string> id_to_token;  // index = id
  std::unordered_map<std::string, int> token_to_id;

  int size() const { return static_cast<int>(id_to_token.size()); }
  int id_of(const std::string& tok) const {
    auto it = token_to_id.find(tok);
    return it == token_to_id.end() ? kUnk : it->second;
  }
  std::vector<int> encode(const Tokens& toks) const;
  Tokens decode(const std::vector<int>& ids) const;
};

// Tokens with count >= min_count, ordered by descending count then
// lexicographic, after the reserved ids.
Vocab build_vocab(const LabeledCorpus& corpus, int min_count);

LabeledCorpus load_jsonl(const std::string& path);
void save_jsonl(const LabeledCorpus& corpus, const std::string& path);

// ---- synthetic slot-template corpus -----------------------------------

struct SynthConfig {
  std::uint64_t seed = 1;
  int num_entities = 120;
  int pairs_per_entity = 42;  // target corpus size ~= entities * pairs_per_entity
  std::string bias_cue;       // empty = no bias injection
  double bias_probability = 0.0;
  double frac_agree = 0.35;
  double frac_disagree = 0.35;  // remainder is neutral
  double split_train = 0.8;
  double split_dev = 0.1;  // remainder is test
};

struct SynthCorpus {
  LabeledCorpus train, dev, test;
  // Cue-free pairs over test entities where each claim appears with both
  // an agreeing and a disagreeing sentence (A/D labels only).
  LabeledCorpus symmetric;
};

SynthCorpus generate_synthetic(const SynthConfig& config);

// Ground-truth relation by direct slot comparison on the synthetic
// surface forms; independent of any learned model.
Relation synthetic_label_oracle(const ClaimPair& pair);

// Claim template instantiated with the sentence's own slot value, i.e. a
// claim the sentence agrees with. Empty when the sentence does not match
// any synthetic template.
std::optional<Tokens> synthetic_restating_claim(const Tokens& sentence);

}  // namespace factedit
