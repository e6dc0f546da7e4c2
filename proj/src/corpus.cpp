#include "factedit/corpus.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <tuple>
#include <fstream>
#include <map>
#include <sstream>

#include "json.hpp"

namespace factedit {

using json = nlohmann::json;

std::string relation_name(Relation r) {
  switch (r) {
    case Relation::AGREE: return "AGREE";
    case Relation::DISAGREE: return "DISAGREE";
    case Relation::NEUTRAL: return "NEUTRAL";
  }
  throw CorpusError("bad relation value");
}

Relation relation_from_name(const std::string& s) {
  if (s == "AGREE") return Relation::AGREE;
  if (s == "DISAGREE") return Relation::DISAGREE;
  if (s == "NEUTRAL") return Relation::NEUTRAL;
  throw CorpusError("unknown relation label '" + s + "'");
}

Tokens tokenize(const std::string& text) {
  Tokens out;
  std::string cur;
  auto flush = [&] {
    if (!cur.empty()) {
      out.push_back(cur);
      cur.clear();
    }
  };
  for (unsigned char ch : text) {
    if (std::isspace(ch)) {
      flush();
    } else if (std::isalnum(ch)) {
      cur.push_back(static_cast<char>(std::tolower(ch)));
    } else {
      flush();
      out.push_back(std::string(1, static_cast<char>(ch)));
    }
  }
  flush();
  return out;
}

std::string detokenize(const Tokens& toks) {
  std::string s;
  for (std::size_t i = 0; i < toks.size(); ++i) {
    if (i) s += ' ';
    s += toks[i];
  }
  return s;
}

std::vector<int> Vocab::encode(const Tokens& toks) const {
  std::vector<int> ids;
  ids.reserve(toks.size());
  for (const auto& t : toks) ids.push_back(id_of(t));
  return ids;
}

Tokens Vocab::decode(const std::vector<int>& ids) const {
  Tokens out;
  out.reserve(ids.size());
  for (int id : ids) {
    if (id < 0 || id >= size())
      throw CorpusError("decode: id " + std::to_string(id) + " out of range");
    out.push_back(id_to_token[id]);
  }
  return out;
}

Vocab build_vocab(const LabeledCorpus& corpus, int min_count) {
  std::map<std::string, long> counts;
  auto count_all = [&](const Tokens& toks) {
    for (const auto& t : toks) ++counts[t];
  };
  for (const auto& p : corpus) {
    count_all(p.claim);
    count_all(p.sentence);
    for (const auto& s : p.siblings) count_all(s);
  }
  std::vector<std::pair<std::string, long>> kept;
  for (const auto& [tok, c] : counts)
    if (c >= min_count) kept.emplace_back(tok, c);
  std::sort(kept.begin(), kept.end(), [](const auto& a, const auto& b) {
    if (a.second != b.second) return a.second > b.second;
    return a.first < b.first;
  });
  Vocab v;
  v.id_to_token = {"<pad>", "<unk>", "<mask>", "<bos>", "<eos>"};
  // Reserved surface forms occurring in the corpus (e.g. "<mask>" in
  // mask-corrupted pairs) must keep their reserved ids, not gain new ones.
  const std::vector<std::string> reserved = v.id_to_token;
  for (const auto& [tok, c] : kept)
    if (std::find(reserved.begin(), reserved.end(), tok) == reserved.end())
      v.id_to_token.push_back(tok);
  for (int i = 0; i < v.size(); ++i) v.token_to_id[v.id_to_token[i]] = i;
  return v;
}

// ---- jsonl ------------------------------------------------------------

LabeledCorpus load_jsonl(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw CorpusError("cannot open corpus file: " + path);
  LabeledCorpus corpus;
  std::string line;
  long lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    json j;
    try {
      j = json::parse(line);
    } catch (const json::exception& e) {
      throw CorpusError(path + ":" + std::to_string(lineno) + ": malformed record: " + e.what());
    }
    ClaimPair p;
    try {
      p.id = j.at("id").get<std::string>();
      p.claim = j.at("claim").get<Tokens>();
      p.sentence = j.at("sentence").get<Tokens>();
      p.relation = relation_from_name(j.at("label").get<std::string>());
      if (j.contains("paragraph_id")) p.paragraph_id = j["paragraph_id"].get<std::string>();
      if (j.contains("siblings")) p.siblings = j["siblings"].get<std::vector<Tokens>>();
      if (j.contains("gold_mask")) p.gold_mask = j["gold_mask"].get<std::vector<int>>();
      if (j.contains("gold_updated")) p.gold_updated = j["gold_updated"].get<Tokens>();
    } catch (const CorpusError&) {
      throw;
    } catch (const json::exception& e) {
      throw CorpusError(path + ":" + std::to_string(lineno) + ": bad record fields: " + e.what());
    }
    if (p.gold_mask && p.gold_mask->size() != p.sentence.size())
      throw CorpusError(path + ":" + std::to_string(lineno) + ": gold_mask length mismatch");
    corpus.push_back(std::move(p));
  }
  return corpus;
}

void save_jsonl(const LabeledCorpus& corpus, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw CorpusError("cannot write corpus file: " + path);
  for (const auto& p : corpus) {
    json j;
    j["id"] = p.id;
    j["claim"] = p.claim;
    j["sentence"] = p.sentence;
    j["label"] = relation_name(p.relation);
    if (!p.paragraph_id.empty()) j["paragraph_id"] = p.paragraph_id;
    if (!p.siblings.empty()) j["siblings"] = p.siblings;
    if (p.gold_mask) j["gold_mask"] = *p.gold_mask;
    if (p.gold_updated) j["gold_updated"] = *p.gold_updated;
    out << j.dump() << '\n';
  }
  if (!out) throw CorpusError("write failed: " + path);
}

// ---- synthetic corpus --------------------------------------------------

namespace {

enum Slot { CITY = 0, YEAR = 1, JOB = 2, COUNT = 3, NUM_SLOTS = 4 };

const std::vector<Tokens>& slot_alphabet(int slot) {
  static const std::vector<Tokens> cities = {
      {"paris"},        {"berlin"},       {"oslo"},          {"cairo"},
      {"lima"},         {"madrid"},       {"rome"},          {"dublin"},
      {"new", "york"},  {"los", "angeles"}, {"hong", "kong"}, {"cape", "town"}};
  static const std::vector<Tokens> years = [] {
    std::vector<Tokens> v;
    for (int y = 1904; y <= 1996; y += 4) v.push_back({std::to_string(y)});
    return v;
  }();
  static const std::vector<Tokens> jobs = {
      {"teacher"}, {"doctor"}, {"painter"}, {"farmer"}, {"singer"},
      {"lawyer"},  {"pilot"},  {"chef"},    {"writer"}, {"nurse"}};
  static const std::vector<Tokens> counts = [] {
    std::vector<Tokens> v;
    for (int c = 3; c <= 41; c += 2) v.push_back({std::to_string(c)});
    return v;
  }();
  switch (slot) {
    case CITY: return cities;
    case YEAR: return years;
    case JOB: return jobs;
    case COUNT: return counts;
  }
  throw CorpusError("bad slot index");
}

// Attribute anchor phrases; shared between sentence and claim templates so
// attribute identity is recoverable from the surface.
Tokens sentence_for(const std::string& name, int slot, const Tokens& value) {
  Tokens s = {name};
  auto app = [&](std::initializer_list<const char*> words) {
    for (const char* w : words) s.push_back(w);
  };
  switch (slot) {
    case CITY:
      app({"lived", "in"});
      s.insert(s.end(), value.begin(), value.end());
      app({"for", "many", "years", "."});
      break;
    case YEAR:
      app({"was", "born", "in"});
      s.insert(s.end(), value.begin(), value.end());
      app({"in", "a", "small", "village", "."});
      break;
    case JOB:
      app({"worked", "as", "a"});
      s.insert(s.end(), value.begin(), value.end());
      app({"in", "the", "town", "."});
      break;
    case COUNT:
      app({"wrote"});
      s.insert(s.end(), value.begin(), value.end());
      app({"books", "during", "a", "long", "career", "."});
      break;
  }
  return s;
}

Tokens claim_for(const std::string& name, int slot, const Tokens& value) {
  Tokens c = {name};
  auto app = [&](std::initializer_list<const char*> words) {
    for (const char* w : words) c.push_back(w);
  };
  switch (slot) {
    case CITY: app({"lived", "in"}); break;
    case YEAR: app({"was", "born", "in"}); break;
    case JOB: app({"worked", "as", "a"}); break;
    case COUNT: app({"wrote"}); break;
  }
  c.insert(c.end(), value.begin(), value.end());
  if (slot == COUNT) c.push_back("books");
  c.push_back(".");
  return c;
}

// Position of the value inside sentence_for's output.
std::size_t value_offset(int slot) {
  switch (slot) {
    case CITY: return 3;
    case YEAR: return 4;
    case JOB: return 4;
    case COUNT: return 2;
  }
  throw CorpusError("bad slot index");
}

std::vector<std::string> name_pool() {
  static const char* pre[] = {"al", "be", "ca", "do", "el", "fa", "go", "hi", "jo", "ka",
                              "lu", "ma", "ne", "or", "pa", "ro", "sa", "ti", "ul", "vi"};
  static const char* suf[] = {"ra", "mon", "lia", "dor", "nek", "sha", "vik", "tan"};
  std::vector<std::string> names;
  for (const char* p : pre)
    for (const char* s : suf) names.push_back(std::string(p) + s);
  return names;
}

struct Entity {
  std::string name;
  std::array<Tokens, NUM_SLOTS> values;
};

template <typename T>
const T& pick_from(const std::vector<T>& v, std::mt19937_64& rng) {
  std::uniform_int_distribution<std::size_t> d(0, v.size() - 1);
  return v[d(rng)];
}

Tokens alternative_value(int slot, const Tokens& current, std::mt19937_64& rng) {
  const auto& alpha = slot_alphabet(slot);
  for (;;) {
    const Tokens& cand = pick_from(alpha, rng);
    if (cand != current) return cand;
  }
}

}  // namespace

SynthCorpus generate_synthetic(const SynthConfig& config) {
  for (int s = 0; s < NUM_SLOTS; ++s)
    if (slot_alphabet(s).empty()) throw CorpusError("empty slot alphabet");
  if (config.num_entities < 3) throw CorpusError("need at least 3 entities");

  std::mt19937_64 rng(config.seed);
  auto names = name_pool();
  if (config.num_entities > static_cast<int>(names.size()))
    throw CorpusError("num_entities exceeds name pool of " + std::to_string(names.size()));
  std::shuffle(names.begin(), names.end(), rng);

  std::vector<Entity> entities(config.num_entities);
  for (int i = 0; i < config.num_entities; ++i) {
    entities[i].name = names[i];
    for (int s = 0; s < NUM_SLOTS; ++s)
      entities[i].values[s] = pick_from(slot_alphabet(s), rng);
  }

  const int n_train = static_cast<int>(config.num_entities * config.split_train);
  const int n_dev = static_cast<int>(config.num_entities * config.split_dev);

  std::uniform_real_distribution<double> unif(0.0, 1.0);
  SynthCorpus out;
  long pair_id = 0;

  for (int ei = 0; ei < config.num_entities; ++ei) {
    const Entity& ent = entities[ei];
    LabeledCorpus& split =
        ei < n_train ? out.train : (ei < n_train + n_dev ? out.dev : out.test);

    std::vector<Tokens> paragraph(NUM_SLOTS);
    for (int s = 0; s < NUM_SLOTS; ++s) paragraph[s] = sentence_for(ent.name, s, ent.values[s]);

    for (int k = 0; k < config.pairs_per_entity; ++k) {
      std::uniform_int_distribution<int> slot_dist(0, NUM_SLOTS - 1);
      const int slot = slot_dist(rng);
      ClaimPair p;
      p.id = "synth-" + std::to_string(pair_id++);
      p.paragraph_id = ent.name;
      p.sentence = paragraph[slot];
      for (int s = 0; s < NUM_SLOTS; ++s)
        if (s != slot) p.siblings.push_back(paragraph[s]);

      const double r = unif(rng);
      if (r < config.frac_agree) {
        p.relation = Relation::AGREE;
        p.claim = claim_for(ent.name, slot, ent.values[slot]);
        // Gold mask marks the restated slot for masker evaluation on A pairs too.
        std::vector<int> gm(p.sentence.size(), 0);
        for (std::size_t j = 0; j < ent.values[slot].size(); ++j)
          gm[value_offset(slot) + j] = 1;
        p.gold_mask = gm;
      } else if (r < config.frac_agree + config.frac_disagree) {
        p.relation = Relation::DISAGREE;
        Tokens alt = alternative_value(slot, ent.values[slot], rng);
        p.claim = claim_for(ent.name, slot, alt);
        std::vector<int> gm(p.sentence.size(), 0);
        for (std::size_t j = 0; j < ent.values[slot].size(); ++j)
          gm[value_offset(slot) + j] = 1;
        p.gold_mask = gm;
        Tokens updated(p.sentence.begin(), p.sentence.begin() + value_offset(slot));
        updated.insert(updated.end(), alt.begin(), alt.end());
        updated.insert(updated.end(), p.sentence.begin() + value_offset(slot) +
                                          ent.values[slot].size(),
                       p.sentence.end());
        p.gold_updated = updated;
        if (!config.bias_cue.empty() && unif(rng) < config.bias_probability)
          p.claim.insert(p.claim.begin(), config.bias_cue);
      } else {
        p.relation = Relation::NEUTRAL;
        std::uniform_int_distribution<int> other_dist(1, NUM_SLOTS - 1);
        const int cslot = (slot + other_dist(rng)) % NUM_SLOTS;
        if (unif(rng) < 0.7) {
          // Absent attribute of the same entity.
          p.claim = claim_for(ent.name, cslot, ent.values[cslot]);
        } else {
          // Different entity, also a different attribute.
          std::uniform_int_distribution<int> ent_dist(0, config.num_entities - 1);
          int oi = ent_dist(rng);
          if (oi == ei) oi = (oi + 1) % config.num_entities;
          p.claim = claim_for(entities[oi].name, cslot, entities[oi].values[cslot]);
        }
      }
      split.push_back(std::move(p));
    }
  }

  // Symmetric evaluation pairs over test entities, cue-free.
  for (int ei = n_train + n_dev; ei < config.num_entities; ++ei) {
    const Entity& ent = entities[ei];
    for (int slot = 0; slot < NUM_SLOTS; ++slot) {
      Tokens alt = alternative_value(slot, ent.values[slot], rng);
      Tokens claim = claim_for(ent.name, slot, alt);
      ClaimPair agree;
      agree.id = "sym-" + std::to_string(pair_id++);
      agree.paragraph_id = ent.name;
      agree.claim = claim;
      agree.sentence = sentence_for(ent.name, slot, alt);
      agree.relation = Relation::AGREE;
      out.symmetric.push_back(std::move(agree));
      ClaimPair disagree;
      disagree.id = "sym-" + std::to_string(pair_id++);
      disagree.paragraph_id = ent.name;
      disagree.claim = claim;
      disagree.sentence = sentence_for(ent.name, slot, ent.values[slot]);
      disagree.relation = Relation::DISAGREE;
      out.symmetric.push_back(std::move(disagree));
    }
  }
  return out;
}

namespace {

// Recover (name, slot, value) from a synthetic surface form; slot = -1
// when no template matches.
std::tuple<std::string, int, Tokens> parse_surface(const Tokens& toks) {
    const Tokens& t = toks;
    // Claims may carry a prepended cue token; the anchor phrase search below
    // is position-independent for the attribute, so only the name position
    // needs care: the name is the token right before the anchor.
    auto find_sub = [&](std::initializer_list<const char*> words) -> int {
      std::vector<std::string> w(words.begin(), words.end());
      for (std::size_t i = 0; i + w.size() <= t.size(); ++i) {
        bool ok = true;
        for (std::size_t j = 0; j < w.size(); ++j)
          if (t[i + j] != w[j]) { ok = false; break; }
        if (ok) return static_cast<int>(i);
      }
      return -1;
    };
    int pos, slot;
    std::size_t vstart, anchor_len;
    if ((pos = find_sub({"lived", "in"})) >= 0) {
      slot = CITY; anchor_len = 2;
    } else if ((pos = find_sub({"was", "born", "in"})) >= 0) {
      slot = YEAR; anchor_len = 3;
    } else if ((pos = find_sub({"worked", "as", "a"})) >= 0) {
      slot = JOB; anchor_len = 3;
    } else if ((pos = find_sub({"wrote"})) >= 0) {
      slot = COUNT; anchor_len = 1;
    } else {
      return {"", -1, {}};
    }
    if (pos == 0) return {"", -1, {}};
    std::string name = t[pos - 1];
    vstart = pos + anchor_len;
    // Value runs until the first post-value template word.
    static const std::vector<std::string> stops = {"for", "in", "books", ".", "during"};
    Tokens value;
    for (std::size_t i = vstart; i < t.size(); ++i) {
      if (std::find(stops.begin(), stops.end(), t[i]) != stops.end()) break;
      value.push_back(t[i]);
    }
    return {name, slot, value};
}

}  // namespace

Relation synthetic_label_oracle(const ClaimPair& pair) {
  auto [cname, cslot, cval] = parse_surface(pair.claim);
  auto [sname, sslot, sval] = parse_surface(pair.sentence);
  if (cslot < 0 || sslot < 0 || cslot != sslot || cname != sname) return Relation::NEUTRAL;
  return cval == sval ? Relation::AGREE : Relation::DISAGREE;
}

std::optional<Tokens> synthetic_restating_claim(const Tokens& sentence) {
  auto [name, slot, value] = parse_surface(sentence);
  if (slot < 0 || value.empty()) return std::nullopt;
  return claim_for(name, slot, value);
}

}  // namespace factedit
