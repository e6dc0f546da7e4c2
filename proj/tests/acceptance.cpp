// End-to-end acceptance suite. Each criterion prints exactly one
// PASS/FAIL line; the process exits nonzero if any criterion fails.
//
// Thresholds and training budgets were fixed once after a calibration
// run on held-out synthetic data and are frozen here; the suite never
// tunes.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <random>
#include <sstream>

#include "factedit/pipeline.hpp"
#include "gradcheck.hpp"

using namespace factedit;
namespace fs = std::filesystem;
using Clock = std::chrono::steady_clock;

namespace {

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

std::string slurp(const std::string& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read " + p);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

struct Outcome {
  bool pass = false;
  std::string detail;
};

// ---- shared pipeline artifacts (built by criterion 5) ------------------

struct SharedArtifacts {
  fs::path root;
  PipelineConfig cfg;
  bool ready = false;
  SynthCorpus splits;  // reloaded from disk, kept for later criteria
};

SharedArtifacts g_shared;

// Frozen operating point for the end-to-end pipeline (see README for the
// config schema). Calibrated once, then fixed.
PipelineConfig pipeline_config(const std::string& out_dir) {
  PipelineConfig c;
  c.seed = 11;
  c.out_dir = out_dir;
  c.synth.seed = 11;
  c.synth.num_entities = 120;
  c.synth.pairs_per_entity = 42;
  c.emb_dim = 32;
  c.stance_hidden = 48;
  c.masker_hidden = 48;
  c.generator_hidden = 64;
  c.stance_train.epochs = 12;
  c.stance_train.seed = 11;
  c.masker.lambda = 0.6;  // tuned; see lambda sweep
  c.masker.syntactic_reg = false;
  c.masker.epochs = 13;
  c.masker.patience = 6;
  c.masker.seed = 11;
  c.generator_train.steps = 1200;
  c.generator_train.batch_size = 16;
  c.generator_train.seed = 11;
  return c;
}

// ---- criterion 1: gradient correctness ---------------------------------

Outcome criterion_gradients() {
  const auto t0 = Clock::now();
  double worst = 0.0;
  auto track = [&](const gradcheck::Result& r) { worst = std::max(worst, r.max_rel_err); };

  // Composite functions exercising the op set.
  {
    std::mt19937_64 rng(3);
    auto a = zeros({3, 4}, true), b = zeros({3, 4}, true), w = zeros({4, 3}, true);
    normal_init(*a, 0.4, rng);
    normal_init(*b, 0.4, rng);
    normal_init(*w, 0.4, rng);
    track(gradcheck::check({a, b, w}, [&] {
      auto x = tanh_t(add(mul(a, b), scale(sub(a, b), 0.3)));
      auto y = sigmoid(matmul(x, w));
      return sum(mul(y, y));
    }));
    track(gradcheck::check({a, w}, [&] {
      auto sm = softmax_rows(matmul(a, w));
      auto sl = slice_cols(concat_cols({sm, sm}), 1, 4);
      return add(mean(log_t(add_const(sl, 1.0))), pick(max_cols(sm), 1));
    }));
    track(gradcheck::check({a, b}, [&] {
      auto st = stack_rows({row(a, 0), row(b, 2), mean_cols(a)});
      return sum(matmul_nt(st, transpose(transpose(st))));
    }));
    std::vector<int> ids{0, 2, 1, 2};
    track(gradcheck::check({a}, [&] {
      return sum(mul(gather_rows(a, ids), gather_rows(a, ids)));
    }));
  }
  // Classifier loss.
  {
    std::mt19937_64 rng(5);
    StanceModel model(14, 5, 4, rng);
    std::vector<int> s{5, 9, 6}, c{7, 8};
    track(gradcheck::check(model.params(), [&] {
      auto probs = model.probs_from_embeddings(model.emb->embed(s), c);
      return scale(log_t(pick(probs, 1)), -1.0);
    }));
  }
  // Masker loss with sparsity and syntactic regularization terms.
  {
    std::mt19937_64 rng(7);
    StanceModel stance(14, 5, 4, rng);
    MaskerModel masker(14, 5, 4, rng);
    std::vector<int> s{5, 6, 7, 8}, c{9, 10};
    MaskerConfig mc;
    mc.lambda = 0.4;
    mc.syntactic_reg = true;
    Mask target{0.0, 1.0, 1.0, 0.0};
    track(gradcheck::check(masker.params(), [&] {
      return masker_loss(masker, stance, s, c, mc, &target);
    }));
  }
  // Generator teacher-forced NLL through the full copy mixture.
  {
    std::mt19937_64 rng(9);
    GeneratorModel gen(10, 4, 3, rng);
    LabeledCorpus tiny(1);
    tiny[0].sentence = {"aa", "bb"};
    tiny[0].claim = {"cc"};
    tiny[0].relation = Relation::AGREE;
    auto vocab = build_vocab(tiny, 1);
    Tokens src1{"aa", "bb"}, src2{"cc"}, tgt{"aa", "cc"};
    track(gradcheck::check(gen.params(), [&] {
      return generator_nll(gen, src1, src2, tgt, vocab, 10);
    }));
  }

  const double secs = seconds_since(t0);
  std::ostringstream d;
  d << "max relative error " << worst << ", " << static_cast<int>(secs) << "s";
  return {worst < 1e-4 && secs < 120.0, d.str()};
}

// ---- criterion 2: distribution invariants ------------------------------

Outcome criterion_distributions() {
  std::mt19937_64 rng(23);
  GeneratorModel gen(12, 6, 5, rng);
  StanceModel stance(12, 6, 5, rng);
  LabeledCorpus seed_corpus(1);
  seed_corpus[0].sentence = {"t5", "t6", "t7", "t8", "t9", "t10", "t11"};
  seed_corpus[0].claim = {"t5"};
  seed_corpus[0].relation = Relation::AGREE;
  auto vocab = build_vocab(seed_corpus, 1);

  std::uniform_int_distribution<int> tok(0, 6);
  std::uniform_int_distribution<int> len(1, 6);
  double worst = 0.0;
  long steps = 0;
  const Tokens pool = seed_corpus[0].sentence;
  while (steps < 1000) {
    Tokens s1(len(rng)), s2(len(rng));
    for (auto& t : s1) t = pool[tok(rng)];
    for (auto& t : s2) t = pool[tok(rng)];
    auto enc = gen.encode_pair(s1, s2, vocab);
    auto state = gen.initial_state(enc);
    for (int k = 0; k < 5 && steps < 1000; ++k, ++steps) {
      auto dist = gen.decode_step(state, enc);
      double mass = 0.0;
      for (double p : dist.dense()) mass += p;
      worst = std::max(worst, std::abs(mass - 1.0));
      double a1 = 0.0, a2 = 0.0;
      for (double v : dist.a1->values) a1 += v;
      for (double v : dist.a2->values) a2 += v;
      worst = std::max({worst, std::abs(a1 - 1.0), std::abs(a2 - 1.0)});
      state.prev_token = tok(rng) + kEos;  // arbitrary continuation
    }
    // Classifier normalization on the same random inputs.
    auto probs = stance.classify(vocab.encode(s1), vocab.encode(s2));
    worst = std::max(worst, std::abs(probs[0] + probs[1] + probs[2] - 1.0));
  }
  std::ostringstream d;
  d << steps << " decode steps, worst normalization error " << worst;
  return {worst < 1e-9, d.str()};
}

// ---- criterion 3: SARI oracle equivalence ------------------------------

using Counts = std::map<std::vector<std::string>, long>;

Counts ngrams_of(const Tokens& t, int n) {
  Counts c;
  for (int i = 0; i + n <= static_cast<int>(t.size()); ++i)
    ++c[std::vector<std::string>(t.begin() + i, t.begin() + i + n)];
  return c;
}

Counts isect(const Counts& a, const Counts& b) {
  Counts r;
  for (const auto& [k, v] : a) {
    auto it = b.find(k);
    if (it != b.end()) r[k] = std::min(v, it->second);
  }
  return r;
}

Counts minus(const Counts& a, const Counts& b) {
  Counts r;
  for (const auto& [k, v] : a) {
    auto it = b.find(k);
    const long d = v - (it == b.end() ? 0 : it->second);
    if (d > 0) r[k] = d;
  }
  return r;
}

long total(const Counts& c) {
  long t = 0;
  for (const auto& [k, v] : c) t += v;
  return t;
}

double f1_of(const Counts& pred, const Counts& gold) {
  const long tp = total(isect(pred, gold));
  const long np = total(pred), ng = total(gold);
  if (np == 0 && ng == 0) return 1.0;
  if (np == 0 || ng == 0) return 0.0;
  const double p = static_cast<double>(tp) / np, r = static_cast<double>(tp) / ng;
  return (p + r == 0.0) ? 0.0 : 2 * p * r / (p + r);
}

SariScore oracle_sari(const Tokens& in, const Tokens& out, const Tokens& ref) {
  double keep = 0, addf = 0, del = 0;
  for (int n = 1; n <= 4; ++n) {
    const auto I = ngrams_of(in, n), O = ngrams_of(out, n), R = ngrams_of(ref, n);
    keep += f1_of(isect(O, I), isect(R, I));
    addf += f1_of(minus(O, I), minus(R, I));
    del += f1_of(minus(I, O), minus(I, R));
  }
  SariScore s;
  s.keep_f1 = keep / 4;
  s.add_f1 = addf / 4;
  s.del_f1 = del / 4;
  s.sari = std::cbrt(s.keep_f1 * s.add_f1 * s.del_f1);
  return s;
}

Outcome criterion_sari() {
  std::mt19937_64 rng(41);
  std::uniform_int_distribution<int> len(1, 10), out_len(0, 10), tok(0, 5);
  const Tokens alphabet{"a", "b", "c", "d", "e", "f"};
  double worst = 0.0;
  for (int trial = 0; trial < 50; ++trial) {
    Tokens in(len(rng)), out(out_len(rng)), ref(len(rng));
    for (auto& t : in) t = alphabet[tok(rng)];
    for (auto& t : out) t = alphabet[tok(rng)];
    for (auto& t : ref) t = alphabet[tok(rng)];
    const auto lib = sari(in, out, ref);
    const auto orc = oracle_sari(in, out, ref);
    worst = std::max({worst, std::abs(lib.sari - orc.sari),
                      std::abs(lib.keep_f1 - orc.keep_f1),
                      std::abs(lib.add_f1 - orc.add_f1),
                      std::abs(lib.del_f1 - orc.del_f1)});
  }
  // Trivial anchors: perfect output scores 1; an output that ignores a
  // required addition zeroes the add component and hence the score.
  const auto perfect = sari({"x", "y"}, {"y", "z"}, {"y", "z"});
  const Tokens in4{"a", "b", "c", "d"};
  const auto lazy = sari(in4, in4, {"a", "b", "c", "d", "e"});
  const bool anchors = perfect.sari == 1.0 && lazy.add_f1 == 0.0 && lazy.sari == 0.0;
  std::ostringstream d;
  d << "50 random triples, max deviation from oracle " << worst;
  return {worst < 1e-12 && anchors, d.str()};
}

// ---- criterion 4: copy-mass equivalence --------------------------------

Outcome criterion_copy_mass() {
  std::mt19937_64 rng(51);
  GeneratorModel gen(9, 5, 4, rng);
  const Tokens alphabet{"u1", "u2", "u3", "u4"};
  LabeledCorpus seed_corpus(1);
  seed_corpus[0].sentence = alphabet;
  seed_corpus[0].claim = {"u1"};
  seed_corpus[0].relation = Relation::AGREE;
  auto vocab = build_vocab(seed_corpus, 1);

  // All sequences of length 1..5 over the alphabet.
  std::vector<Tokens> all;
  std::function<void(Tokens&)> grow = [&](Tokens& cur) {
    if (!cur.empty()) all.push_back(cur);
    if (cur.size() == 5) return;
    for (const auto& t : alphabet) {
      cur.push_back(t);
      grow(cur);
      cur.pop_back();
    }
  };
  Tokens start;
  grow(start);

  double worst = 0.0;
  long checked = 0;
  auto check_pair = [&](const Tokens& s1, const Tokens& s2) {
    auto enc = gen.encode_pair(s1, s2, vocab);
    auto state = gen.initial_state(enc);
    auto dist = gen.decode_step(state, enc);
    const double pg = dist.p_gen->scalar(), p1 = dist.p_enc1->scalar();
    for (int ext = 0; ext < enc.ext.total_size(); ++ext) {
      // Exhaustive position-sum oracle for the three-way mixture.
      double copy1 = 0.0, copy2 = 0.0;
      for (std::size_t i = 0; i < enc.ext1.size(); ++i)
        if (enc.ext1[i] == ext) copy1 += dist.a1->values[i];
      for (std::size_t i = 0; i < enc.ext2.size(); ++i)
        if (enc.ext2[i] == ext) copy2 += dist.a2->values[i];
      double vocab_part = ext < vocab.size() ? dist.p_vocab->values[ext] : 0.0;
      const double want =
          pg * vocab_part + (1 - pg) * (p1 * copy1 + (1 - p1) * copy2);
      worst = std::max(worst, std::abs(dist.prob_of(ext)->scalar() - want));
      ++checked;
    }
  };
  const Tokens fixed{"u2", "u4"};
  for (const auto& s : all) {
    check_pair(s, fixed);
    check_pair(fixed, s);
  }
  std::ostringstream d;
  d << checked << " (sequence, token) probabilities, max deviation " << worst;
  return {worst < 1e-12, d.str()};
}

// ---- criterion 5: end-to-end synthetic pipeline ------------------------

Outcome criterion_pipeline() {
  const auto t0 = Clock::now();
  g_shared.root = fs::temp_directory_path() /
                  ("factedit-acceptance-" + std::to_string(std::random_device{}()));
  fs::create_directories(g_shared.root);
  auto& cfg = g_shared.cfg;
  cfg = pipeline_config((g_shared.root / "out").string());

  if (cmd_gen_data(cfg) != 0) return {false, "gen-data failed"};
  if (cmd_train("classifier", cfg) != 0) return {false, "classifier training failed"};
  if (cmd_train("masker", cfg) != 0) return {false, "masker training failed"};
  if (cmd_train("generator", cfg) != 0) return {false, "generator training failed"};

  auto bundle = load_stance_bundle(cfg);
  auto masker = load_masker_model(cfg, bundle.vocab);
  auto generator = load_generator_model(cfg, bundle.vocab);

  auto test = load_jsonl(cfg.data_path("test"));
  long vocab_size = bundle.vocab.size();
  long pairs = 0;
  {
    for (const char* split : {"train", "dev", "test"})
      pairs += static_cast<long>(load_jsonl(cfg.data_path(split)).size());
  }

  // Classifier accuracy on the held-out test split.
  long cls_hits = 0;
  for (const auto& p : test)
    if (bundle.model.predict(bundle.vocab.encode(p.sentence),
                             bundle.vocab.encode(p.claim)) == p.relation)
      ++cls_hits;
  const double cls_acc = static_cast<double>(cls_hits) / test.size();

  // Rewrite the refuted test pairs through the full pipeline.
  LabeledCorpus disagree;
  for (const auto& p : test)
    if (p.relation == Relation::DISAGREE) disagree.push_back(p);
  const auto dis_path = (g_shared.root / "test_disagree.jsonl").string();
  const auto rw_path = (g_shared.root / "rewrites.jsonl").string();
  save_jsonl(disagree, dis_path);
  if (cmd_rewrite(cfg, dis_path, rw_path) != 0) return {false, "rewrite failed"};
  auto records = load_rewrites(rw_path);

  std::vector<std::vector<int>> pred_masks, gold_masks;
  long agree = 0, exact = 0, scored = 0;
  for (std::size_t i = 0; i < records.size(); ++i) {
    const auto& r = records[i];
    const auto& g = disagree[i];
    if (!r.error.empty()) continue;
    ++scored;
    if (r.achieved == Relation::AGREE) ++agree;
    if (g.gold_updated && r.output == *g.gold_updated) ++exact;
    if (g.gold_mask) {
      std::vector<int> pred(r.residual.size(), 0);
      for (std::size_t k = 0; k < r.residual.size(); ++k)
        if (r.residual[k] == "<mask>") pred[k] = 1;
      pred_masks.push_back(std::move(pred));
      gold_masks.push_back(*g.gold_mask);
    }
  }
  const auto prf = mask_prf(pred_masks, gold_masks);
  const double agree_rate = scored ? static_cast<double>(agree) / scored : 0.0;
  const double slot_copy = scored ? static_cast<double>(exact) / scored : 0.0;
  const double secs = seconds_since(t0);

  g_shared.ready = true;
  std::ostringstream d;
  d << pairs << " pairs, vocab " << vocab_size << ", classifier acc " << cls_acc
    << ", mask F1 " << prf.f1 << ", slot-copy " << slot_copy << ", agreement "
    << agree_rate << ", " << static_cast<int>(secs) << "s";
  const bool pass = pairs >= 5000 && vocab_size <= 300 && cls_acc >= 0.95 &&
                    prf.f1 >= 0.75 && slot_copy >= 0.85 && agree_rate >= 0.90 &&
                    secs < 1800.0;
  return {pass, d.str()};
}

// ---- criterion 6: lambda sweep trend -----------------------------------

Outcome criterion_sweep() {
  if (!g_shared.ready) return {false, "pipeline artifacts unavailable"};
  auto bundle = load_stance_bundle(g_shared.cfg);
  auto train = load_jsonl(g_shared.cfg.data_path("train"));
  auto dev = load_jsonl(g_shared.cfg.data_path("dev"));

  // Reduced budget: the sweep retrains the masker once per grid point.
  LabeledCorpus small(train.begin(), train.begin() + std::min<std::size_t>(train.size(), 900));
  MaskerConfig base = g_shared.cfg.masker;
  base.epochs = 20;
  base.patience = 6;

  const std::vector<double> grid{0.0, 0.2, 0.4, 0.6};
  auto rows = lambda_sweep(bundle.model, bundle.vocab, small, dev, grid,
                           {false, true}, base, g_shared.cfg.emb_dim,
                           g_shared.cfg.masker_hidden);
  // Collapse row: a coefficient that outweighs the judge's full NLL range
  // per token drives the masks to (near) nothing.
  const double lambda_big = 64.0;
  auto big = lambda_sweep(bundle.model, bundle.vocab, small, dev, {lambda_big},
                          {false}, base, g_shared.cfg.emb_dim,
                          g_shared.cfg.masker_hidden);

  bool delta_exact = true;
  for (const auto& r : rows)
    if (std::abs(r.delta - (r.accuracy - r.mean_size)) > 1e-9) delta_exact = false;

  // Per regularizer setting: sizes weakly decreasing in lambda, allowing
  // at most one inversion of at most 2 points.
  bool trend = true;
  std::ostringstream sizes;
  for (bool reg : {false, true}) {
    std::vector<double> s;
    for (const auto& r : rows)
      if (r.syntactic_reg == reg) s.push_back(r.mean_size);
    int inversions = 0;
    for (std::size_t i = 1; i < s.size(); ++i)
      if (s[i] > s[i - 1] + 1e-9) {
        ++inversions;
        if (s[i] - s[i - 1] > 2.0) trend = false;
      }
    if (inversions > 1) trend = false;
    sizes << (reg ? " reg[" : " plain[");
    for (double v : s) sizes << " " << v;
    sizes << " ]";
  }
  const double collapse_size = big.at(0).mean_size;

  std::ostringstream d;
  d << "sizes(%)" << sizes.str() << ", lambda=" << lambda_big << " size " << collapse_size
    << "%, delta column " << (delta_exact ? "exact" : "WRONG");
  return {delta_exact && trend && collapse_size < 2.0, d.str()};
}

// ---- criterion 7: augmentation direction -------------------------------

Outcome criterion_augmentation() {
  PipelineConfig cfg;
  cfg.seed = 11;
  cfg.out_dir = (g_shared.root / "aug").string();
  fs::create_directories(cfg.out_dir);
  cfg.synth.seed = 11;
  cfg.synth.num_entities = 60;
  cfg.synth.pairs_per_entity = 30;
  cfg.synth.bias_cue = "reportedly";
  cfg.synth.bias_probability = 0.9;
  cfg.emb_dim = 32;
  cfg.stance_hidden = 48;
  cfg.masker_hidden = 48;
  cfg.generator_hidden = 64;
  cfg.stance_train.epochs = 10;
  cfg.stance_train.seed = 11;
  cfg.masker = g_shared.cfg.masker;
  cfg.masker.epochs = 6;
  cfg.masker.patience = 6;
  cfg.generator_train.steps = 800;
  cfg.generator_train.batch_size = 16;
  cfg.generator_train.seed = 11;

  auto exp = run_augmentation_experiment(cfg);
  const double gap = exp.augmented_accuracy - exp.unaugmented_accuracy;
  std::ostringstream d;
  d << "symmetric accuracy " << exp.unaugmented_accuracy << " -> "
    << exp.augmented_accuracy << " (gap " << gap << "), claim-only probe "
    << exp.claim_only_accuracy << " vs majority " << exp.majority_fraction
    << ", added " << exp.augmented_added << " (failed " << exp.augment_failed << ")";
  return {gap >= 0.02 && exp.claim_only_accuracy > exp.majority_fraction, d.str()};
}

// ---- criterion 8: determinism and persistence --------------------------

Outcome criterion_determinism() {
  if (!g_shared.ready) return {false, "pipeline artifacts unavailable"};
  const auto& cfg = g_shared.cfg;

  // Re-running gen-data with the same seed reproduces data and reports.
  PipelineConfig again = cfg;
  again.out_dir = (g_shared.root / "again").string();
  if (cmd_gen_data(again) != 0) return {false, "gen-data rerun failed"};
  for (const char* split : {"train", "dev", "test", "symmetric"})
    if (slurp(cfg.data_path(split)) != slurp(again.data_path(split)))
      return {false, std::string("gen-data not deterministic on ") + split};
  if (slurp(cfg.out_dir + "/gen_data_report.json") !=
      slurp(again.out_dir + "/gen_data_report.json"))
    return {false, "gen-data report not deterministic"};

  // Re-running rewrite from the same artifacts is bit-identical.
  const auto dis_path = (g_shared.root / "test_disagree.jsonl").string();
  const auto rw1 = (g_shared.root / "rewrites.jsonl").string();
  const auto rw2 = (g_shared.root / "rewrites2.jsonl").string();
  if (cmd_rewrite(cfg, dis_path, rw2) != 0) return {false, "rewrite rerun failed"};
  if (slurp(rw1) != slurp(rw2)) return {false, "rewrite not deterministic"};

  // Checkpoint round trip: load then save reproduces the bytes, and the
  // checksum catches payload corruption.
  const auto ck = cfg.checkpoint_path("classifier");
  auto loaded = load_checkpoint(ck);
  const auto ck2 = (g_shared.root / "resaved.ckpt").string();
  save_checkpoint(loaded, ck2);
  if (slurp(ck) != slurp(ck2)) return {false, "checkpoint round trip not byte-identical"};
  {
    auto bytes = slurp(ck);
    bytes[bytes.size() - 16] ^= 0x20;
    const auto bad = (g_shared.root / "bad.ckpt").string();
    std::ofstream out(bad, std::ios::binary);
    out << bytes;
    out.close();
    try {
      (void)load_checkpoint(bad);
      return {false, "corrupted checkpoint was accepted"};
    } catch (const CheckpointError&) {
    }
  }

  // Retraining at small scale with one seed gives bit-identical
  // checkpoints and reports.
  PipelineConfig tiny = cfg;
  tiny.synth.num_entities = 10;
  tiny.synth.pairs_per_entity = 8;
  tiny.stance_train.epochs = 2;
  for (const char* dir : {"t1", "t2"}) {
    PipelineConfig t = tiny;
    t.out_dir = (g_shared.root / dir).string();
    if (cmd_gen_data(t) != 0 || cmd_train("classifier", t) != 0)
      return {false, "tiny retrain failed"};
  }
  if (slurp((g_shared.root / "t1/classifier.ckpt").string()) !=
          slurp((g_shared.root / "t2/classifier.ckpt").string()) ||
      slurp((g_shared.root / "t1/train_classifier_report.json").string()) !=
          slurp((g_shared.root / "t2/train_classifier_report.json").string()))
    return {false, "training not deterministic across reruns"};

  return {true, "reports, rewrites, checkpoints and retraining all bit-identical"};
}

}  // namespace

int main() {
  struct Entry {
    const char* name;
    std::function<Outcome()> fn;
  };
  const std::vector<Entry> criteria{
      {"gradient correctness", criterion_gradients},
      {"distribution invariants", criterion_distributions},
      {"SARI oracle equivalence", criterion_sari},
      {"copy-mass equivalence", criterion_copy_mass},
      {"end-to-end synthetic pipeline", criterion_pipeline},
      {"lambda-sweep trend", criterion_sweep},
      {"augmentation direction", criterion_augmentation},
      {"determinism and persistence", criterion_determinism},
  };

  int failures = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    Outcome o;
    try {
      o = criteria[i].fn();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    if (!o.pass) ++failures;
    std::cout << (o.pass ? "PASS" : "FAIL") << " criterion " << (i + 1) << " ("
              << criteria[i].name << "): " << o.detail << std::endl;
  }
  if (g_shared.ready) {
    std::error_code ec;
    fs::remove_all(g_shared.root, ec);
  }
  return failures == 0 ? 0 : 1;
}
