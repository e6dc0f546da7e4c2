#include "factedit/pipeline.hpp"

#include <filesystem>
#include <fstream>
#include <iomanip>
#include <sstream>

#include "json.hpp"

namespace factedit {

namespace fs = std::filesystem;
using json = nlohmann::json;

namespace {

void ensure_dir(const std::string& path) {
  if (!path.empty()) fs::create_directories(path);
}

void write_text(const std::string& path, const std::string& text) {
  std::ofstream out(path);
  if (!out) throw PipelineError("cannot write " + path);
  out << text;
}

void write_json(const std::string& path, const json& j) {
  std::ofstream out(path);
  if (!out) throw PipelineError("cannot write " + path);
  out << j.dump(2) << '\n';
}

json report_header(const PipelineConfig& cfg, const std::string& command) {
  return json{{"command", command}, {"seed", cfg.seed}};
}

Checkpoint require_checkpoint(const PipelineConfig& cfg, const std::string& stage,
                              const std::string& wanted_by) {
  const auto path = cfg.checkpoint_path(stage);
  if (!fs::exists(path))
    throw PipelineError(wanted_by + " requires the " + stage +
                        " checkpoint; run `train " + stage + "` first (missing " + path + ")");
  auto ckpt = load_checkpoint(path);
  if (ckpt.kind != stage)
    throw PipelineError(path + " holds a '" + ckpt.kind + "' model, expected '" + stage + "'");
  return ckpt;
}

Vocab vocab_from_listing(const std::vector<std::string>& listing) {
  Vocab v;
  v.id_to_token = listing;
  for (int i = 0; i < v.size(); ++i) v.token_to_id[v.id_to_token[i]] = i;
  return v;
}

LabeledCorpus load_split(const PipelineConfig& cfg, const std::string& split) {
  const auto path = cfg.data_path(split);
  if (!fs::exists(path))
    throw PipelineError("missing corpus file " + path + "; run `gen-data` first");
  return load_jsonl(path);
}

double relation_accuracy(const StanceModel& model, const Vocab& vocab,
                         const LabeledCorpus& pairs) {
  if (pairs.empty()) return 0.0;
  long hits = 0;
  for (const auto& p : pairs)
    if (model.predict(vocab.encode(p.sentence), vocab.encode(p.claim)) == p.relation) ++hits;
  return static_cast<double>(hits) / pairs.size();
}

}  // namespace

StanceBundle load_stance_bundle(const PipelineConfig& cfg) {
  auto ckpt = require_checkpoint(cfg, "classifier", "this command");
  StanceBundle b;
  b.vocab = vocab_from_listing(ckpt.vocab);
  std::mt19937_64 rng(cfg.seed);
  b.model = StanceModel(b.vocab.size(), cfg.emb_dim, cfg.stance_hidden, rng);
  restore_params(ckpt, b.model.params());
  b.model.freeze();
  return b;
}

MaskerModel load_masker_model(const PipelineConfig& cfg, const Vocab& vocab) {
  auto ckpt = require_checkpoint(cfg, "masker", "this command");
  std::mt19937_64 rng(cfg.seed);
  MaskerModel m(vocab.size(), cfg.emb_dim, cfg.masker_hidden, rng);
  restore_params(ckpt, m.params());
  return m;
}

GeneratorModel load_generator_model(const PipelineConfig& cfg, const Vocab& vocab) {
  auto ckpt = require_checkpoint(cfg, "generator", "this command");
  std::mt19937_64 rng(cfg.seed);
  GeneratorModel g(vocab.size(), cfg.emb_dim, cfg.generator_hidden, rng);
  restore_params(ckpt, g.params());
  g.mode = cfg.inference.mode;
  return g;
}

RewriteRecord rewrite_pair(const StanceModel& stance, const MaskerModel& masker,
                           const GeneratorModel& generator, const Vocab& vocab,
                           const PipelineConfig& cfg, const ClaimPair& pair) {
  RewriteRecord rec;
  rec.id = pair.id;
  rec.sentence = pair.sentence;
  rec.claim = pair.claim;
  if (pair.sentence.empty() || pair.claim.empty()) {
    rec.error = "empty sentence or claim";
    return rec;
  }
  auto s = vocab.encode(pair.sentence);
  auto c = vocab.encode(pair.claim);
  auto probs = masker.mask_probs(s, c);
  rec.residual = pair.sentence;
  for (std::size_t i = 0; i < rec.residual.size(); ++i)
    if (probs[i] >= cfg.masker.rounding_threshold) rec.residual[i] = "<mask>";
  auto result = rewrite_with_escalation(generator, stance, rec.residual, pair.claim,
                                        vocab, cfg.inference);
  rec.output = result.output;
  rec.achieved = result.achieved;
  rec.tau_used = result.tau_used;
  rec.alphas = result.alphas;
  rec.p_gens = result.p_gens;
  rec.p_enc1s = result.p_enc1s;
  return rec;
}

void save_rewrites(const std::vector<RewriteRecord>& records, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw PipelineError("cannot write " + path);
  for (const auto& r : records) {
    json j{{"id", r.id},        {"sentence", r.sentence}, {"claim", r.claim},
           {"residual", r.residual}, {"output", r.output},
           {"achieved", relation_name(r.achieved)}, {"tau", r.tau_used},
           {"alpha", r.alphas}, {"p_gen", r.p_gens},  {"p_enc1", r.p_enc1s}};
    if (!r.error.empty()) j["error"] = r.error;
    out << j.dump() << '\n';
  }
}

std::vector<RewriteRecord> load_rewrites(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw PipelineError("cannot open " + path);
  std::vector<RewriteRecord> out;
  std::string line;
  long lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    json j;
    try {
      j = json::parse(line);
    } catch (const json::exception& e) {
      throw PipelineError(path + ":" + std::to_string(lineno) + ": " + e.what());
    }
    RewriteRecord r;
    r.id = j.at("id").get<std::string>();
    r.sentence = j.at("sentence").get<Tokens>();
    r.claim = j.at("claim").get<Tokens>();
    r.residual = j.at("residual").get<Tokens>();
    r.output = j.at("output").get<Tokens>();
    r.achieved = relation_from_name(j.at("achieved").get<std::string>());
    r.tau_used = j.at("tau").get<double>();
    if (j.contains("error")) r.error = j["error"].get<std::string>();
    out.push_back(std::move(r));
  }
  return out;
}

// ---- gen-data ----------------------------------------------------------

int cmd_gen_data(const PipelineConfig& cfg) {
  ensure_dir(cfg.out_dir);
  ensure_dir(cfg.corpus_dir.empty() ? cfg.out_dir + "/data" : cfg.corpus_dir);
  auto corpus = generate_synthetic(cfg.synth);
  save_jsonl(corpus.train, cfg.data_path("train"));
  save_jsonl(corpus.dev, cfg.data_path("dev"));
  save_jsonl(corpus.test, cfg.data_path("test"));
  save_jsonl(corpus.symmetric, cfg.data_path("symmetric"));

  json report = report_header(cfg, "gen-data");
  std::ostringstream text;
  text << "corpus generation (seed " << cfg.seed << ")\n";
  for (const auto& [name, split] :
       {std::pair<const char*, const LabeledCorpus*>{"train", &corpus.train},
        {"dev", &corpus.dev},
        {"test", &corpus.test},
        {"symmetric", &corpus.symmetric}}) {
    long na = 0, nd = 0, nn = 0, cued = 0;
    for (const auto& p : *split) {
      if (p.relation == Relation::AGREE) ++na;
      else if (p.relation == Relation::DISAGREE) ++nd;
      else ++nn;
      if (!cfg.synth.bias_cue.empty() && !p.claim.empty() && p.claim[0] == cfg.synth.bias_cue)
        ++cued;
    }
    report["splits"][name] = {{"agree", na}, {"disagree", nd}, {"neutral", nn},
                              {"total", static_cast<long>(split->size())},
                              {"bias_cued_claims", cued}};
    text << "  " << name << ": " << split->size() << " pairs (A " << na << ", D " << nd
         << ", N " << nn << ", cued " << cued << ")\n";
  }
  write_json(cfg.out_dir + "/gen_data_report.json", report);
  write_text(cfg.out_dir + "/gen_data_report.txt", text.str());
  return 0;
}

// ---- train -------------------------------------------------------------

namespace {

int train_classifier_stage(const PipelineConfig& cfg) {
  auto train = load_split(cfg, "train");
  long skipped = 0;
  auto negatives = build_neutral_negatives(train, cfg.seed, &skipped);
  auto masked = build_masked_negatives(train, cfg.seed);
  LabeledCorpus combined = train;
  combined.insert(combined.end(), negatives.begin(), negatives.end());
  combined.insert(combined.end(), masked.begin(), masked.end());
  auto vocab = build_vocab(combined, cfg.vocab_min_count);

  std::mt19937_64 rng(cfg.seed);
  StanceModel model(vocab.size(), cfg.emb_dim, cfg.stance_hidden, rng);
  if (!cfg.pretrained_embeddings.empty())
    model.emb->load_pretrained(cfg.pretrained_embeddings, vocab.id_to_token);
  auto report = train_stance(model, vocab, combined, cfg.stance_train);
  report.neutral_pairs_added = static_cast<long>(negatives.size());
  report.neutral_pairs_skipped = skipped;

  save_checkpoint(snapshot("classifier", vocab.id_to_token, model.params()),
                  cfg.checkpoint_path("classifier"));
  json j = report_header(cfg, "train classifier");
  j["epochs_run"] = report.epochs_run;
  j["dev_accuracy"] = report.dev_accuracy;
  j["best_dev_accuracy"] = report.best_dev_accuracy;
  j["neutral_pairs_added"] = report.neutral_pairs_added;
  j["neutral_pairs_skipped"] = report.neutral_pairs_skipped;
  j["masked_pairs_added"] = static_cast<long>(masked.size());
  write_json(cfg.out_dir + "/train_classifier_report.json", j);
  std::ostringstream text;
  text << "classifier training (seed " << cfg.seed << ")\n"
       << "  epochs: " << report.epochs_run << "\n"
       << "  best dev accuracy: " << report.best_dev_accuracy << "\n"
       << "  neutral negatives added: " << report.neutral_pairs_added
       << " (skipped " << report.neutral_pairs_skipped << ")\n"
       << "  masked variants added: " << masked.size() << "\n";
  write_text(cfg.out_dir + "/train_classifier_report.txt", text.str());
  return 0;
}

int train_masker_stage(const PipelineConfig& cfg) {
  auto bundle = load_stance_bundle(cfg);
  auto train = load_split(cfg, "train");
  std::mt19937_64 rng(cfg.seed);
  MaskerModel model(bundle.vocab.size(), cfg.emb_dim, cfg.masker_hidden, rng);
  auto report = train_masker(model, bundle.model, bundle.vocab, train, cfg.masker);
  save_checkpoint(snapshot("masker", bundle.vocab.id_to_token, model.params()),
                  cfg.checkpoint_path("masker"));
  json j = report_header(cfg, "train masker");
  j["epochs_run"] = report.epochs_run;
  j["best_epoch"] = report.best_epoch;
  j["best"] = {{"accuracy", report.best.neutrality_accuracy},
               {"mean_mask_size", report.best.mean_mask_size},
               {"delta", report.best.delta()}};
  j["target_masks_found"] = report.target_masks_found;
  j["target_masks_missing"] = report.target_masks_missing;
  json rows = json::array();
  for (const auto& m : report.dev_metrics)
    rows.push_back({{"accuracy", m.neutrality_accuracy},
                    {"mean_mask_size", m.mean_mask_size},
                    {"delta", m.delta()}});
  j["epochs"] = rows;
  write_json(cfg.out_dir + "/train_masker_report.json", j);
  std::ostringstream text;
  text << "masker training (seed " << cfg.seed << ", lambda " << cfg.masker.lambda << ")\n"
       << "  epochs run: " << report.epochs_run << " (best " << report.best_epoch << ")\n"
       << "  best dev: acc " << report.best.neutrality_accuracy << ", size "
       << report.best.mean_mask_size << ", delta " << report.best.delta() << "\n"
       << "  target masks: " << report.target_masks_found << " found, "
       << report.target_masks_missing << " missing\n";
  write_text(cfg.out_dir + "/train_masker_report.txt", text.str());
  return 0;
}

int train_generator_stage(const PipelineConfig& cfg) {
  auto bundle = load_stance_bundle(cfg);
  auto masker = load_masker_model(cfg, bundle.vocab);
  auto train = load_split(cfg, "train");
  std::mt19937_64 rng(cfg.seed);
  GeneratorModel model(bundle.vocab.size(), cfg.emb_dim, cfg.generator_hidden, rng);
  model.mode = cfg.inference.mode;
  auto report = train_generator(model, train, &masker, &bundle.model, bundle.vocab,
                                cfg.masker, cfg.generator_train);
  save_checkpoint(snapshot("generator", bundle.vocab.id_to_token, model.params()),
                  cfg.checkpoint_path("generator"));
  json j = report_header(cfg, "train generator");
  j["steps_run"] = report.steps_run;
  j["examples_skipped"] = report.examples_skipped;
  j["loss_curve"] = report.loss_curve;
  j["mode"] = gen_mode_name(model.mode);
  write_json(cfg.out_dir + "/train_generator_report.json", j);
  std::ostringstream text;
  text << "generator training (seed " << cfg.seed << ", mode " << gen_mode_name(model.mode)
       << ")\n  steps: " << report.steps_run << "\n  skipped examples: "
       << report.examples_skipped << "\n";
  write_text(cfg.out_dir + "/train_generator_report.txt", text.str());
  return 0;
}

}  // namespace

int cmd_train(const std::string& stage, const PipelineConfig& cfg) {
  ensure_dir(cfg.out_dir);
  if (stage == "classifier") return train_classifier_stage(cfg);
  if (stage == "masker") return train_masker_stage(cfg);
  if (stage == "generator") return train_generator_stage(cfg);
  throw PipelineError("unknown training stage '" + stage +
                      "' (expected classifier, masker or generator)");
}

// ---- rewrite -----------------------------------------------------------

int cmd_rewrite(const PipelineConfig& cfg, const std::string& input_path,
                const std::string& output_path) {
  auto bundle = load_stance_bundle(cfg);
  auto masker = load_masker_model(cfg, bundle.vocab);
  auto generator = load_generator_model(cfg, bundle.vocab);
  auto pairs = load_jsonl(input_path);
  std::vector<RewriteRecord> records;
  long agree = 0, failed = 0;
  for (const auto& p : pairs) {
    auto rec = rewrite_pair(bundle.model, masker, generator, bundle.vocab, cfg, p);
    if (!rec.error.empty()) ++failed;
    else if (rec.achieved == Relation::AGREE) ++agree;
    records.push_back(std::move(rec));
  }
  save_rewrites(records, output_path);
  json j = report_header(cfg, "rewrite");
  j["pairs"] = static_cast<long>(pairs.size());
  j["agree"] = agree;
  j["errors"] = failed;
  write_json(cfg.out_dir + "/rewrite_report.json", j);
  return 0;
}

// ---- eval --------------------------------------------------------------

int cmd_eval(const PipelineConfig& cfg, const std::string& rewrites_path,
             const std::string& gold_path) {
  auto bundle = load_stance_bundle(cfg);
  auto records = load_rewrites(rewrites_path);
  auto gold = load_jsonl(gold_path);
  if (records.size() != gold.size())
    throw PipelineError("rewrites and gold differ in size (" +
                        std::to_string(records.size()) + " vs " +
                        std::to_string(gold.size()) + ")");
  for (std::size_t i = 0; i < records.size(); ++i)
    if (records[i].id != gold[i].id)
      throw PipelineError("id mismatch at record " + std::to_string(i) + ": '" +
                          records[i].id + "' vs '" + gold[i].id + "'");

  double sari_sum = 0, keep_sum = 0, add_sum = 0, del_sum = 0;
  long sari_n = 0;
  std::vector<std::vector<int>> pred_masks, gold_masks;
  long neutral_residuals = 0, eval_residuals = 0;
  double size_sum = 0.0;
  std::vector<std::pair<Tokens, Tokens>> judged;
  for (std::size_t i = 0; i < records.size(); ++i) {
    const auto& r = records[i];
    const auto& g = gold[i];
    if (!r.error.empty()) continue;
    if (g.gold_updated) {
      auto s = sari(g.sentence, r.output, *g.gold_updated);
      sari_sum += s.sari;
      keep_sum += s.keep_f1;
      add_sum += s.add_f1;
      del_sum += s.del_f1;
      ++sari_n;
    }
    std::vector<int> pm(r.residual.size(), 0);
    for (std::size_t k = 0; k < r.residual.size(); ++k)
      if (r.residual[k] == "<mask>" && g.sentence[k] != "<mask>") pm[k] = 1;
    if (g.gold_mask) {
      pred_masks.push_back(pm);
      gold_masks.push_back(*g.gold_mask);
    }
    if (g.relation != Relation::NEUTRAL) {
      auto rids = bundle.vocab.encode(r.residual);
      auto cids = bundle.vocab.encode(r.claim);
      if (bundle.model.predict(rids, cids) == Relation::NEUTRAL) ++neutral_residuals;
      ++eval_residuals;
      long masked = 0;
      for (int b : pm) masked += b;
      size_sum += static_cast<double>(masked) / pm.size();
    }
    if (!r.output.empty()) judged.emplace_back(r.output, r.claim);
  }

  json j = report_header(cfg, "eval");
  j["sari"] = {{"mean", sari_n ? sari_sum / sari_n : 0.0},
               {"keep", sari_n ? keep_sum / sari_n : 0.0},
               {"add", sari_n ? add_sum / sari_n : 0.0},
               {"del", sari_n ? del_sum / sari_n : 0.0},
               {"instances", sari_n},
               {"aggregation", "per-sentence mean"}};
  if (!pred_masks.empty()) {
    auto prf = mask_prf(pred_masks, gold_masks);
    j["mask"] = {{"precision", prf.precision}, {"recall", prf.recall}, {"f1", prf.f1}};
  }
  const double acc =
      eval_residuals ? static_cast<double>(neutral_residuals) / eval_residuals : 0.0;
  const double size = eval_residuals ? size_sum / eval_residuals : 0.0;
  j["masker"] = {{"neutrality_accuracy", acc}, {"mean_mask_size", size},
                 {"delta", acc - size}};
  j["agreement_rate"] =
      judged.empty() ? 0.0
                     : agreement_rate(
                           [&](const Tokens& s, const Tokens& c) {
                             return bundle.model.predict(bundle.vocab.encode(s),
                                                         bundle.vocab.encode(c));
                           },
                           judged);
  write_json(cfg.out_dir + "/eval_report.json", j);
  std::ostringstream text;
  text << std::fixed << std::setprecision(4);
  text << "evaluation (seed " << cfg.seed << ")\n"
       << "  SARI mean " << j["sari"]["mean"].get<double>() << " (keep "
       << j["sari"]["keep"].get<double>() << ", add " << j["sari"]["add"].get<double>()
       << ", del " << j["sari"]["del"].get<double>() << ") over " << sari_n << "\n";
  if (j.contains("mask"))
    text << "  mask P/R/F1: " << j["mask"]["precision"].get<double>() << " / "
         << j["mask"]["recall"].get<double>() << " / " << j["mask"]["f1"].get<double>()
         << "\n";
  text << "  masker neutrality acc " << acc << ", mean size " << size << ", delta "
       << (acc - size) << "\n"
       << "  agreement rate " << j["agreement_rate"].get<double>() << "\n";
  write_text(cfg.out_dir + "/eval_report.txt", text.str());
  return 0;
}

// ---- lambda sweep ------------------------------------------------------

int cmd_sweep_lambda(const PipelineConfig& cfg) {
  auto bundle = load_stance_bundle(cfg);
  auto train = load_split(cfg, "train");
  auto dev = load_split(cfg, "dev");
  std::vector<bool> regs = cfg.sweep_both_reg
                               ? std::vector<bool>{false, true}
                               : std::vector<bool>{cfg.masker.syntactic_reg};
  auto rows = lambda_sweep(bundle.model, bundle.vocab, train, dev, cfg.sweep_lambdas,
                           regs, cfg.masker, cfg.emb_dim, cfg.masker_hidden);
  ensure_dir(cfg.out_dir);
  write_text(cfg.out_dir + "/lambda_sweep.tsv", sweep_table_tsv(rows));
  write_text(cfg.out_dir + "/lambda_sweep.txt", sweep_table_text(rows));
  return 0;
}

// ---- augmentation ------------------------------------------------------

AugmentResult augment_corpus(const StanceModel& stance, const MaskerModel& masker,
                             const GeneratorModel& generator, const Vocab& vocab,
                             const PipelineConfig& cfg, const LabeledCorpus& corpus,
                             AugmentMode mode) {
  AugmentResult result;
  long serial = 0;
  for (const auto& p : corpus) {
    if (p.relation != Relation::DISAGREE) continue;
    if (mode == AugmentMode::COPY_CLAIM) {
      ClaimPair np;
      np.id = p.id + "-aug-a" + std::to_string(serial++);
      np.claim = p.claim;
      np.sentence = p.claim;
      np.relation = Relation::AGREE;
      result.augmented_pairs.push_back(std::move(np));
      ++result.new_agree;
      continue;
    }
    auto rec = rewrite_pair(stance, masker, generator, vocab, cfg, p);
    if (!rec.error.empty() || rec.achieved != Relation::AGREE || rec.output.empty()) {
      ++result.failed;
    } else {
      ClaimPair np;
      np.id = p.id + "-aug-a" + std::to_string(serial++);
      np.claim = p.claim;
      np.sentence = rec.output;
      np.relation = Relation::AGREE;
      result.augmented_pairs.push_back(std::move(np));
      ++result.new_agree;
    }
    // Balance step: regenerate machine-styled refuting evidence by running
    // the generator as an auto-encoder over the residual and a claim that
    // restates the sentence's own slot.
    if (auto restating = synthetic_restating_claim(p.sentence)) {
      auto regenerated =
          generator.greedy_decode(rec.residual.empty() ? p.sentence : rec.residual,
                                  *restating, vocab, cfg.inference);
      if (!regenerated.empty()) {
        ClaimPair np;
        np.id = p.id + "-aug-d" + std::to_string(serial++);
        np.claim = p.claim;
        np.sentence = regenerated;
        np.relation = Relation::DISAGREE;
        result.augmented_pairs.push_back(std::move(np));
        ++result.regenerated_disagree;
      }
    }
  }
  return result;
}

int cmd_augment(const PipelineConfig& cfg, const std::string& corpus_path,
                const std::string& output_path, AugmentMode mode) {
  auto bundle = load_stance_bundle(cfg);
  auto masker = load_masker_model(cfg, bundle.vocab);
  auto generator = load_generator_model(cfg, bundle.vocab);
  auto corpus = load_jsonl(corpus_path);
  auto result = augment_corpus(bundle.model, masker, generator, bundle.vocab, cfg,
                               corpus, mode);
  LabeledCorpus augmented = corpus;
  augmented.insert(augmented.end(), result.augmented_pairs.begin(),
                   result.augmented_pairs.end());
  save_jsonl(augmented, output_path);
  json j = report_header(cfg, "augment");
  j["mode"] = mode == AugmentMode::COPY_CLAIM ? "COPY_CLAIM" : "PIPELINE";
  j["input_disagree"] = result.new_agree + result.failed;
  j["new_agree"] = result.new_agree;
  j["regenerated_disagree"] = result.regenerated_disagree;
  j["failed"] = result.failed;
  write_json(cfg.out_dir + "/augment_report.json", j);
  return 0;
}

AugmentationExperiment run_augmentation_experiment(const PipelineConfig& cfg) {
  if (cfg.synth.bias_cue.empty())
    throw PipelineError("eval-augmentation requires synth.bias_cue to be configured");
  auto corpus = generate_synthetic(cfg.synth);

  auto train_classifier_on = [&](const LabeledCorpus& base) {
    long skipped = 0;
    auto negatives = build_neutral_negatives(base, cfg.seed, &skipped);
    auto masked = build_masked_negatives(base, cfg.seed);
    LabeledCorpus combined = base;
    combined.insert(combined.end(), negatives.begin(), negatives.end());
    combined.insert(combined.end(), masked.begin(), masked.end());
    auto vocab = build_vocab(combined, cfg.vocab_min_count);
    std::mt19937_64 rng(cfg.seed);
    StanceBundle b;
    b.vocab = vocab;
    b.model = StanceModel(vocab.size(), cfg.emb_dim, cfg.stance_hidden, rng);
    train_stance(b.model, b.vocab, combined, cfg.stance_train);
    return b;
  };

  AugmentationExperiment exp;
  auto base = train_classifier_on(corpus.train);
  exp.unaugmented_accuracy = relation_accuracy(base.model, base.vocab, corpus.symmetric);

  // Claim-only probe: same architecture, sentences blanked out everywhere.
  {
    LabeledCorpus blind = corpus.train;
    for (auto& p : blind) {
      p.sentence = {"<unk>"};
      p.siblings.clear();
      p.gold_mask.reset();
      p.gold_updated.reset();
    }
    LabeledCorpus blind_test = corpus.test;
    for (auto& p : blind_test) p.sentence = {"<unk>"};
    auto probe = train_classifier_on(blind);
    exp.claim_only_accuracy = relation_accuracy(probe.model, probe.vocab, blind_test);
    long counts[3] = {0, 0, 0};
    for (const auto& p : corpus.test) ++counts[static_cast<int>(p.relation)];
    exp.majority_fraction =
        static_cast<double>(std::max({counts[0], counts[1], counts[2]})) /
        static_cast<double>(corpus.test.size());
  }

  // Pipeline trained against the biased classifier.
  std::mt19937_64 rng(cfg.seed);
  MaskerModel masker(base.vocab.size(), cfg.emb_dim, cfg.masker_hidden, rng);
  train_masker(masker, base.model, base.vocab, corpus.train, cfg.masker);
  GeneratorModel generator(base.vocab.size(), cfg.emb_dim, cfg.generator_hidden, rng);
  generator.mode = cfg.inference.mode;
  train_generator(generator, corpus.train, &masker, &base.model, base.vocab, cfg.masker,
                  cfg.generator_train);

  auto aug = augment_corpus(base.model, masker, generator, base.vocab, cfg, corpus.train,
                            AugmentMode::PIPELINE);
  exp.augmented_added = static_cast<long>(aug.augmented_pairs.size());
  exp.augment_failed = aug.failed;

  LabeledCorpus augmented_train = corpus.train;
  augmented_train.insert(augmented_train.end(), aug.augmented_pairs.begin(),
                         aug.augmented_pairs.end());
  auto augmented = train_classifier_on(augmented_train);
  exp.augmented_accuracy =
      relation_accuracy(augmented.model, augmented.vocab, corpus.symmetric);
  return exp;
}

int cmd_eval_augmentation(const PipelineConfig& cfg) {
  ensure_dir(cfg.out_dir);
  auto exp = run_augmentation_experiment(cfg);
  json j = report_header(cfg, "eval-augmentation");
  j["unaugmented_accuracy"] = exp.unaugmented_accuracy;
  j["augmented_accuracy"] = exp.augmented_accuracy;
  j["delta"] = exp.augmented_accuracy - exp.unaugmented_accuracy;
  j["claim_only_accuracy"] = exp.claim_only_accuracy;
  j["majority_fraction"] = exp.majority_fraction;
  j["augmented_added"] = exp.augmented_added;
  j["augment_failed"] = exp.augment_failed;
  write_json(cfg.out_dir + "/augmentation_report.json", j);
  std::ostringstream text;
  text << std::fixed << std::setprecision(4);
  text << "augmentation experiment (seed " << cfg.seed << ")\n"
       << "  symmetric accuracy: unaugmented " << exp.unaugmented_accuracy
       << " -> augmented " << exp.augmented_accuracy << "\n"
       << "  claim-only probe " << exp.claim_only_accuracy << " vs majority "
       << exp.majority_fraction << "\n"
       << "  augmented pairs added " << exp.augmented_added << " (failed "
       << exp.augment_failed << ")\n";
  write_text(cfg.out_dir + "/augmentation_report.txt", text.str());
  return 0;
}

std::vector<std::string> stance_param_order(const StanceModel& m) {
  std::vector<std::string> names;
  for (const auto& p : m.params()) names.push_back(p->name);
  return names;
}

}  // namespace factedit
