#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <random>

#include "doctest.h"
#include "factedit/pipeline.hpp"

using namespace factedit;
namespace fs = std::filesystem;

namespace {

struct TempDir {
  fs::path path;
  TempDir() {
    path = fs::temp_directory_path() /
           ("factedit-test-" + std::to_string(std::random_device{}()));
    fs::create_directories(path);
  }
  ~TempDir() {
    std::error_code ec;
    fs::remove_all(path, ec);
  }
  std::string str() const { return path.string(); }
};

std::string slurp(const std::string& p) {
  std::ifstream in(p, std::ios::binary);
  REQUIRE(in.good());
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void spit(const std::string& p, const std::string& body) {
  std::ofstream out(p, std::ios::binary);
  out << body;
}

PipelineConfig tiny_config(const std::string& out_dir) {
  PipelineConfig c;
  c.seed = 5;
  c.out_dir = out_dir;
  c.synth.seed = 5;
  c.synth.num_entities = 14;
  c.synth.pairs_per_entity = 8;
  c.emb_dim = 8;
  c.stance_hidden = 8;
  c.masker_hidden = 8;
  c.generator_hidden = 8;
  c.stance_train.epochs = 2;
  c.stance_train.seed = 5;
  c.masker.epochs = 1;
  c.masker.seed = 5;
  c.generator_train.steps = 10;
  c.generator_train.batch_size = 4;
  c.generator_train.seed = 5;
  return c;
}

}  // namespace

TEST_CASE("key-value config parsing") {
  TempDir tmp;
  const auto cfg_path = (tmp.path / "c.txt").string();

  SUBCASE("comments, blank lines, trimming, later assignment wins") {
    spit(cfg_path,
         "# header comment\n"
         "seed = 3\n"
         "\n"
         "  out_dir =  /x/y  # trailing comment\n"
         "seed = 7\n");
    auto kv = KeyValueConfig::from_file(cfg_path);
    CHECK(kv.get_int("seed", 0) == 7);
    CHECK(kv.get_str("out_dir", "") == "/x/y");
    CHECK(kv.get_int("absent", 42) == 42);
  }
  SUBCASE("missing file names the path") {
    try {
      KeyValueConfig::from_file((tmp.path / "nope.txt").string());
      FAIL("expected ConfigError");
    } catch (const ConfigError& e) {
      CHECK(std::string(e.what()).find("nope.txt") != std::string::npos);
    }
  }
  SUBCASE("malformed line reported with its line number") {
    spit(cfg_path, "seed = 1\nthis is not a pair\n");
    try {
      KeyValueConfig::from_file(cfg_path);
      FAIL("expected ConfigError");
    } catch (const ConfigError& e) {
      CHECK(std::string(e.what()).find(":2") != std::string::npos);
    }
  }
  SUBCASE("typed getters reject junk and name the key") {
    spit(cfg_path, "a = xyz\nb = maybe\n");
    auto kv = KeyValueConfig::from_file(cfg_path);
    CHECK_THROWS_AS((void)kv.get_int("a", 0), ConfigError);
    CHECK_THROWS_AS((void)kv.get_real("a", 0), ConfigError);
    CHECK_THROWS_AS((void)kv.get_bool("b", false), ConfigError);
    try {
      (void)kv.get_bool("b", false);
    } catch (const ConfigError& e) {
      CHECK(std::string(e.what()).find("'b'") != std::string::npos);
    }
  }
  SUBCASE("boolean spellings") {
    spit(cfg_path, "t1 = true\nt2 = 1\nt3 = yes\nf1 = false\nf2 = 0\nf3 = no\n");
    auto kv = KeyValueConfig::from_file(cfg_path);
    CHECK(kv.get_bool("t1", false));
    CHECK(kv.get_bool("t2", false));
    CHECK(kv.get_bool("t3", false));
    CHECK_FALSE(kv.get_bool("f1", true));
    CHECK_FALSE(kv.get_bool("f2", true));
    CHECK_FALSE(kv.get_bool("f3", true));
  }
}

TEST_CASE("pipeline config resolution") {
  KeyValueConfig kv;

  SUBCASE("defaults and seed propagation") {
    kv.set("seed", "17");
    auto c = PipelineConfig::from_config(kv);
    CHECK(c.seed == 17);
    CHECK(c.stance_train.seed == 17);
    CHECK(c.masker.seed == 17);
    CHECK(c.generator_train.seed == 17);
    CHECK(c.synth.seed == 17);
    CHECK(c.sweep_lambdas == std::vector<double>{0.0, 0.2, 0.4, 0.6});
    CHECK(c.inference.escalation.front() == 0.0);
    CHECK(c.inference.escalation.back() == doctest::Approx(0.90));
  }
  SUBCASE("paths derive from out_dir unless corpus_dir overrides") {
    kv.set("out_dir", "/o");
    auto c = PipelineConfig::from_config(kv);
    CHECK(c.checkpoint_path("masker") == "/o/masker.ckpt");
    CHECK(c.data_path("dev") == "/o/data/dev.jsonl");
    kv.set("corpus_dir", "/elsewhere");
    c = PipelineConfig::from_config(kv);
    CHECK(c.data_path("dev") == "/elsewhere/dev.jsonl");
  }
  SUBCASE("escalation schedule parses and must increase strictly") {
    kv.set("inference.escalation", "0.1 0.4 0.7");
    auto c = PipelineConfig::from_config(kv);
    CHECK(c.inference.escalation == std::vector<double>{0.1, 0.4, 0.7});
    kv.set("inference.escalation", "0.1 0.1 0.7");
    CHECK_THROWS_AS((void)PipelineConfig::from_config(kv), ConfigError);
  }
  SUBCASE("sweep lambda list and mode name") {
    kv.set("sweep.lambdas", "0.0 0.5");
    kv.set("inference.mode", "NO_COPY");
    auto c = PipelineConfig::from_config(kv);
    CHECK(c.sweep_lambdas == std::vector<double>{0.0, 0.5});
    CHECK(c.inference.mode == GenMode::NO_COPY);
    kv.set("inference.mode", "SOMETHING");
    CHECK_THROWS((void)PipelineConfig::from_config(kv));
  }
}

TEST_CASE("checkpoint round trip and corruption detection") {
  TempDir tmp;
  const auto path = (tmp.path / "m.ckpt").string();
  std::mt19937_64 rng(21);
  StanceModel model(12, 6, 4, rng);
  std::vector<std::string> vocab{"<pad>", "<unk>", "<mask>", "<bos>", "<eos>", "a", "b"};

  SUBCASE("restored parameters match to float32 precision") {
    auto ckpt = snapshot("classifier", vocab, model.params());
    save_checkpoint(ckpt, path);
    auto back = load_checkpoint(path);
    CHECK(back.kind == "classifier");
    CHECK(back.vocab == vocab);
    std::mt19937_64 rng2(99);
    StanceModel fresh(12, 6, 4, rng2);
    restore_params(back, fresh.params());
    auto a = model.params(), b = fresh.params();
    REQUIRE(a.size() == b.size());
    for (std::size_t i = 0; i < a.size(); ++i) {
      REQUIRE(a[i]->values.size() == b[i]->values.size());
      for (std::size_t k = 0; k < a[i]->values.size(); ++k)
        CHECK(b[i]->values[k] == static_cast<double>(static_cast<float>(a[i]->values[k])));
    }
  }
  SUBCASE("saving twice is byte-identical") {
    auto ckpt = snapshot("classifier", vocab, model.params());
    save_checkpoint(ckpt, path);
    const auto path2 = (tmp.path / "m2.ckpt").string();
    save_checkpoint(ckpt, path2);
    CHECK(slurp(path) == slurp(path2));
  }
  SUBCASE("payload corruption fails the checksum") {
    auto ckpt = snapshot("classifier", vocab, model.params());
    save_checkpoint(ckpt, path);
    auto bytes = slurp(path);
    bytes[bytes.size() - 20] ^= 0x40;  // inside the float payload
    spit(path, bytes);
    CHECK_THROWS_AS((void)load_checkpoint(path), CheckpointError);
  }
  SUBCASE("truncation and bad magic rejected") {
    auto ckpt = snapshot("classifier", vocab, model.params());
    save_checkpoint(ckpt, path);
    auto bytes = slurp(path);
    spit(path, bytes.substr(0, bytes.size() / 2));
    CHECK_THROWS_AS((void)load_checkpoint(path), CheckpointError);
    auto bad = bytes;
    bad[0] = 'X';
    spit(path, bad);
    CHECK_THROWS_AS((void)load_checkpoint(path), CheckpointError);
  }
  SUBCASE("restore rejects a shape mismatch") {
    auto ckpt = snapshot("classifier", vocab, model.params());
    std::mt19937_64 rng3(1);
    StanceModel other(12, 6, 6, rng3);  // different hidden size
    CHECK_THROWS_AS(restore_params(ckpt, other.params()), CheckpointError);
  }
  SUBCASE("checksum is order-sensitive") {
    std::vector<float> p{1.f, 2.f, 3.f};
    std::vector<float> q{3.f, 2.f, 1.f};
    CHECK(payload_checksum(p) != payload_checksum(q));
  }
}

TEST_CASE("missing prerequisites name the stage to train") {
  TempDir tmp;
  auto cfg = tiny_config(tmp.str());

  SUBCASE("no classifier checkpoint") {
    try {
      (void)load_stance_bundle(cfg);
      FAIL("expected PipelineError");
    } catch (const PipelineError& e) {
      const std::string msg = e.what();
      CHECK(msg.find("classifier") != std::string::npos);
      CHECK(msg.find("train classifier") != std::string::npos);
    }
  }
  SUBCASE("masker training requires the frozen classifier first") {
    CHECK(cmd_gen_data(cfg) == 0);
    CHECK_THROWS_AS((void)cmd_train("masker", cfg), PipelineError);
  }
  SUBCASE("training data must exist before classifier training") {
    CHECK_THROWS_AS((void)cmd_train("classifier", cfg), PipelineError);
  }
  SUBCASE("unknown stage rejected") {
    CHECK_THROWS((void)cmd_train("discriminator", cfg));
  }
  SUBCASE("a checkpoint of the wrong kind is rejected") {
    CHECK(cmd_gen_data(cfg) == 0);
    CHECK(cmd_train("classifier", cfg) == 0);
    fs::copy_file(cfg.checkpoint_path("classifier"), cfg.checkpoint_path("masker"));
    auto bundle = load_stance_bundle(cfg);
    CHECK_THROWS_AS((void)load_masker_model(cfg, bundle.vocab), PipelineError);
  }
}

TEST_CASE("rewrite record persistence") {
  TempDir tmp;
  const auto path = (tmp.path / "r.jsonl").string();
  std::vector<RewriteRecord> records(2);
  records[0].id = "x1";
  records[0].sentence = {"a", "b", "c"};
  records[0].claim = {"d"};
  records[0].residual = {"a", "<mask>", "c"};
  records[0].output = {"a", "d", "c"};
  records[0].achieved = Relation::AGREE;
  records[0].tau_used = 0.3;
  records[0].alphas = {0.5, 0.6};
  records[1].id = "x2";
  records[1].sentence = {"q"};
  records[1].claim = {"r"};
  records[1].error = "empty sentence or claim";

  save_rewrites(records, path);
  auto back = load_rewrites(path);
  REQUIRE(back.size() == 2);
  CHECK(back[0].id == "x1");
  CHECK(back[0].sentence == records[0].sentence);
  CHECK(back[0].claim == records[0].claim);
  CHECK(back[0].residual == records[0].residual);
  CHECK(back[0].output == records[0].output);
  CHECK(back[0].achieved == Relation::AGREE);
  CHECK(back[0].tau_used == doctest::Approx(0.3));
  CHECK(back[0].error.empty());
  CHECK(back[1].error == "empty sentence or claim");

  SUBCASE("malformed line reported with its line number") {
    std::ofstream app(path, std::ios::app);
    app << "{not json\n";
    app.close();
    try {
      (void)load_rewrites(path);
      FAIL("expected PipelineError");
    } catch (const PipelineError& e) {
      CHECK(std::string(e.what()).find(":3") != std::string::npos);
    }
  }
}

TEST_CASE("end-to-end tiny pipeline is deterministic") {
  TempDir a, b;
  auto ca = tiny_config(a.str());
  auto cb = tiny_config(b.str());

  CHECK(cmd_gen_data(ca) == 0);
  CHECK(cmd_gen_data(cb) == 0);
  for (const char* split : {"train", "dev", "test", "symmetric"})
    CHECK(slurp(ca.data_path(split)) == slurp(cb.data_path(split)));

  CHECK(cmd_train("classifier", ca) == 0);
  CHECK(cmd_train("classifier", cb) == 0);
  CHECK(slurp(ca.checkpoint_path("classifier")) == slurp(cb.checkpoint_path("classifier")));

  CHECK(cmd_train("masker", ca) == 0);
  CHECK(cmd_train("masker", cb) == 0);
  CHECK(slurp(ca.checkpoint_path("masker")) == slurp(cb.checkpoint_path("masker")));

  CHECK(cmd_train("generator", ca) == 0);
  CHECK(cmd_train("generator", cb) == 0);
  CHECK(slurp(ca.checkpoint_path("generator")) == slurp(cb.checkpoint_path("generator")));

  // Rewriting the dev split twice from the same artifacts is bit-identical.
  const auto ra = (a.path / "rw.jsonl").string();
  const auto rb = (a.path / "rw2.jsonl").string();
  CHECK(cmd_rewrite(ca, ca.data_path("dev"), ra) == 0);
  CHECK(cmd_rewrite(ca, ca.data_path("dev"), rb) == 0);
  CHECK(slurp(ra) == slurp(rb));

  auto records = load_rewrites(ra);
  auto gold = load_jsonl(ca.data_path("dev"));
  CHECK(records.size() == gold.size());
  for (std::size_t i = 0; i < records.size(); ++i) {
    CHECK(records[i].id == gold[i].id);
    CHECK(records[i].residual.size() == records[i].sentence.size());
    for (const auto& tok : records[i].output) CHECK(tok != "<mask>");
    bool in_schedule = false;
    for (double t : ca.inference.escalation)
      if (records[i].tau_used == doctest::Approx(t)) in_schedule = true;
    CHECK(in_schedule);
  }

  // Evaluation runs and reports the core metric block.
  CHECK(cmd_eval(ca, ra, ca.data_path("dev")) == 0);
  auto report = slurp(ca.out_dir + "/eval_report.json");
  CHECK(report.find("\"sari\"") != std::string::npos);
  CHECK(report.find("\"agreement_rate\"") != std::string::npos);
  CHECK(report.find("\"mask\"") != std::string::npos);
}
