#include <sys/wait.h>

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "batch.hpp"
#include "commands.hpp"
#include "gtest/gtest.h"
#include "json.hpp"
#include "metrics_fixture.hpp"

namespace vertseq::cli {
namespace {

namespace fs = std::filesystem;
using nlohmann::json;

const std::string kExample = std::string(VERTSEQ_TEST_DATA_DIR) +
                             "/worked_example.jsonl";

class CliTest : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() /
           ("vertseq-cli-" +
            std::string(::testing::UnitTest::GetInstance()
                            ->current_test_info()
                            ->name()));
    fs::remove_all(dir_);
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }

  std::string path(const std::string& name) const { return dir_ / name; }

  static std::string slurp(const std::string& p) {
    std::ifstream in(p, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
  }

  static std::vector<json> json_lines(const std::string& text) {
    std::vector<json> out;
    std::istringstream in(text);
    std::string line;
    while (std::getline(in, line)) {
      if (!line.empty()) out.push_back(json::parse(line));
    }
    return out;
  }

  // Runs the installed binary; returns its exit status.
  static int run(const std::string& args) {
    const std::string cmd =
        std::string(VERTSEQ_CLI_PATH) + " " + args + " >/dev/null 2>&1";
    const int status = std::system(cmd.c_str());
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  }

  void write(const std::string& name, const std::string& text) const {
    std::ofstream(path(name), std::ios::binary) << text;
  }

  fs::path dir_;
};

SolverConfig example_solver() {
  SolverConfig cfg;
  cfg.label_weight = 1.0;
  cfg.region_weight = 0.0;
  cfg.transition_weight = 1.0;
  cfg.include_none_transition = false;
  return cfg;
}

NormConfig raw_norm() {
  NormConfig cfg;
  cfg.enable_smoothing = false;
  cfg.transition_column_norm = false;
  return cfg;
}

TEST_F(CliTest, LabelExampleWithDefaults) {
  LabelOptions opts;
  opts.input = kExample;
  std::ostringstream out, err;
  ASSERT_EQ(cmd_label(opts, out, err), kExitOk);
  const auto docs = json_lines(out.str());
  ASSERT_EQ(docs.size(), 2u);
  EXPECT_EQ(docs[0]["subject_id"], "example-uniform");
  EXPECT_EQ(docs[0]["labels"],
            json::array({"T11", "T12", "T13", "L1"}));
  EXPECT_EQ(docs[0]["tea_flag"], true);
  EXPECT_EQ(docs[0]["t12_double"], true);
}

TEST_F(CliTest, LabelExampleWithExampleWeights) {
  LabelOptions opts;
  opts.input = kExample;
  opts.solver = example_solver();
  opts.norm = raw_norm();
  std::ostringstream out, err;
  ASSERT_EQ(cmd_label(opts, out, err), kExitOk);
  const auto docs = json_lines(out.str());
  ASSERT_EQ(docs.size(), 2u);
  EXPECT_EQ(docs[0]["labels"], json::array({"T11", "T12", "T13", "L1"}));
  EXPECT_NEAR(docs[0]["cost"].get<double>(), -4.1, 1e-12);
  EXPECT_EQ(docs[1]["labels"], json::array({"T11", "T12", "L1", "L2"}));
  EXPECT_NEAR(docs[1]["cost"].get<double>(), -2.87, 1e-12);
}

TEST_F(CliTest, EmptyBatchWarns) {
  write("empty.jsonl", "\n\n");
  LabelOptions opts;
  opts.input = path("empty.jsonl");
  std::ostringstream out, err;
  EXPECT_EQ(cmd_label(opts, out, err), kExitOk);
  EXPECT_TRUE(out.str().empty());
  EXPECT_NE(err.str().find("warning"), std::string::npos);
}

TEST_F(CliTest, CorruptRecordIsIsolated) {
  std::ifstream in(kExample);
  std::string first, second;
  std::getline(in, first);
  std::getline(in, second);
  write("mixed.jsonl", first + "\n{\"subject_id\":\"broken\",\"vertebrae\":[{}]}\n" +
                           "not json at all\n" + second + "\n");
  LabelOptions opts;
  opts.input = path("mixed.jsonl");
  std::ostringstream out, err;
  EXPECT_EQ(cmd_label(opts, out, err), kExitData);
  const auto docs = json_lines(out.str());
  ASSERT_EQ(docs.size(), 4u);
  EXPECT_EQ(docs[0]["status"], "ok");
  EXPECT_EQ(docs[1]["status"], "failed");
  EXPECT_EQ(docs[1]["subject_id"], "broken");
  EXPECT_NE(docs[1]["error"].get<std::string>().find("label_scores"),
            std::string::npos);
  EXPECT_EQ(docs[2]["status"], "failed");
  EXPECT_EQ(docs[3]["status"], "ok");
  EXPECT_EQ(docs[3]["subject_id"], "example-visibility");
  EXPECT_NE(err.str().find("broken"), std::string::npos);
}

TEST_F(CliTest, WorkerCountDoesNotChangeOutput) {
  SynthOptions synth;
  synth.n_subjects = 40;
  synth.synth.seed = 5;
  synth.synth.tea_rate = 0.3;
  synth.synth.lea_rate = 0.3;
  synth.noise.label_confusion = 0.3;
  synth.noise.head_dropout = 0.1;
  synth.output = path("corpus.jsonl");
  std::ostringstream err;
  ASSERT_EQ(cmd_synth(synth, err), kExitOk);

  LabelOptions one;
  one.input = synth.output;
  LabelOptions four = one;
  four.workers = 4;
  std::ostringstream a, b;
  ASSERT_EQ(cmd_label(one, a, err), kExitOk);
  ASSERT_EQ(cmd_label(four, b, err), kExitOk);
  EXPECT_EQ(a.str(), b.str());
}

std::string labels_doc(const std::string& id, const std::vector<FinalLabel>& l,
                       const char* field) {
  json names = json::array();
  for (FinalLabel x : l) names.push_back(std::string(to_string(x)));
  return json{{"subject_id", id}, {field, names}}.dump() + "\n";
}

TEST_F(CliTest, EvalKnownTriple) {
  const auto pairs = vertseq::testing::three_subject_pairs();
  std::string preds, refs;
  for (std::size_t i = 0; i < pairs.size(); ++i) {
    const std::string id = "s" + std::to_string(i);
    preds += labels_doc(id, pairs[i].predicted, "labels");
    // References in reverse order: matching is by id.
    refs = labels_doc(id, pairs[i].reference, "reference_labels") + refs;
  }
  write("pred.jsonl", preds);
  write("ref.jsonl", refs);
  EvalOptions opts{path("pred.jsonl"), path("ref.jsonl"), path("eval.csv")};
  std::ostringstream out, err;
  ASSERT_EQ(cmd_eval(opts, out, err), kExitOk) << err.str();
  const json report = json::parse(out.str());
  EXPECT_NEAR(report["plp"].get<double>(), vertseq::testing::kThreeSubjectPlp,
              1e-9);
  EXPECT_NEAR(report["subject_correctness_mean"].get<double>(),
              vertseq::testing::kThreeSubjectMean, 1e-9);
  EXPECT_NEAR(report["subject_correctness_std"].get<double>(),
              vertseq::testing::kThreeSubjectStd, 1e-9);
  EXPECT_EQ(report["tea_recall"].get<double>(), 50.0);
  EXPECT_EQ(report["lea_recall"].get<double>(), 100.0);

  const std::string csv = slurp(path("eval.csv"));
  EXPECT_EQ(csv.rfind(std::string(kCsvHeader) + "\neval,", 0), 0u);
}

TEST_F(CliTest, EvalSelfAndDisjoint) {
  LabelOptions label;
  label.input = kExample;
  label.output = path("pred.jsonl");
  std::ostringstream out, err;
  ASSERT_EQ(cmd_label(label, out, err), kExitOk);

  EvalOptions self{path("pred.jsonl"), path("pred.jsonl"), ""};
  ASSERT_EQ(cmd_eval(self, out, err), kExitOk);
  const json report = json::parse(out.str());
  EXPECT_EQ(report["plp"].get<double>(), 100.0);
  EXPECT_EQ(report["tea_recall"].get<double>(), 100.0);
  EXPECT_TRUE(report["lea_recall"].is_null());

  write("other.jsonl",
        labels_doc("nobody", {FinalLabel::T1}, "reference_labels"));
  EvalOptions disjoint{path("pred.jsonl"), path("other.jsonl"), ""};
  std::ostringstream out2, err2;
  EXPECT_EQ(cmd_eval(disjoint, out2, err2), kExitData);
  EXPECT_NE(err2.str().find("nobody"), std::string::npos);
  EXPECT_NE(err2.str().find("example-uniform"), std::string::npos);
}

TEST_F(CliTest, SynthIsByteIdenticalAcrossRuns) {
  ASSERT_EQ(run("synth -n 1000 --seed 42 -o " + path("a.jsonl")), kExitOk);
  ASSERT_EQ(run("synth -n 1000 --seed 42 -o " + path("b.jsonl")), kExitOk);
  const std::string a = slurp(path("a.jsonl"));
  EXPECT_EQ(a, slurp(path("b.jsonl")));
  EXPECT_EQ(std::count(a.begin(), a.end(), '\n'), 1000);
  const json manifest = json::parse(slurp(path("a.jsonl.manifest.json")));
  EXPECT_EQ(manifest["synth"]["seed"], 42);
  EXPECT_EQ(manifest["n_subjects"], 1000);
}

TEST_F(CliTest, SynthRatesFollowFlags) {
  ASSERT_EQ(run("synth -n 4000 --seed 7 --tea-rate 0.082 --lea-rate 0.146 -o " +
                path("c.jsonl")),
            kExitOk);
  int tea = 0, lea = 0, n = 0;
  for (const json& doc : json_lines(slurp(path("c.jsonl")))) {
    std::vector<FinalLabel> ref;
    for (const auto& s : doc["reference_labels"]) {
      ref.push_back(*parse_final_label(s.get<std::string>()));
    }
    tea += is_tea_case(ref);
    lea += is_lea_case(ref);
    ++n;
  }
  const auto near = [n](int hits, double p) {
    return std::abs(static_cast<double>(hits) / n - p) <
           3 * std::sqrt(p * (1 - p) / n);
  };
  EXPECT_TRUE(near(tea, 0.082)) << tea;
  EXPECT_TRUE(near(lea, 0.146)) << lea;
}

TEST_F(CliTest, SynthAllWindows) {
  ASSERT_EQ(run("synth -n 1 --tea-rate 0 --lea-rate 0 --fov all -o " +
                path("w.jsonl")),
            kExitOk);
  const auto docs = json_lines(slurp(path("w.jsonl")));
  EXPECT_EQ(docs.size(), 300u);
}

TEST_F(CliTest, GammaZeroRowMatchesBaseline) {
  SynthOptions synth;
  synth.n_subjects = 60;
  synth.synth.seed = 11;
  synth.synth.tea_rate = 0.4;
  synth.synth.lea_rate = 0.4;
  synth.noise.label_confusion = 0.35;
  synth.noise.head_dropout = 0.15;
  synth.noise.transition_strength = 0.7;
  synth.output = path("corpus.jsonl");
  std::ostringstream err;
  ASSERT_EQ(cmd_synth(synth, err), kExitOk);

  LabelOptions label;
  label.input = synth.output;
  label.output = path("pred.jsonl");
  std::ostringstream sink;
  ASSERT_EQ(cmd_label(label, sink, err), kExitOk);
  EvalOptions eval{path("pred.jsonl"), synth.output, path("base.csv")};
  ASSERT_EQ(cmd_eval(eval, sink, err), kExitOk);
  std::istringstream base_csv(slurp(path("base.csv")));
  std::string header, base_row;
  std::getline(base_csv, header);
  std::getline(base_csv, base_row);

  SweepSpec spec;
  spec.input = synth.output;
  std::ostringstream out;
  ASSERT_EQ(cmd_sweep(spec, out, err), kExitOk);
  std::istringstream rows(out.str());
  std::string line, zero_row;
  std::getline(rows, line);
  EXPECT_EQ(line, kCsvHeader);
  int n_rows = 0;
  while (std::getline(rows, line)) {
    ++n_rows;
    if (line.rfind("0,", 0) == 0) zero_row = line;
  }
  EXPECT_EQ(n_rows, 17);
  ASSERT_FALSE(zero_row.empty());
  EXPECT_EQ(zero_row.substr(zero_row.find(',')),
            base_row.substr(base_row.find(',')));
}

TEST_F(CliTest, FovFullLengthMatchesWholeCorpus) {
  SynthOptions synth;
  synth.n_subjects = 20;
  synth.synth.tea_rate = 0.0;
  synth.synth.lea_rate = 0.0;
  synth.noise.label_confusion = 0.3;
  synth.output = path("corpus.jsonl");
  std::ostringstream err;
  ASSERT_EQ(cmd_synth(synth, err), kExitOk);

  SweepSpec spec;
  spec.kind = SweepKind::Fov;
  spec.lo = spec.hi = 24;
  spec.step = 1;
  spec.input = synth.output;
  std::ostringstream out;
  ASSERT_EQ(cmd_sweep(spec, out, err), kExitOk);

  std::vector<SubjectRecord> corpus;
  for (auto& rec : read_subject_batch(synth.output)) corpus.push_back(*rec.subject);
  const EvalReport whole =
      label_and_evaluate(corpus, NormConfig{}, SolverConfig{}, 1);
  EXPECT_NE(out.str().find("\n" + to_csv_row("24", whole) + "\n"),
            std::string::npos);
}

TEST_F(CliTest, SkipSweepWithoutGapsIsFlatAtHighPenalty) {
  SynthOptions synth;
  synth.n_subjects = 30;
  synth.noise.label_confusion = 0.3;
  synth.output = path("corpus.jsonl");
  std::ostringstream err;
  ASSERT_EQ(cmd_synth(synth, err), kExitOk);
  SweepSpec spec;
  spec.kind = SweepKind::SkipCost;
  spec.lo = 5;
  spec.hi = 7;
  spec.step = 1;
  spec.input = synth.output;
  std::ostringstream out;
  ASSERT_EQ(cmd_sweep(spec, out, err), kExitOk);
  std::istringstream rows(out.str());
  std::string line;
  std::getline(rows, line);
  std::vector<std::string> tails;
  while (std::getline(rows, line)) tails.push_back(line.substr(line.find(',')));
  ASSERT_EQ(tails.size(), 3u);
  EXPECT_EQ(tails[0], tails[1]);
  EXPECT_EQ(tails[1], tails[2]);
}

TEST_F(CliTest, ExitCodes) {
  EXPECT_EQ(run("label " + kExample), kExitOk);
  EXPECT_EQ(run("sweep gamma " + kExample + " --lo 1 --hi 0"), kExitUsage);
  EXPECT_EQ(run("sweep gamma " + kExample + " --step 0"), kExitUsage);
  EXPECT_EQ(run("frobnicate"), kExitUsage);
  EXPECT_EQ(run("label " + path("missing.jsonl")), kExitData);
  write("bad.jsonl", "{\"subject_id\":\"x\"}\n");
  EXPECT_EQ(run("label " + path("bad.jsonl")), kExitData);
  EXPECT_EQ(run("label " + kExample + " --sigma -1"), kExitData);
}

TEST(SweepGridTest, HitsZeroExactly) {
  const auto grid = sweep_grid(-2, 2, 0.25);
  ASSERT_EQ(grid.size(), 17u);
  EXPECT_EQ(grid[8], 0.0);
  EXPECT_EQ(grid.back(), 2.0);
  EXPECT_THROW(sweep_grid(1, 0, 0.1), ValidationError);
  EXPECT_THROW(sweep_grid(0, 1, -0.1), ValidationError);
}

}  // namespace
}  // namespace vertseq::cli
