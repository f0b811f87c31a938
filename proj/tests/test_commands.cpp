#include <gtest/gtest.h>

#include <fstream>

#include "rsreason/commands/attn.hpp"
#include "rsreason/commands/eval.hpp"
#include "rsreason/commands/forge.hpp"
#include "rsreason/commands/score.hpp"
#include "rsreason/commands/synthesize.hpp"
#include "tmpdir.hpp"

using namespace rsreason;
using namespace rsreason::commands;
using testing_util::TempDir;

namespace {

const std::string kFixtures = RSREASON_FIXTURES;

void write(const std::string& path, const std::string& text) {
  std::ofstream(path, std::ios::binary) << text;
}

std::vector<Json> read_records(const std::string& path) {
  std::vector<Json> out;
  for (const auto& l : io::read_jsonl_lines(path)) out.push_back(Json::parse(l.text));
  return out;
}

ForgeOptions forge_opts(const TempDir& dir, const std::string& name, std::uint64_t seed) {
  ForgeOptions o;
  o.input = kFixtures + "/forge_groups.jsonl";
  o.output = dir.file(name);
  o.forge.seed = seed;
  return o;
}

SynthesizeOptions synth_opts(const std::string& out_dir) {
  SynthesizeOptions o;
  o.input = kFixtures + "/synth_items.jsonl";
  o.out_dir = out_dir;
  o.parallelism = 2;
  return o;
}

BackendFactory fixture_backends() {
  return mock_backends(socratic::MockFixture::load(kFixtures + "/synth_mock.json"));
}

}  // namespace

TEST(ForgeCommand, FixtureCorpus) {
  TempDir dir;
  const RunManifest m = run_forge(forge_opts(dir, "a.jsonl", 7));
  EXPECT_EQ(m.counts.processed, 5U);
  EXPECT_EQ(m.counts.accepted, 3U);
  EXPECT_EQ(m.counts.skipped, 2U);
  EXPECT_EQ(m.counts.rejected, 0U);

  const auto samples = read_records(dir.file("a.jsonl"));
  ASSERT_EQ(samples.size(), 3U);
  EXPECT_EQ(samples[0]["image_id"], "scene_001");
  EXPECT_EQ(samples[2]["options"].size(), 14U);
  for (const auto& s : samples) {
    EXPECT_EQ(s["query"], kMCQQuery);
    EXPECT_EQ(s["meta"]["seed"], 7);
    int inverted = 0;
    std::vector<std::string> gt;
    for (const auto& o : s["options"]) {
      if (o["inverted"].get<bool>()) ++inverted;
      else gt.push_back(o["letter"].get<std::string>());
    }
    EXPECT_EQ(s["meta"]["n_inverted"], inverted);
    EXPECT_EQ(s["gt"], Json(gt));
  }
  const auto skips = read_records(dir.file("a.jsonl.skips.jsonl"));
  ASSERT_EQ(skips.size(), 2U);
  EXPECT_EQ(skips[0]["reason"], "too few pairs");
  EXPECT_EQ(skips[1]["reason"], "too few invertible");

  const Json manifest = Json::parse(read_file(dir.file("a.jsonl.manifest.json")));
  EXPECT_EQ(manifest["subcommand"], "forge");
  EXPECT_EQ(manifest["counts"]["accepted"], 3);
  EXPECT_EQ(manifest["inputs"][0]["fnv1a64"], digest_file(kFixtures + "/forge_groups.jsonl").fnv1a64);
}

TEST(ForgeCommand, ReplayIdenticalAcrossRunsAndParallelism) {
  TempDir dir;
  run_forge(forge_opts(dir, "a.jsonl", 7));
  auto b = forge_opts(dir, "b.jsonl", 7);
  b.parallelism = 4;
  run_forge(b);
  EXPECT_EQ(read_file(dir.file("a.jsonl")), read_file(dir.file("b.jsonl")));
  run_forge(forge_opts(dir, "c.jsonl", 8));
  EXPECT_NE(read_file(dir.file("a.jsonl")), read_file(dir.file("c.jsonl")));
}

TEST(ForgeCommand, NoLeakDropsAuditFields) {
  TempDir dir;
  auto o = forge_opts(dir, "a.jsonl", 7);
  o.no_leak = true;
  run_forge(o);
  for (const auto& s : read_records(dir.file("a.jsonl"))) {
    EXPECT_FALSE(s.contains("meta"));
    for (const auto& opt : s["options"]) EXPECT_FALSE(opt.contains("inverted"));
  }
}

TEST(ForgeCommand, MalformedLinesAndStrictMode) {
  TempDir dir;
  write(dir.file("in.jsonl"), "{\"image_id\": \"x\"}\nnot json\n" +
                                  read_file(kFixtures + "/forge_groups.jsonl"));
  ForgeOptions o;
  o.input = dir.file("in.jsonl");
  o.output = dir.file("out.jsonl");
  const RunManifest m = run_forge(o);
  EXPECT_EQ(m.counts.rejected, 2U);
  EXPECT_EQ(m.counts.accepted, 3U);
  EXPECT_EQ(m.errors.size(), 2U);

  o.strict = true;
  o.overwrite = true;
  EXPECT_THROW(run_forge(o), InvalidInput);
}

TEST(ForgeCommand, RefusesToOverwrite) {
  TempDir dir;
  run_forge(forge_opts(dir, "a.jsonl", 7));
  EXPECT_THROW(run_forge(forge_opts(dir, "a.jsonl", 7)), InvalidInput);
  auto o = forge_opts(dir, "a.jsonl", 7);
  o.overwrite = true;
  EXPECT_NO_THROW(run_forge(o));
}

TEST(ScoreCommand, GroundingFixture) {
  TempDir dir;
  ScoreOptions o;
  o.input = kFixtures + "/rewards_grounding.jsonl";
  o.output = dir.file("scores.jsonl");
  o.mode = ScoringMode::grounding;
  const ScoreSummary s = run_score(o);
  EXPECT_EQ(s.lines, 8U);
  EXPECT_EQ(s.scored, 5U);
  EXPECT_EQ(s.errors, 3U);
  const auto r = read_records(o.output);
  EXPECT_EQ(r[0]["id"], "perfect");
  EXPECT_NEAR(r[0]["r_overall"].get<double>(), 1.0, 1e-12);
  EXPECT_NEAR(r[1]["r_overall"].get<double>(), 0.05, 1e-12);
  EXPECT_NEAR(r[2]["r_overall"].get<double>(), 0.0, 1e-12);
  EXPECT_NEAR(r[3]["iou"].get<double>(), 1.0 / 7.0, 1e-12);
  // [10,10,0,0] canonicalises to [0,0,10,10]; IoU with [0,0,5,10] is 0.5.
  EXPECT_NEAR(r[4]["r_overall"].get<double>(), 0.5 * 0.5 + 0.5 * 1.0, 1e-12);
  EXPECT_EQ(r[5]["line"], 6);
  EXPECT_TRUE(r[5]["fields"].contains("gt"));
  EXPECT_TRUE(r[6]["fields"].contains("lambda"));
  EXPECT_TRUE(r[7]["fields"].contains("response"));
}

TEST(ScoreCommand, McqFixtureAndReplay) {
  TempDir dir;
  ScoreOptions o;
  o.input = kFixtures + "/rewards_mcq.jsonl";
  o.output = dir.file("a.jsonl");
  o.mode = ScoringMode::mcq;
  run_score(o);
  const auto r = read_records(o.output);
  ASSERT_EQ(r.size(), 8U);
  EXPECT_NEAR(r[0]["r_overall"].get<double>(), 1.0, 1e-12);
  EXPECT_NEAR(r[1]["r_overall"].get<double>(), 0.46, 1e-12);
  EXPECT_TRUE(r[2]["hard_zero"].get<bool>());
  EXPECT_NEAR(r[2]["r_overall"].get<double>(), 0.1, 1e-12);
  // gt {A,B}, pred {B,C}, N=4: two mismatches -> 0.5; lambda 0.2.
  EXPECT_NEAR(r[3]["r_overall"].get<double>(), 0.8 * 0.5 + 0.2, 1e-12);
  EXPECT_EQ(r[5]["fields"]["gt_letters"], "letters outside the first n_options options");
  EXPECT_TRUE(r[6]["fields"].contains("n_options"));
  EXPECT_TRUE(r[7]["fields"].contains("gt_letters"));

  o.output = dir.file("b.jsonl");
  o.parallelism = 3;
  run_score(o);
  EXPECT_EQ(read_file(dir.file("a.jsonl")), read_file(dir.file("b.jsonl")));
}

TEST(ScoreCommand, GtAliasAndBadJson) {
  const auto r = score_line({1, R"({"response": "<think>x</think>A", "gt": ["A"], "n_options": 2})"},
                            ScoringMode::mcq, RewardConfig{});
  EXPECT_NEAR(r["r_acc"].get<double>(), 1.0, 1e-12);
  const auto bad = score_line({2, "{oops"}, ScoringMode::mcq, RewardConfig{});
  EXPECT_TRUE(bad.contains("error"));
  const auto overflow = score_line({3, R"({"response": "x", "gt": [1e999, 0, 1, 1]})"},
                                   ScoringMode::grounding, RewardConfig{});
  EXPECT_TRUE(overflow.contains("error"));
}

TEST(EvalCommand, AllTasks) {
  const auto lines = [](std::initializer_list<const char*> ls) {
    std::vector<io::JsonlLine> out;
    std::size_t n = 0;
    for (const char* l : ls) out.push_back({++n, l});
    return out;
  };
  auto r = evaluate(lines({R"({"id":"a","preds":["Harbor","harbor.","x","harbor","y"],"gt":"harbor"})",
                           R"({"id":"b","preds":["1","2","3","4","5"],"gt":"9"})"}),
                    EvalTask::vqa, 5);
  EXPECT_EQ(r["task"], "vqa");
  EXPECT_NEAR(r["metrics"]["avg_at_k"].get<double>(), 0.3, 1e-12);
  EXPECT_EQ(r["metrics"]["conv_at_k"].get<double>(), 0.5);
  EXPECT_EQ(r["metrics"]["pass_at_k"].get<double>(), 0.5);

  r = evaluate(lines({R"({"id":"a","pred":[0,0,10,10],"gt":[0,0,10,10]})",
                      R"({"id":"b","pred":null,"gt":[0,0,1,1]})"}),
               EvalTask::grounding, 5);
  EXPECT_EQ(r["metrics"]["miou"].get<double>(), 0.5);
  EXPECT_FALSE(r.contains("k"));

  r = evaluate(lines({R"({"id":"a","pred":"Forest","gt":"forest"})"}), EvalTask::classification, 5);
  EXPECT_EQ(r["metrics"]["accuracy"].get<double>(), 1.0);

  r = evaluate(lines({R"({"id":"a","pred":["a","b"],"gt":["b","c"]})",
                      R"({"id":"b","pred":[],"gt":[]})"}),
               EvalTask::objects, 5);
  EXPECT_NEAR(r["metrics"]["f1"].get<double>(), 0.75, 1e-12);
}

TEST(EvalCommand, BadInputAborts) {
  EXPECT_THROW(evaluate({}, EvalTask::vqa, 5), InvalidInput);
  EXPECT_THROW(evaluate({{1, R"({"id":"a","preds":["x"],"gt":"x"})"}}, EvalTask::vqa, 5),
               InvalidInput);
  EXPECT_THROW(evaluate({{1, R"({"id":"a","pred":[0,0,1],"gt":[0,0,1,1]})"}},
                        EvalTask::grounding, 5),
               InvalidInput);
}

TEST(EvalCommand, WritesReport) {
  TempDir dir;
  write(dir.file("p.jsonl"), R"({"id":"a","pred":"x","gt":"y"})" "\n");
  EvalOptions o;
  o.input = dir.file("p.jsonl");
  o.output = dir.file("report.json");
  o.task = EvalTask::classification;
  run_eval(o);
  EXPECT_EQ(Json::parse(read_file(o.output))["metrics"]["accuracy"].get<double>(), 0.0);
}

TEST(AttnCommand, WritesSeriesAndSegments) {
  TempDir dir;
  AttnOptions o;
  o.inputs = {kFixtures + "/attn_toy.txt", kFixtures + "/attn_bumps.txt",
              kFixtures + "/attn_bad.txt"};
  o.out_dir = dir.path().string();
  const auto results = run_attn(o);
  ASSERT_EQ(results.size(), 3U);
  EXPECT_TRUE(results[0].ok);
  EXPECT_TRUE(results[1].ok);
  EXPECT_FALSE(results[2].ok);
  EXPECT_NE(results[2].error.find("all-zero"), std::string::npos);
  EXPECT_EQ(results[1].peaks, 3U);

  const std::string csv = read_file(dir.file("attn_toy.csv"));
  EXPECT_EQ(csv.substr(0, csv.find('\n')), "token_index,raw,smoothed");
  EXPECT_NE(csv.find("\n0,0.5,"), std::string::npos);
  EXPECT_NE(csv.find("\n1,0.5,"), std::string::npos);
  EXPECT_NE(csv.find("\n2,0,"), std::string::npos);

  const Json seg = Json::parse(read_file(dir.file("attn_bumps.segments.json")));
  EXPECT_EQ(seg["tokens"], 90);
  EXPECT_EQ(seg["peaks"], Json::array({12, 40, 70}));
  EXPECT_EQ(seg["segments"].size(), 7U);
  EXPECT_FALSE(std::filesystem::exists(dir.file("attn_bad.csv")));
}

TEST(SynthesizeCommand, MockFixtureRun) {
  TempDir dir;
  const auto opt = synth_opts(dir.file("out"));
  const RunManifest m = run_synthesize(opt, fixture_backends());
  EXPECT_EQ(m.counts.processed, 3U);
  EXPECT_EQ(m.counts.accepted, 2U);
  EXPECT_EQ(m.counts.rejected, 1U);
  EXPECT_TRUE(m.complete);

  const auto accepted = read_records(opt.accepted_path().string());
  ASSERT_EQ(accepted.size(), 2U);
  EXPECT_EQ(accepted[0]["image_id"], "img_001");
  EXPECT_EQ(accepted[0]["trace"].get<std::string>(),
            read_file(kFixtures + "/golden_trace_2round.txt"));
  EXPECT_EQ(accepted[0]["rounds"], 2);
  EXPECT_EQ(accepted[1]["image_id"], "img_002");
  EXPECT_EQ(accepted[1]["final_answer"], "4");

  const auto rejected = read_records(opt.rejected_path().string());
  ASSERT_EQ(rejected.size(), 1U);
  EXPECT_EQ(rejected[0]["image_id"], "img_003");
  EXPECT_EQ(rejected[0]["stage"], "verifier");
  EXPECT_EQ(rejected[0]["reason"], "answer is no, GT is yes");
}

TEST(SynthesizeCommand, InterruptedRunResumesToSameOutputs) {
  TempDir dir;
  run_synthesize(synth_opts(dir.file("full")), fixture_backends());

  auto part = synth_opts(dir.file("part"));
  part.max_items = 1;
  part.parallelism = 1;
  const RunManifest first = run_synthesize(part, fixture_backends());
  EXPECT_FALSE(first.complete);
  EXPECT_EQ(first.counts.processed, 1U);
  // Simulate a crash mid-write: a torn trailing journal line.
  std::ofstream(part.checkpoint_path(), std::ios::app) << R"({"key": "img_00)";

  part.max_items = 0;
  part.resume = true;
  const RunManifest second = run_synthesize(part, fixture_backends());
  EXPECT_TRUE(second.complete);
  EXPECT_EQ(second.counts.processed, 3U);
  for (const char* f : {"accepted.jsonl", "rejected.jsonl"})
    EXPECT_EQ(read_file(dir.file(std::string("full/") + f)),
              read_file(dir.file(std::string("part/") + f)))
        << f;
}

TEST(SynthesizeCommand, BadLinesAreSkippedAndUnknownItemsFail) {
  TempDir dir;
  write(dir.file("items.jsonl"),
        read_file(kFixtures + "/synth_items.jsonl") +
            "{\"image_id\": \"img_001\", \"image\": \"a\", \"query\": \"q\", \"answer\": \"a\"}\n"
            "{\"image_id\": \"img_999\", \"image\": \"a\", \"query\": \"q\", \"answer\": \"a\"}\n"
            "[1]\n");
  auto opt = synth_opts(dir.file("out"));
  opt.input = dir.file("items.jsonl");
  const RunManifest m = run_synthesize(opt, fixture_backends());
  EXPECT_EQ(m.counts.accepted, 2U);
  EXPECT_EQ(m.counts.skipped, 2U);
  EXPECT_EQ(m.counts.rejected, 2U);
  const auto rejected = read_records(opt.rejected_path().string());
  ASSERT_EQ(rejected.size(), 4U);
  EXPECT_EQ(rejected[2]["reason"], "transport: reasoner: script exhausted after 0 replies");
}

TEST(SynthesizeCommand, ResumeAndOverwriteConflict) {
  TempDir dir;
  auto opt = synth_opts(dir.file("out"));
  opt.resume = true;
  opt.overwrite = true;
  EXPECT_THROW(run_synthesize(opt, fixture_backends()), InvalidInput);
}
