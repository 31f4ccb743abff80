#include <gtest/gtest.h>

#include <sstream>

#include <tracegrid/cli.hpp>

#include "golden.hpp"
#include "temp_dir.hpp"

using namespace tracegrid;

namespace {

struct Outcome {
  int code;
  std::string out;
  std::string err;
};

Outcome invoke(std::vector<std::string> args) {
  args.insert(args.begin(), "tracegrid");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  const int code = cli::run(static_cast<int>(argv.size()), argv.data(), out, err);
  return {code, out.str(), err.str()};
}

}  // namespace

TEST(Cli, SolveGolden) {
  const auto r = invoke({"solve", "--kind", "freespace", "--start", "18,11", "--goal", "15,12", "--size", "30",
                         "--wall-levels", "4"});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_EQ(r.out, std::string(golden::kTrace) + "\n" + std::string(golden::kPlan) + "\n");
}

TEST(Cli, SolveProblemFile) {
  TempDir dir("cli-solve");
  const auto problem = join_tokens(encode_problem(golden::grid()));
  std::ofstream(dir / "p.txt") << problem << '\n';
  const auto r = invoke({"solve", "--problem-file", (dir / "p.txt").string(), "--show-problem"});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_EQ(r.out, problem + "\n" + std::string(golden::kTrace) + "\n" + std::string(golden::kPlan) + "\n");
}

TEST(Cli, SolveUnsolvableIsDomainError) {
  TempDir dir("cli-unsolvable");
  std::ofstream(dir / "p.txt") << "start 0 0 goal 4 4 wall 3 4 wall 4 3\n";
  const auto r = invoke({"solve", "--problem-file", (dir / "p.txt").string(), "--size", "5"});
  EXPECT_EQ(r.code, 1);
  EXPECT_NE(r.err.find("unsolvable"), std::string::npos);
}

TEST(Cli, UsageErrors) {
  EXPECT_EQ(invoke({}).code, 2);
  EXPECT_EQ(invoke({"solve", "--bogus"}).code, 2);
  EXPECT_EQ(invoke({"solve", "--kind", "prim"}).code, 2);
  EXPECT_EQ(invoke({"solve", "--start", "1,1"}).code, 2);  // --goal required with --start
  EXPECT_EQ(invoke({"solve", "--problem-file", "x", "--kind", "wilson"}).code, 2);
  EXPECT_EQ(invoke({"solve", "--start", "1", "--goal", "2,2"}).code, 2);
  EXPECT_EQ(invoke({"solve", "--start", "18,11", "--goal", "15,12", "--kind", "searchformer"}).code, 2);
}

TEST(Cli, HelpExitsZeroAndDocumentsFlags) {
  const auto r = invoke({"dataset", "--help"});
  EXPECT_EQ(r.code, 0);
  for (const char* flag : {"--kind", "--size", "--seed", "--count", "--out", "--holdout-per-kind", "--floor-fraction",
                           "--wall-levels", "--min-difficulty", "--workers"})
    EXPECT_NE(r.out.find(flag), std::string::npos) << flag;
  const auto rep = invoke({"report", "--help"});
  for (const char* flag : {"--limit", "--strict-trace", "--csv", "--count-total"})
    EXPECT_NE(rep.out.find(flag), std::string::npos) << flag;
}

TEST(Cli, GenerateMatchesLibrary) {
  const auto r = invoke({"generate", "--kind", "kruskal", "--count", "3", "--size", "11", "--seed", "4"});
  ASSERT_EQ(r.code, 0) << r.err;
  std::string expected;
  for (std::size_t i = 0; i < 3; ++i) {
    GenConfig cfg;
    cfg.kind = GeneratorKind::Kruskal;
    cfg.width = cfg.height = 11;
    cfg.seed = instance_seed(4, cfg.kind, i);
    expected += to_line(make_record(generate_instance(cfg))) + '\n';
  }
  EXPECT_EQ(r.out, expected);
}

TEST(Cli, DatasetDeterministicAndReportEndToEnd) {
  TempDir dir("cli-ds");
  const auto a = (dir / "a").string(), b = (dir / "b").string();
  const auto r1 = invoke({"dataset", "--kind", "wilson", "--kind", "dfs", "--count", "50", "--seed", "7", "--size",
                          "12", "--out", a, "--workers", "1", "--shard-size", "30"});
  const auto r2 = invoke({"dataset", "--kind", "wilson", "--kind", "dfs", "--count", "50", "--seed", "7", "--size",
                          "12", "--out", b, "--workers", "8", "--shard-size", "30"});
  ASSERT_EQ(r1.code, 0) << r1.err;
  ASSERT_EQ(r2.code, 0) << r2.err;
  EXPECT_EQ(r1.out, r2.out);

  // Library call gives the same digest.
  DatasetConfig cfg;
  cfg.mix = {{GeneratorKind::Wilson, 50}, {GeneratorKind::DfsBacktracker, 50}};
  cfg.master_seed = 7;
  cfg.shard_size = 30;
  cfg.params.width = cfg.params.height = 12;
  TempDir lib("cli-lib");
  EXPECT_EQ(r1.out, manifest_digest(build_dataset(cfg, lib.path(), 2)) + "\n");

  const auto split = invoke({"split", "--dataset", a, "--holdout-per-kind", "10", "--seed", "3"});
  ASSERT_EQ(split.code, 0) << split.err;
  EXPECT_NE(split.out, r1.out);

  // Echo responses for every record.
  const auto m = read_manifest(a);
  const auto records = load_records(a, m);
  {
    std::ofstream resp(dir / "r.txt");
    for (const auto& rec : records) resp << rec.id << '\t' << rec.trace << ' ' << rec.plan << '\n';
  }
  const auto csv = (dir / "s.csv").string();
  const auto rep = invoke({"report", "--dataset", a, "--responses", (dir / "r.txt").string(), "--limit", "32000",
                           "--csv", csv});
  ASSERT_EQ(rep.code, 0) << rep.err;
  const auto j = nlohmann::json::parse(rep.out);
  EXPECT_EQ(j["total"]["count"], 100);
  EXPECT_EQ(j["total"]["valid_rate"], 1.0);
  EXPECT_EQ(j["per_kind"]["wilson"]["count"], 50);
  EXPECT_NEAR(j["per_kind"]["dfs"]["correlation"]["pearson"].get<double>(), 1.0, 1e-12);
  EXPECT_EQ(parse_scatter_csv(read_file(csv)).size(), 100u);

  const auto judged = invoke({"judge", "--dataset", a, "--responses", (dir / "r.txt").string()});
  ASSERT_EQ(judged.code, 0) << judged.err;
  EXPECT_EQ(std::count(judged.out.begin(), judged.out.end(), '\n'), 100);
  EXPECT_NE(judged.out.find("\"verdict\":\"valid_optimal\""), std::string::npos);
}

TEST(Cli, InvalidDatasetInvocationWritesNothing) {
  TempDir dir("cli-bad");
  const auto out = (dir / "never").string();
  const auto r = invoke({"dataset", "--kind", "freespace", "--count", "5", "--size", "6", "--out", out});
  EXPECT_EQ(r.code, 1);
  EXPECT_FALSE(std::filesystem::exists(out));
  EXPECT_EQ(invoke({"dataset", "--kind", "wilson", "--count", "5"}).code, 2);
}

TEST(Cli, Vocab) {
  const auto r = invoke({"vocab", "--size", "30"});
  ASSERT_EQ(r.code, 0);
  EXPECT_EQ(std::count(r.out.begin(), r.out.end(), '\n'), 940);
  EXPECT_EQ(r.out, build_vocab(30, 30).export_table());
  const auto r944 = invoke({"vocab", "--size", "30", "--extra-specials", "4"});
  EXPECT_EQ(std::count(r944.out.begin(), r944.out.end(), '\n'), 944);
}
