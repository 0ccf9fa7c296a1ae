#include <gtest/gtest.h>

#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <sstream>

#include "dgc/error.hpp"
#include "dgc/pipeline/commands.hpp"
#include "dgc/pipeline/run_config.hpp"

namespace dgc::pipeline {
namespace {

namespace fs = std::filesystem;

fs::path fresh_dir(const std::string& name) {
  const fs::path dir = fs::path(::testing::TempDir()) / ("dgc_pipeline_" + name);
  fs::remove_all(dir);
  return dir;
}

std::string slurp(const fs::path& p) {
  std::ifstream is(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(is), std::istreambuf_iterator<char>()};
}

std::vector<std::vector<std::string>> read_csv(const fs::path& p) {
  std::vector<std::vector<std::string>> rows;
  std::istringstream is(slurp(p));
  for (std::string line; std::getline(is, line);) {
    std::vector<std::string> cells;
    std::stringstream ls(line);
    for (std::string c; std::getline(ls, c, ',');) cells.push_back(c);
    if (!line.empty() && line.back() == ',') cells.emplace_back();
    rows.push_back(cells);
  }
  return rows;
}

// Runs the dgc executable and returns its exit code.
int dgc(const std::string& args) {
  const std::string cmd = std::string("\"") + DGC_CLI_PATH + "\" " + args + " > /dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string dgc_stdout(const std::string& args) {
  const fs::path out = fs::path(::testing::TempDir()) / "dgc_pipeline_stdout.txt";
  const std::string cmd =
      std::string("\"") + DGC_CLI_PATH + "\" " + args + " > \"" + out.string() + "\" 2>/dev/null";
  EXPECT_EQ(std::system(cmd.c_str()), 0) << args;
  return slurp(out);
}

const std::string kSmallModel = " --levels 2 --batch 4 --seed 3";

// ---- run configuration ---------------------------------------------------------

TEST(RunConfig, GitBlobHashMatchesGit) {
  EXPECT_EQ(git_blob_hash("hello\n"), "ce013625030ba8dba906f756967f9e9ca394464a");
  EXPECT_EQ(git_blob_hash(""), "e69de29bb2d1d6434b8b29ae775ad8c2e48c5391");
  const fs::path dir = fresh_dir("hash");
  fs::create_directories(dir);
  { std::ofstream(dir / "f.txt", std::ios::binary) << "hello\n"; }
  EXPECT_EQ(git_blob_hash_file(dir / "f.txt"), "ce013625030ba8dba906f756967f9e9ca394464a");
  EXPECT_THROW(git_blob_hash_file(dir / "missing"), DataError);
}

TEST(RunConfig, ThresholdsAndLists) {
  EXPECT_EQ(parse_thresholds("1,3,5"), (std::vector<double>{1.0, 3.0, 5.0}));
  EXPECT_EQ(parse_thresholds("0.5,2"), (std::vector<double>{0.5, 2.0}));
  EXPECT_THROW(parse_thresholds("1,-2"), UsageError);
  EXPECT_THROW(parse_thresholds("1,x"), UsageError);
  EXPECT_THROW(parse_thresholds(""), UsageError);
  EXPECT_EQ(split_list("a,b,,c"), (std::vector<std::string>{"a", "b", "c"}));
}

TEST(RunConfig, FormatDoubleRoundTrips) {
  for (double v : {0.1, 1.0 / 3.0, 1e-3, 12345.678, 0.0, -2.5e-9}) {
    EXPECT_EQ(std::stod(format_double(v)), v);
  }
  EXPECT_EQ(format_double(0.5), "0.5");
  EXPECT_EQ(format_double(3.0), "3");
}

TEST(RunConfig, EchoParsesBackToSameEntries) {
  RunConfig cfg;
  cfg.n = 17;
  cfg.kinds = "affine,tps";
  cfg.strength = 0.35;
  cfg.lr = 3.3e-4;
  cfg.matchability = true;
  cfg.correlation = "local";
  cfg.data = "some/dir";
  for (Command c : {Command::GenData, Command::Train, Command::Eval, Command::Pose}) {
    const fs::path dir = fresh_dir("echo_" + to_string(c));
    fs::create_directories(dir);
    { std::ofstream(dir / "cfg.txt") << "# echoed\n\n" << echo_config(cfg, c); }
    const auto args = config_file_arguments(dir / "cfg.txt");
    const auto entries = config_entries(cfg, c);
    ASSERT_EQ(args.size(), entries.size());
    for (std::size_t k = 0; k < args.size(); ++k) {
      EXPECT_EQ(args[k], "--" + entries[k].first + "=" + entries[k].second);
    }
  }
}

// ---- CLI --------------------------------------------------------------------------

TEST(Cli, VersionAndExitCodes) {
  EXPECT_EQ(dgc_stdout("version"), "dgc 0.1.0\n");
  EXPECT_EQ(dgc("frobnicate"), 1);
  EXPECT_EQ(dgc(""), 1);
  EXPECT_EQ(dgc("gen-data --n 3 --kinds perspective --out " + fresh_dir("badkind").string()), 1);
  EXPECT_EQ(dgc("gen-data --n 3 --strength 0.9 --out " + fresh_dir("badstrength").string()), 1);
  EXPECT_EQ(dgc("eval --use-gt-map --data " + fresh_dir("nodata").string() + " --out " +
                fresh_dir("nodata_out").string()),
            2);
}

TEST(Cli, GenDataIsDeterministic) {
  const fs::path a = fresh_dir("gen_a"), b = fresh_dir("gen_b");
  ASSERT_EQ(dgc("gen-data --n 10 --kinds affine --seed 7 --resolution 16 --out " + a.string()), 0);
  ASSERT_EQ(dgc("gen-data --n 10 --kinds affine --seed 7 --resolution 16 --out " + b.string()), 0);
  int files = 0;
  for (const auto& e : fs::directory_iterator(a)) {
    if (e.path().filename() == "run.log") continue;
    EXPECT_EQ(slurp(e.path()), slurp(b / e.path().filename())) << e.path().filename();
    ++files;
  }
  EXPECT_EQ(files, 1 + 10 * 4);
  const auto ds = geometry::load_dataset(a);
  EXPECT_EQ(ds.pairs.size(), 10u);
  EXPECT_EQ(ds.split(geometry::Split::Val).size(), 1u);
}

TEST(Cli, ZeroStrengthGivesIdentity) {
  const fs::path d = fresh_dir("zero");
  ASSERT_EQ(dgc("gen-data --n 4 --kinds affine,tps,homo --strength 0 --resolution 16 --out " +
                d.string()),
            0);
  for (const auto& p : geometry::load_dataset(d).pairs) {
    EXPECT_EQ(p.pair.gt_map, geometry::identity_map(16, 16));
    EXPECT_EQ(p.pair.gt_mask.coverage(), 1.0);
  }
}

TEST(Cli, ConfigFileWithOverrides) {
  const fs::path dir = fresh_dir("config");
  fs::create_directories(dir);
  {
    std::ofstream(dir / "run.cfg") << "# shared settings\nn=5\nresolution=16\nseed=11\n"
                                      "epochs=4\niters=20\n";
  }
  const fs::path out = dir / "data";
  ASSERT_EQ(dgc("gen-data --config " + (dir / "run.cfg").string() + " --n 3 --out " + out.string()), 0);
  const auto ds = geometry::load_dataset(out);
  EXPECT_EQ(ds.pairs.size(), 3u);
  EXPECT_EQ(ds.manifest.seed, 11u);
  EXPECT_EQ(ds.manifest.resolution, 16);
  EXPECT_NE(slurp(out / "run.log").find("n=3\n"), std::string::npos);
}

TEST(Cli, EvalGroundTruthBypassIsPerfect) {
  const fs::path d = fresh_dir("gt_data"), o = fresh_dir("gt_eval");
  ASSERT_EQ(dgc("gen-data --n 6 --kinds affine,homo --strength 0.3 --resolution 16 --out " +
                d.string()),
            0);
  ASSERT_EQ(dgc("eval --use-gt-map --split all --data " + d.string() + " --out " + o.string()), 0);
  const auto rows = read_csv(o / "eval.csv");
  ASSERT_EQ(rows.size(), 1u + 6u + 1u);
  EXPECT_EQ(rows[0], (std::vector<std::string>{"pair_id", "aepe", "pck1", "pck3", "pck5", "jaccard",
                                               "n_valid"}));
  for (std::size_t r = 1; r < rows.size(); ++r) {
    EXPECT_EQ(std::stod(rows[r][1]), 0.0);
    for (int c = 2; c <= 4; ++c) EXPECT_EQ(std::stod(rows[r][static_cast<std::size_t>(c)]), 1.0);
  }
  EXPECT_EQ(rows.back()[0], "all");
}

TEST(Cli, TrainEvalResumeChain) {
  const fs::path d = fresh_dir("chain_data");
  ASSERT_EQ(dgc("gen-data --n 8 --strength 0.2 --resolution 16 --out " + d.string()), 0);
  const fs::path t1 = fresh_dir("chain_t1"), t2 = fresh_dir("chain_t2");
  ASSERT_EQ(dgc("train --data " + d.string() + " --out " + t1.string() + " --epochs 2" + kSmallModel), 0);
  ASSERT_EQ(dgc("train --data " + d.string() + " --out " + t2.string() + " --epochs 2" + kSmallModel), 0);
  EXPECT_EQ(slurp(t1 / "checkpoint.ckpt"), slurp(t2 / "checkpoint.ckpt"));
  EXPECT_EQ(slurp(t1 / "loss_trace.csv"), slurp(t2 / "loss_trace.csv"));

  const fs::path r0 = fresh_dir("chain_r0");
  ASSERT_EQ(dgc("train --data " + d.string() + " --out " + r0.string() + " --epochs 0 --resume " +
                (t1 / "checkpoint.ckpt").string()),
            0);
  EXPECT_EQ(slurp(r0 / "checkpoint.ckpt"), slurp(t1 / "checkpoint.ckpt"));

  const fs::path e1 = fresh_dir("chain_e1"), e2 = fresh_dir("chain_e2");
  const std::string eval_args = "eval --data " + d.string() + " --checkpoint " +
                                (t1 / "checkpoint.ckpt").string() + " --out ";
  ASSERT_EQ(dgc(eval_args + e1.string()), 0);
  ASSERT_EQ(dgc(eval_args + e2.string()), 0);
  EXPECT_EQ(slurp(e1 / "eval.csv"), slurp(e2 / "eval.csv"));
  EXPECT_EQ(dgc("eval --data " + d.string() + " --checkpoint " + (t1 / "nope.ckpt").string() +
                " --out " + fresh_dir("chain_e3").string()),
            2);
}

TEST(Cli, MatchabilityTraceHasNonzeroLm) {
  const fs::path d = fresh_dir("m_data"), t = fresh_dir("m_train");
  ASSERT_EQ(dgc("gen-data --n 4 --kinds homo --strength 0.4 --resolution 16 --out " + d.string()), 0);
  ASSERT_EQ(dgc("train --matchability --epochs 1 --data " + d.string() + " --out " + t.string() +
                kSmallModel),
            0);
  const auto rows = read_csv(t / "loss_trace.csv");
  ASSERT_GT(rows.size(), 1u);
  EXPECT_EQ(rows[0], (std::vector<std::string>{"epoch", "step", "L_c", "L_m", "L_total"}));
  for (std::size_t r = 1; r < rows.size(); ++r) EXPECT_GT(std::stod(rows[r][3]), 0.0);
}

TEST(Cli, CurriculumNumbersEpochsMonotonically) {
  const fs::path a = fresh_dir("cur_a"), b = fresh_dir("cur_b"), t = fresh_dir("cur_train");
  ASSERT_EQ(dgc("gen-data --n 4 --kinds affine --resolution 16 --out " + a.string()), 0);
  ASSERT_EQ(dgc("gen-data --n 4 --kinds tps --resolution 16 --seed 1 --out " + b.string()), 0);
  ASSERT_EQ(dgc("train --epochs 2 --data " + a.string() + "," + b.string() + " --out " + t.string() +
                kSmallModel),
            0);
  const auto rows = read_csv(t / "loss_trace.csv");
  int prev = -1, max_epoch = -1;
  for (std::size_t r = 1; r < rows.size(); ++r) {
    const int e = std::stoi(rows[r][0]);
    EXPECT_GE(e, prev);
    prev = e;
    max_epoch = std::max(max_epoch, e);
  }
  EXPECT_EQ(max_epoch, 3);
  EXPECT_NE(slurp(t / "run.log").find("epochs_done=4"), std::string::npos);
}

TEST(Cli, TrainRejectsResolutionMismatch) {
  const fs::path d = fresh_dir("mismatch_data");
  ASSERT_EQ(dgc("gen-data --n 4 --resolution 16 --out " + d.string()), 0);
  const fs::path t = fresh_dir("mismatch_t1");
  ASSERT_EQ(dgc("train --epochs 1 --data " + d.string() + " --out " + t.string() + kSmallModel), 0);
  const fs::path d32 = fresh_dir("mismatch_data32");
  ASSERT_EQ(dgc("gen-data --n 4 --resolution 32 --out " + d32.string()), 0);
  EXPECT_EQ(dgc("train --epochs 1 --data " + d32.string() + " --out " + fresh_dir("mismatch_t2").string() +
                " --resume " + (t / "checkpoint.ckpt").string()),
            2);
}

TEST(Cli, PoseChainAndConfidenceFilter) {
  const fs::path d = fresh_dir("pose_data");
  ASSERT_EQ(dgc("gen-data --n 4 --kinds pose --resolution 48 --val-fraction 0 --out " + d.string()), 0);
  const fs::path p1 = fresh_dir("pose_a"), p2 = fresh_dir("pose_b");
  const std::string args = "pose --use-gt-map --split all --iters 200 --data " + d.string() + " --out ";
  ASSERT_EQ(dgc(args + p1.string()), 0);
  ASSERT_EQ(dgc(args + p2.string()), 0);
  for (const char* f : {"pose.csv", "rotation_hist.csv", "translation_hist.csv", "epipolar_hist.csv"}) {
    EXPECT_EQ(slurp(p1 / f), slurp(p2 / f)) << f;
  }
  const auto rows = read_csv(p1 / "pose.csv");
  ASSERT_EQ(rows.size(), 1u + 4u + 1u);
  EXPECT_EQ(rows.back()[0], "median");
  EXPECT_LT(std::stod(rows.back()[1]), 0.1);
  EXPECT_LT(std::stod(rows.back()[2]), 0.5);

  const fs::path p3 = fresh_dir("pose_c");
  ASSERT_EQ(dgc(args + p3.string() + " --conf-threshold 1.01"), 0);
  const std::string log = slurp(p3 / "run.log");
  EXPECT_NE(log.find("failed_pairs=4"), std::string::npos);
  std::size_t errors = 0;
  for (std::size_t at = log.find("fewer than 8 matches"); at != std::string::npos;
       at = log.find("fewer than 8 matches", at + 1)) {
    ++errors;
  }
  EXPECT_EQ(errors, 4u);
}

TEST(Pipeline, OutlierInjectionReplacesExactCount) {
  pose::MatchSet ms;
  for (int k = 0; k < 40; ++k) ms.matches.push_back({{k, k}, {k, k}, 1.0});
  auto a = ms, b = ms;
  inject_outliers(a, 0.3, 64, 64, 5);
  inject_outliers(b, 0.3, 64, 64, 5);
  int changed = 0;
  for (std::size_t k = 0; k < 40; ++k) {
    changed += a.matches[k].x_prime != ms.matches[k].x_prime;
    EXPECT_EQ(a.matches[k].x, ms.matches[k].x);
    EXPECT_EQ(a.matches[k].x_prime, b.matches[k].x_prime);
  }
  EXPECT_EQ(changed, 12);
}

}  // namespace
}  // namespace dgc::pipeline
