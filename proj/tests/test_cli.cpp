#include <filesystem>
#include <string>

#include <gtest/gtest.h>

#include "cli_runner.hpp"
#include "pdepth/io.hpp"
#include "pdepth/simulate.hpp"

using namespace pdepth;
using testing_support::fresh_dir;
using testing_support::run_cli;

namespace {

const char* kIntrinsics = "--intrinsics 100,100,64,48,128,96";

void write_pose(const std::filesystem::path& dir, const std::string& line) {
  write_text(dir / "pose.txt", "# tx ty tz qw qx qy qz\n" + line + "\n");
}

}  // namespace

TEST(Cli, EvalOfPerfectPrediction) {
  const auto dir = fresh_dir("pdepth_cli_eval");
  ScalarMap gt(8, 4, Quantity::kDepth, 5.0f);
  gt.at(2, 1) = 90.0f;
  write_map(gt, dir / "gt.pfm");
  const auto r = run_cli(dir, "eval --gt gt.pfm --pred gt.pfm");
  ASSERT_EQ(r.status, 0) << r.err;
  const auto report = parse_report(r.out);
  EXPECT_EQ(report.abs_rel.value, 0.0);
  EXPECT_EQ(report.rmse_log.value, 0.0);
  EXPECT_EQ(report.delta_125.value, 1.0);
  EXPECT_EQ(report.n_valid, 31u);
  EXPECT_EQ(report.n_invalid, 1u);
  EXPECT_FALSE(report.abs_rel.ause.has_value());
}

TEST(Cli, ElaborateConversionWithoutForwardMotion) {
  const auto dir = fresh_dir("pdepth_cli_uncert");
  write_pose(dir, "0.5 0 0 1 0 0 0");
  write_map(ScalarMap(128, 96, Quantity::kParallax, 4.0f), dir / "rho.pfm");
  write_map(ScalarMap(128, 96, Quantity::kSigma, 0.5f), dir / "sigma.pfm");
  const auto r = run_cli(dir, std::string("uncert-convert ") + kIntrinsics +
                                  " --pose pose.txt --parallax rho.pfm --sigma sigma.pfm"
                                  " --out-depth z.pfm --out-uncertainty dz.pfm");
  ASSERT_EQ(r.status, 0) << r.err;
  const auto z = read_map(dir / "z.pfm", Quantity::kDepth);
  const auto dz = read_map(dir / "dz.pfm", Quantity::kDelta);
  for (float v : z.data()) EXPECT_EQ(v, 12.5f);
  for (float v : dz.data()) EXPECT_EQ(v, 0.125f);
}

TEST(Cli, PipelineMatchesLibraryEndToEnd) {
  const auto dir = fresh_dir("pdepth_cli_pipeline");
  write_pose(dir, "0.2 0.1 1 1 0 0 0");
  const std::string cam = std::string(kIntrinsics) + " --pose pose.txt";
  auto r = run_cli(dir, "simulate " + cam + " --seed 0 --noise-seed 1000 --out-dir sim");
  ASSERT_EQ(r.status, 0) << r.err;
  r = run_cli(dir, "uncert-convert " + cam +
                       " --parallax sim/parallax.pfm --sigma sim/sigma.pfm"
                       " --out-depth z.pfm --out-uncertainty dz.pfm");
  ASSERT_EQ(r.status, 0) << r.err;
  r = run_cli(dir, "eval --gt sim/gt_depth.pfm --pred z.pfm --uncertainty dz.pfm --out report.json");
  ASSERT_EQ(r.status, 0) << r.err;
  const auto report = parse_report(read_text(dir / "report.json"));

  SceneSpec scene;
  scene.width = 128;
  scene.height = 96;
  NoiseSpec noise;
  noise.seed = 1000;
  RelativePose pose;
  pose.translation = {0.2, 0.1, 1.0};
  const auto lib = end_to_end_case(scene, noise, parse_intrinsics("100,100,64,48,128,96"), pose);
  EXPECT_EQ(report.abs_rel.value, lib.metrics.abs_rel);
  EXPECT_EQ(report.rmse_log.value, lib.metrics.rmse_log);
  EXPECT_EQ(report.delta_125.value, lib.metrics.delta_125);
  EXPECT_EQ(report.abs_rel.ause, lib.ause[0]);
  EXPECT_EQ(report.rmse_log.ause, lib.ause[1]);
  EXPECT_EQ(report.delta_125.ause, lib.ause[2]);

  // The config written next to the maps reproduces them.
  r = run_cli(dir, "--config sim/simulate.ini simulate " + cam + " --out-dir again");
  ASSERT_EQ(r.status, 0) << r.err;
  for (const char* f : {"gt_depth.pfm", "parallax.pfm", "sigma.pfm", "sigma_zeta.pfm"}) {
    EXPECT_EQ(read_text(dir / "sim" / f), read_text(dir / "again" / f)) << f;
  }
}

TEST(Cli, SparsifyAndFit) {
  const auto dir = fresh_dir("pdepth_cli_misc");
  ScalarMap e(4, 1, Quantity::kError, std::vector<float>{0.1f, 0.4f, 0.2f, 0.3f});
  write_map(e, dir / "e.pfm");
  auto r = run_cli(dir, "sparsify --errors e.pfm --uncertainty e.pfm --bins 4 --out-dir curves");
  ASSERT_EQ(r.status, 0) << r.err;
  EXPECT_EQ(r.out, "{\"ause\":0.0,\"bins\":4}\n");
  EXPECT_TRUE(std::filesystem::exists(dir / "curves" / "sparsification_oracle.csv"));

  write_text(dir / "x.txt", "-1 0 1\n");
  r = run_cli(dir, "fit --samples x.txt");
  ASSERT_EQ(r.status, 0) << r.err;
  EXPECT_NE(r.out.find("\"location\""), std::string::npos);
}

TEST(Cli, FailuresReportClassAndStatus) {
  const auto dir = fresh_dir("pdepth_cli_errors");
  auto r = run_cli(dir, "eval --gt missing.pfm --pred missing.pfm");
  EXPECT_EQ(r.status, 2);
  EXPECT_EQ(r.err.rfind("error: input.", 0), 0u) << r.err;

  r = run_cli(dir, "eval --gt");
  EXPECT_EQ(r.status, 2);

  write_text(dir / "bad.pfm", "Pf\n2 2\n-1.0\nxx");
  r = run_cli(dir, "eval --gt bad.pfm --pred bad.pfm");
  EXPECT_EQ(r.status, 2);

  // Every pixel beyond the cap: nothing to evaluate.
  write_map(ScalarMap(2, 2, Quantity::kDepth, 100.0f), dir / "far.pfm");
  r = run_cli(dir, "eval --gt far.pfm --pred far.pfm");
  EXPECT_EQ(r.status, 3);
  EXPECT_EQ(r.err.rfind("error: numeric.", 0), 0u) << r.err;
  EXPECT_EQ(r.err.find('\n'), r.err.size() - 1);
}
