// Command-line front end: parallax/depth conversion, uncertainty conversion,
// evaluation, sparsification curves, synthetic data and Laplace fitting.

#include <cstdio>
#include <filesystem>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "pdepth/errors.hpp"
#include "pdepth/geometry.hpp"
#include "pdepth/io.hpp"
#include "pdepth/losses.hpp"
#include "pdepth/metrics.hpp"
#include "pdepth/simulate.hpp"
#include "pdepth/uncertainty.hpp"

namespace fs = std::filesystem;
using nlohmann::ordered_json;

namespace {

struct CameraArgs {
  std::string intrinsics;
  std::string pose_path;
  std::size_t frame = 0;

  void add_to(CLI::App* cmd) {
    cmd->add_option("--intrinsics", intrinsics, "fx,fy,cx,cy,width,height")->required();
    cmd->add_option("--pose", pose_path, "pose file, one 'tx ty tz qw qx qy qz' per line")
        ->required();
    cmd->add_option("--frame", frame, "zero-based line index in the pose file");
  }

  pdepth::CameraIntrinsics camera() const { return pdepth::parse_intrinsics(intrinsics); }

  pdepth::RelativePose pose() const {
    const auto poses = pdepth::read_poses(pose_path);
    if (frame >= poses.size()) {
      pdepth::fail(pdepth::ErrorCode::kInvalidArgument,
                   "frame " + std::to_string(frame) + " not in pose file (" +
                       std::to_string(poses.size()) + " poses)");
    }
    return poses[frame];
  }
};

void print_json(const ordered_json& j) { std::cout << j.dump() << "\n"; }

// --- convert ----------------------------------------------------------------

struct ConvertArgs {
  CameraArgs camera;
  std::string parallax;
  std::string out;
};

void run_convert(const ConvertArgs& args) {
  const auto rho = pdepth::read_map(args.parallax, pdepth::Quantity::kParallax);
  const auto result =
      pdepth::depth_map_from_parallax_map(args.camera.camera(), args.camera.pose(), rho);
  pdepth::write_map(result.map, args.out);
  print_json({{"invalid", result.invalid_count}, {"pixels", result.map.size()}});
}

// --- uncert-convert ---------------------------------------------------------

struct UncertArgs {
  CameraArgs camera;
  std::string mode = "elaborate";
  std::string parallax;
  std::string sigma;
  std::string out_depth;
  std::string out_uncertainty;
};

void run_uncert(const UncertArgs& args) {
  const auto k = args.camera.camera();
  const auto pose = args.camera.pose();
  const auto rho = pdepth::read_map(args.parallax, pdepth::Quantity::kParallax);
  const auto sigma = pdepth::read_map(args.sigma, pdepth::Quantity::kSigma);
  const auto maps = args.mode == "elaborate" ? pdepth::delta_depth_map(k, pose, rho, sigma)
                                             : pdepth::sigma_depth_map(k, pose, rho, sigma);
  pdepth::write_map(maps.depth, args.out_depth);
  pdepth::write_map(maps.uncertainty, args.out_uncertainty);
  print_json({{"mode", args.mode},
              {"uncertainty", std::string(pdepth::quantity_name(maps.uncertainty.quantity()))},
              {"invalid", maps.invalid_count},
              {"pixels", maps.depth.size()}});
}

// --- eval -------------------------------------------------------------------

struct EvalArgs {
  std::string gt;
  std::string pred;
  std::string uncertainty;
  double cap = pdepth::kDefaultDepthCap;
  int bins = pdepth::kDefaultSparsificationBins;
  std::string out;
};

void run_eval(const EvalArgs& args) {
  const auto gt = pdepth::read_map(args.gt, pdepth::Quantity::kDepth);
  const auto pred = pdepth::read_map(args.pred, pdepth::Quantity::kDepth);
  const auto m = pdepth::depth_metrics(gt, pred, args.cap);

  pdepth::MetricReport report;
  report.abs_rel.value = m.abs_rel;
  report.rmse_log.value = m.rmse_log;
  report.delta_125.value = m.delta_125;
  report.n_valid = m.n_valid;
  report.n_invalid = gt.size() - m.n_valid;
  report.config["gt"] = args.gt;
  report.config["pred"] = args.pred;
  report.config["cap"] = pdepth::format_double(args.cap);
  report.config["bins"] = std::to_string(args.bins);
  if (!args.uncertainty.empty()) {
    report.config["uncertainty"] = args.uncertainty;
    const auto u = pdepth::read_map(args.uncertainty, pdepth::Quantity::kDelta);
    using pdepth::DepthMetric;
    report.abs_rel.ause = pdepth::ause_for_metric(gt, pred, u, DepthMetric::kAbsRel, args.bins, args.cap);
    report.rmse_log.ause = pdepth::ause_for_metric(gt, pred, u, DepthMetric::kRmseLog, args.bins, args.cap);
    report.delta_125.ause = pdepth::ause_for_metric(gt, pred, u, DepthMetric::kDelta125, args.bins, args.cap);
  }
  const auto text = pdepth::serialize_report(report);
  if (args.out.empty()) {
    std::cout << text;
  } else {
    pdepth::write_text(args.out, text);
  }
}

// --- sparsify ---------------------------------------------------------------

struct SparsifyArgs {
  std::string errors;
  std::string uncertainty;
  std::string reducer = "mean";
  int bins = pdepth::kDefaultSparsificationBins;
  std::string out_dir;
  std::string stem = "sparsification";
};

void run_sparsify(const SparsifyArgs& args) {
  const auto e = pdepth::read_map(args.errors, pdepth::Quantity::kError);
  const auto u = pdepth::read_map(args.uncertainty, pdepth::Quantity::kDelta);
  const auto reducer =
      args.reducer == "root-mean" ? pdepth::Reducer::kRootMean : pdepth::Reducer::kMean;
  const auto result = pdepth::sparsification(e, u, reducer, args.bins);
  fs::create_directories(args.out_dir);
  pdepth::write_curves(result, args.out_dir, args.stem);
  print_json({{"ause", result.ause}, {"bins", args.bins}});
}

// --- simulate ---------------------------------------------------------------

struct SimulateArgs {
  CameraArgs camera;
  std::string depth_model = "random-smooth";
  double z_min = 2.0;
  double z_max = 60.0;
  std::uint64_t seed = 0;
  std::string noise_model = "proportional";
  double noise_scale = 0.05;
  std::optional<std::uint64_t> noise_seed;
  std::string out_dir;
};

void run_simulate(const SimulateArgs& args) {
  const auto k = args.camera.camera();
  const auto pose = args.camera.pose();
  pdepth::SceneSpec scene;
  scene.width = k.width;
  scene.height = k.height;
  scene.depth_model = pdepth::parse_depth_model(args.depth_model);
  scene.z_min = args.z_min;
  scene.z_max = args.z_max;
  scene.seed = args.seed;
  pdepth::NoiseSpec noise;
  noise.scale_model = pdepth::parse_noise_scale_model(args.noise_model);
  noise.scale_param = args.noise_scale;
  noise.seed = args.noise_seed.value_or(args.seed);

  const auto gt = pdepth::generate_scene(scene, k, pose);
  const auto observed = pdepth::corrupt(gt.parallax, noise);
  fs::create_directories(args.out_dir);
  const fs::path dir = args.out_dir;
  pdepth::write_map(gt.depth, dir / "gt_depth.pfm");
  pdepth::write_map(gt.parallax, dir / "gt_parallax.pfm");
  pdepth::write_map(observed.parallax, dir / "parallax.pfm");
  const auto sigma = pdepth::estimated_sigma(observed.parallax, noise);
  pdepth::write_map(observed.sigma, dir / "true_sigma.pfm");
  pdepth::write_map(sigma, dir / "sigma.pfm");
  pdepth::write_map(pdepth::inverse_parallax_sigma(observed.parallax, sigma),
                    dir / "sigma_zeta.pfm");
  pdepth::write_text(dir / "simulate.ini", pdepth::simulation_config_ini(scene, noise));
  print_json({{"invalid", gt.invalid_count}, {"clamped", observed.clamped_count}});
}

// --- fit --------------------------------------------------------------------

struct FitArgs {
  std::string samples;
  double beta = 1.0;
  int iters = 4000;
  double lr = 0.05;
};

void run_fit(const FitArgs& args) {
  const auto values = pdepth::read_samples(args.samples);
  const auto fit = pdepth::laplace_mle_fit(values, args.beta, args.iters, args.lr);
  print_json({{"location", fit.location}, {"scale", fit.scale}, {"iterations", fit.iterations}});
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Depth and depth-uncertainty from camera-motion parallax"};
  app.set_config("--config", "", "INI file; [subcommand] sections, flags override it");
  app.set_version_flag("--version", std::string(pdepth::kToolVersion));
  app.require_subcommand(1);

  ConvertArgs convert;
  auto* c = app.add_subcommand("convert", "parallax map -> depth map");
  convert.camera.add_to(c);
  c->add_option("--parallax", convert.parallax)->required();
  c->add_option("--out", convert.out)->required();

  UncertArgs uncert;
  auto* u = app.add_subcommand("uncert-convert", "(parallax, sigma) maps -> (depth, uncertainty)");
  uncert.camera.add_to(u);
  u->add_option("--mode", uncert.mode, "elaborate: delta_z; probabilistic: a * sigma(zeta)")
      ->check(CLI::IsMember({"elaborate", "probabilistic"}));
  u->add_option("--parallax", uncert.parallax)->required();
  u->add_option("--sigma", uncert.sigma, "sigma(rho), or sigma(zeta) in probabilistic mode")
      ->required();
  u->add_option("--out-depth", uncert.out_depth)->required();
  u->add_option("--out-uncertainty", uncert.out_uncertainty)->required();

  EvalArgs eval;
  auto* e = app.add_subcommand("eval", "depth metrics and AuSE as a JSON report");
  e->add_option("--gt", eval.gt)->required();
  e->add_option("--pred", eval.pred)->required();
  e->add_option("--uncertainty", eval.uncertainty);
  e->add_option("--cap", eval.cap, "ignore gt depth at or beyond this (m)");
  e->add_option("--bins", eval.bins)->check(CLI::PositiveNumber);
  e->add_option("--out", eval.out, "report path (stdout when omitted)");

  SparsifyArgs sparsify;
  auto* s = app.add_subcommand("sparsify", "sparsification curves from error + uncertainty");
  s->add_option("--errors", sparsify.errors)->required();
  s->add_option("--uncertainty", sparsify.uncertainty)->required();
  s->add_option("--reducer", sparsify.reducer)->check(CLI::IsMember({"mean", "root-mean"}));
  s->add_option("--bins", sparsify.bins)->check(CLI::PositiveNumber);
  s->add_option("--out-dir", sparsify.out_dir)->required();
  s->add_option("--stem", sparsify.stem);

  SimulateArgs sim;
  auto* m = app.add_subcommand("simulate", "synthetic scene, parallax and noise maps");
  sim.camera.add_to(m);
  m->add_option("--depth-model", sim.depth_model)
      ->check(CLI::IsMember({"constant", "fronto-plane-ramp", "random-smooth"}));
  m->add_option("--zmin", sim.z_min);
  m->add_option("--zmax", sim.z_max);
  m->add_option("--seed", sim.seed);
  m->add_option("--noise-model", sim.noise_model)
      ->check(CLI::IsMember({"constant", "proportional"}));
  m->add_option("--noise-scale", sim.noise_scale);
  m->add_option("--noise-seed", sim.noise_seed, "defaults to --seed");
  m->add_option("--out-dir", sim.out_dir)->required();

  FitArgs fit;
  auto* f = app.add_subcommand("fit", "Laplace maximum-likelihood fit of a sample file");
  f->add_option("--samples", fit.samples)->required();
  f->add_option("--beta", fit.beta);
  f->add_option("--iters", fit.iters);
  f->add_option("--lr", fit.lr);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& ex) {
    return app.exit(ex);
  } catch (const CLI::CallForAllHelp& ex) {
    return app.exit(ex);
  } catch (const CLI::CallForVersion& ex) {
    return app.exit(ex);
  } catch (const CLI::ParseError& ex) {
    std::cerr << "error: input.usage: " << ex.what() << "\n";
    return 2;
  }

  try {
    if (c->parsed()) run_convert(convert);
    if (u->parsed()) run_uncert(uncert);
    if (e->parsed()) run_eval(eval);
    if (s->parsed()) run_sparsify(sparsify);
    if (m->parsed()) run_simulate(sim);
    if (f->parsed()) run_fit(fit);
  } catch (const pdepth::Error& ex) {
    std::cerr << "error: " << pdepth::error_class(ex.code()) << ": " << ex.what() << "\n";
    return pdepth::exit_status(ex.code());
  } catch (const fs::filesystem_error& ex) {
    std::cerr << "error: input.io: " << ex.what() << "\n";
    return 2;
  } catch (const std::exception& ex) {
    std::cerr << "error: numeric.internal: " << ex.what() << "\n";
    return 3;
  }
  return 0;
}
