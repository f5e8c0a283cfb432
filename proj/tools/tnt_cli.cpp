// Command-line driver: synth, train, track, eval, assoc-eval, predict-box, plot.

#include <cstdio>
#include <filesystem>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "tnt/association.hpp"
#include "tnt/config.hpp"
#include "tnt/io.hpp"
#include "tnt/metrics.hpp"
#include "tnt/plot.hpp"
#include "tnt/simd.hpp"
#include "tnt/synth.hpp"
#include "tnt/tracker.hpp"
#include "tnt/training.hpp"
#include "tnt/weights_io.hpp"

namespace fs = std::filesystem;
using namespace tnt;

namespace {

enum ExitCode : int {
  kOk = 0,
  kUnexpected = 1,
  kUsage = 2,
  kConfigError = 3,
  kIoError = 4,
  kDataError = 5,
  kComputeError = 6,
};

int exit_code_for(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::kConfig: return kConfigError;
    case ErrorKind::kIo: return kIoError;
    case ErrorKind::kParse:
    case ErrorKind::kFormat:
    case ErrorKind::kCoverage:
    case ErrorKind::kShape: return kDataError;
    default: return kComputeError;
  }
}

struct Common {
  std::string config_path;
  std::vector<std::string> overrides;
};

RunConfig resolve(const Common& c) {
  RunConfig cfg = c.config_path.empty() ? RunConfig{} : load_config(c.config_path);
  for (const std::string& kv : c.overrides) {
    const auto eq = kv.find('=');
    if (eq == std::string::npos) fail(ErrorKind::kConfig, "--set expects key=value, got '" + kv + "'");
    auto trim = [](std::string s) {
      const auto b = s.find_first_not_of(" \t");
      const auto e = s.find_last_not_of(" \t");
      return b == std::string::npos ? std::string{} : s.substr(b, e - b + 1);
    };
    set_config_value(cfg, trim(kv.substr(0, eq)), trim(kv.substr(eq + 1)));
  }
  cfg.propagate_seed();
  cfg.validate();
  std::cout << "# resolved config (seed " << cfg.seed << ")\n" << cfg.to_text() << std::flush;
  return cfg;
}

void add_common(CLI::App* app, Common& c) {
  app->add_option("-c,--config", c.config_path, "Run configuration file (key = value)");
  app->add_option("-s,--set", c.overrides, "Override one config key: key=value (repeatable)");
}

TrackerConfig tracker_config(const RunConfig& cfg) {
  return {cfg.assoc, cfg.ransac, cfg.graph_delta_t()};
}

void check_feature_dim(const Dataset& ds, const RunConfig& cfg, const fs::path& dir) {
  if (ds.meta.feature_dim != cfg.net.d_ap) {
    fail(ErrorKind::kConfig, dir.string() + " has feature_dim " + std::to_string(ds.meta.feature_dim) +
                                 " but net.d_ap is " + std::to_string(cfg.net.d_ap));
  }
}

std::vector<double> parse_list(const std::string& text, std::size_t n, const char* what) {
  std::vector<double> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    try {
      std::size_t used = 0;
      out.push_back(std::stod(item, &used));
      if (used != item.size()) throw std::invalid_argument(item);
    } catch (const std::exception&) {
      fail(ErrorKind::kInvalidArgument, std::string(what) + ": '" + item + "' is not a number");
    }
  }
  if (out.size() != n) {
    fail(ErrorKind::kInvalidArgument, std::string(what) + " needs " + std::to_string(n) +
                                          " comma-separated numbers");
  }
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Offline multi-object tracker: tracklets, connectivity network, graph clustering"};
  app.require_subcommand(1);
  bool force_scalar = false;
  app.add_flag("--scalar", force_scalar, "Use the scalar reference kernels");

  Common c_synth, c_train, c_track, c_eval, c_assoc, c_plot;

  auto* synth = app.add_subcommand("synth", "Generate a synthetic dataset directory");
  add_common(synth, c_synth);
  std::string synth_out;
  synth->add_option("-o,--out", synth_out, "Output dataset directory")->required();

  auto* train_cmd = app.add_subcommand("train", "Train the connectivity network on dataset gt");
  add_common(train_cmd, c_train);
  std::vector<std::string> train_data;
  std::string weights_out, loss_out;
  train_cmd->add_option("-d,--data", train_data, "Dataset directory with gt.txt (repeatable)")->required();
  train_cmd->add_option("-o,--out", weights_out, "Output weight file")->required();
  train_cmd->add_option("--loss", loss_out, "Loss curve CSV (default: <out>.loss.csv)");

  auto* track_cmd = app.add_subcommand("track", "Track a dataset directory");
  add_common(track_cmd, c_track);
  std::string track_data, track_weights, track_out;
  track_cmd->add_option("-d,--data", track_data, "Dataset directory")->required();
  track_cmd->add_option("-w,--weights", track_weights, "Weight file (needed for track.scorer = net)");
  track_cmd->add_option("-o,--out", track_out, "Output results file (MOT format)")->required();

  auto* eval_cmd = app.add_subcommand("eval", "Score results against ground truth");
  add_common(eval_cmd, c_eval);
  std::string eval_gt, eval_res, eval_out, eval_csv;
  eval_cmd->add_option("-g,--gt", eval_gt, "Ground-truth MOT file")->required();
  eval_cmd->add_option("-r,--results", eval_res, "Results MOT file")->required();
  eval_cmd->add_option("-o,--out", eval_out, "Report (key=value)")->required();
  eval_cmd->add_option("--csv", eval_csv, "Also write a one-row CSV report");

  auto* assoc_cmd = app.add_subcommand("assoc-eval", "Tracklet link FDR/FNR with and without EG");
  add_common(assoc_cmd, c_assoc);
  std::string assoc_data, assoc_out;
  assoc_cmd->add_option("-d,--data", assoc_data, "Dataset directory with gt.txt")->required();
  assoc_cmd->add_option("-o,--out", assoc_out, "Output CSV")->required();

  auto* pb_cmd = app.add_subcommand("predict-box", "Epipolar box prediction for one box");
  std::string pb_box, pb_f;
  double pb_reg = 1e-6;
  pb_cmd->add_option("--box", pb_box, "cx,cy,w,h in frame t")->required();
  pb_cmd->add_option("--F", pb_f, "Fundamental matrix, 9 row-major values")->required();
  pb_cmd->add_option("--reg", pb_reg, "Tikhonov weight");

  auto* plot_cmd = app.add_subcommand("plot", "SVG overlay of trajectories");
  add_common(plot_cmd, c_plot);
  std::string plot_res, plot_data, plot_out, plot_title;
  plot_cmd->add_option("-r,--results", plot_res, "Results MOT file")->required();
  plot_cmd->add_option("-d,--data", plot_data, "Dataset directory (frame size, optional gt)")->required();
  plot_cmd->add_option("-o,--out", plot_out, "Output SVG")->required();
  plot_cmd->add_option("--title", plot_title, "Title text");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kUsage;
  }

  try {
    if (force_scalar) simd::set_backend(simd::Backend::kScalar);

    if (synth->parsed()) {
      const RunConfig cfg = resolve(c_synth);
      write_dataset(generate(cfg.scene), synth_out);
      std::cout << "wrote dataset " << synth_out << "\n";
    } else if (train_cmd->parsed()) {
      const RunConfig cfg = resolve(c_train);
      std::vector<TrajectoryPairSampler::Source> sources;
      for (const std::string& dir : train_data) {
        const Dataset ds = read_dataset(dir);
        check_feature_dim(ds, cfg, dir);
        if (ds.gt.empty()) fail(ErrorKind::kIo, dir + " has no gt.txt to train from");
        sources.push_back({ds.meta.frame, gt_with_features(ds.gt, ds.detections.frames,
                                                           cfg.eval.iou_match_threshold)});
      }
      TrajectoryPairSampler sampler(std::move(sources), cfg.augment, cfg.net);
      std::string loss_csv = "step,loss,lr\n";
      const TrainResult result = train(sampler, cfg.train, cfg.net, [&](int step, double loss, double lr) {
        loss_csv += std::to_string(step) + "," + format_real(loss) + "," + format_real(lr) + "\n";
        if ((step + 1) % 100 == 0) {
          std::cerr << "step " << step + 1 << "/" << cfg.train.steps << " loss " << loss << "\n";
        }
      });
      save_weights(result.weights, weights_out);
      write_file_atomic(loss_out.empty() ? weights_out + ".loss.csv" : loss_out, loss_csv);
      std::cout << "final_batch_accuracy=" << format_real(result.final_batch_accuracy) << "\n";
    } else if (track_cmd->parsed()) {
      const RunConfig cfg = resolve(c_track);
      const Dataset ds = read_dataset(track_data);
      TrackingInput input{ds.meta.frame, ds.detections.frames, ds.matches};
      TrackingResult result;
      if (cfg.scorer == ScorerKind::kNetwork) {
        check_feature_dim(ds, cfg, track_data);
        if (track_weights.empty()) fail(ErrorKind::kConfig, "track.scorer = net needs --weights");
        const NetWeights weights = load_weights(track_weights, cfg.net);
        result = track(input, tracker_config(cfg), network_scorer(weights, ds.meta.frame));
      } else {
        result = track(input, tracker_config(cfg), bhattacharyya_scorer);
      }
      write_results(result.trajectories, track_out);
      std::cout << "tracklets=" << result.tracklets.size() << " trajectories="
                << result.trajectories.size() << " geometry_failures=" << result.geometry_failures
                << "\n";
    } else if (eval_cmd->parsed()) {
      const RunConfig cfg = resolve(c_eval);
      const EvalReport r =
          evaluate(parse_mot_trajectories(eval_gt), parse_mot_trajectories(eval_res), cfg.eval);
      write_file_atomic(eval_out, to_key_value(r));
      if (!eval_csv.empty()) write_file_atomic(eval_csv, csv_header() + to_csv_row(r));
      std::cout << to_key_value(r);
    } else if (assoc_cmd->parsed()) {
      const RunConfig cfg = resolve(c_assoc);
      const Dataset ds = read_dataset(assoc_data);
      if (ds.gt.empty()) fail(ErrorKind::kIo, assoc_data + " has no gt.txt");
      std::string csv = "use_eg,fdr,fnr,tp,fp,fn\n";
      for (bool eg : {false, true}) {
        AssociationConfig a = cfg.assoc;
        a.use_eg = eg;
        const std::vector<FramePair> pairs =
            eg ? estimate_frame_pairs(ds.matches, cfg.ransac) : std::vector<FramePair>{};
        const auto tracklets = build_tracklets(ds.detections.frames, pairs, a);
        const AssociationErrors e =
            association_errors(tracklets, ds.gt, cfg.eval.iou_match_threshold);
        csv += std::string(eg ? "true" : "false") + "," + format_real(e.fdr) + "," +
               format_real(e.fnr) + "," + std::to_string(e.counts.tp) + "," +
               std::to_string(e.counts.fp) + "," + std::to_string(e.counts.fn) + "\n";
      }
      write_file_atomic(assoc_out, csv);
      std::cout << csv;
    } else if (pb_cmd->parsed()) {
      const auto b = parse_list(pb_box, 4, "--box");
      const auto f = parse_list(pb_f, 9, "--F");
      Eigen::Matrix3d m;
      m << f[0], f[1], f[2], f[3], f[4], f[5], f[6], f[7], f[8];
      const BoundingBox box{b[0], b[1], b[2], b[3]};
      if (!box.valid()) fail(ErrorKind::kInvalidArgument, "--box needs positive width and height");
      const BoundingBox p = predict_box(box, FundamentalMatrix::from_matrix(m), pb_reg);
      std::cout << "cx=" << format_real(p.cx) << " cy=" << format_real(p.cy)
                << " w=" << format_real(p.w) << " h=" << format_real(p.h) << "\n";
    } else if (plot_cmd->parsed()) {
      resolve(c_plot);
      const DatasetMeta meta = parse_meta(fs::path(plot_data) / "meta.txt");
      std::vector<Trajectory> gt;
      if (fs::exists(fs::path(plot_data) / "gt.txt")) gt = parse_mot_trajectories(fs::path(plot_data) / "gt.txt");
      write_file_atomic(plot_out, trajectories_svg(parse_mot_trajectories(plot_res), meta.frame, gt, plot_title));
      std::cout << "wrote " << plot_out << "\n";
    }
  } catch (const Error& e) {
    std::cerr << "error [" << to_string(e.kind()) << "]: " << e.what() << "\n";
    return exit_code_for(e.kind());
  } catch (const std::exception& e) {
    std::cerr << "error [internal]: " << e.what() << "\n";
    return kUnexpected;
  }
  return kOk;
}
