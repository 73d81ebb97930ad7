// gigvad: generate synthetic datasets, train the detection head, score
// videos, and evaluate frame-level metrics.
//
// Exit codes: 0 ok, 1 usage/configuration, 2 I/O, 3 numeric failure.

#include <CLI11.hpp>

#include <cstdint>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "gigvad/gigvad.hpp"

namespace fs = std::filesystem;
using namespace gigvad;

namespace {

constexpr int kExitUsage = 1;
constexpr int kExitIo = 2;
constexpr int kExitNumeric = 3;

struct CommonFlags {
  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::string out_dir;
};

Config resolve_config(const CommonFlags& flags) {
  Config cfg = flags.config_path.empty() ? Config{} : load_config(flags.config_path);
  if (flags.seed) cfg.train.seed = *flags.seed;
  if (!flags.out_dir.empty()) cfg.output_dir = flags.out_dir;
  cfg.validate();
  return cfg;
}

void echo_config(const Config& cfg) { std::cout << "# resolved config\n" << config_to_text(cfg) << std::flush; }

std::string require_path(const std::string& flag, const std::string& from_config, const char* what) {
  const std::string& p = flag.empty() ? from_config : flag;
  if (p.empty()) throw ConfigError(std::string("no ") + what + " given (flag or config key)");
  return p;
}

/// Model config for scoring with a loaded checkpoint: k comes from the file.
TrainConfig model_for(const Config& cfg, const Checkpoint& ck) {
  if (ck.channels != cfg.train.dims.d) {
    throw ConfigError("checkpoint has d = " + std::to_string(ck.channels) + " but config feature_d = " +
                      std::to_string(cfg.train.dims.d));
  }
  TrainConfig m = cfg.train;
  m.k = ck.k;
  m.validate();
  return m;
}

fs::path score_file_name(const fs::path& dir, std::uint64_t video_id) {
  return dir / (std::to_string(video_id) + ".scores.tsv");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Weakly-supervised video anomaly detection head on synthetic feature streams"};
  app.require_subcommand(1);

  // generate-data
  GeneratorSpec gen;
  std::string gen_out, gen_split = "train";
  auto* generate = app.add_subcommand("generate-data", "Write a synthetic dataset file");
  generate->add_option("--out", gen_out, "Output dataset file")->required();
  generate->add_option("--videos", gen.videos, "Number of videos")->capture_default_str();
  generate->add_option("--normal", gen.normal, "Number of normal videos")->capture_default_str();
  generate->add_option("--classes", gen.classes, "Anomaly class count C")->capture_default_str();
  generate->add_option("--seed", gen.seed, "Generator and feature seed")->capture_default_str();
  generate->add_option("--split", gen_split, "train (trimmed) or test (untrimmed)")
      ->check(CLI::IsMember({"train", "test"}))
      ->capture_default_str();

  // train
  CommonFlags train_flags;
  std::string train_data, train_ckpt, train_log;
  auto* train_cmd = app.add_subcommand("train", "Train both heads and write a checkpoint and loss log");
  train_cmd->add_option("--config", train_flags.config_path, "Config file (key = value)");
  train_cmd->add_option("--seed", train_flags.seed, "Override the config seed");
  train_cmd->add_option("--data", train_data, "Training dataset (overrides train_data)");
  train_cmd->add_option("--out", train_flags.out_dir, "Output directory (overrides output_dir)");
  train_cmd->add_option("--checkpoint", train_ckpt, "Checkpoint path [out/checkpoint.bin]");
  train_cmd->add_option("--loss-log", train_log, "Loss log path [out/loss.log]");

  // eval
  CommonFlags eval_flags;
  std::string eval_data, eval_ckpt, eval_scores, eval_report;
  auto* eval_cmd = app.add_subcommand("eval", "Frame-level AUC, class-wise F1, and MF1 on a dataset");
  eval_cmd->add_option("--config", eval_flags.config_path, "Config file (key = value)");
  eval_cmd->add_option("--seed", eval_flags.seed, "Override the config seed");
  eval_cmd->add_option("--data", eval_data, "Evaluation dataset (overrides test_data)");
  eval_cmd->add_option("--out", eval_flags.out_dir, "Output directory (overrides output_dir)");
  eval_cmd->add_option("--checkpoint", eval_ckpt, "Checkpoint to score the videos with");
  eval_cmd->add_option("--scores", eval_scores, "Directory of precomputed <id>.scores.tsv files");
  eval_cmd->add_option("--report", eval_report, "Metrics report path [out/metrics.txt]");

  // score
  CommonFlags score_flags;
  std::string score_data, score_ckpt, score_out;
  std::uint64_t score_video_id = 0;
  auto* score_cmd = app.add_subcommand("score", "Write smoothed per-frame scores of one video");
  score_cmd->add_option("--config", score_flags.config_path, "Config file (key = value)");
  score_cmd->add_option("--data", score_data, "Dataset holding the video (overrides test_data)");
  score_cmd->add_option("--checkpoint", score_ckpt, "Checkpoint")->required();
  score_cmd->add_option("--video", score_video_id, "Video id")->required();
  score_cmd->add_option("--out", score_out, "Score file [output_dir/<id>.scores.tsv]");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitUsage;
  }

  try {
    if (generate->parsed()) {
      gen.split = gen_split == "test" ? Split::test : Split::train;
      const DatasetSpec ds = generate_dataset(gen);
      save_dataset(gen_out, ds);
      std::cout << "wrote " << ds.size() << " videos (C = " << ds.classes << ", seed = " << ds.seed << ") to "
                << gen_out << '\n';
      return 0;
    }

    if (train_cmd->parsed()) {
      const Config cfg = resolve_config(train_flags);
      echo_config(cfg);
      const DatasetSpec ds = load_dataset(require_path(train_data, cfg.train_data, "training dataset"));
      const fs::path out = cfg.output_dir;
      fs::create_directories(out);
      const TrainResult result = train(ds, cfg.train);
      const Checkpoint ck{ds.classes, cfg.train.dims.d, cfg.train.resolved_k(), cfg.train.resolved_p(), result.params};
      const fs::path ck_path = train_ckpt.empty() ? out / "checkpoint.bin" : fs::path(train_ckpt);
      const fs::path log_path = train_log.empty() ? out / "loss.log" : fs::path(train_log);
      save_checkpoint(ck_path, ck);
      io::write_file_atomic(log_path, loss_log_to_text(result.epochs));
      if (!result.epochs.empty()) {
        std::cout << "final epoch total loss = " << io::format_double(result.epochs.back().total) << '\n';
      }
      std::cout << "wrote " << ck_path.string() << " and " << log_path.string() << '\n';
      return 0;
    }

    if (eval_cmd->parsed()) {
      const Config cfg = resolve_config(eval_flags);
      echo_config(cfg);
      const DatasetSpec ds = load_dataset(require_path(eval_data, cfg.test_data, "evaluation dataset"));
      if (eval_ckpt.empty() == eval_scores.empty()) {
        throw ConfigError("eval needs exactly one of --checkpoint or --scores");
      }
      MetricsReport report;
      if (!eval_ckpt.empty()) {
        const Checkpoint ck = load_checkpoint(eval_ckpt);
        report = evaluate(ds, ck.params, model_for(cfg, ck), cfg.inference);
      } else {
        std::vector<FrameScoreSeries> series;
        for (const auto& v : ds.videos) {
          const fs::path p = score_file_name(eval_scores, v.id);
          series.push_back(parse_scores(io::read_file(p), p.string()));
        }
        report = evaluate_series(series, ds.videos, ds.classes, cfg.inference.tau);
      }
      const std::string text = metrics_to_text(report);
      const fs::path out = cfg.output_dir;
      fs::create_directories(out);
      const fs::path report_path = eval_report.empty() ? out / "metrics.txt" : fs::path(eval_report);
      io::write_file_atomic(report_path, text);
      std::cout << text;
      return 0;
    }

    if (score_cmd->parsed()) {
      const Config cfg = resolve_config(score_flags);
      echo_config(cfg);
      const DatasetSpec ds = load_dataset(require_path(score_data, cfg.test_data, "dataset"));
      const VideoSpec* video = nullptr;
      for (const auto& v : ds.videos) {
        if (v.id == score_video_id) video = &v;
      }
      if (!video) throw ConfigError("video " + std::to_string(score_video_id) + " not in dataset");
      const Checkpoint ck = load_checkpoint(score_ckpt);
      const FrameScoreSeries s =
          smooth_series(score_video(*video, ck.params, model_for(cfg, ck), cfg.inference, ds.seed), cfg.inference.sigma);
      const fs::path out = score_out.empty() ? score_file_name(cfg.output_dir, video->id) : fs::path(score_out);
      io::write_file_atomic(out, scores_to_text(s));
      std::cout << "wrote " << s.frames() << " frame scores to " << out.string() << '\n';
      return 0;
    }
  } catch (const IoError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitIo;
  } catch (const fs::filesystem_error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitIo;
  } catch (const ConfigError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const DimensionError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitNumeric;
  }
  return kExitUsage;
}
