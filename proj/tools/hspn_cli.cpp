// hspn command line: synthetic data generation, the two training stages,
// evaluation, ablations, robustness sweeps, the classification experiment
// and heatmap export. Every command is reproducible from (config, seed).

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>

#include "CLI11.hpp"

#include "hspn/harness/ablation.hpp"
#include "hspn/harness/classify.hpp"
#include "hspn/harness/config.hpp"
#include "hspn/harness/evaluate.hpp"
#include "hspn/harness/heatmap.hpp"
#include "hspn/harness/model.hpp"
#include "hspn/harness/train.hpp"
#include "hspn/kernels/kernels.hpp"

namespace fs = std::filesystem;
using namespace hspn;

namespace {

struct CommonArgs {
  std::string config_path;
  std::string out_dir = "out";
  long seed = -1;  // overrides the config seed when >= 0
};

void add_common(CLI::App* cmd, CommonArgs& args) {
  cmd->add_option("--config", args.config_path, "key = value config file");
  cmd->add_option("--out-dir", args.out_dir, "output directory");
  cmd->add_option("--seed", args.seed, "seed override");
}

KvConfig load_config(const CommonArgs& args) {
  KvConfig kv = args.config_path.empty() ? KvConfig{}
                                         : KvConfig::from_file(args.config_path);
  if (args.seed >= 0) kv.set("seed", std::to_string(args.seed));
  return kv;
}

std::vector<int> parse_int_list(const std::string& csv) {
  std::vector<int> out;
  size_t pos = 0;
  while (pos < csv.size()) {
    const size_t comma = csv.find(',', pos);
    const std::string tok = csv.substr(pos, comma == std::string::npos ? csv.npos
                                                                       : comma - pos);
    if (!tok.empty()) out.push_back(std::stoi(tok));
    if (comma == std::string::npos) break;
    pos = comma + 1;
  }
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"hierarchical shape-perception pipeline"};
  app.require_subcommand(1);

  CommonArgs common;

  // ---- datagen
  auto* datagen = app.add_subcommand("datagen", "generate a synthetic dataset");
  add_common(datagen, common);
  int datagen_count = -1;
  datagen->add_option("--count", datagen_count, "sample count override");

  // ---- train-predictor
  auto* trainp = app.add_subcommand("train-predictor", "train the adversarial predictor");
  add_common(trainp, common);
  std::string data_dir = "data";
  trainp->add_option("--data", data_dir, "dataset directory");

  // ---- train-completion
  auto* trainc = app.add_subcommand("train-completion",
                                    "train the completion network against a frozen predictor");
  add_common(trainc, common);
  std::string ckpt_path;
  trainc->add_option("--data", data_dir, "dataset directory");
  trainc->add_option("--ckpt", ckpt_path, "predictor checkpoint")->required();

  // ---- eval
  auto* eval = app.add_subcommand("eval", "evaluate a combined checkpoint");
  add_common(eval, common);
  std::string split = "all";
  eval->add_option("--data", data_dir, "dataset directory");
  eval->add_option("--ckpt", ckpt_path, "combined checkpoint")->required();
  eval->add_option("--split", split, "train | test | all");

  // ---- ablate
  auto* ablate = app.add_subcommand("ablate", "run the ablation variants");
  add_common(ablate, common);
  std::string variants_csv = "all";
  ablate->add_option("--data", data_dir, "dataset directory");
  ablate->add_option("--variants", variants_csv, "comma list of tags or 'all'");
  ablate->add_option("--split", split, "eval split");

  // ---- robust-points
  auto* robustp = app.add_subcommand("robust-points",
                                     "CD vs input cardinality (2048/1024/512/256)");
  add_common(robustp, common);
  robustp->add_option("--data", data_dir, "dataset directory");
  robustp->add_option("--ckpt", ckpt_path, "combined checkpoint")->required();
  robustp->add_option("--split", split, "eval split");

  // ---- robust-slices
  auto* robusts = app.add_subcommand("robust-slices",
                                     "CD vs image stack depth (1/3/5/7 slices)");
  add_common(robusts, common);
  robusts->add_option("--data", data_dir, "dataset directory");
  robusts->add_option("--split", split, "eval split");

  // ---- classify
  auto* classify = app.add_subcommand("classify",
                                      "classifier experiment over variant checkpoints");
  add_common(classify, common);
  std::vector<std::string> classify_ckpts;
  classify->add_option("--data", data_dir, "dataset directory");
  classify->add_option("--ckpt", classify_ckpts,
                       "variant checkpoint, tag=path or bare path (repeatable)")
      ->required();
  classify->add_option("--split", split, "eval split");

  // ---- heatmap
  auto* heatmap = app.add_subcommand("heatmap", "per-vertex error PLY export");
  add_common(heatmap, common);
  std::string sample_id;
  heatmap->add_option("--data", data_dir, "dataset directory");
  heatmap->add_option("--ckpt", ckpt_path, "combined checkpoint")->required();
  heatmap->add_option("--id", sample_id, "sample id (default: every eval sample)");
  heatmap->add_option("--split", split, "eval split");

  CLI11_PARSE(app, argc, argv);

  try {
    const KvConfig kv = load_config(common);
    const TrainConfig cfg = TrainConfig::from(kv);
    fs::create_directories(common.out_dir);

    if (datagen->parsed()) {
      DatasetConfig dc = dataset_config_from(kv);
      if (datagen_count > 0) dc.count = datagen_count;
      const auto samples = make_dataset(dc);
      write_dataset(samples, common.out_dir);
      std::printf("wrote %zu samples to %s\n", samples.size(), common.out_dir.c_str());
      return 0;
    }

    if (trainp->parsed()) {
      const auto dataset = read_dataset(data_dir);
      PredictorModel model;
      model.init(cfg.seed, cfg.slices);
      Rng rng(cfg.seed);
      const TrainResult res = train_predictor(
          cfg, dataset, model, true,
          (fs::path(common.out_dir) / "diverged_predictor.json").string());
      write_curves_csv(res.curve, true,
                       (fs::path(common.out_dir) / "curves_predictor.csv").string());
      save_checkpoint((fs::path(common.out_dir) / "predictor.ckpt").string(),
                      &model, nullptr, rng.save_state());
      std::printf("predictor: %d steps, cd %.9g -> %.9g\n", res.steps,
                  res.initial_cd, res.final_cd);
      return 0;
    }

    if (trainc->parsed()) {
      const auto dataset = read_dataset(data_dir);
      PredictorModel pred;
      const LoadedCheckpoint lc = load_checkpoint(ckpt_path, &pred, nullptr);
      if (!lc.has_predictor)
        throw std::invalid_argument("checkpoint has no predictor section: " + ckpt_path);
      CompletionModel comp;
      comp.init(cfg.seed, CompletionConfig{});
      Rng rng(cfg.seed);
      const TrainResult res = train_completion(
          cfg, dataset, pred, comp,
          (fs::path(common.out_dir) / "diverged_completion.json").string());
      write_curves_csv(res.curve, false,
                       (fs::path(common.out_dir) / "curves_completion.csv").string());
      save_checkpoint((fs::path(common.out_dir) / "combined.ckpt").string(), &pred,
                      &comp, rng.save_state());
      std::printf("completion: %d steps, cd %.9g -> %.9g\n", res.steps,
                  res.initial_cd, res.final_cd);
      return 0;
    }

    if (eval->parsed()) {
      const auto dataset = read_dataset(data_dir);
      PredictorModel pred;
      CompletionModel comp;
      const LoadedCheckpoint lc = load_checkpoint(ckpt_path, &pred, &comp);
      if (!lc.has_predictor || !lc.has_completion)
        throw std::invalid_argument("eval needs a combined checkpoint");
      const EvalReport r =
          evaluate(pred, comp, dataset, split, pred.slices, 0, cfg.seed);
      write_eval_report(r, common.out_dir, split);
      std::printf("eval[%s]: n=%zu cd_mean=%.9g (x1e-1: %.9g) cd_std=%.9g\n",
                  split.c_str(), r.rows.size(), r.cd_mean, r.cd_mean * 10.0,
                  r.cd_std);
      return 0;
    }

    if (ablate->parsed()) {
      const auto dataset = read_dataset(data_dir);
      std::vector<std::string> tags;
      if (variants_csv == "all") {
        tags = kAblationTags;
      } else {
        size_t pos = 0;
        while (pos < variants_csv.size()) {
          const size_t comma = variants_csv.find(',', pos);
          tags.push_back(variants_csv.substr(
              pos, comma == std::string::npos ? std::string::npos : comma - pos));
          if (comma == std::string::npos) break;
          pos = comma + 1;
        }
      }
      std::vector<int> ckpt_epochs =
          parse_int_list(kv.get_str("ablate_epochs", ""));
      if (ckpt_epochs.empty()) ckpt_epochs = {cfg.epochs};
      const auto rows = run_ablation(cfg, ckpt_epochs, dataset, tags, split);
      const std::string path = (fs::path(common.out_dir) / "ablation.csv").string();
      write_ablation_table(rows, path);
      std::printf("ablation table (reference values shown, never asserted): %s\n",
                  path.c_str());
      return 0;
    }

    if (robustp->parsed()) {
      const auto dataset = read_dataset(data_dir);
      PredictorModel pred;
      CompletionModel comp;
      const LoadedCheckpoint lc = load_checkpoint(ckpt_path, &pred, &comp);
      if (!lc.has_predictor || !lc.has_completion)
        throw std::invalid_argument("robust-points needs a combined checkpoint");
      const auto rows = robustness_points(pred, comp, dataset, split, cfg.seed);
      write_robust_table(rows, "points",
                         (fs::path(common.out_dir) / "robust_points.csv").string());
      for (const auto& r : rows)
        std::printf("points=%d cd_mean=%.9g (ref x1e-1: %.3f)\n", r.n, r.cd_mean,
                    r.reference_x01);
      return 0;
    }

    if (robusts->parsed()) {
      const auto dataset = read_dataset(data_dir);
      const auto rows = robustness_slices(cfg, dataset, split);
      write_robust_table(
          rows.empty() ? std::vector<RobustRow>{}
                       : [&] {
                           std::vector<RobustRow> rr;
                           for (const auto& r : rows)
                             rr.push_back({r.k, r.cd_mean, r.reference_x01});
                           return rr;
                         }(),
          "slices", (fs::path(common.out_dir) / "robust_slices.csv").string());
      for (const auto& r : rows)
        std::printf("slices=%d cd_mean=%.9g (ref x1e-1: %.3f)\n", r.k, r.cd_mean,
                    r.reference_x01);
      return 0;
    }

    if (classify->parsed()) {
      const auto dataset = read_dataset(data_dir);
      std::vector<std::pair<std::string, std::string>> tag_ckpts;
      for (const auto& spec : classify_ckpts) {
        const auto eq = spec.find('=');
        if (eq == std::string::npos)
          tag_ckpts.emplace_back(fs::path(spec).stem().string(), spec);
        else
          tag_ckpts.emplace_back(spec.substr(0, eq), spec.substr(eq + 1));
      }
      const auto results = classify_experiment(cfg, dataset, tag_ckpts, split);
      std::ofstream f(fs::path(common.out_dir) / "classify.csv", std::ios::trunc);
      f << "variant,mean_true_score\n";
      char buf[128];
      for (const auto& r : results) {
        std::snprintf(buf, sizeof buf, "%s,%.9g\n", r.tag.c_str(),
                      r.mean_true_score);
        f << buf;
        std::printf("%s: mean true score %.9g\n", r.tag.c_str(), r.mean_true_score);
      }
      return 0;
    }

    if (heatmap->parsed()) {
      const auto dataset = read_dataset(data_dir);
      PredictorModel pred;
      CompletionModel comp;
      const LoadedCheckpoint lc = load_checkpoint(ckpt_path, &pred, &comp);
      if (!lc.has_predictor || !lc.has_completion)
        throw std::invalid_argument("heatmap needs a combined checkpoint");
      int written = 0;
      for (const auto& s : dataset) {
        if (!sample_id.empty() && s.id != sample_id) continue;
        if (sample_id.empty() && split != "all" && s.split != split) continue;
        const PointCloud stage = pred.predict(image_stack_for(s, pred.slices));
        const PointCloud completed = comp.net.complete(stage, nullptr);
        const std::string path =
            (fs::path(common.out_dir) / (s.id + "_heatmap.ply")).string();
        export_heatmap(completed, s.gt, path);
        ++written;
      }
      if (written == 0)
        throw std::invalid_argument("heatmap: no matching samples (id '" +
                                    sample_id + "')");
      std::printf("wrote %d heatmap(s) to %s\n", written, common.out_dir.c_str());
      return 0;
    }

    throw std::logic_error("unhandled subcommand");
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
}
