#include "hspn/harness/train.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>

#include "json.hpp"

#include "hspn/geometry/metrics.hpp"
#include "hspn/nn/adam.hpp"
#include "hspn/predictor/losses.hpp"

namespace hspn {

namespace {

void diverged(const std::string& diag_path, const char* stage, int epoch,
              int step, double value) {
  if (!diag_path.empty()) {
    nlohmann::ordered_json j;
    j["stage"] = stage;
    j["epoch"] = epoch;
    j["step"] = step;
    j["value_finite"] = std::isfinite(value);
    j["value"] = std::isfinite(value) ? value : 0.0;
    std::ofstream f(diag_path, std::ios::trunc);
    f << j.dump(2) << "\n";
  }
  throw TrainingDiverged(std::string(stage) + ": non-finite loss at epoch " +
                         std::to_string(epoch) + " step " + std::to_string(step));
}

std::vector<int> shuffled(std::vector<int> idx, Rng& rng) {
  for (int i = static_cast<int>(idx.size()) - 1; i > 0; --i)
    std::swap(idx[i], idx[rng.uniform_index(i + 1)]);
  return idx;
}

double eval_mode_cd_predictor(const PredictorModel& model,
                              const std::vector<SyntheticSample>& dataset,
                              const std::vector<int>& idx, int slices) {
  double acc = 0.0;
  for (int i : idx) {
    const PointCloud fake = model.predict(image_stack_for(dataset[i], slices));
    acc += chamfer(fake, dataset[i].partial);
  }
  return acc / idx.size();
}

double eval_mode_cd_completion(const CompletionModel& model,
                               const std::vector<PointCloud>& inputs,
                               const std::vector<SyntheticSample>& dataset,
                               const std::vector<int>& idx) {
  double acc = 0.0;
  for (size_t k = 0; k < idx.size(); ++k) {
    const PointCloud pred = model.net.complete(inputs[k], nullptr);
    acc += chamfer(pred, dataset[idx[k]].gt);
  }
  return acc / idx.size();
}

}  // namespace

std::vector<int> training_indices(const TrainConfig& cfg,
                                  const std::vector<SyntheticSample>& dataset) {
  std::vector<int> idx;
  for (int i = 0; i < static_cast<int>(dataset.size()); ++i)
    if (cfg.train_on_all || dataset[i].split == "train") idx.push_back(i);
  if (idx.empty())
    throw std::invalid_argument("train: no samples in the training split");
  return idx;
}

Mat image_stack_for(const SyntheticSample& s, int slices) {
  if (slices <= 1) return s.image;
  return render_slice_stack(s.gt, s.visible, slices);
}

PointCloud resample_to(const PointCloud& cloud, int n, Rng& rng) {
  PointCloud out(n);
  const int m = cloud.size();
  for (int i = 0; i < n; ++i) {
    const int j = i < m ? i : static_cast<int>(rng.uniform_index(m));
    for (int k = 0; k < 3; ++k) out.xyz[3 * i + k] = cloud.xyz[3 * j + k];
  }
  return out;
}

TrainResult train_predictor(const TrainConfig& cfg,
                            const std::vector<SyntheticSample>& dataset,
                            PredictorModel& model, bool adversarial,
                            const std::string& diag_path,
                            const EpochHook& on_epoch) {
  const std::vector<int> train_idx = training_indices(cfg, dataset);
  Rng rng(Rng::splitmix64(cfg.seed ^ 0x7261123ull));

  // image stacks are pure functions of the sample; build once
  std::vector<Mat> stacks;
  stacks.reserve(dataset.size());
  for (const auto& s : dataset) stacks.push_back(image_stack_for(s, cfg.slices));

  nn::Adam gen_opt(cfg.lr), critic_opt(cfg.lr);
  const nn::ParamRefs gen_params = model.generator_params();
  const nn::ParamRefs critic_params = model.critic_params();

  TrainResult res;
  res.initial_cd = eval_mode_cd_predictor(model, dataset, train_idx, cfg.slices);

  const int leaf = model.branching.leaf_count();
  bool stop = false;
  for (int epoch = 0; epoch < cfg.epochs && !stop; ++epoch) {
    const double lambda2 = cfg.lambda2_at(epoch);
    const auto order = shuffled(train_idx, rng);

    double sum_g = 0.0, sum_d = 0.0, sum_cd = 0.0;
    int logged = 0, d_logged = 0;

    for (size_t start = 0; start < order.size(); start += cfg.batch) {
      const size_t end = std::min(order.size(), start + cfg.batch);
      const int bsize = static_cast<int>(end - start);

      if (adversarial) {
        for (int c = 0; c < cfg.n_critic; ++c) {
          double d_loss = 0.0;
          for (size_t bi = start; bi < end; ++bi) {
            const auto& sample = dataset[order[bi]];
            const LatentCode code =
                model.encoder.encode(stacks[order[bi]], rng, true, nullptr);
            const PointCloud fake = model.generator.generate(code, nullptr);
            const PointCloud real = resample_to(sample.partial, leaf, rng);

            Critic::Memo mr, mf, mx;
            model.critic.forward(real, &mr);
            model.critic.backward_params(mr, -1.0 / bsize);
            model.critic.forward(fake, &mf);
            model.critic.backward_params(mf, 1.0 / bsize);

            const double t = rng.uniform();
            PointCloud xhat(leaf);
            for (size_t k = 0; k < xhat.xyz.size(); ++k)
              xhat.xyz[k] = t * real.xyz[k] + (1.0 - t) * fake.xyz[k];
            model.critic.forward(xhat, &mx);
            const Mat g = model.critic.input_grad_from_memo(mx);
            double n2 = 0.0;
            for (double v : g.d) n2 += v * v;
            const double gnorm = std::sqrt(n2);
            const double penalty = (gnorm - 1.0) * (gnorm - 1.0);
            if (gnorm > 1e-12) {
              const double coef =
                  cfg.lambda_gp / bsize * 2.0 * (gnorm - 1.0) / gnorm;
              model.critic.penalty_param_grad(mx, g, coef);
            }
            d_loss += (mf.out - mr.out + cfg.lambda_gp * penalty) / bsize;
          }
          if (!std::isfinite(d_loss))
            diverged(diag_path, "predictor-critic", epoch, res.steps, d_loss);
          critic_opt.step(critic_params);
          sum_d += d_loss;
          ++d_logged;
        }
      }

      // generator (and encoder) update
      double g_loss = 0.0, batch_cd = 0.0;
      for (size_t bi = start; bi < end; ++bi) {
        const auto& sample = dataset[order[bi]];
        ImageEncoder::Memo me;
        const LatentCode code =
            model.encoder.encode(stacks[order[bi]], rng, true, &me);
        Generator::Memo mg;
        const PointCloud fake = model.generator.generate(code, &mg);

        Mat dcloud(leaf, 3);
        Mat gfake(leaf, 3);
        const double cd = chamfer_grad(fake, sample.partial, &gfake, nullptr);
        for (size_t k = 0; k < dcloud.d.size(); ++k)
          dcloud.d[k] += lambda2 / bsize * gfake.d[k];

        double d_fake = 0.0;
        if (adversarial) {
          Critic::Memo mf;
          d_fake = model.critic.forward(fake, &mf);
          const Mat gin = model.critic.input_grad_from_memo(mf);
          for (size_t k = 0; k < dcloud.d.size(); ++k)
            dcloud.d[k] -= gin.d[k] / bsize;
        }

        const Vec dz = model.generator.backward(mg, dcloud);
        Vec dmu(kLatentDim, 0.0), dlv(kLatentDim, 0.0);
        kl_loss_grad(code, cfg.lambda1 / bsize, &dmu, &dlv);
        for (int k = 0; k < kLatentDim; ++k) {
          dmu[k] += dz[k];
          dlv[k] += dz[k] * 0.5 * std::exp(0.5 * code.log_var[k]) * code.eps[k];
        }
        model.encoder.backward(me, dmu, dlv, nullptr);

        g_loss += loss_predictor_g(code, fake, sample.partial, d_fake,
                                   cfg.lambda1, lambda2) /
                  bsize;
        batch_cd += cd / bsize;
      }
      if (!std::isfinite(g_loss))
        diverged(diag_path, "predictor-generator", epoch, res.steps, g_loss);
      gen_opt.step(gen_params);
      sum_g += g_loss;
      sum_cd += batch_cd;
      ++logged;
      ++res.steps;
      if (cfg.max_steps > 0 && res.steps >= cfg.max_steps) {
        stop = true;
        break;
      }
    }

    EpochLog log;
    log.epoch = epoch;
    log.loss_g = sum_g / std::max(1, logged);
    log.loss_d = d_logged > 0 ? sum_d / d_logged : 0.0;
    log.cd = sum_cd / std::max(1, logged);
    res.curve.push_back(log);
    if (on_epoch) on_epoch(epoch);
  }

  res.final_cd = eval_mode_cd_predictor(model, dataset, train_idx, cfg.slices);
  return res;
}

TrainResult train_completion(const TrainConfig& cfg,
                             const std::vector<SyntheticSample>& dataset,
                             const PredictorModel& frozen,
                             CompletionModel& model,
                             const std::string& diag_path,
                             const EpochHook& on_epoch) {
  const std::vector<int> train_idx = training_indices(cfg, dataset);
  Rng rng(Rng::splitmix64(cfg.seed ^ 0x7263call));

  // frozen predictor: inputs are fixed, compute them once
  std::vector<PointCloud> inputs;
  inputs.reserve(train_idx.size());
  for (int i : train_idx)
    inputs.push_back(frozen.predict(image_stack_for(dataset[i], cfg.slices)));

  nn::Adam opt(cfg.lr);
  const nn::ParamRefs params = model.params();

  TrainResult res;
  res.initial_cd = eval_mode_cd_completion(model, inputs, dataset, train_idx);

  const int out_points = model.config.output_points();
  bool stop = false;
  for (int epoch = 0; epoch < cfg.epochs && !stop; ++epoch) {
    std::vector<int> local(train_idx.size());
    for (size_t k = 0; k < local.size(); ++k) local[k] = static_cast<int>(k);
    const auto order = shuffled(local, rng);

    double sum_l3 = 0.0, sum_cd = 0.0, sum_emd = 0.0;
    int logged = 0;

    for (size_t start = 0; start < order.size(); start += cfg.batch) {
      const size_t end = std::min(order.size(), start + cfg.batch);
      const int bsize = static_cast<int>(end - start);

      double batch_l3 = 0.0, batch_cd = 0.0, batch_emd = 0.0;
      for (size_t bi = start; bi < end; ++bi) {
        const int k = order[bi];
        const auto& sample = dataset[train_idx[k]];
        CompletionNet::Memo memo;
        const PointCloud pred = model.net.complete(inputs[k], &memo);

        Mat dpred(out_points, 3);
        const CompletionLoss l = loss_completion_grad(
            pred, sample.gt, cfg.lambda3, cfg.lambda4, cfg.emd_points, rng, &dpred);
        for (auto& v : dpred.d) v /= bsize;
        model.net.backward(memo, dpred);

        batch_l3 += l.loss / bsize;
        batch_cd += l.cd / bsize;
        batch_emd += l.emd / bsize;
      }
      if (!std::isfinite(batch_l3))
        diverged(diag_path, "completion", epoch, res.steps, batch_l3);
      opt.step(params);
      sum_l3 += batch_l3;
      sum_cd += batch_cd;
      sum_emd += batch_emd;
      ++logged;
      ++res.steps;
      if (cfg.max_steps > 0 && res.steps >= cfg.max_steps) {
        stop = true;
        break;
      }
    }

    EpochLog log;
    log.epoch = epoch;
    log.loss_g = sum_l3 / std::max(1, logged);
    log.cd = sum_cd / std::max(1, logged);
    log.emd = sum_emd / std::max(1, logged);
    res.curve.push_back(log);
    if (on_epoch) on_epoch(epoch);
  }

  res.final_cd = eval_mode_cd_completion(model, inputs, dataset, train_idx);
  return res;
}

void write_curves_csv(const std::vector<EpochLog>& curve, bool predictor,
                      const std::string& path) {
  std::ofstream f(path, std::ios::trunc);
  if (!f) throw std::runtime_error("cannot open '" + path + "'");
  char buf[160];
  if (predictor) {
    f << "epoch,loss_g,loss_d,cd\n";
    for (const auto& e : curve) {
      std::snprintf(buf, sizeof buf, "%d,%.9g,%.9g,%.9g\n", e.epoch, e.loss_g,
                    e.loss_d, e.cd);
      f << buf;
    }
  } else {
    f << "epoch,loss,cd,emd\n";
    for (const auto& e : curve) {
      std::snprintf(buf, sizeof buf, "%d,%.9g,%.9g,%.9g\n", e.epoch, e.loss_g,
                    e.cd, e.emd);
      f << buf;
    }
  }
}

}  // namespace hspn
