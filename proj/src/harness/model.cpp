#include "hspn/harness/model.hpp"

#include <stdexcept>

namespace hspn {

namespace {

void save_params(io::Container& c, const std::string& prefix, nn::ParamRefs params) {
  for (const auto* p : params)
    c.put_f64(prefix + p->name, p->value.data(),
              {static_cast<uint64_t>(p->value.rows), static_cast<uint64_t>(p->value.cols)});
}

void load_params(const io::Container& c, const std::string& prefix, nn::ParamRefs params) {
  for (auto* p : params) {
    const auto v = c.get_f64(prefix + p->name);
    if (v.size() != p->value.d.size())
      throw io::FormatError("checkpoint: size mismatch for " + p->name);
    p->value.d = v;
  }
}

std::vector<int64_t> to_i64(const std::vector<int>& v) {
  return std::vector<int64_t>(v.begin(), v.end());
}

std::vector<int> to_int(const std::vector<int64_t>& v) {
  return std::vector<int>(v.begin(), v.end());
}

}  // namespace

void PredictorModel::init(uint64_t seed, int in_slices, const BranchingConfig& cfg) {
  slices = in_slices;
  branching = cfg;
  Rng rng(Rng::splitmix64(seed ^ 0x9ced1ull));
  encoder.init(in_slices, rng);
  generator.init(branching, rng);
  critic.init(rng);
}

nn::ParamRefs PredictorModel::generator_params() {
  nn::ParamRefs out;
  encoder.params(out);
  generator.params(out);
  return out;
}

nn::ParamRefs PredictorModel::critic_params() {
  nn::ParamRefs out;
  critic.params(out);
  return out;
}

PointCloud PredictorModel::predict(const Mat& image_stack) const {
  Rng dummy(0);
  const LatentCode code = encoder.encode(image_stack, dummy, false, nullptr);
  return generator.generate(code, nullptr);
}

void CompletionModel::init(uint64_t seed, const CompletionConfig& cfg) {
  config = cfg;
  Rng rng(Rng::splitmix64(seed ^ 0xc0337ull));
  net.init(config, rng);
}

nn::ParamRefs CompletionModel::params() {
  nn::ParamRefs out;
  net.params(out);
  return out;
}

void save_predictor(io::Container& c, PredictorModel& model) {
  c.put_scalar("predictor/slices", model.slices);
  c.put_i64("predictor/branching/degrees", to_i64(model.branching.degrees).data(),
            {model.branching.degrees.size()});
  c.put_i64("predictor/branching/widths", to_i64(model.branching.feature_widths).data(),
            {model.branching.feature_widths.size()});
  c.put_scalar("predictor/branching/k_support", model.branching.k_support);
  c.put_scalar("predictor/branching/root_count", model.branching.root_count);
  save_params(c, "predictor/param/", model.generator_params());
  save_params(c, "predictor/param/", model.critic_params());
}

void load_predictor(const io::Container& c, PredictorModel& model) {
  BranchingConfig cfg;
  cfg.degrees = to_int(c.get_i64("predictor/branching/degrees"));
  cfg.feature_widths = to_int(c.get_i64("predictor/branching/widths"));
  cfg.k_support = static_cast<int>(c.get_scalar("predictor/branching/k_support"));
  cfg.root_count = static_cast<int>(c.get_scalar("predictor/branching/root_count"));
  model.init(0, static_cast<int>(c.get_scalar("predictor/slices")), cfg);
  load_params(c, "predictor/param/", model.generator_params());
  load_params(c, "predictor/param/", model.critic_params());
}

void save_completion(io::Container& c, CompletionModel& model) {
  const auto& cfg = model.config;
  const std::vector<int64_t> sa{
      cfg.sa1.npoint, cfg.sa1.kmax, cfg.sa2.npoint, cfg.sa2.kmax};
  c.put_i64("completion/config/sa", sa.data(), {sa.size()});
  const std::vector<double> radii{cfg.sa1.radius, cfg.sa2.radius};
  c.put_f64("completion/config/radii", radii.data(), {radii.size()});
  c.put_i64("completion/config/sa1_widths", to_i64(cfg.sa1.mlp_widths).data(),
            {cfg.sa1.mlp_widths.size()});
  c.put_i64("completion/config/sa2_widths", to_i64(cfg.sa2.mlp_widths).data(),
            {cfg.sa2.mlp_widths.size()});
  c.put_i64("completion/config/sa3_widths", to_i64(cfg.sa3_widths).data(),
            {cfg.sa3_widths.size()});
  const std::vector<int64_t> dec{cfg.d_att,       cfg.dec1_points, cfg.dec1_width,
                                 cfg.dec2_factor, cfg.dec2_width,  cfg.dec3_factor,
                                 cfg.dec3_width,  cfg.use_cross_agb ? 1 : 0,
                                 cfg.use_self_agb ? 1 : 0};
  c.put_i64("completion/config/dec", dec.data(), {dec.size()});
  save_params(c, "completion/param/", model.params());
}

void load_completion(const io::Container& c, CompletionModel& model) {
  CompletionConfig cfg;
  const auto sa = c.get_i64("completion/config/sa");
  cfg.sa1.npoint = static_cast<int>(sa[0]);
  cfg.sa1.kmax = static_cast<int>(sa[1]);
  cfg.sa2.npoint = static_cast<int>(sa[2]);
  cfg.sa2.kmax = static_cast<int>(sa[3]);
  const auto radii = c.get_f64("completion/config/radii");
  cfg.sa1.radius = radii[0];
  cfg.sa2.radius = radii[1];
  cfg.sa1.mlp_widths = to_int(c.get_i64("completion/config/sa1_widths"));
  cfg.sa2.mlp_widths = to_int(c.get_i64("completion/config/sa2_widths"));
  cfg.sa3_widths = to_int(c.get_i64("completion/config/sa3_widths"));
  const auto dec = c.get_i64("completion/config/dec");
  cfg.d_att = static_cast<int>(dec[0]);
  cfg.dec1_points = static_cast<int>(dec[1]);
  cfg.dec1_width = static_cast<int>(dec[2]);
  cfg.dec2_factor = static_cast<int>(dec[3]);
  cfg.dec2_width = static_cast<int>(dec[4]);
  cfg.dec3_factor = static_cast<int>(dec[5]);
  cfg.dec3_width = static_cast<int>(dec[6]);
  cfg.use_cross_agb = dec[7] != 0;
  cfg.use_self_agb = dec[8] != 0;
  model.init(0, cfg);
  load_params(c, "completion/param/", model.params());
}

void save_checkpoint(const std::string& path, PredictorModel* pred,
                     CompletionModel* comp, const std::string& rng_state) {
  io::Container c;
  c.put_scalar("meta/version", 1.0);
  c.put_string("rng/state", rng_state);
  if (pred) save_predictor(c, *pred);
  if (comp) save_completion(c, *comp);
  c.write(path);
}

LoadedCheckpoint load_checkpoint(const std::string& path, PredictorModel* pred,
                                 CompletionModel* comp) {
  const io::Container c = io::Container::read(path);
  if (c.get_scalar("meta/version") != 1.0)
    throw io::FormatError("checkpoint: unsupported version in " + path);
  LoadedCheckpoint out;
  out.rng_state = c.get_string("rng/state");
  if (pred && c.has("predictor/slices")) {
    load_predictor(c, *pred);
    out.has_predictor = true;
  }
  if (comp && c.has("completion/config/sa")) {
    load_completion(c, *comp);
    out.has_completion = true;
  }
  return out;
}

}  // namespace hspn
