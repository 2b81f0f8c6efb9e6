#include "auvhunt/harness/pipeline.hpp"

#include <algorithm>
#include <cstdio>
#include <cstdlib>

namespace auvhunt::harness {

namespace fs = std::filesystem;

fs::path RunLayout::checkpoint(int step) const {
  char name[32];
  std::snprintf(name, sizeof name, "step_%06d.ckpt", step);
  return checkpoints() / name;
}

fs::path output_dir(const std::string& explicit_dir) {
  if (!explicit_dir.empty()) return explicit_dir;
  if (const char* env = std::getenv("AUVHUNT_OUT_DIR"); env && *env) return env;
  return "auvhunt_out";
}

dataset::Dataset generate_dataset(const RunConfig& cfg) {
  cfg.validate();
  return dataset::generate(cfg.env, cfg.behavior, dataset_options(cfg));
}

dataset::Dataset require_dataset(const fs::path& dir, const std::string& stage) {
  for (const char* name : {"manifest.json", "episodes.bin"}) {
    if (!fs::exists(dir / name)) {
      throw MissingArtifactError("dataset file " + (dir / name).string() +
                                     " (run gen-dataset first)",
                                 stage);
    }
  }
  return dataset::load(dir);
}

amadp::Policy require_policy(const fs::path& checkpoint, const std::string& stage) {
  if (checkpoint.empty() || !fs::exists(checkpoint)) {
    throw MissingArtifactError("checkpoint " + checkpoint.string() + " (run train first)", stage);
  }
  return amadp::load_policy(checkpoint);
}

TrainOutput train_stage(const RunConfig& cfg, const dataset::Dataset& data,
                        const RunLayout& layout) {
  cfg.validate();
  TrainOutput out;
  fs::create_directories(layout.checkpoints());
  out.losses = amadp::train(data, training_config(cfg), [&](int step, const nn::Checkpoint& c) {
    const auto path = layout.checkpoint(step);
    nn::save_checkpoint(path, c);
    out.checkpoints.emplace_back(step, path);
  });
  write_text(layout.loss_csv(), loss_csv(out.losses, config_hash(cfg)));
  return out;
}

std::vector<std::pair<int, fs::path>> list_checkpoints(const RunLayout& layout) {
  std::vector<std::pair<int, fs::path>> out;
  if (!fs::is_directory(layout.checkpoints())) return out;
  for (const auto& entry : fs::directory_iterator(layout.checkpoints())) {
    const auto name = entry.path().filename().string();
    int step = 0;
    char tail = 0;
    if (std::sscanf(name.c_str(), "step_%d.ckp%c", &step, &tail) == 2 && tail == 't' &&
        entry.path().extension() == ".ckpt") {
      out.emplace_back(step, entry.path());
    }
  }
  std::sort(out.begin(), out.end());
  return out;
}

std::vector<env::EpisodeTrace> evaluate_policy(const RunConfig& cfg, const amadp::Policy& policy,
                                               int episodes) {
  const auto s = seeds(cfg);
  amadp::ExecutionConfig exec = cfg.execution;
  exec.seed = s.sampler;
  // Sampling-time settings follow the run config; training-time ones stay as trained.
  amadp::Policy p = policy;
  p.guidance.guidance_weight = cfg.train.guidance.guidance_weight;
  p.guidance.denoise_clip = cfg.train.guidance.denoise_clip;
  p.guidance.sample_noise_scale = cfg.train.guidance.sample_noise_scale;
  return run_episodes(episodes, cfg.eval.threads, [&](int i) {
    return amadp::execute_episode(episode_env(cfg, s.eval, i), p, exec);
  });
}

std::vector<env::EpisodeTrace> evaluate_scripted(const RunConfig& cfg, behavior::Policy policy,
                                                 int episodes, std::uint64_t env_stage_seed) {
  const auto s = seeds(cfg);
  return run_episodes(episodes, cfg.eval.threads, [&](int i) {
    return run_scripted(episode_env(cfg, env_stage_seed, i), policy, cfg.behavior.params,
                        derive_seed(s.simulate, "behavior", static_cast<std::uint64_t>(i)));
  });
}

std::vector<CurvePoint> success_curve(
    const RunConfig& cfg, const std::vector<std::pair<int, fs::path>>& checkpoints,
    const std::function<void(const CurvePoint&)>& progress) {
  std::vector<CurvePoint> curve;
  for (const auto& [step, path] : checkpoints) {
    const auto policy = require_policy(path, "success curve");
    const auto traces = evaluate_policy(cfg, policy, cfg.eval.curve_episodes);
    CurvePoint p;
    p.step = step;
    p.episodes = static_cast<int>(traces.size());
    for (const auto& t : traces) p.successes += t.status == env::EpisodeStatus::kSuccess;
    p.success_rate = static_cast<double>(p.successes) / p.episodes;
    if (progress) progress(p);
    curve.push_back(p);
  }
  return curve;
}

}  // namespace auvhunt::harness
