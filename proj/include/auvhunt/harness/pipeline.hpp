#pragma once

#include <filesystem>
#include <functional>
#include <string>
#include <utility>
#include <vector>

#include "auvhunt/harness/artifacts.hpp"
#include "auvhunt/harness/config.hpp"

namespace auvhunt::harness {

/// Raised when a stage needs an artifact that an earlier stage should have
/// produced. Exit code 2.
class MissingArtifactError : public Error {
 public:
  MissingArtifactError(std::string artifact, const std::string& stage)
      : Error(stage + ": missing " + artifact), artifact_(std::move(artifact)) {}
  const std::string& artifact() const noexcept { return artifact_; }

 private:
  std::string artifact_;
};

/// Output layout under one run directory.
struct RunLayout {
  std::filesystem::path root;

  std::filesystem::path dataset() const { return root / "dataset"; }
  std::filesystem::path checkpoints() const { return root / "checkpoints"; }
  std::filesystem::path checkpoint(int step) const;
  std::filesystem::path loss_csv() const { return root / "loss.csv"; }
  std::filesystem::path metrics() const { return root / "metrics.json"; }
  std::filesystem::path kl_csv() const { return root / "kl.csv"; }
  std::filesystem::path curve_csv() const { return root / "success_curve.csv"; }
  std::filesystem::path trajectory_csv() const { return root / "trajectory.csv"; }
  std::filesystem::path config() const { return root / "config.json"; }
};

/// Output directory: `explicit_dir` if given, else $AUVHUNT_OUT_DIR, else
/// ./auvhunt_out.
std::filesystem::path output_dir(const std::string& explicit_dir);

dataset::Dataset generate_dataset(const RunConfig& cfg);
/// Loads a dataset directory, naming the missing file if it is absent.
dataset::Dataset require_dataset(const std::filesystem::path& dir, const std::string& stage);
amadp::Policy require_policy(const std::filesystem::path& checkpoint, const std::string& stage);

struct TrainOutput {
  std::vector<amadp::LossRecord> losses;
  std::vector<std::pair<int, std::filesystem::path>> checkpoints;  ///< ascending step
};

/// Trains and writes checkpoints (every train.checkpoint_every steps and at the
/// end) plus the loss CSV into `layout`.
TrainOutput train_stage(const RunConfig& cfg, const dataset::Dataset& data,
                        const RunLayout& layout);

/// Checkpoints found under layout.checkpoints(), ascending by step.
std::vector<std::pair<int, std::filesystem::path>> list_checkpoints(const RunLayout& layout);

/// `episodes` CTDE episodes of the policy; episode i uses the environment seed
/// derive_seed(seeds(cfg).eval, "episode", i).
std::vector<env::EpisodeTrace> evaluate_policy(const RunConfig& cfg, const amadp::Policy& policy,
                                               int episodes);

/// Scripted episodes on the same environment seeds as evaluate_policy.
std::vector<env::EpisodeTrace> evaluate_scripted(const RunConfig& cfg, behavior::Policy policy,
                                                 int episodes, std::uint64_t env_stage_seed);

/// Success rate of each checkpoint on eval.curve_episodes seeds.
std::vector<CurvePoint> success_curve(
    const RunConfig& cfg, const std::vector<std::pair<int, std::filesystem::path>>& checkpoints,
    const std::function<void(const CurvePoint&)>& progress = {});

}  // namespace auvhunt::harness
