#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "auvhunt/amadp/training.hpp"
#include "auvhunt/harness/metrics.hpp"

namespace auvhunt::harness {

inline constexpr int kCsvVersion = 1;

/// "# auvhunt <kind> v1" and "# config_hash <hash>" comment lines followed by
/// the column header.
std::string csv_preamble(std::string_view kind, std::string_view hash, std::string_view columns);

/// Shortest text that parses back to the same double.
std::string format_number(double v);

/// Writes `text` to `path`, creating parent directories. Throws Error on I/O failure.
void write_text(const std::filesystem::path& path, std::string_view text);
std::string read_text(const std::filesystem::path& path);

std::string loss_csv(std::span<const amadp::LossRecord> losses, std::string_view hash);
std::string kl_csv(const MetricsReport& report, std::string_view hash);

struct CurvePoint {
  int step = 0;
  int episodes = 0;
  int successes = 0;
  double success_rate = 0.0;
};
std::string curve_csv(std::span<const CurvePoint> curve, std::string_view hash);

std::string covert_csv(std::span<const covert::DetectionSnapshot> rows, double kl_bound,
                       std::string_view hash);

/// Long format, one row per entity per time index: t = 0 is the reset state;
/// hunter rows at t >= 1 carry the command that produced them, and every row
/// at t carries the shared reward and KL of that step.
std::string trajectory_csv(std::span<const env::EpisodeTrace> traces, std::string_view hash);

struct TrajectoryEpisode {
  int episode = 0;
  std::uint64_t seed = 0;
  std::vector<std::vector<env::HunterAction>> actions;  ///< per step, per hunter
  std::vector<double> rewards;                          ///< per step
};

/// Reads trajectory_csv output back. Throws FormatError on malformed input.
std::vector<TrajectoryEpisode> parse_trajectory_csv(std::string_view text);

/// Re-runs the recorded commands from reset and returns the step rewards.
std::vector<double> replay_rewards(const env::EnvConfig& env_cfg, const TrajectoryEpisode& episode);

/// Least-squares slope of y against x.
double trend_slope(std::span<const double> x, std::span<const double> y);

}  // namespace auvhunt::harness
