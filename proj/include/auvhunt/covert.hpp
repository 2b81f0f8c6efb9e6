#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "auvhunt/acoustics.hpp"
#include "auvhunt/errors.hpp"
#include "auvhunt/rng.hpp"

namespace auvhunt::covert {

struct CovertParams {
  double transmit_power_w = 0.1;   ///< P_S
  double jam_power_w = 0.2;        ///< N_j
  int channel_uses = 100;          ///< L
  double epsilon = 0.04;

  void validate() const;
  /// 2 * epsilon^2
  double kl_bound() const { return 2.0 * epsilon * epsilon; }
};

struct DetectionSnapshot {
  double distance_m = 0.0;
  double beta = 0.0;
  double noise_total_w = 0.0;
  double threshold_w = 0.0;
  double kl = 0.0;
  bool covert_ok = true;

  /// Recomputes covert_ok from kl and epsilon.
  bool consistent(double epsilon) const;
};

enum class Hypothesis { kSilent, kTransmitting };

/// Raised when no distance inside the search range satisfies the KL bound.
class NeverCovertError : public Error {
 public:
  using Error::Error;
};

double snr_beta(double transmit_power_w, double path_loss_linear,
                double noise_total_w);

/// alpha* = N_T (1 + 1/beta) ln(1 + beta)
double optimal_threshold(double noise_total_w, double beta);

/// (L/2) [ln(1 + beta) - beta / (1 + beta)]
double kl_budget(double beta, int channel_uses);

/// kl <= 2 eps^2 (the boundary counts as covert).
bool is_covert(double kl, double epsilon);

/// Full link evaluation at one hunter-target distance. Distances below
/// `min_distance_m` are floored there.
DetectionSnapshot evaluate_link(double distance_m, const CovertParams& cp,
                                const acoustics::ChannelParams& channel,
                                double ambient_noise_w,
                                double min_distance_m = 1.0);

/// Smallest distance d* (meters) such that every d >= d* is covert, found by
/// bisection to `tolerance_m`. Returns 0 when even a 1 mm link is covert;
/// throws NeverCovertError when `max_distance_m` is not covert.
double min_covert_distance(const CovertParams& cp,
                           const acoustics::ChannelParams& channel,
                           double ambient_noise_w, double max_distance_m,
                           double tolerance_m = 1e-3);

/// Normalized mean received power Y / N_T over L complex-Gaussian channel
/// uses. Under the transmitting hypothesis the per-use signal power is
/// beta * N_T with unit-power complex Gaussian symbols.
double detection_statistic(Rng& rng, Hypothesis truth, int channel_uses,
                           double beta);

/// Target-side LRT decision for one block, thresholded at alpha*.
Hypothesis simulate_detection(std::uint64_t seed, Hypothesis truth,
                              const CovertParams& cp, double beta);

struct ErrorRates {
  double false_alarm = 0.0;
  double missed_detection = 0.0;
  double total() const { return false_alarm + missed_detection; }
  /// One-sigma Monte-Carlo standard error of total().
  double standard_error = 0.0;
};

/// Monte-Carlo false-alarm / missed-detection rates for several normalized
/// thresholds (alpha / N_T) using common random numbers.
std::vector<ErrorRates> estimate_error_rates(std::uint64_t seed, int channel_uses,
                                             double beta,
                                             std::span<const double> thresholds,
                                             int trials);

}  // namespace auvhunt::covert
