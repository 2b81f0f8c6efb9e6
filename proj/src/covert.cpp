#include "auvhunt/covert.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <string>

namespace auvhunt::covert {

void CovertParams::validate() const {
  if (!(transmit_power_w > 0.0)) throw ValidationError("covert.transmit_power_w must be > 0");
  if (!(jam_power_w >= 0.0)) throw ValidationError("covert.jam_power_w must be >= 0");
  if (channel_uses < 1) throw ValidationError("covert.channel_uses must be >= 1");
  if (!(epsilon > 0.0 && epsilon < 0.5)) {
    throw ValidationError("covert.epsilon must lie in (0, 0.5)");
  }
}

bool DetectionSnapshot::consistent(double epsilon) const {
  return covert_ok == is_covert(kl, epsilon) && beta >= 0.0 && kl >= 0.0;
}

double snr_beta(double transmit_power_w, double path_loss_linear,
                double noise_total_w) {
  if (!(transmit_power_w >= 0.0)) throw ValidationError("snr_beta: negative transmit power");
  if (!(path_loss_linear > 0.0) || !(noise_total_w > 0.0)) {
    throw ValidationError("snr_beta: path loss and noise must be positive");
  }
  if (std::isinf(path_loss_linear)) return 0.0;
  return transmit_power_w / (path_loss_linear * noise_total_w);
}

double optimal_threshold(double noise_total_w, double beta) {
  if (!(noise_total_w > 0.0)) throw ValidationError("optimal_threshold: noise must be positive");
  if (!(beta > 0.0)) {
    throw ValidationError("optimal_threshold: beta must be positive, got " +
                          std::to_string(beta));
  }
  return noise_total_w * (1.0 + 1.0 / beta) * std::log1p(beta);
}

double kl_budget(double beta, int channel_uses) {
  if (!(beta >= 0.0)) throw ValidationError("kl_budget: beta must be non-negative");
  if (channel_uses < 1) throw ValidationError("kl_budget: channel_uses must be >= 1");
  // log1p(b) - b/(1+b) loses everything to cancellation for tiny b; switch to
  // the series b^2/2 - 2b^3/3 + 3b^4/4 there.
  double bracket;
  if (beta < 1e-4) {
    bracket = beta * beta * (0.5 - beta * (2.0 / 3.0 - 0.75 * beta));
  } else {
    bracket = std::log1p(beta) - beta / (1.0 + beta);
  }
  return 0.5 * channel_uses * bracket;
}

bool is_covert(double kl, double epsilon) { return kl <= 2.0 * epsilon * epsilon; }

DetectionSnapshot evaluate_link(double distance_m, const CovertParams& cp,
                                const acoustics::ChannelParams& channel,
                                double ambient_noise_w, double min_distance_m) {
  DetectionSnapshot snap;
  snap.distance_m = std::max(distance_m, min_distance_m);
  snap.noise_total_w = ambient_noise_w + cp.jam_power_w;
  const double loss = acoustics::path_loss_linear(snap.distance_m / 1000.0, channel);
  snap.beta = snr_beta(cp.transmit_power_w, loss, snap.noise_total_w);
  snap.threshold_w = snap.beta > 0.0 ? optimal_threshold(snap.noise_total_w, snap.beta)
                                     : snap.noise_total_w;
  snap.kl = kl_budget(snap.beta, cp.channel_uses);
  snap.covert_ok = is_covert(snap.kl, cp.epsilon);
  return snap;
}

double min_covert_distance(const CovertParams& cp,
                           const acoustics::ChannelParams& channel,
                           double ambient_noise_w, double max_distance_m,
                           double tolerance_m) {
  cp.validate();
  channel.validate();
  auto covert_at = [&](double d) {
    return evaluate_link(d, cp, channel, ambient_noise_w, 0.0).covert_ok;
  };
  constexpr double kFloor = 1e-3;
  if (covert_at(kFloor)) return 0.0;
  if (!covert_at(max_distance_m)) {
    throw NeverCovertError("link is never covert within " +
                           std::to_string(max_distance_m) + " m");
  }
  double lo = kFloor;
  double hi = max_distance_m;
  while (hi - lo > tolerance_m) {
    const double mid = 0.5 * (lo + hi);
    (covert_at(mid) ? hi : lo) = mid;
  }
  return hi;
}

double detection_statistic(Rng& rng, Hypothesis truth, int channel_uses,
                           double beta) {
  // Each real/imag component carries half the power.
  std::normal_distribution<double> component(0.0, std::sqrt(0.5));
  const double amplitude =
      truth == Hypothesis::kTransmitting ? std::sqrt(beta) : 0.0;
  double power = 0.0;
  for (int l = 0; l < channel_uses; ++l) {
    const double sr = component(rng);
    const double si = component(rng);
    const double nr = component(rng);
    const double ni = component(rng);
    const double yr = amplitude * sr + nr;
    const double yi = amplitude * si + ni;
    power += yr * yr + yi * yi;
  }
  return power / channel_uses;
}

Hypothesis simulate_detection(std::uint64_t seed, Hypothesis truth,
                              const CovertParams& cp, double beta) {
  cp.validate();
  Rng rng(seed);
  const double y = detection_statistic(rng, truth, cp.channel_uses, beta);
  return y > optimal_threshold(1.0, beta) ? Hypothesis::kTransmitting
                                          : Hypothesis::kSilent;
}

std::vector<ErrorRates> estimate_error_rates(std::uint64_t seed, int channel_uses,
                                             double beta,
                                             std::span<const double> thresholds,
                                             int trials) {
  if (trials < 1) throw ValidationError("estimate_error_rates: trials must be >= 1");
  Rng rng(seed);
  std::vector<double> silent(trials), transmitting(trials);
  for (int t = 0; t < trials; ++t) {
    silent[t] = detection_statistic(rng, Hypothesis::kSilent, channel_uses, beta);
    transmitting[t] =
        detection_statistic(rng, Hypothesis::kTransmitting, channel_uses, beta);
  }
  std::vector<ErrorRates> rates;
  rates.reserve(thresholds.size());
  for (double threshold : thresholds) {
    const auto fa = std::count_if(silent.begin(), silent.end(),
                                  [&](double y) { return y > threshold; });
    const auto md = std::count_if(transmitting.begin(), transmitting.end(),
                                  [&](double y) { return y <= threshold; });
    ErrorRates r;
    r.false_alarm = static_cast<double>(fa) / trials;
    r.missed_detection = static_cast<double>(md) / trials;
    r.standard_error = std::sqrt((r.false_alarm * (1.0 - r.false_alarm) +
                                  r.missed_detection * (1.0 - r.missed_detection)) /
                                 trials);
    rates.push_back(r);
  }
  return rates;
}

}  // namespace auvhunt::covert
