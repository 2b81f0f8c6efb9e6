#pragma once

#include <span>
#include <vector>

namespace auvhunt::amadp {

/// DDPM variance schedule. Arrays are indexed by k - 1 for k in [1, K].
struct DiffusionSchedule {
  std::vector<double> beta;
  std::vector<double> alpha;
  std::vector<double> alpha_bar;
  /// Posterior variance beta_k (1 - alpha_bar_{k-1}) / (1 - alpha_bar_k);
  /// zero at k = 1 where alpha_bar_0 = 1.
  std::vector<double> sigma;

  int steps() const { return static_cast<int>(beta.size()); }
  double beta_at(int k) const { return beta.at(k - 1); }
  double alpha_at(int k) const { return alpha.at(k - 1); }
  double alpha_bar_at(int k) const { return alpha_bar.at(k - 1); }
  double sigma_at(int k) const { return sigma.at(k - 1); }
};

/// Linear beta from `beta_start` to `beta_end` over K steps.
DiffusionSchedule make_schedule(int K, double beta_start = 1e-4, double beta_end = 0.02);

/// Schedule from explicit betas, each in (0, 1).
DiffusionSchedule schedule_from_betas(std::span<const double> betas);

/// sqrt(alpha_bar_k) x0 + sqrt(1 - alpha_bar_k) noise.
std::vector<float> q_sample(std::span<const float> x0, int k, std::span<const float> noise,
                            const DiffusionSchedule& schedule);

/// Reverse-process mean
/// (1 / sqrt(alpha_k)) (x_k - beta_k / sqrt(1 - alpha_bar_k) eps).
std::vector<float> posterior_mean(std::span<const float> xk, int k, std::span<const float> eps,
                                  const DiffusionSchedule& schedule);

/// Posterior mean written through the x0 estimate, with that estimate clamped
/// to [-clip, clip]. Equals posterior_mean when nothing is clamped or clip <= 0.
std::vector<float> reverse_mean(std::span<const float> xk, int k, std::span<const float> eps,
                                const DiffusionSchedule& schedule, double clip);

}  // namespace auvhunt::amadp
