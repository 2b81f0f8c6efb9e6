#include "auvhunt/amadp/schedule.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "auvhunt/errors.hpp"

namespace auvhunt::amadp {

DiffusionSchedule make_schedule(int K, double beta_start, double beta_end) {
  if (K < 1) throw ValidationError("diffusion.K must be >= 1");
  if (!(beta_start > 0.0 && beta_end < 1.0 && beta_start <= beta_end)) {
    throw ValidationError("diffusion betas must satisfy 0 < beta_start <= beta_end < 1");
  }
  std::vector<double> betas(K);
  for (int k = 0; k < K; ++k) {
    const double frac = K == 1 ? 0.0 : static_cast<double>(k) / (K - 1);
    betas[k] = beta_start + frac * (beta_end - beta_start);
  }
  return schedule_from_betas(betas);
}

DiffusionSchedule schedule_from_betas(std::span<const double> betas) {
  if (betas.empty()) throw ValidationError("diffusion schedule needs at least one step");
  DiffusionSchedule s;
  double prod = 1.0;
  for (std::size_t i = 0; i < betas.size(); ++i) {
    const double b = betas[i];
    if (!(b > 0.0 && b < 1.0)) {
      throw ValidationError("diffusion beta " + std::to_string(i + 1) + " must lie in (0, 1)");
    }
    const double prev = prod;
    prod *= 1.0 - b;
    s.beta.push_back(b);
    s.alpha.push_back(1.0 - b);
    s.alpha_bar.push_back(prod);
    s.sigma.push_back(i == 0 ? 0.0 : b * (1.0 - prev) / (1.0 - prod));
  }
  return s;
}

std::vector<float> q_sample(std::span<const float> x0, int k, std::span<const float> noise,
                            const DiffusionSchedule& schedule) {
  if (k < 1 || k > schedule.steps()) {
    throw ValidationError("q_sample: k=" + std::to_string(k) + " outside [1, " +
                          std::to_string(schedule.steps()) + "]");
  }
  if (noise.size() != x0.size()) throw ValidationError("q_sample: noise size mismatch");
  const double ab = schedule.alpha_bar_at(k);
  const double a = std::sqrt(ab);
  const double b = std::sqrt(1.0 - ab);
  std::vector<float> out(x0.size());
  for (std::size_t i = 0; i < x0.size(); ++i) {
    out[i] = static_cast<float>(a * x0[i] + b * noise[i]);
  }
  return out;
}

std::vector<float> posterior_mean(std::span<const float> xk, int k, std::span<const float> eps,
                                  const DiffusionSchedule& schedule) {
  if (k < 1 || k > schedule.steps()) throw ValidationError("posterior_mean: k out of range");
  if (eps.size() != xk.size()) throw ValidationError("posterior_mean: size mismatch");
  const double inv_sqrt_alpha = 1.0 / std::sqrt(schedule.alpha_at(k));
  const double coef = schedule.beta_at(k) / std::sqrt(1.0 - schedule.alpha_bar_at(k));
  std::vector<float> out(xk.size());
  for (std::size_t i = 0; i < xk.size(); ++i) {
    out[i] = static_cast<float>(inv_sqrt_alpha * (xk[i] - coef * eps[i]));
  }
  return out;
}

std::vector<float> reverse_mean(std::span<const float> xk, int k, std::span<const float> eps,
                                const DiffusionSchedule& schedule, double clip) {
  if (clip <= 0.0) return posterior_mean(xk, k, eps, schedule);
  if (k < 1 || k > schedule.steps()) throw ValidationError("reverse_mean: k out of range");
  if (eps.size() != xk.size()) throw ValidationError("reverse_mean: size mismatch");
  const double ab = schedule.alpha_bar_at(k);
  const double ab_prev = k == 1 ? 1.0 : schedule.alpha_bar_at(k - 1);
  const double c0 = std::sqrt(ab_prev) * schedule.beta_at(k) / (1.0 - ab);
  const double ck = std::sqrt(schedule.alpha_at(k)) * (1.0 - ab_prev) / (1.0 - ab);
  const double sa = std::sqrt(ab);
  const double sb = std::sqrt(1.0 - ab);
  std::vector<float> out(xk.size());
  for (std::size_t i = 0; i < xk.size(); ++i) {
    const double x0 = std::clamp((xk[i] - sb * eps[i]) / sa, -clip, clip);
    out[i] = static_cast<float>(c0 * x0 + ck * xk[i]);
  }
  return out;
}

}  // namespace auvhunt::amadp
