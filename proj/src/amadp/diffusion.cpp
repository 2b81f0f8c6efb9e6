#include "auvhunt/amadp/diffusion.hpp"

#include <cmath>
#include <random>

#include "auvhunt/errors.hpp"

namespace auvhunt::amadp {

void GuidanceConfig::validate() const {
  if (!(dropout_prob >= 0.0 && dropout_prob <= 1.0)) {
    throw ValidationError("guidance.dropout_prob must lie in [0, 1]");
  }
  if (!(guidance_weight >= 0.0)) throw ValidationError("guidance.guidance_weight must be >= 0");
  if (!(denoise_clip >= 0.0)) throw ValidationError("guidance.denoise_clip must be >= 0");
  if (!(sample_noise_scale >= 0.0)) {
    throw ValidationError("guidance.sample_noise_scale must be >= 0");
  }
  if (!(next_state_weight > 0.0)) throw ValidationError("guidance.next_state_weight must be > 0");
}

EpsilonFn epsilon_fn(const NoisePredictor& predictor) {
  return [&predictor](const Binding& bind, Var x, const ConditioningBatch& cond) {
    return predictor.forward(bind, x, cond);
  };
}

std::vector<float> clean_windows(const dataset::Batch& batch) {
  const auto J = static_cast<std::size_t>(batch.joint_dim);
  const auto H = static_cast<std::size_t>(batch.horizon);
  std::vector<float> out = batch.windows;
  for (std::size_t b = 0; b < static_cast<std::size_t>(batch.batch); ++b) {
    std::size_t last = 0;
    for (std::size_t h = 0; h < H; ++h) {
      if (batch.mask[b * H + h] > 0.0f) {
        last = h;
      } else {
        std::copy_n(out.begin() + (b * H + last) * J, J, out.begin() + (b * H + h) * J);
      }
    }
  }
  return out;
}

Var ddpm_loss(const EpsilonFn& eps, const Binding& bind, const dataset::Batch& batch,
              const DiffusionSchedule& schedule, const GuidanceConfig& guidance, Rng& rng) {
  Tape& tape = bind.tape();
  const auto B = static_cast<std::size_t>(batch.batch);
  const auto H = static_cast<std::size_t>(batch.horizon);
  const auto J = static_cast<std::size_t>(batch.joint_dim);
  const std::vector<float> x0 = clean_windows(batch);

  std::uniform_int_distribution<int> pick_k(1, schedule.steps());
  std::normal_distribution<float> gauss(0.0f, 1.0f);
  std::bernoulli_distribution drop(guidance.dropout_prob);

  std::vector<int> ks(B);
  std::vector<float> null_mask(B);
  Tensor noise({B * H, J});
  Tensor xk({B * H, J});
  Tensor mask({B * H, J});
  for (std::size_t b = 0; b < B; ++b) {
    ks[b] = pick_k(rng);
    null_mask[b] = drop(rng) ? 1.0f : 0.0f;
    const double a = std::sqrt(schedule.alpha_bar_at(ks[b]));
    const double s = std::sqrt(1.0 - schedule.alpha_bar_at(ks[b]));
    for (std::size_t h = 0; h < H; ++h) {
      const bool scored = h > 0 && batch.mask[b * H + h] > 0.0f;
      const float weight = h == 1 ? static_cast<float>(guidance.next_state_weight) : 1.0f;
      for (std::size_t j = 0; j < J; ++j) {
        const std::size_t i = (b * H + h) * J + j;
        noise[i] = gauss(rng);
        xk[i] = h == 0 ? x0[i] : static_cast<float>(a * x0[i] + s * noise[i]);
        mask[i] = scored ? weight : 0.0f;
      }
    }
  }
  const auto cond = make_conditioning(batch.conditioning, ks, null_mask);
  const Var pred = eps(bind, tape.constant(std::move(xk)), cond);
  return nn::masked_mse(pred, tape.constant(std::move(noise)), mask);
}

Var inverse_dynamics_loss(const PolicyModel& model, const Binding& bind,
                          const dataset::Batch& batch) {
  Tape& tape = bind.tape();
  const auto B = static_cast<std::size_t>(batch.batch);
  const auto H = static_cast<std::size_t>(batch.horizon);
  const auto J = static_cast<std::size_t>(batch.joint_dim);
  const auto S = static_cast<std::size_t>(model.config.state_dim);
  const auto M = static_cast<std::size_t>(model.config.m_hunters);

  std::vector<std::size_t> rows;
  for (std::size_t b = 0; b < B; ++b) {
    for (std::size_t h = 0; h + 1 < H; ++h) {
      if (batch.action_mask[b * H + h] > 0.0f) rows.push_back(b * H + h);
    }
  }
  if (rows.empty()) return tape.constant(Tensor({1, 1}));
  const std::size_t N = rows.size();
  std::vector<Var> losses;
  for (std::size_t i = 0; i < M; ++i) {
    Tensor s_t({N, S});
    Tensor s_next({N, S});
    Tensor target({N, static_cast<std::size_t>(kActionCode)});
    for (std::size_t n = 0; n < N; ++n) {
      const std::size_t r = rows[n];
      std::copy_n(batch.windows.begin() + r * J + i * S, S, s_t.storage().begin() + n * S);
      std::copy_n(batch.windows.begin() + (r + 1) * J + i * S, S, s_next.storage().begin() + n * S);
      const float theta = batch.actions[(r * M + i) * 2];
      const float v = batch.actions[(r * M + i) * 2 + 1];
      const auto code = encode_action(theta, v, model.config.v_max);
      std::copy(code.begin(), code.end(), target.storage().begin() + n * kActionCode);
    }
    const Var pred = model.inverse[i].forward(bind, tape.constant(std::move(s_t)),
                                              tape.constant(std::move(s_next)));
    losses.push_back(nn::mean(nn::mul(nn::sub(pred, tape.constant(target)),
                                      nn::sub(pred, tape.constant(target)))));
  }
  Var total = losses.front();
  for (std::size_t i = 1; i < losses.size(); ++i) total = nn::add(total, losses[i]);
  return nn::scale(total, 1.0f / static_cast<float>(M));
}

std::vector<float> guided_epsilon(std::span<const float> eps_cond, std::span<const float> eps_null,
                                  double w) {
  if (eps_cond.size() != eps_null.size()) throw ValidationError("guided_epsilon: size mismatch");
  if (w == 1.0) return {eps_cond.begin(), eps_cond.end()};
  std::vector<float> out(eps_cond.size());
  for (std::size_t i = 0; i < out.size(); ++i) {
    out[i] = static_cast<float>(eps_null[i] + w * (eps_cond[i] - eps_null[i]));
  }
  return out;
}

std::vector<float> p_sample_loop(const EpsilonFn& eps, const ParameterSet& params,
                                 const dataset::Conditioning& cond, int horizon,
                                 const DiffusionSchedule& schedule, const GuidanceConfig& guidance,
                                 Rng& rng) {
  guidance.validate();
  const auto J = cond.current_state.size();
  const auto H = static_cast<std::size_t>(horizon);
  std::normal_distribution<float> gauss(0.0f, 1.0f);
  std::vector<float> x(H * J);
  for (auto& v : x) v = gauss(rng);
  std::copy(cond.current_state.begin(), cond.current_state.end(), x.begin());

  const bool unguided = guidance.guidance_weight == 1.0;
  Tape tape(false);
  const Binding bind(tape, params);
  const std::size_t mark = tape.size();
  for (int k = schedule.steps(); k >= 1; --k) {
    // Conditional and null passes share one batch of two windows.
    const int B = unguided ? 1 : 2;
    ConditioningBatch cb;
    cb.batch = B;
    for (int b = 0; b < B; ++b) {
      cb.state.insert(cb.state.end(), cond.current_state.begin(), cond.current_state.end());
      cb.rtg.push_back(cond.return_to_go);
      cb.timestep.push_back(cond.timestep);
      cb.null_mask.push_back(b == 0 ? 0.0f : 1.0f);
      cb.diffusion_k.push_back(k);
    }
    Tensor input({B * H, J});
    for (int b = 0; b < B; ++b) std::copy(x.begin(), x.end(), input.storage().begin() + b * H * J);
    const Var out = eps(bind, tape.constant(std::move(input)), cb);
    const auto all = out.value().data();
    const auto eps_cond = all.subspan(0, H * J);
    std::vector<float> eps_hat =
        unguided ? std::vector<float>(eps_cond.begin(), eps_cond.end())
                 : guided_epsilon(eps_cond, all.subspan(H * J, H * J), guidance.guidance_weight);
    tape.rewind(mark);

    x = reverse_mean(x, k, eps_hat, schedule, guidance.denoise_clip);
    if (k > 1) {
      const double sd = guidance.sample_noise_scale * std::sqrt(schedule.sigma_at(k));
      for (auto& v : x) v = static_cast<float>(v + sd * gauss(rng));
    }
    std::copy(cond.current_state.begin(), cond.current_state.end(), x.begin());
  }
  return x;
}

}  // namespace auvhunt::amadp
