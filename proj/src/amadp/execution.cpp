#include "auvhunt/amadp/execution.hpp"

#include "auvhunt/errors.hpp"

namespace auvhunt::amadp {

void ExecutionConfig::validate(int horizon) const {
  if (open_loop_depth < 1 || open_loop_depth >= horizon) {
    throw ValidationError("execution.open_loop_depth must lie in [1, horizon - 1]");
  }
  if (target_return && !std::isfinite(*target_return)) {
    throw ValidationError("execution.target_return must be finite");
  }
}

std::vector<std::vector<env::HunterAction>> plan_actions(const Policy& policy,
                                                         const env::WorldState& world,
                                                         const env::EnvConfig& env_cfg,
                                                         double target_return, int depth,
                                                         Rng& rng) {
  const auto& net = policy.model.config;
  if (static_cast<int>(world.hunters.size()) != net.m_hunters) {
    throw ValidationError("policy was trained for M=" + std::to_string(net.m_hunters) +
                          " hunters, environment has " + std::to_string(world.hunters.size()));
  }
  const auto raw = dataset::encode_joint_state(world, env_cfg);
  dataset::Conditioning cond;
  cond.current_state = dataset::normalize(policy.normalization, raw);
  cond.return_to_go = static_cast<float>(target_return);
  cond.timestep = static_cast<float>(world.step_index);

  const auto tau = p_sample_loop(epsilon_fn(policy.model.predictor), policy.model.params, cond,
                                 net.horizon, policy.schedule, policy.guidance, rng);
  const auto J = static_cast<std::size_t>(net.joint_dim());
  std::vector<std::vector<env::HunterAction>> plan;
  for (int h = 0; h < depth; ++h) {
    const std::span<const float> all(tau);
    plan.push_back(policy.model.actions(all.subspan(h * J, J), all.subspan((h + 1) * J, J)));
  }
  return plan;
}

env::EpisodeTrace execute_episode(const env::EnvConfig& env_cfg, const Policy& policy,
                                  const ExecutionConfig& cfg) {
  cfg.validate(policy.model.config.horizon);
  env::EpisodeTrace trace;
  trace.seed = env_cfg.episode.seed;
  trace.policy = "amadp";
  trace.initial = env::reset(env_cfg);
  const double target = cfg.target_return.value_or(policy.target_return);

  env::WorldState world = trace.initial;
  std::vector<std::vector<env::HunterAction>> plan;
  std::size_t cursor = 0;
  while (!env::is_terminal(world.status)) {
    if (cursor >= plan.size()) {
      Rng rng(derive_seed(cfg.seed ^ env_cfg.episode.seed, "sample", world.step_index));
      plan = plan_actions(policy, world, env_cfg, target, cfg.open_loop_depth, rng);
      cursor = 0;
    }
    auto actions = plan[cursor++];
    auto result = env::step(world, actions, env_cfg);
    world = result.world;
    trace.steps.push_back(env::make_trace_step(world.step_index - 1, std::move(actions),
                                               std::move(result)));
  }
  trace.status = world.status;
  return trace;
}

}  // namespace auvhunt::amadp
