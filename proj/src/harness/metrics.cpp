#include "auvhunt/harness/metrics.hpp"

#include <atomic>
#include <cmath>
#include <exception>
#include <mutex>
#include <thread>

#include "auvhunt/errors.hpp"

namespace auvhunt::harness {

env::EpisodeTrace run_scripted(const env::EnvConfig& env_cfg, behavior::Policy policy,
                               const behavior::BehaviorParams& params,
                               std::uint64_t behavior_seed) {
  Rng rng(behavior_seed);
  env::EpisodeTrace trace;
  trace.seed = env_cfg.episode.seed;
  trace.policy = std::string(behavior::to_string(policy));
  trace.initial = env::reset(env_cfg);
  env::WorldState world = trace.initial;
  const int m = env_cfg.episode.m_hunters;
  while (!env::is_terminal(world.status)) {
    std::vector<env::HunterAction> actions(m);
    for (int i = 0; i < m; ++i) {
      actions[i] = behavior::act(policy, env::observe(world, i, env_cfg), i, env_cfg, params, rng);
    }
    auto result = env::step(world, actions, env_cfg);
    world = result.world;
    trace.steps.push_back(
        env::make_trace_step(world.step_index - 1, std::move(actions), std::move(result)));
  }
  trace.status = world.status;
  return trace;
}

std::vector<env::EpisodeTrace> run_episodes(int n, int threads,
                                            const std::function<env::EpisodeTrace(int)>& episode) {
  if (n < 0) throw ValidationError("run_episodes: negative episode count");
  std::vector<env::EpisodeTrace> out(n);
  const int workers = std::max(1, std::min(threads, n));
  if (workers == 1) {
    for (int i = 0; i < n; ++i) out[i] = episode(i);
    return out;
  }
  std::atomic<int> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  std::vector<std::thread> pool;
  for (int w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      for (int i = next++; i < n; i = next++) {
        try {
          out[i] = episode(i);
        } catch (...) {
          std::lock_guard lock(failure_mutex);
          if (!failure) failure = std::current_exception();
          next = n;
        }
      }
    });
  }
  for (auto& t : pool) t.join();
  if (failure) std::rethrow_exception(failure);
  return out;
}

MetricsReport summarize(std::span<const env::EpisodeTrace> traces, const env::EnvConfig& env_cfg,
                        std::string policy) {
  MetricsReport r;
  r.policy = std::move(policy);
  r.episodes = static_cast<int>(traces.size());
  r.kl_bound = env_cfg.world.covert.kl_bound();
  std::size_t longest = 0;
  for (const auto& t : traces) longest = std::max(longest, t.steps.size());
  std::vector<double> kl_sum(longest, 0.0);
  r.kl_count.assign(longest, 0);
  long total_steps = 0;
  long violations = 0;
  for (std::size_t e = 0; e < traces.size(); ++e) {
    const auto& t = traces[e];
    EpisodeSummary s;
    s.index = static_cast<int>(e);
    s.seed = t.seed;
    s.status = t.status;
    s.length = t.length();
    for (std::size_t k = 0; k < t.steps.size(); ++k) {
      const auto& st = t.steps[k];
      kl_sum[k] += st.snapshot.kl;
      ++r.kl_count[k];
      if (!covert::is_covert(st.snapshot.kl, env_cfg.world.covert.epsilon)) ++s.covert_violations;
      if (std::find(st.collisions.begin(), st.collisions.end(), true) != st.collisions.end()) {
        ++s.collisions;
      }
      s.total_reward += st.reward.total;
    }
    if (t.status == env::EpisodeStatus::kSuccess) ++r.successes;
    r.collision_count += s.collisions;
    total_steps += s.length;
    violations += s.covert_violations;
    r.per_episode.push_back(s);
  }
  r.kl_mean.resize(longest);
  for (std::size_t k = 0; k < longest; ++k) r.kl_mean[k] = kl_sum[k] / r.kl_count[k];
  if (r.episodes > 0) {
    r.success_rate = static_cast<double>(r.successes) / r.episodes;
    r.mean_length = static_cast<double>(total_steps) / r.episodes;
  }
  r.violation_fraction = total_steps > 0 ? static_cast<double>(violations) / total_steps : 0.0;
  return r;
}

nlohmann::ordered_json to_json(const MetricsReport& r) {
  nlohmann::ordered_json j;
  j["policy"] = r.policy;
  j["config_hash"] = r.config_hash;
  j["episodes"] = r.episodes;
  j["successes"] = r.successes;
  j["success_rate"] = r.success_rate;
  j["mean_length"] = r.mean_length;
  j["kl_bound"] = r.kl_bound;
  j["violation_fraction"] = r.violation_fraction;
  j["collision_count"] = r.collision_count;
  j["loss_curve"] = r.loss_curve;
  j["kl_mean"] = r.kl_mean;
  auto& eps = j["per_episode"] = nlohmann::ordered_json::array();
  for (const auto& s : r.per_episode) {
    eps.push_back({{"index", s.index},
                   {"seed", s.seed},
                   {"status", env::to_string(s.status)},
                   {"length", s.length},
                   {"collisions", s.collisions},
                   {"covert_violations", s.covert_violations},
                   {"total_reward", s.total_reward}});
  }
  return j;
}

int rescore_successes(std::span<const env::EpisodeTrace> traces, double attack_radius) {
  int count = 0;
  for (const auto& t : traces) {
    const auto& w = t.steps.empty() ? t.initial : t.steps.back().world;
    bool all_close = !w.hunters.empty();
    for (const auto& h : w.hunters) {
      const double dx = h.pose.x - w.target.pose.x;
      const double dy = h.pose.y - w.target.pose.y;
      if (!(dx * dx + dy * dy < attack_radius * attack_radius)) all_close = false;
    }
    if (all_close) ++count;
  }
  return count;
}

}  // namespace auvhunt::harness
