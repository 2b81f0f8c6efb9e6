#include "auvhunt/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "auvhunt/binary_io.hpp"
#include "auvhunt/errors.hpp"
#include "json.hpp"

namespace auvhunt::dataset {

namespace {

using nlohmann::json;
using kinematics::Vec2;

constexpr const char* kSchema = "auvhunt.dataset";

env::EpisodeStatus status_from_string(const std::string& s) {
  for (auto st : {env::EpisodeStatus::kRunning, env::EpisodeStatus::kSuccess,
                  env::EpisodeStatus::kFailureTimeout,
                  env::EpisodeStatus::kFailureNeverDetected}) {
    if (env::to_string(st) == s) return st;
  }
  throw FormatError("manifest.json: unknown episode status '" + s + "'");
}

json mix_to_json(const BehaviorMix& mix) {
  return {{"pursuit", mix.pursuit},
          {"encircle", mix.encircle},
          {"noisy", mix.noisy},
          {"noise_min", mix.noise_min},
          {"noise_max", mix.noise_max},
          {"encircle_radius", mix.params.encircle_radius},
          {"obstacle_influence", mix.params.obstacle_influence},
          {"teammate_spacing", mix.params.teammate_spacing}};
}

BehaviorMix mix_from_json(const json& j) {
  BehaviorMix mix;
  mix.pursuit = j.at("pursuit").get<double>();
  mix.encircle = j.at("encircle").get<double>();
  mix.noisy = j.at("noisy").get<double>();
  mix.noise_min = j.at("noise_min").get<double>();
  mix.noise_max = j.at("noise_max").get<double>();
  mix.params.encircle_radius = j.at("encircle_radius").get<double>();
  mix.params.obstacle_influence = j.at("obstacle_influence").get<double>();
  mix.params.teammate_spacing = j.at("teammate_spacing").get<double>();
  return mix;
}

}  // namespace

AgentFeatures encode_state(const env::Observation& obs, const env::WorldConfig& cfg) {
  const double w = cfg.arena.width;
  const double h = cfg.arena.height;
  const Vec2 self = obs.own_pose.position();
  AgentFeatures f{};
  f[0] = static_cast<float>(self.x / w);
  f[1] = static_cast<float>(self.y / h);
  f[2] = static_cast<float>(obs.own_speed / cfg.hunter_limits.v_max);
  f[3] = static_cast<float>(std::sin(obs.own_pose.psi));
  f[4] = static_cast<float>(std::cos(obs.own_pose.psi));
  if (obs.target) {
    f[5] = static_cast<float>((obs.target->x - self.x) / w);
    f[6] = static_cast<float>((obs.target->y - self.y) / h);
    f[7] = 0.0f;
  } else {
    f[5] = 0.0f;
    f[6] = 0.0f;
    f[7] = 1.0f;
  }
  std::vector<std::size_t> order(obs.obstacle_positions.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return kinematics::distance(self, obs.obstacle_positions[a]) <
           kinematics::distance(self, obs.obstacle_positions[b]);
  });
  for (int k = 0; k < kObstacleSlots && k < static_cast<int>(order.size()); ++k) {
    const Vec2 o = obs.obstacle_positions[order[k]];
    f[8 + 2 * k] = static_cast<float>((o.x - self.x) / w);
    f[9 + 2 * k] = static_cast<float>((o.y - self.y) / h);
  }
  return f;
}

std::vector<float> encode_joint_state(const env::WorldState& world,
                                      const env::EnvConfig& cfg) {
  std::vector<float> joint;
  joint.reserve(world.hunters.size() * kStateDim);
  for (int i = 0; i < static_cast<int>(world.hunters.size()); ++i) {
    const auto f = encode_state(env::observe(world, i, cfg), cfg.world);
    joint.insert(joint.end(), f.begin(), f.end());
  }
  return joint;
}

std::span<const float> EpisodeRecord::joint_state(int t) const {
  const auto jd = static_cast<std::size_t>(joint_dim());
  return std::span(states).subspan(static_cast<std::size_t>(t) * jd, jd);
}

void EpisodeRecord::validate() const {
  const auto n = static_cast<std::size_t>(steps());
  if (m_hunters < 1 || state_dim < 1) throw FormatError("episode: bad dimensions");
  if (states.size() != n * m_hunters * state_dim ||
      actions.size() != n * m_hunters * kActionDim || kl.size() != n) {
    throw FormatError("episode: array lengths disagree with step count");
  }
}

void BehaviorMix::validate() const {
  if (pursuit < 0 || encircle < 0 || noisy < 0 || pursuit + encircle + noisy <= 0) {
    throw ValidationError("behavior mix weights must be non-negative with a positive sum");
  }
  if (!(noise_min >= 0 && noise_min <= noise_max && noise_max <= 1)) {
    throw ValidationError("behavior noise range must satisfy 0 <= min <= max <= 1");
  }
}

EpisodeRecord rollout(const env::EnvConfig& env_cfg, behavior::Policy policy,
                      const behavior::BehaviorParams& params,
                      std::uint64_t behavior_seed) {
  Rng rng(behavior_seed);
  EpisodeRecord rec;
  rec.m_hunters = env_cfg.episode.m_hunters;
  rec.policy = policy;
  env::WorldState world = env::reset(env_cfg);
  auto push_state = [&](const env::WorldState& w, double kl) {
    const auto joint = encode_joint_state(w, env_cfg);
    rec.states.insert(rec.states.end(), joint.begin(), joint.end());
    rec.kl.push_back(static_cast<float>(kl));
  };
  push_state(world, env::audit_link(world, env_cfg).kl);
  std::vector<env::HunterAction> actions(rec.m_hunters);
  while (!env::is_terminal(world.status)) {
    for (int i = 0; i < rec.m_hunters; ++i) {
      actions[i] = behavior::act(policy, env::observe(world, i, env_cfg), i, env_cfg,
                                 params, rng);
      rec.actions.push_back(static_cast<float>(actions[i].theta));
      rec.actions.push_back(static_cast<float>(
          std::clamp(actions[i].v, 0.0, env_cfg.world.hunter_limits.v_max)));
    }
    auto result = env::step(world, actions, env_cfg);
    rec.rewards.push_back(static_cast<float>(result.rewards.front().total));
    world = std::move(result.world);
    push_state(world, result.snapshot.kl);
  }
  rec.actions.insert(rec.actions.end(), static_cast<std::size_t>(rec.m_hunters) * kActionDim, 0.0f);
  rec.rewards.push_back(0.0f);
  rec.status = world.status;
  return rec;
}

Dataset generate(const env::EnvConfig& env_cfg, const BehaviorMix& mix,
                 const GenerateOptions& options) {
  if (options.n_episodes < 1) throw ValidationError("generate: n_episodes must be >= 1");
  if (options.horizon < 1) throw ValidationError("generate: horizon must be >= 1");
  env_cfg.validate();
  mix.validate();

  Dataset data;
  const double total = mix.pursuit + mix.encircle + mix.noisy;
  int successes = 0;
  for (int e = 0; e < options.n_episodes; ++e) {
    Rng pick(derive_seed(options.root_seed, "policy", e));
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    const double u = unit(pick) * total;
    behavior::Policy policy = behavior::Policy::kNoisyPursuit;
    if (u < mix.pursuit) {
      policy = behavior::Policy::kPursuit;
    } else if (u < mix.pursuit + mix.encircle) {
      policy = behavior::Policy::kEncircle;
    }
    behavior::BehaviorParams params = mix.params;
    params.noise_prob = mix.noise_min + unit(pick) * (mix.noise_max - mix.noise_min);

    env::EnvConfig cfg = env_cfg;
    cfg.episode.seed = derive_seed(options.root_seed, "episode", e);
    data.episodes.push_back(
        rollout(cfg, policy, params, derive_seed(options.root_seed, "behavior", e)));
    if (data.episodes.back().status == env::EpisodeStatus::kSuccess) ++successes;
  }

  auto& m = data.manifest;
  m.episode_count = options.n_episodes;
  m.m_hunters = env_cfg.episode.m_hunters;
  m.horizon = options.horizon;
  m.discount = options.discount;
  m.return_scale = options.return_scale;
  m.root_seed = options.root_seed;
  m.behavior = mix;
  m.success_fraction = static_cast<double>(successes) / options.n_episodes;
  compute_normalization(data);
  return data;
}

std::vector<double> returns_to_go(std::span<const float> rewards, double discount) {
  std::vector<double> g(rewards.size(), 0.0);
  double running = 0.0;
  for (std::size_t i = rewards.size(); i-- > 0;) {
    running = rewards[i] + discount * running;
    g[i] = running;
  }
  return g;
}

void compute_normalization(Dataset& data) {
  if (data.episodes.empty()) throw ValidationError("compute_normalization: empty dataset");
  const int jd = data.episodes.front().joint_dim();
  std::vector<double> sum(jd, 0.0), sq(jd, 0.0);
  std::size_t count = 0;
  for (const auto& ep : data.episodes) {
    for (int t = 0; t < ep.steps(); ++t) {
      const auto s = ep.joint_state(t);
      for (int d = 0; d < jd; ++d) {
        sum[d] += s[d];
        sq[d] += static_cast<double>(s[d]) * s[d];
      }
      ++count;
    }
  }
  auto& m = data.manifest;
  m.state_mean.assign(jd, 0.0);
  m.state_std.assign(jd, 1.0);
  for (int d = 0; d < jd; ++d) {
    const double mean = sum[d] / count;
    const double var = std::max(sq[d] / count - mean * mean, 0.0);
    m.state_mean[d] = mean;
    m.state_std[d] = var > 1e-12 ? std::sqrt(var) : 1.0;
  }
}

std::vector<float> interleave(std::span<const std::vector<float>> per_agent, int state_dim) {
  if (per_agent.empty()) return {};
  const std::size_t steps = per_agent.front().size() / state_dim;
  std::vector<float> joint;
  joint.reserve(steps * per_agent.size() * state_dim);
  for (std::size_t t = 0; t < steps; ++t) {
    for (const auto& agent : per_agent) {
      if (agent.size() != steps * state_dim) {
        throw ValidationError("interleave: agents have different lengths");
      }
      joint.insert(joint.end(), agent.begin() + t * state_dim,
                   agent.begin() + (t + 1) * state_dim);
    }
  }
  return joint;
}

std::vector<std::vector<float>> deinterleave(std::span<const float> joint, int m_hunters,
                                             int state_dim) {
  const std::size_t row = static_cast<std::size_t>(m_hunters) * state_dim;
  if (joint.size() % row != 0) throw ValidationError("deinterleave: ragged input");
  std::vector<std::vector<float>> per_agent(m_hunters);
  for (std::size_t t = 0; t < joint.size() / row; ++t) {
    for (int i = 0; i < m_hunters; ++i) {
      const auto begin = joint.begin() + t * row + static_cast<std::size_t>(i) * state_dim;
      per_agent[i].insert(per_agent[i].end(), begin, begin + state_dim);
    }
  }
  return per_agent;
}

std::vector<float> normalize(const Manifest& m, std::span<const float> joint) {
  const std::size_t jd = m.state_mean.size();
  std::vector<float> out(joint.size());
  for (std::size_t i = 0; i < joint.size(); ++i) {
    const std::size_t d = i % jd;
    out[i] = static_cast<float>((joint[i] - m.state_mean[d]) / m.state_std[d]);
  }
  return out;
}

std::vector<float> denormalize(const Manifest& m, std::span<const float> joint) {
  const std::size_t jd = m.state_mean.size();
  std::vector<float> out(joint.size());
  for (std::size_t i = 0; i < joint.size(); ++i) {
    const std::size_t d = i % jd;
    out[i] = static_cast<float>(joint[i] * m.state_std[d] + m.state_mean[d]);
  }
  return out;
}

Batch window_batch(const Dataset& data, int batch_size, int horizon, Rng& rng) {
  if (data.episodes.empty()) throw ValidationError("window_batch: empty dataset");
  if (batch_size < 1 || horizon < 1) {
    throw ValidationError("window_batch: batch size and horizon must be >= 1");
  }
  std::vector<std::size_t> offsets{0};
  for (const auto& ep : data.episodes) {
    if (ep.steps() < 2) throw ValidationError("window_batch: episode shorter than 2 steps");
    offsets.push_back(offsets.back() + ep.steps());
  }
  const auto& m = data.manifest;
  const int jd = data.episodes.front().joint_dim();
  const int agents = data.episodes.front().m_hunters;

  Batch b;
  b.batch = batch_size;
  b.horizon = horizon;
  b.joint_dim = jd;
  b.m_hunters = agents;
  b.windows.reserve(static_cast<std::size_t>(batch_size) * horizon * jd);
  b.mask.reserve(static_cast<std::size_t>(batch_size) * horizon);
  std::uniform_int_distribution<std::size_t> pick(0, offsets.back() - 1);

  for (int n = 0; n < batch_size; ++n) {
    const std::size_t flat = pick(rng);
    const auto it = std::upper_bound(offsets.begin(), offsets.end(), flat);
    const std::size_t e = static_cast<std::size_t>(it - offsets.begin()) - 1;
    const int start = static_cast<int>(flat - offsets[e]);
    const auto& ep = data.episodes[e];
    const int last = ep.steps() - 1;

    for (int h = 0; h < horizon; ++h) {
      const int t = std::min(start + h, last);
      const auto s = ep.joint_state(t);
      b.raw_windows.insert(b.raw_windows.end(), s.begin(), s.end());
      b.mask.push_back(start + h <= last ? 1.0f : 0.0f);
      const bool has_action = start + h < last;
      b.action_mask.push_back(has_action ? 1.0f : 0.0f);
      for (int a = 0; a < agents * kActionDim; ++a) {
        b.actions.push_back(has_action
                                ? ep.actions[static_cast<std::size_t>(t) * agents * kActionDim + a]
                                : 0.0f);
      }
    }
    const auto returns = returns_to_go(ep.rewards, m.discount);
    Conditioning c;
    c.current_state = normalize(m, ep.joint_state(start));
    c.return_to_go = static_cast<float>(returns[start] / m.return_scale);
    c.timestep = static_cast<float>(start);
    b.conditioning.push_back(std::move(c));
  }
  b.windows = normalize(m, b.raw_windows);
  return b;
}

double return_quantile(const Dataset& data, double q) {
  std::vector<double> all;
  for (const auto& ep : data.episodes) {
    const auto g = returns_to_go(ep.rewards, data.manifest.discount);
    for (double x : g) all.push_back(x / data.manifest.return_scale);
  }
  if (all.empty()) throw ValidationError("return_quantile: empty dataset");
  const auto k = static_cast<std::size_t>(std::clamp(q, 0.0, 1.0) * (all.size() - 1));
  std::nth_element(all.begin(), all.begin() + k, all.end());
  return all[k];
}

std::vector<std::uint8_t> encode_episodes(std::span<const EpisodeRecord> episodes) {
  io::Writer out;
  for (const auto& ep : episodes) {
    ep.validate();
    io::Writer block;
    block.u32(kEpisodeMagic);
    block.u32(static_cast<std::uint32_t>(ep.steps()));
    block.u32(static_cast<std::uint32_t>(ep.m_hunters));
    block.u32(static_cast<std::uint32_t>(ep.state_dim));
    block.floats(ep.states);
    block.floats(ep.actions);
    block.floats(ep.rewards);
    block.floats(ep.kl);
    out.append(block.bytes());
    out.u32(io::crc32(block.bytes()));
  }
  return out.take();
}

std::vector<EpisodeRecord> decode_episodes(std::span<const std::uint8_t> bytes) {
  io::Reader in(bytes, "episodes.bin");
  std::vector<EpisodeRecord> episodes;
  while (!in.done()) {
    const std::size_t begin = in.position();
    const std::string block = "episode " + std::to_string(episodes.size());
    if (in.remaining() < 16) throw TruncatedError("episodes.bin: truncated header in " + block);
    const auto magic = in.u32();
    if (magic != kEpisodeMagic) {
      throw FormatError("episodes.bin: bad magic in " + block);
    }
    EpisodeRecord ep;
    const auto steps = in.u32();
    ep.m_hunters = static_cast<int>(in.u32());
    ep.state_dim = static_cast<int>(in.u32());
    if (steps == 0 || ep.m_hunters == 0 || ep.state_dim == 0 || ep.m_hunters > 1024 ||
        ep.state_dim > 4096) {
      throw FormatError("episodes.bin: implausible header in " + block);
    }
    const std::size_t joint = static_cast<std::size_t>(ep.m_hunters) * ep.state_dim;
    const std::size_t payload =
        (steps * joint + steps * ep.m_hunters * kActionDim + 2 * steps) * sizeof(float);
    if (in.remaining() < payload + 4) {
      throw TruncatedError("episodes.bin: truncated payload in " + block);
    }
    ep.states.resize(steps * joint);
    ep.actions.resize(steps * ep.m_hunters * kActionDim);
    ep.rewards.resize(steps);
    ep.kl.resize(steps);
    in.floats(ep.states);
    in.floats(ep.actions);
    in.floats(ep.rewards);
    in.floats(ep.kl);
    const std::uint32_t expected = io::crc32(bytes.subspan(begin, in.position() - begin));
    if (in.u32() != expected) {
      throw ChecksumError(block, "episodes.bin: CRC-32 mismatch in " + block);
    }
    episodes.push_back(std::move(ep));
  }
  return episodes;
}

void save(const Dataset& data, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  const auto bytes = encode_episodes(data.episodes);
  const auto& m = data.manifest;
  json episodes = json::array();
  for (const auto& ep : data.episodes) {
    episodes.push_back({{"steps", ep.steps()},
                        {"status", std::string(env::to_string(ep.status))},
                        {"policy", std::string(behavior::to_string(ep.policy))}});
  }
  json j = {{"schema", kSchema},
            {"version", m.version},
            {"episode_count", data.episodes.size()},
            {"m_hunters", m.m_hunters},
            {"state_dim", m.state_dim},
            {"action_dim", m.action_dim},
            {"horizon", m.horizon},
            {"discount", m.discount},
            {"return_scale", m.return_scale},
            {"state_mean", m.state_mean},
            {"state_std", m.state_std},
            {"root_seed", m.root_seed},
            {"behavior", mix_to_json(m.behavior)},
            {"success_fraction", m.success_fraction},
            {"episodes_crc32", io::crc32(bytes)},
            {"episodes_bytes", bytes.size()},
            {"episodes", episodes}};
  io::write_text(dir / "manifest.json", j.dump(2) + "\n");
  io::write_file(dir / "episodes.bin", bytes);
}

Dataset load(const std::filesystem::path& dir) {
  json j;
  try {
    j = json::parse(io::read_text(dir / "manifest.json"));
  } catch (const json::exception& e) {
    throw FormatError(std::string("manifest.json: ") + e.what());
  }
  Dataset data;
  auto& m = data.manifest;
  try {
    if (j.at("schema").get<std::string>() != kSchema) {
      throw FormatError("manifest.json: unexpected schema");
    }
    m.version = j.at("version").get<int>();
    if (m.version != kFormatVersion) {
      throw VersionError("manifest.json: unsupported dataset version " +
                         std::to_string(m.version));
    }
    m.episode_count = j.at("episode_count").get<int>();
    m.m_hunters = j.at("m_hunters").get<int>();
    m.state_dim = j.at("state_dim").get<int>();
    m.action_dim = j.at("action_dim").get<int>();
    m.horizon = j.at("horizon").get<int>();
    m.discount = j.at("discount").get<double>();
    m.return_scale = j.at("return_scale").get<double>();
    m.state_mean = j.at("state_mean").get<std::vector<double>>();
    m.state_std = j.at("state_std").get<std::vector<double>>();
    m.root_seed = j.at("root_seed").get<std::uint64_t>();
    m.behavior = mix_from_json(j.at("behavior"));
    m.success_fraction = j.at("success_fraction").get<double>();
    m.episodes_crc32 = j.at("episodes_crc32").get<std::uint32_t>();
    m.episodes_bytes = j.at("episodes_bytes").get<std::uint64_t>();
  } catch (const json::exception& e) {
    throw FormatError(std::string("manifest.json: ") + e.what());
  }

  const auto bytes = io::read_file(dir / "episodes.bin");
  if (bytes.size() < m.episodes_bytes) {
    throw TruncatedError("episodes.bin: file has " + std::to_string(bytes.size()) +
                         " bytes, manifest expects " + std::to_string(m.episodes_bytes));
  }
  data.episodes = decode_episodes(bytes);
  if (bytes.size() != m.episodes_bytes || io::crc32(bytes) != m.episodes_crc32) {
    throw ChecksumError("episodes.bin",
                        "episodes.bin: checksum does not match manifest.json");
  }
  const auto& summary = j.at("episodes");
  if (static_cast<int>(data.episodes.size()) != m.episode_count ||
      summary.size() != data.episodes.size()) {
    throw FormatError("manifest.json: episode count disagrees with episodes.bin");
  }
  for (std::size_t e = 0; e < data.episodes.size(); ++e) {
    auto& ep = data.episodes[e];
    if (ep.m_hunters != m.m_hunters || ep.state_dim != m.state_dim) {
      throw FormatError("episodes.bin: episode " + std::to_string(e) +
                        " dimensions disagree with manifest.json");
    }
    ep.status = status_from_string(summary[e].at("status").get<std::string>());
    ep.policy = behavior::policy_from_string(summary[e].at("policy").get<std::string>());
  }
  return data;
}

}  // namespace auvhunt::dataset
