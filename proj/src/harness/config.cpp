#include "auvhunt/harness/config.hpp"

#include <cmath>
#include <fstream>
#include <functional>
#include <limits>
#include <map>
#include <optional>
#include <sstream>

#include "auvhunt/errors.hpp"

namespace auvhunt::harness {

using json = nlohmann::ordered_json;

namespace {

struct Bounds {
  std::optional<double> lo;
  std::optional<double> hi;
  bool lo_open = false;
};

const Bounds kAny{};
const Bounds kPositive{0.0, std::nullopt, true};
const Bounds kNonNegative{0.0, std::nullopt, false};
const Bounds kUnit{0.0, 1.0, false};

struct Field {
  std::string path;
  std::string type;
  std::string doc;
  std::function<json()> get;
  std::function<void(const nlohmann::json&)> set;
};

[[noreturn]] void fail(const std::string& path, const std::string& what) {
  throw ValidationError("config." + path + ": " + what);
}

void check_bounds(const std::string& path, double v, const Bounds& b) {
  if (!std::isfinite(v)) fail(path, "must be finite");
  if (b.lo && (b.lo_open ? !(v > *b.lo) : !(v >= *b.lo))) {
    std::ostringstream os;
    os << "must be " << (b.lo_open ? "> " : ">= ") << *b.lo << ", got " << v;
    fail(path, os.str());
  }
  if (b.hi && !(v <= *b.hi)) {
    std::ostringstream os;
    os << "must be <= " << *b.hi << ", got " << v;
    fail(path, os.str());
  }
}

double read_number(const std::string& path, const nlohmann::json& j) {
  if (!j.is_number()) fail(path, std::string("expected a number, got ") + j.type_name());
  return j.get<double>();
}

class Registry {
 public:
  void number(std::string path, double& ref, std::string doc, Bounds b = kAny) {
    add(std::move(path), "number", std::move(doc), [&ref] { return json(ref); },
        [&ref, b](const std::string& p, const nlohmann::json& j) {
          const double v = read_number(p, j);
          check_bounds(p, v, b);
          ref = v;
        });
  }

  void integer(std::string path, int& ref, std::string doc, int lo,
               int hi = std::numeric_limits<int>::max()) {
    add(std::move(path), "integer", std::move(doc), [&ref] { return json(ref); },
        [&ref, lo, hi](const std::string& p, const nlohmann::json& j) {
          if (!j.is_number_integer()) fail(p, std::string("expected an integer, got ") + j.type_name());
          const auto v = j.get<long long>();
          if (v < lo || v > hi) {
            fail(p, "must lie in [" + std::to_string(lo) + ", " + std::to_string(hi) + "], got " +
                        std::to_string(v));
          }
          ref = static_cast<int>(v);
        });
  }

  void unsigned64(std::string path, std::uint64_t& ref, std::string doc) {
    add(std::move(path), "integer", std::move(doc), [&ref] { return json(ref); },
        [&ref](const std::string& p, const nlohmann::json& j) {
          if (j.is_number_unsigned()) {
            ref = j.get<std::uint64_t>();
          } else if (j.is_number_integer() && j.get<long long>() >= 0) {
            ref = static_cast<std::uint64_t>(j.get<long long>());
          } else {
            fail(p, "expected a non-negative integer");
          }
        });
  }

  void vec2(std::string path, kinematics::Vec2& ref, std::string doc) {
    add(std::move(path), "[x, y]", std::move(doc), [&ref] { return json::array({ref.x, ref.y}); },
        [&ref](const std::string& p, const nlohmann::json& j) {
          if (!j.is_array() || j.size() != 2) fail(p, "expected an array [x, y]");
          const double x = read_number(p + "[0]", j[0]);
          const double y = read_number(p + "[1]", j[1]);
          check_bounds(p, x, kAny);
          check_bounds(p, y, kAny);
          ref = {x, y};
        });
  }

  template <std::size_t N>
  void array(std::string path, std::array<double, N>& ref, std::string doc) {
    add(std::move(path), "array[" + std::to_string(N) + "]", std::move(doc),
        [&ref] { return json(ref); },
        [&ref](const std::string& p, const nlohmann::json& j) {
          if (!j.is_array() || j.size() != N) {
            fail(p, "expected an array of " + std::to_string(N) + " numbers");
          }
          for (std::size_t i = 0; i < N; ++i) {
            const auto where = p + "[" + std::to_string(i) + "]";
            ref[i] = read_number(where, j[i]);
            check_bounds(where, ref[i], kAny);
          }
        });
  }

  void optional_number(std::string path, std::optional<double>& ref, std::string doc) {
    add(std::move(path), "number|null", std::move(doc),
        [&ref] { return ref ? json(*ref) : json(nullptr); },
        [&ref](const std::string& p, const nlohmann::json& j) {
          if (j.is_null()) {
            ref.reset();
            return;
          }
          const double v = read_number(p, j);
          check_bounds(p, v, kAny);
          ref = v;
        });
  }

  void dynamics(std::string path, env::DynamicsMode& ref, std::string doc) {
    add(std::move(path), "string", std::move(doc),
        [&ref] { return json(ref == env::DynamicsMode::kKinematic ? "kinematic" : "full"); },
        [&ref](const std::string& p, const nlohmann::json& j) {
          if (!j.is_string()) fail(p, "expected \"kinematic\" or \"full\"");
          const auto s = j.get<std::string>();
          if (s == "kinematic") {
            ref = env::DynamicsMode::kKinematic;
          } else if (s == "full") {
            ref = env::DynamicsMode::kFull;
          } else {
            fail(p, "expected \"kinematic\" or \"full\", got \"" + s + "\"");
          }
        });
  }

  std::vector<Field>& fields() { return fields_; }

 private:
  void add(std::string path, std::string type, std::string doc, std::function<json()> get,
           std::function<void(const std::string&, const nlohmann::json&)> set) {
    const std::string p = path;
    fields_.push_back({std::move(path), std::move(type), std::move(doc), std::move(get),
                       [p, set = std::move(set)](const nlohmann::json& j) { set(p, j); }});
  }

  std::vector<Field> fields_;
};

std::vector<Field> fields(RunConfig& c) {
  Registry r;
  auto& w = c.env.world;
  auto& e = c.env.episode;
  r.unsigned64("seed", c.seed, "root seed; every component seed is derived from it");

  r.number("arena.width", w.arena.width, "arena width (m)", kPositive);
  r.number("arena.height", w.arena.height, "arena height (m)", kPositive);
  r.number("arena.depth_z", w.arena.depth_z, "operating depth (m), informational");
  r.number("arena.r_min", w.arena.r_min, "minimum inter-agent separation (m)", kPositive);

  r.vec2("world.start", w.start, "hunter start point O (m)");
  r.number("world.dt", w.dt, "control step (s)", kPositive);
  r.integer("world.obstacle_count", w.obstacle_count, "obstacles per episode", 0);
  r.number("world.obstacle_radius_min", w.obstacle_radius_min, "smallest obstacle radius (m)",
           kPositive);
  r.number("world.obstacle_radius_max", w.obstacle_radius_max, "largest obstacle radius (m)",
           kPositive);
  r.vec2("world.current", w.current, "additive earth-frame current (m/s)");
  r.dynamics("world.dynamics", w.dynamics, "\"kinematic\" or \"full\" (3-DOF)");
  r.number("world.tracking_gain", w.tracking_gain, "full-dynamics command tracking gain",
           kPositive);
  r.number("world.reference_scale", w.reference_scale,
           "watts per linear unit of the dB re uPa^2/Hz noise level", kPositive);
  r.number("world.min_link_distance_m", w.min_link_distance_m,
           "floor on the hunter-target distance in the link budget (m)", kPositive);

  r.number("hunter.v_max", w.hunter_limits.v_max, "V1 (m/s)", kPositive);
  r.number("hunter.a_max", w.hunter_limits.a_max, "hunter acceleration (m/s^2)", kPositive);
  r.number("hunter.yaw_rate_max", w.hunter_limits.yaw_rate_max, "hunter turn rate (rad/s)",
           kPositive);
  r.number("target.v_max", w.target_limits.v_max, "V2 (m/s)", kPositive);
  r.number("target.a_max", w.target_limits.a_max, "target acceleration (m/s^2)", kPositive);
  r.number("target.yaw_rate_max", w.target_limits.yaw_rate_max, "target turn rate (rad/s)",
           kPositive);

  r.number("evader.hunter_gain", w.evader.hunter_gain, "repulsion from hunters", kNonNegative);
  r.number("evader.obstacle_gain", w.evader.obstacle_gain, "repulsion from obstacles",
           kNonNegative);
  r.number("evader.wall_gain", w.evader.wall_gain, "repulsion from walls", kNonNegative);
  r.number("evader.heading_noise", w.evader.heading_noise, "heading noise std (rad)",
           kNonNegative);

  r.array("hydro.mass", w.hydro.mass, "3x3 row-major inertia matrix M");
  r.array("hydro.coriolis", w.hydro.coriolis, "3x3 row-major Coriolis matrix C");
  r.array("hydro.damping", w.hydro.damping, "3x3 row-major damping matrix D");
  r.array("hydro.restoring", w.hydro.restoring, "restoring force g");

  r.number("channel.frequency_khz", w.channel.frequency_khz, "carrier f (kHz)", kPositive);
  r.number("channel.spreading", w.channel.spreading, "spreading factor m in [1, 2]",
           {1.0, 2.0, false});
  r.number("channel.shipping", w.channel.shipping, "shipping activity s in [0, 1]", kUnit);
  r.number("channel.wind_mps", w.channel.wind_mps, "wind speed w (m/s)", kNonNegative);
  r.number("channel.bandwidth_hz", w.channel.bandwidth_hz, "receiver bandwidth (Hz)", kPositive);

  r.number("covert.transmit_power_w", w.covert.transmit_power_w, "P_S (W)", kPositive);
  r.number("covert.jam_power_w", w.covert.jam_power_w, "N_j (W)", kNonNegative);
  r.integer("covert.channel_uses", w.covert.channel_uses, "L per detection block", 1);
  r.number("covert.epsilon", w.covert.epsilon, "covertness epsilon; KL bound is 2 eps^2",
           {0.0, 1.0, true});

  r.integer("episode.m_hunters", e.m_hunters, "M", 2);
  r.number("episode.r1", e.r1, "sensing radius R1 (m)", kPositive);
  r.number("episode.r2", e.r2, "attacking radius R2 (m)", kPositive);
  r.number("episode.d_g_star", e.d_g_star, "desired centroid distance d_g* (m)", kPositive);
  r.integer("episode.h_max_steps", e.h_max_steps, "episode step limit", 1);
  r.number("reward.lambda", e.weights.lambda, "distance-variance weight", kPositive);
  r.number("reward.zeta", e.weights.zeta, "centroid bonus weight", kPositive);
  r.number("reward.nu", e.weights.nu, "collision and covertness weight", kPositive);

  auto& b = c.behavior;
  r.number("behavior.pursuit", b.pursuit, "mix weight of pure pursuit", kNonNegative);
  r.number("behavior.encircle", b.encircle, "mix weight of slot encirclement", kNonNegative);
  r.number("behavior.noisy", b.noisy, "mix weight of noisy pursuit", kNonNegative);
  r.number("behavior.noise_min", b.noise_min, "lowest noisy-pursuit noise level", kUnit);
  r.number("behavior.noise_max", b.noise_max, "highest noisy-pursuit noise level", kUnit);
  r.number("behavior.encircle_radius", b.params.encircle_radius, "slot radius (m)", kPositive);
  r.number("behavior.obstacle_influence", b.params.obstacle_influence,
           "clearance where obstacle avoidance starts (m)", kPositive);
  r.number("behavior.teammate_spacing", b.params.teammate_spacing,
           "teammate avoidance radius in units of r_min", kNonNegative);

  r.integer("dataset.episodes", c.dataset.n_episodes, "scripted episodes", 1);
  r.number("dataset.discount", c.dataset.discount, "gamma for returns-to-go", {0.0, 1.0, true});
  r.number("dataset.return_scale", c.dataset.return_scale,
           "returns are divided by this before conditioning", kPositive);

  auto& n = c.train.network;
  r.integer("network.horizon", n.horizon, "planning window H (multiple of 8)", 8);
  r.integer("network.hidden", n.hidden, "trunk width", 1);
  r.integer("network.embed", n.embed, "conditioning embedding width", 1);
  r.integer("network.attention_dim", n.attention_dim, "per-agent attention width d_k", 1);
  r.integer("network.inverse_hidden", n.inverse_hidden, "inverse-dynamics hidden width", 1);
  r.number("network.timestep_scale", n.timestep_scale, "episode timestep divisor", kPositive);

  auto& s = c.train.schedule;
  auto& g = c.train.guidance;
  r.integer("diffusion.K", s.K, "diffusion steps", 1);
  r.number("diffusion.beta_start", s.beta_start, "first beta of the linear schedule",
           {0.0, 1.0, true});
  r.number("diffusion.beta_end", s.beta_end, "last beta of the linear schedule",
           {0.0, 1.0, true});
  r.number("diffusion.dropout_prob", g.dropout_prob, "null-conditioning probability", kUnit);
  r.number("diffusion.guidance_weight", g.guidance_weight, "classifier-free guidance w",
           kNonNegative);
  r.number("diffusion.denoise_clip", g.denoise_clip,
           "bound on the sampler's x0 estimate (normalized units); 0 disables", kNonNegative);
  r.number("diffusion.sample_noise_scale", g.sample_noise_scale,
           "multiplier on reverse-step noise", kNonNegative);
  r.number("diffusion.next_state_weight", g.next_state_weight,
           "loss weight on the first predicted state", {0.0, 1e6, true});

  auto& t = c.train;
  r.integer("train.steps", t.steps, "optimizer steps", 0);
  r.integer("train.batch", t.batch, "windows per step", 1);
  r.number("train.lr", t.lr, "Adam learning rate", kPositive);
  r.integer("train.checkpoint_every", t.checkpoint_every, "0 disables periodic checkpoints", 0);
  r.integer("train.log_every", t.log_every, "loss-curve row interval", 1);
  r.number("train.target_return_quantile", t.target_return_quantile,
           "dataset return quantile used as the execution target", kUnit);

  r.optional_number("execution.target_return", c.execution.target_return,
                    "normalized conditioning return; null uses the trained quantile");
  r.integer("execution.open_loop_depth", c.execution.open_loop_depth,
            "planned actions applied before replanning", 1);

  r.integer("eval.episodes", c.eval.episodes, "evaluation episodes", 1);
  r.integer("eval.threads", c.eval.threads, "worker threads for episodes", 1, 256);
  r.integer("eval.curve_every", c.eval.curve_every, "training steps between curve points", 1);
  r.integer("eval.curve_episodes", c.eval.curve_episodes, "episodes per curve point", 1);
  r.integer("eval.trajectory_episodes", c.eval.trajectory_episodes,
            "episodes exported to the trajectory CSV", 0);
  return std::move(r.fields());
}

void set_path(json& root, const std::string& path, json value) {
  json* node = &root;
  std::size_t start = 0;
  for (std::size_t dot = path.find('.'); dot != std::string::npos;
       start = dot + 1, dot = path.find('.', start)) {
    node = &(*node)[path.substr(start, dot - start)];
  }
  (*node)[path.substr(start)] = std::move(value);
}

}  // namespace

void EvalConfig::validate() const {
  if (episodes < 1) throw ValidationError("eval.episodes must be >= 1");
  if (threads < 1) throw ValidationError("eval.threads must be >= 1");
  if (curve_every < 1 || curve_episodes < 1) {
    throw ValidationError("eval.curve_every and eval.curve_episodes must be >= 1");
  }
  if (trajectory_episodes < 0) throw ValidationError("eval.trajectory_episodes must be >= 0");
}

void RunConfig::validate() const {
  env.validate();
  behavior.validate();
  const auto t = training_config(*this);
  t.validate();
  t.schedule.make();
  execution.validate(t.network.horizon);
  eval.validate();
  if (dataset.n_episodes < 0) throw ValidationError("config.dataset.episodes must be >= 0");
  if (!(dataset.discount > 0.0 && dataset.discount < 1.0)) {
    throw ValidationError("config.dataset.discount must lie in (0, 1)");
  }
}

Seeds seeds(const RunConfig& cfg) {
  return {derive_seed(cfg.seed, "dataset"), derive_seed(cfg.seed, "train"),
          derive_seed(cfg.seed, "sampler"), derive_seed(cfg.seed, "eval"),
          derive_seed(cfg.seed, "simulate")};
}

env::EnvConfig episode_env(const RunConfig& cfg, std::uint64_t stage_seed, int index) {
  auto e = cfg.env;
  e.episode.seed = derive_seed(stage_seed, "episode", static_cast<std::uint64_t>(index));
  return e;
}

amadp::TrainConfig training_config(const RunConfig& cfg) {
  auto t = cfg.train;
  t.seed = seeds(cfg).train;
  t.network.m_hunters = cfg.env.episode.m_hunters;
  t.network.v_max = cfg.env.world.hunter_limits.v_max;
  return t;
}

dataset::GenerateOptions dataset_options(const RunConfig& cfg) {
  auto d = cfg.dataset;
  d.root_seed = seeds(cfg).dataset;
  d.horizon = cfg.train.network.horizon;
  return d;
}

std::vector<FieldInfo> schema() {
  RunConfig defaults;
  std::vector<FieldInfo> out;
  for (const auto& f : fields(defaults)) out.push_back({f.path, f.type, f.doc, f.get()});
  return out;
}

json to_json(const RunConfig& cfg) {
  RunConfig copy = cfg;
  json root = json::object();
  for (const auto& f : fields(copy)) set_path(root, f.path, f.get());
  return root;
}

RunConfig from_json(const nlohmann::json& j) {
  if (!j.is_object()) throw ValidationError("config: top level must be a JSON object");
  RunConfig cfg;
  auto fs = fields(cfg);
  std::map<std::string, const Field*> by_path;
  for (const auto& f : fs) by_path[f.path] = &f;
  auto is_section = [&](const std::string& prefix) {
    auto it = by_path.lower_bound(prefix + ".");
    return it != by_path.end() && it->first.rfind(prefix + ".", 0) == 0;
  };
  std::function<void(const nlohmann::json&, const std::string&)> walk =
      [&](const nlohmann::json& node, const std::string& prefix) {
        for (auto it = node.begin(); it != node.end(); ++it) {
          const std::string path = prefix.empty() ? it.key() : prefix + "." + it.key();
          if (auto f = by_path.find(path); f != by_path.end()) {
            f->second->set(it.value());
          } else if (is_section(path)) {
            if (!it.value().is_object()) fail(path, "expected an object");
            walk(it.value(), path);
          } else {
            fail(path, "unknown key");
          }
        }
      };
  walk(j, "");
  try {
    cfg.validate();
  } catch (const ValidationError& e) {
    const std::string msg = e.what();
    if (msg.rfind("config", 0) == 0) throw;
    throw ValidationError("config: " + msg);
  }
  return cfg;
}

RunConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("config: cannot open " + path.string());
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw ValidationError("config: " + path.string() + " is not valid JSON: " + e.what());
  }
  return from_json(j);
}

std::string dump(const RunConfig& cfg) { return to_json(cfg).dump(2); }

std::string config_hash(const RunConfig& cfg) {
  std::ostringstream os;
  os << std::hex;
  os.width(16);
  os.fill('0');
  os << fnv1a64(to_json(cfg).dump());
  return os.str();
}

}  // namespace auvhunt::harness
