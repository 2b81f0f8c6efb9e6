#include "auvhunt/amadp/training.hpp"

#include <sstream>

#include <json.hpp>

#include "auvhunt/errors.hpp"

namespace auvhunt::amadp {

using json = nlohmann::ordered_json;

namespace {

constexpr const char* kCheckpointKind = "auvhunt.amadp";

json network_json(const NetworkConfig& n) {
  return {{"m_hunters", n.m_hunters},       {"state_dim", n.state_dim},
          {"horizon", n.horizon},           {"hidden", n.hidden},
          {"embed", n.embed},               {"attention_dim", n.attention_dim},
          {"inverse_hidden", n.inverse_hidden}, {"v_max", n.v_max},
          {"timestep_scale", n.timestep_scale}};
}

NetworkConfig network_from_json(const json& j) {
  NetworkConfig n;
  n.m_hunters = j.at("m_hunters").get<int>();
  n.state_dim = j.at("state_dim").get<int>();
  n.horizon = j.at("horizon").get<int>();
  n.hidden = j.at("hidden").get<int>();
  n.embed = j.at("embed").get<int>();
  n.attention_dim = j.at("attention_dim").get<int>();
  n.inverse_hidden = j.at("inverse_hidden").get<int>();
  n.v_max = j.at("v_max").get<double>();
  n.timestep_scale = j.at("timestep_scale").get<double>();
  return n;
}

std::string rng_state(const Rng& rng) {
  std::ostringstream os;
  os << rng;
  return os.str();
}

Rng rng_from_state(const std::string& text) {
  Rng rng;
  std::istringstream is(text);
  is >> rng;
  if (!is) throw FormatError("checkpoint: unreadable RNG state");
  return rng;
}

json parse_metadata(const nn::Checkpoint& ckpt) {
  json meta;
  try {
    meta = json::parse(ckpt.metadata);
  } catch (const json::exception& e) {
    throw FormatError(std::string("checkpoint metadata: ") + e.what());
  }
  if (meta.value("kind", "") != kCheckpointKind) {
    throw FormatError("checkpoint metadata: not a policy checkpoint");
  }
  return meta;
}

void copy_parameters(const nn::ParameterSet& from, nn::ParameterSet& to) {
  if (from.size() != to.size()) {
    throw FormatError("checkpoint: expected " + std::to_string(to.size()) + " parameters, found " +
                      std::to_string(from.size()));
  }
  for (std::size_t i = 0; i < to.size(); ++i) {
    if (from[i].name != to[i].name) {
      throw FormatError("checkpoint: parameter " + std::to_string(i) + " is '" + from[i].name +
                        "', expected '" + to[i].name + "'");
    }
    if (from[i].value.shape() != to[i].value.shape()) {
      throw nn::ShapeError("checkpoint parameter '" + to[i].name + "'", from[i].value.shape(),
                           to[i].value.shape());
    }
    to[i].value = from[i].value;
  }
}

}  // namespace

void TrainConfig::validate() const {
  if (steps < 0) throw ValidationError("train.steps must be >= 0");
  if (batch < 1) throw ValidationError("train.batch must be >= 1");
  if (!(lr > 0.0)) throw ValidationError("train.lr must be positive");
  if (checkpoint_every < 0) throw ValidationError("train.checkpoint_every must be >= 0");
  if (log_every < 1) throw ValidationError("train.log_every must be >= 1");
  if (!(target_return_quantile >= 0.0 && target_return_quantile <= 1.0)) {
    throw ValidationError("train.target_return_quantile must lie in [0, 1]");
  }
  network.validate();
  guidance.validate();
  schedule.make();
}

Trainer::Trainer(const dataset::Dataset& data, const TrainConfig& cfg)
    : data_(&data), cfg_(cfg), rng_(derive_seed(cfg.seed, "train")) {
  cfg_.validate();
  check_compatible();
  model_ = PolicyModel::create(cfg_.network, cfg_.seed);
  schedule_ = cfg_.schedule.make();
  nn::AdamConfig acfg;
  acfg.lr = cfg_.lr;
  adam_ = nn::Adam(acfg, model_.params);
  target_return_ = dataset::return_quantile(data, cfg_.target_return_quantile);
}

Trainer::Trainer(const dataset::Dataset& data, const TrainConfig& cfg, const nn::Checkpoint& ckpt)
    : Trainer(data, cfg) {
  const json meta = parse_metadata(ckpt);
  if (meta.at("network") != network_json(cfg_.network)) {
    throw ValidationError("resume: checkpoint network configuration differs from train config");
  }
  copy_parameters(ckpt.params, model_.params);
  if (!ckpt.optimizer) throw FormatError("resume: checkpoint has no optimizer state");
  adam_.restore(ckpt.optimizer->step, ckpt.optimizer->first, ckpt.optimizer->second);
  rng_ = rng_from_state(meta.at("rng").get<std::string>());
  step_ = meta.at("step").get<int>();
}

void Trainer::check_compatible() const {
  const auto& m = data_->manifest;
  if (data_->episodes.empty()) throw ValidationError("train: dataset has no episodes");
  if (m.m_hunters != cfg_.network.m_hunters || m.state_dim != cfg_.network.state_dim) {
    throw ValidationError("train: dataset has M=" + std::to_string(m.m_hunters) + ", state_dim=" +
                          std::to_string(m.state_dim) + " but config expects M=" +
                          std::to_string(cfg_.network.m_hunters) + ", state_dim=" +
                          std::to_string(cfg_.network.state_dim));
  }
  if (static_cast<int>(m.state_mean.size()) != m.m_hunters * m.state_dim) {
    throw ValidationError("train: dataset normalization statistics are missing");
  }
}

LossRecord Trainer::step() {
  Tape tape;
  const Binding bind(tape, model_.params);
  const auto batch = dataset::window_batch(*data_, cfg_.batch, cfg_.network.horizon, rng_);
  const Var diffusion =
      ddpm_loss(epsilon_fn(model_.predictor), bind, batch, schedule_, cfg_.guidance, rng_);
  const Var inverse = inverse_dynamics_loss(model_, bind, batch);
  const Var total = nn::add(diffusion, inverse);
  tape.backward(total);
  adam_.step(model_.params, bind.gradients());
  ++step_;
  return {step_, total.value()[0], diffusion.value()[0], inverse.value()[0]};
}

nn::Checkpoint Trainer::checkpoint() const {
  const auto& m = data_->manifest;
  json meta = {{"kind", kCheckpointKind},
               {"step", step_},
               {"rng", rng_state(rng_)},
               {"network", network_json(cfg_.network)},
               {"schedule",
                {{"K", cfg_.schedule.K},
                 {"beta_start", cfg_.schedule.beta_start},
                 {"beta_end", cfg_.schedule.beta_end}}},
               {"guidance",
                {{"dropout_prob", cfg_.guidance.dropout_prob},
                 {"guidance_weight", cfg_.guidance.guidance_weight},
                 {"denoise_clip", cfg_.guidance.denoise_clip},
                 {"sample_noise_scale", cfg_.guidance.sample_noise_scale},
                 {"next_state_weight", cfg_.guidance.next_state_weight}}},
               {"normalization",
                {{"state_mean", m.state_mean},
                 {"state_std", m.state_std},
                 {"discount", m.discount},
                 {"return_scale", m.return_scale}}},
               {"target_return", target_return_}};
  nn::Checkpoint ckpt;
  ckpt.metadata = meta.dump();
  ckpt.params = model_.params;
  ckpt.optimizer =
      nn::OptimizerSnapshot{adam_.step_count(), adam_.first_moments(), adam_.second_moments()};
  return ckpt;
}

Policy Trainer::policy() const { return policy_from_checkpoint(checkpoint()); }

std::vector<LossRecord> train(const dataset::Dataset& data, const TrainConfig& cfg,
                              const std::function<void(int, const nn::Checkpoint&)>& on_checkpoint) {
  Trainer trainer(data, cfg);
  std::vector<LossRecord> curve;
  for (int s = 0; s < cfg.steps; ++s) {
    const auto rec = trainer.step();
    if (rec.step % cfg.log_every == 0 || rec.step == 1) curve.push_back(rec);
    const bool periodic = cfg.checkpoint_every > 0 && rec.step % cfg.checkpoint_every == 0;
    if (on_checkpoint && (periodic || rec.step == cfg.steps)) {
      on_checkpoint(rec.step, trainer.checkpoint());
    }
  }
  return curve;
}

Policy policy_from_checkpoint(const nn::Checkpoint& ckpt) {
  const json meta = parse_metadata(ckpt);
  Policy p;
  try {
    const auto network = network_from_json(meta.at("network"));
    p.model = PolicyModel::create(network, 0);
    const auto& s = meta.at("schedule");
    p.schedule_config = {s.at("K").get<int>(), s.at("beta_start").get<double>(),
                         s.at("beta_end").get<double>()};
    const auto& g = meta.at("guidance");
    p.guidance = {g.at("dropout_prob").get<double>(), g.at("guidance_weight").get<double>(),
                  g.at("denoise_clip").get<double>(), g.at("sample_noise_scale").get<double>(),
                  g.at("next_state_weight").get<double>()};
    const auto& n = meta.at("normalization");
    p.normalization.m_hunters = network.m_hunters;
    p.normalization.state_dim = network.state_dim;
    p.normalization.state_mean = n.at("state_mean").get<std::vector<double>>();
    p.normalization.state_std = n.at("state_std").get<std::vector<double>>();
    p.normalization.discount = n.at("discount").get<double>();
    p.normalization.return_scale = n.at("return_scale").get<double>();
    p.target_return = meta.at("target_return").get<double>();
    p.step = meta.at("step").get<int>();
  } catch (const json::exception& e) {
    throw FormatError(std::string("checkpoint metadata: ") + e.what());
  }
  p.schedule = p.schedule_config.make();
  copy_parameters(ckpt.params, p.model.params);
  return p;
}

Policy load_policy(const std::filesystem::path& path) {
  return policy_from_checkpoint(nn::load_checkpoint(path));
}

}  // namespace auvhunt::amadp
