#include "auvhunt/amadp/networks.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "auvhunt/errors.hpp"

namespace auvhunt::amadp {

void NetworkConfig::validate() const {
  if (m_hunters < 1) throw ValidationError("network.m_hunters must be >= 1");
  if (state_dim < 1) throw ValidationError("network.state_dim must be >= 1");
  if (horizon < 8 || horizon % 8 != 0) {
    throw ValidationError("network.horizon must be a positive multiple of 8, got " +
                          std::to_string(horizon));
  }
  if (hidden < 1 || embed < 2 || attention_dim < 1 || inverse_hidden < 1) {
    throw ValidationError("network widths must be positive (embed >= 2)");
  }
  if (!(v_max > 0.0)) throw ValidationError("network.v_max must be positive");
  if (!(timestep_scale > 0.0)) throw ValidationError("network.timestep_scale must be positive");
}

ConditioningBatch make_conditioning(std::span<const dataset::Conditioning> cond,
                                    std::span<const int> diffusion_k,
                                    std::span<const float> null_mask) {
  if (cond.size() != diffusion_k.size() || cond.size() != null_mask.size()) {
    throw ValidationError("conditioning batch: inconsistent sizes");
  }
  ConditioningBatch out;
  out.batch = static_cast<int>(cond.size());
  for (std::size_t b = 0; b < cond.size(); ++b) {
    out.state.insert(out.state.end(), cond[b].current_state.begin(), cond[b].current_state.end());
    out.rtg.push_back(cond[b].return_to_go);
    out.timestep.push_back(cond[b].timestep);
    out.null_mask.push_back(null_mask[b]);
    out.diffusion_k.push_back(diffusion_k[b]);
  }
  return out;
}

Tensor step_embedding(std::span<const int> k, int width) {
  const int half = width / 2;
  Tensor out({k.size(), static_cast<std::size_t>(width)});
  for (std::size_t b = 0; b < k.size(); ++b) {
    for (int j = 0; j < half; ++j) {
      const double freq = std::exp(-std::log(10000.0) * j / std::max(half, 1));
      out.at(b, j) = static_cast<float>(std::sin(k[b] * freq));
      out.at(b, half + j) = static_cast<float>(std::cos(k[b] * freq));
    }
  }
  return out;
}

NoisePredictor::NoisePredictor(const NetworkConfig& cfg, ParameterSet& params, Rng& rng)
    : cfg_(cfg) {
  cfg_.validate();
  const auto J = static_cast<std::size_t>(cfg.joint_dim());
  const auto C = static_cast<std::size_t>(cfg.hidden);
  const auto E = static_cast<std::size_t>(cfg.embed);
  const auto A = static_cast<std::size_t>(cfg.attention_dim);
  const auto M = static_cast<std::size_t>(cfg.m_hunters);
  const auto S = static_cast<std::size_t>(cfg.state_dim);
  auto make_block = [&](const std::string& name, std::size_t in) {
    Block b;
    b.proj = nn::Dense::create(params, name + ".proj", in, C, rng);
    b.film = nn::Dense::create(params, name + ".film", E, C, rng);
    b.norm = nn::LayerNorm::create(params, name + ".norm", C);
    return b;
  };

  cond_in_ = nn::Dense::create(params, "eps.cond_in", J + 2, E, rng);
  cond_hidden_ = nn::Dense::create(params, "eps.cond_hidden", E, E, rng);
  step_in_ = nn::Dense::create(params, "eps.step_in", E, E, rng);
  embed_out_ = nn::Dense::create(params, "eps.embed_out", 2 * E, E, rng);
  null_embedding_ = params.add("eps.null_embedding", Tensor({1, E}));
  stem_ = make_block("eps.stem", J);
  for (int i = 0; i < 3; ++i) down_[i] = make_block("eps.down" + std::to_string(i), 2 * C);
  query_ = nn::Dense::create(params, "eps.attn.query", C, A, rng);
  agent_query_ = nn::Dense::create(params, "eps.attn.agent_query", S, A, rng);
  key_ = nn::Dense::create(params, "eps.attn.key", C, A, rng);
  value_ = nn::Dense::create(params, "eps.attn.value", C, A, rng);
  attn_out_ = nn::Dense::create(params, "eps.attn.out", M * A, C, rng);
  for (int i = 0; i < 3; ++i) {
    up_expand_[i] = nn::Dense::create(params, "eps.up" + std::to_string(i) + ".expand", C, 2 * C, rng);
    up_[i] = make_block("eps.up" + std::to_string(i), 2 * C);
  }
  output_ = nn::Dense::create(params, "eps.output", C, J, rng);
}

Var NoisePredictor::block(const Binding& bind, const Block& b, Var h, Var emb,
                          std::size_t rows_per_sample) const {
  const Var shift = nn::repeat_rows(b.film(bind, emb), rows_per_sample);
  return nn::relu(b.norm(bind, nn::add(b.proj(bind, h), shift)));
}

Var NoisePredictor::attention(const Binding& bind, Var h, Var x, int batch, int rows) const {
  const auto H = static_cast<std::size_t>(cfg_.horizon);
  const auto S = static_cast<std::size_t>(cfg_.state_dim);
  const auto R = static_cast<std::size_t>(rows);
  const Var q = query_(bind, h);
  const Var k = key_(bind, h);
  const Var v = value_(bind, h);
  std::vector<Var> per_sample;
  per_sample.reserve(batch);
  for (int b = 0; b < batch; ++b) {
    const Var qb = nn::slice_rows(q, b * R, R);
    const Var kb = nn::slice_rows(k, b * R, R);
    const Var vb = nn::slice_rows(v, b * R, R);
    // Each agent's query is the shared query shifted by an embedding of that
    // agent's own current state (row 0 of the window).
    const Var first = nn::slice_rows(x, b * H, 1);
    std::vector<Var> queries;
    for (int i = 0; i < cfg_.m_hunters; ++i) {
      const Var own = nn::slice_cols(first, i * S, S);
      queries.push_back(nn::add(qb, nn::repeat_rows(agent_query_(bind, own), R)));
    }
    per_sample.push_back(nn::adaptive_attention(queries, kb, vb));
  }
  return attn_out_(bind, nn::concat_rows(per_sample));
}

Var NoisePredictor::forward(const Binding& bind, Var x, const ConditioningBatch& cond) const {
  Tape& tape = bind.tape();
  const int B = cond.batch;
  const auto H = static_cast<std::size_t>(cfg_.horizon);
  const auto C = static_cast<std::size_t>(cfg_.hidden);
  const auto E = static_cast<std::size_t>(cfg_.embed);
  const auto J = static_cast<std::size_t>(cfg_.joint_dim());
  if (x.value().rows() != B * H || x.value().cols() != J) {
    throw nn::ShapeError("noise predictor input", x.shape(), nn::Shape{B * H, J});
  }
  if (cond.state.size() != B * J) throw ValidationError("noise predictor: conditioning size");

  Tensor cvec({static_cast<std::size_t>(B), J + 2});
  Tensor keep({static_cast<std::size_t>(B), E});
  Tensor drop({static_cast<std::size_t>(B), E});
  for (int b = 0; b < B; ++b) {
    for (std::size_t j = 0; j < J; ++j) cvec.at(b, j) = cond.state[b * J + j];
    const float r = cond.rtg[b];
    cvec.at(b, J) = std::copysign(std::log1p(std::abs(r)), r);
    cvec.at(b, J + 1) = static_cast<float>(cond.timestep[b] / cfg_.timestep_scale);
    for (std::size_t e = 0; e < E; ++e) {
      keep.at(b, e) = 1.0f - cond.null_mask[b];
      drop.at(b, e) = cond.null_mask[b];
    }
  }
  Var ce = cond_hidden_(bind, nn::relu(cond_in_(bind, tape.constant(std::move(cvec)))));
  const Var null = nn::repeat_rows(bind(null_embedding_), B);
  ce = nn::add(nn::mul(ce, tape.constant(std::move(keep))),
               nn::mul(null, tape.constant(std::move(drop))));
  const Var se = nn::relu(
      step_in_(bind, tape.constant(step_embedding(cond.diffusion_k, cfg_.embed))));
  const Var emb = nn::relu(embed_out_(bind, nn::concat_cols<float>({ce, se})));

  const Var h0 = block(bind, stem_, x, emb, H);
  Var d1 = block(bind, down_[0], nn::reshape(h0, B * H / 2, 2 * C), emb, H / 2);
  d1 = nn::add(d1, attention(bind, d1, x, B, static_cast<int>(H / 2)));
  const Var d2 = block(bind, down_[1], nn::reshape(d1, B * H / 4, 2 * C), emb, H / 4);
  const Var d3 = block(bind, down_[2], nn::reshape(d2, B * H / 8, 2 * C), emb, H / 8);

  Var u = nn::reshape(up_expand_[0](bind, d3), B * H / 4, C);
  u = block(bind, up_[0], nn::concat_cols<float>({u, d2}), emb, H / 4);
  u = nn::reshape(up_expand_[1](bind, u), B * H / 2, C);
  u = block(bind, up_[1], nn::concat_cols<float>({u, d1}), emb, H / 2);
  u = nn::reshape(up_expand_[2](bind, u), B * H, C);
  u = block(bind, up_[2], nn::concat_cols<float>({u, h0}), emb, H);
  return output_(bind, u);
}

std::array<float, kActionCode> encode_action(double theta, double v, double v_max) {
  return {static_cast<float>(std::cos(theta)), static_cast<float>(std::sin(theta)),
          static_cast<float>(v / v_max)};
}

env::HunterAction decode_action(std::span<const float> code, double v_max) {
  env::HunterAction a;
  a.theta = std::atan2(static_cast<double>(code[1]), static_cast<double>(code[0]));
  a.v = std::clamp(static_cast<double>(code[2]) * v_max, 0.0, v_max);
  return a;
}

InverseDynamics::InverseDynamics(const NetworkConfig& cfg, int agent, ParameterSet& params,
                                 Rng& rng) {
  const auto S = static_cast<std::size_t>(cfg.state_dim);
  const auto W = static_cast<std::size_t>(cfg.inverse_hidden);
  const std::string name = "inv" + std::to_string(agent);
  l1_ = nn::Dense::create(params, name + ".l1", 3 * S, W, rng);
  l2_ = nn::Dense::create(params, name + ".l2", W, W, rng);
  out_ = nn::Dense::create(params, name + ".out", W, kActionCode, rng);
}

Var InverseDynamics::forward(const Binding& bind, Var s_t, Var s_next) const {
  const Var in = nn::concat_cols<float>({s_t, s_next, nn::sub(s_next, s_t)});
  return out_(bind, nn::relu(l2_(bind, nn::relu(l1_(bind, in)))));
}

PolicyModel PolicyModel::create(const NetworkConfig& config, std::uint64_t seed) {
  config.validate();
  PolicyModel m;
  m.config = config;
  Rng rng(derive_seed(seed, "init"));
  m.predictor = NoisePredictor(config, m.params, rng);
  for (int i = 0; i < config.m_hunters; ++i) m.inverse.emplace_back(config, i, m.params, rng);
  return m;
}

std::vector<env::HunterAction> PolicyModel::actions(std::span<const float> s_t,
                                                    std::span<const float> s_next) const {
  const auto S = static_cast<std::size_t>(config.state_dim);
  const auto J = static_cast<std::size_t>(config.joint_dim());
  if (s_t.size() != J || s_next.size() != J) {
    throw ValidationError("inverse dynamics: joint state size mismatch");
  }
  Tape tape(false);
  Binding bind(tape, params);
  std::vector<env::HunterAction> out;
  for (int i = 0; i < config.m_hunters; ++i) {
    const auto a = s_t.subspan(i * S, S);
    const auto b = s_next.subspan(i * S, S);
    const Var code = inverse[i].forward(bind, tape.constant(Tensor({1, S}, std::vector<float>(a.begin(), a.end()))),
                                        tape.constant(Tensor({1, S}, std::vector<float>(b.begin(), b.end()))));
    out.push_back(decode_action(code.value().data(), config.v_max));
  }
  return out;
}

env::HunterAction analytic_inverse(kinematics::Vec2 p_t, kinematics::Vec2 p_next, double dt) {
  if (!(dt > 0.0)) throw ValidationError("analytic_inverse: dt must be positive");
  const kinematics::Vec2 d = p_next - p_t;
  const double dist = kinematics::norm(d);
  return {dist > 0.0 ? std::atan2(d.y, d.x) : 0.0, dist / dt};
}

env::HunterAction analytic_inverse_features(std::span<const float> s_next, double v_max) {
  if (s_next.size() < 5) throw ValidationError("analytic_inverse_features: state too short");
  return {std::atan2(static_cast<double>(s_next[3]), static_cast<double>(s_next[4])),
          std::clamp(static_cast<double>(s_next[2]) * v_max, 0.0, v_max)};
}

}  // namespace auvhunt::amadp
