#include <doctest.h>

#include <cmath>
#include <limits>
#include <numeric>

#include "auvhunt/amadp/execution.hpp"

using namespace auvhunt;
using namespace auvhunt::amadp;

namespace {

env::EnvConfig toy_env() {
  env::EnvConfig cfg;
  cfg.world.arena.width = 600.0;
  cfg.world.arena.height = 600.0;
  cfg.world.start = {300.0, 300.0};
  cfg.episode.h_max_steps = 40;
  return cfg;
}

dataset::Dataset toy_dataset(int episodes = 2) {
  dataset::GenerateOptions opt;
  opt.n_episodes = episodes;
  opt.root_seed = 8;
  opt.horizon = 8;
  return dataset::generate(toy_env(), dataset::BehaviorMix{}, opt);
}

TrainConfig small_train(int steps) {
  TrainConfig cfg;
  cfg.steps = steps;
  cfg.batch = 8;
  cfg.lr = 1e-3;
  cfg.log_every = 1;
  cfg.checkpoint_every = 0;
  cfg.seed = 5;
  cfg.network.horizon = 8;
  cfg.network.hidden = 16;
  cfg.network.embed = 16;
  cfg.network.attention_dim = 8;
  cfg.network.inverse_hidden = 16;
  cfg.schedule.K = 10;
  return cfg;
}

/// Least-squares slope of y against its index.
double trend(const std::vector<double>& y) {
  const double n = static_cast<double>(y.size());
  const double mx = (n - 1) / 2.0;
  const double my = std::accumulate(y.begin(), y.end(), 0.0) / n;
  double num = 0.0, den = 0.0;
  for (std::size_t i = 0; i < y.size(); ++i) {
    num += (i - mx) * (y[i] - my);
    den += (i - mx) * (i - mx);
  }
  return num / den;
}

std::vector<double> moving_average(const std::vector<double>& y, std::size_t w) {
  std::vector<double> out;
  double acc = 0.0;
  for (std::size_t i = 0; i < y.size(); ++i) {
    acc += y[i];
    if (i >= w) acc -= y[i - w];
    if (i + 1 >= w) out.push_back(acc / w);
  }
  return out;
}

}  // namespace

TEST_CASE("schedule from explicit betas") {
  const std::vector<double> betas{0.1, 0.2};
  const auto s = schedule_from_betas(betas);
  CHECK(s.alpha_bar_at(1) == doctest::Approx(0.9));
  CHECK(s.alpha_bar_at(2) == doctest::Approx(0.72));
  CHECK(s.sigma_at(1) == 0.0);
  // beta_2 (1 - 0.9) / (1 - 0.72)
  CHECK(s.sigma_at(2) == doctest::Approx(0.2 * 0.1 / 0.28));
  CHECK_THROWS_AS(make_schedule(0), ValidationError);
  const std::vector<double> bad{0.1, 1.0};
  CHECK_THROWS_AS(schedule_from_betas(bad), ValidationError);
}

TEST_CASE("linear schedule invariants") {
  for (int K : {1, 2, 10, 50, 200, 1000}) {
    const auto s = make_schedule(K);
    CHECK(s.beta_at(1) == doctest::Approx(1e-4));
    if (K > 1) CHECK(s.beta_at(K) == doctest::Approx(0.02));
    for (int k = 2; k <= K; ++k) {
      CHECK(s.alpha_bar_at(k) < s.alpha_bar_at(k - 1));
      CHECK(s.sigma_at(k) > 0.0);
      CHECK(s.sigma_at(k) <= s.beta_at(k));
    }
  }
  const auto tiny = make_schedule(100, 1e-12, 1e-12);
  CHECK(tiny.alpha_bar_at(100) == doctest::Approx(1.0));
}

TEST_CASE("q_sample closed form") {
  const std::vector<double> betas{0.1, 0.2};
  const auto s = schedule_from_betas(betas);
  const std::vector<float> x0{1.0f};
  const std::vector<float> noise{1.0f};
  CHECK(std::abs(q_sample(x0, 2, noise, s)[0] - 1.3777) < 1e-4);
  CHECK_THROWS_AS(q_sample(x0, 0, noise, s), ValidationError);
  CHECK_THROWS_AS(q_sample(x0, 3, noise, s), ValidationError);
  const auto id = make_schedule(5, 1e-12, 1e-12);
  CHECK(q_sample(x0, 5, noise, id)[0] == doctest::Approx(1.0).epsilon(1e-5));
}

TEST_CASE("q_sample variance matches 1 - alpha_bar") {
  const auto s = make_schedule(200);
  Rng rng(17);
  std::normal_distribution<float> g(0.0f, 1.0f);
  for (int k : {10, 100, 200}) {
    const int n = 100000;
    std::vector<float> x0(n, 0.5f), noise(n);
    for (auto& v : noise) v = g(rng);
    const auto xk = q_sample(x0, k, noise, s);
    double mean = 0.0;
    for (float v : xk) mean += v;
    mean /= n;
    double var = 0.0;
    for (float v : xk) var += (v - mean) * (v - mean);
    var /= n - 1;
    CHECK(std::abs(var / (1.0 - s.alpha_bar_at(k)) - 1.0) < 0.02);
  }
}

TEST_CASE("reverse mean with the exact noise equals the true posterior mean") {
  const auto s = make_schedule(200);
  Rng rng(2);
  std::normal_distribution<float> g(0.0f, 1.0f);
  for (int k : {2, 50, 199}) {
    std::vector<float> x0(64), noise(64);
    for (auto& v : x0) v = g(rng);
    for (auto& v : noise) v = g(rng);
    const auto xk = q_sample(x0, k, noise, s);
    const auto mu = posterior_mean(xk, k, noise, s);
    const double ab = s.alpha_bar_at(k), ab_prev = s.alpha_bar_at(k - 1);
    const double c0 = std::sqrt(ab_prev) * s.beta_at(k) / (1.0 - ab);
    const double ck = std::sqrt(s.alpha_at(k)) * (1.0 - ab_prev) / (1.0 - ab);
    for (std::size_t i = 0; i < x0.size(); ++i) {
      CHECK(std::abs(mu[i] - (c0 * x0[i] + ck * xk[i])) < 1e-5);
    }
  }
}

TEST_CASE("guidance at w = 1 is the conditional prediction") {
  const std::vector<float> c{0.1f, -2.3f, 7.7f};
  const std::vector<float> u{5.0f, 1.0f, -3.0f};
  CHECK(guided_epsilon(c, u, 1.0) == c);
  CHECK(guided_epsilon(c, u, 0.0) == u);
  CHECK(guided_epsilon(c, u, 2.0)[0] == doctest::Approx(-4.8f));
}

TEST_CASE("ddpm loss with oracle and zero predictors") {
  const auto data = toy_dataset();
  Rng rng(1);
  const auto batch = dataset::window_batch(data, 16, 8, rng);
  const auto s = make_schedule(50);
  const auto x0 = clean_windows(batch);
  const std::size_t J = batch.joint_dim;
  const std::size_t H = batch.horizon;

  const EpsilonFn oracle = [&](const Binding& bind, Var x, const ConditioningBatch& cond) {
    Tensor out(x.value().shape());
    for (std::size_t b = 0; b < static_cast<std::size_t>(cond.batch); ++b) {
      const double ab = s.alpha_bar_at(cond.diffusion_k[b]);
      for (std::size_t i = b * H * J; i < (b + 1) * H * J; ++i) {
        out[i] = static_cast<float>((x.value()[i] - std::sqrt(ab) * x0[i]) / std::sqrt(1.0 - ab));
      }
    }
    return bind.tape().constant(std::move(out));
  };
  const EpsilonFn zero = [](const Binding& bind, Var x, const ConditioningBatch&) {
    return bind.tape().constant(Tensor(x.value().shape()));
  };
  Tape tape;
  const ParameterSet none;
  const Binding bind(tape, none);
  GuidanceConfig g;
  CHECK(ddpm_loss(oracle, bind, batch, s, g, rng).value()[0] < 1e-8);
  double acc = 0.0;
  for (int rep = 0; rep < 20; ++rep) {
    const auto b = dataset::window_batch(data, 16, 8, rng);
    acc += ddpm_loss(zero, bind, b, s, g, rng).value()[0];
  }
  CHECK(acc / 20 == doctest::Approx(1.0).epsilon(0.05));
}

TEST_CASE("padded entries never reach the losses") {
  const auto data = toy_dataset();
  auto model = PolicyModel::create(small_train(1).network, 1);
  const auto s = make_schedule(10);
  // Start every window near the end of an episode so padding is present.
  Rng pick(4);
  dataset::Batch batch;
  do {
    batch = dataset::window_batch(data, 8, 8, pick);
  } while (std::find(batch.mask.begin(), batch.mask.end(), 0.0f) == batch.mask.end());
  auto poisoned = batch;
  const std::size_t J = batch.joint_dim;
  for (std::size_t r = 0; r < batch.mask.size(); ++r) {
    if (batch.mask[r] == 0.0f) {
      for (std::size_t j = 0; j < J; ++j) {
        poisoned.windows[r * J + j] = std::numeric_limits<float>::quiet_NaN();
      }
    }
  }
  auto loss = [&](const dataset::Batch& b) {
    Tape tape;
    const Binding bind(tape, model.params);
    Rng rng(9);
    const double d = ddpm_loss(epsilon_fn(model.predictor), bind, b, s, {}, rng).value()[0];
    const double i = inverse_dynamics_loss(model, bind, b).value()[0];
    return std::make_pair(d, i);
  };
  const auto clean = loss(batch);
  const auto dirty = loss(poisoned);
  CHECK(std::isfinite(dirty.first));
  CHECK(std::isfinite(dirty.second));
  CHECK(dirty == clean);
}

TEST_CASE("sampler clamps the first state and is deterministic") {
  const auto data = toy_dataset();
  auto model = PolicyModel::create(small_train(1).network, 3);
  const auto s = make_schedule(10);
  Rng r0(0);
  const auto b = dataset::window_batch(data, 1, 8, r0);
  const auto& cond = b.conditioning[0];
  Rng r1(11), r2(11);
  const auto a = p_sample_loop(epsilon_fn(model.predictor), model.params, cond, 8, s, {}, r1);
  const auto c = p_sample_loop(epsilon_fn(model.predictor), model.params, cond, 8, s, {}, r2);
  CHECK(a == c);
  for (std::size_t j = 0; j < cond.current_state.size(); ++j) CHECK(a[j] == cond.current_state[j]);
  for (float v : a) CHECK(std::isfinite(v));
}

TEST_CASE("near-identity schedule leaves the initial noise in place") {
  const auto s = make_schedule(5, 1e-10, 1e-10);
  const EpsilonFn zero = [](const Binding& bind, Var x, const ConditioningBatch&) {
    return bind.tape().constant(Tensor(x.value().shape()));
  };
  dataset::Conditioning cond;
  cond.current_state = {0.25f, -0.5f};
  Rng r1(3), r2(3);
  const auto out = p_sample_loop(zero, {}, cond, 8, s, {}, r1);
  std::normal_distribution<float> g(0.0f, 1.0f);
  std::vector<float> x(16);
  for (auto& v : x) v = g(r2);
  CHECK(out[0] == 0.25f);
  CHECK(out[1] == -0.5f);
  for (std::size_t i = 2; i < 16; ++i) CHECK(out[i] == doctest::Approx(x[i]).epsilon(1e-4));
}

TEST_CASE("guidance weight one matches a purely conditional sampler") {
  const auto data = toy_dataset();
  auto model = PolicyModel::create(small_train(1).network, 3);
  const auto s = make_schedule(6);
  Rng r0(0);
  const auto b = dataset::window_batch(data, 1, 8, r0);
  GuidanceConfig w1;
  w1.guidance_weight = 1.0;
  // A conditional-only predictor: ignores the null flag by zeroing it.
  const EpsilonFn cond_only = [&](const Binding& bind, Var x, const ConditioningBatch& c) {
    auto c2 = c;
    std::fill(c2.null_mask.begin(), c2.null_mask.end(), 0.0f);
    return model.predictor.forward(bind, x, c2);
  };
  Rng r1(5), r2(5);
  const auto guided = p_sample_loop(epsilon_fn(model.predictor), model.params, b.conditioning[0], 8,
                                    s, w1, r1);
  const auto plain = p_sample_loop(cond_only, model.params, b.conditioning[0], 8, s, w1, r2);
  CHECK(guided == plain);
}

TEST_CASE("analytic inverse dynamics") {
  const auto a = analytic_inverse({0, 0}, {1.8, 2.4}, 10.0);
  CHECK(a.theta == doctest::Approx(0.9273).epsilon(1e-4));
  CHECK(a.v == doctest::Approx(0.3));
  const auto still = analytic_inverse({5, 5}, {5, 5}, 10.0);
  CHECK(still.v == 0.0);
  const auto code = encode_action(2.5, 0.15, 0.3);
  const auto back = decode_action(code, 0.3);
  CHECK(back.theta == doctest::Approx(2.5));
  CHECK(back.v == doctest::Approx(0.15));
  const std::array<float, 3> too_fast{1.0f, 0.0f, 7.0f};
  CHECK(decode_action(too_fast, 0.3).v == 0.3);
}

TEST_CASE("network shapes and configuration checks") {
  auto cfg = small_train(1).network;
  cfg.horizon = 12;
  CHECK_THROWS_AS(cfg.validate(), ValidationError);
  cfg.horizon = 8;
  const auto model = PolicyModel::create(cfg, 0);
  Tape tape(false);
  const Binding bind(tape, model.params);
  ConditioningBatch c;
  c.batch = 2;
  c.state.assign(2 * cfg.joint_dim(), 0.1f);
  c.rtg = {1.0f, -3.0f};
  c.timestep = {0.0f, 12.0f};
  c.null_mask = {0.0f, 1.0f};
  c.diffusion_k = {1, 7};
  const auto out = model.predictor.forward(bind, tape.constant(Tensor({16, 36}, 0.2f)), c);
  CHECK(out.value().rows() == 16);
  CHECK(out.value().cols() == 36);
  CHECK_THROWS_AS(model.predictor.forward(bind, tape.constant(Tensor({15, 36})), c), nn::ShapeError);
}

TEST_CASE("training is deterministic and both loss terms decrease") {
  const auto data = toy_dataset();
  const auto cfg = small_train(500);
  const auto a = train(data, cfg, nullptr);
  const auto b = train(data, small_train(30), nullptr);
  for (std::size_t i = 0; i < b.size(); ++i) {
    CHECK(a[i].total == b[i].total);
    CHECK(a[i].diffusion == b[i].diffusion);
  }
  CHECK(a.front().diffusion > 0.0);
  CHECK(a.front().inverse > 0.0);
  std::vector<double> total, diff, inv;
  for (const auto& r : a) {
    total.push_back(r.total);
    diff.push_back(r.diffusion);
    inv.push_back(r.inverse);
  }
  CHECK(trend(moving_average(total, 100)) < 0.0);
  CHECK(trend(moving_average(diff, 100)) < 0.0);
  CHECK(trend(moving_average(inv, 100)) < 0.0);
  const auto ma = moving_average(total, 100);
  CHECK(ma.back() < ma.front());
}

TEST_CASE("checkpoint resume is bit exact") {
  const auto data = toy_dataset();
  const auto cfg = small_train(0);
  Trainer straight(data, cfg);
  for (int i = 0; i < 5; ++i) straight.step();
  const auto bytes = nn::encode_checkpoint(straight.checkpoint());
  const auto next = straight.step();

  Trainer resumed(data, cfg, nn::decode_checkpoint(bytes));
  CHECK(resumed.step_count() == 5);
  const auto again = resumed.step();
  CHECK(again.total == next.total);
  CHECK(again.step == next.step);
  CHECK(resumed.model().params == straight.model().params);
  CHECK(nn::encode_checkpoint(resumed.checkpoint()) == nn::encode_checkpoint(straight.checkpoint()));
}

TEST_CASE("train rejects incompatible datasets") {
  const auto data = toy_dataset();
  auto cfg = small_train(1);
  cfg.network.m_hunters = 4;
  CHECK_THROWS_AS(Trainer(data, cfg), ValidationError);
}

TEST_CASE("execution produces a valid deterministic trace") {
  const auto data = toy_dataset();
  Trainer t(data, small_train(0));
  for (int i = 0; i < 20; ++i) t.step();
  const auto policy = t.policy();
  auto env_cfg = toy_env();
  env_cfg.episode.h_max_steps = 15;
  env_cfg.episode.seed = 77;
  const ExecutionConfig ec;
  const auto a = execute_episode(env_cfg, policy, ec);
  const auto b = execute_episode(env_cfg, policy, ec);
  REQUIRE(a.length() == b.length());
  CHECK(env::is_terminal(a.status));
  for (int i = 0; i < a.length(); ++i) {
    CHECK(a.steps[i].world == b.steps[i].world);
    const auto& r = a.steps[i].reward;
    CHECK(r.total == r.encirclement + r.collision + r.covert);
    for (const auto& h : a.steps[i].world.hunters) CHECK(h.speed <= 0.3);
    for (const auto& act : a.steps[i].actions) {
      CHECK(act.v >= 0.0);
      CHECK(act.v <= 0.3);
    }
  }
}
