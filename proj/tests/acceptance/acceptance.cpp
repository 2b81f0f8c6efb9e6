// Acceptance run: one PASS/FAIL line per criterion.
//
//   acceptance [--work DIR] [N ...]
//
// With no criterion numbers every criterion runs. Exit status is 0 only when
// every selected criterion passes.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <numbers>
#include <numeric>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "auvhunt/acoustics.hpp"
#include "auvhunt/amadp/execution.hpp"
#include "auvhunt/covert.hpp"
#include "auvhunt/harness/cli.hpp"
#include "auvhunt/harness/pipeline.hpp"
#include "auvhunt/kinematics.hpp"
#include "gradcheck.hpp"

#ifndef AUVHUNT_SOURCE_DIR
#define AUVHUNT_SOURCE_DIR "."
#endif

using namespace auvhunt;
namespace fs = std::filesystem;
using json = nlohmann::json;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

const fs::path kSource = AUVHUNT_SOURCE_DIR;

int cli(const std::vector<std::string>& args) {
  std::ostringstream out, err;
  const int code = harness::run_cli(args, out, err);
  if (code != harness::kExitOk) std::fprintf(stderr, "%s", err.str().c_str());
  return code;
}

std::vector<std::uint8_t> read_bytes(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

void write_bytes(const fs::path& p, const std::vector<std::uint8_t>& bytes) {
  std::ofstream out(p, std::ios::binary);
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
}

harness::RunConfig desk_config() {
  return harness::load_config(kSource / "configs" / "desk.json");
}

// ---------------------------------------------------------------- 1

Outcome channel_golden() {
  const json golden = json::parse(harness::read_text(kSource / "tests/oracles/channel_golden.json"));
  double worst = 0.0;
  for (const auto& [f, v] : golden.at("thorp_db_per_km").items()) {
    worst = std::max(worst, std::abs(acoustics::thorp_db_per_km(std::stod(f)).value - v.get<double>()));
  }
  double worst_noise = 0.0;
  for (const auto& row : golden.at("noise_db")) {
    acoustics::ChannelParams ch;
    ch.frequency_khz = row.at("f");
    ch.shipping = row.at("s");
    ch.wind_mps = row.at("w");
    const auto n = acoustics::ambient_noise_db(ch);
    worst_noise = std::max(worst_noise, std::abs(n.total.value - row.at("total").get<double>()));
  }
  for (const auto& row : golden.at("path_loss_db")) {
    acoustics::ChannelParams ch;
    ch.spreading = row.at("m");
    ch.frequency_khz = row.at("f");
    worst = std::max(worst, std::abs(acoustics::path_loss_db(row.at("d_km"), ch).value -
                                     row.at("db").get<double>()));
  }
  const double thorp25 = acoustics::thorp_db_per_km(25.0).value;
  const double noise = acoustics::ambient_noise_db({}).total.value;
  const bool ok = std::abs(thorp25 - 6.1207) <= 1e-3 && std::abs(noise - 22.31) <= 0.02 &&
                  worst <= 1e-3 && worst_noise <= 0.02;
  return {ok, fmt("thorp(25)=%.5f dB/km, noise(25,0.5,0)=%.4f dB, max |diff| vs oracle %.2e "
                  "(attenuation/path loss), %.2e (noise)",
                  thorp25, noise, worst, worst_noise)};
}

// ---------------------------------------------------------------- 2

Outcome covert_budget() {
  const auto t0 = std::chrono::steady_clock::now();
  const covert::CovertParams cp;
  const acoustics::ChannelParams ch;
  const double noise = acoustics::ambient_noise_watts(ch, 1e-9);
  bool ok = covert::kl_budget(0.0, cp.channel_uses) == 0.0;
  double prev = 0.0;
  for (double b = 1e-8; b < 1e3; b *= 1.02) {
    const double k = covert::kl_budget(b, cp.channel_uses);
    ok = ok && k > prev;
    prev = k;
  }
  prev = INFINITY;
  for (double d = 1.0; d < 2e4; d *= 1.01) {
    const double k = covert::evaluate_link(d, cp, ch, noise).kl;
    ok = ok && k < prev;
    prev = k;
  }
  const double max_d = 1e4;
  const double dstar = covert::min_covert_distance(cp, ch, noise, max_d);
  const int n = 10000;
  const double cell = max_d / n;
  double first = NAN;
  for (int i = 1; i <= n; ++i) {
    if (covert::evaluate_link(i * cell, cp, ch, noise, 0.0).covert_ok) {
      first = i * cell;
      break;
    }
  }
  const double secs = seconds_since(t0);
  ok = ok && std::abs(first - dstar) <= cell && secs < 5.0;
  return {ok, fmt("bound %.4f, kl(0)=0, monotone in beta and distance; d*=%.2f m, grid %.0f m "
                  "(cell %.1f m); %.2f s",
                  cp.kl_bound(), dstar, first, cell, secs)};
}

// ---------------------------------------------------------------- 3

Outcome detector_optimality() {
  const auto t0 = std::chrono::steady_clock::now();
  const int L = 100;
  const int trials = 10000;
  bool ok = true;
  std::string detail;
  for (double beta : {0.1, 0.5, 1.0}) {
    const double star = covert::optimal_threshold(1.0, beta);
    std::vector<double> th{star};
    for (int i = 0; i < 50; ++i) th.push_back(star + (-0.3 + 0.6 * i / 49.0) * std::max(beta, 0.2));
    const auto rates = covert::estimate_error_rates(derive_seed(3, "beta", static_cast<std::uint64_t>(beta * 10)),
                                                    L, beta, th, trials);
    double worst_margin = -INFINITY;
    for (std::size_t i = 1; i < rates.size(); ++i) {
      const double sigma = std::hypot(rates[0].standard_error, rates[i].standard_error);
      worst_margin = std::max(worst_margin, (rates[0].total() - rates[i].total()) / sigma);
    }
    ok = ok && worst_margin <= 2.0;
    detail += fmt("beta %.1f: P_FA+P_MD %.4f at alpha*, worst excess %.2f sigma; ", beta,
                  rates[0].total(), std::max(worst_margin, 0.0));
  }
  const double secs = seconds_since(t0);
  ok = ok && secs < 60.0;
  return {ok, detail + fmt("%.2f s", secs)};
}

// ---------------------------------------------------------------- 4 and 5

struct DeskRun {
  harness::RunLayout layout;
  harness::RunConfig cfg;
  bool ok = false;
  double seconds = 0.0;
};

DeskRun run_desk(const fs::path& work) {
  DeskRun run;
  run.cfg = desk_config();
  run.layout.root = work / "desk";
  fs::remove_all(run.layout.root);
  const std::string c = (kSource / "configs" / "desk.json").string();
  const std::string out = run.layout.root.string();
  const auto t0 = std::chrono::steady_clock::now();
  run.ok = true;
  for (const char* stage : {"gen-dataset", "train", "eval", "plot-data"}) {
    run.ok = run.ok && cli({stage, "--config", c, "--out", out}) == harness::kExitOk;
  }
  run.seconds = seconds_since(t0);
  return run;
}

Outcome kl_property(const DeskRun& desk) {
  if (!desk.ok) return {false, "desk pipeline failed"};
  const auto t0 = std::chrono::steady_clock::now();
  const auto& cfg = desk.cfg;
  const int n = 50;
  const auto eval_seed = harness::seeds(cfg).eval;
  const auto enc = harness::summarize(
      harness::evaluate_scripted(cfg, behavior::Policy::kEncircle, n, eval_seed), cfg.env, "encircle");
  const auto pur = harness::summarize(
      harness::evaluate_scripted(cfg, behavior::Policy::kPursuit, n, eval_seed), cfg.env, "pursuit");
  const auto ckpts = harness::list_checkpoints(desk.layout);
  const auto policy = amadp::load_policy(ckpts.back().second);
  const auto ama = harness::summarize(harness::evaluate_policy(cfg, policy, n), cfg.env, "amadp");
  const bool finite = !enc.kl_mean.empty() &&
                      std::all_of(enc.kl_mean.begin(), enc.kl_mean.end(),
                                  [](double v) { return std::isfinite(v); });
  const double secs = seconds_since(t0);
  const bool ok = finite && ama.violation_fraction <= pur.violation_fraction && secs < 600.0;
  return {ok, fmt("encircle KL series %zu steps, finite=%d, mean KL at t=1 %.3g (bound %.4f); "
                  "violation fraction encircle %.3f, pursuit %.3f, amadp %.3f; %.0f s",
                  enc.kl_mean.size(), finite ? 1 : 0, enc.kl_mean.empty() ? NAN : enc.kl_mean[0],
                  enc.kl_bound, enc.violation_fraction, pur.violation_fraction,
                  ama.violation_fraction, secs)};
}

Outcome offline_improvement(const DeskRun& desk) {
  if (!desk.ok) return {false, "desk pipeline failed"};
  const json manifest = json::parse(harness::read_text(desk.layout.dataset() / "manifest.json"));
  const json metrics = json::parse(harness::read_text(desk.layout.metrics()));
  const double base = manifest.at("success_fraction");
  const double rate = metrics.at("success_rate");
  std::vector<double> steps, rates;
  std::istringstream curve(harness::read_text(desk.layout.curve_csv()));
  std::string line;
  bool header = false;
  while (std::getline(curve, line)) {
    if (line.empty() || line[0] == '#') continue;
    if (!header) {
      header = true;
      continue;
    }
    std::istringstream row(line);
    std::string step, r;
    std::getline(row, step, ',');
    std::getline(row, r, ',');
    steps.push_back(std::stod(step));
    rates.push_back(std::stod(r));
  }
  const double slope = steps.size() >= 2 ? harness::trend_slope(steps, rates) : NAN;
  std::string series;
  for (std::size_t i = 0; i < steps.size(); ++i) series += fmt(" %.0f:%.2f", steps[i], rates[i]);
  const bool ok = rate >= base + 0.05 && slope >= 0.0 && desk.seconds < 1800.0;
  return {ok, fmt("amadp success %.3f over %d seeds vs dataset %.3f (needs >= %.3f); curve%s; "
                  "trend %.2e per step; pipeline %.0f s",
                  rate, metrics.at("episodes").get<int>(), base, base + 0.05, series.c_str(),
                  slope, desk.seconds)};
}

// ---------------------------------------------------------------- 6

Outcome diffusion_correctness() {
  const auto t0 = std::chrono::steady_clock::now();
  const auto s = amadp::make_schedule(200);
  Rng rng(61);
  std::normal_distribution<float> g(0.0f, 1.0f);
  double worst_var = 0.0;
  for (int k : {5, 60, 200}) {
    const int n = 100000;
    std::vector<float> x0(n, 0.7f), noise(n);
    for (auto& v : noise) v = g(rng);
    const auto xk = amadp::q_sample(x0, k, noise, s);
    const double mean = std::accumulate(xk.begin(), xk.end(), 0.0) / n;
    double var = 0.0;
    for (float v : xk) var += (v - mean) * (v - mean);
    var /= n - 1;
    worst_var = std::max(worst_var, std::abs(var / (1.0 - s.alpha_bar_at(k)) - 1.0));
  }
  double worst_rev = 0.0;
  for (int k : {2, 17, 100, 200}) {
    std::vector<float> x0(256), noise(256);
    for (auto& v : x0) v = g(rng);
    for (auto& v : noise) v = g(rng);
    const auto xk = amadp::q_sample(x0, k, noise, s);
    // With the true noise, the model mean must equal the Gaussian posterior
    // mean of q(x_{k-1} | x_k, x_0).
    const auto mu = amadp::reverse_mean(xk, k, noise, s, 0.0);
    const double ab = s.alpha_bar_at(k), ab_prev = s.alpha_bar_at(k - 1);
    const double c0 = std::sqrt(ab_prev) * s.beta_at(k) / (1.0 - ab);
    const double ck = std::sqrt(s.alpha_at(k)) * (1.0 - ab_prev) / (1.0 - ab);
    for (std::size_t i = 0; i < x0.size(); ++i) {
      worst_rev = std::max(worst_rev, std::abs(mu[i] - (c0 * x0[i] + ck * xk[i])));
    }
  }
  bool identity = true;
  for (int trial = 0; trial < 100; ++trial) {
    std::vector<float> c(64), u(64);
    for (auto& v : c) v = 10.0f * g(rng);
    for (auto& v : u) v = 10.0f * g(rng);
    identity = identity && amadp::guided_epsilon(c, u, 1.0) == c;
  }
  const double secs = seconds_since(t0);
  const bool ok = worst_var < 0.02 && worst_rev < 1e-5 && identity && secs < 60.0;
  return {ok, fmt("q_sample variance worst rel err %.4f; reversal identity max |diff| %.2e; "
                  "w=1 guidance exact=%d; %.2f s",
                  worst_var, worst_rev, identity ? 1 : 0, secs)};
}

// ---------------------------------------------------------------- 7

Outcome gradient_suite() {
  const auto t0 = std::chrono::steady_clock::now();
  std::mt19937_64 rng(77);
  int checked = 0, failed = 0;
  double worst = 0.0;
  std::string first_failure;
  const auto cases = testing::op_cases();
  for (const auto& op : cases) {
    for (int trial = 0; trial < 20; ++trial) {
      auto [graph, inputs] = op.make(rng);
      const auto r = testing::gradient_check(graph, inputs, rng);
      ++checked;
      worst = std::max(worst, r.worst_error);
      if (!r.ok) {
        ++failed;
        if (first_failure.empty()) first_failure = op.name + ": " + r.detail;
      }
    }
  }
  const double secs = seconds_since(t0);
  return {failed == 0 && secs < 60.0,
          fmt("%zu ops x 20 shapes = %d checks, %d failed, worst error %.2e of tolerance; %.2f s",
              cases.size(), checked, failed, worst, secs) +
              (first_failure.empty() ? "" : "; " + first_failure)};
}

// ---------------------------------------------------------------- 8

/// Replaces each stored command with the heading and speed the hunter
/// actually reached, replaying the episode from reset. Returns the largest
/// action-code error of the closed-form inverse against those labels.
double relabel_realized(dataset::Dataset& data, const env::EnvConfig& env_cfg, std::uint64_t root) {
  const double v_max = env_cfg.world.hunter_limits.v_max;
  const int m = data.manifest.m_hunters;
  const int sd = dataset::kStateDim;
  double worst = 0.0;
  for (std::size_t e = 0; e < data.episodes.size(); ++e) {
    auto& ep = data.episodes[e];
    env::EnvConfig cfg = env_cfg;
    cfg.episode.seed = derive_seed(root, "episode", e);
    env::WorldState w = env::reset(cfg);
    for (int t = 0; t + 1 < ep.steps(); ++t) {
      std::vector<env::HunterAction> cmd(m);
      for (int i = 0; i < m; ++i) {
        const auto a = static_cast<std::size_t>((t * m + i) * dataset::kActionDim);
        cmd[i] = {ep.actions[a], ep.actions[a + 1]};
      }
      w = env::step(w, cmd, cfg).world;
      const auto next = ep.joint_state(t + 1);
      for (int i = 0; i < m; ++i) {
        const auto a = static_cast<std::size_t>((t * m + i) * dataset::kActionDim);
        const double psi = w.hunters[i].pose.psi;
        const double v = w.hunters[i].speed;
        ep.actions[a] = static_cast<float>(psi);
        ep.actions[a + 1] = static_cast<float>(v);
        const auto est = amadp::analytic_inverse_features(next.subspan(i * sd, sd), v_max);
        const auto want = amadp::encode_action(psi, v, v_max);
        const auto got = amadp::encode_action(est.theta, est.v, v_max);
        for (int c = 0; c < amadp::kActionCode; ++c) {
          worst = std::max(worst, static_cast<double>((want[c] - got[c]) * (want[c] - got[c])));
        }
      }
    }
  }
  return worst;
}

Outcome inverse_dynamics() {
  const auto t0 = std::chrono::steady_clock::now();
  const auto run = desk_config();
  const auto env_cfg = run.env;
  dataset::GenerateOptions opt;
  opt.horizon = 8;
  opt.n_episodes = 200;
  opt.root_seed = 81;
  auto train_data = dataset::generate(env_cfg, run.behavior, opt);
  const double analytic = relabel_realized(train_data, env_cfg, opt.root_seed);
  dataset::GenerateOptions hold = opt;
  hold.n_episodes = 20;
  hold.root_seed = 82;
  auto test_data = dataset::generate(env_cfg, run.behavior, hold);
  relabel_realized(test_data, env_cfg, hold.root_seed);

  amadp::NetworkConfig net;
  net.m_hunters = env_cfg.episode.m_hunters;
  net.horizon = opt.horizon;
  net.v_max = env_cfg.world.hunter_limits.v_max;
  auto model = amadp::PolicyModel::create(net, 8);
  nn::AdamConfig adam_cfg;
  adam_cfg.lr = 1e-3;
  nn::Adam adam(adam_cfg, model.params);
  Rng rng(83);
  double last_loss = 0.0;
  for (int step = 0; step < 8000; ++step) {
    nn::Tape tape;
    const nn::Binding bind(tape, model.params);
    const auto batch = dataset::window_batch(train_data, 64, opt.horizon, rng);
    const auto loss = amadp::inverse_dynamics_loss(model, bind, batch);
    tape.backward(loss);
    adam.step(model.params, bind.gradients());
    last_loss = loss.value()[0];
  }

  const int m = net.m_hunters;
  double se_theta = 0.0, se_v = 0.0;
  long count = 0;
  for (const auto& ep : test_data.episodes) {
    for (int t = 0; t + 1 < ep.steps(); ++t) {
      const auto s0 = dataset::normalize(train_data.manifest, ep.joint_state(t));
      const auto s1 = dataset::normalize(train_data.manifest, ep.joint_state(t + 1));
      const auto acts = model.actions(s0, s1);
      for (int i = 0; i < m; ++i) {
        const auto a = static_cast<std::size_t>((t * m + i) * dataset::kActionDim);
        const double dth = kinematics::wrap_angle(acts[i].theta - ep.actions[a]);
        const double dv = acts[i].v - ep.actions[a + 1];
        se_theta += dth * dth;
        se_v += dv * dv;
        ++count;
      }
    }
  }
  const double rms_theta = std::sqrt(se_theta / count);
  const double rms_v = std::sqrt(se_v / count);
  const double secs = seconds_since(t0);
  const bool ok = rms_theta <= 0.05 && rms_v <= 0.02 && analytic < 1e-6 && secs < 300.0;
  return {ok, fmt("held-out RMS %.4f rad, %.4f m/s over %ld actions (train loss %.2e); "
                  "analytic inverse max squared code error %.2e; %.0f s",
                  rms_theta, rms_v, count, last_loss, analytic, secs)};
}

// ---------------------------------------------------------------- 9

std::vector<fs::path> tree(const fs::path& root) {
  std::vector<fs::path> files;
  for (const auto& e : fs::recursive_directory_iterator(root)) {
    if (e.is_regular_file()) files.push_back(fs::relative(e.path(), root));
  }
  std::sort(files.begin(), files.end());
  return files;
}

template <class F>
bool raises_integrity(F&& f) {
  try {
    f();
  } catch (const IntegrityError&) {
    return true;
  } catch (...) {
    return false;
  }
  return false;
}

Outcome determinism(const fs::path& work) {
  // The desk setup shrunk so the whole pipeline runs twice in about a minute.
  auto cfg = desk_config();
  cfg.dataset.n_episodes = 40;
  cfg.train.steps = 300;
  cfg.train.checkpoint_every = 100;
  cfg.eval.episodes = 4;
  cfg.eval.curve_episodes = 2;
  const fs::path dir = work / "determinism";
  fs::remove_all(dir);
  harness::write_text(dir / "cfg.json", harness::dump(cfg));
  const std::string c = (dir / "cfg.json").string();
  for (const char* run : {"a", "b"}) {
    for (const char* stage : {"gen-dataset", "train", "eval", "plot-data"}) {
      if (cli({stage, "--config", c, "--out", (dir / run).string()}) != harness::kExitOk) {
        return {false, std::string("stage ") + stage + " failed"};
      }
    }
  }
  const auto files = tree(dir / "a");
  bool same = files == tree(dir / "b");
  int differing = 0;
  for (const auto& f : files) {
    if (read_bytes(dir / "a" / f) != read_bytes(dir / "b" / f)) ++differing;
  }
  same = same && differing == 0;

  const auto data = dataset::load(dir / "a" / "dataset");
  dataset::save(data, dir / "resaved");
  bool dataset_exact = true;
  for (const char* f : {"manifest.json", "episodes.bin"}) {
    dataset_exact = dataset_exact && read_bytes(dir / "a/dataset" / f) == read_bytes(dir / "resaved" / f);
  }
  const auto ckpt_path = harness::list_checkpoints({dir / "a"}).back().second;
  nn::save_checkpoint(dir / "resaved.ckpt", nn::load_checkpoint(ckpt_path));
  const bool ckpt_exact = read_bytes(ckpt_path) == read_bytes(dir / "resaved.ckpt");

  // Corruptions: a flipped payload byte, a truncated file, a foreign magic.
  auto episodes = read_bytes(dir / "resaved/episodes.bin");
  episodes[episodes.size() / 2] ^= 0x20;
  write_bytes(dir / "resaved/episodes.bin", episodes);
  bool structured = raises_integrity([&] { dataset::load(dir / "resaved"); });
  auto ckpt = read_bytes(ckpt_path);
  auto flipped = ckpt;
  flipped[flipped.size() / 2] ^= 0x01;
  write_bytes(dir / "bad.ckpt", flipped);
  structured = structured && raises_integrity([&] { nn::load_checkpoint(dir / "bad.ckpt"); });
  write_bytes(dir / "bad.ckpt", {ckpt.begin(), ckpt.begin() + static_cast<long>(ckpt.size() / 3)});
  structured = structured && raises_integrity([&] { nn::load_checkpoint(dir / "bad.ckpt"); });
  ckpt[0] ^= 0xFF;
  write_bytes(dir / "bad.ckpt", ckpt);
  structured = structured && raises_integrity([&] { nn::load_checkpoint(dir / "bad.ckpt"); });
  std::ostringstream out, err;
  const int code = harness::run_cli({"eval", "--config", c, "--out", (dir / "a").string(),
                                     "--checkpoint", (dir / "bad.ckpt").string()},
                                    out, err);
  structured = structured && code == harness::kExitIntegrity;

  return {same && dataset_exact && ckpt_exact && structured,
          fmt("%zu files compared across reruns, %d differ; dataset save/load/save exact=%d, "
              "checkpoint exact=%d; corrupted files raise integrity errors=%d (cli exit %d)",
              files.size(), differing, dataset_exact ? 1 : 0, ckpt_exact ? 1 : 0,
              structured ? 1 : 0, code)};
}

}  // namespace

int main(int argc, char** argv) {
  fs::path work = fs::temp_directory_path() / "auvhunt_acceptance";
  std::set<int> selected;
  for (int i = 1; i < argc; ++i) {
    const std::string a = argv[i];
    if (a == "--work" && i + 1 < argc) {
      work = argv[++i];
    } else {
      selected.insert(std::stoi(a));
    }
  }
  fs::create_directories(work);
  const auto want = [&](int n) { return selected.empty() || selected.count(n) > 0; };

  int failures = 0;
  const auto report = [&](int n, const std::function<Outcome()>& fn) {
    if (!want(n)) return;
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = fn();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    if (!o.pass) ++failures;
    std::printf("criterion %d: %s  %s  [%.1f s]\n", n, o.pass ? "PASS" : "FAIL", o.detail.c_str(),
                seconds_since(t0));
    std::fflush(stdout);
  };

  report(1, channel_golden);
  report(2, covert_budget);
  report(3, detector_optimality);
  report(6, diffusion_correctness);
  report(7, gradient_suite);
  report(8, inverse_dynamics);
  report(9, [&] { return determinism(work); });
  if (want(4) || want(5)) {
    const DeskRun desk = run_desk(work);
    report(4, [&] { return kl_property(desk); });
    report(5, [&] { return offline_improvement(desk); });
  }
  return failures == 0 ? 0 : 1;
}
