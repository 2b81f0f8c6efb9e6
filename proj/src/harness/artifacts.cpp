#include "auvhunt/harness/artifacts.hpp"

#include <charconv>
#include <fstream>
#include <map>
#include <sstream>

#include "auvhunt/errors.hpp"

namespace auvhunt::harness {

std::string csv_preamble(std::string_view kind, std::string_view hash, std::string_view columns) {
  std::string out = "# auvhunt ";
  out += kind;
  out += " v" + std::to_string(kCsvVersion) + "\n# config_hash ";
  out += hash;
  out += "\n";
  out += columns;
  out += "\n";
  return out;
}

std::string format_number(double v) {
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

void write_text(const std::filesystem::path& path, std::string_view text) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("cannot open " + path.string() + " for writing");
  out.write(text.data(), static_cast<std::streamsize>(text.size()));
  if (!out) throw Error("write failed: " + path.string());
}

std::string read_text(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open " + path.string());
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

std::string loss_csv(std::span<const amadp::LossRecord> losses, std::string_view hash) {
  std::string out = csv_preamble("loss", hash, "step,total,diffusion,inverse");
  for (const auto& r : losses) {
    out += std::to_string(r.step) + "," + format_number(r.total) + "," +
           format_number(r.diffusion) + "," + format_number(r.inverse) + "\n";
  }
  return out;
}

std::string kl_csv(const MetricsReport& report, std::string_view hash) {
  std::string out = csv_preamble("kl", hash, "t,mean_kl,episodes,kl_bound");
  for (std::size_t k = 0; k < report.kl_mean.size(); ++k) {
    out += std::to_string(k + 1) + "," + format_number(report.kl_mean[k]) + "," +
           std::to_string(report.kl_count[k]) + "," + format_number(report.kl_bound) + "\n";
  }
  return out;
}

std::string curve_csv(std::span<const CurvePoint> curve, std::string_view hash) {
  std::string out = csv_preamble("success_curve", hash, "step,success_rate,successes,episodes");
  for (const auto& p : curve) {
    out += std::to_string(p.step) + "," + format_number(p.success_rate) + "," +
           std::to_string(p.successes) + "," + std::to_string(p.episodes) + "\n";
  }
  return out;
}

std::string covert_csv(std::span<const covert::DetectionSnapshot> rows, double kl_bound,
                       std::string_view hash) {
  std::string out = csv_preamble("covert", hash,
                                 "distance_m,beta,noise_total_w,threshold_w,kl,kl_bound,covert_ok");
  for (const auto& s : rows) {
    out += format_number(s.distance_m) + "," + format_number(s.beta) + "," +
           format_number(s.noise_total_w) + "," + format_number(s.threshold_w) + "," +
           format_number(s.kl) + "," + format_number(kl_bound) + "," +
           (s.covert_ok ? "1" : "0") + "\n";
  }
  return out;
}

namespace {

constexpr std::string_view kTrajectoryColumns =
    "episode,seed,t,entity,x,y,psi,speed,cmd_theta,cmd_v,reward,kl,status";

void entity_row(std::string& out, std::size_t episode, std::uint64_t seed, int t,
                const std::string& entity, const kinematics::AgentState& a, const std::string& cmd,
                const std::string& tail) {
  out += std::to_string(episode) + "," + std::to_string(seed) + "," + std::to_string(t) + "," +
         entity + "," + format_number(a.pose.x) + "," + format_number(a.pose.y) + "," +
         format_number(a.pose.psi) + "," + format_number(a.speed) + "," + cmd + "," + tail + "\n";
}

std::vector<std::string_view> split(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  for (std::size_t i = 0; i <= line.size(); ++i) {
    if (i == line.size() || line[i] == ',') {
      out.push_back(line.substr(start, i - start));
      start = i + 1;
    }
  }
  return out;
}

template <typename T>
T parse_value(std::string_view s, int line_no) {
  T v{};
  const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc{} || res.ptr != s.data() + s.size()) {
    throw FormatError("trajectory csv line " + std::to_string(line_no) + ": bad number '" +
                      std::string(s) + "'");
  }
  return v;
}

}  // namespace

std::string trajectory_csv(std::span<const env::EpisodeTrace> traces, std::string_view hash) {
  std::string out = csv_preamble("trajectory", hash, kTrajectoryColumns);
  for (std::size_t e = 0; e < traces.size(); ++e) {
    const auto& tr = traces[e];
    auto emit = [&](int t, const env::WorldState& w, const env::TraceStep* st) {
      const std::string tail =
          st ? format_number(st->reward.total) + "," + format_number(st->snapshot.kl) + "," +
                   std::string(env::to_string(st->status))
             : std::string(",,running");
      for (std::size_t i = 0; i < w.hunters.size(); ++i) {
        const std::string cmd = st ? format_number(st->actions[i].theta) + "," +
                                         format_number(st->actions[i].v)
                                   : std::string(",");
        entity_row(out, e, tr.seed, t, "hunter" + std::to_string(i), w.hunters[i], cmd, tail);
      }
      entity_row(out, e, tr.seed, t, "target", w.target, ",", tail);
    };
    emit(0, tr.initial, nullptr);
    for (std::size_t k = 0; k < tr.steps.size(); ++k) {
      emit(static_cast<int>(k + 1), tr.steps[k].world, &tr.steps[k]);
    }
  }
  return out;
}

std::vector<TrajectoryEpisode> parse_trajectory_csv(std::string_view text) {
  std::map<int, TrajectoryEpisode> episodes;
  int line_no = 0;
  bool header_seen = false;
  std::size_t pos = 0;
  while (pos < text.size()) {
    std::size_t end = text.find('\n', pos);
    if (end == std::string_view::npos) end = text.size();
    const auto line = text.substr(pos, end - pos);
    pos = end + 1;
    ++line_no;
    if (line.empty() || line.front() == '#') continue;
    if (!header_seen) {
      if (line != kTrajectoryColumns) {
        throw FormatError("trajectory csv: unexpected header '" + std::string(line) + "'");
      }
      header_seen = true;
      continue;
    }
    const auto f = split(line);
    if (f.size() != 13) {
      throw FormatError("trajectory csv line " + std::to_string(line_no) + ": expected 13 fields");
    }
    const int ep = parse_value<int>(f[0], line_no);
    const int t = parse_value<int>(f[2], line_no);
    auto& rec = episodes[ep];
    rec.episode = ep;
    rec.seed = parse_value<std::uint64_t>(f[1], line_no);
    if (t == 0) continue;
    const auto step = static_cast<std::size_t>(t - 1);
    if (rec.actions.size() < step + 1) {
      rec.actions.resize(step + 1);
      rec.rewards.resize(step + 1);
    }
    rec.rewards[step] = parse_value<double>(f[10], line_no);
    if (f[3].rfind("hunter", 0) == 0) {
      rec.actions[step].push_back(
          {parse_value<double>(f[8], line_no), parse_value<double>(f[9], line_no)});
    }
  }
  if (!header_seen) throw FormatError("trajectory csv: missing header");
  std::vector<TrajectoryEpisode> out;
  for (auto& [_, e] : episodes) out.push_back(std::move(e));
  return out;
}

std::vector<double> replay_rewards(const env::EnvConfig& env_cfg, const TrajectoryEpisode& episode) {
  auto cfg = env_cfg;
  cfg.episode.seed = episode.seed;
  auto world = env::reset(cfg);
  std::vector<double> rewards;
  for (const auto& actions : episode.actions) {
    auto result = env::step(world, actions, cfg);
    rewards.push_back(result.rewards.front().total);
    world = std::move(result.world);
  }
  return rewards;
}

double trend_slope(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size() || x.size() < 2) {
    throw ValidationError("trend_slope: need at least two paired points");
  }
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= x.size();
  my /= y.size();
  double num = 0.0, den = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    num += (x[i] - mx) * (y[i] - my);
    den += (x[i] - mx) * (x[i] - mx);
  }
  if (den == 0.0) throw ValidationError("trend_slope: x values are all equal");
  return num / den;
}

}  // namespace auvhunt::harness
