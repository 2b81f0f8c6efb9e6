#include "auvhunt/harness/cli.hpp"

#include <CLI11.hpp>

#include <cstdio>
#include <iomanip>

#include "auvhunt/errors.hpp"
#include "auvhunt/harness/pipeline.hpp"

namespace auvhunt::harness {

namespace fs = std::filesystem;

namespace {

RunConfig config_from(const std::string& path) {
  return path.empty() ? RunConfig{} : load_config(path);
}

void save_config(const RunConfig& cfg, const RunLayout& layout) {
  write_text(layout.config(), dump(cfg) + "\n");
}

fs::path latest_checkpoint(const RunLayout& layout, const std::string& stage) {
  const auto all = list_checkpoints(layout);
  if (all.empty()) {
    throw MissingArtifactError("checkpoint under " + layout.checkpoints().string() +
                                   " (run train first or pass --checkpoint)",
                               stage);
  }
  return all.back().second;
}

std::string fixed(double v, int digits = 4) {
  std::ostringstream os;
  os << std::fixed << std::setprecision(digits) << v;
  return os.str();
}

int covert_check(const RunConfig& cfg, const std::optional<double>& distance,
                 const std::vector<double>& sweep, const std::string& out_file, std::ostream& out) {
  const auto& w = cfg.env.world;
  const double noise = w.ambient_noise_w();
  auto eval = [&](double d) {
    return covert::evaluate_link(d, w.covert, w.channel, noise, w.min_link_distance_m);
  };
  std::vector<covert::DetectionSnapshot> rows;
  if (distance) {
    if (!(*distance > 0.0)) throw ValidationError("covert-check: --distance must be > 0");
    rows.push_back(eval(*distance));
  } else {
    const double lo = sweep[0], hi = sweep[1];
    const double n_raw = sweep[2];
    if (!(lo > 0.0 && hi > lo)) throw ValidationError("covert-check: --sweep needs 0 < dmin < dmax");
    if (!(n_raw >= 2.0) || n_raw != static_cast<int>(n_raw)) {
      throw ValidationError("covert-check: --sweep n must be an integer >= 2");
    }
    const int n = static_cast<int>(n_raw);
    for (int i = 0; i < n; ++i) rows.push_back(eval(lo + (hi - lo) * i / (n - 1)));
  }
  const std::string csv = covert_csv(rows, w.covert.kl_bound(), config_hash(cfg));
  if (!out_file.empty()) write_text(out_file, csv);
  if (rows.size() == 1 || out_file.empty()) {
    out << "distance_m beta noise_total_w threshold_w kl covert\n";
    for (const auto& r : rows) {
      out << fixed(r.distance_m, 1) << " " << r.beta << " " << r.noise_total_w << " "
          << r.threshold_w << " " << r.kl << " " << (r.covert_ok ? "yes" : "no") << "\n";
    }
  } else {
    out << "wrote " << rows.size() << " rows to " << out_file << "\n";
  }
  return 0;
}

void write_report(const MetricsReport& report, const std::vector<env::EpisodeTrace>& traces,
                  const RunConfig& cfg, const RunLayout& layout, int trajectory_episodes) {
  const auto hash = config_hash(cfg);
  write_text(layout.metrics(), to_json(report).dump(2) + "\n");
  write_text(layout.kl_csv(), kl_csv(report, hash));
  const auto n = std::min<std::size_t>(traces.size(), static_cast<std::size_t>(trajectory_episodes));
  write_text(layout.trajectory_csv(),
             trajectory_csv(std::span(traces).subspan(0, n), hash));
}

void print_summary(const MetricsReport& r, std::ostream& out) {
  out << r.policy << ": success " << r.successes << "/" << r.episodes << " ("
      << fixed(r.success_rate, 3) << "), mean length " << fixed(r.mean_length, 1)
      << ", covert violations " << fixed(r.violation_fraction, 3) << ", collisions "
      << r.collision_count << "\n";
}

}  // namespace

int exit_code_for(const std::exception& e) {
  if (dynamic_cast<const IntegrityError*>(&e)) return kExitIntegrity;
  if (dynamic_cast<const ValidationError*>(&e)) return kExitValidation;
  return kExitRuntime;
}

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Covert multi-AUV hunting: simulation, offline datasets and diffusion policies"};
  app.require_subcommand(0, 1);
  bool print_defaults = false;
  bool print_schema = false;
  app.add_flag("--print-defaults", print_defaults, "Print the default configuration as JSON");
  app.add_flag("--print-schema", print_schema, "List every configuration key");

  std::string config_path;
  std::string out_dir;
  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--config", config_path, "Run configuration (JSON)");
    sub->add_option("--out", out_dir, "Output directory (default $AUVHUNT_OUT_DIR or ./auvhunt_out)");
  };

  auto* covert_cmd = app.add_subcommand("covert-check", "Link budget and covertness verdicts");
  std::optional<double> distance;
  std::vector<double> sweep;
  std::string csv_out;
  covert_cmd->add_option("--config", config_path, "Run configuration (JSON)");
  auto* dist_opt = covert_cmd->add_option("--distance", distance, "Hunter-target distance (m)");
  auto* sweep_opt =
      covert_cmd->add_option("--sweep", sweep, "dmin dmax n: evenly spaced distances (m)")
          ->expected(3);
  dist_opt->excludes(sweep_opt);
  covert_cmd->add_option("--out", csv_out, "CSV file for the results");

  auto* sim_cmd = app.add_subcommand("simulate", "Run scripted-policy episodes");
  add_common(sim_cmd);
  std::string policy_name = "pursuit";
  int episodes = -1;
  std::optional<std::uint64_t> seed;
  sim_cmd->add_option("--policy", policy_name, "pursuit | encircle | noisy");
  sim_cmd->add_option("--episodes", episodes, "Number of episodes")->required();
  sim_cmd->add_option("--seed", seed, "Root seed (overrides the config)");

  auto* gen_cmd = app.add_subcommand("gen-dataset", "Generate the offline dataset");
  add_common(gen_cmd);

  auto* train_cmd = app.add_subcommand("train", "Train the diffusion policy");
  add_common(train_cmd);
  std::string dataset_dir;
  train_cmd->add_option("--dataset", dataset_dir, "Dataset directory (default OUT/dataset)");

  auto* eval_cmd = app.add_subcommand("eval", "Evaluate a trained checkpoint");
  add_common(eval_cmd);
  std::string checkpoint;
  eval_cmd->add_option("--checkpoint", checkpoint, "Checkpoint (default: latest in OUT)");
  eval_cmd->add_option("--episodes", episodes, "Episodes (default eval.episodes)");

  auto* plot_cmd = app.add_subcommand("plot-data", "Emit trajectory, KL and success-curve CSVs");
  add_common(plot_cmd);
  std::string plot_policy = "amadp";
  plot_cmd->add_option("--checkpoint", checkpoint, "Checkpoint (default: latest in OUT)");
  plot_cmd->add_option("--policy", plot_policy, "amadp | pursuit | encircle | noisy");

  std::vector<std::string> argv_rev(args.rbegin(), args.rend());
  try {
    app.parse(argv_rev);
  } catch (const CLI::CallForHelp& e) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::CallForAllHelp& e) {
    out << app.help("", CLI::AppFormatMode::All);
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n";
    return kExitValidation;
  }

  try {
    if (print_defaults) {
      out << dump(RunConfig{}) << "\n";
      return kExitOk;
    }
    if (print_schema) {
      for (const auto& f : schema()) {
        out << f.path << " (" << f.type << ", default " << f.default_value.dump() << "): " << f.doc
            << "\n";
      }
      return kExitOk;
    }
    if (app.get_subcommands().empty()) {
      out << app.help();
      return kExitValidation;
    }

    RunConfig cfg = config_from(config_path);
    const RunLayout layout{output_dir(out_dir)};

    if (covert_cmd->parsed()) {
      if (!distance && sweep.empty()) {
        throw ValidationError("covert-check: pass --distance d or --sweep dmin dmax n");
      }
      return covert_check(cfg, distance, sweep, csv_out, out);
    }

    if (sim_cmd->parsed()) {
      if (episodes < 1) throw ValidationError("simulate: --episodes must be >= 1");
      if (seed) cfg.seed = *seed;
      cfg.validate();
      const auto policy = behavior::policy_from_string(policy_name);
      const auto traces = evaluate_scripted(cfg, policy, episodes, seeds(cfg).simulate);
      auto report = summarize(traces, cfg.env, policy_name);
      report.config_hash = config_hash(cfg);
      save_config(cfg, layout);
      write_report(report, traces, cfg, layout, episodes);
      print_summary(report, out);
      return kExitOk;
    }

    if (gen_cmd->parsed()) {
      const auto data = generate_dataset(cfg);
      dataset::save(data, layout.dataset());
      save_config(cfg, layout);
      out << "dataset: " << data.manifest.episode_count << " episodes, success fraction "
          << fixed(data.manifest.success_fraction, 3) << " -> " << layout.dataset().string()
          << "\n";
      return kExitOk;
    }

    if (train_cmd->parsed()) {
      cfg.validate();
      const auto data =
          require_dataset(dataset_dir.empty() ? layout.dataset() : fs::path(dataset_dir), "train");
      const auto result = train_stage(cfg, data, layout);
      save_config(cfg, layout);
      const auto& last = result.losses.back();
      out << "trained " << last.step << " steps, final loss " << fixed(last.total) << " -> "
          << result.checkpoints.back().second.string() << "\n";
      return kExitOk;
    }

    if (eval_cmd->parsed()) {
      cfg.validate();
      const fs::path ckpt = checkpoint.empty() ? latest_checkpoint(layout, "eval") : fs::path(checkpoint);
      const auto policy = require_policy(ckpt, "eval");
      const int n = episodes > 0 ? episodes : cfg.eval.episodes;
      const auto traces = evaluate_policy(cfg, policy, n);
      auto report = summarize(traces, cfg.env, "amadp");
      report.config_hash = config_hash(cfg);
      // Relative to the run directory so relocated reruns stay byte-identical.
      if (fs::exists(layout.loss_csv())) report.loss_curve = layout.loss_csv().filename().string();
      write_report(report, traces, cfg, layout, cfg.eval.trajectory_episodes);
      print_summary(report, out);
      return kExitOk;
    }

    if (plot_cmd->parsed()) {
      cfg.validate();
      const auto hash = config_hash(cfg);
      std::vector<env::EpisodeTrace> traces;
      if (plot_policy == "amadp") {
        const fs::path ckpt =
            checkpoint.empty() ? latest_checkpoint(layout, "plot-data") : fs::path(checkpoint);
        traces = evaluate_policy(cfg, require_policy(ckpt, "plot-data"), cfg.eval.episodes);
        const auto curve = success_curve(cfg, list_checkpoints(layout));
        write_text(layout.curve_csv(), curve_csv(curve, hash));
        out << "success curve: " << curve.size() << " checkpoints -> "
            << layout.curve_csv().string() << "\n";
      } else {
        traces = evaluate_scripted(cfg, behavior::policy_from_string(plot_policy), cfg.eval.episodes,
                                   seeds(cfg).eval);
      }
      const auto report = summarize(traces, cfg.env, plot_policy);
      write_text(layout.kl_csv(), kl_csv(report, hash));
      const auto n = std::min<std::size_t>(traces.size(), cfg.eval.trajectory_episodes);
      write_text(layout.trajectory_csv(), trajectory_csv(std::span(traces).subspan(0, n), hash));
      out << "kl: " << report.kl_mean.size() << " timesteps over " << report.episodes
          << " episodes -> " << layout.kl_csv().string() << "\n";
      out << "trajectory: " << n << " episodes -> " << layout.trajectory_csv().string() << "\n";
      return kExitOk;
    }
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return exit_code_for(e);
  }
  return kExitOk;
}

}  // namespace auvhunt::harness
