// spinal_cli: demonstrations, GRP training, reference-free evaluation,
// gradient check, and weight dumps.

#include "spinal/config.hpp"
#include "spinal/experiment.hpp"
#include "spinal/io.hpp"
#include "spinal/mulnet.hpp"
#include "spinal/random.hpp"
#include "spinal/simd/kernels.hpp"

#include "CLI11.hpp"
#include "json.hpp"

#include <cstdio>
#include <filesystem>
#include <iostream>
#include <optional>

namespace fs = std::filesystem;
using namespace spinal;

namespace {

struct Common {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::optional<int> layers;
  std::optional<int> episodes;
  std::optional<int> n;
  std::string out = "out";
};

void add_common(CLI::App* app, Common& c) {
  app->add_option("--config", c.config, "JSON run configuration")->check(CLI::ExistingFile);
  app->add_option("--seed", c.seed, "Seed: demos and init use it, evaluation uses seed + 1");
  app->add_option("--layers", c.layers, "Knee GRP layer count")->check(CLI::PositiveNumber);
  app->add_option("--episodes", c.episodes, "Training episodes")->check(CLI::PositiveNumber);
  app->add_option("--out", c.out, "Output directory");
}

RunConfig resolve(const Common& c) {
  RunConfig cfg = c.config.empty() ? RunConfig{} : load_run_config(c.config);
  if (c.seed) {
    cfg.seeds.demo = *c.seed;
    cfg.seeds.init = *c.seed;
    cfg.seeds.eval = *c.seed + 1;
  }
  if (c.layers) cfg.knee.layers = *c.layers;
  if (c.episodes) cfg.episodes = *c.episodes;
  cfg.apply_seeds();
  cfg.validate();
  return cfg;
}

std::string numbered(const std::string& stem, std::size_t i) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%s_%03zu.csv", stem.c_str(), i);
  return buf;
}

int cmd_demo(const Common& c) {
  RunConfig cfg = resolve(c);
  const int n = c.n.value_or(cfg.demos);
  fs::create_directories(c.out);
  const auto tasks = experiment::sample_tasks(cfg.ranges, n, cfg.seeds.demo, cfg.sim.params);
  experiment::EvalReport report;
  nlohmann::json files = nlohmann::json::array();
  for (std::size_t i = 0; i < tasks.size(); ++i) {
    const auto ep = experiment::run_demo_episode(tasks[i], cfg.sim);
    const std::string name = numbered("demo", i);
    io::write_trajectory((fs::path(c.out) / name).string(), ep.trajectory);
    report.trajectories.push_back(ep.outcome);
    files.push_back({{"file", name},
                     {"alpha_tgt_deg", dynamics::rad2deg(tasks[i].task.alpha_tgt)},
                     {"phi_h_dot0", tasks[i].init.phi_h_dot},
                     {"phi_k_dot0", tasks[i].init.phi_k_dot},
                     {"ground_y", tasks[i].task.ground_y},
                     {"error_deg", ep.outcome.error_deg()},
                     {"timed_out", ep.outcome.timed_out}});
  }
  experiment::summarize(report);
  const nlohmann::json manifest = {{"seed", cfg.seeds.demo},
                                   {"count", n},
                                   {"average_error_deg", report.average_error_deg},
                                   {"max_error_deg", report.max_error_deg},
                                   {"trajectories", files}};
  io::write_text((fs::path(c.out) / "manifest.json").string(), manifest.dump(2) + "\n");
  std::cout << "wrote " << n << " demonstrations to " << c.out << "; landing error avg "
            << report.average_error_deg << " deg, max " << report.max_error_deg << " deg\n";
  return 0;
}

int cmd_train(const Common& c) {
  RunConfig cfg = resolve(c);
  fs::create_directories(c.out);
  const auto demos =
      experiment::sample_tasks(cfg.ranges, c.n.value_or(cfg.demos), cfg.seeds.demo, cfg.sim.params);
  auto hip = grp::init(cfg.hip);
  auto knee = grp::init(cfg.knee);
  experiment::TrainingOptions options;
  options.episodes = cfg.episodes - 1;
  experiment::TrainingLog log;
  if (options.episodes > 0) log = experiment::train(hip, knee, demos, cfg.sim, options);
  // The final episode is traced so the learned responsibilities can be inspected.
  const auto last = experiment::train_episode(
      hip, knee, demos[static_cast<std::size_t>(cfg.episodes - 1) % demos.size()], cfg.sim, &log);
  io::write_model((fs::path(c.out) / "hip_model.json").string(), hip);
  io::write_model((fs::path(c.out) / "knee_model.json").string(), knee);
  io::write_training_log((fs::path(c.out) / "training_log.csv").string(), log);
  io::write_trajectory((fs::path(c.out) / "train_trace.csv").string(), last.trajectory);
  io::write_text((fs::path(c.out) / "config.json").string(), dump_run_config(cfg));
  std::cout << "trained " << cfg.episodes << " episodes (hip m = " << cfg.hip.layers
            << ", knee m = " << cfg.knee.layers << "); final responsible |e_G| hip "
            << log.hip_responsible_error.back() << ", knee " << log.knee_responsible_error.back()
            << "\n";
  return 0;
}

int cmd_eval(const Common& c, const std::string& models_dir) {
  RunConfig cfg = resolve(c);
  const std::string dir = models_dir.empty() ? c.out : models_dir;
  const auto hip = io::read_model((fs::path(dir) / "hip_model.json").string());
  const auto knee = io::read_model((fs::path(dir) / "knee_model.json").string());
  fs::create_directories(c.out);
  const auto tasks = experiment::sample_tasks(cfg.ranges, c.n.value_or(cfg.eval_trajectories),
                                              cfg.seeds.eval, cfg.sim.params);
  std::vector<experiment::Trajectory> traces;
  const auto report =
      experiment::evaluate(hip, knee, tasks, cfg.sim, &traces, cfg.active_threshold);
  for (std::size_t i = 0; i < traces.size(); ++i) {
    io::write_trajectory((fs::path(c.out) / numbered("eval", i)).string(), traces[i]);
  }
  io::write_report((fs::path(c.out) / "report.json").string(), report);
  std::cout << "evaluated " << tasks.size() << " tasks: average error " << report.average_error_deg
            << " deg, max " << report.max_error_deg << " deg; active generators hip "
            << report.hip_active << ", knee " << report.knee_active << "\n";
  return 0;
}

int cmd_gradcheck(const Common& c, double h) {
  const int n = c.n.value_or(100);
  const std::uint64_t seed = c.seed.value_or(1);
  double worst = 0.0;
  for (int i = 0; i < n; ++i) {
    auto rng = seeded_stream(seed, static_cast<std::uint64_t>(i));
    mulnet::WeightMatrix w;
    for (double& v : w.a) v = uniform(rng, -0.5, 0.5);
    mulnet::NetworkInput x;
    for (double& v : x.v) v = uniform(rng, 0.0, 2.0);
    worst = std::max(worst, mulnet::finite_difference_check(w, x, h));
  }
  const bool ok = worst < 1e-6;
  std::cout << "gradcheck: " << n << " instances, h = " << h << ", kernels "
            << simd::active_kernels().name << ", max relative error " << worst
            << (ok ? " (ok)" : " (FAILED, limit 1e-6)") << "\n";
  return ok ? 0 : 1;
}

int cmd_dump_weights(const Common& c, const std::string& models_dir) {
  const std::string dir = models_dir.empty() ? c.out : models_dir;
  fs::create_directories(c.out);
  for (const char* which : {"hip", "knee"}) {
    const auto model = io::read_model((fs::path(dir) / (std::string(which) + "_model.json")).string());
    io::write_text((fs::path(c.out) / (std::string(which) + "_weights.json")).string(),
                   io::weight_summary_json(model));
    const auto summary = experiment::weight_summary(model);
    for (std::size_t k = 0; k < summary.size(); ++k) {
      std::printf("%-4s layer %zu  |W| %-12.6g max|W| %-12.6g |R| %-12.6g max|R| %.6g\n", which,
                  k + 1, summary[k].generator_norm, summary[k].generator_max_abs,
                  summary[k].predictor_norm, summary[k].predictor_max_abs);
    }
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Generator/Responsibility-Predictor learning of a swing-leg controller"};
  app.require_subcommand(1);
  Common common;
  std::string models_dir;
  double h = 1e-6;

  auto* demo = app.add_subcommand("demo", "Generate demonstration trajectories");
  add_common(demo, common);
  demo->add_option("--n", common.n, "Number of demonstrations")->check(CLI::PositiveNumber);

  auto* train = app.add_subcommand("train", "Train hip and knee GRP models");
  add_common(train, common);
  train->add_option("--n", common.n, "Number of demonstrations")->check(CLI::PositiveNumber);

  auto* eval = app.add_subcommand("eval", "Reference-free evaluation of trained models");
  add_common(eval, common);
  eval->add_option("--n", common.n, "Number of evaluation tasks")->check(CLI::PositiveNumber);
  eval->add_option("--models", models_dir, "Directory holding the model files (default: --out)");

  auto* grad = app.add_subcommand("gradcheck", "Finite-difference check of network gradients");
  add_common(grad, common);
  grad->add_option("--n", common.n, "Random instances")->check(CLI::PositiveNumber);
  grad->add_option("--step", h, "Central-difference step")->check(CLI::PositiveNumber);

  auto* dump = app.add_subcommand("dump-weights", "Per-layer weight summary of trained models");
  add_common(dump, common);
  dump->add_option("--models", models_dir, "Directory holding the model files (default: --out)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }

  try {
    if (*demo) return cmd_demo(common);
    if (*train) return cmd_train(common);
    if (*eval) return cmd_eval(common, models_dir);
    if (*grad) return cmd_gradcheck(common, h);
    if (*dump) return cmd_dump_weights(common, models_dir);
  } catch (const grp::ConfigError& e) {
    std::cerr << "error: invalid configuration: " << e.what() << "\n";
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 1;
}
