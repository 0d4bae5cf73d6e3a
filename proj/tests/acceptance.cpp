// Acceptance suite: one PASS/FAIL line per criterion, exit status 1 if any
// hard criterion fails. Criterion 5 is informational.

#include "lagrange_oracle.hpp"
#include "spinal/config.hpp"
#include "spinal/experiment.hpp"
#include "spinal/io.hpp"
#include "spinal/random.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <numeric>
#include <string>

using namespace spinal;

namespace {

int failures = 0;

void line(int id, const char* title, bool ok, const std::string& detail, bool report_only = false) {
  const char* tag = report_only ? "INFO" : (ok ? "PASS" : "FAIL");
  if (!ok && !report_only) ++failures;
  std::printf("[%s] %2d %-34s %s\n", tag, id, title, detail.c_str());
  std::fflush(stdout);
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

mulnet::NetworkInput random_input(std::mt19937_64& rng) {
  return mulnet::split_input({uniform(rng, -1.2, 1.2), uniform(rng, 1.5, 4.0), uniform(rng, -8, 8),
                              uniform(rng, 1.0, 3.14), uniform(rng, -8, 8)});
}

struct Run {
  grp::GrpModel hip, knee;
  experiment::EvalReport report;
  std::vector<experiment::Trajectory> traces;
  double train_s = 0.0, total_s = 0.0;
};

Run train_and_evaluate(const RunConfig& cfg) {
  const auto t0 = std::chrono::steady_clock::now();
  Run run;
  const auto demos = experiment::sample_tasks(cfg.ranges, cfg.demos, cfg.seeds.demo, cfg.sim.params);
  run.hip = grp::init(cfg.hip);
  run.knee = grp::init(cfg.knee);
  experiment::TrainingOptions opt;
  opt.episodes = cfg.episodes;
  experiment::train(run.hip, run.knee, demos, cfg.sim, opt);
  run.train_s = seconds_since(t0);
  const auto tasks =
      experiment::sample_tasks(cfg.ranges, cfg.eval_trajectories, cfg.seeds.eval, cfg.sim.params);
  run.report = experiment::evaluate(run.hip, run.knee, tasks, cfg.sim, &run.traces, cfg.active_threshold);
  run.total_s = seconds_since(t0);
  return run;
}

const experiment::LayerTrace& trace_of(const experiment::Trajectory& t, const std::string& name) {
  for (const auto& m : t.models)
    if (m.name == name) return m;
  throw std::logic_error("no trace for " + name);
}

void criterion1(const RunConfig& cfg) {
  const auto t0 = std::chrono::steady_clock::now();
  const auto tasks =
      experiment::sample_tasks(cfg.ranges, cfg.eval_trajectories, cfg.seeds.eval, cfg.sim.params);
  experiment::EvalReport r;
  for (const auto& t : tasks) r.trajectories.push_back(experiment::run_demo_episode(t, cfg.sim).outcome);
  experiment::summarize(r);
  const double s = seconds_since(t0);
  line(1, "target-controller fidelity",
       r.average_error_deg <= 4.0 && r.max_error_deg <= 8.0 && s < 10.0,
       fmt("avg %.2f deg (<= 4), max %.2f deg (<= 8), %.2f s (< 10)", r.average_error_deg,
           r.max_error_deg, s));
}

void criteria2to4(const Run& run) {
  const auto& r = run.report;
  line(2, "learned-model fidelity",
       r.average_error_deg <= 7.0 && r.max_error_deg <= 12.0 && run.total_s < 900.0,
       fmt("avg %.2f deg (<= 7), max %.2f deg (<= 12), %.1f s (< 900)", r.average_error_deg,
           r.max_error_deg, run.total_s));

  const auto& swing = run.traces.front();
  const auto& hip = trace_of(swing, "hip");
  std::size_t high = 0;
  for (std::size_t row = 0; row < swing.rows.size(); ++row) high += hip.at(row, 0, 1) > 0.9;
  const double frac = static_cast<double>(high) / static_cast<double>(swing.rows.size());
  line(3, "hip single-layer responsibility", frac >= 0.95,
       fmt("pi1 > 0.9 on %.1f%% of %zu steps (>= 95%%)", 100.0 * frac, swing.rows.size()));

  const auto& knee = trace_of(swing, "knee");
  std::vector<double> peak(static_cast<std::size_t>(knee.layers), 0.0);
  for (std::size_t row = 0; row < swing.rows.size(); ++row)
    for (int k = 0; k < knee.layers; ++k) peak[k] = std::max(peak[k], knee.at(row, k, 1));
  const auto over = std::count_if(peak.begin(), peak.end(), [](double p) { return p > 0.5; });
  std::string peaks;
  for (double p : peak) peaks += fmt(" %.3f", p);
  line(4, "knee switching (m = 3)", over >= 2,
       fmt("%td layers reach pi > 0.5 (>= 2); peaks%s", over, peaks.c_str()));
}

void criterion5(RunConfig cfg) {
  std::string detail;
  for (int m : {5, 7}) {
    cfg.knee.layers = m;
    const Run run = train_and_evaluate(cfg);
    std::string peaks;
    for (double p : run.report.knee_peak_responsibility) peaks += fmt(" %.3f", p);
    detail += fmt("m=%d: %d active (4 expected), peaks%s; ", m, run.report.knee_active, peaks.c_str());
  }
  line(5, "automatic selection (reported)", true, detail, true);
}

void criterion6() {
  auto rng = seeded_stream(600, 0);
  double worst = 0.0;
  for (int n = 0; n < 1000; ++n) {
    grp::GrpConfig c;
    c.layers = 1 + n % 7;
    c.seed = static_cast<std::uint64_t>(n);
    c.init_scale = uniform(rng, 0.01, 1.0);
    auto model = grp::init(c);
    model.gamma = std::pow(10.0, uniform(rng, -2, 3));
    const auto x = random_input(rng);
    const double r_G = uniform(rng, -150, 150);
    worst = std::max(worst, std::abs(grp::total_output_identity(model, x, r_G) - r_G));
  }
  line(6, "G_total identity", worst < 1e-12, fmt("max |G_total - r_G| = %.3g (< 1e-12)", worst));
}

void criterion7() {
  auto rng = seeded_stream(700, 0);
  double worst_sum = 0.0;
  bool ties = true, argmin = true;
  for (int n = 0; n < 10000; ++n) {
    const std::size_t m = 1 + static_cast<std::size_t>(n % 7);
    const double gamma = std::pow(10.0, uniform(rng, -4, 6));
    std::vector<double> e(m);
    for (double& v : e) v = uniform(rng, -200, 200);
    const auto r = grp::responsibility_reference(e, gamma);
    worst_sum = std::max(worst_sum, std::abs(std::accumulate(r.begin(), r.end(), 0.0) - 1.0));
    const auto best = static_cast<std::size_t>(
        std::min_element(e.begin(), e.end(), [](double a, double b) { return std::abs(a) < std::abs(b); }) -
        e.begin());
    for (double v : r) argmin &= r[best] >= v;
    std::vector<double> tied(m, uniform(rng, -50, 50));
    for (std::size_t k = 0; k < m; k += 2) tied[k] = -tied[k];
    for (double v : grp::responsibility_reference(tied, gamma)) ties &= std::abs(v - 1.0 / m) < 1e-15;
  }
  line(7, "responsibility softmax", worst_sum < 1e-12 && ties && argmin,
       fmt("max |sum - 1| = %.3g, ties uniform: %s, argmin max: %s", worst_sum, ties ? "yes" : "no",
           argmin ? "yes" : "no"));
}

void criterion8() {
  const auto t0 = std::chrono::steady_clock::now();
  double worst = 0.0;
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    auto rng = seeded_stream(seed, 800);
    mulnet::WeightMatrix w;
    for (double& v : w.a) v = uniform(rng, -0.5, 0.5);
    worst = std::max(worst, mulnet::finite_difference_check(w, random_input(rng), 1e-6));
  }
  const double s = seconds_since(t0);
  line(8, "gradient exactness", worst < 1e-6 && s < 5.0,
       fmt("max rel err %.3g (< 1e-6) over 100 instances, %.3f s (< 5)", worst, s));
}

void criterion9() {
  const dynamics::LegParams p;
  dynamics::LegState s;
  s.phi_h = dynamics::deg2rad(220);
  s.phi_k = dynamics::deg2rad(175);
  s.phi_h_dot = -2.0;
  s.phi_k_dot = -4.0;
  const double e0 = dynamics::total_energy(s, p);
  double drift = 0.0;
  for (int n = 0; n < 2000; ++n) {
    s = dynamics::integrate_step(s, {}, p, 1e-3);
    drift = std::max(drift, std::abs(dynamics::total_energy(s, p) - e0) / std::abs(e0));
  }

  auto rng = seeded_stream(900, 0);
  double worst = 0.0;
  for (int n = 0; n < 100; ++n) {
    dynamics::LegState q;
    q.phi_h = uniform(rng, dynamics::deg2rad(60), dynamics::deg2rad(300));
    q.phi_k = uniform(rng, dynamics::deg2rad(20), dynamics::deg2rad(179));
    q.phi_h_dot = uniform(rng, -8, 8);
    q.phi_k_dot = uniform(rng, -8, 8);
    const dynamics::JointTorques tau{uniform(rng, -150, 150), uniform(rng, -150, 150)};
    const auto a = dynamics::accelerations(q, tau, p);
    const auto o = oracle::accelerations(q, tau.tau_h, tau.tau_k, p);
    worst = std::max({worst, std::abs(a.phi_h_ddot - o[0]) / std::max(1.0, std::abs(o[0])),
                      std::abs(a.phi_k_ddot - o[1]) / std::max(1.0, std::abs(o[1]))});
  }

  dynamics::LegState eq;
  const auto a0 = dynamics::accelerations(eq, {}, p);
  const bool zero = a0.phi_h_ddot == 0.0 && a0.phi_k_ddot == 0.0;
  line(9, "dynamics oracles", drift < 1e-6 && worst < 1e-6 && zero,
       fmt("energy drift %.3g (< 1e-6), EL oracle rel err %.3g (< 1e-6), equilibrium %s", drift, worst,
           zero ? "exactly zero" : "NOT zero"));
}

void criterion10(const RunConfig& cfg, const Run& first) {
  const Run second = train_and_evaluate(cfg);
  const bool same = io::model_json(first.hip) == io::model_json(second.hip) &&
                    io::model_json(first.knee) == io::model_json(second.knee) &&
                    io::report_json(first.report) == io::report_json(second.report);
  bool traces = first.traces.size() == second.traces.size();
  for (std::size_t i = 0; traces && i < first.traces.size(); ++i)
    traces = io::trajectory_csv(first.traces[i]) == io::trajectory_csv(second.traces[i]);
  line(10, "determinism", same && traces,
       fmt("model files %s, report %s, trajectories %s",
           io::model_json(first.knee) == io::model_json(second.knee) ? "identical" : "DIFFER",
           io::report_json(first.report) == io::report_json(second.report) ? "identical" : "DIFFER",
           traces ? "identical" : "DIFFER"));
}

}  // namespace

int main() {
  const RunConfig cfg;
  std::printf("kernels: %s\n", std::string(simd::active_kernels().name).c_str());
  try {
    criterion1(cfg);
    const Run run = train_and_evaluate(cfg);
    criteria2to4(run);
    criterion5(cfg);
    criterion6();
    criterion7();
    criterion8();
    criterion9();
    criterion10(cfg, run);
  } catch (const std::exception& e) {
    std::printf("[FAIL] acceptance suite aborted: %s\n", e.what());
    return 1;
  }
  std::printf("%d hard criteria failed\n", failures);
  return failures == 0 ? 0 : 1;
}
