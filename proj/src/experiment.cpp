#include "spinal/experiment.hpp"

#include "spinal/random.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace spinal::experiment {

using dynamics::JointTorques;
using dynamics::KinematicSnapshot;
using dynamics::LegState;

void SampleRanges::validate() const {
  if (!(alpha_tgt_min <= alpha_tgt_max)) throw std::invalid_argument("alpha_tgt range unordered");
  if (!(phi_h_dot0_min <= phi_h_dot0_max)) throw std::invalid_argument("phi_h_dot0 range unordered");
  if (!(phi_k_dot0_min <= phi_k_dot0_max)) throw std::invalid_argument("phi_k_dot0 range unordered");
}

double EpisodeOutcome::error_deg() const {
  return std::abs(dynamics::rad2deg(alpha_tgt - alpha_end));
}

std::vector<TaskSample> sample_tasks(const SampleRanges& ranges, int n, std::uint64_t seed,
                                     const dynamics::LegParams& params) {
  if (n < 1) throw std::invalid_argument("task count must be at least 1");
  ranges.validate();
  auto rng = seeded_stream(seed, 0x7461736bu);
  std::vector<TaskSample> tasks;
  tasks.reserve(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) {
    TaskSample s;
    s.task.alpha_tgt = uniform(rng, ranges.alpha_tgt_min, ranges.alpha_tgt_max);
    s.task.l_clr = ranges.l_clr;
    s.init.phi_h = ranges.phi_h0;
    s.init.phi_k = ranges.phi_k0;
    s.init.phi_h_dot = uniform(rng, ranges.phi_h_dot0_min, ranges.phi_h_dot0_max);
    s.init.phi_k_dot = uniform(rng, ranges.phi_k_dot0_min, ranges.phi_k_dot0_max);
    s.init.t = 0.0;
    // The swing starts with the foot on the ground.
    s.task.ground_y = dynamics::kinematics(s.init, params).foot_y;
    tasks.push_back(s);
  }
  return tasks;
}

mulnet::SensoryInput sense(const LegState& state, const KinematicSnapshot& kin,
                           const control::SwingTask& task) {
  return {kin.alpha - task.alpha_tgt, state.phi_h, state.phi_h_dot, state.phi_k, state.phi_k_dot};
}

Episode rollout(const TaskSample& sample, const SimulationConfig& sim, const TorqueSource& source) {
  if (!(sim.dt > 0.0) || !(sim.timeout > 0.0)) {
    throw std::invalid_argument("dt and timeout must be positive");
  }
  const auto max_steps = static_cast<std::size_t>(std::llround(sim.timeout / sim.dt));
  Episode ep;
  ep.outcome.alpha_tgt = sample.task.alpha_tgt;
  ep.trajectory.rows.reserve(std::min<std::size_t>(max_steps + 1, 4096));

  LegState state = sample.init;
  control::ControllerState events;
  for (std::size_t row = 0;; ++row) {
    const KinematicSnapshot kin = dynamics::kinematics(state, sim.params);
    events = control::advance_events(events, kin, sample.task, sim.gains, sim.params);
    const JointTorques torques = source(row, state, kin, events);
    ep.trajectory.rows.push_back({state, kin, torques, events.phase, events.contact});
    if (events.contact || row == max_steps) {
      ep.outcome.alpha_end = kin.alpha;
      ep.outcome.contact = events.contact;
      ep.outcome.timed_out = !events.contact;
      break;
    }
    try {
      state = dynamics::integrate_step(state, torques, sim.params, sim.dt);
    } catch (const dynamics::IntegrationError&) {
      // Only reachable with unbounded learned torques; the swing ends where it was.
      ep.outcome.alpha_end = kin.alpha;
      ep.outcome.integration_failed = true;
      break;
    }
  }
  return ep;
}

Episode run_demo_episode(const TaskSample& sample, const SimulationConfig& sim) {
  return rollout(sample, sim,
                 [&](std::size_t, const LegState& s, const KinematicSnapshot& kin,
                     const control::ControllerState& events) {
                   return control::policy_torques(s, kin, events, sample.task, sim.gains,
                                                  sim.params);
                 });
}

namespace {

void append_record(LayerTrace& trace, const grp::StepRecord& rec) {
  for (std::size_t k = 0; k < rec.generator.size(); ++k) {
    trace.cells.push_back(rec.generator[k]);
    trace.cells.push_back(rec.responsibility[k]);
    trace.cells.push_back(rec.reference[k]);
  }
}

void append_outputs(LayerTrace& trace, const grp::LayerOutputs& out) {
  for (std::size_t k = 0; k < out.generator.size(); ++k) {
    trace.cells.push_back(out.generator[k]);
    trace.cells.push_back(out.responsibility[k]);
    trace.cells.push_back(std::numeric_limits<double>::quiet_NaN());
  }
}

struct ErrorAccumulator {
  std::vector<double> per_layer;
  double responsible = 0.0;
  std::size_t steps = 0;

  explicit ErrorAccumulator(int m) : per_layer(static_cast<std::size_t>(m), 0.0) {}

  void add(const grp::StepRecord& rec) {
    std::size_t best = 0;
    for (std::size_t k = 0; k < per_layer.size(); ++k) {
      per_layer[k] += std::abs(rec.generator_error[k]);
      if (rec.reference[k] > rec.reference[best]) best = k;
    }
    responsible += std::abs(rec.generator_error[best]);
    ++steps;
  }

  void finish(std::vector<std::vector<double>>& layers, std::vector<double>& resp) const {
    const double n = steps ? static_cast<double>(steps) : 1.0;
    std::vector<double> mean(per_layer);
    for (double& v : mean) v /= n;
    layers.push_back(std::move(mean));
    resp.push_back(responsible / n);
  }
};

}  // namespace

Episode train_episode(grp::GrpModel& hip, grp::GrpModel& knee, const TaskSample& sample,
                      const SimulationConfig& sim, TrainingLog* log) {
  LayerTrace hip_trace{"hip", hip.size(), {}};
  LayerTrace knee_trace{"knee", knee.size(), {}};
  ErrorAccumulator hip_err(hip.size()), knee_err(knee.size());

  Episode ep = rollout(sample, sim,
                       [&](std::size_t, const LegState& s, const KinematicSnapshot& kin,
                           const control::ControllerState& events) {
                         const JointTorques demo = control::policy_torques(
                             s, kin, events, sample.task, sim.gains, sim.params);
                         const auto x = mulnet::split_input(sense(s, kin, sample.task));
                         const auto hip_rec = grp::learn_step(hip, x, demo.tau_h);
                         const auto knee_rec = grp::learn_step(knee, x, demo.tau_k);
                         append_record(hip_trace, hip_rec);
                         append_record(knee_trace, knee_rec);
                         hip_err.add(hip_rec);
                         knee_err.add(knee_rec);
                         return demo;
                       });
  grp::end_episode(hip);
  grp::end_episode(knee);
  if (log) {
    hip_err.finish(log->hip_error, log->hip_responsible_error);
    knee_err.finish(log->knee_error, log->knee_responsible_error);
  }
  ep.trajectory.models.push_back(std::move(hip_trace));
  ep.trajectory.models.push_back(std::move(knee_trace));
  return ep;
}

TrainingLog train(grp::GrpModel& hip, grp::GrpModel& knee, const std::vector<TaskSample>& demos,
                  const SimulationConfig& sim, const TrainingOptions& options) {
  if (options.episodes < 1) throw std::invalid_argument("episodes must be at least 1");
  if (demos.empty()) throw std::invalid_argument("no demonstrations to train on");
  TrainingLog log;
  for (int e = 0; e < options.episodes; ++e) {
    train_episode(hip, knee, demos[static_cast<std::size_t>(e) % demos.size()], sim, &log);
    if (options.progress && !options.progress(e)) break;
  }
  return log;
}

void summarize(EvalReport& report) {
  double sum = 0.0;
  double worst = 0.0;
  for (const auto& t : report.trajectories) {
    sum += t.error_deg();
    worst = std::max(worst, t.error_deg());
  }
  report.average_error_deg =
      report.trajectories.empty() ? 0.0 : sum / static_cast<double>(report.trajectories.size());
  report.max_error_deg = worst;
}

EvalReport evaluate(const grp::GrpModel& hip, const grp::GrpModel& knee,
                    const std::vector<TaskSample>& tasks, const SimulationConfig& sim,
                    std::vector<Trajectory>* trajectories, double active_threshold) {
  EvalReport report;
  report.active_threshold = active_threshold;
  std::vector<Trajectory> traces;
  traces.reserve(tasks.size());
  for (const auto& sample : tasks) {
    LayerTrace hip_trace{"hip", hip.size(), {}};
    LayerTrace knee_trace{"knee", knee.size(), {}};
    Episode ep = rollout(sample, sim,
                         [&](std::size_t, const LegState& s, const KinematicSnapshot& kin,
                             const control::ControllerState&) {
                           const auto x = mulnet::split_input(sense(s, kin, sample.task));
                           const auto h = grp::forward(hip, x);
                           const auto k = grp::forward(knee, x);
                           append_outputs(hip_trace, h);
                           append_outputs(knee_trace, k);
                           return JointTorques{h.tau_out, k.tau_out};
                         });
    ep.trajectory.models.push_back(std::move(hip_trace));
    ep.trajectory.models.push_back(std::move(knee_trace));
    report.trajectories.push_back(ep.outcome);
    traces.push_back(std::move(ep.trajectory));
  }
  summarize(report);
  report.hip_peak_responsibility = peak_responsibility(traces, "hip");
  report.knee_peak_responsibility = peak_responsibility(traces, "knee");
  report.hip_active = active_generator_count(traces, "hip", active_threshold);
  report.knee_active = active_generator_count(traces, "knee", active_threshold);
  if (trajectories) *trajectories = std::move(traces);
  return report;
}

std::vector<double> peak_responsibility(const std::vector<Trajectory>& trajectories,
                                        const std::string& model) {
  std::vector<double> peak;
  for (const auto& traj : trajectories) {
    for (const auto& trace : traj.models) {
      if (trace.name != model) continue;
      peak.resize(std::max(peak.size(), static_cast<std::size_t>(trace.layers)), 0.0);
      for (std::size_t row = 0; row < traj.rows.size(); ++row) {
        for (int k = 0; k < trace.layers; ++k) {
          peak[static_cast<std::size_t>(k)] =
              std::max(peak[static_cast<std::size_t>(k)], trace.at(row, k, 1));
        }
      }
    }
  }
  return peak;
}

int active_generator_count(const std::vector<Trajectory>& trajectories, const std::string& model,
                           double threshold) {
  if (!(threshold > 0.0 && threshold <= 1.0)) {
    throw std::invalid_argument("responsibility threshold must lie in (0, 1]");
  }
  const auto peak = peak_responsibility(trajectories, model);
  return static_cast<int>(
      std::count_if(peak.begin(), peak.end(), [&](double p) { return p > threshold; }));
}

std::vector<LayerWeightSummary> weight_summary(const grp::GrpModel& model) {
  std::vector<LayerWeightSummary> out;
  for (const auto& layer : model.layers) {
    LayerWeightSummary s;
    s.generator = layer.generator;
    s.predictor = layer.predictor;
    for (std::size_t c = 0; c < simd::kCells; ++c) {
      s.generator_norm += layer.generator.a[c] * layer.generator.a[c];
      s.predictor_norm += layer.predictor.a[c] * layer.predictor.a[c];
      s.generator_max_abs = std::max(s.generator_max_abs, std::abs(layer.generator.a[c]));
      s.predictor_max_abs = std::max(s.predictor_max_abs, std::abs(layer.predictor.a[c]));
    }
    s.generator_norm = std::sqrt(s.generator_norm);
    s.predictor_norm = std::sqrt(s.predictor_norm);
    out.push_back(s);
  }
  return out;
}

}  // namespace spinal::experiment
