#pragma once

// Demonstration generation, online GRP training against the target
// controller, and reference-free evaluation of the learned models.

#include "spinal/dynamics.hpp"
#include "spinal/grp_model.hpp"
#include "spinal/mulnet.hpp"
#include "spinal/target_controller.hpp"

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

namespace spinal::experiment {

struct SampleRanges {
  double alpha_tgt_min = dynamics::deg2rad(50.0);
  double alpha_tgt_max = dynamics::deg2rad(85.0);
  double phi_h_dot0_min = -4.0;
  double phi_h_dot0_max = 0.0;
  double phi_k_dot0_min = -7.0;
  double phi_k_dot0_max = -1.0;
  double phi_h0 = dynamics::deg2rad(220.0);
  double phi_k0 = dynamics::deg2rad(175.0);
  double l_clr = 0.05;

  void validate() const;
};

struct SimulationConfig {
  dynamics::LegParams params;
  control::ControllerGains gains;
  double dt = 1e-3;
  double timeout = 2.0;
};

struct TaskSample {
  control::SwingTask task;
  dynamics::LegState init;
};

struct TrajectoryRow {
  dynamics::LegState state;
  dynamics::KinematicSnapshot kin;
  dynamics::JointTorques torques;
  control::Phase phase = control::Phase::Flexion;
  bool contact = false;
};

/// Per-layer (G^k, pi^k, r^k) for one GRP model, one entry per trajectory row.
/// r^k is NaN where no reference signal exists (evaluation).
struct LayerTrace {
  std::string name;
  int layers = 0;
  std::vector<double> cells;  // row-major: row, layer, {G, pi, r}

  double at(std::size_t row, int layer, int field) const {
    return cells[(row * static_cast<std::size_t>(layers) + static_cast<std::size_t>(layer)) * 3 +
                 static_cast<std::size_t>(field)];
  }
};

struct Trajectory {
  std::vector<TrajectoryRow> rows;
  std::vector<LayerTrace> models;
};

struct EpisodeOutcome {
  double alpha_tgt = 0.0;
  double alpha_end = 0.0;
  bool contact = false;
  bool timed_out = false;
  bool integration_failed = false;  // the plant could not be advanced

  double error_deg() const;
};

struct Episode {
  Trajectory trajectory;
  EpisodeOutcome outcome;
};

std::vector<TaskSample> sample_tasks(const SampleRanges& ranges, int n, std::uint64_t seed,
                                     const dynamics::LegParams& params);

mulnet::SensoryInput sense(const dynamics::LegState& state, const dynamics::KinematicSnapshot& kin,
                           const control::SwingTask& task);

/// Torques for the current tick. Row index, state, and kinematics are given;
/// the rollout handles events and integration.
using TorqueSource = std::function<dynamics::JointTorques(
    std::size_t row, const dynamics::LegState&, const dynamics::KinematicSnapshot&,
    const control::ControllerState&)>;

/// Fixed-step rollout from `sample.init` until contact, timeout, or an
/// integration failure (flagged on the outcome, last good row kept). The
/// target controller's event detector labels phases and decides contact for
/// every torque source.
Episode rollout(const TaskSample& sample, const SimulationConfig& sim, const TorqueSource& source);

Episode run_demo_episode(const TaskSample& sample, const SimulationConfig& sim);

struct TrainingLog {
  // Per episode: mean |e_G^k| over the swing, one entry per layer.
  std::vector<std::vector<double>> hip_error;
  std::vector<std::vector<double>> knee_error;
  // Per episode: mean |e_G| of the layer with the largest reference
  // responsibility at each step.
  std::vector<double> hip_responsible_error;
  std::vector<double> knee_responsible_error;
};

struct TrainingOptions {
  int episodes = 2000;
  /// Called after each episode with its index; return false to stop early.
  std::function<bool(int)> progress;
};

/// Online training: each episode replays the next demonstration task
/// (cyclic) under the target controller and feeds every tick to both models.
/// The plant input is the demonstration torque itself, which the GRP total
/// output equals identically during training.
TrainingLog train(grp::GrpModel& hip, grp::GrpModel& knee, const std::vector<TaskSample>& demos,
                  const SimulationConfig& sim, const TrainingOptions& options);

/// Traced training episode: the demonstration trajectory plus per-layer
/// columns for both models, with learning applied.
Episode train_episode(grp::GrpModel& hip, grp::GrpModel& knee, const TaskSample& sample,
                      const SimulationConfig& sim, TrainingLog* log = nullptr);

struct EvalReport {
  std::vector<EpisodeOutcome> trajectories;
  double average_error_deg = 0.0;
  double max_error_deg = 0.0;
  int hip_active = 0;
  int knee_active = 0;
  std::vector<double> hip_peak_responsibility;
  std::vector<double> knee_peak_responsibility;
  double active_threshold = 0.1;
};

/// Reference-free rollouts driven by each model's tau_out. Models are not
/// modified.
EvalReport evaluate(const grp::GrpModel& hip, const grp::GrpModel& knee,
                    const std::vector<TaskSample>& tasks, const SimulationConfig& sim,
                    std::vector<Trajectory>* trajectories = nullptr,
                    double active_threshold = 0.1);

/// Aggregates per-trajectory errors (degrees) into average and maximum.
void summarize(EvalReport& report);

/// Largest predicted pi^k per layer of the named model across the traces.
std::vector<double> peak_responsibility(const std::vector<Trajectory>& trajectories,
                                        const std::string& model);

/// Layers whose predicted pi^k exceeds `threshold` at any recorded step.
int active_generator_count(const std::vector<Trajectory>& trajectories, const std::string& model,
                           double threshold);

struct LayerWeightSummary {
  double generator_norm = 0.0;  // Frobenius
  double predictor_norm = 0.0;
  double generator_max_abs = 0.0;
  double predictor_max_abs = 0.0;
  mulnet::WeightMatrix generator;
  mulnet::WeightMatrix predictor;
};

std::vector<LayerWeightSummary> weight_summary(const grp::GrpModel& model);

}  // namespace spinal::experiment
