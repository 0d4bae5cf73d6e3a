#pragma once

// File formats. Trajectories are CSV, everything else is JSON. Doubles are
// written so that reading them back gives the same bits.

#include "spinal/experiment.hpp"
#include "spinal/grp_model.hpp"

#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

namespace spinal::io {

/// Malformed input file; line() is 1-based, 0 when not line-specific.
class ParseError : public std::runtime_error {
 public:
  ParseError(const std::string& path, std::size_t line, const std::string& what);
  std::size_t line() const { return line_; }

 private:
  std::size_t line_;
};

/// t, phi_h, phi_k, phi_h_dot, phi_k_dot, alpha, alpha_dot, l, tau_h, tau_k, phase, contact
extern const std::vector<std::string> kTrajectoryColumns;

std::string format_double(double v);

/// Per-layer columns follow the fixed ones as {model}_G_k, {model}_pi_k,
/// {model}_r_k for k = 1..m, one model after another.
void write_trajectory(const std::string& path, const experiment::Trajectory& traj);
std::string trajectory_csv(const experiment::Trajectory& traj);

/// Restores every written column. Foot and knee positions are not stored and
/// come back as zero.
experiment::Trajectory read_trajectory(const std::string& path);
experiment::Trajectory parse_trajectory(const std::string& text, const std::string& name);

inline constexpr int kModelFormatVersion = 1;

std::string model_json(const grp::GrpModel& model);
grp::GrpModel parse_model(const std::string& text, const std::string& name);
void write_model(const std::string& path, const grp::GrpModel& model);
grp::GrpModel read_model(const std::string& path);

std::string report_json(const experiment::EvalReport& report);
void write_report(const std::string& path, const experiment::EvalReport& report);

/// Per-episode mean |e_G| per layer and of the responsible layer.
void write_training_log(const std::string& path, const experiment::TrainingLog& log);

std::string weight_summary_json(const grp::GrpModel& model);

void write_text(const std::string& path, const std::string& text);
std::string read_text(const std::string& path);

}  // namespace spinal::io
