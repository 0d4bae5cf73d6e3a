#pragma once

// Generator + Responsibility Predictor stack.
//
// Each layer pairs a Generator network (candidate output G^k) with a
// Responsibility Predictor (predicted weight pi^k, sigmoid head). During
// training, the reference responsibility r^k = softmax_k(-gamma |r_G - G^k|)
// is the RP's target and gates the Generator's learning rate. gamma grows
// geometrically per episode so the assignment sharpens over training.

#include "spinal/mulnet.hpp"

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace spinal::grp {

struct GrpConfig {
  int layers = 1;
  double mu = 1e-7;       // plain gradient descent is unstable much above this
  double lambda = 10.0;
  double gamma0 = 1.0;
  double beta = 1.05;
  double w_gain = 1.0;
  double init_scale = 0.1;
  std::uint64_t seed = 1;

  /// Throws ConfigError naming the offending field.
  void validate() const;
  bool operator==(const GrpConfig&) const = default;
};

/// Invalid configuration; key() names the offending field.
class ConfigError : public std::invalid_argument {
 public:
  ConfigError(std::string key, const std::string& what)
      : std::invalid_argument(what), key_(std::move(key)) {}
  const std::string& key() const { return key_; }

 private:
  std::string key_;
};

/// Non-finite weights after an update. what() carries a diagnostic dump.
class TrainingDivergence : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct GrpLayer {
  mulnet::WeightMatrix generator;
  mulnet::WeightMatrix predictor;
  bool operator==(const GrpLayer&) const = default;
};

struct Diagnostics {
  std::uint64_t learn_steps = 0;
  std::uint64_t clamped_arguments = 0;
};

struct GrpModel {
  GrpConfig config;
  std::vector<GrpLayer> layers;
  double gamma = 1.0;
  std::uint64_t episode_count = 0;
  Diagnostics diagnostics;

  int size() const { return static_cast<int>(layers.size()); }
};

struct LayerOutputs {
  std::vector<double> generator;       // G^k
  std::vector<double> responsibility;  // pi^k
  double tau_out = 0.0;                // sum_k G^k pi^k
};

struct StepRecord {
  std::vector<double> generator;       // G^k
  std::vector<double> responsibility;  // pi^k (before the update)
  std::vector<double> generator_error; // e_G^k
  std::vector<double> reference;       // r_RP^k
  std::vector<double> predictor_error; // e_RP^k
  double tau_out = 0.0;
  double r_G = 0.0;
};

GrpModel init(const GrpConfig& config);

/// softmax(-gamma |e|), shifted by the smallest |e| so the best layer always
/// has numerator exactly 1.
std::vector<double> responsibility_reference(const std::vector<double>& errors, double gamma);

LayerOutputs forward(const GrpModel& model, const mulnet::NetworkInput& x);

/// sum_k (G^k + (r_G - G^k)) (pi^k + (r^k - pi^k)), evaluated term by term.
double total_output_identity(const GrpModel& model, const mulnet::NetworkInput& x, double r_G);

/// One online update of every layer against the reference r_G.
StepRecord learn_step(GrpModel& model, const mulnet::NetworkInput& x, double r_G);

void end_episode(GrpModel& model);

}  // namespace spinal::grp
