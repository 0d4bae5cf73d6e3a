#include "spinal/grp_model.hpp"

#include "spinal/random.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace spinal::grp {

namespace {

bool all_finite(const mulnet::WeightMatrix& w) {
  return std::all_of(w.a.begin(), w.a.end(), [](double v) { return std::isfinite(v); });
}

[[noreturn]] void diverged(const GrpModel& model, int layer, const char* which,
                           const mulnet::NetworkInput& x, double r_G) {
  std::ostringstream msg;
  msg.precision(17);
  msg << "non-finite " << which << " weights in layer " << layer << " after "
      << model.diagnostics.learn_steps << " learn steps (episode " << model.episode_count
      << ", gamma " << model.gamma << "); r_G = " << r_G << ", x = [";
  for (std::size_t i = 0; i < mulnet::kInputs; ++i) msg << (i ? ", " : "") << x[i];
  msg << "]";
  throw TrainingDivergence(msg.str());
}

}  // namespace

void GrpConfig::validate() const {
  auto require = [](bool ok, const char* key, const char* what) {
    if (!ok) throw ConfigError(key, std::string(key) + ": " + what);
  };
  require(layers >= 1, "layers", "must be at least 1");
  require(mu > 0.0 && std::isfinite(mu), "mu", "must be finite and positive");
  require(lambda >= 0.0 && std::isfinite(lambda), "lambda", "must be finite and non-negative");
  require(gamma0 > 0.0 && std::isfinite(gamma0), "gamma0", "must be finite and positive");
  require(beta > 1.0 && std::isfinite(beta), "beta", "must be finite and greater than 1");
  require(std::isfinite(w_gain), "w_gain", "must be finite");
  require(init_scale > 0.0 && std::isfinite(init_scale), "init_scale",
          "must be finite and positive");
}

GrpModel init(const GrpConfig& config) {
  config.validate();
  GrpModel model;
  model.config = config;
  model.gamma = config.gamma0;
  model.layers.resize(static_cast<std::size_t>(config.layers));
  for (std::size_t k = 0; k < model.layers.size(); ++k) {
    auto rng = seeded_stream(config.seed, k);
    auto draw = [&] { return uniform(rng, -config.init_scale, config.init_scale); };
    for (double& v : model.layers[k].generator.a) v = draw();
    for (double& v : model.layers[k].predictor.a) v = draw();
  }
  return model;
}

std::vector<double> responsibility_reference(const std::vector<double>& errors, double gamma) {
  if (!(gamma > 0.0)) throw std::invalid_argument("gamma must be positive");
  std::vector<double> r(errors.size());
  if (errors.empty()) return r;
  double best = std::abs(errors.front());
  for (double e : errors) best = std::min(best, std::abs(e));
  double total = 0.0;
  for (std::size_t k = 0; k < errors.size(); ++k) {
    const double gap = std::abs(errors[k]) - best;
    // gap == 0 short-circuits so an infinite gamma cannot produce 0 * inf.
    r[k] = gap == 0.0 ? 1.0 : std::exp(-gamma * gap);
    total += r[k];
  }
  for (double& v : r) v /= total;
  return r;
}

LayerOutputs forward(const GrpModel& model, const mulnet::NetworkInput& x) {
  LayerOutputs out;
  out.generator.reserve(model.layers.size());
  out.responsibility.reserve(model.layers.size());
  for (const auto& layer : model.layers) {
    const double g = mulnet::net_forward(layer.generator, x);
    const double pi =
        mulnet::sigmoid_head(mulnet::net_forward(layer.predictor, x), model.config.w_gain);
    out.generator.push_back(g);
    out.responsibility.push_back(pi);
    out.tau_out += g * pi;
  }
  return out;
}

double total_output_identity(const GrpModel& model, const mulnet::NetworkInput& x, double r_G) {
  const LayerOutputs out = forward(model, x);
  std::vector<double> errors(out.generator.size());
  for (std::size_t k = 0; k < errors.size(); ++k) errors[k] = r_G - out.generator[k];
  const std::vector<double> ref = responsibility_reference(errors, model.gamma);
  double total = 0.0;
  for (std::size_t k = 0; k < errors.size(); ++k) {
    const double g = out.generator[k] + errors[k];
    const double p = out.responsibility[k] + (ref[k] - out.responsibility[k]);
    total += g * p;
  }
  return total;
}

StepRecord learn_step(GrpModel& model, const mulnet::NetworkInput& x, double r_G) {
  const auto& kernels = simd::active_kernels();
  const std::size_t m = model.layers.size();
  const GrpConfig& cfg = model.config;

  std::vector<mulnet::Evaluation> gen_eval(m), rp_eval(m);
  StepRecord rec;
  rec.r_G = r_G;
  rec.generator.resize(m);
  rec.responsibility.resize(m);
  rec.generator_error.resize(m);
  rec.predictor_error.resize(m);

  for (std::size_t k = 0; k < m; ++k) {
    gen_eval[k] = mulnet::evaluate(model.layers[k].generator, x);
    rp_eval[k] = mulnet::evaluate(model.layers[k].predictor, x);
    rec.generator[k] = gen_eval[k].value;
    rec.responsibility[k] = mulnet::sigmoid_head(rp_eval[k].value, cfg.w_gain);
    rec.generator_error[k] = r_G - rec.generator[k];
    rec.tau_out += rec.generator[k] * rec.responsibility[k];
    model.diagnostics.clamped_arguments +=
        static_cast<std::uint64_t>(gen_eval[k].scratch.clamped + rp_eval[k].scratch.clamped);
  }
  rec.reference = responsibility_reference(rec.generator_error, model.gamma);

  mulnet::WeightMatrix grad;
  for (std::size_t k = 0; k < m; ++k) {
    auto& layer = model.layers[k];
    const double pi = rec.responsibility[k];
    rec.predictor_error[k] = rec.reference[k] - pi;

    // Generator rate is gated by the reference responsibility.
    const double mu_k = rec.reference[k] * cfg.mu;
    kernels.gradient(layer.generator.span(), x.span(), gen_eval[k].scratch, grad.span());
    kernels.update(layer.generator.span(), grad.span(), mu_k * rec.generator_error[k],
                   mu_k * cfg.lambda);

    const double head = cfg.w_gain * pi * (1.0 - pi);
    kernels.gradient(layer.predictor.span(), x.span(), rp_eval[k].scratch, grad.span());
    kernels.update(layer.predictor.span(), grad.span(), cfg.mu * rec.predictor_error[k] * head,
                   cfg.mu * cfg.lambda);

    if (!all_finite(layer.generator)) diverged(model, static_cast<int>(k), "generator", x, r_G);
    if (!all_finite(layer.predictor)) diverged(model, static_cast<int>(k), "predictor", x, r_G);
  }
  ++model.diagnostics.learn_steps;
  return rec;
}

void end_episode(GrpModel& model) {
  model.gamma *= model.config.beta;
  ++model.episode_count;
}

}  // namespace spinal::grp
