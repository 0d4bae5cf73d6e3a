#include "spinal/mulnet.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace spinal::mulnet {

NetworkInput split_input(const SensoryInput& raw) {
  auto pos = [](double v) { return std::max(v, 0.0); };
  auto neg = [](double v) { return std::max(-v, 0.0); };
  NetworkInput x;
  x[0] = pos(raw.angle_error);
  x[1] = neg(raw.angle_error);
  x[2] = raw.phi_h;
  x[3] = pos(raw.phi_h_dot);
  x[4] = neg(raw.phi_h_dot);
  x[5] = raw.phi_k;
  x[6] = pos(raw.phi_k_dot);
  x[7] = neg(raw.phi_k_dot);
  // max(-0.0, 0.0) may return -0.0; normalise so every entry compares >= +0.
  for (double& e : x.v) e += 0.0;
  return x;
}

Evaluation evaluate(const WeightMatrix& w, const NetworkInput& x) {
  Evaluation e;
  e.value = simd::active_kernels().forward(w.span(), x.span(), e.scratch);
  return e;
}

double net_forward(const WeightMatrix& w, const NetworkInput& x) { return evaluate(w, x).value; }

double sigmoid_head(double b, double w_gain) {
  const double z = w_gain * b;
  // Split by sign so neither branch overflows.
  if (z >= 0.0) return 1.0 / (1.0 + std::exp(-z));
  const double ez = std::exp(z);
  return ez / (1.0 + ez);
}

WeightMatrix net_gradient(const WeightMatrix& w, const NetworkInput& x, const Evaluation& eval) {
  WeightMatrix g;
  simd::active_kernels().gradient(w.span(), x.span(), eval.scratch, g.span());
  return g;
}

WeightMatrix net_gradient(const WeightMatrix& w, const NetworkInput& x) {
  return net_gradient(w, x, evaluate(w, x));
}

double finite_difference_check(const WeightMatrix& w, const NetworkInput& x, double h) {
  if (!(h > 0.0)) throw std::invalid_argument("finite-difference step must be positive");
  const WeightMatrix analytic = net_gradient(w, x);
  double worst = 0.0;
  WeightMatrix probe = w;
  for (std::size_t c = 0; c < simd::kCells; ++c) {
    const double saved = probe.a[c];
    probe.a[c] = saved + h;
    const double up = net_forward(probe, x);
    probe.a[c] = saved - h;
    const double down = net_forward(probe, x);
    probe.a[c] = saved;
    const double numeric = (up - down) / (2.0 * h);
    const double scale = std::max({1.0, std::abs(analytic.a[c]), std::abs(numeric)});
    worst = std::max(worst, std::abs(analytic.a[c] - numeric) / scale);
  }
  return worst;
}

}  // namespace spinal::mulnet
