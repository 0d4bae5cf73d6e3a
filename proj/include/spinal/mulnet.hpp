#pragma once

// Multiplicative ("presynaptic inhibition") network:
//
//   out(W, x) = sum_i W_ii x_i prod_{j != i} exp(W_ij x_j)
//
// Inputs are non-negative: each signed sensory channel is sensed by a pair of
// rectifying neurons, so x_j = 0 silences every modulation W_ij it feeds.

#include "spinal/simd/kernels.hpp"

#include <array>
#include <cstddef>
#include <span>

namespace spinal::mulnet {

inline constexpr std::size_t kInputs = simd::kWidth;

/// Raw sensors: [(alpha - alpha_tgt), phi_h, phi_h_dot, phi_k, phi_k_dot].
struct SensoryInput {
  double angle_error = 0.0;
  double phi_h = 0.0;
  double phi_h_dot = 0.0;
  double phi_k = 0.0;
  double phi_k_dot = 0.0;
};

/// [err+, err-, phi_h, phi_h_dot+, phi_h_dot-, phi_k, phi_k_dot+, phi_k_dot-]
struct NetworkInput {
  alignas(32) std::array<double, kInputs> v{};

  double& operator[](std::size_t i) { return v[i]; }
  double operator[](std::size_t i) const { return v[i]; }
  std::span<const double, kInputs> span() const { return std::span<const double, kInputs>(v); }
};

/// Row-major 8x8. Diagonal entries are linear gains, off-diagonal entries
/// are exponential modulation weights.
struct WeightMatrix {
  alignas(32) std::array<double, simd::kCells> a{};

  double& operator()(std::size_t i, std::size_t j) { return a[i * kInputs + j]; }
  double operator()(std::size_t i, std::size_t j) const { return a[i * kInputs + j]; }
  std::span<double, simd::kCells> span() { return std::span<double, simd::kCells>(a); }
  std::span<const double, simd::kCells> span() const {
    return std::span<const double, simd::kCells>(a);
  }

  bool operator==(const WeightMatrix&) const = default;
};

struct Evaluation {
  double value = 0.0;
  simd::ForwardScratch scratch;
};

NetworkInput split_input(const SensoryInput& raw);

double net_forward(const WeightMatrix& w, const NetworkInput& x);

/// Forward pass that keeps the per-row factors needed by net_gradient.
Evaluation evaluate(const WeightMatrix& w, const NetworkInput& x);

double sigmoid_head(double b, double w_gain);

/// Exact partials d out / d W, division-free:
///   (i,i): x_i prod_{j != i} exp(W_ij x_j)
///   (i,j): term_i x_j   (0 where the exponent argument was clamped)
WeightMatrix net_gradient(const WeightMatrix& w, const NetworkInput& x);
WeightMatrix net_gradient(const WeightMatrix& w, const NetworkInput& x, const Evaluation& eval);

/// Largest entry-wise |analytic - central difference| / max(1, |analytic|, |numeric|).
double finite_difference_check(const WeightMatrix& w, const NetworkInput& x, double h);

}  // namespace spinal::mulnet
