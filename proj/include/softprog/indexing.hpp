#pragma once

#include <vector>

#include "softprog/relax.hpp"

namespace softprog {

/// Logistic density (beta/4)*sech^2(beta*t/2) evaluated per offset.
Tensor logistic_kernel(const Tensor& offsets, double beta);

/// Read a tensor at real-valued coordinates (one scalar per axis) by a
/// normalized logistic kernel over all valid integer index tuples. The
/// normalizer is detached, so the backward rule is the unnormalized-kernel
/// gradient. Out-of-range coordinates are legal: the kernel is evaluated over
/// valid indices only and renormalized.
Tensor read_real(const Tensor& a, const std::vector<Tensor>& coords, double beta);

/// Normalized interpolation weights of read_real, flattened row-major.
Tensor read_real_weights(const Tensor& a, const std::vector<Tensor>& coords, double beta);

/// Full contraction with per-axis marginal weights.
Tensor read_categorical(const Tensor& a, const std::vector<CategoricalDistribution>& weights);

/// Blend write a'_j = (1-m_j)*a_j + m_j*v with m the outer product of the
/// axis weights. One-hot weights reproduce a hard store.
Tensor write_categorical(const Tensor& a, const std::vector<CategoricalDistribution>& weights,
                         const Tensor& v);

} // namespace softprog
