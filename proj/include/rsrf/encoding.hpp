#pragma once

// Fourier positional encoding with a coarse-to-fine band window.

#include <cstddef>
#include <span>

namespace rsrf {

/// Band weight: 0 before band k opens, a raised-cosine ramp while
/// alpha - k is in [0, 1), then 1.
double band_window(double alpha, int k);

/// Output length for `dims` inputs: dims * (1 + 2L).
constexpr std::size_t encoded_size(std::size_t dims, int order) {
  return dims * (1 + 2 * static_cast<std::size_t>(order));
}

/// Per coordinate p: [p, w0 sin(pi p), w0 cos(pi p), ..., w_{L-1} sin(2^{L-1} pi p), ...].
void positional_encoding(std::span<const double> p, int order, double alpha, std::span<double> out);

/// Accumulates d(loss)/d(p) given d(loss)/d(encoding).
void positional_encoding_backward(std::span<const double> p, int order, double alpha,
                                  std::span<const double> grad_out, std::span<double> grad_in);

}  // namespace rsrf
