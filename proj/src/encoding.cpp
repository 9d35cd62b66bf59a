#include "rsrf/encoding.hpp"

#include <cmath>
#include <numbers>

namespace rsrf {

double band_window(double alpha, int k) {
  const double x = alpha - static_cast<double>(k);
  if (x < 0.0) return 0.0;
  if (x < 1.0) return 0.5 * (1.0 - std::cos(x * std::numbers::pi));
  return 1.0;
}

void positional_encoding(std::span<const double> p, int order, double alpha,
                         std::span<double> out) {
  std::size_t o = 0;
  for (const double v : p) {
    out[o++] = v;
    double freq = std::numbers::pi;
    for (int k = 0; k < order; ++k, freq *= 2.0) {
      const double w = band_window(alpha, k);
      out[o++] = w * std::sin(freq * v);
      out[o++] = w * std::cos(freq * v);
    }
  }
}

void positional_encoding_backward(std::span<const double> p, int order, double alpha,
                                  std::span<const double> grad_out, std::span<double> grad_in) {
  std::size_t o = 0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    const double v = p[i];
    double g = grad_out[o++];
    double freq = std::numbers::pi;
    for (int k = 0; k < order; ++k, freq *= 2.0) {
      const double w = band_window(alpha, k);
      const double gs = grad_out[o++];
      const double gc = grad_out[o++];
      if (w == 0.0) continue;
      g += w * freq * (gs * std::cos(freq * v) - gc * std::sin(freq * v));
    }
    grad_in[i] += g;
  }
}

}  // namespace rsrf
