#include "rsrf/optim.hpp"

#include <cmath>
#include <string>

#include "rsrf/error.hpp"

namespace rsrf {

Adam::Adam(std::size_t size, AdamConfig cfg) : cfg_(cfg), m_(size, 0.0), v_(size, 0.0) {}

void Adam::step(std::span<double> params, std::span<const double> grads, double lr) {
  if (params.size() != m_.size() || grads.size() != m_.size()) {
    throw ShapeMismatch("adam: state has " + std::to_string(m_.size()) + " entries, got params " +
                        std::to_string(params.size()) + " and grads " +
                        std::to_string(grads.size()));
  }
  ++t_;
  const double b1 = cfg_.beta1;
  const double b2 = cfg_.beta2;
  const double c1 = 1.0 - std::pow(b1, static_cast<double>(t_));
  const double c2 = 1.0 - std::pow(b2, static_cast<double>(t_));
  for (std::size_t i = 0; i < params.size(); ++i) {
    const double g = grads[i];
    m_[i] = b1 * m_[i] + (1.0 - b1) * g;
    v_[i] = b2 * v_[i] + (1.0 - b2) * g * g;
    params[i] -= lr * (m_[i] / c1) / (std::sqrt(v_[i] / c2) + cfg_.epsilon);
  }
}

double lr_schedule(std::size_t step, std::size_t total_steps, double lr_init, double lr_final) {
  if (total_steps == 0) return lr_init;
  const double frac = static_cast<double>(std::min(step, total_steps)) / total_steps;
  return lr_init * std::pow(lr_final / lr_init, frac);
}

double c2f_alpha(std::size_t step, std::size_t start, std::size_t end, double order) {
  if (step <= start) return 0.0;
  if (step >= end) return order;
  return order * static_cast<double>(step - start) / static_cast<double>(end - start);
}

}  // namespace rsrf
