#pragma once

// Adam with bias correction, learning-rate decay and the coarse-to-fine
// encoding schedule.

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace rsrf {

struct AdamConfig {
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
  bool operator==(const AdamConfig&) const = default;
};

class Adam {
 public:
  Adam(std::size_t size, AdamConfig cfg = {});

  /// params -= lr * m_hat / (sqrt(v_hat) + eps). Throws ShapeMismatch when
  /// the spans do not match the state size.
  void step(std::span<double> params, std::span<const double> grads, double lr);

  std::size_t size() const { return m_.size(); }
  std::uint64_t steps() const { return t_; }
  const std::vector<double>& first_moment() const { return m_; }
  const std::vector<double>& second_moment() const { return v_; }
  const AdamConfig& config() const { return cfg_; }

 private:
  AdamConfig cfg_;
  std::vector<double> m_;
  std::vector<double> v_;
  std::uint64_t t_ = 0;
};

/// lr_init * (lr_final / lr_init)^(step / total_steps).
double lr_schedule(std::size_t step, std::size_t total_steps, double lr_init, double lr_final);

/// 0 before `start`, `order` at or after `end`, linear in between.
double c2f_alpha(std::size_t step, std::size_t start, std::size_t end, double order);

}  // namespace rsrf
