#include "rsrf/mlp_field.hpp"

#include <cmath>
#include <random>

#include "rsrf/encoding.hpp"
#include "rsrf/error.hpp"

namespace rsrf {
namespace {

constexpr int kMaxWidth = 512;
using Vec = Eigen::Matrix<double, Eigen::Dynamic, 1, 0, kMaxWidth, 1>;
using CMap = Eigen::Map<const Eigen::MatrixXd>;
using MMap = Eigen::Map<Eigen::MatrixXd>;

}  // namespace

MlpField::MlpField(const MlpConfig& cfg)
    : cfg_(cfg),
      alpha_(cfg.pos_order),
      pos_dim_(static_cast<int>(encoded_size(3, cfg.pos_order))),
      dir_dim_(static_cast<int>(encoded_size(3, cfg.dir_order))) {
  if (cfg.hidden <= 0 || cfg.color_hidden <= 0 || cfg.pos_order < 0 || cfg.dir_order < 0) {
    throw ConfigError("mlp: layer widths must be positive and encoding orders non-negative");
  }
  if (cfg.hidden + pos_dim_ > kMaxWidth || cfg.hidden + dir_dim_ > kMaxWidth) {
    throw ConfigError("mlp: layer too wide (max " + std::to_string(kMaxWidth) + ")");
  }
  for (int a = 0; a < 3; ++a) {
    if (!(cfg.bounds.max[a] > cfg.bounds.min[a])) throw ConfigError("mlp bounds are degenerate");
  }
  std::size_t offset = 0;
  auto layer = [&](int rows, int cols) {
    Layer l{offset, offset + static_cast<std::size_t>(rows) * cols, rows, cols};
    offset = l.bias + rows;
    return l;
  };
  const int h = cfg.hidden;
  l1_ = layer(h, pos_dim_);
  l2_ = layer(h, h);
  l3_ = layer(h, h + pos_dim_);
  l4_ = layer(h, h);
  density_ = layer(1, h);
  color1_ = layer(cfg.color_hidden, h + dir_dim_);
  color2_ = layer(3, cfg.color_hidden);
  params_.assign(offset, 0.0);
  initialize();
}

void MlpField::initialize() {
  std::mt19937_64 rng(cfg_.seed);
  auto fill = [&](const Layer& l, double gain) {
    const double bound = gain * std::sqrt(6.0 / l.cols);
    std::uniform_real_distribution<double> dist(-bound, bound);
    for (std::size_t i = 0; i < static_cast<std::size_t>(l.rows) * l.cols; ++i) {
      params_[l.weight + i] = dist(rng);
    }
    for (int i = 0; i < l.rows; ++i) params_[l.bias + i] = 0.0;
  };
  fill(l1_, 1.0);
  fill(l2_, 1.0);
  fill(l3_, 1.0);
  fill(l4_, 1.0);
  fill(density_, 0.1);
  fill(color1_, 1.0);
  fill(color2_, 0.1);
  params_[density_.bias] = softplus_inverse(cfg_.init_density);
}

void MlpField::set_encoding_progress(double alpha) {
  alpha_ = std::clamp(alpha, 0.0, static_cast<double>(cfg_.pos_order));
}

template <bool kBackward>
FieldSample MlpField::run(const Vec3& x, const Vec3& d, const Vec3* grad_color, double grad_density,
                          std::span<double> param_grad, SpatialGrad* spatial) const {
  if (!cfg_.bounds.contains(x)) return {};
  const double* p = params_.data();
  auto W = [&](const Layer& l) { return CMap(p + l.weight, l.rows, l.cols); };
  auto B = [&](const Layer& l) { return Eigen::Map<const Eigen::VectorXd>(p + l.bias, l.rows); };
  const int h = cfg_.hidden;

  const Vec3 half = 0.5 * cfg_.bounds.extent();
  const Vec3 pn = (x - 0.5 * (cfg_.bounds.min + cfg_.bounds.max)).cwiseQuotient(half);

  Vec enc_x(pos_dim_), enc_d(dir_dim_);
  positional_encoding({pn.data(), 3}, cfg_.pos_order, alpha_, {enc_x.data(), enc_x.size()});
  positional_encoding({d.data(), 3}, cfg_.dir_order, cfg_.dir_order, {enc_d.data(), enc_d.size()});

  Vec z1 = W(l1_) * enc_x + B(l1_);
  Vec h1 = z1.cwiseMax(0.0);
  Vec z2 = W(l2_) * h1 + B(l2_);
  Vec h2 = z2.cwiseMax(0.0);
  Vec u3(h + pos_dim_);
  u3 << h2, enc_x;
  Vec z3 = W(l3_) * u3 + B(l3_);
  Vec h3 = z3.cwiseMax(0.0);
  Vec z4 = W(l4_) * h3 + B(l4_);
  Vec h4 = z4.cwiseMax(0.0);
  const double sp = W(density_).row(0).dot(h4) + p[density_.bias];
  Vec u5(h + dir_dim_);
  u5 << h4, enc_d;
  Vec z5 = W(color1_) * u5 + B(color1_);
  Vec h5 = z5.cwiseMax(0.0);
  Vec zc = W(color2_) * h5 + B(color2_);

  FieldSample out;
  for (int c = 0; c < 3; ++c) out.color[c] = sigmoid(zc[c]);
  out.density = softplus(sp);
  if constexpr (!kBackward) {
    return out;
  } else {
    const bool acc = !param_grad.empty();
    double* g = param_grad.data();
    auto accumulate = [&](const Layer& l, const Vec& gz, const Vec& in) {
      if (!acc) return;
      MMap(g + l.weight, l.rows, l.cols).noalias() += gz * in.transpose();
      Eigen::Map<Eigen::VectorXd>(g + l.bias, l.rows) += gz;
    };
    auto relu_mask = [](const Vec& gh, const Vec& z) {
      return Vec((z.array() > 0.0).select(gh, 0.0));
    };

    Vec gzc(3);
    for (int c = 0; c < 3; ++c) gzc[c] = (*grad_color)[c] * out.color[c] * (1.0 - out.color[c]);
    accumulate(color2_, gzc, h5);
    Vec gz5 = relu_mask(W(color2_).transpose() * gzc, z5);
    accumulate(color1_, gz5, u5);
    Vec gu5 = W(color1_).transpose() * gz5;

    const double gsp = grad_density * sigmoid(sp);
    Vec gh4 = gu5.head(h) + gsp * W(density_).row(0).transpose();
    if (acc) {
      MMap(g + density_.weight, 1, h).row(0) += gsp * h4.transpose();
      g[density_.bias] += gsp;
    }
    Vec gz4 = relu_mask(gh4, z4);
    accumulate(l4_, gz4, h3);
    Vec gz3 = relu_mask(W(l4_).transpose() * gz4, z3);
    accumulate(l3_, gz3, u3);
    Vec gu3 = W(l3_).transpose() * gz3;
    Vec gz2 = relu_mask(gu3.head(h), z2);
    accumulate(l2_, gz2, h1);
    Vec gz1 = relu_mask(W(l2_).transpose() * gz2, z1);
    accumulate(l1_, gz1, enc_x);
    Vec genc_x = gu3.tail(pos_dim_) + W(l1_).transpose() * gz1;

    Vec3 gpn = Vec3::Zero();
    positional_encoding_backward({pn.data(), 3}, cfg_.pos_order, alpha_,
                                 {genc_x.data(), genc_x.size()}, {gpn.data(), 3});
    spatial->position = gpn.cwiseQuotient(half);
    Vec3 gd = Vec3::Zero();
    const Vec genc_d = gu5.tail(dir_dim_);
    positional_encoding_backward({d.data(), 3}, cfg_.dir_order, cfg_.dir_order,
                                 {genc_d.data(), genc_d.size()}, {gd.data(), 3});
    spatial->direction = gd;
    return out;
  }
}

FieldSample MlpField::query(const Vec3& x, const Vec3& d) const {
  return run<false>(x, d, nullptr, 0.0, {}, nullptr);
}

SpatialGrad MlpField::query_with_grads(const Vec3& x, const Vec3& d, const Vec3& grad_color,
                                       double grad_density, std::span<double> param_grad) const {
  SpatialGrad out;
  run<true>(x, d, &grad_color, grad_density, param_grad, &out);
  return out;
}

std::unique_ptr<TrainableField> MlpField::clone() const { return std::make_unique<MlpField>(*this); }

}  // namespace rsrf
