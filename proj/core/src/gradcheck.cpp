#include "dt6d/check/gradcheck.hpp"

#include <vector>

#include "dt6d/nn/ops.hpp"

namespace dt6d::check {

using nn::BnCache;
using nn::ForwardCache;
using nn::NetConfig;
using nn::NetworkParams;
using nn::RunMode;
using nn::Tensor;

namespace {

Tensor<double> random_tensor(int a, int b, int c, int d, RandomStream& rng, double scale = 1.0) {
  Tensor<double> t(a, b, c, d);
  for (auto& v : t.v) v = rng.uniform(-scale, scale);
  return t;
}

/// Weighted-sum loss over an output tensor; the projection makes every
/// output element contribute a distinct gradient.
double projected(const Tensor<double>& out, const std::vector<double>& r) {
  double loss = 0;
  for (size_t i = 0; i < out.size(); ++i) loss += out.v[i] * r[i];
  return loss;
}

std::vector<double> random_projection(size_t n, RandomStream& rng) {
  std::vector<double> r(n);
  for (auto& v : r) v = rng.uniform(-1, 1);
  return r;
}

}  // namespace

GradCheckReport check_conv_gradients(RandomStream& rng) {
  const int b = 1 + static_cast<int>(rng.uniform_index(2));
  const int k = 1 + 2 * static_cast<int>(rng.uniform_index(3));  // 1,3,5
  const int h = k + static_cast<int>(rng.uniform_index(5));
  const int w = k + static_cast<int>(rng.uniform_index(5));
  const int ci = 1 + static_cast<int>(rng.uniform_index(3));
  const int co = 1 + static_cast<int>(rng.uniform_index(3));

  Tensor<double> in = random_tensor(b, h, w, ci, rng);
  Tensor<double> kernel = random_tensor(k, k, ci, co, rng);
  std::vector<double> bias(static_cast<size_t>(co));
  for (auto& v : bias) v = rng.uniform(-1, 1);

  Tensor<double> out;
  nn::conv2d_valid(in, kernel, bias, out);
  const std::vector<double> r = random_projection(out.size(), rng);

  Tensor<double> dout(out.shape[0], out.shape[1], out.shape[2], out.shape[3]);
  dout.v = r;
  Tensor<double> din, dw;
  std::vector<double> dbias;
  nn::conv2d_backward(in, kernel, dout, din, dw, dbias);

  double* params[3] = {in.v.data(), kernel.v.data(), bias.data()};
  const size_t sizes[3] = {in.size(), kernel.size(), bias.size()};
  const double* analytic[3] = {din.v.data(), dw.v.data(), dbias.data()};
  auto loss = [&]() {
    Tensor<double> y;
    nn::conv2d_valid(in, kernel, bias, y);
    return projected(y, r);
  };
  return finite_difference_check(std::span<double* const>(params), std::span<const size_t>(sizes),
                                 std::span<const double* const>(analytic), loss);
}

GradCheckReport check_dense_gradients(RandomStream& rng) {
  const int b = 1 + static_cast<int>(rng.uniform_index(3));
  const int n = 1 + static_cast<int>(rng.uniform_index(12));
  const int m = 1 + static_cast<int>(rng.uniform_index(8));

  Tensor<double> in = random_tensor(b, 1, 1, n, rng);
  Tensor<double> w = random_tensor(n, m, 1, 1, rng);
  std::vector<double> bias(static_cast<size_t>(m));
  for (auto& v : bias) v = rng.uniform(-1, 1);

  Tensor<double> out;
  nn::dense_forward(in, w, bias, out);
  const std::vector<double> r = random_projection(out.size(), rng);
  Tensor<double> dout(b, 1, 1, m);
  dout.v = r;
  Tensor<double> din, dw;
  std::vector<double> dbias;
  nn::dense_backward(in, w, dout, din, dw, dbias);

  double* params[3] = {in.v.data(), w.v.data(), bias.data()};
  const size_t sizes[3] = {in.size(), w.size(), bias.size()};
  const double* analytic[3] = {din.v.data(), dw.v.data(), dbias.data()};
  auto loss = [&]() {
    Tensor<double> y;
    nn::dense_forward(in, w, bias, y);
    return projected(y, r);
  };
  return finite_difference_check(std::span<double* const>(params), std::span<const size_t>(sizes),
                                 std::span<const double* const>(analytic), loss);
}

GradCheckReport check_batchnorm_gradients(RandomStream& rng) {
  const int b = 2 + static_cast<int>(rng.uniform_index(3));
  const int h = 1 + static_cast<int>(rng.uniform_index(4));
  const int w = 1 + static_cast<int>(rng.uniform_index(4));
  const int c = 1 + static_cast<int>(rng.uniform_index(4));

  Tensor<double> in = random_tensor(b, h, w, c, rng);
  std::vector<double> gain(static_cast<size_t>(c)), bias(static_cast<size_t>(c));
  for (auto& v : gain) v = rng.uniform(0.5, 1.5);
  for (auto& v : bias) v = rng.uniform(-0.5, 0.5);

  auto forward = [&](BnCache<double>* cache, Tensor<double>& out) {
    std::vector<double> rm(static_cast<size_t>(c), 0.0), rv(static_cast<size_t>(c), 1.0);
    nn::batchnorm_forward(in, gain, bias, rm, rv, out, cache, true, 0.99, 1e-5);
  };

  Tensor<double> out;
  BnCache<double> cache;
  forward(&cache, out);
  const std::vector<double> r = random_projection(out.size(), rng);
  Tensor<double> dout(b, h, w, c);
  dout.v = r;
  Tensor<double> din;
  std::vector<double> dgain, dbias;
  nn::batchnorm_backward(in, gain, cache, dout, din, dgain, dbias);

  double* params[3] = {in.v.data(), gain.data(), bias.data()};
  const size_t sizes[3] = {in.size(), gain.size(), bias.size()};
  const double* analytic[3] = {din.v.data(), dgain.data(), dbias.data()};
  auto loss = [&]() {
    Tensor<double> y;
    forward(nullptr, y);
    return projected(y, r);
  };
  return finite_difference_check(std::span<double* const>(params), std::span<const size_t>(sizes),
                                 std::span<const double* const>(analytic), loss);
}

GradCheckReport check_maxpool_gradients(RandomStream& rng) {
  const int b = 1 + static_cast<int>(rng.uniform_index(2));
  const int h = 2 + static_cast<int>(rng.uniform_index(6));
  const int w = 2 + static_cast<int>(rng.uniform_index(6));
  const int c = 1 + static_cast<int>(rng.uniform_index(3));

  Tensor<double> in = random_tensor(b, h, w, c, rng);
  Tensor<double> out;
  std::vector<int64_t> argmax;
  nn::maxpool2(in, out, argmax);
  const std::vector<double> r = random_projection(out.size(), rng);
  Tensor<double> dout(out.shape[0], out.shape[1], out.shape[2], out.shape[3]);
  dout.v = r;
  Tensor<double> din;
  nn::maxpool2_backward(dout, argmax, in.shape, din);

  double* params[1] = {in.v.data()};
  const size_t sizes[1] = {in.size()};
  const double* analytic[1] = {din.v.data()};
  auto loss = [&]() {
    Tensor<double> y;
    std::vector<int64_t> am;
    nn::maxpool2(in, y, am);
    return projected(y, r);
  };
  // Smaller step: argmax flips under large perturbations near ties.
  return finite_difference_check(std::span<double* const>(params), std::span<const size_t>(sizes),
                                 std::span<const double* const>(analytic), loss, 1e-7);
}

GradCheckReport check_elu_gradients(RandomStream& rng) {
  const int n = 4 + static_cast<int>(rng.uniform_index(20));
  Tensor<double> in = random_tensor(1, 1, 1, n, rng, 2.0);
  Tensor<double> out;
  nn::elu_forward(in, out);
  const std::vector<double> r = random_projection(out.size(), rng);
  Tensor<double> dout(1, 1, 1, n);
  dout.v = r;
  Tensor<double> din;
  nn::elu_backward(in, out, dout, din);

  double* params[1] = {in.v.data()};
  const size_t sizes[1] = {in.size()};
  const double* analytic[1] = {din.v.data()};
  auto loss = [&]() {
    Tensor<double> y;
    nn::elu_forward(in, y);
    return projected(y, r);
  };
  return finite_difference_check(std::span<double* const>(params), std::span<const size_t>(sizes),
                                 std::span<const double* const>(analytic), loss);
}

GradCheckReport check_tanh_gradients(RandomStream& rng) {
  const int n = 4 + static_cast<int>(rng.uniform_index(20));
  Tensor<double> in = random_tensor(1, 1, 1, n, rng, 2.0);
  Tensor<double> out;
  nn::tanh_forward(in, out);
  const std::vector<double> r = random_projection(out.size(), rng);
  Tensor<double> dout(1, 1, 1, n);
  dout.v = r;
  Tensor<double> din;
  nn::tanh_backward(out, dout, din);

  double* params[1] = {in.v.data()};
  const size_t sizes[1] = {in.size()};
  const double* analytic[1] = {din.v.data()};
  auto loss = [&]() {
    Tensor<double> y;
    nn::tanh_forward(in, y);
    return projected(y, r);
  };
  return finite_difference_check(std::span<double* const>(params), std::span<const size_t>(sizes),
                                 std::span<const double* const>(analytic), loss);
}

GradCheckReport check_dropout_gradients(RandomStream& rng) {
  const int n = 8 + static_cast<int>(rng.uniform_index(24));
  const uint64_t mask_seed = rng.next_u64();
  Tensor<double> in = random_tensor(1, 1, 1, n, rng);

  auto forward = [&](Tensor<double>& out, std::vector<uint8_t>& mask) {
    RandomStream mask_rng(mask_seed);  // fixed mask across evaluations
    nn::dropout_forward(in, 0.5, true, mask_rng, out, mask);
  };
  Tensor<double> out;
  std::vector<uint8_t> mask;
  forward(out, mask);
  const std::vector<double> r = random_projection(out.size(), rng);
  Tensor<double> dout(1, 1, 1, n);
  dout.v = r;
  Tensor<double> din;
  nn::dropout_backward(dout, mask, 0.5, din);

  double* params[1] = {in.v.data()};
  const size_t sizes[1] = {in.size()};
  const double* analytic[1] = {din.v.data()};
  auto loss = [&]() {
    Tensor<double> y;
    std::vector<uint8_t> m;
    forward(y, m);
    return projected(y, r);
  };
  return finite_difference_check(std::span<double* const>(params), std::span<const size_t>(sizes),
                                 std::span<const double* const>(analytic), loss);
}

namespace {

GradCheckReport check_network_with_config(const NetConfig& cfg, RandomStream& rng) {
  NetworkParams<double> params = NetworkParams<double>::initialized(cfg, rng.next_u64());
  const int batch = 2;
  Tensor<double> x_pred = random_tensor(batch, cfg.input_side, cfg.input_side, cfg.in_channels, rng);
  Tensor<double> x_obs = random_tensor(batch, cfg.input_side, cfg.input_side, cfg.in_channels, rng);
  Tensor<double> target = random_tensor(batch, 1, 1, cfg.out_units, rng, 0.8);

  RandomStream unused(0);
  auto loss = [&]() {
    ForwardCache<double> cache;
    Tensor<double> d;
    nn::network_forward(params, x_pred, x_obs, RunMode::kTrain, unused, cache);
    return nn::mse_loss(cache.output, target, d);
  };

  ForwardCache<double> cache;
  nn::network_forward(params, x_pred, x_obs, RunMode::kTrain, unused, cache);
  Tensor<double> d_out;
  nn::mse_loss(cache.output, target, d_out);
  NetworkParams<double> grads;
  nn::network_backward(params, cache, d_out, grads);

  std::vector<double*> spans;
  std::vector<size_t> sizes;
  std::vector<const double*> analytic;
  params.for_each_trainable([&](const std::string&, std::span<double> s) {
    spans.push_back(s.data());
    sizes.push_back(s.size());
  });
  grads.for_each_trainable([&](const std::string&, std::span<double> s) {
    analytic.push_back(s.data());
  });
  return finite_difference_check(std::span<double* const>(spans.data(), spans.size()),
                                 std::span<const size_t>(sizes.data(), sizes.size()),
                                 std::span<const double* const>(analytic.data(), analytic.size()),
                                 loss);
}

}  // namespace

GradCheckReport check_network_gradients(RandomStream& rng) {
  NetConfig cfg;
  cfg.in_channels = 1 + static_cast<int>(rng.uniform_index(4));
  cfg.branch_filters = 1 + static_cast<int>(rng.uniform_index(2));
  cfg.trunk_filters = 2 + static_cast<int>(rng.uniform_index(2));
  cfg.trunk_blocks = 1 + static_cast<int>(rng.uniform_index(2));
  cfg.fc_units = 3 + static_cast<int>(rng.uniform_index(4));
  cfg.out_units = 3;
  cfg.dropout_keep = 1.0;  // no stochastic mask in the closure
  cfg.input_side = cfg.trunk_blocks == 1 ? 14 + static_cast<int>(rng.uniform_index(6))
                                         : 24 + static_cast<int>(rng.uniform_index(6));
  return check_network_with_config(cfg, rng);
}

GradCheckReport check_full_stack_gradients(uint64_t seed) {
  // Smallest side that admits the full three-block trunk.
  NetConfig cfg;
  cfg.input_side = 48;
  cfg.branch_filters = 2;
  cfg.trunk_filters = 3;
  cfg.trunk_blocks = 3;
  cfg.fc_units = 5;
  cfg.dropout_keep = 1.0;
  RandomStream rng(seed);
  return check_network_with_config(cfg, rng);
}

}  // namespace dt6d::check
