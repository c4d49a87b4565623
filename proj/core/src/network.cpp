#include "dt6d/nn/network.hpp"

#include <cmath>
#include <stdexcept>

namespace dt6d::nn {

std::vector<int> NetConfig::spatial_chain() const {
  std::vector<int> chain;
  int s = input_side - branch_kernel + 1;
  chain.push_back(s);
  s /= 2;
  chain.push_back(s);
  for (int i = 0; i < trunk_blocks; ++i) {
    s = s - trunk_kernel + 1;
    chain.push_back(s);
    s /= 2;
    chain.push_back(s);
  }
  return chain;
}

int NetConfig::flatten_len() const {
  const auto chain = spatial_chain();
  return chain.back() * chain.back() * trunk_filters;
}

void NetConfig::validate() const {
  if (input_side < branch_kernel) throw std::invalid_argument("net: input smaller than branch kernel");
  if (branch_filters < 1 || trunk_filters < 1 || trunk_blocks < 1 || fc_units < 1 || out_units < 1)
    throw std::invalid_argument("net: all layer sizes must be positive");
  if (dropout_keep <= 0 || dropout_keep > 1) throw std::invalid_argument("net: dropout keep in (0,1]");
  int s = input_side - branch_kernel + 1;
  if (s < 2) throw std::invalid_argument("net: branch conv output too small to pool");
  s /= 2;
  for (int i = 0; i < trunk_blocks; ++i) {
    if (s < trunk_kernel) throw std::invalid_argument("net: trunk conv input too small at block " + std::to_string(i));
    s = s - trunk_kernel + 1;
    if (s < 2) throw std::invalid_argument("net: trunk pool input too small at block " + std::to_string(i));
    s /= 2;
  }
  if (s < 1) throw std::invalid_argument("net: empty feature map before flatten");
}

namespace {

template <typename T>
void he_uniform(Tensor<T>& w, int fan_in, RandomStream& rng) {
  const double limit = std::sqrt(6.0 / fan_in);
  for (auto& value : w.v) value = static_cast<T>(rng.uniform(-limit, limit));
}

template <typename T>
void xavier_uniform(Tensor<T>& w, int fan_in, int fan_out, RandomStream& rng) {
  const double limit = std::sqrt(6.0 / (fan_in + fan_out));
  for (auto& value : w.v) value = static_cast<T>(rng.uniform(-limit, limit));
}

}  // namespace

template <typename T>
NetworkParams<T> NetworkParams<T>::initialized(const NetConfig& cfg, uint64_t seed) {
  cfg.validate();
  NetworkParams<T> p;
  p.cfg = cfg;
  RandomStream rng = RandomStream::substream(seed, 0, "init");

  const int bk = cfg.branch_kernel, tk = cfg.trunk_kernel;
  auto init_conv = [&rng](ConvParam<T>& conv, int k, int ci, int co) {
    conv.w = Tensor<T>(k, k, ci, co);
    he_uniform(conv.w, k * k * ci, rng);
    conv.bias.assign(co, T{0});
  };

  init_conv(p.conv_pred, bk, cfg.in_channels, cfg.branch_filters);
  init_conv(p.conv_obs, bk, cfg.in_channels, cfg.branch_filters);
  p.bn_pred.init(cfg.branch_filters);
  p.bn_obs.init(cfg.branch_filters);

  p.trunk.resize(cfg.trunk_blocks);
  p.trunk_bn.resize(cfg.trunk_blocks);
  int ci = cfg.branch_filters * 2;
  for (int i = 0; i < cfg.trunk_blocks; ++i) {
    init_conv(p.trunk[i], tk, ci, cfg.trunk_filters);
    p.trunk_bn[i].init(cfg.trunk_filters);
    ci = cfg.trunk_filters;
  }

  const int flat = cfg.flatten_len();
  p.fc1.w = Tensor<T>(flat, cfg.fc_units, 1, 1);
  he_uniform(p.fc1.w, flat, rng);
  p.fc1.bias.assign(cfg.fc_units, T{0});
  p.fc1_bn.init(cfg.fc_units);

  p.fc2.w = Tensor<T>(cfg.fc_units, cfg.out_units, 1, 1);
  xavier_uniform(p.fc2.w, cfg.fc_units, cfg.out_units, rng);
  p.fc2.bias.assign(cfg.out_units, T{0});
  return p;
}

template <typename T>
void NetworkParams<T>::for_each_trainable(
    const std::function<void(const std::string&, std::span<T>)>& fn) {
  auto conv = [&fn](const std::string& name, ConvParam<T>& c) {
    fn(name + ".w", std::span<T>(c.w.v));
    fn(name + ".b", std::span<T>(c.bias));
  };
  auto bn = [&fn](const std::string& name, BnParam<T>& b) {
    fn(name + ".gain", std::span<T>(b.gain));
    fn(name + ".bias", std::span<T>(b.bias));
  };
  conv("conv_pred", conv_pred);
  bn("bn_pred", bn_pred);
  conv("conv_obs", conv_obs);
  bn("bn_obs", bn_obs);
  for (size_t i = 0; i < trunk.size(); ++i) {
    conv("trunk" + std::to_string(i), trunk[i]);
    bn("trunk" + std::to_string(i) + "_bn", trunk_bn[i]);
  }
  conv("fc1", fc1);
  bn("fc1_bn", fc1_bn);
  conv("fc2", fc2);
}

template <typename T>
void NetworkParams<T>::for_each_state(
    const std::function<void(const std::string&, std::span<T>)>& fn) {
  auto bn = [&fn](const std::string& name, BnParam<T>& b) {
    fn(name + ".run_mean", std::span<T>(b.run_mean));
    fn(name + ".run_var", std::span<T>(b.run_var));
  };
  bn("bn_pred", bn_pred);
  bn("bn_obs", bn_obs);
  for (size_t i = 0; i < trunk_bn.size(); ++i) bn("trunk" + std::to_string(i) + "_bn", trunk_bn[i]);
  bn("fc1_bn", fc1_bn);
}

template <typename T>
size_t NetworkParams<T>::trainable_count() {
  size_t n = 0;
  for_each_trainable([&n](const std::string&, std::span<T> s) { n += s.size(); });
  return n;
}

template <typename T>
size_t NetworkParams<T>::total_count() {
  size_t n = trainable_count();
  for_each_state([&n](const std::string&, std::span<T> s) { n += s.size(); });
  return n;
}

namespace {

template <typename T>
void run_branch(ConvParam<T>& conv, BnParam<T>& bn, const Tensor<T>& input, RunMode mode,
                const NetConfig& cfg, BranchCache<T>& cache, int workers) {
  cache.input = input;
  conv2d_valid(input, conv.w, conv.bias, cache.conv_out, workers);
  batchnorm_forward(cache.conv_out, bn.gain, bn.bias, bn.run_mean, bn.run_var, cache.bn_out,
                    &cache.bn, mode == RunMode::kTrain, cfg.bn_momentum, cfg.bn_eps);
  elu_forward(cache.bn_out, cache.act_out);
  maxpool2(cache.act_out, cache.pool_out, cache.argmax, workers);
}

}  // namespace

template <typename T>
void network_forward(NetworkParams<T>& params, const Tensor<T>& x_pred, const Tensor<T>& x_obs,
                     RunMode mode, RandomStream& rng, ForwardCache<T>& cache, int workers) {
  const NetConfig& cfg = params.cfg;
  if (x_pred.shape != x_obs.shape) throw std::invalid_argument("forward: input shape mismatch");
  if (x_pred.shape[1] != cfg.input_side || x_pred.shape[2] != cfg.input_side ||
      x_pred.shape[3] != cfg.in_channels)
    throw std::invalid_argument("forward: input does not match configured side/channels");

  cache.spatial_sizes.clear();
  run_branch(params.conv_pred, params.bn_pred, x_pred, mode, cfg, cache.pred, workers);
  run_branch(params.conv_obs, params.bn_obs, x_obs, mode, cfg, cache.obs, workers);
  cache.spatial_sizes.push_back(cache.pred.conv_out.shape[1]);
  cache.spatial_sizes.push_back(cache.pred.pool_out.shape[1]);

  concat_channels(cache.pred.pool_out, cache.obs.pool_out, cache.concat_out);

  cache.blocks.resize(cfg.trunk_blocks);
  const Tensor<T>* current = &cache.concat_out;
  for (int i = 0; i < cfg.trunk_blocks; ++i) {
    TrunkCache<T>& block = cache.blocks[i];
    conv2d_valid(*current, params.trunk[i].w, params.trunk[i].bias, block.conv_out, workers);
    batchnorm_forward(block.conv_out, params.trunk_bn[i].gain, params.trunk_bn[i].bias,
                      params.trunk_bn[i].run_mean, params.trunk_bn[i].run_var, block.bn_out,
                      &block.bn, mode == RunMode::kTrain, cfg.bn_momentum, cfg.bn_eps);
    elu_forward(block.bn_out, block.act_out);
    maxpool2(block.act_out, block.pool_out, block.argmax, workers);
    cache.spatial_sizes.push_back(block.conv_out.shape[1]);
    cache.spatial_sizes.push_back(block.pool_out.shape[1]);
    current = &block.pool_out;
  }

  // Flatten [B,h,w,c] -> [B,1,1,h*w*c]; memory order already matches.
  const int batch = current->shape[0];
  const int flat = static_cast<int>(current->size()) / batch;
  cache.flat = *current;
  cache.flat.shape = {batch, 1, 1, flat};

  dropout_forward(cache.flat, cfg.dropout_keep, mode == RunMode::kTrain, rng, cache.drop_out,
                  cache.drop_mask);
  dense_forward(cache.drop_out, params.fc1.w, params.fc1.bias, cache.fc1_out, workers);
  batchnorm_forward(cache.fc1_out, params.fc1_bn.gain, params.fc1_bn.bias, params.fc1_bn.run_mean,
                    params.fc1_bn.run_var, cache.fc1_bn_out, &cache.fc1_bn,
                    mode == RunMode::kTrain, cfg.bn_momentum, cfg.bn_eps);
  elu_forward(cache.fc1_bn_out, cache.fc1_act);
  dense_forward(cache.fc1_act, params.fc2.w, params.fc2.bias, cache.fc2_out, workers);
  tanh_forward(cache.fc2_out, cache.output);
}

template <typename T>
void network_backward(NetworkParams<T>& params, ForwardCache<T>& cache, const Tensor<T>& dout,
                      NetworkParams<T>& grads, int workers) {
  const NetConfig& cfg = params.cfg;
  grads.cfg = cfg;
  grads.trunk.resize(cfg.trunk_blocks);
  grads.trunk_bn.resize(cfg.trunk_blocks);

  Tensor<T> d_fc2_out;
  tanh_backward(cache.output, dout, d_fc2_out);

  Tensor<T> d_fc1_act;
  dense_backward(cache.fc1_act, params.fc2.w, d_fc2_out, d_fc1_act, grads.fc2.w, grads.fc2.bias,
                 workers);

  Tensor<T> d_fc1_bn_out;
  elu_backward(cache.fc1_bn_out, cache.fc1_act, d_fc1_act, d_fc1_bn_out);

  Tensor<T> d_fc1_out;
  batchnorm_backward(cache.fc1_out, params.fc1_bn.gain, cache.fc1_bn, d_fc1_bn_out,
                     d_fc1_out, grads.fc1_bn.gain, grads.fc1_bn.bias);

  Tensor<T> d_drop;
  dense_backward(cache.drop_out, params.fc1.w, d_fc1_out, d_drop, grads.fc1.w, grads.fc1.bias,
                 workers);

  Tensor<T> d_flat;
  dropout_backward(d_drop, cache.drop_mask, cfg.dropout_keep, d_flat);

  // Un-flatten into the last pool output shape.
  const Tensor<T>& last_pool =
      cfg.trunk_blocks > 0 ? cache.blocks.back().pool_out : cache.concat_out;
  Tensor<T> d_current = d_flat;
  d_current.shape = last_pool.shape;

  for (int i = cfg.trunk_blocks - 1; i >= 0; --i) {
    TrunkCache<T>& block = cache.blocks[i];
    const Tensor<T>& block_input = i > 0 ? cache.blocks[i - 1].pool_out : cache.concat_out;

    Tensor<T> d_act;
    maxpool2_backward(d_current, block.argmax, block.act_out.shape, d_act);
    Tensor<T> d_bn_out;
    elu_backward(block.bn_out, block.act_out, d_act, d_bn_out);
    Tensor<T> d_conv_out;
    batchnorm_backward(block.conv_out, params.trunk_bn[i].gain, block.bn, d_bn_out, d_conv_out,
                       grads.trunk_bn[i].gain, grads.trunk_bn[i].bias);
    conv2d_backward(block_input, params.trunk[i].w, d_conv_out, d_current, grads.trunk[i].w,
                    grads.trunk[i].bias, workers);
  }

  Tensor<T> d_pool_pred, d_pool_obs;
  split_channels(d_current, cfg.branch_filters, d_pool_pred, d_pool_obs);

  auto branch_backward = [&](BranchCache<T>& branch, ConvParam<T>& conv, BnParam<T>& bn,
                             Tensor<T>& d_pool, ConvParam<T>& d_conv, BnParam<T>& d_bn) {
    Tensor<T> d_act;
    maxpool2_backward(d_pool, branch.argmax, branch.act_out.shape, d_act);
    Tensor<T> d_bn_out;
    elu_backward(branch.bn_out, branch.act_out, d_act, d_bn_out);
    Tensor<T> d_conv_out;
    batchnorm_backward(branch.conv_out, bn.gain, branch.bn, d_bn_out, d_conv_out, d_bn.gain,
                       d_bn.bias);
    Tensor<T> d_input;  // input gradients unused
    conv2d_backward(branch.input, conv.w, d_conv_out, d_input, d_conv.w, d_conv.bias, workers);
  };
  branch_backward(cache.pred, params.conv_pred, params.bn_pred, d_pool_pred, grads.conv_pred,
                  grads.bn_pred);
  branch_backward(cache.obs, params.conv_obs, params.bn_obs, d_pool_obs, grads.conv_obs,
                  grads.bn_obs);
}

template <typename T>
double mse_loss(const Tensor<T>& y, const Tensor<T>& target, Tensor<T>& d_out) {
  if (y.shape != target.shape) throw std::invalid_argument("mse: shape mismatch");
  if (y.size() == 0) throw std::invalid_argument("mse: empty batch");
  d_out = Tensor<T>(y.shape[0], y.shape[1], y.shape[2], y.shape[3]);
  const double inv_n = 1.0 / static_cast<double>(y.size());
  double loss = 0;
  for (size_t i = 0; i < y.size(); ++i) {
    const double diff = static_cast<double>(y.v[i]) - static_cast<double>(target.v[i]);
    loss += diff * diff;
    d_out.v[i] = static_cast<T>(2.0 * diff * inv_n);
  }
  return loss * inv_n;
}

template struct NetworkParams<float>;
template struct NetworkParams<double>;
template void network_forward<float>(NetworkParams<float>&, const Tensor<float>&,
                                     const Tensor<float>&, RunMode, RandomStream&,
                                     ForwardCache<float>&, int);
template void network_forward<double>(NetworkParams<double>&, const Tensor<double>&,
                                      const Tensor<double>&, RunMode, RandomStream&,
                                      ForwardCache<double>&, int);
template void network_backward<float>(NetworkParams<float>&, ForwardCache<float>&,
                                      const Tensor<float>&, NetworkParams<float>&, int);
template void network_backward<double>(NetworkParams<double>&, ForwardCache<double>&,
                                       const Tensor<double>&, NetworkParams<double>&, int);
template double mse_loss<float>(const Tensor<float>&, const Tensor<float>&, Tensor<float>&);
template double mse_loss<double>(const Tensor<double>&, const Tensor<double>&, Tensor<double>&);

}  // namespace dt6d::nn
