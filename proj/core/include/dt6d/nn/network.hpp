#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "dt6d/nn/ops.hpp"
#include "dt6d/nn/tensor.hpp"
#include "dt6d/rand.hpp"

namespace dt6d::nn {

/// Two-branch regressor layout. Defaults reproduce the full architecture:
/// per-branch conv5-24, concat, three conv3-48 trunk blocks, FC-50, FC-6,
/// every conv/pool pair halving resolution, BN+ELU after all but the tanh
/// output layer. Reduced variants shrink the input side and filter counts.
struct NetConfig {
  int input_side = 150;
  int in_channels = 4;
  int branch_filters = 24;
  int branch_kernel = 5;
  int trunk_filters = 48;
  int trunk_kernel = 3;
  int trunk_blocks = 3;
  int fc_units = 50;
  int out_units = 6;
  double bn_momentum = 0.99;
  double bn_eps = 1e-5;
  double dropout_keep = 0.5;

  /// Spatial sizes after each conv and pool, starting at the branch conv:
  /// e.g. side 150 -> {146, 73, 71, 35, 33, 16, 14, 7}.
  std::vector<int> spatial_chain() const;
  int flatten_len() const;
  void validate() const;

  bool operator==(const NetConfig&) const = default;
};

template <typename T>
struct ConvParam {
  Tensor<T> w;
  std::vector<T> bias;
};

template <typename T>
struct BnParam {
  std::vector<T> gain, bias, run_mean, run_var;

  void init(int channels) {
    gain.assign(channels, T{1});
    bias.assign(channels, T{0});
    run_mean.assign(channels, T{0});
    run_var.assign(channels, T{1});
  }
};

/// All weights and batch-norm state of the network.
template <typename T>
struct NetworkParams {
  NetConfig cfg;
  ConvParam<T> conv_pred, conv_obs;
  BnParam<T> bn_pred, bn_obs;
  std::vector<ConvParam<T>> trunk;
  std::vector<BnParam<T>> trunk_bn;
  ConvParam<T> fc1;  // w shape [flatten, fc_units]
  BnParam<T> fc1_bn;
  ConvParam<T> fc2;  // w shape [fc_units, out_units]

  /// He-uniform for layers feeding ELU, Xavier-uniform for the tanh head.
  static NetworkParams initialized(const NetConfig& cfg, uint64_t seed);

  /// Enumerates trainable arrays (conv/dense weights and biases, BN gain
  /// and bias) in a fixed order shared by the optimizer and serializer.
  void for_each_trainable(const std::function<void(const std::string&, std::span<T>)>& fn);
  /// Enumerates non-trainable state (BN running mean/variance).
  void for_each_state(const std::function<void(const std::string&, std::span<T>)>& fn);

  size_t trainable_count();
  size_t total_count();  // trainable + running statistics
};

template <typename T>
struct BranchCache {
  Tensor<T> input, conv_out, bn_out, act_out, pool_out;
  BnCache<T> bn;
  std::vector<int64_t> argmax;
};

template <typename T>
struct TrunkCache {
  Tensor<T> conv_out, bn_out, act_out, pool_out;
  BnCache<T> bn;
  std::vector<int64_t> argmax;
};

/// Every intermediate the backward pass needs, plus per-layer spatial
/// shapes for shape-chain checks.
template <typename T>
struct ForwardCache {
  BranchCache<T> pred, obs;
  Tensor<T> concat_out;
  std::vector<TrunkCache<T>> blocks;
  Tensor<T> flat, drop_out, fc1_out, fc1_bn_out, fc1_act, fc2_out, output;
  BnCache<T> fc1_bn;
  std::vector<uint8_t> drop_mask;
  std::vector<int> spatial_sizes;
};

enum class RunMode { kTrain, kEval };

/// Full forward pass. x_pred/x_obs: [B,S,S,4]. Returns [B,1,1,out_units]
/// through cache.output; dropout draws from rng only in train mode.
template <typename T>
void network_forward(NetworkParams<T>& params, const Tensor<T>& x_pred, const Tensor<T>& x_obs,
                     RunMode mode, RandomStream& rng, ForwardCache<T>& cache, int workers = 1);

/// Backward from dL/doutput; fills grads (same layout as params; running
/// stats in grads are unused).
template <typename T>
void network_backward(NetworkParams<T>& params, ForwardCache<T>& cache, const Tensor<T>& dout,
                      NetworkParams<T>& grads, int workers = 1);

/// Mean squared error over batch and components; d_out receives dL/dy.
template <typename T>
double mse_loss(const Tensor<T>& y, const Tensor<T>& target, Tensor<T>& d_out);

extern template struct NetworkParams<float>;
extern template struct NetworkParams<double>;
extern template void network_forward<float>(NetworkParams<float>&, const Tensor<float>&,
                                            const Tensor<float>&, RunMode, RandomStream&,
                                            ForwardCache<float>&, int);
extern template void network_forward<double>(NetworkParams<double>&, const Tensor<double>&,
                                             const Tensor<double>&, RunMode, RandomStream&,
                                             ForwardCache<double>&, int);
extern template void network_backward<float>(NetworkParams<float>&, ForwardCache<float>&,
                                             const Tensor<float>&, NetworkParams<float>&, int);
extern template void network_backward<double>(NetworkParams<double>&, ForwardCache<double>&,
                                              const Tensor<double>&, NetworkParams<double>&, int);
extern template double mse_loss<float>(const Tensor<float>&, const Tensor<float>&, Tensor<float>&);
extern template double mse_loss<double>(const Tensor<double>&, const Tensor<double>&, Tensor<double>&);

}  // namespace dt6d::nn
