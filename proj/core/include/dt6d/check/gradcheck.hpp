#pragma once

#include <cstdint>

#include "dt6d/check/oracles.hpp"
#include "dt6d/nn/network.hpp"

namespace dt6d::check {

// Finite-difference verification for every layer kind and for the composed
// network at reduced sizes, all in 64-bit precision. Shapes are drawn from
// the given stream so repeated calls cover different configurations.

GradCheckReport check_conv_gradients(RandomStream& rng);
GradCheckReport check_dense_gradients(RandomStream& rng);
GradCheckReport check_batchnorm_gradients(RandomStream& rng);
GradCheckReport check_maxpool_gradients(RandomStream& rng);
GradCheckReport check_elu_gradients(RandomStream& rng);
GradCheckReport check_tanh_gradients(RandomStream& rng);
GradCheckReport check_dropout_gradients(RandomStream& rng);

/// Random small architecture (input side, filters, trunk depth) with MSE
/// loss on a random batch; checks every trainable parameter.
GradCheckReport check_network_gradients(RandomStream& rng);

/// Fixed reduced architecture mirroring the full layer stack (three trunk
/// blocks) at input side 48.
GradCheckReport check_full_stack_gradients(uint64_t seed);

}  // namespace dt6d::check
