#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "dt6d/dataset.hpp"
#include "dt6d/nn/network.hpp"

namespace dt6d::nn {

struct TrainConfig {
  int batch = 64;
  double lr = 0.005;
  double decay = 1e-5;  // per-step: lr_t = lr / (1 + decay * t)
  int patience = 5;     // epochs without validation improvement before stopping
  int max_epochs = 50;
  uint64_t seed = 1;

  void validate() const;
};

struct EpochRecord {
  int epoch = 0;
  double train_mse = 0;
  double val_mse = 0;
  double lr = 0;
};

struct TrainResult {
  NetworkParams<float> params;  // best-validation snapshot
  std::vector<EpochRecord> history;
  int best_epoch = 0;
  double best_val_mse = 0;
};

/// Minibatch training with shuffled epochs, per-epoch validation and early
/// stopping on the validation MSE. Fully deterministic from (seed, dataset,
/// config) for any worker count. `progress` (optional) is called after each
/// epoch.
TrainResult train_model(const Dataset& dataset, const NetConfig& net_cfg, const TrainConfig& cfg,
                        int workers,
                        const std::function<void(const EpochRecord&)>& progress = nullptr);

/// History CSV: epoch, train_mse, val_mse, lr.
void write_history_csv(const std::vector<EpochRecord>& history, const std::string& path);

}  // namespace dt6d::nn
