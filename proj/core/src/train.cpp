#include "dt6d/nn/train.hpp"

#include <algorithm>
#include <cstdio>
#include <limits>
#include <stdexcept>

#include "dt6d/errors.hpp"
#include "dt6d/nn/adam.hpp"
#include "dt6d/parallel.hpp"

namespace dt6d::nn {

void TrainConfig::validate() const {
  if (batch < 2) throw std::invalid_argument("train: batch must be >= 2 (batch norm)");
  if (lr <= 0) throw std::invalid_argument("train: learning rate must be positive");
  if (decay < 0 || patience < 0 || max_epochs < 1)
    throw std::invalid_argument("train: decay/patience/max_epochs out of range");
}

namespace {

void load_batch(const Dataset& ds, const std::vector<size_t>& indices, size_t begin, size_t count,
                int side, Tensor<float>& x_pred, Tensor<float>& x_obs, Tensor<float>& target,
                int workers) {
  const int s = side;
  x_pred = Tensor<float>(static_cast<int>(count), s, s, 4);
  x_obs = Tensor<float>(static_cast<int>(count), s, s, 4);
  target = Tensor<float>(static_cast<int>(count), 1, 1, 6);
  const size_t grid = static_cast<size_t>(s) * s * 4;
  parallel_for(count, workers, [&](size_t lo, size_t hi) {
    for (size_t b = lo; b < hi; ++b) {
      ds.load_pair(indices[begin + b], &x_pred.v[b * grid], &x_obs.v[b * grid],
                   &target.v[b * 6]);
    }
  });
}

double validation_mse(const Dataset& ds, const std::vector<size_t>& val_idx,
                      NetworkParams<float>& params, int batch, int workers) {
  RandomStream rng(0);  // unused in eval mode
  ForwardCache<float> cache;
  Tensor<float> x_pred, x_obs, target, d_out;
  double total = 0;
  size_t seen = 0;
  for (size_t begin = 0; begin < val_idx.size(); begin += static_cast<size_t>(batch)) {
    const size_t n = std::min<size_t>(batch, val_idx.size() - begin);
    load_batch(ds, val_idx, begin, n, params.cfg.input_side, x_pred, x_obs, target, workers);
    network_forward(params, x_pred, x_obs, RunMode::kEval, rng, cache, workers);
    total += mse_loss(cache.output, target, d_out) * static_cast<double>(n);
    seen += n;
  }
  return total / static_cast<double>(seen);
}

}  // namespace

TrainResult train_model(const Dataset& dataset, const NetConfig& net_cfg, const TrainConfig& cfg,
                        int workers, const std::function<void(const EpochRecord&)>& progress) {
  cfg.validate();
  net_cfg.validate();
  if (static_cast<int>(dataset.header().side) != net_cfg.input_side)
    throw std::invalid_argument("train: dataset side does not match network input side");

  std::vector<size_t> train_idx, val_idx;
  for (size_t i = 0; i < dataset.size(); ++i)
    (dataset.is_validation(i) ? val_idx : train_idx).push_back(i);
  const size_t need = static_cast<size_t>(cfg.batch) * 2;
  if (train_idx.size() < need || val_idx.size() < need)
    throw std::invalid_argument("train: dataset too small (need >= 2 batches per split, have " +
                                std::to_string(train_idx.size()) + "/" +
                                std::to_string(val_idx.size()) + ")");

  NetworkParams<float> params = NetworkParams<float>::initialized(net_cfg, cfg.seed);
  NetworkParams<float> grads;
  OptimizerState<float> opt = OptimizerState<float>::for_params(params, cfg.lr, cfg.decay);

  TrainResult result;
  result.best_val_mse = std::numeric_limits<double>::infinity();
  NetworkParams<float> best = params;
  int epochs_since_improvement = 0;
  uint64_t global_step = 0;

  ForwardCache<float> cache;
  Tensor<float> x_pred, x_obs, target, d_out;

  for (int epoch = 1; epoch <= cfg.max_epochs; ++epoch) {
    // Seeded Fisher-Yates shuffle, independent of worker count.
    RandomStream shuffle_rng = RandomStream::substream(cfg.seed, static_cast<uint64_t>(epoch), "shuffle");
    for (size_t i = train_idx.size(); i > 1; --i)
      std::swap(train_idx[i - 1], train_idx[shuffle_rng.uniform_index(i)]);

    double train_loss_sum = 0;
    size_t steps = 0;
    const size_t full_batches = train_idx.size() / static_cast<size_t>(cfg.batch);
    for (size_t bi = 0; bi < full_batches; ++bi) {
      load_batch(dataset, train_idx, bi * cfg.batch, static_cast<size_t>(cfg.batch),
                 net_cfg.input_side, x_pred, x_obs, target, workers);
      RandomStream dropout_rng = RandomStream::substream(cfg.seed, global_step, "dropout");
      network_forward(params, x_pred, x_obs, RunMode::kTrain, dropout_rng, cache, workers);
      train_loss_sum += mse_loss(cache.output, target, d_out);
      network_backward(params, cache, d_out, grads, workers);
      adam_step(params, grads, opt);
      ++global_step;
      ++steps;
    }

    EpochRecord rec;
    rec.epoch = epoch;
    rec.train_mse = train_loss_sum / static_cast<double>(steps);
    rec.val_mse = validation_mse(dataset, val_idx, params, cfg.batch, workers);
    rec.lr = opt.current_lr();
    result.history.push_back(rec);
    if (progress) progress(rec);

    if (rec.val_mse < result.best_val_mse) {
      result.best_val_mse = rec.val_mse;
      result.best_epoch = epoch;
      best = params;
      epochs_since_improvement = 0;
    } else {
      ++epochs_since_improvement;
    }
    if (epochs_since_improvement >= cfg.patience) break;
  }

  result.params = std::move(best);
  return result;
}

void write_history_csv(const std::vector<EpochRecord>& history, const std::string& path) {
  FILE* f = std::fopen(path.c_str(), "w");
  if (!f) throw FormatError("history: cannot open for writing: " + path);
  std::fprintf(f, "epoch,train_mse,val_mse,lr\n");
  for (const auto& rec : history)
    std::fprintf(f, "%d,%.9g,%.9g,%.9g\n", rec.epoch, rec.train_mse, rec.val_mse, rec.lr);
  std::fclose(f);
}

}  // namespace dt6d::nn
