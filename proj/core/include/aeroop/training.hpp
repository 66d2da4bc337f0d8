// Copyright 2026 The aeroop Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "aeroop/autodiff.hpp"
#include "aeroop/data.hpp"
#include "aeroop/model.hpp"

namespace aeroop {

struct TrainConfig {
  std::size_t epochs = 500;
  double lr0 = 1e-3;
  std::size_t halve_every = 100;
  std::size_t n_rollout = 4;
  std::size_t batch_size = 8;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
  std::uint64_t seed = 0;
  /// Write a checkpoint every this many epochs; 0 disables.
  std::size_t checkpoint_every = 0;
  /// Feed rollout predictions back as constants (no gradient between steps).
  bool detach_rollout = false;

  void validate() const;
};

/// ||Y - Yhat||_2 / ||Y||_2 over all elements. Throws DataError when
/// ||Y|| == 0.
Var rl2_loss(const Tensor& target, const Var& prediction);
/// Sum over the first n steps of rl2_loss(target_i, rollout_i).
Var rollout_loss(const BoundModel& model, const WindowSample& sample, std::size_t n,
                 bool detach = false);

double lr_at(std::size_t epoch, const TrainConfig& config);

/// Adam first and second moments per parameter plus the step counter.
struct AdamState {
  std::vector<Tensor> m;
  std::vector<Tensor> v;
  std::uint64_t step = 0;

  static AdamState zeros_like(const std::vector<NamedTensor>& params);
};

/// One bias-corrected Adam update. Complex parameters are updated on their
/// real and imaginary parts independently. Throws NumericError on a
/// non-finite gradient before touching any state.
void adam_step(std::vector<NamedTensor>& params, const std::vector<Tensor>& grads,
               AdamState& state, double lr, const TrainConfig& config);

struct LossRecord {
  std::vector<double> train_loss;
  std::vector<double> val_loss;
  /// Seconds per epoch; informational and excluded from persisted files.
  std::vector<double> wall_seconds;

  void write_csv(const std::string& path) const;
};

/// Everything needed to resume training or run inference.
struct TrainingState {
  OperatorModel model;
  TrainConfig train;
  AdamState adam;
  std::size_t epoch = 0;
  Normalizer normalizer;
  std::uint64_t model_seed = 0;
  std::uint64_t data_seed = 0;
  LossRecord history;
};

struct TrainHooks {
  /// Directory for periodic checkpoints (`epoch_XXXX.aoc`) and the diagnostic
  /// checkpoint written on numeric failure (`diagnostic.aoc`). Empty disables
  /// file output.
  std::string checkpoint_dir;
  /// Stop after this many epochs in total, even if train.epochs is larger.
  std::optional<std::size_t> stop_after;
  std::function<void(std::size_t epoch, double train_loss, double val_loss)> on_epoch;
};

/// Trains `state.model` from `state.epoch` up to `state.train.epochs`. The
/// shuffle of epoch e is a pure function of (seed, e), so an interrupted run
/// resumed from a checkpoint reproduces the uninterrupted run exactly.
/// Throws NumericError after writing a diagnostic checkpoint if the loss or a
/// gradient becomes non-finite.
void train(TrainingState& state, const DatasetSplit& split, const TrainHooks& hooks = {});

/// Mean rollout loss over samples without recording a tape.
double mean_rollout_loss(const OperatorModel& model, const std::vector<WindowSample>& samples,
                         std::size_t n);

}  // namespace aeroop
