// Copyright 2026 The aeroop Authors
// SPDX-License-Identifier: Apache-2.0

#include "aeroop/training.hpp"

#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <numeric>

#include "aeroop/checkpoint.hpp"
#include "aeroop/error.hpp"
#include "aeroop/ops.hpp"
#include "aeroop/rng.hpp"

namespace aeroop {

void TrainConfig::validate() const {
  if (epochs < 1) throw ConfigError("train: epochs must be >= 1");
  if (!(lr0 > 0.0) || !std::isfinite(lr0)) throw ConfigError("train: lr0 must be > 0");
  if (halve_every < 1) throw ConfigError("train: halve_every must be >= 1");
  if (n_rollout < 1) throw ConfigError("train: n_rollout must be >= 1");
  if (batch_size < 1) throw ConfigError("train: batch_size must be >= 1");
  if (!(beta1 >= 0.0 && beta1 < 1.0) || !(beta2 >= 0.0 && beta2 < 1.0)) {
    throw ConfigError("train: Adam betas must lie in [0, 1)");
  }
  if (!(eps > 0.0)) throw ConfigError("train: eps must be > 0");
}

Var rl2_loss(const Tensor& target, const Var& prediction) {
  const double norm = norm2(target);
  if (!(norm > 0.0)) throw DataError("rl2: ground truth has zero norm");
  Tape& tape = *prediction.tape();
  Var diff = ops::sub(prediction, tape.constant(target.reshaped(prediction.shape())));
  return ops::scale(ops::sqrt(ops::reduce_sum(ops::mul(diff, diff))), 1.0 / norm);
}

Var rollout_loss(const BoundModel& model, const WindowSample& sample, std::size_t n,
                 bool detach) {
  if (sample.targets.rank() != 3 || sample.targets.dim(0) < n) {
    throw DataError("rollout loss: sample has " +
                    std::to_string(sample.targets.rank() == 3 ? sample.targets.dim(0) : 0) +
                    " targets, need " + std::to_string(n));
  }
  Tape& tape = model.tape();
  const auto preds = model.rollout(tape.constant(sample.inputs), n, detach);
  const std::size_t h = sample.targets.dim(1), w = sample.targets.dim(2);
  Var total;
  for (std::size_t i = 0; i < n; ++i) {
    auto v = sample.targets.values().subspan(i * h * w, h * w);
    Tensor target = Tensor::real({1, h, w}, std::vector<double>(v.begin(), v.end()));
    Var term = rl2_loss(target, preds[i]);
    total = i == 0 ? term : ops::add(total, term);
  }
  return total;
}

double lr_at(std::size_t epoch, const TrainConfig& config) {
  return config.lr0 * std::pow(0.5, static_cast<double>(epoch / config.halve_every));
}

AdamState AdamState::zeros_like(const std::vector<NamedTensor>& params) {
  AdamState s;
  for (const auto& p : params) {
    s.m.push_back(Tensor::zeros(p.value.shape(), p.value.dtype()));
    s.v.push_back(Tensor::zeros(p.value.shape(), p.value.dtype()));
  }
  return s;
}

namespace {

// Elementwise Adam on a flat run of doubles.
void adam_update(std::span<double> p, std::span<const double> g, std::span<double> m,
                 std::span<double> v, double lr, double b1, double b2, double eps, double c1,
                 double c2) {
  for (std::size_t i = 0; i < p.size(); ++i) {
    m[i] = b1 * m[i] + (1.0 - b1) * g[i];
    v[i] = b2 * v[i] + (1.0 - b2) * g[i] * g[i];
    const double mhat = m[i] / c1;
    const double vhat = v[i] / c2;
    p[i] -= lr * mhat / (std::sqrt(vhat) + eps);
  }
}

std::span<double> flat(Tensor& t) {
  if (t.is_complex()) {
    auto c = t.cvalues();
    return {reinterpret_cast<double*>(c.data()), 2 * c.size()};
  }
  return t.values();
}

std::span<const double> flat(const Tensor& t) {
  if (t.is_complex()) {
    auto c = t.cvalues();
    return {reinterpret_cast<const double*>(c.data()), 2 * c.size()};
  }
  return t.values();
}

}  // namespace

void adam_step(std::vector<NamedTensor>& params, const std::vector<Tensor>& grads,
               AdamState& state, double lr, const TrainConfig& config) {
  if (grads.size() != params.size() || state.m.size() != params.size() ||
      state.v.size() != params.size()) {
    throw ShapeError("adam: parameter, gradient and moment counts differ");
  }
  for (std::size_t i = 0; i < params.size(); ++i) {
    const Tensor& g = grads[i];
    if (g.shape() != params[i].value.shape() || g.dtype() != params[i].value.dtype() ||
        state.m[i].shape() != g.shape() || state.m[i].dtype() != g.dtype()) {
      throw ShapeError("adam: gradient for " + params[i].name + " has shape " +
                       shape_str(g.shape()) + ", parameter " +
                       shape_str(params[i].value.shape()));
    }
    if (!g.all_finite()) {
      throw NumericError("adam: non-finite gradient for " + params[i].name);
    }
  }
  state.step += 1;
  const double c1 = 1.0 - std::pow(config.beta1, static_cast<double>(state.step));
  const double c2 = 1.0 - std::pow(config.beta2, static_cast<double>(state.step));
  for (std::size_t i = 0; i < params.size(); ++i) {
    adam_update(flat(params[i].value), flat(grads[i]), flat(state.m[i]), flat(state.v[i]), lr,
                config.beta1, config.beta2, config.eps, c1, c2);
  }
  for (const auto& p : params) {
    if (!p.value.all_finite()) throw NumericError("adam: parameter " + p.name + " became non-finite");
  }
}

void LossRecord::write_csv(const std::string& path) const {
  std::ofstream out(path);
  if (!out) throw Error("cannot open '" + path + "' for writing");
  out.precision(17);
  out << "epoch,train_loss,val_loss\n";
  for (std::size_t e = 0; e < train_loss.size(); ++e) {
    out << e << ',' << train_loss[e] << ',';
    if (e < val_loss.size() && std::isfinite(val_loss[e])) out << val_loss[e];
    out << '\n';
  }
  if (!out) throw Error("failed writing '" + path + "'");
}

double mean_rollout_loss(const OperatorModel& model, const std::vector<WindowSample>& samples,
                         std::size_t n) {
  if (samples.empty()) return std::nan("");
  double total = 0.0;
  for (const auto& s : samples) {
    Tape tape(false);
    BoundModel bound(model, tape, false);
    total += rollout_loss(bound, s, n).value().item();
  }
  return total / static_cast<double>(samples.size());
}

namespace {

// Working copy of the model parameters in registration order.
std::vector<NamedTensor> take_parameters(const OperatorModel& model) {
  return model.parameters();
}

void put_parameters(OperatorModel& model, std::vector<NamedTensor>& params) {
  for (auto& p : params) model.set_parameter(p.name, p.value);
}

std::string epoch_tag(std::size_t epoch) {
  std::string s = std::to_string(epoch);
  return std::string(s.size() < 4 ? 4 - s.size() : 0, '0') + s;
}

}  // namespace

void train(TrainingState& state, const DatasetSplit& split, const TrainHooks& hooks) {
  const TrainConfig& cfg = state.train;
  cfg.validate();
  if (split.train.empty()) throw DataError("train: empty training split");
  for (const auto* set : {&split.train, &split.val}) {
    for (const auto& s : *set) {
      if (s.targets.dim(0) < cfg.n_rollout) {
        throw DataError("train: windows carry " + std::to_string(s.targets.dim(0)) +
                        " targets, fewer than n_rollout " + std::to_string(cfg.n_rollout));
      }
    }
  }
  if (state.adam.m.empty()) state.adam = AdamState::zeros_like(state.model.parameters());
  if (!hooks.checkpoint_dir.empty()) std::filesystem::create_directories(hooks.checkpoint_dir);

  const std::size_t last = std::min(cfg.epochs, hooks.stop_after.value_or(cfg.epochs));
  const std::size_t n_train = split.train.size();
  for (std::size_t epoch = state.epoch; epoch < last; ++epoch) {
    const auto started = std::chrono::steady_clock::now();
    const double lr = lr_at(epoch, cfg);
    std::vector<std::size_t> order(n_train);
    std::iota(order.begin(), order.end(), 0);
    Rng rng = Rng::stream("training/epoch-" + std::to_string(epoch), cfg.seed);
    for (std::size_t i = order.size(); i > 1; --i) std::swap(order[i - 1], order[rng.below(i)]);

    double epoch_loss = 0.0;
    std::vector<NamedTensor> params = take_parameters(state.model);
    try {
      for (std::size_t start = 0; start < n_train; start += cfg.batch_size) {
        const std::size_t end = std::min(n_train, start + cfg.batch_size);
        const double inv = 1.0 / static_cast<double>(end - start);
        std::vector<Tensor> grads;
        for (const auto& p : params) grads.push_back(Tensor::zeros(p.value.shape(), p.value.dtype()));
        for (std::size_t b = start; b < end; ++b) {
          Tape tape;
          BoundModel bound(state.model, tape, true);
          Var loss = rollout_loss(bound, split.train[order[b]], cfg.n_rollout, cfg.detach_rollout);
          const double value = loss.value().item();
          if (!std::isfinite(value)) throw NumericError("train: non-finite loss");
          epoch_loss += value;
          const GradientSet gs = tape.backward(loss, Tensor::scalar(inv));
          const auto& bp = bound.parameters();
          for (std::size_t i = 0; i < bp.size(); ++i) {
            auto dst = flat(grads[i]);
            auto src = flat(gs[bp[i].second]);
            for (std::size_t j = 0; j < dst.size(); ++j) dst[j] += src[j];
          }
        }
        adam_step(params, grads, state.adam, lr, cfg);
        put_parameters(state.model, params);
      }
    } catch (const NumericError& e) {
      if (!hooks.checkpoint_dir.empty()) {
        save_checkpoint(state, (std::filesystem::path(hooks.checkpoint_dir) / "diagnostic.aoc").string());
      }
      throw NumericError(std::string(e.what()) + " (epoch " + std::to_string(epoch) +
                         (hooks.checkpoint_dir.empty() ? ")" : "; diagnostic checkpoint written)"));
    }

    const double train_loss = epoch_loss / static_cast<double>(n_train);
    const double val_loss = split.val.empty() ? std::nan("")
                                              : mean_rollout_loss(state.model, split.val, cfg.n_rollout);
    state.history.train_loss.push_back(train_loss);
    state.history.val_loss.push_back(val_loss);
    state.history.wall_seconds.push_back(
        std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count());
    state.epoch = epoch + 1;
    if (hooks.on_epoch) hooks.on_epoch(epoch, train_loss, val_loss);
    if (!hooks.checkpoint_dir.empty() && cfg.checkpoint_every > 0 &&
        state.epoch % cfg.checkpoint_every == 0) {
      save_checkpoint(state, (std::filesystem::path(hooks.checkpoint_dir) /
                              ("epoch_" + epoch_tag(state.epoch) + ".aoc"))
                                 .string());
    }
  }
}

}  // namespace aeroop
