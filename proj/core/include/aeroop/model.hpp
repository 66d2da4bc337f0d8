// Copyright 2026 The aeroop Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "aeroop/autodiff.hpp"
#include "aeroop/frft.hpp"
#include "aeroop/tensor.hpp"

namespace aeroop {

enum class Flavor { kFno, kCono };
enum class Activation { kSplitGelu, kSplitRelu, kIdentity };

std::string flavor_name(Flavor flavor);
Flavor parse_flavor(const std::string& name);
std::string activation_name(Activation activation);
Activation parse_activation(const std::string& name);

struct ModelConfig {
  Flavor flavor = Flavor::kFno;
  std::size_t history_k = 10;
  std::size_t modes = 12;
  std::size_t width = 20;
  std::size_t n_layers = 4;
  std::size_t projection_hidden = 128;
  bool append_coords = true;
  Activation activation = Activation::kSplitGelu;

  std::size_t input_channels() const { return history_k + (append_coords ? 2 : 0); }
  /// Throws ConfigError on an invalid combination for an H x W grid.
  void validate(std::size_t h, std::size_t w) const;
};

/// "FNO(4)", "CoNOAir(16)": flavor plus the rollout length used in training.
std::string run_label(Flavor flavor, std::size_t n_rollout);

struct NamedTensor {
  std::string name;
  Tensor value;
};

/// Parameters of G = Q o K_L o ... o K_1 o P bound to a training grid.
///
/// Parameter names and shapes (w = width, C = input channels, P = projection
/// hidden, K0 x K1 = kept modes):
///   lift.w  complex (w, C)        lift.b  complex (w)
///   layerL.R complex (w, w, K0, K1)
///   layerL.W complex (w, w)        layerL.b complex (w)
///   layerL.alpha real scalar (CoNO only)
///   proj1.w real (P, w)  proj1.b real (P)  proj2.w real (1, P)  proj2.b real (1)
///
/// Kept modes use the signed frequencies 0..k-1 and -(k-1)..-1 on axis 0
/// (K0 = min(2k - 1, H)) and 0..k-1 on axis 1 (K1 = k). FNO applies them
/// to the uncentered DFT; CoNO applies them to F^alpha in the centered
/// convention at positions (floor(N/2) + f) mod N, so that at alpha = 1 both
/// flavors see the same spectral coefficients up to per-mode phases that
/// cancel between the forward and inverse transforms.
class OperatorModel {
 public:
  OperatorModel(const ModelConfig& config, std::size_t h, std::size_t w, std::uint64_t seed);

  const ModelConfig& config() const { return config_; }
  std::size_t grid_h() const { return h_; }
  std::size_t grid_w() const { return w_; }
  const std::vector<int>& frequencies(int axis) const { return axis == 0 ? freq0_ : freq1_; }

  const std::vector<NamedTensor>& parameters() const { return params_; }
  const Tensor& parameter(const std::string& name) const;
  /// Replace a parameter; shape and dtype must match.
  void set_parameter(const std::string& name, Tensor value);
  /// Scalar count with complex entries counted twice.
  std::size_t parameter_count() const;
  static std::size_t expected_parameter_count(const ModelConfig& config, std::size_t h,
                                              std::size_t w);

 private:
  ModelConfig config_;
  std::size_t h_;
  std::size_t w_;
  std::vector<int> freq0_;
  std::vector<int> freq1_;
  std::vector<NamedTensor> params_;
};

/// A model's parameters placed on a tape, ready for forward evaluation on a
/// fixed grid. With `trainable` the parameters are tape parameters and
/// receive gradients; otherwise they are constants.
class BoundModel {
 public:
  /// Binds at the training grid.
  BoundModel(const OperatorModel& model, Tape& tape, bool trainable = true);
  /// Binds at another grid, keeping the kept-frequency sets of the training
  /// grid. CoNO throws UnsupportedError for any grid but the training one.
  BoundModel(const OperatorModel& model, Tape& tape, bool trainable, std::size_t h,
             std::size_t w);

  Tape& tape() const { return *tape_; }
  const std::vector<std::pair<std::string, Var>>& parameters() const { return params_; }
  const Var& parameter(const std::string& name) const;

  /// history (k x H x W real) -> latent (width x H x W complex).
  Var lift(const Var& history) const;
  Var layer(const Var& v, std::size_t index) const;
  /// Spectral branch of one layer: F^-1(R . F(v)).
  Var spectral(const Var& v, std::size_t index) const;
  /// latent -> 1 x H x W real.
  Var project(const Var& v) const;
  Var forward(const Var& history) const;
  /// n predictions, each 1 x H x W. With `detach` the predictions re-enter
  /// the history as constants, cutting gradients between steps.
  std::vector<Var> rollout(const Var& history, std::size_t n, bool detach = false) const;

 private:
  struct Transforms {
    Var fwd0, fwd1, inv0, inv1;
  };

  Var activate(const Var& z) const;
  Var activate_real(const Var& x) const;

  const OperatorModel* model_;
  Tape* tape_;
  std::size_t h_;
  std::size_t w_;
  std::vector<std::pair<std::string, Var>> params_;
  std::vector<Transforms> transforms_;
  Var coords_;
};

/// Inference without recording: k x H x W -> 1 x H x W.
Tensor predict(const OperatorModel& model, const Tensor& history);
/// n x H x W autoregressive forecast.
Tensor predict_rollout(const OperatorModel& model, const Tensor& history, std::size_t n);
/// FNO forward on a grid other than the training grid (spectral weights are
/// reused at the same signed frequencies). CoNO throws UnsupportedError.
Tensor evaluate_at_resolution(const OperatorModel& model, const Tensor& history);

}  // namespace aeroop
