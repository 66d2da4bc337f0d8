// Copyright 2026 The aeroop Authors
// SPDX-License-Identifier: Apache-2.0

#include "aeroop/model.hpp"

#include <cmath>
#include <numbers>

#include "aeroop/error.hpp"
#include "aeroop/ops.hpp"
#include "aeroop/rng.hpp"

namespace aeroop {

std::string flavor_name(Flavor flavor) { return flavor == Flavor::kFno ? "fno" : "cono"; }

Flavor parse_flavor(const std::string& name) {
  if (name == "fno") return Flavor::kFno;
  if (name == "cono") return Flavor::kCono;
  throw ConfigError("unknown model flavor '" + name + "' (expected fno or cono)");
}

std::string activation_name(Activation activation) {
  switch (activation) {
    case Activation::kSplitGelu: return "split-gelu";
    case Activation::kSplitRelu: return "split-relu";
    case Activation::kIdentity: return "identity";
  }
  return "?";
}

Activation parse_activation(const std::string& name) {
  if (name == "split-gelu") return Activation::kSplitGelu;
  if (name == "split-relu") return Activation::kSplitRelu;
  if (name == "identity") return Activation::kIdentity;
  throw ConfigError("unknown activation '" + name +
                    "' (expected split-gelu, split-relu or identity)");
}

void ModelConfig::validate(std::size_t h, std::size_t w) const {
  if (history_k < 1) throw ConfigError("model: history_k must be >= 1");
  if (width < 1) throw ConfigError("model: width must be >= 1");
  if (n_layers < 1) throw ConfigError("model: n_layers must be >= 1");
  if (projection_hidden < 1) throw ConfigError("model: projection_hidden must be >= 1");
  if (modes < 1 || modes > std::min(h, w)) {
    throw ConfigError("model: modes " + std::to_string(modes) + " must lie in [1, " +
                      std::to_string(std::min(h, w)) + "] for a " + std::to_string(h) + "x" +
                      std::to_string(w) + " grid");
  }
}

std::string run_label(Flavor flavor, std::size_t n_rollout) {
  return std::string(flavor == Flavor::kFno ? "FNO" : "CoNOAir") + "(" +
         std::to_string(n_rollout) + ")";
}

namespace {

Tensor uniform_real(Rng& rng, Shape shape, double bound) {
  std::vector<double> v(shape_numel(shape));
  for (double& x : v) x = rng.uniform(-bound, bound);
  return Tensor::real(std::move(shape), std::move(v));
}

Tensor uniform_complex(Rng& rng, Shape shape, double bound) {
  std::vector<cplx> v(shape_numel(shape));
  for (cplx& z : v) {
    const double re = rng.uniform(-bound, bound);
    const double im = rng.uniform(-bound, bound);
    z = cplx(re, im);
  }
  return Tensor::complex(std::move(shape), std::move(v));
}

std::string layer_name(std::size_t l, const char* field) {
  return "layer" + std::to_string(l) + "." + field;
}

}  // namespace

OperatorModel::OperatorModel(const ModelConfig& config, std::size_t h, std::size_t w,
                             std::uint64_t seed)
    : config_(config), h_(h), w_(w) {
  config.validate(h, w);
  freq0_ = kept_frequencies(h, config.modes, 0);
  freq1_ = kept_frequencies(w, config.modes, 1);

  Rng rng = Rng::stream("operator-models", seed);
  const std::size_t width = config.width, in = config.input_channels();
  const std::size_t hidden = config.projection_hidden;
  const double lift_bound = 1.0 / std::sqrt(static_cast<double>(in));
  const double width_bound = 1.0 / std::sqrt(static_cast<double>(width));
  const double hidden_bound = 1.0 / std::sqrt(static_cast<double>(hidden));
  const double spectral_bound = 1.0 / static_cast<double>(width * width);

  params_.push_back({"lift.w", uniform_complex(rng, {width, in}, lift_bound)});
  params_.push_back({"lift.b", uniform_complex(rng, {width}, lift_bound)});
  for (std::size_t l = 0; l < config.n_layers; ++l) {
    params_.push_back({layer_name(l, "R"),
                       uniform_complex(rng, {width, width, freq0_.size(), freq1_.size()},
                                       spectral_bound)});
    params_.push_back({layer_name(l, "W"), uniform_complex(rng, {width, width}, width_bound)});
    params_.push_back({layer_name(l, "b"), uniform_complex(rng, {width}, width_bound)});
    if (config.flavor == Flavor::kCono) {
      params_.push_back({layer_name(l, "alpha"), Tensor::scalar(1.0)});
    }
  }
  params_.push_back({"proj1.w", uniform_real(rng, {hidden, width}, width_bound)});
  params_.push_back({"proj1.b", uniform_real(rng, {hidden}, width_bound)});
  params_.push_back({"proj2.w", uniform_real(rng, {1, hidden}, hidden_bound)});
  params_.push_back({"proj2.b", uniform_real(rng, {1}, hidden_bound)});
}

const Tensor& OperatorModel::parameter(const std::string& name) const {
  for (const auto& p : params_) {
    if (p.name == name) return p.value;
  }
  throw Error("model: no parameter named '" + name + "'");
}

void OperatorModel::set_parameter(const std::string& name, Tensor value) {
  for (auto& p : params_) {
    if (p.name != name) continue;
    if (p.value.shape() != value.shape() || p.value.dtype() != value.dtype()) {
      throw ShapeError("model: parameter " + name + " expects " + shape_str(p.value.shape()) +
                       " " + dtype_str(p.value.dtype()) + ", got " +
                       shape_str(value.shape()) + " " + dtype_str(value.dtype()));
    }
    p.value = std::move(value);
    return;
  }
  throw Error("model: no parameter named '" + name + "'");
}

std::size_t OperatorModel::parameter_count() const {
  std::size_t n = 0;
  for (const auto& p : params_) n += p.value.size() * (p.value.is_complex() ? 2 : 1);
  return n;
}

std::size_t OperatorModel::expected_parameter_count(const ModelConfig& c, std::size_t h,
                                                    std::size_t w) {
  const std::size_t k0 = std::min(2 * c.modes - 1, h);
  const std::size_t k1 = c.modes;
  (void)w;
  const std::size_t width = c.width, in = c.input_channels(), p = c.projection_hidden;
  const std::size_t spectral = 2 * width * width * k0 * k1;
  const std::size_t affine = 2 * width * width + 2 * width;
  const std::size_t alpha = c.flavor == Flavor::kCono ? 1 : 0;
  return 2 * width * in + 2 * width + c.n_layers * (spectral + affine + alpha) + p * width + p +
         p + 1;
}

namespace {

// Partial DFT matrices at signed frequencies f: forward (K x N) with
// exp(-2 pi i f n / N), inverse (N x K) with exp(+2 pi i f n / N) / N.
Tensor dft_rows(const std::vector<int>& freqs, std::size_t n) {
  std::vector<cplx> m(freqs.size() * n);
  for (std::size_t j = 0; j < freqs.size(); ++j) {
    for (std::size_t x = 0; x < n; ++x) {
      const long phase = (static_cast<long>(freqs[j]) * static_cast<long>(x)) %
                         static_cast<long>(n);
      m[j * n + x] = std::polar(1.0, -2.0 * std::numbers::pi * static_cast<double>(phase) /
                                         static_cast<double>(n));
    }
  }
  return Tensor::complex({freqs.size(), n}, std::move(m));
}

Tensor idft_cols(const std::vector<int>& freqs, std::size_t n) {
  std::vector<cplx> m(n * freqs.size());
  for (std::size_t x = 0; x < n; ++x) {
    for (std::size_t j = 0; j < freqs.size(); ++j) {
      const long phase = (static_cast<long>(freqs[j]) * static_cast<long>(x)) %
                         static_cast<long>(n);
      m[x * freqs.size() + j] =
          std::polar(1.0 / static_cast<double>(n),
                     2.0 * std::numbers::pi * static_cast<double>(phase) / static_cast<double>(n));
    }
  }
  return Tensor::complex({n, freqs.size()}, std::move(m));
}

void require_distinct(const std::vector<int>& freqs, std::size_t n, int axis) {
  std::vector<char> seen(n, 0);
  for (int f : freqs) {
    const auto len = static_cast<long>(n);
    const auto pos = static_cast<std::size_t>(((f % len) + len) % len);
    if (seen[pos]) {
      throw ShapeError("model: axis " + std::to_string(axis) + " of size " + std::to_string(n) +
                       " cannot hold the " + std::to_string(freqs.size()) +
                       " kept frequencies of the training grid");
    }
    seen[pos] = 1;
  }
}

std::vector<std::size_t> centered_positions(const std::vector<int>& freqs, std::size_t n) {
  std::vector<std::size_t> out;
  const auto len = static_cast<long>(n);
  for (int f : freqs) out.push_back(static_cast<std::size_t>(((len / 2 + f) % len + len) % len));
  return out;
}

Tensor coordinate_channels(std::size_t h, std::size_t w) {
  std::vector<double> c(2 * h * w);
  for (std::size_t i = 0; i < h; ++i) {
    for (std::size_t j = 0; j < w; ++j) {
      c[i * w + j] = h > 1 ? static_cast<double>(i) / static_cast<double>(h - 1) : 0.0;
      c[h * w + i * w + j] = w > 1 ? static_cast<double>(j) / static_cast<double>(w - 1) : 0.0;
    }
  }
  return Tensor::real({2, h, w}, std::move(c));
}

}  // namespace

BoundModel::BoundModel(const OperatorModel& model, Tape& tape, bool trainable)
    : BoundModel(model, tape, trainable, model.grid_h(), model.grid_w()) {}

BoundModel::BoundModel(const OperatorModel& model, Tape& tape, bool trainable, std::size_t h,
                       std::size_t w)
    : model_(&model), tape_(&tape), h_(h), w_(w) {
  const ModelConfig& c = model.config();
  const bool native = h == model.grid_h() && w == model.grid_w();
  if (c.flavor == Flavor::kCono && !native) {
    throw UnsupportedError(
        "CoNO evaluation at a resolution other than the training grid is not supported: the "
        "fractional Fourier eigenbasis depends on the grid size, so the learned weights have "
        "no defined meaning at " +
        std::to_string(h) + "x" + std::to_string(w));
  }
  require_distinct(model.frequencies(0), h, 0);
  require_distinct(model.frequencies(1), w, 1);

  for (const auto& p : model.parameters()) {
    params_.emplace_back(p.name, trainable ? tape.parameter(p.value) : tape.constant(p.value));
  }
  if (c.append_coords) coords_ = tape.constant(coordinate_channels(h, w));

  if (c.flavor == Flavor::kFno) {
    Transforms t;
    t.fwd0 = tape.constant(dft_rows(model.frequencies(0), h));
    t.fwd1 = tape.constant(dft_rows(model.frequencies(1), w));
    t.inv0 = tape.constant(idft_cols(model.frequencies(0), h));
    t.inv1 = tape.constant(idft_cols(model.frequencies(1), w));
    transforms_.assign(c.n_layers, t);
  } else {
    const auto b0 = dfrft_basis(h);
    const auto b1 = dfrft_basis(w);
    const auto rows0 = centered_positions(model.frequencies(0), h);
    const auto rows1 = centered_positions(model.frequencies(1), w);
    for (std::size_t l = 0; l < c.n_layers; ++l) {
      const Var& alpha = parameter(layer_name(l, "alpha"));
      const Var neg = ops::scale(alpha, -1.0);
      Transforms t;
      t.fwd0 = frft_rows(alpha, b0, rows0);
      t.fwd1 = frft_rows(alpha, b1, rows1);
      // F^-alpha is symmetric, so its kept columns are the transpose of its
      // kept rows.
      t.inv0 = ops::transpose(frft_rows(neg, b0, rows0));
      t.inv1 = ops::transpose(frft_rows(neg, b1, rows1));
      transforms_.push_back(t);
    }
  }
}

const Var& BoundModel::parameter(const std::string& name) const {
  for (const auto& p : params_) {
    if (p.first == name) return p.second;
  }
  throw Error("model: no parameter named '" + name + "'");
}

// Both activations act split-wise on complex input.
Var BoundModel::activate_real(const Var& x) const {
  switch (model_->config().activation) {
    case Activation::kSplitGelu: return ops::gelu(x);
    case Activation::kSplitRelu: return ops::relu(x);
    case Activation::kIdentity: return x;
  }
  return x;
}

Var BoundModel::activate(const Var& z) const {
  return activate_real(z);
}

Var BoundModel::lift(const Var& history) const {
  const ModelConfig& c = model_->config();
  const Shape expected{c.history_k, h_, w_};
  if (history.shape() != expected || history.is_complex()) {
    throw ShapeError("model: history must be real " + shape_str(expected) + ", got " +
                     shape_str(history.shape()) + " " + dtype_str(history.value().dtype()));
  }
  Var x = c.append_coords ? ops::concat({history, coords_}) : history;
  Var z = ops::axis_matmul(parameter("lift.w"), ops::complex_from_real(x), 0);
  return ops::add_channel_bias(z, parameter("lift.b"));
}

Var BoundModel::spectral(const Var& v, std::size_t index) const {
  const Transforms& t = transforms_.at(index);
  Var z = ops::axis_matmul(t.fwd1, v, 2);
  z = ops::axis_matmul(t.fwd0, z, 1);
  z = ops::mode_mix(parameter(layer_name(index, "R")), z);
  z = ops::axis_matmul(t.inv0, z, 1);
  return ops::axis_matmul(t.inv1, z, 2);
}

Var BoundModel::layer(const Var& v, std::size_t index) const {
  Var pointwise = ops::add_channel_bias(ops::axis_matmul(parameter(layer_name(index, "W")), v, 0),
                                        parameter(layer_name(index, "b")));
  return activate(ops::add(pointwise, spectral(v, index)));
}

Var BoundModel::project(const Var& v) const {
  Var x = ops::real_part(v);
  x = ops::add_channel_bias(ops::axis_matmul(parameter("proj1.w"), x, 0), parameter("proj1.b"));
  x = activate_real(x);
  return ops::add_channel_bias(ops::axis_matmul(parameter("proj2.w"), x, 0),
                               parameter("proj2.b"));
}

Var BoundModel::forward(const Var& history) const {
  Var v = lift(history);
  for (std::size_t l = 0; l < model_->config().n_layers; ++l) v = layer(v, l);
  return project(v);
}

std::vector<Var> BoundModel::rollout(const Var& history, std::size_t n, bool detach) const {
  if (n < 1) throw ShapeError("rollout: step count must be >= 1");
  const std::size_t k = model_->config().history_k;
  std::vector<Var> out;
  Var h = history;
  for (std::size_t i = 0; i < n; ++i) {
    Var y = forward(h);
    out.push_back(y);
    if (i + 1 == n) break;
    Var next = detach ? tape_->constant(y.value()) : y;
    h = k > 1 ? ops::concat({ops::slice(h, 1, k), next}) : next;
  }
  return out;
}

Tensor predict(const OperatorModel& model, const Tensor& history) {
  Tape tape(false);
  BoundModel bound(model, tape, false);
  return bound.forward(tape.constant(history)).value();
}

Tensor predict_rollout(const OperatorModel& model, const Tensor& history, std::size_t n) {
  Tape tape(false);
  BoundModel bound(model, tape, false);
  const auto steps = bound.rollout(tape.constant(history), n);
  const std::size_t plane = model.grid_h() * model.grid_w();
  std::vector<double> out(n * plane);
  for (std::size_t i = 0; i < n; ++i) {
    auto v = steps[i].value().values();
    std::copy(v.begin(), v.end(), out.begin() + i * plane);
  }
  return Tensor::real({n, model.grid_h(), model.grid_w()}, std::move(out));
}

Tensor evaluate_at_resolution(const OperatorModel& model, const Tensor& history) {
  if (model.config().flavor == Flavor::kCono) {
    throw UnsupportedError(
        "cross-resolution evaluation is only defined for the FNO flavor; the CoNO fractional "
        "Fourier eigenbasis is specific to the training grid size");
  }
  if (history.rank() != 3) {
    throw ShapeError("evaluate_at_resolution: history must be k x H x W, got " +
                     shape_str(history.shape()));
  }
  Tape tape(false);
  BoundModel bound(model, tape, false, history.dim(1), history.dim(2));
  return bound.forward(tape.constant(history)).value();
}

}  // namespace aeroop
