// Copyright 2026 The aeroop Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <functional>
#include <map>
#include <memory>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "aeroop/tensor.hpp"

namespace aeroop {

class Tape;

/// Handle to a value produced on a Tape.
///
/// Vars are cheap to copy; the underlying tensor is shared and immutable.
class Var {
 public:
  Var() = default;

  const Tensor& value() const { return *value_; }
  const Shape& shape() const { return value_->shape(); }
  bool is_complex() const { return value_->is_complex(); }
  /// Node id on the owning tape, or -1 when the tape is not recording.
  int id() const { return id_; }
  Tape* tape() const { return tape_; }
  bool valid() const { return value_ != nullptr; }
  const std::shared_ptr<const Tensor>& shared_value() const { return value_; }

 private:
  friend class Tape;
  Var(Tape* tape, int id, std::shared_ptr<const Tensor> value)
      : tape_(tape), id_(id), value_(std::move(value)) {}

  Tape* tape_ = nullptr;
  int id_ = -1;
  std::shared_ptr<const Tensor> value_;
};

/// Arguments handed to a primitive's backward rule.
///
/// Gradients follow the conjugate-cotangent convention: for a real loss L and
/// a complex value z = a + ib the stored gradient is dL/da + i dL/db. A real
/// loss therefore decreases along the negative returned direction for both
/// real and complex parameters, and a linear map y = A x propagates
/// gx = A^H gy.
struct BackwardArgs {
  std::span<const Tensor* const> inputs;
  const Tensor& output;
  const Tensor& grad;
  /// need[i] is false when input i does not lead to a parameter.
  std::span<const bool> need;
  /// The rule assigns grad_inputs[i] for every i with need[i].
  std::span<Tensor> grad_inputs;
};

using ForwardFn = std::function<Tensor(std::span<const Tensor* const>)>;
using BackwardFn = std::function<void(const BackwardArgs&)>;

/// Gradients keyed by parameter node id. Shapes and dtypes match the
/// parameters exactly; parameters without a path to the output get zeros.
class GradientSet {
 public:
  const Tensor& operator[](const Var& param) const { return at(param.id()); }
  const Tensor& at(int id) const;
  bool contains(int id) const { return grads_.count(id) != 0; }
  std::size_t size() const { return grads_.size(); }
  const std::map<int, Tensor>& entries() const { return grads_; }

 private:
  friend class Tape;
  std::map<int, Tensor> grads_;
};

/// Dynamic computation tape for reverse-mode differentiation.
///
/// Primitives evaluate eagerly and, when recording, append a node holding the
/// output value plus forward and backward rules. Nodes are appended in
/// evaluation order, so inputs always precede their consumers. A tape and its
/// vars are confined to one thread; use one tape per forward/backward pass.
class Tape {
 public:
  explicit Tape(bool record = true) : record_(record) {}
  Tape(const Tape&) = delete;
  Tape& operator=(const Tape&) = delete;

  bool recording() const { return record_; }
  std::size_t size() const { return nodes_.size(); }

  /// Leaf that never receives a gradient.
  Var constant(Tensor value);
  /// Leaf that receives a gradient in backward().
  Var parameter(Tensor value);

  /// Evaluate a primitive and record it. Throws ShapeError from `forward`
  /// and NumericError if the result holds NaN/Inf.
  Var apply(std::string_view op, const std::vector<Var>& inputs,
            ForwardFn forward, BackwardFn backward);

  /// Backward pass seeded with ones; the output must have one element.
  GradientSet backward(const Var& output) const;
  GradientSet backward(const Var& output, const Tensor& seed) const;

  /// Recompute every node from its inputs and compare bit-for-bit with the
  /// recorded values. Throws Error naming the first diverging node.
  void verify_replay() const;

  std::vector<int> parameter_ids() const;
  const std::string& op_name(int id) const { return nodes_.at(id).op; }
  const std::vector<int>& node_inputs(int id) const { return nodes_.at(id).inputs; }

 private:
  struct Node {
    std::string op;
    std::vector<int> inputs;
    std::shared_ptr<const Tensor> value;
    ForwardFn forward;
    BackwardFn backward;
    bool leaf = false;
    bool param = false;
    bool requires_grad = false;
  };

  Var leaf(Tensor value, bool param);

  bool record_;
  std::vector<Node> nodes_;
};

}  // namespace aeroop
