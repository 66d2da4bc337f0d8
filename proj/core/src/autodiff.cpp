// Copyright 2026 The aeroop Authors
// SPDX-License-Identifier: Apache-2.0

#include "aeroop/autodiff.hpp"

#include <optional>

#include "aeroop/error.hpp"

namespace aeroop {

const Tensor& GradientSet::at(int id) const {
  auto it = grads_.find(id);
  if (it == grads_.end()) {
    throw Error("gradient set: no entry for node " + std::to_string(id));
  }
  return it->second;
}

Var Tape::leaf(Tensor value, bool param) {
  if (!value.all_finite()) throw NumericError("tape: non-finite leaf value");
  auto shared = std::make_shared<const Tensor>(std::move(value));
  if (!record_) return Var(this, -1, std::move(shared));
  Node node;
  node.op = param ? "parameter" : "constant";
  node.value = shared;
  node.leaf = true;
  node.param = param;
  node.requires_grad = param;
  nodes_.push_back(std::move(node));
  return Var(this, static_cast<int>(nodes_.size()) - 1, std::move(shared));
}

Var Tape::constant(Tensor value) { return leaf(std::move(value), false); }
Var Tape::parameter(Tensor value) { return leaf(std::move(value), true); }

Var Tape::apply(std::string_view op, const std::vector<Var>& inputs,
                ForwardFn forward, BackwardFn backward) {
  std::vector<const Tensor*> in;
  in.reserve(inputs.size());
  for (const Var& v : inputs) {
    if (!v.valid() || v.tape() != this) {
      throw Error(std::string(op) + ": operand belongs to a different tape");
    }
    in.push_back(&v.value());
  }
  Tensor out = forward(in);
  if (!out.all_finite()) {
    throw NumericError(std::string(op) + ": non-finite value produced");
  }
  auto shared = std::make_shared<const Tensor>(std::move(out));
  if (!record_) return Var(this, -1, std::move(shared));

  Node node;
  node.op = std::string(op);
  node.value = shared;
  node.forward = std::move(forward);
  node.backward = std::move(backward);
  for (const Var& v : inputs) {
    node.inputs.push_back(v.id());
    node.requires_grad = node.requires_grad || nodes_[v.id()].requires_grad;
  }
  nodes_.push_back(std::move(node));
  return Var(this, static_cast<int>(nodes_.size()) - 1, std::move(shared));
}

GradientSet Tape::backward(const Var& output) const {
  if (output.value().size() != 1) {
    throw ShapeError("backward: output " + shape_str(output.shape()) +
                     " is not scalar and no seed was supplied");
  }
  Tensor seed = output.is_complex() ? Tensor::scalar(cplx(1.0, 0.0))
                                    : Tensor::scalar(1.0);
  return backward(output, seed.reshaped(output.shape()));
}

namespace {

void accumulate(std::optional<Tensor>& slot, Tensor&& g, const std::string& op) {
  if (!slot) {
    slot = std::move(g);
    return;
  }
  if (slot->shape() != g.shape() || slot->dtype() != g.dtype()) {
    throw Error("backward: gradient mismatch from " + op + ": " +
                shape_str(slot->shape()) + " vs " + shape_str(g.shape()));
  }
  if (g.is_complex()) {
    auto dst = slot->cvalues();
    auto src = g.cvalues();
    for (std::size_t i = 0; i < dst.size(); ++i) dst[i] += src[i];
  } else {
    auto dst = slot->values();
    auto src = g.values();
    for (std::size_t i = 0; i < dst.size(); ++i) dst[i] += src[i];
  }
}

}  // namespace

GradientSet Tape::backward(const Var& output, const Tensor& seed) const {
  if (!record_) throw Error("backward: tape was not recording");
  if (output.tape() != this || output.id() < 0) {
    throw Error("backward: output does not belong to this tape");
  }
  if (seed.shape() != output.shape() || seed.dtype() != output.value().dtype()) {
    throw ShapeError("backward: seed " + shape_str(seed.shape()) + " " +
                     dtype_str(seed.dtype()) + " does not match output " +
                     shape_str(output.shape()) + " " +
                     dtype_str(output.value().dtype()));
  }

  std::vector<std::optional<Tensor>> grads(nodes_.size());
  grads[output.id()] = seed;

  for (int id = output.id(); id >= 0; --id) {
    const Node& node = nodes_[id];
    if (node.leaf || !node.requires_grad || !grads[id]) continue;

    const std::size_t n_in = node.inputs.size();
    std::vector<const Tensor*> in(n_in);
    std::unique_ptr<bool[]> need(new bool[n_in]);
    std::vector<Tensor> gin(n_in);
    bool any = false;
    for (std::size_t i = 0; i < n_in; ++i) {
      const Node& src = nodes_[node.inputs[i]];
      in[i] = src.value.get();
      need[i] = src.requires_grad;
      any = any || need[i];
    }
    if (any) {
      BackwardArgs args{in, *node.value, *grads[id],
                        std::span<const bool>(need.get(), n_in), gin};
      node.backward(args);
      for (std::size_t i = 0; i < n_in; ++i) {
        if (!need[i]) continue;
        const Node& src = nodes_[node.inputs[i]];
        if (gin[i].shape() != src.value->shape() ||
            gin[i].dtype() != src.value->dtype()) {
          throw Error("backward: rule of " + node.op + " returned " +
                      shape_str(gin[i].shape()) + " " + dtype_str(gin[i].dtype()) +
                      " for input " + shape_str(src.value->shape()) + " " +
                      dtype_str(src.value->dtype()));
        }
        accumulate(grads[node.inputs[i]], std::move(gin[i]), node.op);
      }
    }
    grads[id].reset();
  }

  GradientSet result;
  for (std::size_t id = 0; id < nodes_.size(); ++id) {
    const Node& node = nodes_[id];
    if (!node.param) continue;
    if (grads[id]) {
      if (!grads[id]->all_finite()) {
        throw NumericError("backward: non-finite gradient for parameter node " +
                           std::to_string(id));
      }
      result.grads_.emplace(static_cast<int>(id), std::move(*grads[id]));
    } else {
      result.grads_.emplace(static_cast<int>(id),
                            Tensor::zeros(node.value->shape(), node.value->dtype()));
    }
  }
  return result;
}

void Tape::verify_replay() const {
  std::vector<std::shared_ptr<const Tensor>> replayed(nodes_.size());
  for (std::size_t id = 0; id < nodes_.size(); ++id) {
    const Node& node = nodes_[id];
    if (node.leaf) {
      replayed[id] = node.value;
      continue;
    }
    std::vector<const Tensor*> in;
    for (int src : node.inputs) in.push_back(replayed[src].get());
    auto value = std::make_shared<const Tensor>(node.forward(in));
    if (!value->bit_equal(*node.value)) {
      throw Error("tape replay mismatch at node " + std::to_string(id) + " (" +
                  node.op + ")");
    }
    replayed[id] = std::move(value);
  }
}

std::vector<int> Tape::parameter_ids() const {
  std::vector<int> ids;
  for (std::size_t id = 0; id < nodes_.size(); ++id) {
    if (nodes_[id].param) ids.push_back(static_cast<int>(id));
  }
  return ids;
}

}  // namespace aeroop
