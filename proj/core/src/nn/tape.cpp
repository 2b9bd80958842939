// core/src/nn/tape.cpp

// Copyright 2026  The htse Authors

// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//  http://www.apache.org/licenses/LICENSE-2.0
//
// THIS CODE IS PROVIDED *AS IS* BASIS, WITHOUT WARRANTIES OR CONDITIONS OF ANY
// KIND, EITHER EXPRESS OR IMPLIED, INCLUDING WITHOUT LIMITATION ANY IMPLIED
// WARRANTIES OR CONDITIONS OF TITLE, FITNESS FOR A PARTICULAR PURPOSE,
// MERCHANTABLITY OR NON-INFRINGEMENT.
// See the Apache 2 License for the specific language governing permissions and
// limitations under the License.

#include "htse/nn/tape.hpp"

#include "htse/error.hpp"

namespace htse::nn {

Var Tape::constant(Matrix value) {
  Node n;
  n.value = std::move(value);
  nodes_.push_back(std::move(n));
  return Var(this, static_cast<int>(nodes_.size()) - 1);
}

Var Tape::param(const Parameter& p) {
  Node n;
  n.param = &p;
  n.requires_grad = grad_enabled_;
  nodes_.push_back(std::move(n));
  return Var(this, static_cast<int>(nodes_.size()) - 1);
}

Var Tape::push(Matrix value, std::initializer_list<Var> inputs, Backward backward) {
  return push(std::move(value), std::vector<Var>(inputs), std::move(backward));
}

Var Tape::push(Matrix value, const std::vector<Var>& inputs, Backward backward) {
  bool needs = false;
  if (grad_enabled_) {
    for (const auto& in : inputs) {
      if (!in.valid()) continue;
      if (&in.tape() != this) throw InvalidArgument("Tape::push: input from another tape");
      needs = needs || nodes_[in.id()].requires_grad;
    }
  }
  Node n;
  n.value = std::move(value);
  n.requires_grad = needs;
  if (needs) n.backward = std::move(backward);
  nodes_.push_back(std::move(n));
  return Var(this, static_cast<int>(nodes_.size()) - 1);
}

Matrix& Tape::grad(int id) {
  Node& n = nodes_[id];
  if (!n.has_grad) {
    const Matrix& v = value(id);
    n.grad = Matrix::Zero(v.rows(), v.cols());
    n.has_grad = true;
  }
  return n.grad;
}

void Tape::backward(const Var& root, double seed) {
  if (!root.valid() || &root.tape() != this) throw InvalidArgument("backward: foreign root");
  if (root.rows() != 1 || root.cols() != 1) throw InvalidArgument("backward: root must be 1x1");
  if (!nodes_[root.id()].requires_grad) return;
  grad(root.id())(0, 0) += seed;
  for (int id = root.id(); id >= 0; --id) {
    Node& n = nodes_[id];
    if (!n.requires_grad || !n.has_grad || !n.backward) continue;
    n.backward(*this, id);
  }
}

void Tape::collect_param_grads(GradMap& out) const {
  for (const auto& n : nodes_) {
    if (n.param == nullptr || !n.has_grad) continue;
    auto it = out.find(n.param);
    if (it == out.end()) {
      out.emplace(n.param, n.grad);
    } else {
      it->second += n.grad;
    }
  }
}

}  // namespace htse::nn
