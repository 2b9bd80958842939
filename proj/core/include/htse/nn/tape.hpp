// core/include/htse/nn/tape.hpp

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

#pragma once

#include <cstddef>
#include <functional>
#include <string>
#include <unordered_map>
#include <vector>

#include <Eigen/Core>

namespace htse::nn {

/// Row-major so that rows are frames and row gathers stay contiguous.
using Matrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

struct Parameter {
  std::string name;
  Matrix value;
};

/// Gradients keyed by parameter, accumulated across tapes of a batch.
using GradMap = std::unordered_map<const Parameter*, Matrix>;

class Tape;

/// Handle to a node on a Tape. Cheap to copy; only valid while the tape lives.
class Var {
 public:
  Var() = default;

  bool valid() const { return tape_ != nullptr; }
  Tape& tape() const { return *tape_; }
  int id() const { return id_; }
  const Matrix& value() const;
  Eigen::Index rows() const { return value().rows(); }
  Eigen::Index cols() const { return value().cols(); }

 private:
  friend class Tape;
  Var(Tape* tape, int id) : tape_(tape), id_(id) {}

  Tape* tape_ = nullptr;
  int id_ = -1;
};

/// Reverse-mode tape. Each op appends a node holding its value and a closure
/// that pushes the node's gradient to its inputs. With gradients disabled the
/// closures are dropped and the tape only evaluates.
class Tape {
 public:
  using Backward = std::function<void(Tape&, int)>;

  explicit Tape(bool grad_enabled = true) : grad_enabled_(grad_enabled) {}

  Tape(const Tape&) = delete;
  Tape& operator=(const Tape&) = delete;

  bool grad_enabled() const { return grad_enabled_; }

  Var constant(Matrix value);
  Var param(const Parameter& p);

  /// Appends an op node. `backward` is kept only if some input needs a gradient.
  Var push(Matrix value, std::initializer_list<Var> inputs, Backward backward);
  Var push(Matrix value, const std::vector<Var>& inputs, Backward backward);

  const Matrix& value(int id) const {
    const Node& n = nodes_[id];
    return n.param != nullptr ? n.param->value : n.value;
  }
  bool requires_grad(int id) const { return nodes_[id].requires_grad; }

  /// Gradient of node `id`; allocated (zeroed) on first access.
  Matrix& grad(int id);
  /// Adds `g` to the gradient of `id` if that node needs one.
  template <typename Derived>
  void accumulate(int id, const Eigen::EigenBase<Derived>& g) {
    if (!nodes_[id].requires_grad) return;
    grad(id) += g.derived();
  }

  /// Back-propagates from a 1x1 root (d root / d root = seed).
  void backward(const Var& root, double seed = 1.0);

  /// Adds parameter gradients found on this tape into `out`.
  void collect_param_grads(GradMap& out) const;

  std::size_t size() const { return nodes_.size(); }

 private:
  struct Node {
    Matrix value;
    Matrix grad;
    Backward backward;
    const Parameter* param = nullptr;
    bool requires_grad = false;
    bool has_grad = false;
  };

  bool grad_enabled_;
  std::vector<Node> nodes_;
};

inline const Matrix& Var::value() const { return tape_->value(id_); }

}  // namespace htse::nn
