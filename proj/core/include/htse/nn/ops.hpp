// core/include/htse/nn/ops.hpp

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

#include <memory>
#include <vector>

#include "htse/nn/tape.hpp"

namespace htse::nn {

/// Row index list for gather/scatter; -1 selects a zero row.
using RowIndex = std::shared_ptr<const std::vector<int>>;

Var add(const Var& a, const Var& b);  // b may be 1xC (row broadcast)
Var sub(const Var& a, const Var& b);
Var mul(const Var& a, const Var& b);  // elementwise, same shape
Var scale(const Var& a, double s);
Var add_constant(const Var& a, const Matrix& c);

Var relu(const Var& x);
Var prelu(const Var& x, const Var& slope);  // slope is 1x1
Var sigmoid(const Var& x);
Var tanh(const Var& x);

/// x W^T + b with x: N x in, W: out x in, b: 1 x out (optional).
Var linear(const Var& x, const Var& w, const Var& b = {});

/// Per-row layer normalization with affine gamma/beta (1 x C).
Var layer_norm(const Var& x, const Var& gamma, const Var& beta, double eps = 1e-5);

/// Feature-wise modulation x * gamma + beta; gamma/beta are N x C or 1 x C.
Var film(const Var& x, const Var& gamma, const Var& beta);

/// Multi-head self-attention applied independently to consecutive row groups
/// of size `group`. w_in: 3C x C, b_in: 1 x 3C, w_out: C x C, b_out: 1 x C.
Var grouped_self_attention(const Var& x, const Var& w_in, const Var& b_in,
                           const Var& w_out, const Var& b_out, int heads, int group);

Var gather_rows(const Var& x, const RowIndex& index);
/// out[index[r]] += x[r] for index[r] >= 0; out has `out_rows` rows.
Var scatter_add_rows(const Var& x, const RowIndex& index, Eigen::Index out_rows);

Var concat_cols(const std::vector<Var>& parts);
Var broadcast_rows(const Var& row, Eigen::Index n);
Var mean_rows(const Var& x);
Var l2_normalize_rows(const Var& x, double eps = 1e-12);

/// Column signal (L x 1) -> frames (F x kernel) with hop `stride`.
/// Requires L >= kernel and (L - kernel) % stride == 0.
Var frame_signal(const Var& signal, int kernel, int stride);
/// Inverse layout of frame_signal: frames (F x K) -> ((F-1)*stride + K) x 1.
Var overlap_add(const Var& frames, int stride);

/// First `n` rows of x, or x zero-padded at the bottom to `n` rows.
Var resize_rows(const Var& x, Eigen::Index n);

Var sum(const Var& x);
Var mean(const Var& x);

/// -SI-SDR(estimate, reference) in dB for column signals; reference is constant.
/// eps regularizes both energies.
Var neg_si_sdr(const Var& estimate, const Matrix& reference, double eps = 1e-8);

}  // namespace htse::nn
