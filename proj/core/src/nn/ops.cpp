// core/src/nn/ops.cpp

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

#include "htse/nn/ops.hpp"

#include <cmath>
#include <numbers>
#include <string>

#include "htse/error.hpp"

namespace htse::nn {

namespace {

void require(bool cond, const char* op, const std::string& msg) {
  if (!cond) throw InvalidArgument(std::string(op) + ": " + msg);
}

std::string shape(const Var& v) {
  return std::to_string(v.rows()) + "x" + std::to_string(v.cols());
}

bool is_row_broadcast(const Var& a, const Var& b) {
  return b.rows() == 1 && a.rows() != 1 && b.cols() == a.cols();
}

}  // namespace

Var add(const Var& a, const Var& b) {
  const bool bc = is_row_broadcast(a, b);
  require(bc || (a.rows() == b.rows() && a.cols() == b.cols()), "add",
          shape(a) + " vs " + shape(b));
  Matrix out = bc ? Matrix(a.value().rowwise() + b.value().row(0)) : Matrix(a.value() + b.value());
  const int ia = a.id(), ib = b.id();
  return a.tape().push(std::move(out), {a, b}, [ia, ib, bc](Tape& t, int self) {
    const Matrix& g = t.grad(self);
    t.accumulate(ia, g);
    if (bc) t.accumulate(ib, g.colwise().sum());
    else t.accumulate(ib, g);
  });
}

Var sub(const Var& a, const Var& b) {
  const bool bc = is_row_broadcast(a, b);
  require(bc || (a.rows() == b.rows() && a.cols() == b.cols()), "sub",
          shape(a) + " vs " + shape(b));
  Matrix out = bc ? Matrix(a.value().rowwise() - b.value().row(0)) : Matrix(a.value() - b.value());
  const int ia = a.id(), ib = b.id();
  return a.tape().push(std::move(out), {a, b}, [ia, ib, bc](Tape& t, int self) {
    const Matrix& g = t.grad(self);
    t.accumulate(ia, g);
    if (bc) t.accumulate(ib, -g.colwise().sum());
    else t.accumulate(ib, -g);
  });
}

Var mul(const Var& a, const Var& b) {
  require(a.rows() == b.rows() && a.cols() == b.cols(), "mul", shape(a) + " vs " + shape(b));
  Matrix out = a.value().cwiseProduct(b.value());
  const int ia = a.id(), ib = b.id();
  return a.tape().push(std::move(out), {a, b}, [ia, ib](Tape& t, int self) {
    const Matrix& g = t.grad(self);
    if (t.requires_grad(ia)) t.accumulate(ia, g.cwiseProduct(t.value(ib)));
    if (t.requires_grad(ib)) t.accumulate(ib, g.cwiseProduct(t.value(ia)));
  });
}

Var scale(const Var& a, double s) {
  const int ia = a.id();
  return a.tape().push(a.value() * s, {a}, [ia, s](Tape& t, int self) {
    t.accumulate(ia, t.grad(self) * s);
  });
}

Var add_constant(const Var& a, const Matrix& c) {
  require(a.rows() == c.rows() && a.cols() == c.cols(), "add_constant", "shape mismatch");
  const int ia = a.id();
  return a.tape().push(a.value() + c, {a}, [ia](Tape& t, int self) {
    t.accumulate(ia, t.grad(self));
  });
}

Var relu(const Var& x) {
  const int ix = x.id();
  Matrix out = x.value().cwiseMax(0.0);
  return x.tape().push(std::move(out), {x}, [ix](Tape& t, int self) {
    const Matrix& in = t.value(ix);
    t.accumulate(ix, t.grad(self).cwiseProduct(
                         (in.array() > 0.0).cast<double>().matrix()));
  });
}

Var prelu(const Var& x, const Var& slope) {
  require(slope.rows() == 1 && slope.cols() == 1, "prelu", "slope must be 1x1");
  const double a = slope.value()(0, 0);
  const int ix = x.id(), is = slope.id();
  Matrix out = x.value().unaryExpr([a](double v) { return v > 0.0 ? v : a * v; });
  return x.tape().push(std::move(out), {x, slope}, [ix, is](Tape& t, int self) {
    const Matrix& in = t.value(ix);
    const Matrix& g = t.grad(self);
    const double a = t.value(is)(0, 0);
    const auto pos = (in.array() > 0.0).cast<double>();
    if (t.requires_grad(ix)) {
      t.accumulate(ix, (g.array() * (pos + (1.0 - pos) * a)).matrix());
    }
    if (t.requires_grad(is)) {
      Matrix ga(1, 1);
      ga(0, 0) = (g.array() * in.array() * (1.0 - pos)).sum();
      t.accumulate(is, ga);
    }
  });
}

Var sigmoid(const Var& x) {
  const int ix = x.id();
  Matrix out = x.value().unaryExpr([](double v) { return 1.0 / (1.0 + std::exp(-v)); });
  return x.tape().push(std::move(out), {x}, [ix](Tape& t, int self) {
    const Matrix& y = t.value(self);
    t.accumulate(ix, (t.grad(self).array() * y.array() * (1.0 - y.array())).matrix());
  });
}

Var tanh(const Var& x) {
  const int ix = x.id();
  Matrix out = x.value().array().tanh().matrix();
  return x.tape().push(std::move(out), {x}, [ix](Tape& t, int self) {
    const Matrix& y = t.value(self);
    t.accumulate(ix, (t.grad(self).array() * (1.0 - y.array().square())).matrix());
  });
}

Var linear(const Var& x, const Var& w, const Var& b) {
  require(x.cols() == w.cols(), "linear", "input " + shape(x) + " vs weight " + shape(w));
  Matrix out = x.value() * w.value().transpose();
  if (b.valid()) {
    require(b.rows() == 1 && b.cols() == w.rows(), "linear", "bias " + shape(b));
    out.rowwise() += b.value().row(0);
  }
  const int ix = x.id(), iw = w.id(), ib = b.valid() ? b.id() : -1;
  std::vector<Var> inputs{x, w};
  if (b.valid()) inputs.push_back(b);
  return x.tape().push(std::move(out), inputs, [ix, iw, ib](Tape& t, int self) {
    const Matrix& g = t.grad(self);
    if (t.requires_grad(ix)) t.accumulate(ix, g * t.value(iw));
    if (t.requires_grad(iw)) t.accumulate(iw, g.transpose() * t.value(ix));
    if (ib >= 0 && t.requires_grad(ib)) t.accumulate(ib, g.colwise().sum());
  });
}

Var layer_norm(const Var& x, const Var& gamma, const Var& beta, double eps) {
  const Eigen::Index n = x.rows(), c = x.cols();
  require(gamma.rows() == 1 && gamma.cols() == c && beta.rows() == 1 && beta.cols() == c,
          "layer_norm", "affine shape");
  const Matrix& X = x.value();
  auto xhat = std::make_shared<Matrix>(n, c);
  auto inv_std = std::make_shared<Eigen::VectorXd>(n);
  for (Eigen::Index r = 0; r < n; ++r) {
    const double mu = X.row(r).mean();
    const double var = (X.row(r).array() - mu).square().mean();
    const double is = 1.0 / std::sqrt(var + eps);
    (*inv_std)(r) = is;
    xhat->row(r) = (X.row(r).array() - mu) * is;
  }
  Matrix out = (xhat->array().rowwise() * gamma.value().row(0).array()).rowwise() +
               beta.value().row(0).array();
  const int ix = x.id(), ig = gamma.id(), ib = beta.id();
  return x.tape().push(std::move(out), {x, gamma, beta},
                       [ix, ig, ib, xhat, inv_std](Tape& t, int self) {
    const Matrix& g = t.grad(self);
    if (t.requires_grad(ig)) t.accumulate(ig, g.cwiseProduct(*xhat).colwise().sum());
    if (t.requires_grad(ib)) t.accumulate(ib, g.colwise().sum());
    if (!t.requires_grad(ix)) return;
    const auto gam = t.value(ig).row(0).array();
    Matrix dx(g.rows(), g.cols());
    for (Eigen::Index r = 0; r < g.rows(); ++r) {
      const Eigen::ArrayXd dxh = (g.row(r).array() * gam).transpose();
      const Eigen::ArrayXd xh = xhat->row(r).array().transpose();
      const double m1 = dxh.mean();
      const double m2 = (dxh * xh).mean();
      dx.row(r) = ((dxh - m1 - xh * m2) * (*inv_std)(r)).transpose();
    }
    t.accumulate(ix, dx);
  });
}

Var film(const Var& x, const Var& gamma, const Var& beta) {
  auto ok = [&](const Var& v) {
    return v.cols() == x.cols() && (v.rows() == x.rows() || v.rows() == 1);
  };
  require(ok(gamma) && ok(beta), "film", "x " + shape(x) + ", gamma " + shape(gamma) +
                                             ", beta " + shape(beta));
  const bool gbc = gamma.rows() == 1 && x.rows() != 1;
  const bool bbc = beta.rows() == 1 && x.rows() != 1;
  Matrix out = gbc ? Matrix(x.value().array().rowwise() * gamma.value().row(0).array())
                   : Matrix(x.value().cwiseProduct(gamma.value()));
  if (bbc) out.rowwise() += beta.value().row(0);
  else out += beta.value();
  const int ix = x.id(), ig = gamma.id(), ib = beta.id();
  return x.tape().push(std::move(out), {x, gamma, beta},
                       [ix, ig, ib, gbc, bbc](Tape& t, int self) {
    const Matrix& g = t.grad(self);
    const Matrix& X = t.value(ix);
    const Matrix& G = t.value(ig);
    if (t.requires_grad(ix)) {
      if (gbc) t.accumulate(ix, Matrix(g.array().rowwise() * G.row(0).array()));
      else t.accumulate(ix, g.cwiseProduct(G));
    }
    if (t.requires_grad(ig)) {
      if (gbc) t.accumulate(ig, g.cwiseProduct(X).colwise().sum());
      else t.accumulate(ig, g.cwiseProduct(X));
    }
    if (t.requires_grad(ib)) {
      if (bbc) t.accumulate(ib, g.colwise().sum());
      else t.accumulate(ib, g);
    }
  });
}

Var grouped_self_attention(const Var& x, const Var& w_in, const Var& b_in,
                           const Var& w_out, const Var& b_out, int heads, int group) {
  const Eigen::Index rows = x.rows(), c = x.cols();
  require(heads > 0 && c % heads == 0, "attention", "channels not divisible by heads");
  require(group > 0 && rows % group == 0, "attention", "rows not divisible by group");
  require(w_in.rows() == 3 * c && w_in.cols() == c && b_in.rows() == 1 && b_in.cols() == 3 * c,
          "attention", "input projection shape");
  require(w_out.rows() == c && w_out.cols() == c && b_out.rows() == 1 && b_out.cols() == c,
          "attention", "output projection shape");
  const Eigen::Index dh = c / heads;
  const Eigen::Index ngroups = rows / group;
  const double scale = 1.0 / std::sqrt(static_cast<double>(dh));

  auto qkv = std::make_shared<Matrix>(x.value() * w_in.value().transpose());
  qkv->rowwise() += b_in.value().row(0);
  auto probs = std::make_shared<std::vector<Matrix>>(static_cast<std::size_t>(ngroups * heads));
  auto ctx = std::make_shared<Matrix>(rows, c);
  for (Eigen::Index gi = 0; gi < ngroups; ++gi) {
    for (Eigen::Index h = 0; h < heads; ++h) {
      const auto q = qkv->block(gi * group, h * dh, group, dh);
      const auto k = qkv->block(gi * group, c + h * dh, group, dh);
      const auto v = qkv->block(gi * group, 2 * c + h * dh, group, dh);
      Matrix p = (q * k.transpose()) * scale;
      for (Eigen::Index r = 0; r < group; ++r) {
        const double m = p.row(r).maxCoeff();
        p.row(r) = (p.row(r).array() - m).exp();
        p.row(r) /= p.row(r).sum();
      }
      ctx->block(gi * group, h * dh, group, dh).noalias() = p * v;
      (*probs)[static_cast<std::size_t>(gi * heads + h)] = std::move(p);
    }
  }
  Matrix out = *ctx * w_out.value().transpose();
  out.rowwise() += b_out.value().row(0);

  const int ix = x.id(), iwi = w_in.id(), ibi = b_in.id(), iwo = w_out.id(), ibo = b_out.id();
  return x.tape().push(
      std::move(out), {x, w_in, b_in, w_out, b_out},
      [=](Tape& t, int self) {
        const Matrix& g = t.grad(self);
        if (t.requires_grad(iwo)) t.accumulate(iwo, g.transpose() * (*ctx));
        if (t.requires_grad(ibo)) t.accumulate(ibo, g.colwise().sum());
        const Matrix dctx = g * t.value(iwo);
        Matrix dqkv = Matrix::Zero(rows, 3 * c);
        for (Eigen::Index gi = 0; gi < ngroups; ++gi) {
          for (Eigen::Index h = 0; h < heads; ++h) {
            const Matrix& p = (*probs)[static_cast<std::size_t>(gi * heads + h)];
            const auto q = qkv->block(gi * group, h * dh, group, dh);
            const auto k = qkv->block(gi * group, c + h * dh, group, dh);
            const auto v = qkv->block(gi * group, 2 * c + h * dh, group, dh);
            const auto dc = dctx.block(gi * group, h * dh, group, dh);
            const Matrix dp = dc * v.transpose();
            dqkv.block(gi * group, 2 * c + h * dh, group, dh).noalias() = p.transpose() * dc;
            Matrix ds = p.cwiseProduct(dp);
            const Eigen::VectorXd rs = ds.rowwise().sum();
            ds -= p.cwiseProduct(rs * Eigen::RowVectorXd::Ones(group));
            ds *= scale;
            dqkv.block(gi * group, h * dh, group, dh).noalias() = ds * k;
            dqkv.block(gi * group, c + h * dh, group, dh).noalias() = ds.transpose() * q;
          }
        }
        if (t.requires_grad(iwi)) t.accumulate(iwi, dqkv.transpose() * t.value(ix));
        if (t.requires_grad(ibi)) t.accumulate(ibi, dqkv.colwise().sum());
        if (t.requires_grad(ix)) t.accumulate(ix, dqkv * t.value(iwi));
      });
}

Var gather_rows(const Var& x, const RowIndex& index) {
  const Matrix& X = x.value();
  const auto n = static_cast<Eigen::Index>(index->size());
  Matrix out = Matrix::Zero(n, X.cols());
  for (Eigen::Index r = 0; r < n; ++r) {
    const int src = (*index)[static_cast<std::size_t>(r)];
    if (src < 0) continue;
    require(src < X.rows(), "gather_rows", "index out of range");
    out.row(r) = X.row(src);
  }
  const int ix = x.id();
  return x.tape().push(std::move(out), {x}, [ix, index](Tape& t, int self) {
    const Matrix& g = t.grad(self);
    Matrix& gx = t.grad(ix);
    for (Eigen::Index r = 0; r < g.rows(); ++r) {
      const int src = (*index)[static_cast<std::size_t>(r)];
      if (src >= 0) gx.row(src) += g.row(r);
    }
  });
}

Var scatter_add_rows(const Var& x, const RowIndex& index, Eigen::Index out_rows) {
  const Matrix& X = x.value();
  require(static_cast<Eigen::Index>(index->size()) == X.rows(), "scatter_add_rows",
          "index size must equal input rows");
  Matrix out = Matrix::Zero(out_rows, X.cols());
  for (Eigen::Index r = 0; r < X.rows(); ++r) {
    const int dst = (*index)[static_cast<std::size_t>(r)];
    if (dst < 0) continue;
    require(dst < out_rows, "scatter_add_rows", "index out of range");
    out.row(dst) += X.row(r);
  }
  const int ix = x.id();
  return x.tape().push(std::move(out), {x}, [ix, index](Tape& t, int self) {
    const Matrix& g = t.grad(self);
    Matrix& gx = t.grad(ix);
    for (Eigen::Index r = 0; r < gx.rows(); ++r) {
      const int dst = (*index)[static_cast<std::size_t>(r)];
      if (dst >= 0) gx.row(r) += g.row(dst);
    }
  });
}

Var concat_cols(const std::vector<Var>& parts) {
  require(!parts.empty(), "concat_cols", "no inputs");
  const Eigen::Index n = parts.front().rows();
  Eigen::Index total = 0;
  for (const auto& p : parts) {
    require(p.rows() == n, "concat_cols", "row mismatch");
    total += p.cols();
  }
  Matrix out(n, total);
  std::vector<std::pair<int, Eigen::Index>> spans;
  Eigen::Index off = 0;
  for (const auto& p : parts) {
    out.middleCols(off, p.cols()) = p.value();
    spans.emplace_back(p.id(), off);
    off += p.cols();
  }
  return parts.front().tape().push(std::move(out), parts, [spans](Tape& t, int self) {
    const Matrix& g = t.grad(self);
    for (const auto& [id, o] : spans) {
      if (t.requires_grad(id)) t.accumulate(id, g.middleCols(o, t.value(id).cols()));
    }
  });
}

Var broadcast_rows(const Var& row, Eigen::Index n) {
  require(row.rows() == 1, "broadcast_rows", "input must be a single row");
  Matrix out = Eigen::VectorXd::Ones(n) * row.value().row(0);
  const int ir = row.id();
  return row.tape().push(std::move(out), {row}, [ir](Tape& t, int self) {
    t.accumulate(ir, t.grad(self).colwise().sum());
  });
}

Var mean_rows(const Var& x) {
  const Eigen::Index n = x.rows();
  require(n > 0, "mean_rows", "empty input");
  Matrix out = x.value().colwise().mean();
  const int ix = x.id();
  return x.tape().push(std::move(out), {x}, [ix, n](Tape& t, int self) {
    const Matrix g = t.grad(self) / static_cast<double>(n);
    t.accumulate(ix, Matrix(Eigen::VectorXd::Ones(n) * g.row(0)));
  });
}

Var l2_normalize_rows(const Var& x, double eps) {
  const Matrix& X = x.value();
  auto norms = std::make_shared<Eigen::VectorXd>(X.rowwise().norm().array() + eps);
  Matrix out = X.array().colwise() / norms->array();
  const int ix = x.id();
  return x.tape().push(std::move(out), {x}, [ix, norms](Tape& t, int self) {
    const Matrix& g = t.grad(self);
    const Matrix& y = t.value(self);
    const Eigen::VectorXd dots = g.cwiseProduct(y).rowwise().sum();
    Matrix dx = g - (y.array().colwise() * dots.array()).matrix();
    dx = dx.array().colwise() / norms->array();
    t.accumulate(ix, dx);
  });
}

Var frame_signal(const Var& signal, int kernel, int stride) {
  require(signal.cols() == 1, "frame_signal", "expects a column signal");
  const Eigen::Index len = signal.rows();
  require(kernel > 0 && stride > 0 && len >= kernel && (len - kernel) % stride == 0,
          "frame_signal", "length " + std::to_string(len) + " not aligned to kernel/stride");
  const Eigen::Index frames = (len - kernel) / stride + 1;
  const Matrix& s = signal.value();
  Matrix out(frames, kernel);
  for (Eigen::Index f = 0; f < frames; ++f) {
    out.row(f) = s.block(f * stride, 0, kernel, 1).transpose();
  }
  const int is = signal.id();
  return signal.tape().push(std::move(out), {signal}, [is, kernel, stride](Tape& t, int self) {
    const Matrix& g = t.grad(self);
    Matrix& gs = t.grad(is);
    for (Eigen::Index f = 0; f < g.rows(); ++f) {
      gs.block(f * stride, 0, kernel, 1) += g.row(f).transpose();
    }
  });
}

Var overlap_add(const Var& frames, int stride) {
  const Eigen::Index nf = frames.rows(), k = frames.cols();
  require(nf > 0 && stride > 0, "overlap_add", "empty input");
  const Eigen::Index len = (nf - 1) * stride + k;
  const Matrix& F = frames.value();
  Matrix out = Matrix::Zero(len, 1);
  for (Eigen::Index f = 0; f < nf; ++f) {
    out.block(f * stride, 0, k, 1) += F.row(f).transpose();
  }
  const int ifr = frames.id();
  return frames.tape().push(std::move(out), {frames}, [ifr, stride](Tape& t, int self) {
    const Matrix& g = t.grad(self);
    Matrix& gf = t.grad(ifr);
    for (Eigen::Index f = 0; f < gf.rows(); ++f) {
      gf.row(f) += g.block(f * stride, 0, gf.cols(), 1).transpose();
    }
  });
}

Var resize_rows(const Var& x, Eigen::Index n) {
  const Eigen::Index have = x.rows();
  const Eigen::Index keep = std::min(have, n);
  Matrix out = Matrix::Zero(n, x.cols());
  out.topRows(keep) = x.value().topRows(keep);
  const int ix = x.id();
  return x.tape().push(std::move(out), {x}, [ix, keep](Tape& t, int self) {
    t.grad(ix).topRows(keep) += t.grad(self).topRows(keep);
  });
}

Var sum(const Var& x) {
  Matrix out(1, 1);
  out(0, 0) = x.value().sum();
  const int ix = x.id();
  return x.tape().push(std::move(out), {x}, [ix](Tape& t, int self) {
    const double g = t.grad(self)(0, 0);
    const Matrix& v = t.value(ix);
    t.accumulate(ix, Matrix::Constant(v.rows(), v.cols(), g));
  });
}

Var mean(const Var& x) {
  return scale(sum(x), 1.0 / static_cast<double>(x.rows() * x.cols()));
}

Var neg_si_sdr(const Var& estimate, const Matrix& reference, double eps) {
  require(estimate.cols() == 1 && reference.cols() == 1 && estimate.rows() == reference.rows(),
          "neg_si_sdr", "estimate " + shape(estimate) + " vs reference");
  auto ref = std::make_shared<Matrix>(reference);
  const Matrix& e = estimate.value();
  const double rr = ref->squaredNorm();
  require(rr > 0.0, "neg_si_sdr", "zero-energy reference");
  const double alpha = e.cwiseProduct(*ref).sum() / rr;
  const Matrix target = alpha * (*ref);
  const Matrix resid = e - target;
  const double et = target.squaredNorm() + eps;
  const double er = resid.squaredNorm() + eps;
  constexpr double kDb = 10.0 / std::numbers::ln10;
  Matrix out(1, 1);
  out(0, 0) = -kDb * (std::log(et) - std::log(er));
  const int ie = estimate.id();
  return estimate.tape().push(std::move(out), {estimate},
                              [ie, ref, alpha, et, er](Tape& t, int self) {
    const double g = t.grad(self)(0, 0);
    const Matrix& e = t.value(ie);
    const Matrix resid = e - alpha * (*ref);
    const Matrix de = -kDb * (2.0 * alpha / et * (*ref) - 2.0 / er * resid);
    t.accumulate(ie, g * de);
  });
}

}  // namespace htse::nn
