#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <memory>
#include <vector>

#include "gfte/tensor.hpp"

namespace gfte {

namespace detail {

inline void require(bool cond, const std::string& msg) {
  if (!cond) throw UsageError(msg);
}

template <typename S>
void require_rank2(const Tensor<S>& t, const char* op) {
  require(t.rank() == 2, std::string(op) + ": expected rank-2 tensor, got " + t.shape().str());
}

}  // namespace detail

template <typename S>
Tensor<S> add(const Tensor<S>& a, const Tensor<S>& b) {
  detail::require(a.shape() == b.shape(),
                  "add: shape mismatch " + a.shape().str() + " vs " + b.shape().str());
  ArrayX<S> out = a.value() + b.value();
  auto an = a.node(), bn = b.node();
  return detail::make_op<S>(a.shape(), std::move(out), {a, b}, [an, bn](detail::Node<S>& nd) {
    detail::accumulate(*an, nd.grad);
    detail::accumulate(*bn, nd.grad);
  });
}

// a: {m,n}, b: {n} or {1,n}; adds b to every row (bias add).
template <typename S>
Tensor<S> add_rowvec(const Tensor<S>& a, const Tensor<S>& b) {
  detail::require_rank2(a, "add_rowvec");
  const Index m = a.dim(0), n = a.dim(1);
  detail::require(b.numel() == n,
                  "add_rowvec: shape mismatch " + a.shape().str() + " vs " + b.shape().str());
  ArrayX<S> out = a.value();
  MatMap<S>(out.data(), m, n).rowwise() += b.mat().row(0);
  auto an = a.node(), bn = b.node();
  return detail::make_op<S>(a.shape(), std::move(out), {a, b}, [an, bn, m, n](detail::Node<S>& nd) {
    detail::accumulate(*an, nd.grad);
    if (bn->requires_grad) {
      ConstMatMap<S> g(nd.grad.data(), m, n);
      MatMap<S>(bn->grad.data(), 1, n) += g.colwise().sum();
    }
  });
}

template <typename S>
Tensor<S> mul(const Tensor<S>& a, const Tensor<S>& b) {
  detail::require(a.shape() == b.shape(),
                  "mul: shape mismatch " + a.shape().str() + " vs " + b.shape().str());
  ArrayX<S> out = a.value() * b.value();
  auto an = a.node(), bn = b.node();
  return detail::make_op<S>(a.shape(), std::move(out), {a, b}, [an, bn](detail::Node<S>& nd) {
    if (an->requires_grad) an->grad += nd.grad * bn->value;
    if (bn->requires_grad) bn->grad += nd.grad * an->value;
  });
}

template <typename S>
Tensor<S> scale(const Tensor<S>& a, S c) {
  ArrayX<S> out = a.value() * c;
  auto an = a.node();
  return detail::make_op<S>(a.shape(), std::move(out), {a}, [an, c](detail::Node<S>& nd) {
    if (an->requires_grad) an->grad += nd.grad * c;
  });
}

template <typename S>
Tensor<S> matmul(const Tensor<S>& a, const Tensor<S>& b) {
  detail::require_rank2(a, "matmul");
  detail::require_rank2(b, "matmul");
  const Index m = a.dim(0), k = a.dim(1), n = b.dim(1);
  detail::require(b.dim(0) == k,
                  "matmul: shape mismatch " + a.shape().str() + " x " + b.shape().str());
  ArrayX<S> out(m * n);
  MatMap<S>(out.data(), m, n).noalias() = a.mat() * b.mat();
  auto an = a.node(), bn = b.node();
  return detail::make_op<S>(Shape{m, n}, std::move(out), {a, b},
                            [an, bn, m, k, n](detail::Node<S>& nd) {
                              ConstMatMap<S> g(nd.grad.data(), m, n);
                              if (an->requires_grad)
                                MatMap<S>(an->grad.data(), m, k).noalias() +=
                                    g * ConstMatMap<S>(bn->value.data(), k, n).transpose();
                              if (bn->requires_grad)
                                MatMap<S>(bn->grad.data(), k, n).noalias() +=
                                    ConstMatMap<S>(an->value.data(), m, k).transpose() * g;
                            });
}

template <typename S>
Tensor<S> relu(const Tensor<S>& a) {
  ArrayX<S> out = a.value().max(S(0));
  auto an = a.node();
  return detail::make_op<S>(a.shape(), std::move(out), {a}, [an](detail::Node<S>& nd) {
    if (an->requires_grad) an->grad += nd.grad * (an->value > S(0)).template cast<S>();
  });
}

template <typename S>
Tensor<S> sigmoid(const Tensor<S>& a) {
  ArrayX<S> out = (S(1) / (S(1) + (-a.value()).exp()));
  auto an = a.node();
  return detail::make_op<S>(a.shape(), std::move(out), {a}, [an](detail::Node<S>& nd) {
    if (an->requires_grad) an->grad += nd.grad * nd.value * (S(1) - nd.value);
  });
}

template <typename S>
Tensor<S> tanh(const Tensor<S>& a) {
  ArrayX<S> out = a.value().tanh();
  auto an = a.node();
  return detail::make_op<S>(a.shape(), std::move(out), {a}, [an](detail::Node<S>& nd) {
    if (an->requires_grad) an->grad += nd.grad * (S(1) - nd.value * nd.value);
  });
}

// Row-wise softmax with max subtraction.
template <typename S>
Tensor<S> softmax_rows(const Tensor<S>& a) {
  detail::require_rank2(a, "softmax_rows");
  const Index m = a.dim(0), n = a.dim(1);
  ArrayX<S> out = a.value();
  MatMap<S> om(out.data(), m, n);
  for (Index i = 0; i < m; ++i) {
    auto row = om.row(i).array();
    row -= row.maxCoeff();
    row = row.exp();
    row /= row.sum();
  }
  auto an = a.node();
  return detail::make_op<S>(a.shape(), std::move(out), {a}, [an, m, n](detail::Node<S>& nd) {
    if (!an->requires_grad) return;
    ConstMatMap<S> g(nd.grad.data(), m, n);
    ConstMatMap<S> s(nd.value.data(), m, n);
    MatMap<S> da(an->grad.data(), m, n);
    for (Index i = 0; i < m; ++i) {
      const S dot = (g.row(i).array() * s.row(i).array()).sum();
      da.row(i).array() += s.row(i).array() * (g.row(i).array() - dot);
    }
  });
}

template <typename S>
Tensor<S> concat_cols(const std::vector<Tensor<S>>& parts) {
  detail::require(!parts.empty(), "concat_cols: no inputs");
  const Index m = parts.front().dim(0);
  Index total = 0;
  for (const auto& p : parts) {
    detail::require_rank2(p, "concat_cols");
    detail::require(p.dim(0) == m, "concat_cols: row mismatch " + p.shape().str());
    total += p.dim(1);
  }
  ArrayX<S> out(m * total);
  MatMap<S> om(out.data(), m, total);
  std::vector<std::pair<std::shared_ptr<detail::Node<S>>, Index>> spans;  // (node, col offset)
  Index off = 0;
  for (const auto& p : parts) {
    om.middleCols(off, p.dim(1)) = p.mat();
    spans.emplace_back(p.node(), off);
    off += p.dim(1);
  }
  return detail::make_op<S>(Shape{m, total}, std::move(out), parts,
                            [spans, m, total](detail::Node<S>& nd) {
                              ConstMatMap<S> g(nd.grad.data(), m, total);
                              for (std::size_t i = 0; i < spans.size(); ++i) {
                                auto& [pn, c0] = spans[i];
                                if (!pn->requires_grad) continue;
                                const Index w = pn->shape.dim(1);
                                MatMap<S>(pn->grad.data(), m, w) += g.middleCols(c0, w);
                              }
                            });
}

template <typename S>
Tensor<S> concat_rows(const std::vector<Tensor<S>>& parts) {
  detail::require(!parts.empty(), "concat_rows: no inputs");
  const Index n = parts.front().dim(1);
  Index total = 0;
  for (const auto& p : parts) {
    detail::require_rank2(p, "concat_rows");
    detail::require(p.dim(1) == n, "concat_rows: column mismatch " + p.shape().str());
    total += p.dim(0);
  }
  ArrayX<S> out(total * n);
  MatMap<S> om(out.data(), total, n);
  std::vector<std::pair<std::shared_ptr<detail::Node<S>>, Index>> spans;  // (node, row offset)
  Index off = 0;
  for (const auto& p : parts) {
    om.middleRows(off, p.dim(0)) = p.mat();
    spans.emplace_back(p.node(), off);
    off += p.dim(0);
  }
  return detail::make_op<S>(Shape{total, n}, std::move(out), parts,
                            [spans, total, n](detail::Node<S>& nd) {
                              ConstMatMap<S> g(nd.grad.data(), total, n);
                              for (std::size_t i = 0; i < spans.size(); ++i) {
                                auto& [pn, r0] = spans[i];
                                if (!pn->requires_grad) continue;
                                const Index h = pn->shape.dim(0);
                                MatMap<S>(pn->grad.data(), h, n) += g.middleRows(r0, h);
                              }
                            });
}

template <typename S>
Tensor<S> slice_cols(const Tensor<S>& a, Index c0, Index c1) {
  detail::require_rank2(a, "slice_cols");
  const Index m = a.dim(0), n = a.dim(1);
  detail::require(0 <= c0 && c0 < c1 && c1 <= n, "slice_cols: bad range on " + a.shape().str());
  const Index w = c1 - c0;
  ArrayX<S> out(m * w);
  MatMap<S>(out.data(), m, w) = a.mat().middleCols(c0, w);
  auto an = a.node();
  return detail::make_op<S>(Shape{m, w}, std::move(out), {a},
                            [an, m, n, c0, w](detail::Node<S>& nd) {
                              if (!an->requires_grad) return;
                              MatMap<S>(an->grad.data(), m, n).middleCols(c0, w) +=
                                  ConstMatMap<S>(nd.grad.data(), m, w);
                            });
}

template <typename S>
Tensor<S> slice_rows(const Tensor<S>& a, Index r0, Index r1) {
  detail::require_rank2(a, "slice_rows");
  const Index m = a.dim(0), n = a.dim(1);
  detail::require(0 <= r0 && r0 < r1 && r1 <= m, "slice_rows: bad range on " + a.shape().str());
  const Index h = r1 - r0;
  ArrayX<S> out(h * n);
  MatMap<S>(out.data(), h, n) = a.mat().middleRows(r0, h);
  auto an = a.node();
  return detail::make_op<S>(Shape{h, n}, std::move(out), {a},
                            [an, m, n, r0, h](detail::Node<S>& nd) {
                              if (!an->requires_grad) return;
                              MatMap<S>(an->grad.data(), m, n).middleRows(r0, h) +=
                                  ConstMatMap<S>(nd.grad.data(), h, n);
                            });
}

template <typename S>
Tensor<S> reduce_sum(const Tensor<S>& a) {
  ArrayX<S> out(1);
  out[0] = a.value().sum();
  auto an = a.node();
  return detail::make_op<S>(Shape{1}, std::move(out), {a}, [an](detail::Node<S>& nd) {
    if (an->requires_grad) an->grad += nd.grad[0];
  });
}

template <typename S>
Tensor<S> reduce_mean(const Tensor<S>& a) {
  const S inv = S(1) / static_cast<S>(a.numel());
  ArrayX<S> out(1);
  out[0] = a.value().sum() * inv;
  auto an = a.node();
  return detail::make_op<S>(Shape{1}, std::move(out), {a}, [an, inv](detail::Node<S>& nd) {
    if (an->requires_grad) an->grad += nd.grad[0] * inv;
  });
}

// Row lookup; gradient scatters into the looked-up rows only.
template <typename S>
Tensor<S> gather_rows(const Tensor<S>& a, std::vector<Index> idx, const char* op = "gather_rows") {
  detail::require_rank2(a, op);
  const Index n = a.dim(0), d = a.dim(1);
  for (Index i : idx)
    if (i < 0 || i >= n)
      throw UsageError(std::string(op) + ": index " + std::to_string(i) + " out of range [0," +
                       std::to_string(n) + ")");
  const Index m = static_cast<Index>(idx.size());
  ArrayX<S> out(m * d);
  MatMap<S> om(out.data(), m, d);
  for (Index i = 0; i < m; ++i) om.row(i) = a.mat().row(idx[static_cast<std::size_t>(i)]);
  auto an = a.node();
  return detail::make_op<S>(Shape{m, d}, std::move(out), {a},
                            [an, idx = std::move(idx), n, d, m](detail::Node<S>& nd) {
                              if (!an->requires_grad) return;
                              ConstMatMap<S> g(nd.grad.data(), m, d);
                              MatMap<S> da(an->grad.data(), n, d);
                              for (Index i = 0; i < m; ++i)
                                da.row(idx[static_cast<std::size_t>(i)]) += g.row(i);
                            });
}

// table: {V,d}; ids map to rows of the table.
template <typename S>
Tensor<S> embedding(const Tensor<S>& table, const std::vector<int>& ids) {
  std::vector<Index> idx(ids.begin(), ids.end());
  return gather_rows(table, std::move(idx), "embedding");
}

// x: {Cin,H,W}, w: {Cout,Cin,kh,kw}, b: {Cout}. Zero padding, square stride.
// im2col + matmul forward, col2im scatter backward.
template <typename S>
Tensor<S> conv2d(const Tensor<S>& x, const Tensor<S>& w, const Tensor<S>& b, Index stride,
                 Index pad) {
  detail::require(x.rank() == 3, "conv2d: input must be rank-3, got " + x.shape().str());
  detail::require(w.rank() == 4, "conv2d: weight must be rank-4, got " + w.shape().str());
  const Index cin = x.dim(0), h = x.dim(1), wd = x.dim(2);
  const Index cout = w.dim(0), kh = w.dim(2), kw = w.dim(3);
  detail::require(w.dim(1) == cin,
                  "conv2d: channel mismatch " + x.shape().str() + " vs " + w.shape().str());
  detail::require(b.numel() == cout, "conv2d: bias size mismatch " + b.shape().str());
  detail::require(stride >= 1 && pad >= 0, "conv2d: bad stride/pad");
  const Index oh = (h + 2 * pad - kh) / stride + 1;
  const Index ow = (wd + 2 * pad - kw) / stride + 1;
  detail::require(oh >= 1 && ow >= 1, "conv2d: kernel larger than padded input");

  const Index patch = cin * kh * kw;
  auto cols = std::make_shared<MatrixRM<S>>(oh * ow, patch);
  cols->setZero();
  for (Index oy = 0; oy < oh; ++oy) {
    for (Index ox = 0; ox < ow; ++ox) {
      const Index row = oy * ow + ox;
      for (Index ci = 0; ci < cin; ++ci) {
        for (Index ky = 0; ky < kh; ++ky) {
          const Index iy = oy * stride - pad + ky;
          if (iy < 0 || iy >= h) continue;
          for (Index kx = 0; kx < kw; ++kx) {
            const Index ix = ox * stride - pad + kx;
            if (ix < 0 || ix >= wd) continue;
            (*cols)(row, (ci * kh + ky) * kw + kx) = x.value()[(ci * h + iy) * wd + ix];
          }
        }
      }
    }
  }

  ConstMatMap<S> wmat(w.value().data(), cout, patch);
  MatrixRM<S> ymat(oh * ow, cout);
  ymat.noalias() = (*cols) * wmat.transpose();
  ArrayX<S> out(cout * oh * ow);
  for (Index c = 0; c < cout; ++c)
    out.segment(c * oh * ow, oh * ow) = ymat.col(c).array() + b.value()[c];

  auto xn = x.node(), wn = w.node(), bn = b.node();
  auto backward = [xn, wn, bn, cols, cin, h, wd, cout, kh, kw, oh, ow, stride, pad,
                   patch](detail::Node<S>& nd) {
    MatrixRM<S> gmat(oh * ow, cout);
    for (Index c = 0; c < cout; ++c) gmat.col(c) = nd.grad.segment(c * oh * ow, oh * ow).matrix();
    if (bn->requires_grad)
      for (Index c = 0; c < cout; ++c) bn->grad[c] += gmat.col(c).sum();
    if (wn->requires_grad)
      MatMap<S>(wn->grad.data(), cout, patch).noalias() += gmat.transpose() * (*cols);
    if (xn->requires_grad) {
      ConstMatMap<S> wmat2(wn->value.data(), cout, patch);
      MatrixRM<S> dcols(oh * ow, patch);
      dcols.noalias() = gmat * wmat2;
      for (Index oy = 0; oy < oh; ++oy)
        for (Index ox = 0; ox < ow; ++ox) {
          const Index row = oy * ow + ox;
          for (Index ci = 0; ci < cin; ++ci)
            for (Index ky = 0; ky < kh; ++ky) {
              const Index iy = oy * stride - pad + ky;
              if (iy < 0 || iy >= h) continue;
              for (Index kx = 0; kx < kw; ++kx) {
                const Index ix = ox * stride - pad + kx;
                if (ix < 0 || ix >= wd) continue;
                xn->grad[(ci * h + iy) * wd + ix] += dcols(row, (ci * kh + ky) * kw + kx);
              }
            }
        }
    }
  };
  return detail::make_op<S>(Shape{cout, oh, ow}, std::move(out), {x, w, b}, std::move(backward));
}

// Align-corners bilinear sampling of fmap {C,Hf,Wf} at normalized (u,v) points.
// Points outside [0,1]^2 clamp to the border. Differentiable in fmap only.
template <typename S>
Tensor<S> grid_sample(const Tensor<S>& fmap, const std::vector<std::array<double, 2>>& points) {
  detail::require(fmap.rank() == 3, "grid_sample: fmap must be rank-3, got " + fmap.shape().str());
  const Index c = fmap.dim(0), hf = fmap.dim(1), wf = fmap.dim(2);
  detail::require(hf >= 1 && wf >= 1, "grid_sample: empty feature map");
  const Index n = static_cast<Index>(points.size());

  struct Coef {
    Index x0, x1, y0, y1;
    double wx, wy;
  };
  auto coefs = std::make_shared<std::vector<Coef>>();
  coefs->reserve(points.size());
  for (const auto& p : points) {
    detail::require(std::isfinite(p[0]) && std::isfinite(p[1]), "grid_sample: non-finite point");
    const double u = std::clamp(p[0], 0.0, 1.0);
    const double v = std::clamp(p[1], 0.0, 1.0);
    const double fx = u * static_cast<double>(wf - 1);
    const double fy = v * static_cast<double>(hf - 1);
    Coef k;
    k.x0 = static_cast<Index>(std::floor(fx));
    k.y0 = static_cast<Index>(std::floor(fy));
    k.x1 = std::min(k.x0 + 1, wf - 1);
    k.y1 = std::min(k.y0 + 1, hf - 1);
    k.wx = fx - static_cast<double>(k.x0);
    k.wy = fy - static_cast<double>(k.y0);
    coefs->push_back(k);
  }

  ArrayX<S> out(n * c);
  for (Index i = 0; i < n; ++i) {
    const Coef& k = (*coefs)[static_cast<std::size_t>(i)];
    for (Index ch = 0; ch < c; ++ch) {
      const S v00 = fmap.value()[(ch * hf + k.y0) * wf + k.x0];
      const S v01 = fmap.value()[(ch * hf + k.y0) * wf + k.x1];
      const S v10 = fmap.value()[(ch * hf + k.y1) * wf + k.x0];
      const S v11 = fmap.value()[(ch * hf + k.y1) * wf + k.x1];
      const double top = (1 - k.wx) * static_cast<double>(v00) + k.wx * static_cast<double>(v01);
      const double bot = (1 - k.wx) * static_cast<double>(v10) + k.wx * static_cast<double>(v11);
      out[i * c + ch] = static_cast<S>((1 - k.wy) * top + k.wy * bot);
    }
  }

  auto fn = fmap.node();
  return detail::make_op<S>(Shape{n, c}, std::move(out), {fmap},
                            [fn, coefs, c, hf, wf, n](detail::Node<S>& nd) {
                              if (!fn->requires_grad) return;
                              for (Index i = 0; i < n; ++i) {
                                const Coef& k = (*coefs)[static_cast<std::size_t>(i)];
                                const S w00 = static_cast<S>((1 - k.wx) * (1 - k.wy));
                                const S w01 = static_cast<S>(k.wx * (1 - k.wy));
                                const S w10 = static_cast<S>((1 - k.wx) * k.wy);
                                const S w11 = static_cast<S>(k.wx * k.wy);
                                for (Index ch = 0; ch < c; ++ch) {
                                  const S g = nd.grad[i * c + ch];
                                  fn->grad[(ch * hf + k.y0) * wf + k.x0] += g * w00;
                                  fn->grad[(ch * hf + k.y0) * wf + k.x1] += g * w01;
                                  fn->grad[(ch * hf + k.y1) * wf + k.x0] += g * w10;
                                  fn->grad[(ch * hf + k.y1) * wf + k.x1] += g * w11;
                                }
                              }
                            });
}

// Mean softmax cross-entropy over rows, stabilized by max subtraction.
// Optional per-class weights follow the weighted-mean convention
// (sum of w[y_i] * nll_i divided by sum of w[y_i]).
template <typename S>
Tensor<S> cross_entropy(const Tensor<S>& logits, const std::vector<int>& labels,
                        const std::vector<double>& class_weights = {}) {
  detail::require_rank2(logits, "cross_entropy");
  const Index m = logits.dim(0), k = logits.dim(1);
  detail::require(m >= 1, "cross_entropy: need at least one row");
  detail::require(static_cast<Index>(labels.size()) == m,
                  "cross_entropy: label count mismatch with " + logits.shape().str());
  detail::require(class_weights.empty() || static_cast<Index>(class_weights.size()) == k,
                  "cross_entropy: class weight count mismatch");
  for (int y : labels)
    detail::require(0 <= y && y < k, "cross_entropy: label " + std::to_string(y) + " out of range");

  auto soft = std::make_shared<MatrixRM<S>>(m, k);
  auto row_w = std::make_shared<ArrayX<S>>(m);
  double total = 0.0, wsum = 0.0;
  for (Index i = 0; i < m; ++i) {
    ArrayX<S> row = logits.mat().row(i).transpose().array();
    const S mx = row.maxCoeff();
    row -= mx;
    const S lse = std::log(row.exp().sum());
    const int y = labels[static_cast<std::size_t>(i)];
    const double w = class_weights.empty() ? 1.0 : class_weights[static_cast<std::size_t>(y)];
    total += w * static_cast<double>(lse - row[y]);
    wsum += w;
    soft->row(i) = (row - lse).exp().matrix().transpose();
    (*row_w)[i] = static_cast<S>(w);
  }
  ArrayX<S> out(1);
  out[0] = static_cast<S>(total / wsum);

  auto ln = logits.node();
  const auto labels_copy = labels;
  const S inv_wsum = static_cast<S>(1.0 / wsum);
  return detail::make_op<S>(
      Shape{1}, std::move(out), {logits},
      [ln, soft, row_w, labels_copy, m, k, inv_wsum](detail::Node<S>& nd) {
        if (!ln->requires_grad) return;
        const S g = nd.grad[0];
        MatMap<S> dl(ln->grad.data(), m, k);
        for (Index i = 0; i < m; ++i) {
          const S coef = g * (*row_w)[i] * inv_wsum;
          dl.row(i) += coef * soft->row(i);
          dl(i, labels_copy[static_cast<std::size_t>(i)]) -= coef;
        }
      });
}

}  // namespace gfte
