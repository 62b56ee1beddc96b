#pragma once

#include <map>
#include <string>
#include <utility>
#include <vector>

#include "gfte/cellgraph.hpp"
#include "gfte/ops.hpp"
#include "gfte/rng.hpp"
#include "gfte/tensor.hpp"

namespace gfte {

// Named trainable parameters in creation order. Every tensor is initialized
// from the substream "init/<name>" of the rng handed to the constructor, so
// two ParamSets built from the same seed with the same creation sequence hold
// identical values.
template <typename S>
class ParamSet {
 public:
  explicit ParamSet(Rng rng) : rng_(rng) {}

  // Uniform(-limit, limit) with limit = sqrt(6 / (fan_in + fan_out)).
  Tensor<S> glorot(const std::string& name, Shape shape, Index fan_in, Index fan_out) {
    detail::require(fan_in > 0 && fan_out > 0, "glorot: bad fan for " + name);
    const double limit = std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
    Rng sub = rng_.substream("init/" + name);
    std::vector<S> data(static_cast<std::size_t>(shape.numel()));
    for (auto& v : data) v = static_cast<S>(sub.uniform(-limit, limit));
    return insert(name, Tensor<S>::from_data(shape, data));
  }

  Tensor<S> zeros(const std::string& name, Shape shape) {
    return insert(name, Tensor<S>::zeros(shape));
  }

  Tensor<S> at(const std::string& name) const {
    auto it = index_.find(name);
    if (it == index_.end()) throw UsageError("no such parameter: " + name);
    return entries_[it->second].second;
  }

  bool contains(const std::string& name) const { return index_.count(name) != 0; }

  const std::vector<std::pair<std::string, Tensor<S>>>& entries() const { return entries_; }

  std::size_t size() const { return entries_.size(); }

  Index numel() const {
    Index total = 0;
    for (const auto& [name, t] : entries_) total += t.numel();
    return total;
  }

 private:
  Tensor<S> insert(const std::string& name, Tensor<S> t) {
    if (index_.count(name)) throw UsageError("duplicate parameter name: " + name);
    t.set_requires_grad(true);
    index_[name] = entries_.size();
    entries_.emplace_back(name, t);
    return t;
  }

  Rng rng_;
  std::vector<std::pair<std::string, Tensor<S>>> entries_;
  std::map<std::string, std::size_t> index_;
};

template <typename S>
Tensor<S> dense(const Tensor<S>& x, const Tensor<S>& w, const Tensor<S>& b) {
  return add_rowvec(matmul(x, w), b);
}

// Symmetric GCN propagation matrix D^-1/2 (A + I) D^-1/2 as a dense constant.
template <typename S>
Tensor<S> normalized_adjacency(const CellGraph& graph) {
  const Index n = static_cast<Index>(graph.nodes.size());
  detail::require(n >= 1, "normalized_adjacency: empty graph");
  std::map<int, Index> row_of;
  for (Index i = 0; i < n; ++i) row_of[graph.nodes[static_cast<std::size_t>(i)].cell_id] = i;

  MatrixRM<S> a = MatrixRM<S>::Identity(n, n);  // self loops
  for (const auto& e : graph.edges) {
    auto si = row_of.find(e.src), di = row_of.find(e.dst);
    if (si == row_of.end() || di == row_of.end())
      throw UsageError("normalized_adjacency: edge (" + std::to_string(e.src) + "," +
                       std::to_string(e.dst) + ") references a node not in the graph");
    a(si->second, di->second) = S(1);
    a(di->second, si->second) = S(1);
  }
  ArrayX<S> dinv = a.rowwise().sum().array().rsqrt();
  MatrixRM<S> ahat = dinv.matrix().asDiagonal() * a * dinv.matrix().asDiagonal();
  return Tensor<S>::from_matrix(ahat);
}

// One Kipf layer: Ahat (X W) + b. Activation is the caller's business.
template <typename S>
Tensor<S> graph_conv(const Tensor<S>& ahat, const Tensor<S>& x, const Tensor<S>& w,
                     const Tensor<S>& b) {
  return add_rowvec(matmul(ahat, matmul(x, w)), b);
}

// Single-layer LSTM over n right-padded sequences of fixed length t_len,
// batched per timestep. ids_flat is row-major {n, t_len}. Gate layout in the
// 4H-wide weights is [input, forget, cell, output]. Returns the final hidden
// state {n, H}.
template <typename S>
Tensor<S> lstm_last_state(const std::vector<int>& ids_flat, Index n, Index t_len,
                          const Tensor<S>& embed, const Tensor<S>& w_ih, const Tensor<S>& w_hh,
                          const Tensor<S>& bias) {
  detail::require(static_cast<Index>(ids_flat.size()) == n * t_len,
                  "lstm: ids size mismatch with batch layout");
  detail::require(embed.rank() == 2 && w_ih.rank() == 2 && w_hh.rank() == 2,
                  "lstm: weights must be rank-2");
  const Index e = embed.dim(1), hid = w_hh.dim(0);
  detail::require(w_ih.dim(0) == e && w_ih.dim(1) == 4 * hid && w_hh.dim(1) == 4 * hid &&
                      bias.numel() == 4 * hid,
                  "lstm: weight shape mismatch");

  Tensor<S> h = Tensor<S>::zeros(Shape{n, hid});
  Tensor<S> c = Tensor<S>::zeros(Shape{n, hid});
  std::vector<int> ids_t(static_cast<std::size_t>(n));
  for (Index t = 0; t < t_len; ++t) {
    for (Index i = 0; i < n; ++i)
      ids_t[static_cast<std::size_t>(i)] = ids_flat[static_cast<std::size_t>(i * t_len + t)];
    Tensor<S> x_t = embedding(embed, ids_t);
    Tensor<S> gates = add_rowvec(add(matmul(x_t, w_ih), matmul(h, w_hh)), bias);
    Tensor<S> gi = sigmoid(slice_cols(gates, 0, hid));
    Tensor<S> gf = sigmoid(slice_cols(gates, hid, 2 * hid));
    Tensor<S> gg = tanh(slice_cols(gates, 2 * hid, 3 * hid));
    Tensor<S> go = sigmoid(slice_cols(gates, 3 * hid, 4 * hid));
    c = add(mul(gf, c), mul(gi, gg));
    h = mul(go, tanh(c));
  }
  return h;
}

}  // namespace gfte
