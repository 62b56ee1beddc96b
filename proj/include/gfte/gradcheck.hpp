#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <string>
#include <tuple>
#include <vector>

#include "gfte/layers.hpp"
#include "gfte/tensor.hpp"

namespace gfte {

struct GradCheckOptions {
  double step = 1e-5;
  double tol = 1e-4;
  // Absolute slack: when |analytic - numeric| <= atol the coordinate passes
  // outright. Central differences carry ~|f|*eps/(2*step) of cancellation
  // noise, so gradients below that floor cannot be measured relatively; a
  // genuine backward bug shows up far above it.
  double atol = 1e-9;
  Index max_coords = 64;  // per tensor; sampled without replacement when numel exceeds this
};

struct GradCheckFailure {
  std::string param;
  Index coord = 0;
  double analytic = 0.0;
  double numeric = 0.0;
  double rel_err = 0.0;
};

struct GradCheckReport {
  bool ok = true;
  std::size_t coords_checked = 0;
  double max_rel_err = 0.0;
  std::string worst_param;
  Index worst_coord = 0;
  std::vector<GradCheckFailure> failures;
  // Per-parameter (max rel err, coords checked), in ParamSet order.
  std::vector<std::tuple<std::string, double, std::size_t>> per_param;
};

inline double gradcheck_rel_err(double analytic, double numeric) {
  return std::abs(analytic - numeric) /
         std::max({std::abs(analytic), std::abs(numeric), 1e-8});
}

// Central-difference check of d(loss)/d(param) for every parameter in the set.
// loss_fn must rebuild the forward graph on each call (parameter values are
// perturbed in place between calls). Meant to run with S = double.
//
// A coordinate that fails at `step` is re-measured at step/10 and the better
// reading wins: a ReLU kink sitting inside the difference window corrupts one
// step size but not the other, while a wrong backward formula disagrees at
// every step size.
template <typename S>
GradCheckReport gradcheck(const ParamSet<S>& params, const std::function<Tensor<S>()>& loss_fn,
                          Rng rng, GradCheckOptions opts = {}) {
  Tensor<S> loss = loss_fn();
  loss.backward();

  std::vector<ArrayX<S>> analytic;
  analytic.reserve(params.size());
  for (const auto& [name, t] : params.entries()) {
    if (!t.has_grad()) throw NumericError("gradcheck: parameter " + name + " got no gradient");
    analytic.push_back(t.node()->grad);
  }

  GradCheckReport report;
  const S h = static_cast<S>(opts.step);
  std::size_t pi = 0;
  for (const auto& [name, t] : params.entries()) {
    std::vector<Index> coords(static_cast<std::size_t>(t.numel()));
    for (Index i = 0; i < t.numel(); ++i) coords[static_cast<std::size_t>(i)] = i;
    if (t.numel() > opts.max_coords) {
      Rng sub = rng.substream("gradcheck/" + name);
      sub.shuffle(coords);
      coords.resize(static_cast<std::size_t>(opts.max_coords));
    }
    auto node = t.node();
    double param_max = 0.0;
    for (Index c : coords) {
      const S orig = node->value[c];
      const auto measure = [&](S hh) {
        node->value[c] = orig + hh;
        const double f_plus = static_cast<double>(loss_fn().item());
        node->value[c] = orig - hh;
        const double f_minus = static_cast<double>(loss_fn().item());
        node->value[c] = orig;
        return (f_plus - f_minus) / (2.0 * static_cast<double>(hh));
      };
      const double a = static_cast<double>(analytic[pi][c]);
      const auto score = [&](double n) {
        return std::abs(a - n) <= opts.atol ? 0.0 : gradcheck_rel_err(a, n);
      };
      double numeric = measure(h);
      double rel = score(numeric);
      if (rel > opts.tol) {
        const double numeric2 = measure(h / static_cast<S>(10));
        const double rel2 = score(numeric2);
        if (rel2 < rel) {
          numeric = numeric2;
          rel = rel2;
        }
      }
      ++report.coords_checked;
      param_max = std::max(param_max, rel);
      if (rel > report.max_rel_err) {
        report.max_rel_err = rel;
        report.worst_param = name;
        report.worst_coord = c;
      }
      if (rel > opts.tol) {
        report.ok = false;
        report.failures.push_back({name, c, a, numeric, rel});
      }
    }
    report.per_param.emplace_back(name, param_max, coords.size());
    ++pi;
  }
  return report;
}

}  // namespace gfte
