#pragma once

// Shared helpers for the unit and acceptance suites: finite-difference
// gradient checks, independent reference estimators, and synthetic datasets.
// Reference code here is deliberately written straight-line, without reusing
// the library's own estimator internals, so tests stay independent oracles.

#include <algorithm>
#include <cmath>
#include <functional>
#include <vector>

#include "adhrl/ndmath.hpp"
#include "adhrl/optionnet.hpp"
#include "adhrl/rng.hpp"

namespace testsupport {

using adhrl::DenseNet;
using adhrl::MatrixXd;
using adhrl::Rng;
using adhrl::VectorXd;

// Central finite difference of a scalar function over a flat parameter
// vector. step 1e-5 balances truncation against cancellation for the
// magnitudes these nets produce.
inline VectorXd fd_gradient(const std::function<double(const VectorXd&)>& f,
                            const VectorXd& x, double step = 1e-5) {
  VectorXd g(x.size());
  VectorXd xp = x;
  for (int i = 0; i < x.size(); ++i) {
    const double saved = xp[i];
    xp[i] = saved + step;
    const double fp = f(xp);
    xp[i] = saved - step;
    const double fm = f(xp);
    xp[i] = saved;
    g[i] = (fp - fm) / (2.0 * step);
  }
  return g;
}

// Largest coordinatewise error of `analytic` against `numeric` after
// allowing rel_tol * |numeric| + abs_tol slack; <= 0 means within tolerance.
inline double grad_excess(const VectorXd& analytic, const VectorXd& numeric,
                          double rel_tol = 1e-4, double abs_tol = 1e-7) {
  double worst = -1.0;
  for (int i = 0; i < analytic.size(); ++i) {
    const double err = std::abs(analytic[i] - numeric[i]);
    const double allowed = rel_tol * std::abs(numeric[i]) + abs_tol;
    worst = std::max(worst, err - allowed);
  }
  return worst;
}

inline bool grads_match(const VectorXd& analytic, const VectorXd& numeric,
                        double rel_tol = 1e-4, double abs_tol = 1e-7) {
  return analytic.size() == numeric.size() &&
         grad_excess(analytic, numeric, rel_tol, abs_tol) <= 0.0;
}

// Single-layer net with hand-chosen weights; init through net_init keeps the
// bookkeeping (sizes, activation list) consistent with the library.
inline DenseNet wire_single(int in, int out, adhrl::Activation act,
                            const MatrixXd& W, const VectorXd& b) {
  DenseNet net = adhrl::net_init({in, out}, {act}, 0);
  net.layers[0].W = W;
  net.layers[0].b = b;
  return net;
}

// Direct unweighted empirical mutual information from a posterior matrix
// (rows = samples, cols = options): H(mean posterior) - mean H(posterior).
inline double reference_mi(const MatrixXd& posteriors) {
  const auto n = posteriors.rows();
  const auto k = posteriors.cols();
  auto entropy = [&](const VectorXd& p) {
    double h = 0.0;
    for (int o = 0; o < k; ++o)
      if (p[o] > 0.0) h -= p[o] * std::log(p[o]);
    return h;
  };
  VectorXd marginal = VectorXd::Zero(k);
  double h_cond = 0.0;
  for (Eigen::Index i = 0; i < n; ++i) {
    marginal += posteriors.row(i).transpose() / static_cast<double>(n);
    h_cond += entropy(posteriors.row(i).transpose()) / static_cast<double>(n);
  }
  return entropy(marginal) - h_cond;
}

// Labeled two-region dataset in (state, action) space, two Gaussian blobs per
// region. Used for clustering-purity checks on the option network.
struct LabeledData {
  adhrl::OptionTrainData data;
  std::vector<int> labels;      // region id per sample
  std::vector<bool> is_signal;  // false marks distractor filler
};

inline void push_blob(LabeledData& out, Rng& rng, int count, double sx,
                      double sy, double ax, double ay, double spread,
                      double advantage, int label, bool signal) {
  for (int i = 0; i < count; ++i) {
    VectorXd s(2), a(2);
    s << sx + rng.normal(0.0, spread), sy + rng.normal(0.0, spread);
    a << ax + rng.normal(0.0, spread), ay + rng.normal(0.0, spread);
    out.data.states.push_back(s);
    out.data.actions.push_back(a);
    out.labels.push_back(label);
    out.is_signal.push_back(signal);
    const auto n = out.data.advantages.size();
    out.data.advantages.conservativeResize(n + 1);
    out.data.behavior_log_densities.conservativeResize(n + 1);
    out.data.advantages[n] = advantage;
    out.data.behavior_log_densities[n] = 0.0;
  }
}

// Two regions of two blobs each, all high-advantage; clustering should
// recover the region boundary.
inline LabeledData make_two_region_data(std::uint64_t seed, int per_blob = 50) {
  LabeledData out;
  Rng rng(seed, 77);
  push_blob(out, rng, per_blob, -0.7, -0.7, -0.7, -0.7, 0.05, 2.0, 0, true);
  push_blob(out, rng, per_blob, -0.3, -0.3, -0.3, -0.3, 0.05, 2.0, 0, true);
  push_blob(out, rng, per_blob, 0.3, 0.3, 0.3, 0.3, 0.05, 2.0, 1, true);
  push_blob(out, rng, per_blob, 0.7, 0.7, 0.7, 0.7, 0.05, 2.0, 1, true);
  return out;
}

// Weighting-contrast dataset: both high-advantage regions sit on the positive
// diagonal while an equally heavy zero-advantage blob sits on the negative
// side. Unweighted clustering balances itself with a cut near the origin,
// splitting distractor from signal and lumping the two regions together.
// Advantage weighting shrinks the distractor to a sliver of the total mass,
// so the balanced cut moves into the gap between the regions.
inline LabeledData make_distractor_data(std::uint64_t seed, int per_blob = 50,
                                        int distractors = 200) {
  LabeledData out;
  Rng rng(seed, 77);
  push_blob(out, rng, per_blob, 0.2, 0.2, 0.2, 0.2, 0.05, 4.0, 0, true);
  push_blob(out, rng, per_blob, 0.6, 0.6, 0.6, 0.6, 0.05, 4.0, 0, true);
  push_blob(out, rng, per_blob, 1.4, 1.4, 1.4, 1.4, 0.05, 4.0, 1, true);
  push_blob(out, rng, per_blob, 1.8, 1.8, 1.8, 1.8, 0.05, 4.0, 1, true);
  Rng drng(seed, 78);
  push_blob(out, drng, distractors, -0.8, -0.8, -0.8, -0.8, 0.1, 0.0, 1, false);
  return out;
}

// Best-permutation agreement between hard option assignments and region
// labels, restricted to signal samples (two options, two regions).
inline double signal_purity(const std::vector<int>& assignments,
                            const LabeledData& data) {
  int match = 0, total = 0;
  for (std::size_t i = 0; i < assignments.size(); ++i) {
    if (!data.is_signal[i]) continue;
    ++total;
    if (assignments[i] == data.labels[i]) ++match;
  }
  const double direct = static_cast<double>(match) / total;
  return std::max(direct, 1.0 - direct);
}

}  // namespace testsupport
