#pragma once

#include <algorithm>
#include <cmath>
#include <span>
#include <vector>

#include "skewgcn/graph.hpp"
#include "skewgcn/sampling.hpp"
#include "skewgcn/types.hpp"

namespace skewgcn {

// Inputs of the analytic one-layer variance bounds. C bounds ||x_j||^2 for
// every candidate; the sums are sum ||w_{*k}||^2 over L and R.
struct VarianceParams {
  double c = 1.0;
  std::size_t budget = 1;
  std::size_t n_local = 0;
  std::size_t n_remote = 0;
  double sum_local = 0.0;
  double sum_remote = 0.0;

  std::size_t n_candidates() const { return n_local + n_remote; }
  double sum_total() const { return sum_local + sum_remote; }

  void validate() const {
    require(c > 0.0, "C must be positive");
    require(budget >= 1, "budget must be >= 1 (B = 0)");
    require(sum_local >= 0.0 && sum_remote >= 0.0, "norm sums must be >= 0");
    require(budget <= n_candidates(), "budget exceeds candidate count");
  }
};

// Collects |L|, |R| and the norm sums of a distribution's candidate set.
inline VarianceParams variance_params(const ProbDist& dist, std::span<const double> col_norms,
                                      double c, std::size_t budget) {
  require(col_norms.size() == dist.size(), "column norms must align with candidates");
  VarianceParams vp;
  vp.c = c;
  vp.budget = budget;
  for (std::size_t k = 0; k < dist.size(); ++k) {
    if (dist.is_local()[k]) {
      ++vp.n_local;
      vp.sum_local += col_norms[k];
    } else {
      ++vp.n_remote;
      vp.sum_remote += col_norms[k];
    }
  }
  return vp;
}

// V_lnr = (|N|/B - 1) * sum ||w_{*k}||^2 * C
inline double variance_bound_linear(const VarianceParams& vp) {
  vp.validate();
  const double n = static_cast<double>(vp.n_candidates());
  const double b = static_cast<double>(vp.budget);
  return (n / b - 1.0) * vp.sum_total() * vp.c;
}

// Both algebraic forms of the skewed bound:
//   (( |L|/(sB) + |R|/B )( s sum_L + sum_R ) - sum_N) C
//   V_lnr + (s-1)|R|/B sum_L C + (1-s)|L|/(sB) sum_R C
// Agreement is checked relative to the largest term of the first form,
// since the bound itself may cross zero.
struct SkewedBoundForms {
  double product_form = 0.0;
  double expanded_form = 0.0;
  double scale = 0.0;
};

inline SkewedBoundForms variance_bound_skewed_forms(const VarianceParams& vp, double s) {
  vp.validate();
  require(s > 0.0, "skew factor must be positive");
  const double nl = static_cast<double>(vp.n_local);
  const double nr = static_cast<double>(vp.n_remote);
  const double b = static_cast<double>(vp.budget);
  const double a = vp.sum_local, r = vp.sum_remote;
  SkewedBoundForms f;
  const double product = (nl / (s * b) + nr / b) * (s * a + r);
  f.product_form = (product - (a + r)) * vp.c;
  f.expanded_form = variance_bound_linear(vp) + (s - 1.0) * nr / b * a * vp.c +
                    (1.0 - s) * nl / (s * b) * r * vp.c;
  f.scale = std::max({std::abs(product), a + r, std::abs(f.expanded_form)}) * vp.c;
  return f;
}

inline constexpr double kSkewedFormTolerance = 1e-9;

inline double variance_bound_skewed(const VarianceParams& vp, double s) {
  const auto f = variance_bound_skewed_forms(vp, s);
  if (std::abs(f.product_form - f.expanded_form) > kSkewedFormTolerance * f.scale)
    throw Error("skewed variance bound forms disagree: " + std::to_string(f.product_form) +
                " vs " + std::to_string(f.expanded_form));
  return f.product_form;
}

// Exact aggregation over s_l: row i = sum_{j in N(i)} w_ij x_j, with x rows
// aligned with neighbor_union(g, s_l).
inline Matrix full_aggregate(const WeightedGraph& g, const NodeSet& s_l, const Matrix& x) {
  const NodeSet nbrs = neighbor_union(g, s_l);
  if (static_cast<std::size_t>(x.rows()) != nbrs.size())
    throw ContractError("embedding rows (" + std::to_string(x.rows()) +
                        ") do not match |N(s_l)| (" + std::to_string(nbrs.size()) + ")");
  Matrix out = Matrix::Zero(static_cast<Eigen::Index>(s_l.size()), x.cols());
  for (std::size_t r = 0; r < s_l.size(); ++r) {
    auto row = g.row(s_l[r]);
    auto w = g.row_weights(s_l[r]);
    for (std::size_t e = 0; e < row.size(); ++e)
      out.row(static_cast<Eigen::Index>(r)) += w[e] * x.row(static_cast<Eigen::Index>(nbrs.index_of(row[e])));
  }
  return out;
}

// Unbiased estimate: row i = sum_{j in sampled and N(i)} (1/p_j) w_ij x_j,
// x rows aligned with draw.sampled.
inline Matrix estimate_aggregate(const WeightedGraph& g, const NodeSet& s_l,
                                 const SampleDraw& draw, const Matrix& x_sampled) {
  check_nodes(g, s_l);
  if (static_cast<std::size_t>(x_sampled.rows()) != draw.sampled.size())
    throw ContractError("embedding rows do not match the sample size");
  for (double p : draw.sampled_p)
    if (!(p > 0.0)) throw ContractError("sampled node has zero inclusion probability");
  Matrix out = Matrix::Zero(static_cast<Eigen::Index>(s_l.size()), x_sampled.cols());
  for (std::size_t r = 0; r < s_l.size(); ++r) {
    auto row = g.row(s_l[r]);
    auto w = g.row_weights(s_l[r]);
    for (std::size_t e = 0; e < row.size(); ++e) {
      const std::size_t k = draw.sampled.index_of(row[e]);
      if (k == draw.sampled.size()) continue;
      out.row(static_cast<Eigen::Index>(r)) +=
          (w[e] / draw.sampled_p[k]) * x_sampled.row(static_cast<Eigen::Index>(k));
    }
  }
  return out;
}

// Mean over trials of the squared Frobenius deviation from `exact`.
inline double empirical_variance(std::span<const Matrix> trials, const Matrix& exact) {
  require(trials.size() >= 2, "empirical variance needs at least two trials");
  double acc = 0.0;
  for (const auto& t : trials) {
    if (t.rows() != exact.rows() || t.cols() != exact.cols())
      throw ContractError("trial shape does not match the exact aggregate");
    acc += (t - exact).squaredNorm();
  }
  return acc / static_cast<double>(trials.size());
}

// Closed form sum_j (1/p_j - 1) ||w_{*j}||^2 ||x_j||^2, which treats the
// inclusion indicators as independent.
inline double independent_variance(std::span<const double> p, std::span<const double> col_norms,
                                   std::span<const double> x_sq_norms) {
  require(p.size() == col_norms.size() && p.size() == x_sq_norms.size(),
          "arrays must align");
  double acc = 0.0;
  for (std::size_t k = 0; k < p.size(); ++k) acc += (1.0 / p[k] - 1.0) * col_norms[k] * x_sq_norms[k];
  return acc;
}

}  // namespace skewgcn
