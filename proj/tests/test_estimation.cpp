#include <gtest/gtest.h>

#include <cmath>
#include <sstream>

#include "skewgcn/estimation.hpp"
#include "test_util.hpp"

using namespace skewgcn;
using skewgcn::testing::random_graph;

namespace {

WeightedGraph path3() {
  std::istringstream in("0 1\n1 2");
  return normalize_weights(parse_edge_list(in));
}

// Exact variance of the dedup-of-iid-draws estimator, including the pairwise
// inclusion terms P(j and k sampled) = 1 - (1-q_j)^B - (1-q_k)^B + (1-q_j-q_k)^B.
double exact_estimator_variance(const WeightedGraph& g, const NodeSet& s_l, const ProbDist& d,
                                std::size_t b, const Matrix& x) {
  const double bd = static_cast<double>(b);
  const auto& cand = d.candidates();
  double v = 0.0;
  for (NodeId i : s_l) {
    auto row = g.row(i);
    auto w = g.row_weights(i);
    for (std::size_t e1 = 0; e1 < row.size(); ++e1) {
      const std::size_t j = cand.index_of(row[e1]);
      const double qj = d.q()[j];
      const double pj = 1 - std::pow(1 - qj, bd);
      for (std::size_t e2 = 0; e2 < row.size(); ++e2) {
        const std::size_t k = cand.index_of(row[e2]);
        const double dot = x.row(static_cast<Eigen::Index>(j)).dot(x.row(static_cast<Eigen::Index>(k)));
        if (j == k) {
          v += (1 / pj - 1) * w[e1] * w[e1] * dot;
        } else {
          const double qk = d.q()[k];
          const double pk = 1 - std::pow(1 - qk, bd);
          const double pjk = 1 - std::pow(1 - qj, bd) - std::pow(1 - qk, bd) + std::pow(1 - qj - qk, bd);
          v += (pjk / (pj * pk) - 1) * w[e1] * w[e2] * dot;
        }
      }
    }
  }
  return v;
}

struct McSetup {
  WeightedGraph g;
  NodeSet s_l;
  NodeSet cand;
  std::vector<double> norms;
  ProbDist dist;
  Matrix x;  // rows aligned with cand
  Matrix exact;
};

McSetup make_setup(std::uint64_t seed, std::size_t n, double p_edge, double s_frac, double skew,
                   bool positive_features) {
  McSetup m;
  Rng rng = make_rng(seed, "mc-setup");
  m.g = normalize_weights(random_graph(n, p_edge, seed));
  m.s_l = skewgcn::testing::random_subset(n, s_frac, rng);
  m.cand = neighbor_union(m.g, m.s_l);
  m.norms = column_norms(m.g, m.s_l, m.cand);
  std::vector<bool> local(m.cand.size());
  for (std::size_t k = 0; k < local.size(); ++k) local[k] = uniform01(rng) < 0.5;
  m.dist = skewed_weights(m.cand, m.norms, local, skew);
  m.x = skewgcn::testing::random_matrix(m.cand.size(), 3, rng);
  if (positive_features) m.x = m.x.cwiseAbs().array() + 0.5;
  m.exact = full_aggregate(m.g, m.s_l, m.x);
  return m;
}

Matrix estimate_once(const McSetup& m, std::size_t b, Rng& rng) {
  const SampleDraw d = draw_sample(m.dist, b, rng);
  Matrix xs(static_cast<Eigen::Index>(d.sampled.size()), m.x.cols());
  for (std::size_t k = 0; k < d.sampled_pos.size(); ++k)
    xs.row(static_cast<Eigen::Index>(k)) = m.x.row(static_cast<Eigen::Index>(d.sampled_pos[k]));
  return estimate_aggregate(m.g, m.s_l, d, xs);
}

}  // namespace

TEST(FullAggregate, Examples) {
  const auto g = path3();
  const NodeSet s = NodeSet::from_sorted({1});
  EXPECT_TRUE(full_aggregate(g, s, Matrix::Zero(3, 4)).isZero());
  const Matrix out = full_aggregate(g, s, Matrix::Ones(3, 1));
  EXPECT_NEAR(out(0, 0), 2.0 / std::sqrt(6.0) + 1.0 / 3.0, 1e-15);
  EXPECT_NEAR(out(0, 0), 1.14983, 1e-5);

  const auto single = normalize_weights(build_undirected(1, {}));
  Matrix v(1, 3);
  v << 1.5, -2.0, 0.25;
  EXPECT_EQ(full_aggregate(single, NodeSet::iota(1), v), v);
  EXPECT_THROW(full_aggregate(g, s, Matrix::Ones(2, 1)), ContractError);
}

TEST(EstimateAggregate, TakeAllEqualsFull) {
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const auto m = make_setup(seed, 30, 0.15, 0.3, 2.0, false);
    const auto d = take_all(m.dist);
    EXPECT_EQ(estimate_aggregate(m.g, m.s_l, d, m.x), m.exact);
  }
}

TEST(EstimateAggregate, EmptyIntersectionGivesZeroRow) {
  const auto g = path3();
  // Only node 2 is sampled; node 0 is not adjacent to it.
  SampleDraw d;
  d.sampled = NodeSet::from_sorted({2});
  d.sampled_p = {0.5};
  const Matrix out = estimate_aggregate(g, NodeSet::from_sorted({0, 1}), d, Matrix::Ones(1, 2));
  EXPECT_TRUE(out.row(0).isZero());
  EXPECT_NEAR(out(1, 0), g.weight(1, 2) / 0.5, 1e-15);
  d.sampled_p = {0.0};
  EXPECT_THROW(estimate_aggregate(g, NodeSet::from_sorted({0}), d, Matrix::Ones(1, 2)),
               ContractError);
}

TEST(EstimateAggregate, MonteCarloMeanWithinOnePercent) {
  const auto m = make_setup(5, 20, 0.25, 0.3, 1.0, true);
  const std::size_t b = std::max<std::size_t>(1, m.cand.size() / 2);
  Rng rng = make_rng(1, "mc-mean");
  const int trials = 20000;
  Matrix sum = Matrix::Zero(m.exact.rows(), m.exact.cols());
  for (int t = 0; t < trials; ++t) sum += estimate_once(m, b, rng);
  const Matrix mean = sum / trials;
  for (Eigen::Index i = 0; i < mean.rows(); ++i)
    for (Eigen::Index j = 0; j < mean.cols(); ++j)
      EXPECT_NEAR(mean(i, j), m.exact(i, j), 0.01 * std::abs(m.exact(i, j)));
}

TEST(EstimateAggregate, UnbiasedWithinFourSigma) {
  for (std::uint64_t seed = 10; seed < 16; ++seed) {
    const auto m = make_setup(seed, 30 + seed, 0.15, 0.25, 3.0, false);
    const std::size_t b = std::max<std::size_t>(1, m.cand.size() / 3);
    Rng rng = make_rng(seed, "mc-unbiased");
    const int trials = 20000;
    Matrix sum = Matrix::Zero(m.exact.rows(), m.exact.cols());
    Matrix sq = sum;
    for (int t = 0; t < trials; ++t) {
      const Matrix e = estimate_once(m, b, rng);
      sum += e;
      sq += e.cwiseProduct(e);
    }
    const Matrix mean = sum / trials;
    const Matrix var = sq / trials - mean.cwiseProduct(mean);
    for (Eigen::Index i = 0; i < mean.rows(); ++i)
      for (Eigen::Index j = 0; j < mean.cols(); ++j) {
        const double se = std::sqrt(std::max(var(i, j), 0.0) / trials);
        EXPECT_LE(std::abs(mean(i, j) - m.exact(i, j)), 4 * se + 1e-12);
      }
  }
}

TEST(EmpiricalVariance, Examples) {
  const Matrix exact = Matrix::Random(3, 2);
  const std::vector<Matrix> same{exact, exact, exact};
  EXPECT_EQ(empirical_variance(same, exact), 0.0);
  Matrix e = Matrix::Zero(3, 2);
  e(1, 0) = 1.0;
  const std::vector<Matrix> pm{exact + e, exact - e};
  EXPECT_NEAR(empirical_variance(pm, exact), 1.0, 1e-15);
  const std::vector<Matrix> one{exact};
  EXPECT_THROW(empirical_variance(one, exact), ContractError);
  const std::vector<Matrix> bad{exact, Matrix::Zero(2, 2)};
  EXPECT_THROW(empirical_variance(bad, exact), ContractError);
}

// With mutually orthogonal features the pairwise terms vanish and the
// independent closed form is exact.
TEST(EmpiricalVariance, MatchesClosedFormForOrthogonalFeatures) {
  auto m = make_setup(21, 25, 0.2, 0.3, 2.0, false);
  m.x = Matrix::Zero(static_cast<Eigen::Index>(m.cand.size()), static_cast<Eigen::Index>(m.cand.size()));
  for (Eigen::Index k = 0; k < m.x.rows(); ++k) m.x(k, k) = 0.5 + static_cast<double>(k % 3);
  m.exact = full_aggregate(m.g, m.s_l, m.x);
  const std::size_t b = std::max<std::size_t>(1, m.cand.size() / 3);

  std::vector<double> p(m.cand.size()), xsq(m.cand.size());
  for (std::size_t k = 0; k < p.size(); ++k) {
    p[k] = inclusion_probability(m.dist.q()[k], b);
    xsq[k] = m.x.row(static_cast<Eigen::Index>(k)).squaredNorm();
  }
  const double closed = independent_variance(p, m.norms, xsq);
  EXPECT_NEAR(closed, exact_estimator_variance(m.g, m.s_l, m.dist, b, m.x), 1e-9 * closed);

  Rng rng = make_rng(2, "mc-var");
  const int trials = 100000;
  double acc = 0.0;
  for (int t = 0; t < trials; ++t) acc += (estimate_once(m, b, rng) - m.exact).squaredNorm();
  EXPECT_NEAR(acc / trials, closed, 0.05 * closed);
}

// General features: Monte Carlo agrees with the exact variance including the
// negative inclusion correlation; the independent form is only approximate.
TEST(EmpiricalVariance, MatchesExactVarianceWithCrossTerms) {
  const auto m = make_setup(33, 25, 0.2, 0.3, 2.0, true);
  const std::size_t b = std::max<std::size_t>(2, m.cand.size() / 3);
  const double exact_v = exact_estimator_variance(m.g, m.s_l, m.dist, b, m.x);
  Rng rng = make_rng(3, "mc-var");
  const int trials = 100000;
  std::vector<Matrix> keep;
  double acc = 0.0;
  for (int t = 0; t < trials; ++t) {
    Matrix e = estimate_once(m, b, rng);
    acc += (e - m.exact).squaredNorm();
    if (t < 100) keep.push_back(std::move(e));
  }
  EXPECT_NEAR(acc / trials, exact_v, 0.05 * exact_v);
  EXPECT_GT(empirical_variance(keep, m.exact), 0.0);
}

TEST(VarianceBoundLinear, Examples) {
  VarianceParams vp{1.0, 2, 2, 2, 1.5, 2.5};
  EXPECT_DOUBLE_EQ(variance_bound_linear(vp), 4.0);
  VarianceParams full = vp;
  full.budget = 4;
  EXPECT_EQ(variance_bound_linear(full), 0.0);
  VarianceParams dbl = vp;
  dbl.c = 2.0;
  EXPECT_DOUBLE_EQ(variance_bound_linear(dbl), 2.0 * variance_bound_linear(vp));
  VarianceParams zero = vp;
  zero.budget = 0;
  EXPECT_THROW(variance_bound_linear(zero), ContractError);
}

TEST(VarianceBoundSkewed, HandCase) {
  const VarianceParams vp{1.0, 2, 2, 2, 2.0, 2.0};
  const auto f = variance_bound_skewed_forms(vp, 2.0);
  EXPECT_DOUBLE_EQ(f.product_form, 5.0);
  EXPECT_DOUBLE_EQ(f.expanded_form, 5.0);
  EXPECT_DOUBLE_EQ(variance_bound_skewed(vp, 2.0), 5.0);
  EXPECT_DOUBLE_EQ(variance_bound_linear(vp), 4.0);
}

TEST(VarianceBoundSkewed, UnitScaleEqualsLinear) {
  Rng rng(6);
  for (int t = 0; t < 1000; ++t) {
    VarianceParams vp;
    vp.c = 0.1 + uniform01(rng);
    vp.n_local = uniform_index(rng, 100);
    vp.n_remote = 1 + uniform_index(rng, 100);
    vp.budget = 1 + uniform_index(rng, vp.n_candidates());
    vp.sum_local = uniform01(rng);
    vp.sum_remote = uniform01(rng);
    const double lin = variance_bound_linear(vp);
    EXPECT_NEAR(variance_bound_skewed(vp, 1.0), lin, 1e-12 * std::max(lin, vp.sum_total() * vp.c));
  }
}

TEST(VarianceBoundSkewed, FormsAgreeOnGrid) {
  Rng rng(7);
  for (int t = 0; t < 200; ++t) {
    VarianceParams vp;
    vp.c = 0.1 + 3 * uniform01(rng);
    vp.n_local = 1 + uniform_index(rng, 300);
    vp.n_remote = 1 + uniform_index(rng, 300);
    vp.budget = 1 + uniform_index(rng, vp.n_candidates());
    vp.sum_local = 1e-3 + uniform01(rng);
    vp.sum_remote = 1e-3 + uniform01(rng);
    for (double s = 1.0; s <= 100.0; s += 0.5) {
      const auto f = variance_bound_skewed_forms(vp, s);
      EXPECT_LE(std::abs(f.product_form - f.expanded_form), 1e-9 * f.scale);
    }
  }
}

TEST(VarianceBoundSkewed, GrowsWithoutLimitInScale) {
  const VarianceParams vp{1.0, 10, 30, 20, 3.0, 2.0};
  // Minimum of (|L| a + |R| b + |L| b / s + |R| a s) / B is at s* = sqrt(|L| b / (|R| a)).
  const double s_star = std::sqrt(30.0 * 2.0 / (20.0 * 3.0));
  double prev = variance_bound_skewed(vp, s_star);
  for (double s = s_star * 1.5; s < 1e6; s *= 2) {
    const double cur = variance_bound_skewed(vp, s);
    EXPECT_GT(cur, prev);
    prev = cur;
  }
  EXPECT_GT(prev, 1e5);
}

// The bounds substitute p_j = B q_j, but 1 - (1 - q)^B <= B q, so 1/p_j - 1 is
// underestimated. With uniform weights and B = |N| - 1 the bound is
// sum C / (|N| - 1) while the exact variance stays near 0.58 sum C.
TEST(VarianceBoundLinear, UnderestimatesNearFullBudget) {
  const std::size_t n = 20, b = n - 1;
  const std::vector<double> norms(n, 0.05);
  const auto dist = linear_weights(norms);
  std::vector<double> p(n), xsq(n, 1.0);
  for (std::size_t k = 0; k < n; ++k) p[k] = inclusion_probability(dist.q()[k], b);
  // Orthogonal unit features: the independent form is the exact variance.
  const double exact = independent_variance(p, norms, xsq);
  const double bound = variance_bound_linear(variance_params(dist, norms, 1.0, b));
  EXPECT_NEAR(bound, 1.0 / 19.0, 1e-15);
  EXPECT_GT(exact, 10 * bound);
  // Far from the full budget the substitution is accurate to first order.
  const std::size_t small = 2;
  for (std::size_t k = 0; k < n; ++k) p[k] = inclusion_probability(dist.q()[k], small);
  const double exact_small = independent_variance(p, norms, xsq);
  const double bound_small = variance_bound_linear(variance_params(dist, norms, 1.0, small));
  EXPECT_LE(exact_small, bound_small * 1.06);
  EXPECT_GE(exact_small, bound_small);
}

TEST(VarianceParams, FromDistribution) {
  const std::vector<double> norms{1.0, 2.0, 3.0};
  const auto d = skewed_weights(NodeSet::iota(3), norms, {true, false, true}, 2.0);
  const auto vp = variance_params(d, norms, 4.0, 2);
  EXPECT_EQ(vp.n_local, 2u);
  EXPECT_EQ(vp.n_remote, 1u);
  EXPECT_DOUBLE_EQ(vp.sum_local, 4.0);
  EXPECT_DOUBLE_EQ(vp.sum_remote, 2.0);
  EXPECT_EQ(vp.c, 4.0);
}
