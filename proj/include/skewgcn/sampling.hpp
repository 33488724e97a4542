#pragma once

#include <algorithm>
#include <cmath>
#include <span>
#include <string>
#include <vector>

#include "skewgcn/graph.hpp"
#include "skewgcn/partition.hpp"
#include "skewgcn/rng.hpp"
#include "skewgcn/types.hpp"

namespace skewgcn {

enum class SamplingMode { full, local, skewed };

inline const char* to_string(SamplingMode m) {
  switch (m) {
    case SamplingMode::full: return "full";
    case SamplingMode::local: return "local";
    case SamplingMode::skewed: return "skewed";
  }
  return "?";
}

inline SamplingMode parse_sampling_mode(const std::string& s) {
  if (s == "full") return SamplingMode::full;
  if (s == "local") return SamplingMode::local;
  if (s == "skewed") return SamplingMode::skewed;
  throw Error("unknown sampling mode '" + s + "'");
}

struct SamplerConfig {
  std::size_t budget = 64;  // B, categorical draws per layer
  double skew_constant = 4.0;  // D
  SamplingMode mode = SamplingMode::full;
  double clamp_s_min = 1.0;

  void validate() const {
    require(budget >= 1, "sampling budget must be >= 1");
    require(skew_constant >= 0.0, "skew constant D must be >= 0");
  }
};

// Categorical distribution over a candidate set. q sums to 1 and every entry
// is positive; the cumulative table is built once for sampling.
class ProbDist {
 public:
  ProbDist() = default;

  ProbDist(NodeSet candidates, std::vector<double> q, std::vector<bool> is_local, double s_used)
      : candidates_(std::move(candidates)),
        q_(std::move(q)),
        is_local_(std::move(is_local)),
        s_used_(s_used) {
    require(!candidates_.empty(), "distribution needs at least one candidate");
    require(q_.size() == candidates_.size() && is_local_.size() == candidates_.size(),
            "distribution arrays must align with candidates");
    cdf_.resize(q_.size());
    double acc = 0.0;
    for (std::size_t k = 0; k < q_.size(); ++k) {
      require(q_[k] > 0.0, "sampling probabilities must be positive");
      acc += q_[k];
      cdf_[k] = acc;
    }
  }

  const NodeSet& candidates() const { return candidates_; }
  std::span<const double> q() const { return q_; }
  const std::vector<bool>& is_local() const { return is_local_; }
  double s_used() const { return s_used_; }
  std::size_t size() const { return q_.size(); }

  std::size_t n_local() const {
    return static_cast<std::size_t>(std::count(is_local_.begin(), is_local_.end(), true));
  }
  std::size_t n_remote() const { return size() - n_local(); }

  // Index of one categorical draw.
  std::size_t draw_index(Rng& rng) const {
    const double u = uniform01(rng) * cdf_.back();
    auto it = std::upper_bound(cdf_.begin(), cdf_.end(), u);
    if (it == cdf_.end()) --it;
    return static_cast<std::size_t>(it - cdf_.begin());
  }

 private:
  NodeSet candidates_;
  std::vector<double> q_;
  std::vector<bool> is_local_;
  double s_used_ = 1.0;
  std::vector<double> cdf_;
};

// q_j proportional to s * norm_j on local candidates and norm_j on remote ones.
inline ProbDist skewed_weights(NodeSet candidates, std::span<const double> col_norms,
                               std::vector<bool> is_local, double s) {
  require(!candidates.empty(), "empty candidate set");
  require(col_norms.size() == candidates.size() && is_local.size() == candidates.size(),
          "column norms and locality flags must align with candidates");
  require(s > 0.0, "skew factor must be positive");
  std::vector<double> q(col_norms.size());
  double z = 0.0;
  for (std::size_t k = 0; k < q.size(); ++k) {
    require(col_norms[k] > 0.0, "column norms must be positive");
    q[k] = is_local[k] ? s * col_norms[k] : col_norms[k];
    z += q[k];
  }
  if (!(z > 0.0) || !std::isfinite(z)) throw ContractError("zero total column norm");
  for (double& v : q) v /= z;
  return ProbDist(std::move(candidates), std::move(q), std::move(is_local), s);
}

// q_j = ||w_{*j}||^2 / sum_k ||w_{*k}||^2. Shares its arithmetic with
// skewed_weights so s = 1 reproduces it bit for bit.
inline ProbDist linear_weights(NodeSet candidates, std::span<const double> col_norms,
                               std::vector<bool> is_local) {
  return skewed_weights(std::move(candidates), col_norms, std::move(is_local), 1.0);
}

// Convenience overload: candidates 0..m-1, all flagged local.
inline ProbDist linear_weights(std::span<const double> col_norms) {
  return linear_weights(NodeSet::iota(col_norms.size()), col_norms,
                        std::vector<bool>(col_norms.size(), true));
}

// s = max(clamp, D (|N| - B) / |R| + 1/2).
inline double skew_scale(double d, std::size_t n_candidates, std::size_t budget,
                         std::size_t n_remote, double clamp_s_min = 1.0) {
  if (n_remote == 0) throw ContractError("skew_scale needs at least one remote candidate");
  require(budget <= n_candidates, "budget exceeds candidate count");
  require(d >= 0.0, "D must be >= 0");
  const double raw = d * static_cast<double>(n_candidates - budget) /
                         static_cast<double>(n_remote) + 0.5;
  return std::max(clamp_s_min, raw);
}

// Largest s with V_skewed(s) <= D1 * V_lnr: the larger root of
// s^2 - (T1 + T2) s + T3 = 0.
inline double exact_scale_upper_bound(double d1, std::size_t n_local, std::size_t n_remote,
                                      std::size_t budget, double sum_local, double sum_remote) {
  if (n_remote == 0) throw ContractError("exact scale bound needs |R| > 0");
  if (!(sum_local > 0.0)) throw ContractError("exact scale bound needs a positive local norm sum");
  require(d1 >= 1.0, "D1 must be >= 1");
  require(sum_remote >= 0.0, "remote norm sum must be >= 0");
  require(budget <= n_local + n_remote, "budget exceeds candidate count");
  const double nl = static_cast<double>(n_local);
  const double nr = static_cast<double>(n_remote);
  const double slack = (d1 - 1.0) * (nl + nr - static_cast<double>(budget));
  const double ratio = sum_remote / (nr * sum_local);
  const double t1 = slack / nr + 1.0;
  const double t2 = (slack + nl) * ratio;
  const double t3 = nl * ratio;
  const double disc = (t1 + t2) * (t1 + t2) - 4.0 * t3;
  if (disc < 0.0)
    throw ContractError("negative discriminant in exact scale bound: " + std::to_string(disc));
  return 0.5 * (t1 + t2) + 0.5 * std::sqrt(disc);
}

// p = 1 - (1 - q)^B, evaluated without cancellation for small q.
inline double inclusion_probability(double q, std::size_t budget) {
  require(q >= 0.0 && q <= 1.0, "probability out of [0, 1]");
  require(budget >= 1, "budget must be >= 1");
  if (q == 1.0) return 1.0;
  return -std::expm1(static_cast<double>(budget) * std::log1p(-q));
}

struct SampleDraw {
  NodeSet sampled;
  std::vector<double> sampled_p;         // aligned with sampled
  std::vector<std::size_t> sampled_pos;  // positions in the candidate set
  std::vector<double> inclusion_p;       // over all candidates
  std::size_t n_draws = 0;

  std::size_t n_remote(const ProbDist& d) const {
    std::size_t r = 0;
    for (std::size_t k : sampled_pos) r += d.is_local()[k] ? 0 : 1;
    return r;
  }
};

// B independent categorical draws with duplicates collapsed, so the
// inclusion probability of candidate j is exactly 1 - (1 - q_j)^B.
inline SampleDraw draw_sample(const ProbDist& dist, std::size_t budget, Rng& rng) {
  require(budget >= 1, "budget must be >= 1");
  const std::size_t m = dist.size();
  std::vector<char> hit(m, 0);
  for (std::size_t t = 0; t < budget; ++t) hit[dist.draw_index(rng)] = 1;
  SampleDraw out;
  out.n_draws = budget;
  out.inclusion_p.resize(m);
  std::vector<NodeId> ids;
  for (std::size_t k = 0; k < m; ++k) {
    out.inclusion_p[k] = inclusion_probability(dist.q()[k], budget);
    if (hit[k]) {
      ids.push_back(dist.candidates()[k]);
      out.sampled_pos.push_back(k);
      out.sampled_p.push_back(out.inclusion_p[k]);
    }
  }
  out.sampled = NodeSet::from_sorted(std::move(ids));
  return out;
}

// Takes every candidate with p = 1. Used when the budget covers the whole
// candidate set.
inline SampleDraw take_all(const ProbDist& dist) {
  SampleDraw out;
  out.n_draws = 0;
  out.sampled = dist.candidates();
  out.inclusion_p.assign(dist.size(), 1.0);
  out.sampled_p.assign(dist.size(), 1.0);
  out.sampled_pos.resize(dist.size());
  for (std::size_t k = 0; k < dist.size(); ++k) out.sampled_pos[k] = k;
  return out;
}

// Expected number of remote nodes in the sample: sum over R of p_j.
inline double expected_remote_count(const ProbDist& dist, std::size_t budget) {
  double acc = 0.0;
  for (std::size_t k = 0; k < dist.size(); ++k)
    if (!dist.is_local()[k]) acc += inclusion_probability(dist.q()[k], budget);
  return acc;
}

// Builds the per-layer distribution for a sampling mode. In local mode the
// remote candidates are dropped before normalizing; in skewed mode the scale
// comes from skew_scale, falling back to linear when nothing is remote.
inline ProbDist build_distribution(const WeightedGraph& g, const NodeSet& sources,
                                   const NodeSet& all_candidates, const Partition& part,
                                   WorkerId worker, const SamplerConfig& cfg) {
  NodeSet candidates = all_candidates;
  if (cfg.mode == SamplingMode::local)
    candidates = split_local_remote(all_candidates, part, worker).local;
  if (candidates.empty()) return ProbDist();
  std::vector<double> norms = column_norms(g, sources, candidates);
  std::vector<bool> local(candidates.size());
  std::size_t n_remote = 0;
  for (std::size_t k = 0; k < candidates.size(); ++k) {
    local[k] = part.is_local(candidates[k], worker);
    n_remote += local[k] ? 0 : 1;
  }
  if (cfg.mode != SamplingMode::skewed || n_remote == 0)
    return linear_weights(std::move(candidates), norms, std::move(local));
  const std::size_t b = std::min(cfg.budget, candidates.size());
  const double s = skew_scale(cfg.skew_constant, candidates.size(), b, n_remote, cfg.clamp_s_min);
  return skewed_weights(std::move(candidates), norms, std::move(local), s);
}

}  // namespace skewgcn
