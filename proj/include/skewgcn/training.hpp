#pragma once

#include <algorithm>
#include <cmath>
#include <future>
#include <iostream>
#include <numeric>
#include <optional>
#include <string>
#include <vector>

#include "skewgcn/graph.hpp"
#include "skewgcn/partition.hpp"
#include "skewgcn/rng.hpp"
#include "skewgcn/sampling.hpp"
#include "skewgcn/types.hpp"

namespace skewgcn {

// ---------------------------------------------------------------------------
// Model

// M-layer GCN: H^(l) = P sigma(H^(l-1)) W^(l), sigma = ReLU, no activation on
// the raw features and none on the output logits.
struct GcnModel {
  std::vector<Matrix> weights;

  std::size_t n_layers() const { return weights.size(); }
  std::size_t input_dim() const { return static_cast<std::size_t>(weights.front().rows()); }
  std::size_t output_dim() const { return static_cast<std::size_t>(weights.back().cols()); }

  void validate() const {
    require(!weights.empty(), "model needs at least one layer");
    for (std::size_t l = 1; l < weights.size(); ++l)
      require(weights[l - 1].cols() == weights[l].rows(), "adjacent layer dims must match");
    for (const auto& w : weights) require(w.allFinite(), "model weights must be finite");
  }

  // Glorot-uniform initialization over the dimension chain dims[0] -> ... -> dims[M].
  static GcnModel glorot(const std::vector<std::size_t>& dims, Rng& rng) {
    require(dims.size() >= 2, "model needs input and output dims");
    GcnModel m;
    for (std::size_t l = 0; l + 1 < dims.size(); ++l) {
      const double a = std::sqrt(6.0 / static_cast<double>(dims[l] + dims[l + 1]));
      Matrix w(static_cast<Eigen::Index>(dims[l]), static_cast<Eigen::Index>(dims[l + 1]));
      for (Eigen::Index i = 0; i < w.rows(); ++i)
        for (Eigen::Index j = 0; j < w.cols(); ++j) w(i, j) = a * (2.0 * uniform01(rng) - 1.0);
      m.weights.push_back(std::move(w));
    }
    return m;
  }
};

// Layer widths: input, n_layers-1 hidden layers of `hidden`, then classes.
inline std::vector<std::size_t> layer_dims(std::size_t input, std::size_t hidden,
                                           std::size_t classes, std::size_t n_layers) {
  require(n_layers >= 1, "need at least one layer");
  std::vector<std::size_t> d{input};
  for (std::size_t l = 0; l + 1 < n_layers; ++l) d.push_back(hidden);
  d.push_back(classes);
  return d;
}

// ---------------------------------------------------------------------------
// Sample plans

struct PlanLayer {
  SparseRows block;  // |nodes[l+1]| x |nodes[l]|, entries w_ij / p_j
  ProbDist dist;     // distribution nodes[l] was drawn from
  std::size_t remote_sampled = 0;
};

// nodes[0] is the input layer, nodes[M] the output batch; layers[l] maps
// embeddings on nodes[l] to nodes[l+1].
struct SamplePlan {
  std::vector<NodeSet> nodes;
  std::vector<PlanLayer> layers;
  std::size_t empty_rows = 0;  // output rows of some block with no sampled neighbor

  std::size_t n_layers() const { return layers.size(); }
  const NodeSet& batch() const { return nodes.back(); }

  std::size_t remote_total() const {
    std::size_t t = 0;
    for (const auto& l : layers) t += l.remote_sampled;
    return t;
  }
};

namespace detail {

inline SampleDraw draw_or_take_all(const ProbDist& dist, std::size_t budget, Rng& rng) {
  if (budget >= dist.size()) return take_all(dist);
  return draw_sample(dist, budget, rng);
}

// Rows `upper`, columns `draw.sampled`, entries w_ij / p_j.
inline SparseRows reweighted_block(const WeightedGraph& g, const NodeSet& upper,
                                   const SampleDraw& draw, std::size_t& empty_rows) {
  std::vector<Eigen::Triplet<double>> t;
  for (std::size_t r = 0; r < upper.size(); ++r) {
    auto row = g.row(upper[r]);
    auto w = g.row_weights(upper[r]);
    bool any = false;
    for (std::size_t e = 0; e < row.size(); ++e) {
      const std::size_t k = draw.sampled.index_of(row[e]);
      if (k == draw.sampled.size()) continue;
      t.emplace_back(static_cast<int>(r), static_cast<int>(k), w[e] / draw.sampled_p[k]);
      any = true;
    }
    if (!any) ++empty_rows;
  }
  SparseRows block(static_cast<Eigen::Index>(upper.size()),
                   static_cast<Eigen::Index>(draw.sampled.size()));
  block.setFromTriplets(t.begin(), t.end());
  return block;
}

}  // namespace detail

// Layer-wise plan: starting from the batch, each lower layer is drawn from the
// neighbors of the layer above (local subset in local mode).
inline SamplePlan ladies_plan(const WeightedGraph& g, const Partition& part, WorkerId worker,
                              const NodeSet& batch, const SamplerConfig& cfg,
                              std::size_t n_layers, Rng& rng) {
  require(!batch.empty(), "batch must be nonempty");
  require(n_layers >= 1, "plan needs at least one layer");
  cfg.validate();
  SamplePlan plan;
  plan.nodes.resize(n_layers + 1);
  plan.layers.resize(n_layers);
  plan.nodes[n_layers] = batch;
  for (std::size_t l = n_layers; l-- > 0;) {
    const NodeSet& upper = plan.nodes[l + 1];
    const NodeSet cand = neighbor_union(g, upper);
    PlanLayer& layer = plan.layers[l];
    layer.dist = build_distribution(g, upper, cand, part, worker, cfg);
    if (layer.dist.size() == 0) {
      // No admissible candidate at all: every row of this block is empty.
      plan.empty_rows += upper.size();
      layer.block = SparseRows(static_cast<Eigen::Index>(upper.size()), 0);
      continue;
    }
    const SampleDraw draw = detail::draw_or_take_all(layer.dist, cfg.budget, rng);
    layer.remote_sampled = draw.n_remote(layer.dist);
    layer.block = detail::reweighted_block(g, upper, draw, plan.empty_rows);
    plan.nodes[l] = draw.sampled;
  }
  return plan;
}

// Subgraph plan: one node set drawn from the training nodes with weights
// sum_{i in train} w_ij^2 (precomputed in `train_norms`, aligned with
// `train_nodes`); every layer convolves over the induced subgraph.
inline SamplePlan saint_plan(const WeightedGraph& g, const Partition& part, WorkerId worker,
                             const NodeSet& train_nodes, std::span<const double> train_norms,
                             std::size_t subgraph_size, const SamplerConfig& cfg,
                             std::size_t n_layers, Rng& rng) {
  require(!train_nodes.empty(), "training node set must be nonempty");
  require(train_norms.size() == train_nodes.size(), "norms must align with training nodes");
  require(n_layers >= 1, "plan needs at least one layer");
  if (subgraph_size > train_nodes.size()) {
    std::cerr << "warning: subgraph size " << subgraph_size << " exceeds " << train_nodes.size()
              << " training nodes; clamping\n";
    subgraph_size = train_nodes.size();
  }
  require(subgraph_size >= 1, "subgraph size must be >= 1");

  NodeSet cand = train_nodes;
  std::vector<double> norms(train_norms.begin(), train_norms.end());
  if (cfg.mode == SamplingMode::local) {
    std::vector<NodeId> ids;
    std::vector<double> kept;
    for (std::size_t k = 0; k < cand.size(); ++k)
      if (part.is_local(cand[k], worker)) {
        ids.push_back(cand[k]);
        kept.push_back(norms[k]);
      }
    cand = NodeSet::from_sorted(std::move(ids));
    norms = std::move(kept);
  }
  SamplePlan plan;
  plan.nodes.assign(n_layers + 1, NodeSet{});
  plan.layers.resize(n_layers);
  if (cand.empty()) return plan;

  std::vector<bool> local(cand.size());
  std::size_t n_remote = 0;
  for (std::size_t k = 0; k < cand.size(); ++k) {
    local[k] = part.is_local(cand[k], worker);
    n_remote += local[k] ? 0 : 1;
  }
  const std::size_t budget = std::min(subgraph_size, cand.size());
  ProbDist dist;
  if (cfg.mode == SamplingMode::skewed && n_remote > 0) {
    const double s = skew_scale(cfg.skew_constant, cand.size(), budget, n_remote, cfg.clamp_s_min);
    dist = skewed_weights(cand, norms, std::move(local), s);
  } else {
    dist = linear_weights(cand, norms, std::move(local));
  }
  const SampleDraw draw = detail::draw_or_take_all(dist, budget, rng);
  std::size_t empty = 0;
  SparseRows block = detail::reweighted_block(g, draw.sampled, draw, empty);
  for (auto& n : plan.nodes) n = draw.sampled;
  for (std::size_t l = 0; l < n_layers; ++l) {
    plan.layers[l].block = block;
    plan.layers[l].dist = dist;
  }
  // Features of the subgraph are fetched once.
  plan.layers[0].remote_sampled = draw.n_remote(dist);
  return plan;
}

// ---------------------------------------------------------------------------
// Forward / backward

struct ForwardTrace {
  std::vector<Matrix> inputs;      // U_l, rows nodes[l]
  std::vector<Matrix> aggregated;  // A_l U_l, rows nodes[l+1]
  std::vector<Matrix> pre;         // Z_l = A_l U_l W_l
  const Matrix& logits() const { return pre.back(); }
};

inline Matrix relu(const Matrix& z) { return z.cwiseMax(0.0); }

inline ForwardTrace forward_trace(const GcnModel& model, const SamplePlan& plan,
                                  const Matrix& features) {
  require(plan.n_layers() == model.n_layers(), "plan depth must match model depth");
  require(static_cast<std::size_t>(features.cols()) == model.input_dim(),
          "feature dim does not match model input");
  const std::size_t m = model.n_layers();
  ForwardTrace tr;
  tr.inputs.resize(m);
  tr.aggregated.resize(m);
  tr.pre.resize(m);
  tr.inputs[0] = gather_rows(features, plan.nodes[0]);
  for (std::size_t l = 0; l < m; ++l) {
    if (l > 0) tr.inputs[l] = relu(tr.pre[l - 1]);
    const auto& block = plan.layers[l].block;
    require(block.cols() == tr.inputs[l].rows(), "plan block does not match layer input");
    tr.aggregated[l] = block * tr.inputs[l];
    tr.pre[l] = tr.aggregated[l] * model.weights[l];
  }
  return tr;
}

inline Matrix forward(const GcnModel& model, const SamplePlan& plan, const Matrix& features) {
  return forward_trace(model, plan, features).logits();
}

struct LossGrad {
  double loss = 0.0;
  std::vector<Matrix> grads;
  std::size_t n_labeled = 0;
  std::size_t n_correct = 0;
};

// Mean softmax cross-entropy over labeled rows. `grad` receives dLoss/dlogits.
inline double softmax_cross_entropy(const Matrix& logits, std::span<const int> labels,
                                    Matrix* grad, std::size_t* n_labeled = nullptr,
                                    std::size_t* n_correct = nullptr) {
  require(static_cast<std::size_t>(logits.rows()) == labels.size(), "labels must align with logits");
  std::size_t cnt = 0, correct = 0;
  for (int l : labels) cnt += l >= 0 ? 1 : 0;
  if (cnt == 0) throw ContractError("batch has no labeled nodes");
  if (grad) *grad = Matrix::Zero(logits.rows(), logits.cols());
  double loss = 0.0;
  const double inv = 1.0 / static_cast<double>(cnt);
  for (Eigen::Index i = 0; i < logits.rows(); ++i) {
    const int y = labels[static_cast<std::size_t>(i)];
    if (y < 0) continue;
    require(y < logits.cols(), "label exceeds class count");
    Eigen::Index arg = 0;
    const double mx = logits.row(i).maxCoeff(&arg);
    if (arg == y) ++correct;
    const Eigen::RowVectorXd e = (logits.row(i).array() - mx).exp().matrix();
    const double z = e.sum();
    // log(z) = log1p(sum of the non-max terms); exact near z = 1.
    double rest = 0.0;
    for (Eigen::Index k = 0; k < e.size(); ++k)
      if (k != arg) rest += e(k);
    loss += std::log1p(rest) - (logits(i, y) - mx);
    if (grad) {
      grad->row(i) = e / z * inv;
      (*grad)(i, y) -= inv;
    }
  }
  if (n_labeled) *n_labeled = cnt;
  if (n_correct) *n_correct = correct;
  return loss * inv;
}

inline LossGrad loss_and_backward(const GcnModel& model, const SamplePlan& plan,
                                  const Matrix& features, std::span<const int> labels) {
  const ForwardTrace tr = forward_trace(model, plan, features);
  const NodeSet& batch = plan.batch();
  std::vector<int> y(batch.size());
  for (std::size_t k = 0; k < batch.size(); ++k) y[k] = labels[batch[k]];
  LossGrad out;
  Matrix dz;
  out.loss = softmax_cross_entropy(tr.logits(), y, &dz, &out.n_labeled, &out.n_correct);
  const std::size_t m = model.n_layers();
  out.grads.resize(m);
  for (std::size_t l = m; l-- > 0;) {
    out.grads[l] = tr.aggregated[l].transpose() * dz;
    if (l == 0) break;
    Matrix du = plan.layers[l].block.transpose() * (dz * model.weights[l].transpose());
    dz = du.cwiseProduct((tr.pre[l - 1].array() > 0.0).cast<double>().matrix());
  }
  return out;
}

// ---------------------------------------------------------------------------
// Full-graph inference

inline Matrix full_logits(const GcnModel& model, const SparseRows& p, const Matrix& features) {
  Matrix h = features;
  for (std::size_t l = 0; l < model.n_layers(); ++l) {
    if (l > 0) h = relu(h);
    h = (p * h) * model.weights[l];
  }
  return h;
}

inline std::vector<int> predict_classes(const Matrix& logits) {
  std::vector<int> out(static_cast<std::size_t>(logits.rows()));
  for (Eigen::Index i = 0; i < logits.rows(); ++i) {
    Eigen::Index arg = 0;
    logits.row(i).maxCoeff(&arg);
    out[static_cast<std::size_t>(i)] = static_cast<int>(arg);
  }
  return out;
}

struct EvalResult {
  double accuracy = 0.0;
  double micro_f1 = 0.0;  // equals accuracy for single-label multi-class
};

inline EvalResult score_predictions(std::span<const int> predicted, std::span<const int> labels,
                                    const NodeSet& nodes) {
  require(!nodes.empty(), "evaluation node set is empty");
  std::size_t tp = 0, total = 0;
  for (NodeId v : nodes) {
    require(labels[v] >= 0, "evaluation node without label");
    ++total;
    if (predicted[v] == labels[v]) ++tp;
  }
  // Micro-averaged over classes, every node contributes exactly one
  // prediction, so false positives equal false negatives.
  const double acc = static_cast<double>(tp) / static_cast<double>(total);
  return {acc, acc};
}

inline EvalResult evaluate(const GcnModel& model, const WeightedGraph& g, const NodeSet& nodes) {
  require(!nodes.empty(), "evaluation node set is empty");
  require(g.has_features() && g.has_labels(), "evaluation needs features and labels");
  const auto pred = predict_classes(full_logits(model, adjacency_matrix(g), g.features));
  return score_predictions(pred, g.labels, nodes);
}

// ---------------------------------------------------------------------------
// Distributed training

enum class PlanKind { ladies, saint };
enum class OptimizerKind { sgd, adam };

inline const char* to_string(PlanKind k) { return k == PlanKind::ladies ? "ladies" : "saint"; }
inline const char* to_string(OptimizerKind k) { return k == OptimizerKind::sgd ? "sgd" : "adam"; }

struct TrainConfig {
  PlanKind plan = PlanKind::ladies;
  SamplerConfig sampler;
  std::size_t subgraph_size = 256;
  std::size_t epochs = 10;
  std::size_t batch_size = 32;
  double lr = 0.1;
  OptimizerKind optimizer = OptimizerKind::sgd;
  bool parallel_workers = false;
};

// Remote feature vectors fetched, indexed by (epoch, worker, layer).
class CommLedger {
 public:
  CommLedger() = default;
  CommLedger(std::size_t epochs, std::size_t workers, std::size_t layers)
      : epochs_(epochs), workers_(workers), layers_(layers), counts_(epochs * workers * layers, 0) {}

  void add(std::size_t e, std::size_t w, std::size_t l, std::size_t n) { counts_[idx(e, w, l)] += n; }
  std::size_t at(std::size_t e, std::size_t w, std::size_t l) const { return counts_[idx(e, w, l)]; }

  std::size_t epoch_worker_total(std::size_t e, std::size_t w) const {
    std::size_t t = 0;
    for (std::size_t l = 0; l < layers_; ++l) t += at(e, w, l);
    return t;
  }
  std::size_t total() const { return std::accumulate(counts_.begin(), counts_.end(), std::size_t{0}); }

  std::size_t epochs() const { return epochs_; }
  std::size_t workers() const { return workers_; }
  std::size_t layers() const { return layers_; }

  friend bool operator==(const CommLedger&, const CommLedger&) = default;

 private:
  std::size_t idx(std::size_t e, std::size_t w, std::size_t l) const {
    require(e < epochs_ && w < workers_ && l < layers_, "ledger index out of range");
    return (e * workers_ + w) * layers_ + l;
  }
  std::size_t epochs_ = 0, workers_ = 0, layers_ = 0;
  std::vector<std::size_t> counts_;
};

struct EpochRecord {
  std::size_t epoch = 0;
  std::size_t worker = 0;
  double loss = 0.0;
  double train_acc = 0.0;
  double val_acc = 0.0;
  std::size_t comm_nodes = 0;
  friend bool operator==(const EpochRecord&, const EpochRecord&) = default;
};

struct Metrics {
  std::vector<EpochRecord> records;
  std::vector<double> val_acc;   // per epoch, full-graph inference
  std::vector<double> test_acc;  // per epoch, empty when there is no test split
  std::vector<double> mean_loss; // per epoch, over contributing workers
  std::size_t empty_rows = 0;
  std::size_t skipped_workers = 0;

  double best_val() const { return val_acc.empty() ? 0.0 : *std::max_element(val_acc.begin(), val_acc.end()); }
  double final_val() const { return val_acc.empty() ? 0.0 : val_acc.back(); }
  double final_test() const { return test_acc.empty() ? 0.0 : test_acc.back(); }
  double best_test() const { return test_acc.empty() ? 0.0 : *std::max_element(test_acc.begin(), test_acc.end()); }
  // Test accuracy at the epoch with the best validation accuracy.
  double test_at_best_val() const {
    if (test_acc.empty()) return 0.0;
    auto it = std::max_element(val_acc.begin(), val_acc.end());
    return test_acc[static_cast<std::size_t>(it - val_acc.begin())];
  }

  friend bool operator==(const Metrics&, const Metrics&) = default;
};

struct TrainResult {
  GcnModel model;
  Metrics metrics;
  CommLedger ledger;
};

namespace detail {

// Uniform sample of k elements without replacement (partial Fisher-Yates).
inline NodeSet sample_batch(const NodeSet& pool, std::size_t k, Rng& rng) {
  std::vector<NodeId> v = pool.vec();
  k = std::min(k, v.size());
  for (std::size_t i = 0; i < k; ++i)
    std::swap(v[i], v[i + uniform_index(rng, v.size() - i)]);
  v.resize(k);
  return NodeSet::from_unsorted(std::move(v));
}

class Optimizer {
 public:
  Optimizer(OptimizerKind kind, double lr, const GcnModel& model) : kind_(kind), lr_(lr) {
    if (kind_ == OptimizerKind::adam)
      for (const auto& w : model.weights) {
        m_.push_back(Matrix::Zero(w.rows(), w.cols()));
        v_.push_back(Matrix::Zero(w.rows(), w.cols()));
      }
  }

  void step(GcnModel& model, const std::vector<Matrix>& grads) {
    if (kind_ == OptimizerKind::sgd) {
      for (std::size_t l = 0; l < grads.size(); ++l) model.weights[l] -= lr_ * grads[l];
      return;
    }
    constexpr double b1 = 0.9, b2 = 0.999, eps = 1e-8;
    ++t_;
    const double c1 = 1.0 - std::pow(b1, static_cast<double>(t_));
    const double c2 = 1.0 - std::pow(b2, static_cast<double>(t_));
    for (std::size_t l = 0; l < grads.size(); ++l) {
      m_[l] = b1 * m_[l] + (1.0 - b1) * grads[l];
      v_[l] = b2 * v_[l] + (1.0 - b2) * grads[l].cwiseProduct(grads[l]);
      model.weights[l].array() -=
          lr_ * (m_[l].array() / c1) / ((v_[l].array() / c2).sqrt() + eps);
    }
  }

 private:
  OptimizerKind kind_;
  double lr_;
  std::size_t t_ = 0;
  std::vector<Matrix> m_, v_;
};

struct WorkerStep {
  bool active = false;
  double loss = 0.0;
  std::vector<Matrix> grads;
  std::vector<std::size_t> remote_per_layer;
  std::size_t empty_rows = 0;
};

}  // namespace detail

// Simulated K-worker synchronous training. Every iteration each worker draws a
// batch from its own training nodes, builds a plan, and computes gradients;
// the gradients are averaged in worker order and applied once. All randomness
// derives from `seed` via derive_seed(seed, "plan", epoch, iter, worker).
inline TrainResult train_distributed(const WeightedGraph& g, const Partition& part,
                                     GcnModel model, const TrainConfig& cfg, std::uint64_t seed) {
  require(g.normalized, "training requires a normalized graph");
  require(g.has_features() && g.has_labels() && g.has_splits(),
          "training requires features, labels and masks");
  require(part.owner.size() == g.n_nodes, "partition does not cover the graph");
  require(cfg.batch_size >= 1 && cfg.epochs >= 1, "batch size and epochs must be >= 1");
  model.validate();
  cfg.sampler.validate();

  const std::size_t k = part.n_workers;
  const std::size_t m = model.n_layers();
  const NodeSet train = g.nodes_in(Split::train);
  const NodeSet val = g.nodes_in(Split::val);
  const NodeSet test = g.nodes_in(Split::test);
  require(!train.empty(), "training mask is empty");

  std::vector<NodeSet> local_train(k);
  std::size_t iters = 0;
  for (WorkerId w = 0; w < k; ++w) {
    local_train[w] = part.owned_by(w, train);
    iters = std::max(iters, (local_train[w].size() + cfg.batch_size - 1) / cfg.batch_size);
  }
  std::vector<double> train_norms;
  if (cfg.plan == PlanKind::saint) train_norms = column_norms(g, train, train);

  TrainResult res;
  res.ledger = CommLedger(cfg.epochs, k, m);
  detail::Optimizer opt(cfg.optimizer, cfg.lr, model);
  const SparseRows p = adjacency_matrix(g);
  for (WorkerId w = 0; w < k; ++w)
    if (local_train[w].empty()) {
      std::cerr << "warning: worker " << w << " owns no training nodes; skipping it\n";
      ++res.metrics.skipped_workers;
    }

  auto worker_step = [&](std::size_t epoch, std::size_t it, WorkerId w) {
    detail::WorkerStep st;
    if (local_train[w].empty()) return st;
    Rng rng = make_rng(seed, "plan", epoch, it, w);
    SamplePlan plan;
    if (cfg.plan == PlanKind::ladies) {
      const NodeSet batch = detail::sample_batch(local_train[w], cfg.batch_size, rng);
      plan = ladies_plan(g, part, w, batch, cfg.sampler, m, rng);
    } else {
      plan = saint_plan(g, part, w, train, train_norms, cfg.subgraph_size, cfg.sampler, m, rng);
      if (plan.batch().empty()) return st;
    }
    st.remote_per_layer.resize(m);
    for (std::size_t l = 0; l < m; ++l) st.remote_per_layer[l] = plan.layers[l].remote_sampled;
    st.empty_rows = plan.empty_rows;
    LossGrad lg = loss_and_backward(model, plan, g.features, g.labels);
    st.active = true;
    st.loss = lg.loss;
    st.grads = std::move(lg.grads);
    return st;
  };

  for (std::size_t epoch = 0; epoch < cfg.epochs; ++epoch) {
    std::vector<double> loss_sum(k, 0.0);
    std::vector<std::size_t> loss_cnt(k, 0);
    for (std::size_t it = 0; it < iters; ++it) {
      std::vector<detail::WorkerStep> steps(k);
      if (cfg.parallel_workers && k > 1) {
        std::vector<std::future<detail::WorkerStep>> fut;
        for (WorkerId w = 0; w < k; ++w)
          fut.push_back(std::async(std::launch::async, worker_step, epoch, it, w));
        for (WorkerId w = 0; w < k; ++w) steps[w] = fut[w].get();
      } else {
        for (WorkerId w = 0; w < k; ++w) steps[w] = worker_step(epoch, it, w);
      }
      // Fixed-order reduction over contributing workers.
      std::vector<Matrix> avg;
      std::size_t active = 0;
      for (WorkerId w = 0; w < k; ++w) {
        auto& st = steps[w];
        if (!st.active) continue;
        if (avg.empty()) avg = st.grads;
        else
          for (std::size_t l = 0; l < m; ++l) avg[l] += st.grads[l];
        ++active;
        loss_sum[w] += st.loss;
        ++loss_cnt[w];
        res.metrics.empty_rows += st.empty_rows;
        for (std::size_t l = 0; l < m; ++l) res.ledger.add(epoch, w, l, st.remote_per_layer[l]);
      }
      if (active == 0) continue;
      for (auto& a : avg) a /= static_cast<double>(active);
      opt.step(model, avg);
    }

    const auto pred = predict_classes(full_logits(model, p, g.features));
    const double val_acc = val.empty() ? 0.0 : score_predictions(pred, g.labels, val).accuracy;
    res.metrics.val_acc.push_back(val_acc);
    if (!test.empty()) res.metrics.test_acc.push_back(score_predictions(pred, g.labels, test).accuracy);
    double loss_all = 0.0;
    std::size_t contributing = 0;
    for (WorkerId w = 0; w < k; ++w) {
      EpochRecord r;
      r.epoch = epoch;
      r.worker = w;
      r.loss = loss_cnt[w] ? loss_sum[w] / static_cast<double>(loss_cnt[w]) : 0.0;
      r.train_acc = local_train[w].empty() ? 0.0 : score_predictions(pred, g.labels, local_train[w]).accuracy;
      r.val_acc = val_acc;
      r.comm_nodes = res.ledger.epoch_worker_total(epoch, w);
      if (loss_cnt[w]) {
        loss_all += r.loss;
        ++contributing;
      }
      res.metrics.records.push_back(r);
    }
    res.metrics.mean_loss.push_back(contributing ? loss_all / static_cast<double>(contributing) : 0.0);
  }
  res.model = std::move(model);
  return res;
}

}  // namespace skewgcn
