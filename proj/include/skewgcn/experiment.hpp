#pragma once

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "skewgcn/dataset.hpp"
#include "skewgcn/graph.hpp"
#include "skewgcn/partition.hpp"
#include "skewgcn/sampling.hpp"
#include "skewgcn/sbm.hpp"
#include "skewgcn/training.hpp"

namespace skewgcn {

using json = nlohmann::ordered_json;

class ConfigError : public Error {
 public:
  using Error::Error;
};

struct DatasetSpec {
  std::optional<std::string> path;
  std::optional<SbmSpec> sbm;
  friend bool operator==(const DatasetSpec&, const DatasetSpec&) = default;
};

struct ExperimentConfig {
  DatasetSpec dataset{std::nullopt, SbmSpec{}};
  std::size_t k_workers = 4;
  PartitionStrategy partition = PartitionStrategy::contiguous;
  std::uint64_t partition_seed = 0;
  std::optional<std::string> partition_file;
  PlanKind sampler = PlanKind::ladies;
  std::size_t budget = 64;
  std::size_t subgraph_size = 256;
  std::vector<SamplingMode> modes{SamplingMode::full, SamplingMode::local, SamplingMode::skewed};
  std::vector<double> d_values{4.0};
  double clamp_s_min = 1.0;
  std::size_t n_layers = 3;
  std::size_t hidden = 32;
  std::size_t epochs = 40;
  std::size_t batch_size = 32;
  double lr = 0.1;
  OptimizerKind optimizer = OptimizerKind::sgd;
  bool parallel_workers = false;
  std::uint64_t seed = 0;
  std::string output_dir = "out";

  void validate() const {
    auto need = [](bool c, const std::string& m) {
      if (!c) throw ConfigError(m);
    };
    need(dataset.path.has_value() != dataset.sbm.has_value(),
         "dataset: exactly one of 'path' or 'sbm' is required");
    if (dataset.sbm) dataset.sbm->validate();
    need(k_workers >= 1, "k_workers must be >= 1");
    need(budget >= 1, "budget must be >= 1");
    need(subgraph_size >= 1, "subgraph_size must be >= 1");
    need(!modes.empty(), "modes must be nonempty");
    for (double d : d_values) need(d > 0.0, "d_values must be > 0");
    bool has_skewed = false;
    for (auto m : modes) has_skewed |= m == SamplingMode::skewed;
    need(!has_skewed || !d_values.empty(), "skewed mode needs at least one D value");
    need(n_layers >= 1 && hidden >= 1 && epochs >= 1 && batch_size >= 1,
         "n_layers, hidden, epochs and batch_size must be >= 1");
    need(lr >= 0.0, "lr must be >= 0");
    need(partition != PartitionStrategy::explicit_file || partition_file.has_value(),
         "partition.file is required for the explicit strategy");
  }

  friend bool operator==(const ExperimentConfig&, const ExperimentConfig&) = default;
};

// ---------------------------------------------------------------------------
// JSON mapping. Unknown keys are rejected with their name.

namespace detail {

inline void reject_unknown(const json& j, std::initializer_list<const char*> allowed,
                           const std::string& where) {
  if (!j.is_object()) throw ConfigError(where + ": expected an object");
  for (auto it = j.begin(); it != j.end(); ++it) {
    bool ok = false;
    for (const char* a : allowed) ok |= it.key() == a;
    if (!ok) throw ConfigError("unknown config key '" + where + it.key() + "'");
  }
}

template <typename T>
void read_key(const json& j, const char* key, T& out, const std::string& where) {
  if (!j.contains(key)) return;
  try {
    out = j.at(key).get<T>();
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError("config key '" + where + key + "': " + e.what());
  }
}

}  // namespace detail

inline json to_json(const SbmSpec& s) {
  return json{{"n_nodes", s.n_nodes}, {"n_blocks", s.n_blocks}, {"p_in", s.p_in},
              {"p_out", s.p_out},     {"feature_dim", s.feature_dim},
              {"noise", s.noise},     {"seed", s.seed}};
}

inline SbmSpec sbm_from_json(const json& j, const std::string& where = "") {
  detail::reject_unknown(j, {"n_nodes", "n_blocks", "p_in", "p_out", "feature_dim", "noise", "seed"},
                         where);
  SbmSpec s;
  detail::read_key(j, "n_nodes", s.n_nodes, where);
  detail::read_key(j, "n_blocks", s.n_blocks, where);
  detail::read_key(j, "p_in", s.p_in, where);
  detail::read_key(j, "p_out", s.p_out, where);
  detail::read_key(j, "feature_dim", s.feature_dim, where);
  detail::read_key(j, "noise", s.noise, where);
  detail::read_key(j, "seed", s.seed, where);
  return s;
}

inline json to_json(const ExperimentConfig& c) {
  json ds = json::object();
  if (c.dataset.path) ds["path"] = *c.dataset.path;
  if (c.dataset.sbm) ds["sbm"] = to_json(*c.dataset.sbm);
  json part{{"strategy", to_string(c.partition)}, {"seed", c.partition_seed}};
  if (c.partition_file) part["file"] = *c.partition_file;
  json modes = json::array();
  for (auto m : c.modes) modes.push_back(to_string(m));
  return json{{"dataset", ds},
              {"k_workers", c.k_workers},
              {"partition", part},
              {"sampler", to_string(c.sampler)},
              {"budget", c.budget},
              {"subgraph_size", c.subgraph_size},
              {"modes", modes},
              {"d_values", c.d_values},
              {"clamp_s_min", c.clamp_s_min},
              {"n_layers", c.n_layers},
              {"hidden", c.hidden},
              {"epochs", c.epochs},
              {"batch_size", c.batch_size},
              {"lr", c.lr},
              {"optimizer", to_string(c.optimizer)},
              {"parallel_workers", c.parallel_workers},
              {"seed", c.seed},
              {"output_dir", c.output_dir}};
}

namespace detail {

inline ExperimentConfig parse_config_object(const json& j) {
  detail::reject_unknown(j,
                         {"dataset", "k_workers", "partition", "sampler", "budget", "subgraph_size",
                          "modes", "d_values", "clamp_s_min", "n_layers", "hidden", "epochs",
                          "batch_size", "lr", "optimizer", "parallel_workers", "seed", "output_dir"},
                         "");
  ExperimentConfig c;
  if (j.contains("dataset")) {
    const json& d = j.at("dataset");
    detail::reject_unknown(d, {"path", "sbm"}, "dataset.");
    c.dataset = DatasetSpec{};
    if (d.contains("path")) {
      std::string path;
      detail::read_key(d, "path", path, "dataset.");
      c.dataset.path = path;
    }
    if (d.contains("sbm")) c.dataset.sbm = sbm_from_json(d.at("sbm"), "dataset.sbm.");
  }
  detail::read_key(j, "k_workers", c.k_workers, "");
  if (j.contains("partition")) {
    const json& p = j.at("partition");
    detail::reject_unknown(p, {"strategy", "seed", "file"}, "partition.");
    std::string strat = to_string(c.partition);
    detail::read_key(p, "strategy", strat, "partition.");
    try {
      c.partition = parse_partition_strategy(strat);
    } catch (const Error& e) {
      throw ConfigError(std::string("config key 'partition.strategy': ") + e.what());
    }
    detail::read_key(p, "seed", c.partition_seed, "partition.");
    if (p.contains("file")) {
      std::string file;
      detail::read_key(p, "file", file, "partition.");
      c.partition_file = file;
    }
  }
  if (j.contains("sampler")) {
    const auto s = j.at("sampler").get<std::string>();
    if (s == "ladies") c.sampler = PlanKind::ladies;
    else if (s == "saint") c.sampler = PlanKind::saint;
    else throw ConfigError("config key 'sampler': unknown sampler '" + s + "'");
  }
  detail::read_key(j, "budget", c.budget, "");
  detail::read_key(j, "subgraph_size", c.subgraph_size, "");
  if (j.contains("modes")) {
    c.modes.clear();
    for (const auto& m : j.at("modes")) {
      try {
        c.modes.push_back(parse_sampling_mode(m.get<std::string>()));
      } catch (const Error& e) {
        throw ConfigError(std::string("config key 'modes': ") + e.what());
      }
    }
  }
  detail::read_key(j, "d_values", c.d_values, "");
  detail::read_key(j, "clamp_s_min", c.clamp_s_min, "");
  detail::read_key(j, "n_layers", c.n_layers, "");
  detail::read_key(j, "hidden", c.hidden, "");
  detail::read_key(j, "epochs", c.epochs, "");
  detail::read_key(j, "batch_size", c.batch_size, "");
  detail::read_key(j, "lr", c.lr, "");
  if (j.contains("optimizer")) {
    const auto s = j.at("optimizer").get<std::string>();
    if (s == "sgd") c.optimizer = OptimizerKind::sgd;
    else if (s == "adam") c.optimizer = OptimizerKind::adam;
    else throw ConfigError("config key 'optimizer': unknown optimizer '" + s + "'");
  }
  detail::read_key(j, "parallel_workers", c.parallel_workers, "");
  detail::read_key(j, "seed", c.seed, "");
  detail::read_key(j, "output_dir", c.output_dir, "");
  c.validate();
  return c;
}

}  // namespace detail

inline ExperimentConfig config_from_json(const json& j) {
  try {
    return detail::parse_config_object(j);
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("invalid config value: ") + e.what());
  }
}

inline ExperimentConfig load_config(const std::string& path) {
  auto in = csv::open_in(path);
  json j;
  try {
    j = json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw ConfigError("cannot parse config '" + path + "': " + e.what());
  }
  return config_from_json(j);
}

// ---------------------------------------------------------------------------
// Experiment cells and outputs

struct Cell {
  SamplingMode mode;
  double d;  // 0 for full and local

  std::string tag() const {
    std::ostringstream s;
    s << to_string(mode) << '_';
    if (d == std::floor(d) && std::abs(d) < 1e15) s << static_cast<long long>(d);
    else s << d;
    return s.str();
  }
};

inline std::vector<Cell> experiment_cells(const ExperimentConfig& c) {
  std::vector<Cell> cells;
  for (auto m : c.modes) {
    if (m == SamplingMode::skewed)
      for (double d : c.d_values) cells.push_back({m, d});
    else
      cells.push_back({m, 0.0});
  }
  return cells;
}

inline std::string metrics_file_name(const Cell& c) { return "metrics_" + c.tag() + ".csv"; }

inline void write_metrics_csv(const Metrics& m, std::ostream& out) {
  out << "epoch,worker,loss,train_acc,val_acc,comm_nodes_epoch\n";
  out << std::setprecision(12);
  for (const auto& r : m.records)
    out << r.epoch << ',' << r.worker << ',' << r.loss << ',' << r.train_acc << ',' << r.val_acc
        << ',' << r.comm_nodes << '\n';
}

struct CellResult {
  Cell cell;
  TrainResult result;
};

struct ExperimentResult {
  std::vector<CellResult> cells;
  json summary;
  json comparison;
};

inline WeightedGraph load_dataset(const DatasetSpec& ds) {
  if (ds.path) return load_graph_dir(*ds.path);
  return synth_sbm(*ds.sbm);
}

inline json comparison_json(const std::vector<CellResult>& cells) {
  const CellResult* full = nullptr;
  for (const auto& c : cells)
    if (c.cell.mode == SamplingMode::full) full = &c;
  json cmp;
  cmp["baseline"] = nullptr;
  cmp["reductions"] = json::array();
  if (!full) return cmp;
  const auto full_total = full->result.ledger.total();
  cmp["baseline"] = json{{"mode", "full"},
                         {"total_comm", full_total},
                         {"best_val_acc", full->result.metrics.best_val()},
                         {"test_at_best_val", full->result.metrics.test_at_best_val()}};
  for (const auto& c : cells) {
    if (c.cell.mode != SamplingMode::skewed) continue;
    const auto total = c.result.ledger.total();
    json r{{"mode", "skewed"}, {"d", c.cell.d}, {"total_comm", total}};
    if (total > 0) r["reduction_factor"] = static_cast<double>(full_total) / static_cast<double>(total);
    else r["reduction_factor"] = nullptr;
    r["best_val_acc_delta"] = c.result.metrics.best_val() - full->result.metrics.best_val();
    r["test_at_best_val_delta"] =
        c.result.metrics.test_at_best_val() - full->result.metrics.test_at_best_val();
    cmp["reductions"].push_back(r);
  }
  return cmp;
}

// Runs every (mode, D) cell from the same initial model and master seed and
// writes metrics_<mode>_<D>.csv, summary.json and comparison.json into
// cfg.output_dir. Identical configs produce byte-identical files.
inline ExperimentResult run_experiment(const ExperimentConfig& cfg) {
  namespace fs = std::filesystem;
  cfg.validate();
  WeightedGraph g = normalize_weights(load_dataset(cfg.dataset));
  require(g.has_features() && g.has_labels() && g.has_splits(),
          "dataset must provide features, labels and masks");
  const Partition part = partition_nodes(g.n_nodes, cfg.k_workers, cfg.partition,
                                         cfg.partition_seed, cfg.partition_file);
  Rng init_rng = make_rng(cfg.seed, "init");
  const GcnModel init = GcnModel::glorot(
      layer_dims(g.feature_dim(), cfg.hidden, static_cast<std::size_t>(g.n_classes()), cfg.n_layers),
      init_rng);

  const fs::path out_dir(cfg.output_dir);
  fs::create_directories(out_dir);

  ExperimentResult res;
  json cells_json = json::array();
  for (const Cell& cell : experiment_cells(cfg)) {
    TrainConfig tc;
    tc.plan = cfg.sampler;
    tc.sampler.budget = cfg.budget;
    tc.sampler.mode = cell.mode;
    tc.sampler.skew_constant = cell.d;
    tc.sampler.clamp_s_min = cfg.clamp_s_min;
    tc.subgraph_size = cfg.subgraph_size;
    tc.epochs = cfg.epochs;
    tc.batch_size = cfg.batch_size;
    tc.lr = cfg.lr;
    tc.optimizer = cfg.optimizer;
    tc.parallel_workers = cfg.parallel_workers;
    TrainResult tr = train_distributed(g, part, init, tc, cfg.seed);

    const std::string fname = metrics_file_name(cell);
    {
      auto out = csv::open_out((out_dir / fname).string());
      write_metrics_csv(tr.metrics, out);
    }
    json per_epoch = json::array();
    for (std::size_t e = 0; e < tr.ledger.epochs(); ++e) {
      std::size_t t = 0;
      for (std::size_t w = 0; w < tr.ledger.workers(); ++w) t += tr.ledger.epoch_worker_total(e, w);
      per_epoch.push_back(t);
    }
    cells_json.push_back(json{{"mode", to_string(cell.mode)},
                              {"d", cell.d},
                              {"metrics_file", fname},
                              {"final_loss", tr.metrics.mean_loss.back()},
                              {"final_val_acc", tr.metrics.final_val()},
                              {"best_val_acc", tr.metrics.best_val()},
                              {"final_test_acc", tr.metrics.final_test()},
                              {"test_at_best_val", tr.metrics.test_at_best_val()},
                              {"total_comm", tr.ledger.total()},
                              {"comm_per_epoch", per_epoch},
                              {"empty_rows", tr.metrics.empty_rows}});
    res.cells.push_back({cell, std::move(tr)});
  }

  const auto train = g.nodes_in(Split::train), val = g.nodes_in(Split::val),
             test = g.nodes_in(Split::test);
  res.summary = json{{"config", to_json(cfg)},
                     {"dataset",
                      json{{"n_nodes", g.n_nodes},
                           {"n_edges", (g.nnz() - g.n_nodes) / 2},
                           {"feature_dim", g.feature_dim()},
                           {"n_classes", g.n_classes()},
                           {"n_train", train.size()},
                           {"n_val", val.size()},
                           {"n_test", test.size()}}},
                     {"cells", cells_json}};
  res.comparison = comparison_json(res.cells);
  {
    auto out = csv::open_out((out_dir / "summary.json").string());
    out << res.summary.dump(2) << '\n';
  }
  {
    auto out = csv::open_out((out_dir / "comparison.json").string());
    out << res.comparison.dump(2) << '\n';
  }
  return res;
}

}  // namespace skewgcn
