// Command-line driver: run experiments, synthesize SBM datasets, import
// LINQS citation data, inspect graph directories.

#include <algorithm>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "skewgcn/skewgcn.hpp"

namespace {

std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ','))
    if (!item.empty()) out.push_back(item);
  return out;
}

int cmd_run(const std::string& config_path, const std::optional<std::uint64_t>& seed,
            const std::optional<std::string>& out, const std::optional<std::string>& modes,
            const std::optional<std::string>& d_values) {
  using namespace skewgcn;
  ExperimentConfig cfg = load_config(config_path);
  if (seed) cfg.seed = *seed;
  if (out) cfg.output_dir = *out;
  if (modes) {
    cfg.modes.clear();
    for (const auto& m : split_list(*modes)) cfg.modes.push_back(parse_sampling_mode(m));
  }
  if (d_values) {
    cfg.d_values.clear();
    for (const auto& d : split_list(*d_values)) cfg.d_values.push_back(std::stod(d));
  }
  cfg.validate();
  const auto res = run_experiment(cfg);
  std::cout << "wrote " << res.cells.size() << " cell(s) to " << cfg.output_dir << "\n";
  for (const auto& c : res.cells)
    std::cout << "  " << c.cell.tag() << ": best_val=" << c.result.metrics.best_val()
              << " test@best=" << c.result.metrics.test_at_best_val()
              << " comm=" << c.result.ledger.total() << "\n";
  for (const auto& r : res.comparison["reductions"])
    std::cout << "  reduction skewed_" << r["d"].get<double>() << ": " << r["reduction_factor"].dump()
              << "x\n";
  return 0;
}

int cmd_synth(const std::string& spec_path, const std::string& out_dir) {
  using namespace skewgcn;
  auto in = csv::open_in(spec_path);
  const SbmSpec spec = sbm_from_json(json::parse(in));
  const WeightedGraph g = synth_sbm(spec);
  write_graph_dir(g, out_dir);
  std::cout << "wrote SBM graph with " << g.n_nodes << " nodes and " << g.nnz() / 2
            << " edges to " << out_dir << "\n";
  return 0;
}

int cmd_import(const std::string& content, const std::string& cites, const std::string& out_dir,
               std::uint64_t seed, const skewgcn::LinqsSplit& split) {
  using namespace skewgcn;
  const WeightedGraph g = import_linqs(content, cites, seed, split);
  write_graph_dir(g, out_dir);
  std::cout << "wrote " << g.n_nodes << " papers, " << g.nnz() / 2 << " citation edges and "
            << g.n_classes() << " classes to " << out_dir << "\n";
  return 0;
}

int cmd_inspect(const std::string& dir) {
  using namespace skewgcn;
  const WeightedGraph raw = load_graph_dir(dir);
  const WeightedGraph g = normalize_weights(raw);
  std::size_t max_deg = 0, isolated = 0;
  for (NodeId v = 0; v < raw.n_nodes; ++v) {
    max_deg = std::max(max_deg, raw.degree(v));
    isolated += raw.degree(v) == 0 ? 1 : 0;
  }
  std::cout << "nodes:        " << raw.n_nodes << "\n"
            << "edges:        " << raw.nnz() / 2 << "\n"
            << "mean degree:  " << (raw.n_nodes ? static_cast<double>(raw.nnz()) / raw.n_nodes : 0.0)
            << "\n"
            << "max degree:   " << max_deg << "\n"
            << "isolated:     " << isolated << "\n"
            << "feature dim:  " << raw.feature_dim() << "\n";
  if (raw.has_labels()) std::cout << "classes:      " << raw.n_classes() << "\n";
  if (raw.has_splits())
    std::cout << "train/val/test: " << g.nodes_in(Split::train).size() << "/"
              << g.nodes_in(Split::val).size() << "/" << g.nodes_in(Split::test).size() << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Skewed linear weighted neighbor sampling for distributed GCN training"};
  app.require_subcommand(1);

  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> out, modes, d_values;
  auto* run = app.add_subcommand("run", "Run an experiment grid from a JSON config");
  run->add_option("config", config_path, "Experiment config (JSON)")->required();
  run->add_option("--seed", seed, "Override the master seed");
  run->add_option("--out", out, "Override the output directory");
  run->add_option("--modes", modes, "Comma-separated modes: full,local,skewed");
  run->add_option("--d-values", d_values, "Comma-separated skew constants D");

  std::string spec_path, synth_out;
  auto* synth = app.add_subcommand("synth", "Generate a stochastic block model graph directory");
  synth->add_option("spec", spec_path, "SBM spec (JSON)")->required();
  synth->add_option("-o,--out", synth_out, "Output graph directory")->required();

  std::string content_path, cites_path, import_out;
  std::uint64_t import_seed = 0;
  skewgcn::LinqsSplit split;
  auto* import = app.add_subcommand("import-linqs", "Convert LINQS .content/.cites files (Cora, CiteSeer)");
  import->add_option("content", content_path, "Paper features and classes (.content)")->required();
  import->add_option("cites", cites_path, "Citation pairs (.cites)")->required();
  import->add_option("-o,--out", import_out, "Output graph directory")->required();
  import->add_option("--seed", import_seed, "Seed of the train/val/test split");
  import->add_option("--train-per-class", split.train_per_class, "Training nodes per class");
  import->add_option("--val", split.n_val, "Validation nodes");
  import->add_option("--test", split.n_test, "Test nodes");

  std::string graph_dir;
  auto* inspect = app.add_subcommand("inspect", "Print statistics of a graph directory");
  inspect->add_option("graph-dir", graph_dir, "Graph directory")->required();

  CLI11_PARSE(app, argc, argv);
  try {
    if (*run) return cmd_run(config_path, seed, out, modes, d_values);
    if (*synth) return cmd_synth(spec_path, synth_out);
    if (*import) return cmd_import(content_path, cites_path, import_out, import_seed, split);
    if (*inspect) return cmd_inspect(graph_dir);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
