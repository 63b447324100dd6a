// hgane: train, evaluate and sweep the aligned-network attention embedding.

#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>
#include <optional>

#include "hgane/eval.hpp"

namespace fs = std::filesystem;
using namespace hgane;

namespace {

struct DataFlags {
  std::string g1, g2, anchors;
  SyntheticParams synth;
};

struct ConfigFlags {
  RunConfig config;
  std::string mode = "sc+ad";
  std::string roles = "both";
  std::string output_activation = "identity";

  RunConfig resolve() const {
    RunConfig c = config;
    c.model.mode = parse_mode(mode);
    c.train.roles = parse_feature_roles(roles);
    c.model.output_activation = parse_activation(output_activation);
    return c;
  }
};

void add_data_flags(CLI::App* app, DataFlags& d) {
  app->add_option("--g1", d.g1, "edge list of network 1 (TSV)");
  app->add_option("--g2", d.g2, "edge list of network 2 (TSV)");
  app->add_option("--anchors", d.anchors, "anchor links (TSV, g1 node then g2 node)");
  app->add_option("--n1", d.synth.n1, "synthetic: nodes in network 1")->capture_default_str();
  app->add_option("--n2", d.synth.n2, "synthetic: nodes in network 2")->capture_default_str();
  app->add_option("--anchor-frac", d.synth.anchor_frac, "synthetic: aligned fraction")
      ->capture_default_str();
  app->add_option("--divergence", d.synth.divergence, "synthetic: rewiring probability in G2")
      ->capture_default_str();
  app->add_option("--out-degree", d.synth.degree.out_links, "synthetic: out-links per node")
      ->capture_default_str();
  app->add_option("--reciprocity", d.synth.degree.reciprocity, "synthetic: reciprocation prob")
      ->capture_default_str();
  app->add_option("--data-seed", d.synth.seed, "synthetic: generator seed")->capture_default_str();
}

DataSource source_of(const DataFlags& d) {
  const int given = !d.g1.empty() + !d.g2.empty() + !d.anchors.empty();
  if (given == 0) return d.synth;
  if (given != 3) throw Error("--g1, --g2 and --anchors must be given together");
  return FileSource{d.g1, d.g2, d.anchors};
}

void add_config_flags(CLI::App* app, ConfigFlags& f) {
  RunConfig& c = f.config;
  app->add_option("--d", c.model.embedding_dim, "embedding size per role")->capture_default_str();
  app->add_option("--hidden", c.model.hidden_dim, "layer-1 features per head")
      ->capture_default_str();
  app->add_option("--heads", c.model.heads, "layer-1 attention heads")->capture_default_str();
  app->add_option("--feature-cap", c.model.feature_cap, "max layer-1 input width")
      ->capture_default_str();
  app->add_option("--dropout", c.model.dropout, "dropout on attention coefficients")
      ->capture_default_str();
  app->add_option("--leaky-slope", c.model.leaky_slope)->capture_default_str();
  app->add_option("--output-activation", f.output_activation, "identity, elu or softmax")
      ->capture_default_str();
  app->add_option("--mode", f.mode, "sc+ad, sc+ac, sd+ad or sd+ac")->capture_default_str();
  app->add_option("--roles", f.roles, "both, initiator or recipient")->capture_default_str();
  app->add_option("--lr", c.train.learning_rate)->capture_default_str();
  app->add_option("--epochs", c.train.epochs)->capture_default_str();
  app->add_option("--alpha", c.train.alpha, "anchor objective weight")->capture_default_str();
  app->add_option("--beta", c.train.beta, "L2 weight")->capture_default_str();
  app->add_flag("--resample-negatives", c.train.resample_negatives);
  app->add_option("--patience", c.train.patience, "early stop on training loss, 0 = off")
      ->capture_default_str();
  app->add_option("--lambda", c.lambda, "training ratio")->capture_default_str();
  app->add_option("--seed", c.seed)->capture_default_str();
}

// stdout unless a path is given.
class Output {
 public:
  explicit Output(const std::string& path) {
    if (!path.empty()) {
      file_ = std::make_unique<std::ofstream>(path);
      if (!*file_) throw Error("cannot write " + path);
    }
  }
  std::ostream& stream() { return file_ ? *file_ : std::cout; }

 private:
  std::unique_ptr<std::ofstream> file_;
};

void write_dataset(const fs::path& dir, const AlignedPair& pair) {
  fs::create_directories(dir);
  write_link_file(dir / "g1.tsv", pair.g1().edges());
  write_link_file(dir / "g2.tsv", pair.g2().edges());
  write_link_file(dir / "anchors.tsv", pair.anchors());
}

std::string labeled_echo(const RunConfig& c, std::size_t repeats) {
  return c.echo() + " repeats=" + std::to_string(repeats);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Hierarchical graph attention embedding of aligned directed networks"};
  app.require_subcommand(1);

  DataFlags data;
  ConfigFlags flags;
  std::string out_path;
  std::string checkpoint_path;
  std::string resume_path;
  std::string split_out;
  std::string split_in;
  std::string trace_path;
  std::string embeddings_path;
  std::string out_dir = "data";
  std::string axis = "d";
  std::vector<double> values;
  std::vector<double> lambdas;
  std::size_t repeats = 1;
  bool per_run = false;
  bool with_time = false;

  auto* generate = app.add_subcommand("generate", "write a synthetic aligned pair");
  add_data_flags(generate, data);
  generate->add_option("--out-dir", out_dir, "directory for g1.tsv, g2.tsv, anchors.tsv")
      ->capture_default_str();

  auto* train = app.add_subcommand("train", "split, fit and report test AUCs");
  add_data_flags(train, data);
  add_config_flags(train, flags);
  train->add_option("--out", out_path, "report CSV (default stdout)");
  train->add_option("--checkpoint", checkpoint_path, "save the final training state");
  train->add_option("--resume", resume_path, "continue from a checkpoint (needs --split)");
  train->add_option("--split", split_in, "reuse a saved split instead of drawing one");
  train->add_option("--split-out", split_out, "save the split");
  train->add_option("--loss-trace", trace_path, "per-epoch loss CSV");
  train->add_option("--embeddings", embeddings_path, "save final embeddings (TSV)");
  train->add_flag("--time", with_time, "add a wall_time column");

  auto* evaluate_cmd = app.add_subcommand("evaluate", "score a checkpoint on a saved split");
  add_data_flags(evaluate_cmd, data);
  evaluate_cmd->add_option("--checkpoint", checkpoint_path)->required();
  evaluate_cmd->add_option("--split", split_in)->required();
  evaluate_cmd->add_option("--out", out_path, "report CSV (default stdout)");

  auto* export_cmd = app.add_subcommand("export-embeddings", "write a checkpoint's embeddings");
  add_data_flags(export_cmd, data);
  export_cmd->add_option("--checkpoint", checkpoint_path)->required();
  export_cmd->add_option("--split", split_in)->required();
  export_cmd->add_option("--out", out_path, "TSV (default stdout)");

  auto* sweep_cmd = app.add_subcommand("sweep", "mean/std AUC over one hyperparameter");
  add_data_flags(sweep_cmd, data);
  add_config_flags(sweep_cmd, flags);
  sweep_cmd->add_option("--axis", axis, "d, alpha or beta")->capture_default_str();
  sweep_cmd->add_option("--values", values, "values of the swept parameter")
      ->required()
      ->delimiter(',');
  sweep_cmd->add_option("--repeats", repeats)->capture_default_str();
  sweep_cmd->add_option("--out", out_path);

  auto* lambda_cmd = app.add_subcommand("lambda-grid", "test AUC per training ratio");
  add_data_flags(lambda_cmd, data);
  add_config_flags(lambda_cmd, flags);
  lambda_cmd->add_option("--lambdas", lambdas)->required()->delimiter(',');

  auto* hypothesis_cmd =
      app.add_subcommand("hypothesis-grid", "SC+AC, SD+AD, SD+AC and SC+AD contribution modes");
  add_data_flags(hypothesis_cmd, data);
  add_config_flags(hypothesis_cmd, flags);

  auto* ablation_cmd = app.add_subcommand("ablation", "initiator-only, recipient-only and both");
  add_data_flags(ablation_cmd, data);
  add_config_flags(ablation_cmd, flags);

  for (auto* grid : {lambda_cmd, hypothesis_cmd, ablation_cmd}) {
    grid->add_option("--repeats", repeats)->capture_default_str();
    grid->add_option("--out", out_path);
    grid->add_flag("--per-run", per_run, "one row per run instead of mean/std");
  }

  CLI11_PARSE(app, argc, argv);

  try {
    const DataSource source = source_of(data);

    if (generate->parsed()) {
      write_dataset(out_dir, load_data(source));
      return 0;
    }

    if (evaluate_cmd->parsed() || export_cmd->parsed()) {
      const AlignedPair pair = load_data(source);
      const LinkSplit split = load_split(split_in);
      const Checkpoint ckpt = load_checkpoint(checkpoint_path);
      const EmbeddingTable emb = embed(pair, split, ckpt);
      Output out(out_path);
      if (export_cmd->parsed()) {
        write_embeddings(out.stream(), emb);
        return 0;
      }
      EvalReport report = evaluate(pair, split, emb, ckpt.train.roles);
      report.config.model = ckpt.model;
      report.config.train = ckpt.train;
      report.config.seed = ckpt.seed;
      report.seed = ckpt.seed;
      write_reports_csv(out.stream(), report.config.echo(), std::span(&report, 1));
      return 0;
    }

    const RunConfig config = flags.resolve();

    if (train->parsed()) {
      const AlignedPair pair = load_data(source);
      const LinkSplit split =
          split_in.empty() ? make_split(pair, config.lambda, config.seed) : load_split(split_in);
      if (!split_out.empty()) save_split(split_out, split);
      std::optional<Checkpoint> resume;
      if (!resume_path.empty()) {
        if (split_in.empty()) throw Error("--resume needs the --split the checkpoint was trained on");
        resume = load_checkpoint(resume_path);
      }
      std::unique_ptr<std::ofstream> trace;
      if (!trace_path.empty()) {
        trace = std::make_unique<std::ofstream>(trace_path);
        if (!*trace) throw Error("cannot write " + trace_path);
        write_loss_trace_header(*trace);
      }
      const auto start = std::chrono::steady_clock::now();
      const FitResult result = fit(pair, split, config.model, config.train, config.seed,
                                   trace.get(), resume ? &*resume : nullptr);
      EvalReport report = evaluate(pair, split, result.embeddings, config.train.roles);
      report.config = config;
      report.config.lambda = split.lambda;
      report.seed = config.seed;
      report.wall_time =
          std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
      if (!checkpoint_path.empty()) save_checkpoint(checkpoint_path, result.checkpoint);
      if (!embeddings_path.empty()) save_embeddings(embeddings_path, result.embeddings);
      Output out(out_path);
      write_reports_csv(out.stream(), report.config.echo(), std::span(&report, 1), with_time);
      return 0;
    }

    if (sweep_cmd->parsed()) {
      const SweepAxis ax = parse_sweep_axis(axis);
      const auto rows = sweep(config, ax, values, repeats, source);
      Output out(out_path);
      write_summary_csv(out.stream(), labeled_echo(config, repeats), to_string(ax), rows);
      return 0;
    }

    std::vector<RunConfig> configs;
    std::vector<std::string> labels;
    std::string key;
    if (lambda_cmd->parsed()) {
      configs = lambda_grid(config, lambdas);
      key = "lambda";
      for (const RunConfig& c : configs) labels.push_back(std::to_string(c.lambda));
    } else if (hypothesis_cmd->parsed()) {
      configs = hypothesis_grid(config);
      key = "mode";
      for (const RunConfig& c : configs) labels.push_back(to_string(c.model.mode));
    } else {
      configs = ablation_grid(config);
      key = "roles";
      for (const RunConfig& c : configs) labels.push_back(to_string(c.train.roles));
    }
    const auto reports = run_grid(configs, repeats, source);
    Output out(out_path);
    if (per_run)
      write_reports_csv(out.stream(), labeled_echo(config, repeats), reports);
    else
      write_summary_csv(out.stream(), labeled_echo(config, repeats), key,
                        summarize(reports, labels, repeats));
    return 0;
  } catch (const std::exception& e) {
    std::cerr << "hgane: " << e.what() << '\n';
    return 1;
  }
}
