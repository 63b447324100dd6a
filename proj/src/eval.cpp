#include "hgane/eval.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <iomanip>
#include <numeric>
#include <ostream>
#include <sstream>

namespace hgane {

double auc(std::span<const double> scores_pos, std::span<const double> scores_neg) {
  if (scores_pos.empty() || scores_neg.empty())
    throw EvaluationError("auc needs at least one positive and one negative score");
  std::vector<std::pair<double, bool>> all;
  all.reserve(scores_pos.size() + scores_neg.size());
  for (double s : scores_pos) all.emplace_back(s, true);
  for (double s : scores_neg) all.emplace_back(s, false);
  for (const auto& [s, positive] : all)
    if (std::isnan(s)) throw EvaluationError("auc: NaN score");
  std::sort(all.begin(), all.end(),
            [](const auto& a, const auto& b) { return a.first < b.first; });
  // Twice the Mann-Whitney U of the positives, kept integral.
  std::uint64_t twice_u = 0;
  std::uint64_t negatives_below = 0;
  for (std::size_t i = 0; i < all.size();) {
    std::size_t j = i;
    std::uint64_t group_pos = 0;
    std::uint64_t group_neg = 0;
    for (; j < all.size() && all[j].first == all[i].first; ++j)
      (all[j].second ? group_pos : group_neg) += 1;
    twice_u += group_pos * (2 * negatives_below + group_neg);
    negatives_below += group_neg;
    i = j;
  }
  return static_cast<double>(twice_u) /
         (2.0 * static_cast<double>(scores_pos.size()) * static_cast<double>(scores_neg.size()));
}

std::string RunConfig::echo() const {
  std::ostringstream s;
  s << std::setprecision(10) << "d_emb=" << model.embedding_dim << " hidden=" << model.hidden_dim
    << " heads=" << model.heads << " feature_cap=" << model.feature_cap
    << " dropout=" << model.dropout << " leaky_slope=" << model.leaky_slope
    << " output_activation=" << to_string(model.output_activation)
    << " mode=" << to_string(model.mode) << " roles=" << to_string(train.roles)
    << " lr=" << train.learning_rate << " epochs=" << train.epochs << " alpha=" << train.alpha
    << " beta=" << train.beta << " resample_negatives=" << train.resample_negatives
    << " patience=" << train.patience << " lambda=" << lambda << " seed=" << seed;
  return s.str();
}

EvalReport evaluate(const AlignedPair& pair, const LinkSplit& split,
                    const EmbeddingTable& embeddings, FeatureRoles roles,
                    EvalPartition partition) {
  for (int k = 0; k < 2; ++k)
    if (embeddings[k].in.rows() != pair.graph(k).node_count())
      throw ShapeError("embedding table does not match network " + std::to_string(k + 1));
  auto pick = [&](const Partition& p) -> const std::vector<Link>& {
    return partition == EvalPartition::kTest ? p.test : p.train;
  };
  auto scores = [&](const std::vector<Link>& links, auto&& logit) {
    std::vector<double> out;
    out.reserve(links.size());
    for (const Link& l : links) out.push_back(sigmoid(logit(l)));
    return out;
  };
  auto social = [&](int k) {
    auto logit = [&](const Link& l) { return social_logit(embeddings[k], l, roles); };
    return auc(scores(pick(split.pos_social(k)), logit), scores(pick(split.neg_social(k)), logit));
  };
  auto anchor_logit_of = [&](const Link& l) { return anchor_logit(embeddings, l, roles); };

  EvalReport report;
  report.auc_soc1 = social(0);
  report.auc_soc2 = social(1);
  report.auc_anchor =
      auc(scores(pick(split.pos_anchor), anchor_logit_of), scores(pick(split.neg_anchor), anchor_logit_of));
  report.config.lambda = split.lambda;
  report.config.seed = split.seed;
  report.config.train.roles = roles;
  report.seed = split.seed;
  return report;
}

AlignedPair load_data(const DataSource& source) {
  if (const auto* files = std::get_if<FileSource>(&source))
    return load_aligned_pair(files->g1_edges, files->g2_edges, files->anchors);
  return generate_synthetic(std::get<SyntheticParams>(source));
}

DataSource with_seed_offset(const DataSource& source, std::uint64_t offset) {
  if (const auto* synth = std::get_if<SyntheticParams>(&source)) {
    SyntheticParams shifted = *synth;
    shifted.seed += offset;
    return shifted;
  }
  return source;
}

namespace {

template <typename F>
auto stage(const char* name, F&& f) {
  try {
    return f();
  } catch (const StageError&) {
    throw;
  } catch (const std::exception& e) {
    throw StageError(name, e.what());
  }
}

}  // namespace

ExperimentRun run_experiment_full(const RunConfig& config, const DataSource& source,
                                  std::ostream* trace_csv) {
  const auto start = std::chrono::steady_clock::now();
  ExperimentRun run;
  run.pair = stage("load", [&] { return load_data(source); });
  run.split = stage("split", [&] { return make_split(run.pair, config.lambda, config.seed); });
  run.fit = stage("fit", [&] {
    return fit(run.pair, run.split, config.model, config.train, config.seed, trace_csv);
  });
  run.report = stage("evaluate", [&] {
    return evaluate(run.pair, run.split, run.fit.embeddings, config.train.roles);
  });
  run.report.config = config;
  run.report.seed = config.seed;
  run.report.wall_time =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return run;
}

EvalReport run_experiment(const RunConfig& config, const DataSource& source) {
  return run_experiment_full(config, source).report;
}

std::vector<EvalReport> run_grid(std::span<const RunConfig> configs, std::size_t repeats,
                                 const DataSource& source) {
  std::vector<EvalReport> reports;
  for (const RunConfig& base : configs) {
    for (std::size_t r = 0; r < repeats; ++r) {
      RunConfig config = base;
      config.seed = base.seed + r;
      reports.push_back(run_experiment(config, with_seed_offset(source, r)));
    }
  }
  return reports;
}

std::vector<RunConfig> lambda_grid(const RunConfig& base, std::span<const double> lambdas) {
  std::vector<RunConfig> out;
  for (double l : lambdas) {
    RunConfig c = base;
    c.lambda = l;
    out.push_back(c);
  }
  return out;
}

std::vector<RunConfig> hypothesis_grid(const RunConfig& base) {
  std::vector<RunConfig> out;
  for (const ContributionMode& m : kAllModes) {
    RunConfig c = base;
    c.model.mode = m;
    out.push_back(c);
  }
  return out;
}

std::vector<RunConfig> ablation_grid(const RunConfig& base) {
  std::vector<RunConfig> out;
  for (FeatureRoles r :
       {FeatureRoles::kInitiatorOnly, FeatureRoles::kRecipientOnly, FeatureRoles::kBoth}) {
    RunConfig c = base;
    c.train.roles = r;
    out.push_back(c);
  }
  return out;
}

SweepAxis parse_sweep_axis(std::string_view text) {
  if (text == "d") return SweepAxis::kEmbeddingDim;
  if (text == "alpha") return SweepAxis::kAlpha;
  if (text == "beta") return SweepAxis::kBeta;
  throw Error("unknown sweep axis '" + std::string(text) + "' (expected d, alpha or beta)");
}

std::string to_string(SweepAxis axis) {
  switch (axis) {
    case SweepAxis::kEmbeddingDim: return "d";
    case SweepAxis::kAlpha: return "alpha";
    case SweepAxis::kBeta: return "beta";
  }
  return "?";
}

RunConfig with_axis_value(const RunConfig& base, SweepAxis axis, double value) {
  RunConfig c = base;
  switch (axis) {
    case SweepAxis::kEmbeddingDim:
      if (!(value >= 1.0) || value != std::floor(value))
        throw Error("embedding dimension must be a positive integer");
      c.model.embedding_dim = static_cast<std::size_t>(value);
      break;
    case SweepAxis::kAlpha: c.train.alpha = value; break;
    case SweepAxis::kBeta: c.train.beta = value; break;
  }
  return c;
}

std::vector<SummaryRow> summarize(std::span<const EvalReport> reports,
                                  std::span<const std::string> labels, std::size_t repeats) {
  if (repeats == 0 || reports.size() != labels.size() * repeats)
    throw EvaluationError("summarize: report count does not match labels x repeats");
  std::vector<SummaryRow> rows;
  for (std::size_t g = 0; g < labels.size(); ++g) {
    SummaryRow row;
    row.label = labels[g];
    row.runs = repeats;
    for (int t = 0; t < 3; ++t) {
      std::vector<double> xs;
      for (std::size_t r = 0; r < repeats; ++r) {
        const EvalReport& rep = reports[g * repeats + r];
        xs.push_back(t == 0 ? rep.auc_soc1 : t == 1 ? rep.auc_soc2 : rep.auc_anchor);
      }
      const double mean = std::accumulate(xs.begin(), xs.end(), 0.0) / static_cast<double>(xs.size());
      double ss = 0.0;
      for (double x : xs) ss += (x - mean) * (x - mean);
      row.mean[t] = mean;
      row.stddev[t] = xs.size() > 1 ? std::sqrt(ss / static_cast<double>(xs.size() - 1)) : 0.0;
    }
    rows.push_back(row);
  }
  return rows;
}

std::vector<SummaryRow> sweep(const RunConfig& base, SweepAxis axis, std::span<const double> values,
                              std::size_t repeats, const DataSource& source) {
  if (values.empty()) throw Error("sweep needs at least one value");
  std::vector<RunConfig> configs;
  std::vector<std::string> labels;
  for (double v : values) {
    configs.push_back(with_axis_value(base, axis, v));
    std::ostringstream s;
    s << std::setprecision(10) << v;
    labels.push_back(s.str());
  }
  const auto reports = run_grid(configs, repeats, source);
  return summarize(reports, labels, repeats);
}

void write_reports_csv(std::ostream& out, const std::string& echo,
                       std::span<const EvalReport> reports, bool with_time) {
  out << "# " << echo << '\n';
  out << "lambda,seed,mode,roles,d_emb,alpha,beta,auc_soc1,auc_soc2,auc_anchor";
  if (with_time) out << ",wall_time";
  out << '\n' << std::setprecision(10);
  for (const EvalReport& r : reports) {
    out << r.config.lambda << ',' << r.seed << ',' << to_string(r.config.model.mode) << ','
        << to_string(r.config.train.roles) << ',' << r.config.model.embedding_dim << ','
        << r.config.train.alpha << ',' << r.config.train.beta << ',' << r.auc_soc1 << ','
        << r.auc_soc2 << ',' << r.auc_anchor;
    if (with_time) out << ',' << r.wall_time;
    out << '\n';
  }
}

void write_summary_csv(std::ostream& out, const std::string& echo, const std::string& key,
                       std::span<const SummaryRow> rows) {
  out << "# " << echo << '\n';
  out << key
      << ",runs,auc_soc1_mean,auc_soc1_std,auc_soc2_mean,auc_soc2_std,auc_anchor_mean,"
         "auc_anchor_std\n"
      << std::setprecision(10);
  for (const SummaryRow& r : rows) {
    out << r.label << ',' << r.runs;
    for (int t = 0; t < 3; ++t) out << ',' << r.mean[t] << ',' << r.stddev[t];
    out << '\n';
  }
}

}  // namespace hgane
