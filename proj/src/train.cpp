#include "hgane/train.hpp"

#include <cmath>
#include <fstream>
#include <iomanip>
#include <istream>
#include <limits>
#include <ostream>
#include <sstream>

namespace hgane {

SeedPlan SeedPlan::from(std::uint64_t seed) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    0x68676e65u};
  std::array<std::uint32_t, 8> words{};
  seq.generate(words.begin(), words.end());
  auto join = [&](int i) {
    return (static_cast<std::uint64_t>(words[2 * i]) << 32) | words[2 * i + 1];
  };
  return {join(0), join(1), join(2), join(3)};
}

AdamState AdamState::for_params(const ModelParams& params, const TrainConfig& config) {
  AdamState s;
  s.m = params.zeros_like();
  s.v = params.zeros_like();
  s.lr = config.learning_rate;
  s.beta1 = config.adam_beta1;
  s.beta2 = config.adam_beta2;
  s.epsilon = config.adam_epsilon;
  return s;
}

namespace {

NetworkFeatures zeros_like(const NetworkFeatures& f) {
  NetworkFeatures z;
  for (int k = 0; k < 2; ++k) {
    z[k].in = Matrix(f[k].in.rows(), f[k].in.cols());
    z[k].re = Matrix(f[k].re.rows(), f[k].re.cols());
  }
  return z;
}

void check_finite(const LossBreakdown& loss) {
  const std::pair<const char*, double> parts[] = {{"l_soc1", loss.l_soc1},
                                                  {"l_soc2", loss.l_soc2},
                                                  {"l_anchor", loss.l_anchor},
                                                  {"l_reg", loss.l_reg},
                                                  {"total", loss.total}};
  for (const auto& [name, value] : parts)
    if (!std::isfinite(value))
      throw NumericalError(name, std::string("non-finite loss component ") + name);
}

std::string describe(const LossBreakdown& l) {
  std::ostringstream s;
  s << "l_soc1=" << l.l_soc1 << " l_soc2=" << l.l_soc2 << " l_anchor=" << l.l_anchor
    << " l_reg=" << l.l_reg << " total=" << l.total;
  return s.str();
}

}  // namespace

BackwardResult backward(const AlignedPair& message, const NetworkFeatures& features,
                        const ObjectiveLinks& links, const ModelParams& params,
                        const ModelConfig& model, const TrainConfig& train, Rng* dropout_rng) {
  ForwardCache cache;
  const EmbeddingTable emb = forward(message, features, params, model, dropout_rng, &cache);
  EmbeddingTable d_emb = zeros_like(emb);
  BackwardResult result;
  result.loss =
      objective(links, emb, params, train.alpha, train.beta, train.roles, &d_emb);
  check_finite(result.loss);

  result.grads = params.zeros_like();
  NetworkFeatures d_hidden = zeros_like(cache.hidden);
  layer_backward(message, cache.hidden, params.layer2, layer2_options(model), cache.layer2,
                 d_emb, result.grads.layer2, &d_hidden);
  layer_backward(message, features, params.layer1, layer1_options(model), cache.layer1,
                 d_hidden, result.grads.layer1, nullptr);

  const auto values = tensor_spans(params);
  std::vector<std::string> names;
  params.for_each([&](const std::string& name, std::span<const double>) { names.push_back(name); });
  auto grads = tensor_spans(result.grads);
  for (std::size_t t = 0; t < grads.size(); ++t) {
    for (std::size_t i = 0; i < grads[t].size(); ++i) {
      grads[t][i] += 2.0 * train.beta * values[t][i];
      if (!std::isfinite(grads[t][i]))
        throw NumericalError(names[t], "non-finite gradient in " + names[t]);
    }
  }
  return result;
}

void adam_step(ModelParams& params, const GradientTable& grads, AdamState& state) {
  ++state.step;
  const double t = static_cast<double>(state.step);
  const double correction1 = 1.0 - std::pow(state.beta1, t);
  const double correction2 = 1.0 - std::pow(state.beta2, t);
  auto p = tensor_spans(params);
  const auto g = tensor_spans(grads);
  auto m = tensor_spans(state.m);
  auto v = tensor_spans(state.v);
  if (p.size() != g.size() || p.size() != m.size() || p.size() != v.size())
    throw ShapeError("adam_step: parameter, gradient and moment layouts differ");
  for (std::size_t k = 0; k < p.size(); ++k) {
    if (p[k].size() != g[k].size()) throw ShapeError("adam_step: tensor size mismatch");
    for (std::size_t i = 0; i < p[k].size(); ++i) {
      const double gi = g[k][i];
      m[k][i] = state.beta1 * m[k][i] + (1.0 - state.beta1) * gi;
      v[k][i] = state.beta2 * v[k][i] + (1.0 - state.beta2) * gi * gi;
      const double m_hat = m[k][i] / correction1;
      const double v_hat = v[k][i] / correction2;
      p[k][i] -= state.lr * m_hat / (std::sqrt(v_hat) + state.epsilon);
    }
  }
}

// ---------------------------------------------------------------------------
// fit

FitResult fit(const AlignedPair& pair, const LinkSplit& split, const ModelConfig& model,
              const TrainConfig& train, std::uint64_t seed, std::ostream* trace_csv,
              const Checkpoint* resume) {
  const SeedPlan seeds = SeedPlan::from(seed);
  const AlignedPair message = message_graph(pair, split);
  const NetworkFeatures features = init_features(message, model.feature_cap, seeds.features);
  const std::array<std::size_t, 2> dims{features[0].dim(), features[1].dim()};

  FitResult result;
  Checkpoint& state = result.checkpoint;
  Rng dropout_rng(seeds.dropout);
  Rng negative_rng(seeds.negatives);
  if (resume != nullptr) {
    if (resume->feature_dims != dims) throw ShapeError("checkpoint feature dimensions differ");
    state = *resume;
    std::istringstream rs(resume->rng_state);
    rs >> dropout_rng >> negative_rng;
  } else {
    state.params = init_params(model, dims, seeds.params);
    state.adam = AdamState::for_params(state.params, train);
  }
  state.model = model;
  state.train = train;
  state.feature_dims = dims;
  state.seed = seed;
  state.adam.lr = train.learning_rate;

  ObjectiveLinks links = ObjectiveLinks::train_of(split);
  std::array<std::vector<Link>, 2> fresh_social;
  std::vector<Link> fresh_anchor;
  std::array<std::vector<Link>, 2> test_neg_social;
  std::vector<Link> test_neg_anchor;
  if (train.resample_negatives) {
    for (int k = 0; k < 2; ++k) {
      test_neg_social[k] = split.neg_social(k).test;
      std::sort(test_neg_social[k].begin(), test_neg_social[k].end());
    }
    test_neg_anchor = split.neg_anchor.test;
    std::sort(test_neg_anchor.begin(), test_neg_anchor.end());
  }

  Rng* dropout = model.dropout > 0.0 ? &dropout_rng : nullptr;
  double best = std::numeric_limits<double>::infinity();
  std::size_t since_best = 0;
  for (std::size_t epoch = state.epoch; epoch < train.epochs; ++epoch) {
    if (train.resample_negatives) {
      for (int k = 0; k < 2; ++k) {
        fresh_social[k] = sample_social_negatives(pair.graph(k), split.neg_social(k).train.size(),
                                                  test_neg_social[k], negative_rng);
        links.neg_social[k] = fresh_social[k];
      }
      fresh_anchor = sample_anchor_negatives(pair, split.neg_anchor.train.size(),
                                             test_neg_anchor, negative_rng);
      links.neg_anchor = fresh_anchor;
    }
    BackwardResult step;
    try {
      step = backward(message, features, links, state.params, model, train, dropout);
    } catch (const NumericalError& e) {
      std::ostringstream msg;
      msg << "epoch " << epoch << ": " << e.what();
      throw NumericalError(e.component(), msg.str());
    }
    adam_step(state.params, step.grads, state.adam);
    state.epoch = epoch + 1;
    result.trace.push_back(step.loss);
    if (trace_csv != nullptr) write_loss_trace_row(*trace_csv, epoch, step.loss);
    for (auto t : tensor_spans(state.params))
      for (double v : t)
        if (!std::isfinite(v))
          throw NumericalError("params", "epoch " + std::to_string(epoch) +
                                             ": non-finite parameter after update (" +
                                             describe(step.loss) + ")");
    if (train.patience > 0) {
      if (step.loss.total < best) {
        best = step.loss.total;
        since_best = 0;
      } else if (++since_best >= train.patience) {
        break;
      }
    }
  }

  std::ostringstream rs;
  rs << dropout_rng << ' ' << negative_rng;
  state.rng_state = rs.str();
  result.params = state.params;
  result.embeddings = forward(message, features, result.params, model);
  return result;
}

EmbeddingTable embed(const AlignedPair& pair, const LinkSplit& split, const Checkpoint& ckpt) {
  const AlignedPair message = message_graph(pair, split);
  const NetworkFeatures features =
      init_features(message, ckpt.model.feature_cap, SeedPlan::from(ckpt.seed).features);
  if (features[0].dim() != ckpt.feature_dims[0] || features[1].dim() != ckpt.feature_dims[1])
    throw ShapeError("checkpoint does not match this data set");
  return forward(message, features, ckpt.params, ckpt.model);
}

// ---------------------------------------------------------------------------
// Checkpoints

namespace {

constexpr std::string_view kCheckpointMagic = "hgane-checkpoint v1";

void write_tensors(std::ostream& out, const char* prefix, const ModelParams& params) {
  params.for_each([&](const std::string& name, std::span<const double> t) {
    out << "tensor " << prefix << name << ' ' << t.size() << '\n';
    for (std::size_t i = 0; i < t.size(); ++i) out << (i ? " " : "") << t[i];
    out << '\n';
  });
}

void read_tensors(std::istream& in, const char* prefix, ModelParams& params) {
  params.for_each([&](const std::string& name, std::span<double> t) {
    std::string tag, got;
    std::size_t size = 0;
    if (!(in >> tag >> got >> size) || tag != "tensor" || got != prefix + name || size != t.size())
      throw FormatError("checkpoint: expected tensor " + std::string(prefix) + name);
    for (double& v : t) {
      std::string token;
      if (!(in >> token)) throw FormatError("checkpoint: truncated tensor " + name);
      v = std::strtod(token.c_str(), nullptr);
    }
  });
}

template <typename T>
void expect(std::istream& in, const std::string& key, T& value) {
  std::string tag;
  if (!(in >> tag) || tag != key || !(in >> value))
    throw FormatError("checkpoint: expected '" + key + "'");
}

}  // namespace

void write_checkpoint(std::ostream& out, const Checkpoint& c) {
  out << kCheckpointMagic << '\n' << std::hexfloat;
  out << "epoch " << c.epoch << '\n';
  out << "seed " << c.seed << '\n';
  out << "feature_dims " << c.feature_dims[0] << ' ' << c.feature_dims[1] << '\n';
  out << "embedding_dim " << c.model.embedding_dim << '\n';
  out << "hidden_dim " << c.model.hidden_dim << '\n';
  out << "heads " << c.model.heads << '\n';
  out << "feature_cap " << c.model.feature_cap << '\n';
  out << "dropout " << c.model.dropout << '\n';
  out << "leaky_slope " << c.model.leaky_slope << '\n';
  out << "output_activation " << to_string(c.model.output_activation) << '\n';
  out << "mode " << to_string(c.model.mode) << '\n';
  out << "epochs " << c.train.epochs << '\n';
  out << "learning_rate " << c.train.learning_rate << '\n';
  out << "alpha " << c.train.alpha << '\n';
  out << "beta " << c.train.beta << '\n';
  out << "roles " << to_string(c.train.roles) << '\n';
  out << "adam " << c.adam.step << ' ' << c.adam.lr << ' ' << c.adam.beta1 << ' '
      << c.adam.beta2 << ' ' << c.adam.epsilon << '\n';
  out << "rng " << c.rng_state << '\n';
  write_tensors(out, "param.", c.params);
  write_tensors(out, "adam_m.", c.adam.m);
  write_tensors(out, "adam_v.", c.adam.v);
  out << std::defaultfloat;
}

Checkpoint read_checkpoint(std::istream& in) {
  std::string line;
  if (!std::getline(in, line) || line != kCheckpointMagic)
    throw FormatError("checkpoint: bad magic header");
  Checkpoint c;
  // Floating-point fields are hex floats; read through strtod.
  auto real = [&](const std::string& key) {
    std::string token;
    expect(in, key, token);
    return std::strtod(token.c_str(), nullptr);
  };
  std::string text;
  expect(in, "epoch", c.epoch);
  expect(in, "seed", c.seed);
  expect(in, "feature_dims", c.feature_dims[0]);
  if (!(in >> c.feature_dims[1])) throw FormatError("checkpoint: feature_dims");
  expect(in, "embedding_dim", c.model.embedding_dim);
  expect(in, "hidden_dim", c.model.hidden_dim);
  expect(in, "heads", c.model.heads);
  expect(in, "feature_cap", c.model.feature_cap);
  c.model.dropout = real("dropout");
  c.model.leaky_slope = real("leaky_slope");
  expect(in, "output_activation", text);
  c.model.output_activation = parse_activation(text);
  expect(in, "mode", text);
  c.model.mode = parse_mode(text);
  expect(in, "epochs", c.train.epochs);
  c.train.learning_rate = real("learning_rate");
  c.train.alpha = real("alpha");
  c.train.beta = real("beta");
  expect(in, "roles", text);
  c.train.roles = parse_feature_roles(text);
  expect(in, "adam", c.adam.step);
  std::string a, b1, b2, eps;
  if (!(in >> a >> b1 >> b2 >> eps)) throw FormatError("checkpoint: adam");
  c.adam.lr = std::strtod(a.c_str(), nullptr);
  c.adam.beta1 = std::strtod(b1.c_str(), nullptr);
  c.adam.beta2 = std::strtod(b2.c_str(), nullptr);
  c.adam.epsilon = std::strtod(eps.c_str(), nullptr);
  expect(in, "rng", text);
  std::getline(in, line);
  c.rng_state = text + line;
  c.params = init_params(c.model, c.feature_dims, 0);
  c.adam.m = c.params.zeros_like();
  c.adam.v = c.params.zeros_like();
  read_tensors(in, "param.", c.params);
  read_tensors(in, "adam_m.", c.adam.m);
  read_tensors(in, "adam_v.", c.adam.v);
  return c;
}

void save_checkpoint(const std::filesystem::path& path, const Checkpoint& ckpt) {
  std::ofstream out(path);
  if (!out) throw Error(path.string() + ": cannot open for writing");
  write_checkpoint(out, ckpt);
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw FormatError(path.string() + ": cannot open file");
  return read_checkpoint(in);
}

}  // namespace hgane
