#pragma once

// Exact reverse-mode gradients of the joint objective through both
// attention layers, Adam, and the full-batch epoch loop.

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "hgane/objective.hpp"

namespace hgane {

struct TrainConfig {
  std::size_t epochs = 3000;
  double learning_rate = 0.005;
  double adam_beta1 = 0.9;
  double adam_beta2 = 0.999;
  double adam_epsilon = 1e-8;
  double alpha = 1.0;
  double beta = 0.0005;
  FeatureRoles roles = FeatureRoles::kBoth;
  // Redraw the training negatives every epoch (loss only; test negatives
  // are never drawn).
  bool resample_negatives = false;
  // Stop after this many epochs without a new best training loss; 0 = off.
  std::size_t patience = 0;
};

struct AdamState {
  ModelParams m;
  ModelParams v;
  std::uint64_t step = 0;
  double lr = 0.005;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;

  static AdamState for_params(const ModelParams& params, const TrainConfig& config);
};

struct BackwardResult {
  LossBreakdown loss;
  GradientTable grads;
};

// Loss and d(total)/d(params) on `message` (the leakage-free graph) with
// `features` as layer-1 input. Dropout masks come from `dropout_rng` and
// are shared by the values and the gradients; null disables dropout.
// Throws NumericalError naming the first non-finite loss component or
// gradient tensor.
BackwardResult backward(const AlignedPair& message, const NetworkFeatures& features,
                        const ObjectiveLinks& links, const ModelParams& params,
                        const ModelConfig& model, const TrainConfig& train,
                        Rng* dropout_rng = nullptr);

// Bias-corrected Adam update; increments state.step.
void adam_step(ModelParams& params, const GradientTable& grads, AdamState& state);

// Everything needed to resume training bit-exactly.
struct Checkpoint {
  ModelConfig model;
  TrainConfig train;
  std::array<std::size_t, 2> feature_dims{};
  std::uint64_t seed = 0;
  std::size_t epoch = 0;
  ModelParams params;
  AdamState adam;
  std::string rng_state;
};

void write_checkpoint(std::ostream& out, const Checkpoint& ckpt);
Checkpoint read_checkpoint(std::istream& in);
void save_checkpoint(const std::filesystem::path& path, const Checkpoint& ckpt);
Checkpoint load_checkpoint(const std::filesystem::path& path);

struct FitResult {
  ModelParams params;
  EmbeddingTable embeddings;  // eval mode (no dropout)
  std::vector<LossBreakdown> trace;
  Checkpoint checkpoint;      // state after the last epoch
};

// Full-batch training for train.epochs epochs on the message graph of
// (pair, split). Deterministic in `seed`. Per-epoch losses are appended to
// `trace_csv` when given. When `resume` is set, training continues from it
// up to train.epochs total epochs. On a non-finite loss a NumericalError is
// thrown whose message carries the epoch and the loss breakdown.
FitResult fit(const AlignedPair& pair, const LinkSplit& split, const ModelConfig& model,
              const TrainConfig& train, std::uint64_t seed, std::ostream* trace_csv = nullptr,
              const Checkpoint* resume = nullptr);

// Eval-mode embeddings of a checkpoint's parameters on the message graph
// of (pair, split), i.e. the embeddings fit() reported for that state.
EmbeddingTable embed(const AlignedPair& pair, const LinkSplit& split, const Checkpoint& ckpt);

// Sub-seeds derived from the experiment seed.
struct SeedPlan {
  std::uint64_t features;
  std::uint64_t params;
  std::uint64_t dropout;
  std::uint64_t negatives;
  static SeedPlan from(std::uint64_t seed);
};

}  // namespace hgane
