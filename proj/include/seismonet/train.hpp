#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <span>
#include <vector>

#include "seismonet/layers.hpp"
#include "seismonet/model.hpp"
#include "seismonet/signal.hpp"

namespace seismonet::train {

struct TrainConfig {
  std::size_t epochs = 300;
  double lr0 = 0.001;
  std::size_t schedule_step = 100;  // epochs between learning-rate drops
  double schedule_factor = 10.0;
  std::size_t batch_size = 16;
  bool shuffle = true;
  std::uint64_t seed = 0;
  nn::Reduction reduction = nn::Reduction::Mean;
  std::size_t checkpoint_every = 0;  // 0 disables periodic checkpoints
  std::optional<std::filesystem::path> output_dir;

  /// Throws ConfigError with a `train.*` key.
  void validate() const;
};

struct EpochRecord {
  std::size_t epoch = 0;  // 1-based
  double lr = 0.0;
  double train_loss = 0.0;  // mean per-sample Smooth-L1 over the epoch
  std::optional<double> val_loss;
};

struct TrainHistory {
  std::vector<EpochRecord> epochs;
  std::optional<std::size_t> best_epoch;  // lowest validation loss
};

/// Stacks window inputs into (B, 1, w).
nn::Tensor<float> stack_inputs(std::span<const signal::Window* const> windows);
/// Stacks distance-transform targets; throws ValidationError on an unlabeled window.
nn::Tensor<float> stack_targets(std::span<const signal::Window* const> windows);

/// Mini-batch SGD on Smooth-L1 against the distance-transform target.
///
/// With `output_dir` set, writes `model.smn` at the end, `best.smn` whenever
/// the validation loss improves, `epoch_<n>.smn` every `checkpoint_every`
/// epochs and `history.csv`. Throws NumericError naming the epoch and batch
/// when the loss or a gradient becomes non-finite.
TrainHistory train(model::SeismoNet<float>& model,
                   const std::vector<signal::Window>& train_set,
                   const std::vector<signal::Window>& val_set,
                   const TrainConfig& config,
                   const std::function<void(const EpochRecord&)>& on_epoch = {});

/// Mean per-sample Smooth-L1 of inference-mode predictions.
/// Throws InsufficientDataError on an empty set.
double evaluate_loss(const model::SeismoNet<float>& model,
                     const std::vector<signal::Window>& windows,
                     std::size_t batch_size = 16);

/// `epoch,lr,train_loss,val_loss` with round-trip precision; empty val_loss when absent.
void write_history_csv(const TrainHistory& history, const std::filesystem::path& path);

}  // namespace seismonet::train
