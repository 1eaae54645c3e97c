#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <limits>
#include <numeric>
#include <random>

#include "seismonet/error.hpp"
#include "seismonet/train.hpp"

namespace seismonet::train {

namespace {

using signal::Window;

std::string shortest(double v) {
  char buf[32];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, ptr);
}

void check_windows(const std::vector<Window>& windows, std::size_t input_len, const char* which) {
  for (const auto& w : windows) {
    if (w.scg_seg.size() != input_len) {
      throw ValidationError(std::string(which) + " window of " + w.subject_id + " at " + std::to_string(w.start) +
                            " has " + std::to_string(w.scg_seg.size()) + " samples; model expects " +
                            std::to_string(input_len));
    }
    if (!w.labeled()) {
      throw ValidationError(std::string(which) + " window of " + w.subject_id + " at " + std::to_string(w.start) +
                            " has no distance-transform target");
    }
  }
}

std::vector<const Window*> slice(const std::vector<Window>& windows, std::span<const std::size_t> order) {
  std::vector<const Window*> out;
  out.reserve(order.size());
  for (std::size_t i : order) out.push_back(&windows[i]);
  return out;
}

}  // namespace

void TrainConfig::validate() const {
  if (epochs == 0) throw ConfigError("train.epochs", "must be >= 1");
  if (!(lr0 > 0.0) || !std::isfinite(lr0)) throw ConfigError("train.lr0", "must be a positive finite number");
  if (schedule_step == 0) throw ConfigError("train.schedule_step", "must be >= 1");
  if (!(schedule_factor > 1.0)) throw ConfigError("train.schedule_factor", "must be > 1");
  if (batch_size == 0) throw ConfigError("train.batch_size", "must be >= 1");
}

nn::Tensor<float> stack_inputs(std::span<const Window* const> windows) {
  if (windows.empty()) throw ValidationError("stack_inputs: no windows");
  const std::size_t len = windows.front()->scg_seg.size();
  nn::Tensor<float> x(nn::Shape{windows.size(), 1, len});
  for (std::size_t b = 0; b < windows.size(); ++b) {
    const auto& seg = windows[b]->scg_seg;
    if (seg.size() != len) throw ValidationError("stack_inputs: windows differ in length");
    std::copy(seg.begin(), seg.end(), x.row(b, 0).begin());
  }
  return x;
}

nn::Tensor<float> stack_targets(std::span<const Window* const> windows) {
  if (windows.empty()) throw ValidationError("stack_targets: no windows");
  const std::size_t len = windows.front()->scg_seg.size();
  nn::Tensor<float> y(nn::Shape{windows.size(), 1, len});
  for (std::size_t b = 0; b < windows.size(); ++b) {
    if (!windows[b]->labeled()) throw ValidationError("stack_targets: unlabeled window");
    const auto& dt = *windows[b]->target_dt;
    if (dt.size() != len) throw ValidationError("stack_targets: target length differs from input");
    std::copy(dt.begin(), dt.end(), y.row(b, 0).begin());
  }
  return y;
}

double evaluate_loss(const model::SeismoNet<float>& model, const std::vector<Window>& windows,
                     std::size_t batch_size) {
  if (windows.empty()) throw InsufficientDataError("evaluate_loss: empty window set");
  if (batch_size == 0) throw ValidationError("evaluate_loss: batch size must be >= 1");
  check_windows(windows, model.config().input_len, "evaluation");
  std::vector<std::size_t> order(windows.size());
  std::iota(order.begin(), order.end(), 0);
  double total = 0.0;
  std::size_t count = 0;
  for (std::size_t lo = 0; lo < order.size(); lo += batch_size) {
    const auto batch = slice(windows, std::span(order).subspan(lo, std::min(batch_size, order.size() - lo)));
    const auto pred = model.predict(stack_inputs(batch));
    const auto loss = nn::smooth_l1_loss(pred, stack_targets(batch), nn::Reduction::Sum);
    total += loss.value;
    count += pred.numel();
  }
  return total / static_cast<double>(count);
}

TrainHistory train(model::SeismoNet<float>& model, const std::vector<Window>& train_set,
                   const std::vector<Window>& val_set, const TrainConfig& config,
                   const std::function<void(const EpochRecord&)>& on_epoch) {
  config.validate();
  if (train_set.empty()) throw InsufficientDataError("train: empty training set");
  const std::size_t input_len = model.config().input_len;
  check_windows(train_set, input_len, "training");
  check_windows(val_set, input_len, "validation");
  if (config.output_dir) std::filesystem::create_directories(*config.output_dir);

  TrainHistory history;
  double best_val = std::numeric_limits<double>::infinity();
  std::vector<std::size_t> order(train_set.size());
  std::iota(order.begin(), order.end(), 0);
  model.params().zero_grad();

  for (std::size_t e = 0; e < config.epochs; ++e) {
    const double lr = nn::lr_schedule(e, config.lr0, config.schedule_step, config.schedule_factor);
    if (config.shuffle) {
      std::mt19937_64 rng(model::derive_seed(config.seed, e));
      std::shuffle(order.begin(), order.end(), rng);
    }
    model.set_training(true);
    double epoch_total = 0.0;
    std::size_t epoch_count = 0;
    std::size_t batch_index = 0;
    for (std::size_t lo = 0; lo < order.size(); lo += config.batch_size, ++batch_index) {
      const auto batch =
          slice(train_set, std::span(order).subspan(lo, std::min(config.batch_size, order.size() - lo)));
      const auto pred = model.forward(stack_inputs(batch));
      const auto loss = nn::smooth_l1_loss(pred, stack_targets(batch), config.reduction);
      const std::string where = "epoch " + std::to_string(e + 1) + ", batch " + std::to_string(batch_index);
      if (!std::isfinite(loss.value)) throw NumericError("non-finite training loss at " + where);
      model.backward(loss.grad);
      try {
        nn::sgd_step(model.params(), lr);
      } catch (const NumericError& err) {
        throw NumericError(std::string(err.what()) + " at " + where);
      }
      double per_sample_sum = loss.value;
      if (config.reduction == nn::Reduction::Mean) per_sample_sum *= static_cast<double>(pred.numel());
      if (config.reduction == nn::Reduction::WindowSum) per_sample_sum *= static_cast<double>(pred.batch());
      epoch_total += per_sample_sum;
      epoch_count += pred.numel();
    }
    model.set_training(false);

    EpochRecord record{e + 1, lr, epoch_total / static_cast<double>(epoch_count), std::nullopt};
    if (!val_set.empty()) record.val_loss = evaluate_loss(model, val_set, config.batch_size);
    history.epochs.push_back(record);

    if (record.val_loss && *record.val_loss < best_val) {
      best_val = *record.val_loss;
      history.best_epoch = record.epoch;
      if (config.output_dir) model::save_checkpoint(model, *config.output_dir / "best.smn", record.epoch);
    }
    if (config.output_dir && config.checkpoint_every && record.epoch % config.checkpoint_every == 0) {
      model::save_checkpoint(model, *config.output_dir / ("epoch_" + std::to_string(record.epoch) + ".smn"),
                             record.epoch);
    }
    if (on_epoch) on_epoch(record);
  }

  if (config.output_dir) {
    model::save_checkpoint(model, *config.output_dir / "model.smn", config.epochs);
    write_history_csv(history, *config.output_dir / "history.csv");
  }
  return history;
}

void write_history_csv(const TrainHistory& history, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw std::runtime_error("cannot open " + path.string() + " for writing");
  out << "epoch,lr,train_loss,val_loss\n";
  for (const auto& r : history.epochs) {
    out << r.epoch << ',' << shortest(r.lr) << ',' << shortest(r.train_loss) << ','
        << (r.val_loss ? shortest(*r.val_loss) : std::string()) << '\n';
  }
  if (!out) throw std::runtime_error("write failed: " + path.string());
}

}  // namespace seismonet::train
