#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <string>
#include <utility>
#include <vector>

#include "mcn/augment.hpp"
#include "mcn/dataset.hpp"
#include "mcn/metrics.hpp"
#include "mcn/model.hpp"
#include "mcn/optimizer.hpp"

namespace mcn {

struct TrainConfig {
  std::int64_t epochs = 30;
  std::int64_t batch_size = 32;
  double lr = 2e-5;
  double beta = 0.9;
  double epsilon = 1e-8;
  std::string freeze_boundary;  // empty = leave flags as-is; "ALL_FROZEN" freezes everything
  bool augment_enabled = true;
  AugmentConfig augment;
  std::uint64_t seed = 0;
  double val_split = 0.2;
};

struct EpochRecord {
  std::int64_t epoch = 0;  // 1-based
  double train_loss = 0.0;
  double train_acc = 0.0;
  double val_loss = 0.0;
  double val_acc = 0.0;
  double seconds = 0.0;  // wall clock, excluded from determinism comparisons
};

struct TrainReport {
  std::vector<EpochRecord> epochs;
  const EpochRecord& final_epoch() const { return epochs.back(); }
};

struct EvalResult {
  double loss = 0.0;
  double accuracy = 0.0;
  std::vector<ConfusionCounts> confusion;
};

struct TrainResult {
  RmspropState state;
  TrainReport report;
};

/// Stratified split: per class, ceil(n_c * val_frac) samples go to validation,
/// chosen by a seeded shuffle; both halves keep the input's sample order.
std::pair<Dataset, Dataset> split(const Dataset& data, double val_frac, std::uint64_t seed);

/// Runs the full recipe: internal stratified split, per-epoch seeded shuffle,
/// per-(epoch,sample) augmentation and dropout streams, categorical
/// cross-entropy, RMSprop over the trainable parameters, and a full
/// validation pass per epoch. Train-side metrics are the running averages over
/// the training batches (dropout active); validation runs with
/// training=false. The model is updated in place. `on_epoch`, when set, fires
/// after each epoch's record is appended.
TrainResult train(Model& model, const Dataset& data, const TrainConfig& config,
                  const std::function<void(const EpochRecord&)>& on_epoch = {});

/// Deterministic inference-mode pass over the whole dataset.
EvalResult evaluate(const Model& model, const Dataset& data, std::int64_t batch_size = 32);

/// CSV: header epoch,train_loss,train_acc,val_loss,val_acc and one row per
/// epoch, reals with 9 significant digits.
void export_curves(const TrainReport& report, std::ostream& out);
void export_curves(const TrainReport& report, const std::string& path);

/// Parses a JSON object mirroring TrainConfig field-for-field (augment is a
/// nested object; interpolation is "nearest" or "bilinear"). Unknown keys are
/// rejected. Fields absent from the JSON keep the defaults passed in `base`.
TrainConfig train_config_from_json(const std::string& text, TrainConfig base = {});

}  // namespace mcn
