#include "mcn/trainer.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <ostream>
#include <sstream>

#include <json.hpp>

#include "mcn/error.hpp"
#include "mcn/loss.hpp"
#include "mcn/rng.hpp"

namespace mcn {

namespace {

// Ceiling of n*frac computed with a tiny slack so that values like 5*0.2,
// which land epsilon above an integer in binary floating point, do not get
// bumped to the next integer.
std::int64_t ceil_count(std::int64_t n, double frac) {
  return static_cast<std::int64_t>(std::ceil(static_cast<double>(n) * frac - 1e-9));
}

Tensor stack_batch(const Dataset& data, std::span<const std::int64_t> indices,
                   const Shape& sample_shape) {
  const std::int64_t b = static_cast<std::int64_t>(indices.size());
  Tensor batch(Shape{b, sample_shape[0], sample_shape[1], sample_shape[2]});
  const std::int64_t per = sample_shape.numel();
  for (std::int64_t i = 0; i < b; ++i) {
    const Tensor& img = data.samples[static_cast<std::size_t>(indices[i])].image;
    if (img.shape() != sample_shape) {
      throw ShapeError("sample " + data.samples[static_cast<std::size_t>(indices[i])].source_path +
                       " has shape " + img.shape().str() + ", expected " + sample_shape.str());
    }
    std::copy(img.data(), img.data() + per, batch.data() + i * per);
  }
  return batch;
}

}  // namespace

std::pair<Dataset, Dataset> split(const Dataset& data, double val_frac, std::uint64_t seed) {
  if (!(val_frac > 0.0 && val_frac < 1.0)) {
    throw ValueError("val_frac must lie strictly between 0 and 1");
  }
  if (data.samples.empty()) {
    throw DataError("cannot split an empty dataset");
  }
  std::vector<std::vector<std::int64_t>> per_class(
      static_cast<std::size_t>(data.class_count));
  for (std::size_t i = 0; i < data.samples.size(); ++i) {
    const std::int64_t label = data.samples[i].label;
    if (label < 0 || label >= data.class_count) {
      throw DataError("sample label " + std::to_string(label) + " out of range");
    }
    per_class[static_cast<std::size_t>(label)].push_back(static_cast<std::int64_t>(i));
  }
  std::vector<bool> in_val(data.samples.size(), false);
  for (std::size_t c = 0; c < per_class.size(); ++c) {
    auto& indices = per_class[c];
    if (indices.empty()) continue;
    if (indices.size() < 2) {
      throw DataError("class '" + data.class_names[c] + "' has fewer than 2 samples");
    }
    RngStream rng(derive_seed(seed, "split", static_cast<std::uint64_t>(c)));
    rng.shuffle(indices);
    const std::int64_t take = ceil_count(static_cast<std::int64_t>(indices.size()), val_frac);
    for (std::int64_t i = 0; i < take; ++i) {
      in_val[static_cast<std::size_t>(indices[static_cast<std::size_t>(i)])] = true;
    }
  }
  Dataset train_ds, val_ds;
  train_ds.class_names = val_ds.class_names = data.class_names;
  train_ds.class_count = val_ds.class_count = data.class_count;
  for (std::size_t i = 0; i < data.samples.size(); ++i) {
    (in_val[i] ? val_ds : train_ds).samples.push_back(data.samples[i]);
  }
  return {std::move(train_ds), std::move(val_ds)};
}

EvalResult evaluate(const Model& model, const Dataset& data, std::int64_t batch_size) {
  if (data.samples.empty()) {
    throw ValueError("evaluate: empty dataset");
  }
  if (data.class_count != model.class_count) {
    throw ValueError("evaluate: dataset has " + std::to_string(data.class_count) +
                     " classes but the model expects " + std::to_string(model.class_count));
  }
  if (batch_size < 1) {
    throw ValueError("evaluate: batch size must be >= 1");
  }
  const Shape& sample_shape = data.samples[0].image.shape();
  const std::int64_t n = static_cast<std::int64_t>(data.samples.size());
  std::vector<std::int64_t> pred_labels;
  std::vector<std::int64_t> true_labels;
  pred_labels.reserve(static_cast<std::size_t>(n));
  true_labels.reserve(static_cast<std::size_t>(n));
  double loss_sum = 0.0;
  for (std::int64_t start = 0; start < n; start += batch_size) {
    const std::int64_t bs = std::min(batch_size, n - start);
    std::vector<std::int64_t> indices(static_cast<std::size_t>(bs));
    std::vector<std::int64_t> labels(static_cast<std::size_t>(bs));
    for (std::int64_t i = 0; i < bs; ++i) {
      indices[static_cast<std::size_t>(i)] = start + i;
      labels[static_cast<std::size_t>(i)] =
          data.samples[static_cast<std::size_t>(start + i)].label;
    }
    Tensor batch = stack_batch(data, indices, sample_shape);
    ForwardResult fwd = model_forward(model, std::move(batch), /*training=*/false);
    for (std::int64_t i = 0; i < fwd.output.numel(); ++i) {
      if (!std::isfinite(fwd.output[i])) {
        throw NumericError("evaluate: non-finite network output at sample " +
                           std::to_string(start + i / model.class_count));
      }
    }
    const Tensor targets = one_hot<float>(labels, model.class_count);
    const LossValue loss = categorical_cross_entropy(fwd.output, targets);
    loss_sum += loss.value * static_cast<double>(bs);
    const std::vector<std::int64_t> preds = argmax_rows(fwd.output);
    pred_labels.insert(pred_labels.end(), preds.begin(), preds.end());
    true_labels.insert(true_labels.end(), labels.begin(), labels.end());
  }
  EvalResult result;
  result.loss = loss_sum / static_cast<double>(n);
  result.accuracy = accuracy(pred_labels, true_labels);
  result.confusion = confusion_counts(pred_labels, true_labels, model.class_count);
  return result;
}

TrainResult train(Model& model, const Dataset& data, const TrainConfig& config,
                  const std::function<void(const EpochRecord&)>& on_epoch) {
  if (config.epochs < 1) throw ValueError("train: epochs must be >= 1");
  if (config.batch_size < 1) throw ValueError("train: batch size must be >= 1");
  if (data.class_count != model.class_count) {
    throw ValueError("train: dataset has " + std::to_string(data.class_count) +
                     " classes but the model expects " + std::to_string(model.class_count));
  }
  validate_augment_config(config.augment);

  auto [train_ds, val_ds] = split(data, config.val_split, derive_seed(config.seed, "split"));
  if (train_ds.samples.empty()) {
    throw DataError("train: the split left no training samples");
  }
  if (!config.freeze_boundary.empty()) {
    set_trainable_boundary(model, config.freeze_boundary);
  }
  const std::vector<Tensor*> params = trainable_parameters(model);
  RmspropState state = rmsprop_init(std::span<Tensor* const>(params.data(), params.size()),
                                    config.lr, config.beta, config.epsilon);

  const Shape& sample_shape = train_ds.samples[0].image.shape();
  const std::int64_t n = static_cast<std::int64_t>(train_ds.samples.size());
  TrainResult result;
  result.report.epochs.reserve(static_cast<std::size_t>(config.epochs));

  for (std::int64_t epoch = 1; epoch <= config.epochs; ++epoch) {
    const auto t0 = std::chrono::steady_clock::now();
    std::vector<std::int64_t> order(static_cast<std::size_t>(n));
    for (std::int64_t i = 0; i < n; ++i) order[static_cast<std::size_t>(i)] = i;
    RngStream shuffle_rng(
        derive_seed(config.seed, "shuffle", static_cast<std::uint64_t>(epoch)));
    shuffle_rng.shuffle(order);

    double loss_sum = 0.0;
    std::int64_t correct = 0;
    for (std::int64_t start = 0; start < n; start += config.batch_size) {
      const std::int64_t bs = std::min(config.batch_size, n - start);
      std::vector<std::int64_t> labels(static_cast<std::size_t>(bs));
      Tensor batch(Shape{bs, sample_shape[0], sample_shape[1], sample_shape[2]});
      const std::int64_t per = sample_shape.numel();
      std::vector<RngStream> dropout_rng;
      dropout_rng.reserve(static_cast<std::size_t>(bs));
      for (std::int64_t i = 0; i < bs; ++i) {
        const std::int64_t idx = order[static_cast<std::size_t>(start + i)];
        const Sample& sample = train_ds.samples[static_cast<std::size_t>(idx)];
        if (sample.image.shape() != sample_shape) {
          throw ShapeError("sample " + sample.source_path + " has shape " +
                           sample.image.shape().str() + ", expected " + sample_shape.str());
        }
        Tensor img = sample.image;
        if (config.augment_enabled) {
          RngStream aug_rng(derive_seed(config.seed, "augment",
                                        static_cast<std::uint64_t>(epoch),
                                        static_cast<std::uint64_t>(idx)));
          img = random_augment(img, config.augment, aug_rng);
        }
        std::copy(img.data(), img.data() + per, batch.data() + i * per);
        labels[static_cast<std::size_t>(i)] = sample.label;
        dropout_rng.emplace_back(derive_seed(config.seed, "dropout",
                                             static_cast<std::uint64_t>(epoch),
                                             static_cast<std::uint64_t>(idx)));
      }
      ForwardResult fwd = model_forward(model, std::move(batch), /*training=*/true,
                                        std::span<RngStream>(dropout_rng));
      for (std::int64_t i = 0; i < fwd.output.numel(); ++i) {
        if (!std::isfinite(fwd.output[i])) {
          throw NumericError("training aborted: non-finite network output at epoch " +
                             std::to_string(epoch) + ", batch starting at sample " +
                             std::to_string(start));
        }
      }
      const Tensor targets = one_hot<float>(labels, model.class_count);
      const LossValue loss = categorical_cross_entropy(fwd.output, targets);
      if (!std::isfinite(loss.value)) {
        throw NumericError("training aborted: non-finite loss at epoch " +
                           std::to_string(epoch) + ", batch starting at sample " +
                           std::to_string(start));
      }
      loss_sum += loss.value * static_cast<double>(bs);
      const std::vector<std::int64_t> preds = argmax_rows(fwd.output);
      for (std::int64_t i = 0; i < bs; ++i) {
        if (preds[static_cast<std::size_t>(i)] == labels[static_cast<std::size_t>(i)]) {
          ++correct;
        }
      }
      if (!params.empty()) {
        const std::vector<Tensor> grads = model_backward(model, loss.logit_grad, fwd.contexts);
        rmsprop_step(std::span<Tensor* const>(params.data(), params.size()),
                     std::span<const Tensor>(grads.data(), grads.size()), state);
      }
    }

    const EvalResult val = evaluate(model, val_ds, config.batch_size);
    EpochRecord record;
    record.epoch = epoch;
    record.train_loss = loss_sum / static_cast<double>(n);
    record.train_acc = static_cast<double>(correct) / static_cast<double>(n);
    record.val_loss = val.loss;
    record.val_acc = val.accuracy;
    record.seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    result.report.epochs.push_back(record);
    if (on_epoch) on_epoch(record);
  }
  result.state = std::move(state);
  return result;
}

void export_curves(const TrainReport& report, std::ostream& out) {
  if (report.epochs.empty()) {
    throw ValueError("export_curves: empty report");
  }
  out << "epoch,train_loss,train_acc,val_loss,val_acc\n";
  char buf[160];
  for (const EpochRecord& r : report.epochs) {
    std::snprintf(buf, sizeof(buf), "%lld,%.9g,%.9g,%.9g,%.9g\n",
                  static_cast<long long>(r.epoch), r.train_loss, r.train_acc, r.val_loss,
                  r.val_acc);
    out << buf;
  }
}

void export_curves(const TrainReport& report, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot open '" + path + "' for writing");
  export_curves(report, out);
  if (!out) throw DataError("failed writing '" + path + "'");
}

TrainConfig train_config_from_json(const std::string& text, TrainConfig base) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(std::string("config: malformed JSON: ") + e.what());
  }
  if (!doc.is_object()) {
    throw FormatError("config: expected a JSON object");
  }
  TrainConfig config = std::move(base);
  try {
    for (const auto& [key, value] : doc.items()) {
      if (key == "epochs") {
        config.epochs = value.get<std::int64_t>();
      } else if (key == "batch_size") {
        config.batch_size = value.get<std::int64_t>();
      } else if (key == "lr") {
        config.lr = value.get<double>();
      } else if (key == "beta") {
        config.beta = value.get<double>();
      } else if (key == "epsilon") {
        config.epsilon = value.get<double>();
      } else if (key == "freeze_boundary") {
        config.freeze_boundary = value.get<std::string>();
      } else if (key == "augment_enabled") {
        config.augment_enabled = value.get<bool>();
      } else if (key == "seed") {
        config.seed = value.get<std::uint64_t>();
      } else if (key == "val_split") {
        config.val_split = value.get<double>();
      } else if (key == "augment") {
        if (!value.is_object()) throw FormatError("config: augment must be an object");
        for (const auto& [akey, avalue] : value.items()) {
          if (akey == "flip_prob") {
            config.augment.flip_prob = avalue.get<double>();
          } else if (akey == "max_shift_frac") {
            config.augment.max_shift_frac = avalue.get<double>();
          } else if (akey == "max_rotate_deg") {
            config.augment.max_rotate_deg = avalue.get<double>();
          } else if (akey == "fill_value") {
            config.augment.fill_value = avalue.get<float>();
          } else if (akey == "interpolation") {
            const std::string name = avalue.get<std::string>();
            if (name == "nearest") {
              config.augment.interpolation = Interpolation::kNearest;
            } else if (name == "bilinear") {
              config.augment.interpolation = Interpolation::kBilinear;
            } else {
              throw FormatError("config: unknown interpolation '" + name + "'");
            }
          } else {
            throw FormatError("config: unknown augment key '" + akey + "'");
          }
        }
      } else {
        throw FormatError("config: unknown key '" + key + "'");
      }
    }
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(std::string("config: ") + e.what());
  }
  return config;
}

}  // namespace mcn
