#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>

#include <CLI11.hpp>

#include "mcn/dataset.hpp"
#include "mcn/error.hpp"
#include "mcn/image.hpp"
#include "mcn/keypoints.hpp"
#include "mcn/model.hpp"
#include "mcn/rng.hpp"
#include "mcn/trainer.hpp"
#include "mcn/vgg.hpp"
#include "mcn/weights_io.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitUsage = 1;
constexpr int kExitData = 2;
constexpr int kExitNumeric = 3;

struct ArchInfo {
  mcn::Shape input_shape;
};

ArchInfo arch_info(const std::string& arch) {
  if (arch == "vgg16") return {mcn::Shape{224, 224, 3}};
  if (arch == "vgg-mini") return {mcn::Shape{32, 32, 3}};
  throw mcn::ValueError("unknown architecture '" + arch + "'");
}

mcn::Model build_arch(const std::string& arch, const mcn::Shape& input_shape,
                      std::int64_t class_count, std::uint64_t seed) {
  if (arch == "vgg16") return mcn::build_vgg16(input_shape, class_count, seed);
  return mcn::build_vgg_mini(input_shape, class_count, seed);
}

std::string read_text_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw mcn::DataError("cannot open '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

mcn::LoadResult load_data_for(const std::string& data_dir, const mcn::Shape& input_shape) {
  mcn::LoadOptions options;
  options.target_h = input_shape[0];
  options.target_w = input_shape[1];
  mcn::LoadResult result = mcn::load_dataset(data_dir, options);
  if (!result.failures.empty()) {
    std::cerr << mcn::failure_report(result.failures);
  }
  if (result.dataset.samples.empty()) {
    throw mcn::DataError("no decodable images under '" + data_dir + "'");
  }
  return result;
}

// Class count from a weight file's classification head, so predict/eval can
// rebuild the right architecture without a dataset.
std::int64_t class_count_from_weights(const std::string& path) {
  for (const auto& [name, shape] : mcn::read_weight_shapes(path)) {
    if (name == "predictions/bias") return shape[0];
  }
  throw mcn::DataError("'" + path + "' has no predictions/bias entry");
}

int run_train(const std::string& data_dir, const std::string& out_path,
              const std::string& init_path, const std::string& arch,
              const mcn::TrainConfig& config, const std::string& curves_path) {
  const ArchInfo info = arch_info(arch);
  mcn::LoadResult loaded = load_data_for(data_dir, info.input_shape);
  mcn::Model model =
      build_arch(arch, info.input_shape, loaded.dataset.class_count, config.seed);
  if (!init_path.empty()) {
    const mcn::LoadReport report = mcn::load_weights(model, init_path, /*strict=*/false);
    for (const auto& [name, reason] : report.skipped) {
      std::cerr << "init: skipped " << name << " (" << reason << ")\n";
    }
    for (const auto& name : report.missing) {
      std::cerr << "init: " << name << " not in file, keeping fresh initialization\n";
    }
  }
  const mcn::TrainResult result =
      mcn::train(model, loaded.dataset, config, [&](const mcn::EpochRecord& r) {
        std::printf("epoch %lld/%lld  train_loss=%.6f train_acc=%.4f  val_loss=%.6f val_acc=%.4f  (%.1fs)\n",
                    static_cast<long long>(r.epoch), static_cast<long long>(config.epochs),
                    r.train_loss, r.train_acc, r.val_loss, r.val_acc, r.seconds);
        std::fflush(stdout);
      });
  mcn::save_weights(model, out_path);
  std::printf("saved weights to %s\n", out_path.c_str());
  if (!curves_path.empty()) {
    mcn::export_curves(result.report, curves_path);
    std::printf("saved curves to %s\n", curves_path.c_str());
  }
  return kExitOk;
}

int run_eval(const std::string& model_path, const std::string& data_dir,
             const std::string& arch) {
  const ArchInfo info = arch_info(arch);
  const std::int64_t classes = class_count_from_weights(model_path);
  mcn::Model model = build_arch(arch, info.input_shape, classes, /*seed=*/0);
  mcn::load_weights(model, model_path, /*strict=*/true);
  mcn::LoadResult loaded = load_data_for(data_dir, info.input_shape);
  if (loaded.dataset.class_count != classes) {
    throw mcn::DataError("dataset has " + std::to_string(loaded.dataset.class_count) +
                         " classes but the model was trained with " + std::to_string(classes));
  }
  const mcn::EvalResult result = mcn::evaluate(model, loaded.dataset);
  std::printf("loss=%.6f accuracy=%.4f over %zu samples\n", result.loss, result.accuracy,
              loaded.dataset.samples.size());
  for (std::size_t c = 0; c < result.confusion.size(); ++c) {
    const mcn::ConfusionCounts& cc = result.confusion[c];
    std::printf("class %-8s tp=%-5lld fp=%-5lld fn=%-5lld tn=%-5lld\n",
                loaded.dataset.class_names[c].c_str(), static_cast<long long>(cc.tp),
                static_cast<long long>(cc.fp), static_cast<long long>(cc.fn),
                static_cast<long long>(cc.tn));
  }
  return kExitOk;
}

int run_predict(const std::string& model_path, const std::string& image_path,
                const std::string& keypoints_path, double margin, const std::string& arch) {
  const ArchInfo info = arch_info(arch);
  const std::int64_t classes = class_count_from_weights(model_path);
  mcn::Model model = build_arch(arch, info.input_shape, classes, /*seed=*/0);
  mcn::load_weights(model, model_path, /*strict=*/true);
  mcn::Tensor image = mcn::normalize(mcn::read_ppm_file(image_path));
  if (!keypoints_path.empty()) {
    const mcn::KeypointSet kps = mcn::read_keypoints_file(keypoints_path);
    image = mcn::crop_from_keypoints(image, kps, margin, info.input_shape[0],
                                     info.input_shape[1]);
  } else {
    image = mcn::resize(image, info.input_shape[0], info.input_shape[1],
                        mcn::Interpolation::kNearest);
  }
  const mcn::Prediction pred = mcn::predict(model, image);
  std::printf("label=%lld\n", static_cast<long long>(pred.label));
  for (std::int64_t k = 0; k < pred.probs.numel(); ++k) {
    std::printf("p[%lld]=%.6f\n", static_cast<long long>(k), pred.probs[k]);
  }
  return kExitOk;
}

int run_augment_preview(const std::string& image_path, const std::string& out_dir,
                        std::uint64_t seed) {
  const mcn::Tensor image = mcn::normalize(mcn::read_ppm_file(image_path));
  const std::int64_t h = image.extent(0), w = image.extent(1);
  std::filesystem::create_directories(out_dir);
  const mcn::AugmentConfig config;  // stock ranges
  mcn::RngStream rng(mcn::derive_seed(seed, "augment-preview"));
  const std::int64_t max_dx = static_cast<std::int64_t>(config.max_shift_frac * w);
  const std::int64_t max_dy = static_cast<std::int64_t>(config.max_shift_frac * h);
  const std::int64_t dx = max_dx > 0 ? rng.uniform_int(-max_dx, max_dx) : 0;
  const std::int64_t dy = max_dy > 0 ? rng.uniform_int(-max_dy, max_dy) : 0;
  const double angle = rng.uniform(-config.max_rotate_deg, config.max_rotate_deg);
  const std::filesystem::path dir(out_dir);
  mcn::write_ppm_file((dir / "hflip.ppm").string(), mcn::hflip(image));
  mcn::write_ppm_file((dir / "shift_h.ppm").string(),
                      mcn::shift(image, dx, 0, config.fill_value));
  mcn::write_ppm_file((dir / "shift_v.ppm").string(),
                      mcn::shift(image, 0, dy, config.fill_value));
  mcn::write_ppm_file((dir / "rotate.ppm").string(),
                      mcn::rotate(image, angle, config.interpolation, config.fill_value));
  std::printf("wrote hflip.ppm, shift_h.ppm (dx=%lld), shift_v.ppm (dy=%lld), rotate.ppm (%.2f deg) to %s\n",
              static_cast<long long>(dx), static_cast<long long>(dy), angle, out_dir.c_str());
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"mini-convnet: train, evaluate, and run a small CNN gesture classifier"};
  app.require_subcommand(1);

  const auto positive_real = [](const std::string& value) -> std::string {
    try {
      if (std::stod(value) > 0.0) return {};
    } catch (...) {
    }
    return "must be a positive real";
  };
  const auto open_unit_interval = [](const std::string& value) -> std::string {
    try {
      const double v = std::stod(value);
      if (v > 0.0 && v < 1.0) return {};
    } catch (...) {
    }
    return "must lie strictly between 0 and 1";
  };

  // train
  auto* train_cmd = app.add_subcommand("train", "Train a model on a directory-per-class dataset");
  std::string train_data, train_out, train_init, train_curves, train_config_path;
  std::string train_arch = "vgg-mini";
  std::string train_freeze;
  std::int64_t train_epochs = -1, train_batch = -1;
  double train_lr = -1.0, train_val_split = -1.0;
  std::uint64_t train_seed = 0;
  bool train_seed_set = false;
  train_cmd->add_option("--data", train_data, "Dataset root directory")->required();
  train_cmd->add_option("--out", train_out, "Output weight file (.mcw)")->required();
  train_cmd->add_option("--init", train_init, "Initial weights to fine-tune from (.mcw)");
  train_cmd->add_option("--arch", train_arch, "Architecture")
      ->check(CLI::IsMember({"vgg16", "vgg-mini"}));
  train_cmd->add_option("--freeze", train_freeze,
                        "First trainable layer name (or ALL_FROZEN)");
  train_cmd->add_option("--epochs", train_epochs, "Training epochs")
      ->check(CLI::PositiveNumber);
  train_cmd->add_option("--batch", train_batch, "Batch size")->check(CLI::PositiveNumber);
  train_cmd->add_option("--lr", train_lr, "Learning rate")->check(positive_real);
  train_cmd->add_option("--seed", train_seed, "Master RNG seed")
      ->each([&](const std::string&) { train_seed_set = true; });
  train_cmd->add_option("--val-split", train_val_split, "Validation fraction")
      ->check(open_unit_interval);
  train_cmd->add_option("--curves", train_curves, "Write per-epoch CSV curves here");
  train_cmd->add_option("--config", train_config_path,
                        "JSON config file; explicit flags override its values");

  // eval
  auto* eval_cmd = app.add_subcommand("eval", "Evaluate a trained model on a dataset");
  std::string eval_model, eval_data;
  std::string eval_arch = "vgg-mini";
  eval_cmd->add_option("--model", eval_model, "Weight file (.mcw)")->required();
  eval_cmd->add_option("--data", eval_data, "Dataset root directory")->required();
  eval_cmd->add_option("--arch", eval_arch, "Architecture")
      ->check(CLI::IsMember({"vgg16", "vgg-mini"}));

  // predict
  auto* predict_cmd = app.add_subcommand("predict", "Classify a single image");
  std::string predict_model, predict_image, predict_keypoints;
  std::string predict_arch = "vgg-mini";
  double predict_margin = 0.25;
  predict_cmd->add_option("--model", predict_model, "Weight file (.mcw)")->required();
  predict_cmd->add_option("--image", predict_image, "Input image (.ppm)")->required();
  predict_cmd->add_option("--keypoints", predict_keypoints,
                          "Hand-landmark JSON; crops around the points first");
  predict_cmd->add_option("--margin", predict_margin, "Crop margin fraction")
      ->check(CLI::NonNegativeNumber);
  predict_cmd->add_option("--arch", predict_arch, "Architecture")
      ->check(CLI::IsMember({"vgg16", "vgg-mini"}));

  // augment-preview
  auto* preview_cmd =
      app.add_subcommand("augment-preview", "Write the four augmentation outputs for a sample");
  std::string preview_image, preview_out;
  std::uint64_t preview_seed = 0;
  preview_cmd->add_option("--image", preview_image, "Input image (.ppm)")->required();
  preview_cmd->add_option("--out", preview_out, "Output directory")->required();
  preview_cmd->add_option("--seed", preview_seed, "RNG seed")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (*train_cmd) {
      mcn::TrainConfig config;
      if (!train_config_path.empty()) {
        config = mcn::train_config_from_json(read_text_file(train_config_path), config);
      }
      if (train_epochs > 0) config.epochs = train_epochs;
      if (train_batch > 0) config.batch_size = train_batch;
      if (train_lr > 0.0) config.lr = train_lr;
      if (train_seed_set) config.seed = train_seed;
      if (train_val_split > 0.0) config.val_split = train_val_split;
      if (!train_freeze.empty()) config.freeze_boundary = train_freeze;
      return run_train(train_data, train_out, train_init, train_arch, config, train_curves);
    }
    if (*eval_cmd) {
      return run_eval(eval_model, eval_data, eval_arch);
    }
    if (*predict_cmd) {
      return run_predict(predict_model, predict_image, predict_keypoints, predict_margin,
                         predict_arch);
    }
    if (*preview_cmd) {
      return run_augment_preview(preview_image, preview_out, preview_seed);
    }
  } catch (const mcn::NumericError& e) {
    std::cerr << "numeric failure: " << e.what() << "\n";
    return kExitNumeric;
  } catch (const mcn::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitData;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitData;
  }
  return kExitOk;
}
