#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <variant>
#include <vector>

#include "mcn/layers.hpp"
#include "mcn/rng.hpp"
#include "mcn/tensor.hpp"

namespace mcn {

using Layer = std::variant<InputLayer, Conv2D<float>, MaxPool2D, Dense<float>, Dropout, Flatten>;

struct ModelLayer {
  Layer layer;
  bool trainable = true;
};

/// Ordered sequence of named layers. The last layer must produce
/// [batch, class_count]; builders in vgg.hpp guarantee this.
struct Model {
  std::vector<ModelLayer> layers;
  Shape input_shape;  // per-sample [h, w, c]
  std::int64_t class_count = 0;
};

/// Sentinel for set_trainable_boundary: freeze every layer.
inline constexpr std::string_view kAllFrozen = "ALL_FROZEN";

const std::string& layer_name(const Layer& layer);

/// Index of the named layer, or -1 when absent.
std::int64_t find_layer(const Model& model, std::string_view name);

/// Freezes every layer strictly before `first_trainable`; that layer and all
/// following ones become trainable. kAllFrozen freezes everything.
void set_trainable_boundary(Model& model, std::string_view first_trainable);

/// Pointers to the parameters of trainable layers, in layer order with
/// weights before bias. Gradients from model_backward align with this list.
std::vector<Tensor*> trainable_parameters(Model& model);

/// All parameters as ("<layer name>/weights" | "<layer name>/bias", tensor).
std::vector<std::pair<std::string, Tensor*>> named_parameters(Model& model);
std::vector<std::pair<std::string, const Tensor*>> named_parameters(const Model& model);

/// Total element count over all parameters.
std::int64_t parameter_count(const Model& model);

/// Per-layer saved state for one forward call.
struct LayerContext {
  std::variant<std::monostate, Conv2DContext<float>, MaxPool2DContext, DenseContext<float>,
               DropoutContext<float>, FlattenContext>
      op;
  std::optional<ReluContext<float>> relu;
  std::optional<SoftmaxContext<float>> softmax;
};

struct ForwardResult {
  Tensor output;  // [batch, class_count] probabilities
  std::vector<LayerContext> contexts;
};

/// Runs the model over a [batch, h, w, c] tensor. With training=true, dropout
/// draws from `dropout_rng`: either one stream consumed in flat order or one
/// stream per batch row. With training=false the pass is a pure function of
/// (weights, batch) and `dropout_rng` may be empty.
ForwardResult model_forward(const Model& model, Tensor batch, bool training,
                            std::span<RngStream> dropout_rng = {});

/// Reverse pass. `logit_grad` is the loss gradient with respect to the final
/// layer's pre-softmax logits (the fused softmax+cross-entropy form), so the
/// final softmax activation is not re-differentiated. Returns gradients
/// aligned with trainable_parameters(model); layers below the lowest
/// trainable parameterized layer are skipped entirely.
std::vector<Tensor> model_backward(const Model& model, const Tensor& logit_grad,
                                   std::vector<LayerContext>& contexts);

struct Prediction {
  std::int64_t label = 0;
  Tensor probs;  // [class_count]
};

/// Single-image inference; ties resolve to the lowest class index.
Prediction predict(const Model& model, const Tensor& image);

}  // namespace mcn
