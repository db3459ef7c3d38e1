#include "mcn/model.hpp"

#include <algorithm>

#include "mcn/error.hpp"
#include "mcn/metrics.hpp"

namespace mcn {

namespace {

struct NameVisitor {
  template <typename L>
  const std::string& operator()(const L& layer) const {
    return layer.name;
  }
};

bool has_parameters(const Layer& layer) {
  return std::holds_alternative<Conv2D<float>>(layer) ||
         std::holds_alternative<Dense<float>>(layer);
}

Activation layer_activation(const Layer& layer) {
  if (const auto* conv = std::get_if<Conv2D<float>>(&layer)) return conv->activation;
  if (const auto* dense = std::get_if<Dense<float>>(&layer)) return dense->activation;
  return Activation::kNone;
}

}  // namespace

const std::string& layer_name(const Layer& layer) { return std::visit(NameVisitor{}, layer); }

std::int64_t find_layer(const Model& model, std::string_view name) {
  for (std::size_t i = 0; i < model.layers.size(); ++i) {
    if (layer_name(model.layers[i].layer) == name) return static_cast<std::int64_t>(i);
  }
  return -1;
}

void set_trainable_boundary(Model& model, std::string_view first_trainable) {
  if (first_trainable == kAllFrozen) {
    for (auto& l : model.layers) l.trainable = false;
    return;
  }
  const std::int64_t idx = find_layer(model, first_trainable);
  if (idx < 0) {
    throw ValueError("unknown layer name '" + std::string(first_trainable) + "'");
  }
  for (std::size_t i = 0; i < model.layers.size(); ++i) {
    model.layers[i].trainable = static_cast<std::int64_t>(i) >= idx;
  }
}

std::vector<Tensor*> trainable_parameters(Model& model) {
  std::vector<Tensor*> out;
  for (auto& ml : model.layers) {
    if (!ml.trainable) continue;
    if (auto* conv = std::get_if<Conv2D<float>>(&ml.layer)) {
      out.push_back(&conv->weights);
      out.push_back(&conv->bias);
    } else if (auto* dense = std::get_if<Dense<float>>(&ml.layer)) {
      out.push_back(&dense->weights);
      out.push_back(&dense->bias);
    }
  }
  return out;
}

namespace {

template <typename ModelT, typename TensorPtr>
std::vector<std::pair<std::string, TensorPtr>> named_parameters_impl(ModelT& model) {
  std::vector<std::pair<std::string, TensorPtr>> out;
  for (auto& ml : model.layers) {
    if (auto* conv = std::get_if<Conv2D<float>>(&ml.layer)) {
      out.emplace_back(conv->name + "/weights", &conv->weights);
      out.emplace_back(conv->name + "/bias", &conv->bias);
    } else if (auto* dense = std::get_if<Dense<float>>(&ml.layer)) {
      out.emplace_back(dense->name + "/weights", &dense->weights);
      out.emplace_back(dense->name + "/bias", &dense->bias);
    }
  }
  return out;
}

}  // namespace

std::vector<std::pair<std::string, Tensor*>> named_parameters(Model& model) {
  return named_parameters_impl<Model, Tensor*>(model);
}

std::vector<std::pair<std::string, const Tensor*>> named_parameters(const Model& model) {
  return named_parameters_impl<const Model, const Tensor*>(model);
}

std::int64_t parameter_count(const Model& model) {
  std::int64_t total = 0;
  for (const auto& [name, tensor] : named_parameters(model)) {
    total += tensor->numel();
  }
  return total;
}

ForwardResult model_forward(const Model& model, Tensor batch, bool training,
                            std::span<RngStream> dropout_rng) {
  if (batch.rank() != 4 || batch.extent(1) != model.input_shape[0] ||
      batch.extent(2) != model.input_shape[1] || batch.extent(3) != model.input_shape[2]) {
    throw ShapeError("model expects batches of shape [n," + std::to_string(model.input_shape[0]) +
                     "," + std::to_string(model.input_shape[1]) + "," +
                     std::to_string(model.input_shape[2]) + "], got " + batch.shape().str());
  }
  ForwardResult result;
  result.contexts.resize(model.layers.size());
  Tensor x = std::move(batch);
  for (std::size_t i = 0; i < model.layers.size(); ++i) {
    LayerContext& lc = result.contexts[i];
    const Layer& layer = model.layers[i].layer;
    if (std::holds_alternative<InputLayer>(layer)) {
      // identity
    } else if (const auto* conv = std::get_if<Conv2D<float>>(&layer)) {
      auto [out, ctx] = conv2d_forward(std::move(x), *conv);
      x = std::move(out);
      lc.op = std::move(ctx);
    } else if (const auto* pool = std::get_if<MaxPool2D>(&layer)) {
      auto [out, ctx] = maxpool2d_forward(x, *pool);
      x = std::move(out);
      lc.op = std::move(ctx);
    } else if (const auto* dense = std::get_if<Dense<float>>(&layer)) {
      auto [out, ctx] = dense_forward(std::move(x), *dense);
      x = std::move(out);
      lc.op = std::move(ctx);
    } else if (const auto* drop = std::get_if<Dropout>(&layer)) {
      auto [out, ctx] = dropout_apply(std::move(x), *drop, dropout_rng, training);
      x = std::move(out);
      lc.op = std::move(ctx);
    } else if (std::holds_alternative<Flatten>(layer)) {
      auto [out, ctx] = flatten_forward(x);
      x = std::move(out);
      lc.op = std::move(ctx);
    }
    switch (layer_activation(layer)) {
      case Activation::kNone:
        break;
      case Activation::kRelu: {
        auto [out, ctx] = relu(std::move(x));
        x = std::move(out);
        lc.relu = std::move(ctx);
        break;
      }
      case Activation::kSoftmax: {
        auto [out, ctx] = softmax_forward(x);
        x = std::move(out);
        lc.softmax = std::move(ctx);
        break;
      }
    }
  }
  if (x.rank() != 2 || x.extent(1) != model.class_count) {
    throw ShapeError("model output is " + x.shape().str() + ", expected [batch," +
                     std::to_string(model.class_count) + "]");
  }
  result.output = std::move(x);
  return result;
}

std::vector<Tensor> model_backward(const Model& model, const Tensor& logit_grad,
                                   std::vector<LayerContext>& contexts) {
  if (contexts.size() != model.layers.size()) {
    throw ValueError("backward contexts do not match the model's layer list");
  }
  // Lowest layer whose parameters we must reach; everything below is skipped.
  std::int64_t stop = -1;
  for (std::size_t i = 0; i < model.layers.size(); ++i) {
    if (model.layers[i].trainable && has_parameters(model.layers[i].layer)) {
      stop = static_cast<std::int64_t>(i);
      break;
    }
  }
  if (stop < 0) return {};

  std::vector<std::pair<std::int64_t, std::vector<Tensor>>> collected;
  Tensor up = logit_grad;
  const std::int64_t last = static_cast<std::int64_t>(model.layers.size()) - 1;
  for (std::int64_t i = last; i >= stop; --i) {
    const Layer& layer = model.layers[i].layer;
    LayerContext& lc = contexts[static_cast<std::size_t>(i)];
    switch (layer_activation(layer)) {
      case Activation::kNone:
        break;
      case Activation::kRelu:
        if (!lc.relu) throw ValueError("missing relu context for layer " + layer_name(layer));
        up = relu_backward(up, *lc.relu);
        break;
      case Activation::kSoftmax:
        // The incoming gradient is already with respect to pre-softmax logits
        // for the final layer (fused softmax + cross-entropy).
        if (i != last) {
          if (!lc.softmax) {
            throw ValueError("missing softmax context for layer " + layer_name(layer));
          }
          up = softmax_backward(up, *lc.softmax);
        }
        break;
    }
    const bool want_input = i > stop;
    const bool want_params = model.layers[i].trainable;
    if (const auto* conv = std::get_if<Conv2D<float>>(&layer)) {
      auto* ctx = std::get_if<Conv2DContext<float>>(&lc.op);
      if (!ctx) throw ValueError("missing conv context for layer " + conv->name);
      auto grads = conv2d_backward(up, *conv, *ctx, want_input, want_params);
      if (want_params) {
        std::vector<Tensor> pair;
        pair.push_back(std::move(grads.weights));
        pair.push_back(std::move(grads.bias));
        collected.emplace_back(i, std::move(pair));
      }
      if (want_input) up = std::move(grads.input);
    } else if (const auto* pool = std::get_if<MaxPool2D>(&layer)) {
      auto* ctx = std::get_if<MaxPool2DContext>(&lc.op);
      if (!ctx) throw ValueError("missing pool context for layer " + pool->name);
      if (want_input) up = maxpool2d_backward(up, *pool, *ctx);
    } else if (const auto* dense = std::get_if<Dense<float>>(&layer)) {
      auto* ctx = std::get_if<DenseContext<float>>(&lc.op);
      if (!ctx) throw ValueError("missing dense context for layer " + dense->name);
      auto grads = dense_backward(up, *dense, *ctx, want_input, want_params);
      if (want_params) {
        std::vector<Tensor> pair;
        pair.push_back(std::move(grads.weights));
        pair.push_back(std::move(grads.bias));
        collected.emplace_back(i, std::move(pair));
      }
      if (want_input) up = std::move(grads.input);
    } else if (std::holds_alternative<Dropout>(layer)) {
      auto* ctx = std::get_if<DropoutContext<float>>(&lc.op);
      if (!ctx) throw ValueError("missing dropout context");
      if (want_input) up = dropout_backward(up, *ctx);
    } else if (std::holds_alternative<Flatten>(layer)) {
      auto* ctx = std::get_if<FlattenContext>(&lc.op);
      if (!ctx) throw ValueError("missing flatten context");
      if (want_input) up = flatten_backward(up, *ctx);
    }
    // InputLayer: identity, nothing to do.
  }
  std::sort(collected.begin(), collected.end(),
            [](const auto& a, const auto& b) { return a.first < b.first; });
  std::vector<Tensor> grads;
  for (auto& [idx, pair] : collected) {
    for (auto& g : pair) grads.push_back(std::move(g));
  }
  return grads;
}

Prediction predict(const Model& model, const Tensor& image) {
  if (image.rank() != 3) {
    throw ShapeError("predict expects a single [h,w,c] image, got " + image.shape().str());
  }
  Tensor batch =
      image.reshaped(Shape{1, image.extent(0), image.extent(1), image.extent(2)});
  ForwardResult fwd = model_forward(model, std::move(batch), /*training=*/false);
  Prediction pred;
  pred.label = argmax_rows(fwd.output)[0];
  pred.probs = fwd.output.reshaped(Shape{model.class_count});
  return pred;
}

}  // namespace mcn
