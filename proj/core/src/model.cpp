#include "bimodal/model.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "bimodal/fusion.hpp"

namespace bimodal {

namespace {

// Separate seed streams so changing one part's shape leaves the others' draws alone.
constexpr std::uint64_t kStreamTowerA = 0x9e3779b97f4a7c15ULL;
constexpr std::uint64_t kStreamTowerV = 0xbf58476d1ce4e5b9ULL;
constexpr std::uint64_t kStreamTop = 0x94d049bb133111ebULL;
constexpr std::uint64_t kStreamHead = 0x2545f4914f6cdd1dULL;

template <typename Ref, typename M>
std::vector<Ref> collect(M& model) {
  std::vector<Ref> refs;
  auto tower = [&](auto& t, const std::string& prefix, ParamRole role) {
    for (std::size_t l = 0; l < t.weights.size(); ++l) {
      refs.push_back({prefix + ".W" + std::to_string(l), role, t.weights[l].values(), false});
      refs.push_back({prefix + ".b" + std::to_string(l), role, std::span(t.biases[l]), false});
    }
  };
  tower(model.tower_a, "tower_a", ParamRole::TowerA);
  tower(model.tower_v, "tower_v", ParamRole::TowerV);
  tower(model.top, "top", ParamRole::Top);
  if (model.kind == ModelKind::Bilinear) {
    auto& head = model.head;
    for (std::size_t y = 0; y < head.full_weights.size(); ++y) {
      refs.push_back({"head.W" + std::to_string(y), ParamRole::Bilinear,
                      head.full_weights[y].values(), false});
    }
    if (head.variant != HeadVariant::Full) {
      refs.push_back({"head.U1", ParamRole::Bilinear, head.u1.values(), true});
      refs.push_back({"head.U2", ParamRole::Bilinear, head.u2.values(), true});
      refs.push_back({"head.w", ParamRole::Bilinear, head.w.values(), false});
    }
    refs.push_back({"head.V1", ParamRole::HeadLinear, head.v1.values(), false});
    refs.push_back({"head.V2", ParamRole::HeadLinear, head.v2.values(), false});
    refs.push_back({"head.b", ParamRole::HeadLinear, std::span(head.bias), false});
  } else {
    refs.push_back({"softmax.W", ParamRole::Softmax, model.softmax.weights.values(), false});
    refs.push_back({"softmax.b", ParamRole::Softmax, std::span(model.softmax.bias), false});
  }
  return refs;
}

SoftmaxLayer init_softmax(std::size_t inputs, std::size_t classes, Rng& rng, double scale) {
  SoftmaxLayer layer{Matrix(inputs, classes), Vector(classes, 0.0)};
  for (double& x : layer.weights.values()) x = rng.uniform(-scale, scale);
  return layer;
}

Vector softmax_logits(const SoftmaxLayer& layer, std::span<const double> h) {
  Vector logits = matvec(layer.weights, h, Transpose::Yes);
  axpy(1.0, layer.bias, logits);
  return logits;
}

void add_tower_grads(MlpTower& acc, const TowerGradients& g, double scale) {
  for (std::size_t l = 0; l < g.weights.size(); ++l) {
    axpy(scale, g.weights[l].values(), acc.weights[l].values());
    axpy(scale, g.biases[l], acc.biases[l]);
  }
}

/// Softmax layer gradient; returns dE/dh.
Vector softmax_backward(const SoftmaxLayer& layer, std::span<const double> h,
                        std::span<const double> delta, SoftmaxLayer& acc, double scale) {
  add_outer(acc.weights, h, delta, scale);
  axpy(scale, delta, acc.bias);
  return matvec(layer.weights, delta);
}

Vector leaf_delta(std::span<const double> probs, std::size_t target) {
  Vector d(probs.size());
  for (std::size_t k = 0; k < probs.size(); ++k) d[k] = (k == target ? 1.0 : 0.0) - probs[k];
  return d;
}

double clamped_log(double p) { return std::log(std::max(p, 1e-300)); }

void check_target(const Model& model, std::size_t target) {
  if (target >= model.num_classes()) {
    throw ParameterError("target leaf " + std::to_string(target) + " out of range [0, " +
                         std::to_string(model.num_classes()) + ")");
  }
}

}  // namespace

const char* to_string(ModelKind kind) noexcept {
  switch (kind) {
    case ModelKind::AudioOnly: return "audio";
    case ModelKind::VisualOnly: return "visual";
    case ModelKind::Fused: return "fused";
    case ModelKind::Bilinear: return "bilinear";
  }
  return "?";
}

std::vector<ParamRef> parameters(Model& model) { return collect<ParamRef>(model); }

std::vector<ConstParamRef> parameters(const Model& model) {
  return collect<ConstParamRef>(model);
}

bool has_gradient(ModelKind kind, ParamRole role) noexcept {
  if (kind == ModelKind::Fused) return role != ParamRole::TowerA && role != ParamRole::TowerV;
  return true;
}

Model make_unimodal(ModelKind kind, std::span<const std::size_t> tower_dims, LabelTree tree,
                    std::uint64_t seed, double init_scale) {
  if (kind != ModelKind::AudioOnly && kind != ModelKind::VisualOnly) {
    throw ParameterError("make_unimodal: kind must be audio or visual");
  }
  Model model;
  model.kind = kind;
  model.seed = seed;
  Rng tower_rng(seed ^ (kind == ModelKind::AudioOnly ? kStreamTowerA : kStreamTowerV));
  MlpTower tower = init_tower(tower_dims, tower_rng, init_scale);
  Rng head_rng(seed ^ kStreamHead);
  model.softmax = init_softmax(tower.output_dim(), tree.num_leaves(), head_rng, init_scale);
  (kind == ModelKind::AudioOnly ? model.tower_a : model.tower_v) = std::move(tower);
  model.tree = std::move(tree);
  return model;
}

Model make_fused(MlpTower tower_a, MlpTower tower_v, std::span<const std::size_t> top_hidden,
                 LabelTree tree, std::uint64_t seed, double init_scale) {
  validate(tower_a);
  validate(tower_v);
  Model model;
  model.kind = ModelKind::Fused;
  model.seed = seed;
  std::vector<std::size_t> top_dims{tower_a.output_dim() + tower_v.output_dim()};
  top_dims.insert(top_dims.end(), top_hidden.begin(), top_hidden.end());
  Rng top_rng(seed ^ kStreamTop);
  model.top = init_tower(top_dims, top_rng, init_scale);
  Rng head_rng(seed ^ kStreamHead);
  model.softmax = init_softmax(model.top.output_dim(), tree.num_leaves(), head_rng, init_scale);
  model.tower_a = std::move(tower_a);
  model.tower_v = std::move(tower_v);
  model.tree = std::move(tree);
  return model;
}

Model make_bilinear(HeadVariant variant, std::span<const std::size_t> dims_a,
                    std::span<const std::size_t> dims_v, std::size_t factors, LabelTree tree,
                    double lambda, std::uint64_t seed, double init_scale) {
  Model model;
  model.kind = ModelKind::Bilinear;
  model.seed = seed;
  Rng rng_a(seed ^ kStreamTowerA);
  Rng rng_v(seed ^ kStreamTowerV);
  model.tower_a = init_tower(dims_a, rng_a, init_scale);
  model.tower_v = init_tower(dims_v, rng_v, init_scale);
  model.head = make_head(variant, model.tower_a.output_dim(), model.tower_v.output_dim(), factors,
                         tree, lambda);
  Rng head_rng(seed ^ kStreamHead);
  init_head(model.head, head_rng, init_scale);
  model.tree = std::move(tree);
  return model;
}

void validate(const Model& model) {
  const std::size_t classes = model.num_classes();
  if (classes == 0) throw ShapeError("model: label tree has no leaves");
  auto check_softmax = [&](std::size_t inputs) {
    if (model.softmax.weights.rows() != inputs || model.softmax.weights.cols() != classes ||
        model.softmax.bias.size() != classes) {
      throw ShapeError("model: softmax is " + model.softmax.weights.shape_string() +
                       ", expected " + std::to_string(inputs) + "x" + std::to_string(classes));
    }
  };
  switch (model.kind) {
    case ModelKind::AudioOnly:
      validate(model.tower_a);
      check_softmax(model.tower_a.output_dim());
      break;
    case ModelKind::VisualOnly:
      validate(model.tower_v);
      check_softmax(model.tower_v.output_dim());
      break;
    case ModelKind::Fused:
      validate(model.tower_a);
      validate(model.tower_v);
      validate(model.top);
      if (model.top.input_dim() != model.tower_a.output_dim() + model.tower_v.output_dim()) {
        throw ShapeError("model: fused top input " + std::to_string(model.top.input_dim()) +
                         " != " + std::to_string(model.tower_a.output_dim()) + " + " +
                         std::to_string(model.tower_v.output_dim()));
      }
      check_softmax(model.top.output_dim());
      break;
    case ModelKind::Bilinear:
      validate(model.tower_a);
      validate(model.tower_v);
      validate(model.head);
      if (model.head.dim_a() != model.tower_a.output_dim() ||
          model.head.dim_v() != model.tower_v.output_dim()) {
        throw ShapeError("model: bilinear head dims do not match tower outputs");
      }
      if (!(model.head.tree == model.tree)) throw ShapeError("model: head and model trees differ");
      break;
  }
}

Model zeros_like(const Model& model) {
  Model out = model;
  for (ParamRef& p : parameters(out)) std::fill(p.values.begin(), p.values.end(), 0.0);
  return out;
}

Vector predict(const Model& model, std::span<const double> x1, std::span<const double> x2) {
  switch (model.kind) {
    case ModelKind::AudioOnly:
      return softmax(softmax_logits(model.softmax, forward(model.tower_a, x1).output()));
    case ModelKind::VisualOnly:
      return softmax(softmax_logits(model.softmax, forward(model.tower_v, x2).output()));
    case ModelKind::Fused: {
      const Vector fused = fuse_features(model.tower_a, model.tower_v, x1, x2);
      return softmax(softmax_logits(model.softmax, forward(model.top, fused).output()));
    }
    case ModelKind::Bilinear:
      return posterior(model.head, forward(model.tower_a, x1).output(),
                       forward(model.tower_v, x2).output());
  }
  return {};
}

double accumulate_gradients(const Model& model, std::span<const double> x1,
                            std::span<const double> x2, std::size_t target, Model& grads,
                            double scale) {
  check_target(model, target);
  switch (model.kind) {
    case ModelKind::AudioOnly:
    case ModelKind::VisualOnly: {
      const bool audio = model.kind == ModelKind::AudioOnly;
      const MlpTower& tower = audio ? model.tower_a : model.tower_v;
      const ForwardTrace trace = forward(tower, audio ? x1 : x2);
      const Vector probs = softmax(softmax_logits(model.softmax, trace.output()));
      const Vector delta = leaf_delta(probs, target);
      const Vector dh = softmax_backward(model.softmax, trace.output(), delta, grads.softmax, scale);
      add_tower_grads(audio ? grads.tower_a : grads.tower_v, backward(tower, trace, dh), scale);
      return clamped_log(probs[target]);
    }
    case ModelKind::Fused: {
      const Vector fused = fuse_features(model.tower_a, model.tower_v, x1, x2);
      const ForwardTrace trace = forward(model.top, fused);
      const Vector probs = softmax(softmax_logits(model.softmax, trace.output()));
      const Vector delta = leaf_delta(probs, target);
      const Vector dh = softmax_backward(model.softmax, trace.output(), delta, grads.softmax, scale);
      // The towers are frozen; backprop stops at the fused features.
      add_tower_grads(grads.top, backward(model.top, trace, dh), scale);
      return clamped_log(probs[target]);
    }
    case ModelKind::Bilinear: {
      const ForwardTrace trace_a = forward(model.tower_a, x1);
      const ForwardTrace trace_v = forward(model.tower_v, x2);
      const HeadGradients hg =
          head_gradients(model.head, trace_a.output(), trace_v.output(), target,
                         Messages::Skip);
      BilinearHead& acc = grads.head;
      for (std::size_t y = 0; y < hg.full_weights.size(); ++y) {
        axpy(scale, hg.full_weights[y].values(), acc.full_weights[y].values());
      }
      if (model.head.factored()) {
        axpy(scale, hg.u1.values(), acc.u1.values());
        axpy(scale, hg.u2.values(), acc.u2.values());
        axpy(scale, hg.w.values(), acc.w.values());
      }
      axpy(scale, hg.v1.values(), acc.v1.values());
      axpy(scale, hg.v2.values(), acc.v2.values());
      axpy(scale, hg.bias, acc.bias);
      add_tower_grads(grads.tower_a, backward(model.tower_a, trace_a, hg.delta1), scale);
      add_tower_grads(grads.tower_v, backward(model.tower_v, trace_v, hg.delta2), scale);
      return hg.log_likelihood;
    }
  }
  return 0.0;
}

}  // namespace bimodal
