#ifndef BIMODAL_MODEL_HPP_
#define BIMODAL_MODEL_HPP_

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "bimodal/bilinear_head.hpp"
#include "bimodal/label_tree.hpp"
#include "bimodal/linalg.hpp"
#include "bimodal/mlp.hpp"
#include "bimodal/rng.hpp"

namespace bimodal {

enum class ModelKind {
  AudioOnly,   ///< tower_a + softmax on x1
  VisualOnly,  ///< tower_v + softmax on x2
  Fused,       ///< frozen towers, concatenated features, optional top tower + softmax
  Bilinear,    ///< jointly trained towers + bilinear head
};

const char* to_string(ModelKind kind) noexcept;

/// Plain softmax layer: logits = weights^T h + bias, weights is K x C.
struct SoftmaxLayer {
  Matrix weights;
  Vector bias;

  bool operator==(const SoftmaxLayer&) const = default;
};

/// A classifier mapping (x1, x2) to a posterior over the leaves of `tree`.
/// Members not used by `kind` are left empty.
struct Model {
  ModelKind kind = ModelKind::Bilinear;
  LabelTree tree;
  MlpTower tower_a;
  MlpTower tower_v;
  MlpTower top;  // Fused only; a single-entry dims list means softmax-only fusion
  SoftmaxLayer softmax;
  BilinearHead head;
  std::uint64_t seed = 0;  // seed the parameters were initialised from

  std::size_t num_classes() const noexcept { return tree.num_leaves(); }
  bool operator==(const Model&) const = default;
};

enum class ParamRole { TowerA, TowerV, Top, Softmax, Bilinear, HeadLinear };

/// A named view of one parameter array inside a Model.
struct ParamRef {
  std::string name;
  ParamRole role;
  std::span<double> values;
  bool projected = false;  // kept inside the Frobenius ball after each step
};

struct ConstParamRef {
  std::string name;
  ParamRole role;
  std::span<const double> values;
  bool projected = false;
};

/// Every parameter array of the model in a fixed order. The order is part of
/// the model file format.
std::vector<ParamRef> parameters(Model& model);
std::vector<ConstParamRef> parameters(const Model& model);

/// Parameters that receive gradients for this kind of model (the fused
/// model's towers are frozen).
bool has_gradient(ModelKind kind, ParamRole role) noexcept;

Model make_unimodal(ModelKind kind, std::span<const std::size_t> tower_dims, LabelTree tree,
                    std::uint64_t seed, double init_scale);

/// Fused classifier on top of two existing towers. `top_hidden` lists the
/// hidden widths of the optional top network (empty for softmax fusion).
Model make_fused(MlpTower tower_a, MlpTower tower_v, std::span<const std::size_t> top_hidden,
                 LabelTree tree, std::uint64_t seed, double init_scale);

Model make_bilinear(HeadVariant variant, std::span<const std::size_t> dims_a,
                    std::span<const std::size_t> dims_v, std::size_t factors, LabelTree tree,
                    double lambda, std::uint64_t seed, double init_scale);

/// Throws ShapeError if the model's parts are inconsistent.
void validate(const Model& model);

/// Same structure as `model` with every parameter set to zero.
Model zeros_like(const Model& model);

Vector predict(const Model& model, std::span<const double> x1, std::span<const double> x2);

/// Adds scale * d log rho(y | x1, x2) / d theta into `grads` (shaped like
/// `model`) and returns log rho(y | x1, x2).
double accumulate_gradients(const Model& model, std::span<const double> x1,
                            std::span<const double> x2, std::size_t target, Model& grads,
                            double scale = 1.0);

}  // namespace bimodal

#endif  // BIMODAL_MODEL_HPP_
