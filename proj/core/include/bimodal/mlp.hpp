#ifndef BIMODAL_MLP_HPP_
#define BIMODAL_MLP_HPP_

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "bimodal/linalg.hpp"
#include "bimodal/rng.hpp"

namespace bimodal {

/// Uni-modal sigmoid network. Layer l maps h_l (length dims[l]) to
/// h_{l+1} = sigmoid(W_l^T h_l + b_l), with W_l of shape dims[l] x dims[l+1].
///
/// A tower with a single entry in dims has no layers and passes its input
/// through unchanged.
struct MlpTower {
  std::vector<std::size_t> dims;
  std::vector<Matrix> weights;
  std::vector<Vector> biases;

  std::size_t num_layers() const noexcept { return weights.size(); }
  std::size_t input_dim() const noexcept { return dims.empty() ? 0 : dims.front(); }
  std::size_t output_dim() const noexcept { return dims.empty() ? 0 : dims.back(); }

  bool operator==(const MlpTower&) const = default;
};

/// Activations of one forward pass. post[0] is the input; pre[l] and
/// post[l + 1] belong to layer l.
struct ForwardTrace {
  std::vector<Vector> pre;
  std::vector<Vector> post;

  const Vector& output() const { return post.back(); }
};

struct TowerGradients {
  std::vector<Matrix> weights;
  std::vector<Vector> biases;
  Vector delta_input;
};

double sigmoid(double u) noexcept;
Vector sigmoid(std::span<const double> u);
/// sigma'(u) = sigma(u) (1 - sigma(u)), evaluated from the pre-activation.
double sigmoid_derivative(double u) noexcept;

/// Zero weights and biases with shapes taken from dims.
MlpTower make_tower(std::span<const std::size_t> dims);

/// Weights i.i.d. uniform on [-scale, scale], biases zero.
MlpTower init_tower(std::span<const std::size_t> dims, Rng& rng, double scale);
MlpTower init_tower(std::span<const std::size_t> dims, std::uint64_t seed, double scale);

/// Throws ShapeError if weight/bias shapes disagree with dims.
void validate(const MlpTower& tower);

ForwardTrace forward(const MlpTower& tower, std::span<const double> x);

/// Backpropagates delta_top = dE/dh_L through the tower. Gradients follow the
/// ascent convention of the objective they came from.
TowerGradients backward(const MlpTower& tower, const ForwardTrace& trace,
                        std::span<const double> delta_top);

}  // namespace bimodal

#endif  // BIMODAL_MLP_HPP_
