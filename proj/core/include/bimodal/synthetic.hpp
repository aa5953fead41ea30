#ifndef BIMODAL_SYNTHETIC_HPP_
#define BIMODAL_SYNTHETIC_HPP_

#include <cstddef>
#include <cstdint>
#include <span>

#include "bimodal/dataset.hpp"

namespace bimodal {

/// Parameters of the planted bimodal task.
struct SynthSpec {
  std::size_t d1 = 20;
  std::size_t d2 = 20;
  std::size_t classes = 8;
  std::size_t groups = 4;
  std::size_t n_train = 10000;
  std::size_t n_test = 2000;
  double noise_std = 0.1;
  std::size_t interaction_rank = 2;
  /// Norm of each leaf's linear direction in each modality; 0 removes the
  /// linear terms entirely.
  double linear_scale = 0.5;
  std::uint64_t seed = 1;
};

/// Throws ParameterError unless G | C, 1 <= rank <= min(d1, d2), noise >= 0.
void validate(const SynthSpec& spec);

/// The labelling rule the data is drawn from:
///
///   logit_y = omega_{g(y)} . (P_a^T x1 (.) P_v^T x2) + a_y . x1 + c_y . x2
///
/// P_a, P_v have orthonormal columns; each a_y, c_y is orthogonal to them.
/// Leaves of a group come in pairs with opposite linear directions.
struct PlantedModel {
  Matrix proj_a;        // d1 x R
  Matrix proj_v;        // d2 x R
  Matrix group_weights; // G x R
  Matrix linear_a;      // C x d1
  Matrix linear_v;      // C x d2
  LabelTree tree;

  Vector logits(std::span<const double> x1, std::span<const double> x2) const;
  /// argmax of the logits, lowest index on ties.
  std::uint32_t label(std::span<const double> x1, std::span<const double> x2) const;
};

struct SyntheticData {
  Dataset train;
  Dataset test;
  PlantedModel planted;
};

/// x1, x2 ~ N(0, I); y = planted argmax on the clean features; the stored
/// features then get N(0, noise_std^2) noise. Deterministic in spec.seed.
SyntheticData generate_synthetic(const SynthSpec& spec);

}  // namespace bimodal

#endif  // BIMODAL_SYNTHETIC_HPP_
