#ifndef BIMODAL_FUSION_HPP_
#define BIMODAL_FUSION_HPP_

#include <span>
#include <vector>

#include "bimodal/linalg.hpp"
#include "bimodal/mlp.hpp"

namespace bimodal {

struct Model;

/// [v_a ; v_v]: the final hidden layers of the two towers, concatenated.
Vector fuse_features(const MlpTower& tower_a, const MlpTower& tower_v, std::span<const double> x1,
                     std::span<const double> x2);

/// Unweighted arithmetic mean, accumulated in list order.
/// Throws ParameterError on an empty list, ShapeError on a length mismatch.
Vector average_posteriors(std::span<const Vector> posteriors);

/// Committee of classifiers over the same leaves whose posteriors are averaged.
class Ensemble {
 public:
  explicit Ensemble(std::vector<Model> members);

  std::size_t size() const noexcept { return members_.size(); }
  const std::vector<Model>& members() const noexcept { return members_; }

  Vector predict(std::span<const double> x1, std::span<const double> x2) const;

 private:
  std::vector<Model> members_;
};

}  // namespace bimodal

#endif  // BIMODAL_FUSION_HPP_
