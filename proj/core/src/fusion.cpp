#include "bimodal/fusion.hpp"

#include <cmath>
#include <string>

#include "bimodal/model.hpp"

namespace bimodal {

Vector fuse_features(const MlpTower& tower_a, const MlpTower& tower_v, std::span<const double> x1,
                     std::span<const double> x2) {
  const ForwardTrace a = forward(tower_a, x1);
  const ForwardTrace v = forward(tower_v, x2);
  Vector fused;
  fused.reserve(a.output().size() + v.output().size());
  fused.insert(fused.end(), a.output().begin(), a.output().end());
  fused.insert(fused.end(), v.output().begin(), v.output().end());
  return fused;
}

Vector average_posteriors(std::span<const Vector> posteriors) {
  if (posteriors.empty()) throw ParameterError("average_posteriors: no posteriors");
  const std::size_t n = posteriors.front().size();
  Vector mean(n, 0.0);
  for (const Vector& p : posteriors) {
    if (p.size() != n) {
      throw ShapeError("average_posteriors: lengths " + std::to_string(n) + " and " +
                       std::to_string(p.size()));
    }
    for (std::size_t k = 0; k < n; ++k) mean[k] += p[k];
  }
  const double count = static_cast<double>(posteriors.size());
  for (double& x : mean) x /= count;
  return mean;
}

Ensemble::Ensemble(std::vector<Model> members) : members_(std::move(members)) {
  if (members_.empty()) throw ParameterError("ensemble: no members");
  const LabelTree& tree = members_.front().tree;
  for (const Model& m : members_) {
    validate(m);
    if (!(m.tree == tree)) throw ShapeError("ensemble: members disagree on the label tree");
  }
}

Vector Ensemble::predict(std::span<const double> x1, std::span<const double> x2) const {
  std::vector<Vector> posteriors;
  posteriors.reserve(members_.size());
  for (const Model& m : members_) posteriors.push_back(bimodal::predict(m, x1, x2));
  return average_posteriors(posteriors);
}

}  // namespace bimodal
