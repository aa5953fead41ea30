#ifndef BIMODAL_TESTS_FIXTURES_HPP_
#define BIMODAL_TESTS_FIXTURES_HPP_

#include <cstddef>
#include <cstdint>

#include "bimodal/dataset.hpp"
#include "bimodal/rng.hpp"

namespace bimodal::testing {

/// Uniform features on [-1, 1] with labels cycling through the leaves, so
/// every leaf has the same count when n is a multiple of C.
inline Dataset random_dataset(std::size_t n, std::size_t d1, std::size_t d2, LabelTree tree,
                              std::uint64_t seed) {
  Rng rng(seed);
  Dataset data;
  data.x1 = Matrix(n, d1);
  data.x2 = Matrix(n, d2);
  for (double& x : data.x1.values()) x = rng.uniform(-1.0, 1.0);
  for (double& x : data.x2.values()) x = rng.uniform(-1.0, 1.0);
  data.labels.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    data.labels[i] = static_cast<std::uint32_t>(i % tree.num_leaves());
  }
  data.tree = std::move(tree);
  return data;
}

}  // namespace bimodal::testing

#endif  // BIMODAL_TESTS_FIXTURES_HPP_
