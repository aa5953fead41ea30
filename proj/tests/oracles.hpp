#ifndef BIMODAL_TESTS_ORACLES_HPP_
#define BIMODAL_TESTS_ORACLES_HPP_

// Test-only reference computations. These deliberately avoid the library's
// backward pass and its factored logit path so they can serve as oracles.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "bimodal/bilinear_head.hpp"
#include "bimodal/model.hpp"
#include "bimodal/rng.hpp"

namespace bimodal::testing {

/// Naive logit: sum_ij v1_i W^y_ij v2_j + <V_y, [v1; v2]> + b_y, with
/// W^y built entry by entry from U1, w, U2 for the factored variants.
inline std::vector<double> reference_logits(const BilinearHead& head, std::span<const double> v1,
                                            std::span<const double> v2) {
  const std::size_t classes = head.bias.size();
  std::vector<double> out(classes);
  for (std::size_t y = 0; y < classes; ++y) {
    double s = head.bias[y];
    for (std::size_t i = 0; i < v1.size(); ++i) s += head.v1(i, y) * v1[i];
    for (std::size_t j = 0; j < v2.size(); ++j) s += head.v2(j, y) * v2[j];
    for (std::size_t i = 0; i < v1.size(); ++i) {
      for (std::size_t j = 0; j < v2.size(); ++j) {
        double wij = 0.0;
        if (head.variant == HeadVariant::Full) {
          wij = head.full_weights[y](i, j);
        } else {
          const std::size_t col =
              head.variant == HeadVariant::FactoredShared ? head.tree.group_of(y) : y;
          for (std::size_t f = 0; f < head.u1.cols(); ++f) {
            wij += head.u1(i, f) * head.w(f, col) * head.u2(j, f);
          }
        }
        s += v1[i] * wij * v2[j];
      }
    }
    out[y] = s;
  }
  return out;
}

/// log softmax(logits)[target] by log-sum-exp.
inline double reference_log_posterior(std::span<const double> logits, std::size_t target) {
  const double top = *std::max_element(logits.begin(), logits.end());
  double z = 0.0;
  for (double l : logits) z += std::exp(l - top);
  return logits[target] - top - std::log(z);
}

/// Central difference of `objective` with respect to every entry of `values`.
inline std::vector<double> central_differences(std::span<double> values,
                                               const std::function<double()>& objective,
                                               double h) {
  std::vector<double> out(values.size());
  for (std::size_t i = 0; i < values.size(); ++i) {
    const double saved = values[i];
    values[i] = saved + h;
    const double up = objective();
    values[i] = saved - h;
    const double down = objective();
    values[i] = saved;
    out[i] = (up - down) / (2.0 * h);
  }
  return out;
}

inline double relative_error(double analytic, double numeric) {
  return std::abs(analytic - numeric) / std::max(1.0, std::abs(numeric));
}

inline std::vector<double> random_vector(Rng& rng, std::size_t n, double scale = 1.0) {
  std::vector<double> v(n);
  for (double& x : v) x = rng.uniform(-scale, scale);
  return v;
}

inline void randomize(Matrix& m, Rng& rng, double scale = 1.0) {
  for (double& x : m.values()) x = rng.uniform(-scale, scale);
}

inline void randomize(BilinearHead& head, Rng& rng, double scale = 1.0) {
  for (Matrix& m : head.full_weights) randomize(m, rng, scale);
  randomize(head.u1, rng, scale);
  randomize(head.u2, rng, scale);
  randomize(head.w, rng, scale);
  randomize(head.v1, rng, scale);
  randomize(head.v2, rng, scale);
  for (double& b : head.bias) b = rng.uniform(-scale, scale);
}

/// Label tree with G groups over C leaves, assigning leaf k to group k mod G
/// so that groups are interleaved rather than contiguous.
inline LabelTree interleaved_tree(std::size_t classes, std::size_t groups) {
  std::vector<std::size_t> table(classes);
  for (std::size_t k = 0; k < classes; ++k) table[k] = k % groups;
  return LabelTree(std::move(table), groups);
}

}  // namespace bimodal::testing

#endif  // BIMODAL_TESTS_ORACLES_HPP_
