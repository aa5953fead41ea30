#ifndef BIMODAL_BILINEAR_HEAD_HPP_
#define BIMODAL_BILINEAR_HEAD_HPP_

#include <cstddef>
#include <span>
#include <stdexcept>
#include <vector>

#include "bimodal/label_tree.hpp"
#include "bimodal/linalg.hpp"
#include "bimodal/rng.hpp"

namespace bimodal {

/// Raised when an operation is not defined for the head's variant.
class VariantError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

enum class HeadVariant {
  Full,            ///< one K1 x K2 matrix per class
  Factored,        ///< W^y = U1 diag(w_y) U2^T
  FactoredShared,  ///< W^y = U1 diag(w_{g(y)}) U2^T
};

const char* to_string(HeadVariant variant) noexcept;

/// Joint classification layer over two feature vectors v1 (length K1) and
/// v2 (length K2):
///
///   logit_y = v1^T W^y v2 + V1[:, y]^T v1 + V2[:, y]^T v2 + b_y
///
/// For the factored variants `w` stores one column per class (F x C) or per
/// group (F x G). V1, V2 and b are always per leaf; only the bilinear term is
/// shared across a group.
struct BilinearHead {
  HeadVariant variant = HeadVariant::FactoredShared;
  LabelTree tree;
  std::vector<Matrix> full_weights;  // Full only
  Matrix u1;                         // K1 x F
  Matrix u2;                         // K2 x F
  Matrix w;                          // F x C or F x G
  Matrix v1;                         // K1 x C
  Matrix v2;                         // K2 x C
  Vector bias;                       // C
  double lambda = 2.0;               // Frobenius bound on u1, u2

  std::size_t dim_a() const noexcept { return v1.rows(); }
  std::size_t dim_v() const noexcept { return v2.rows(); }
  std::size_t num_classes() const noexcept { return bias.size(); }
  std::size_t num_factors() const noexcept { return u1.cols(); }
  bool factored() const noexcept { return variant != HeadVariant::Full; }

  /// Column of `w` used by leaf y.
  std::size_t weight_column(std::size_t leaf) const {
    return variant == HeadVariant::FactoredShared ? tree.group_of(leaf) : leaf;
  }

  bool operator==(const BilinearHead&) const = default;
};

/// All-zero head. `factors` is ignored for the Full variant.
BilinearHead make_head(HeadVariant variant, std::size_t dim_a, std::size_t dim_v,
                       std::size_t factors, LabelTree tree, double lambda = 2.0);

/// Bilinear and linear weights uniform on [-scale, scale]; bias zero.
void init_head(BilinearHead& head, Rng& rng, double scale);

void validate(const BilinearHead& head);

Vector head_logits(const BilinearHead& head, std::span<const double> v1,
                   std::span<const double> v2);

/// Max-subtracted softmax.
Vector softmax(std::span<const double> logits);

Vector posterior(const BilinearHead& head, std::span<const double> v1,
                 std::span<const double> v2);

/// U1 diag(w_col) U2^T for leaf y; throws VariantError on the Full variant.
Matrix materialize_W(const BilinearHead& head, std::size_t leaf);

/// Errors at the leaf level (t - rho) and at the group level
/// (Root_g - sum of rho over the group's leaves).
struct LabelDeltas {
  Vector leaf;
  Vector group;
};

LabelDeltas deltas(std::span<const double> probs, std::size_t target_leaf, const LabelTree& tree);

/// Gradients of log rho(target | v1, v2) with respect to every head parameter
/// of the active variant, plus the errors sent back to each tower.
struct HeadGradients {
  std::vector<Matrix> full_weights;
  Matrix u1;
  Matrix u2;
  Matrix w;
  Matrix v1;
  Matrix v2;
  Vector bias;

  Vector delta1;  // dE/dv1
  Vector delta2;  // dE/dv2
  /// Column k is W^k v2 (resp. W^{k,T} v1), k over the columns of w (or over
  /// classes for the Full variant). Empty when computed with Messages::Skip.
  Matrix message_2to1;
  Matrix message_1to2;

  Vector probs;
  LabelDeltas label_deltas;
  double log_likelihood = 0.0;
};

enum class Messages { Compute, Skip };

/// delta1 and delta2 do not depend on `messages`; Skip only avoids forming the
/// message matrices, which cost O(K F cols) per sample.
HeadGradients head_gradients(const BilinearHead& head, std::span<const double> v1,
                             std::span<const double> v2, std::size_t target_leaf,
                             Messages messages = Messages::Compute);

struct ParamCount {
  std::size_t bilinear = 0;  // W^y, or U1 + U2 + w
  std::size_t w_block = 0;   // w alone (0 for Full)
  std::size_t linear = 0;    // V1 + V2
  std::size_t bias = 0;
  std::size_t total = 0;
};

ParamCount param_count(const BilinearHead& head);
ParamCount param_count(HeadVariant variant, std::size_t dim_a, std::size_t dim_v,
                       std::size_t factors, std::size_t classes, std::size_t groups);

}  // namespace bimodal

#endif  // BIMODAL_BILINEAR_HEAD_HPP_
