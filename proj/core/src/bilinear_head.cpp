#include "bimodal/bilinear_head.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace bimodal {

namespace {

void check_features(const BilinearHead& head, std::span<const double> v1,
                    std::span<const double> v2) {
  if (v1.size() != head.dim_a() || v2.size() != head.dim_v()) {
    throw ShapeError("bilinear head: feature lengths (" + std::to_string(v1.size()) + ", " +
                     std::to_string(v2.size()) + "), expected (" + std::to_string(head.dim_a()) +
                     ", " + std::to_string(head.dim_v()) + ")");
  }
}

void check_shape(const Matrix& m, std::size_t rows, std::size_t cols, const char* name) {
  if (m.rows() != rows || m.cols() != cols) {
    throw ShapeError(std::string("bilinear head: ") + name + " is " + m.shape_string() +
                     ", expected " + std::to_string(rows) + "x" + std::to_string(cols));
  }
}

std::size_t weight_columns(HeadVariant variant, const LabelTree& tree) {
  return variant == HeadVariant::FactoredShared ? tree.num_groups() : tree.num_leaves();
}

}  // namespace

const char* to_string(HeadVariant variant) noexcept {
  switch (variant) {
    case HeadVariant::Full: return "full";
    case HeadVariant::Factored: return "factored";
    case HeadVariant::FactoredShared: return "shared";
  }
  return "?";
}

BilinearHead make_head(HeadVariant variant, std::size_t dim_a, std::size_t dim_v,
                       std::size_t factors, LabelTree tree, double lambda) {
  if (dim_a == 0 || dim_v == 0) throw ParameterError("bilinear head: feature dims must be >= 1");
  if (!(lambda > 0.0)) throw ParameterError("bilinear head: lambda must be positive");
  const std::size_t classes = tree.num_leaves();
  if (classes == 0) throw ParameterError("bilinear head: label tree has no leaves");

  BilinearHead head;
  head.variant = variant;
  head.lambda = lambda;
  if (variant == HeadVariant::Full) {
    head.full_weights.assign(classes, Matrix(dim_a, dim_v));
  } else {
    if (factors == 0) throw ParameterError("bilinear head: F must be >= 1");
    head.u1 = Matrix(dim_a, factors);
    head.u2 = Matrix(dim_v, factors);
    head.w = Matrix(factors, weight_columns(variant, tree));
  }
  head.v1 = Matrix(dim_a, classes);
  head.v2 = Matrix(dim_v, classes);
  head.bias.assign(classes, 0.0);
  head.tree = std::move(tree);
  return head;
}

void init_head(BilinearHead& head, Rng& rng, double scale) {
  auto fill = [&](Matrix& m) {
    for (double& x : m.values()) x = rng.uniform(-scale, scale);
  };
  for (Matrix& m : head.full_weights) fill(m);
  fill(head.u1);
  fill(head.u2);
  fill(head.w);
  fill(head.v1);
  fill(head.v2);
  std::fill(head.bias.begin(), head.bias.end(), 0.0);
}

void validate(const BilinearHead& head) {
  const std::size_t classes = head.bias.size();
  if (classes == 0) throw ShapeError("bilinear head: no classes");
  if (head.tree.num_leaves() != classes) {
    throw ShapeError("bilinear head: label tree has " + std::to_string(head.tree.num_leaves()) +
                     " leaves, head has " + std::to_string(classes) + " classes");
  }
  check_shape(head.v1, head.v1.rows(), classes, "V1");
  check_shape(head.v2, head.v2.rows(), classes, "V2");
  const std::size_t ka = head.dim_a();
  const std::size_t kv = head.dim_v();
  if (head.variant == HeadVariant::Full) {
    if (head.full_weights.size() != classes) {
      throw ShapeError("bilinear head: Full variant needs one W^y per class");
    }
    for (const Matrix& m : head.full_weights) check_shape(m, ka, kv, "W^y");
  } else {
    const std::size_t f = head.num_factors();
    if (f == 0) throw ShapeError("bilinear head: F must be >= 1");
    check_shape(head.u1, ka, f, "U1");
    check_shape(head.u2, kv, f, "U2");
    check_shape(head.w, f, weight_columns(head.variant, head.tree), "w");
  }
  if (!(head.lambda > 0.0)) throw ParameterError("bilinear head: lambda must be positive");
}

Vector head_logits(const BilinearHead& head, std::span<const double> v1,
                   std::span<const double> v2) {
  check_features(head, v1, v2);
  const std::size_t classes = head.num_classes();
  Vector logits = matvec(head.v1, v1, Transpose::Yes);
  axpy(1.0, matvec(head.v2, v2, Transpose::Yes), logits);
  axpy(1.0, head.bias, logits);

  if (head.variant == HeadVariant::Full) {
    for (std::size_t y = 0; y < classes; ++y) {
      logits[y] += dot(v1, matvec(head.full_weights[y], v2));
    }
  } else {
    const Vector z = hadamard(matvec(head.u1, v1, Transpose::Yes),
                              matvec(head.u2, v2, Transpose::Yes));
    const Vector per_column = matvec(head.w, z, Transpose::Yes);
    for (std::size_t y = 0; y < classes; ++y) logits[y] += per_column[head.weight_column(y)];
  }
  return logits;
}

Vector softmax(std::span<const double> logits) {
  if (logits.empty()) return {};
  const double top = *std::max_element(logits.begin(), logits.end());
  Vector out(logits.size());
  double z = 0.0;
  for (std::size_t i = 0; i < logits.size(); ++i) {
    out[i] = std::exp(logits[i] - top);
    z += out[i];
  }
  for (double& p : out) p /= z;
  return out;
}

Vector posterior(const BilinearHead& head, std::span<const double> v1,
                 std::span<const double> v2) {
  return softmax(head_logits(head, v1, v2));
}

Matrix materialize_W(const BilinearHead& head, std::size_t leaf) {
  if (head.variant == HeadVariant::Full) {
    throw VariantError("materialize_W: Full variant stores W^y directly");
  }
  if (leaf >= head.num_classes()) {
    throw ParameterError("materialize_W: leaf " + std::to_string(leaf) + " out of range");
  }
  const std::size_t col = head.weight_column(leaf);
  Matrix scaled = head.u1;
  for (std::size_t i = 0; i < scaled.rows(); ++i) {
    for (std::size_t f = 0; f < scaled.cols(); ++f) scaled(i, f) *= head.w(f, col);
  }
  return matmul(scaled, head.u2, Transpose::No, Transpose::Yes);
}

LabelDeltas deltas(std::span<const double> probs, std::size_t target_leaf, const LabelTree& tree) {
  if (probs.size() != tree.num_leaves()) {
    throw ShapeError("deltas: " + std::to_string(probs.size()) + " probabilities for " +
                     std::to_string(tree.num_leaves()) + " leaves");
  }
  if (target_leaf >= tree.num_leaves()) {
    throw ParameterError("deltas: target leaf " + std::to_string(target_leaf) +
                         " out of range [0, " + std::to_string(tree.num_leaves()) + ")");
  }
  LabelDeltas d;
  d.leaf.resize(probs.size());
  for (std::size_t k = 0; k < probs.size(); ++k) {
    d.leaf[k] = (k == target_leaf ? 1.0 : 0.0) - probs[k];
  }
  const std::size_t root = tree.group_of(target_leaf);
  d.group.resize(tree.num_groups());
  for (std::size_t g = 0; g < tree.num_groups(); ++g) {
    double mass = 0.0;
    for (std::size_t k : tree.members(g)) mass += probs[k];
    d.group[g] = (g == root ? 1.0 : 0.0) - mass;
  }
  return d;
}

HeadGradients head_gradients(const BilinearHead& head, std::span<const double> v1,
                             std::span<const double> v2, std::size_t target_leaf,
                             Messages messages) {
  check_features(head, v1, v2);
  HeadGradients grads;
  grads.probs = posterior(head, v1, v2);
  grads.label_deltas = deltas(grads.probs, target_leaf, head.tree);
  grads.log_likelihood = std::log(std::max(grads.probs[target_leaf], 1e-300));
  const Vector& delta_leaf = grads.label_deltas.leaf;

  grads.v1 = Matrix(head.v1.rows(), head.v1.cols());
  grads.v2 = Matrix(head.v2.rows(), head.v2.cols());
  add_outer(grads.v1, v1, delta_leaf);
  add_outer(grads.v2, v2, delta_leaf);
  grads.bias = delta_leaf;

  grads.delta1 = matvec(head.v1, delta_leaf);
  grads.delta2 = matvec(head.v2, delta_leaf);

  if (head.variant == HeadVariant::Full) {
    const std::size_t classes = head.num_classes();
    if (messages == Messages::Compute) {
      grads.message_2to1 = Matrix(head.dim_a(), classes);
      grads.message_1to2 = Matrix(head.dim_v(), classes);
    }
    grads.full_weights.reserve(classes);
    for (std::size_t y = 0; y < classes; ++y) {
      Matrix gw(head.dim_a(), head.dim_v());
      add_outer(gw, v1, v2, delta_leaf[y]);
      grads.full_weights.push_back(std::move(gw));
      const Vector m21 = matvec(head.full_weights[y], v2);
      const Vector m12 = matvec(head.full_weights[y], v1, Transpose::Yes);
      axpy(delta_leaf[y], m21, grads.delta1);
      axpy(delta_leaf[y], m12, grads.delta2);
      if (messages == Messages::Compute) {
        for (std::size_t i = 0; i < m21.size(); ++i) grads.message_2to1(i, y) = m21[i];
        for (std::size_t i = 0; i < m12.size(); ++i) grads.message_1to2(i, y) = m12[i];
      }
    }
    return grads;
  }

  // Without sharing the group-level error is replaced by the leaf-level one.
  const Vector& delta_col =
      head.variant == HeadVariant::FactoredShared ? grads.label_deltas.group : delta_leaf;

  const Vector proj1 = matvec(head.u1, v1, Transpose::Yes);  // U1^T v1
  const Vector proj2 = matvec(head.u2, v2, Transpose::Yes);  // U2^T v2
  const Vector fused = hadamard(proj1, proj2);
  const Vector weighted = matvec(head.w, delta_col);  // W delta

  grads.w = Matrix(head.w.rows(), head.w.cols());
  add_outer(grads.w, fused, delta_col);
  grads.u1 = Matrix(head.u1.rows(), head.u1.cols());
  grads.u2 = Matrix(head.u2.rows(), head.u2.cols());
  add_outer(grads.u1, v1, hadamard(proj2, weighted));
  add_outer(grads.u2, v2, hadamard(proj1, weighted));

  // M^{2->1} delta = U1 (U2^T v2 (.) W delta), and symmetrically for M^{1->2};
  // this avoids forming the K x cols message matrices.
  axpy(1.0, matvec(head.u1, hadamard(proj2, weighted)), grads.delta1);
  axpy(1.0, matvec(head.u2, hadamard(proj1, weighted)), grads.delta2);

  if (messages == Messages::Compute) {
    // m^{2->1}_k = U1 diag(w_k) U2^T v2, m^{1->2}_k = U2 diag(w_k) U1^T v1
    const std::size_t cols = head.w.cols();
    const std::size_t factors = head.num_factors();
    Matrix scaled2(factors, cols);
    Matrix scaled1(factors, cols);
    for (std::size_t f = 0; f < factors; ++f) {
      for (std::size_t k = 0; k < cols; ++k) {
        scaled2(f, k) = proj2[f] * head.w(f, k);
        scaled1(f, k) = proj1[f] * head.w(f, k);
      }
    }
    grads.message_2to1 = matmul(head.u1, scaled2);
    grads.message_1to2 = matmul(head.u2, scaled1);
  }
  return grads;
}

ParamCount param_count(HeadVariant variant, std::size_t dim_a, std::size_t dim_v,
                       std::size_t factors, std::size_t classes, std::size_t groups) {
  ParamCount count;
  switch (variant) {
    case HeadVariant::Full:
      count.bilinear = classes * dim_a * dim_v;
      break;
    case HeadVariant::Factored:
      count.w_block = factors * classes;
      count.bilinear = factors * (dim_a + dim_v) + count.w_block;
      break;
    case HeadVariant::FactoredShared:
      count.w_block = factors * groups;
      count.bilinear = factors * (dim_a + dim_v) + count.w_block;
      break;
  }
  count.linear = classes * (dim_a + dim_v);
  count.bias = classes;
  count.total = count.bilinear + count.linear + count.bias;
  return count;
}

ParamCount param_count(const BilinearHead& head) {
  return param_count(head.variant, head.dim_a(), head.dim_v(),
                     head.variant == HeadVariant::Full ? 0 : head.num_factors(),
                     head.num_classes(), head.tree.num_groups());
}

}  // namespace bimodal
