#include "bimodal/synthetic.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "bimodal/rng.hpp"

namespace bimodal {

namespace {

Vector gaussian(Rng& rng, std::size_t n) {
  Vector v(n);
  for (double& x : v) x = rng.normal();
  return v;
}

/// Removes the components of v along the (orthonormal) columns of basis.
void orthogonalize(Vector& v, const Matrix& basis, std::size_t cols) {
  for (std::size_t c = 0; c < cols; ++c) {
    double proj = 0.0;
    for (std::size_t i = 0; i < v.size(); ++i) proj += v[i] * basis(i, c);
    for (std::size_t i = 0; i < v.size(); ++i) v[i] -= proj * basis(i, c);
  }
}

void normalize(Vector& v, double norm) {
  double n = 0.0;
  for (double x : v) n += x * x;
  n = std::sqrt(n);
  if (n == 0.0) return;
  for (double& x : v) x *= norm / n;
}

Matrix orthonormal_columns(Rng& rng, std::size_t rows, std::size_t cols) {
  Matrix m(rows, cols);
  for (std::size_t c = 0; c < cols; ++c) {
    Vector v = gaussian(rng, rows);
    orthogonalize(v, m, c);
    normalize(v, 1.0);
    for (std::size_t i = 0; i < rows; ++i) m(i, c) = v[i];
  }
  return m;
}

/// Linear direction for each leaf, orthogonal to the interaction subspace.
/// Consecutive leaves of a group share a direction with opposite signs.
Matrix leaf_directions(Rng& rng, const LabelTree& tree, const Matrix& basis, double scale) {
  const std::size_t dim = basis.rows();
  Matrix out(tree.num_leaves(), dim);
  if (scale == 0.0 || dim == basis.cols()) return out;
  for (std::size_t g = 0; g < tree.num_groups(); ++g) {
    const auto members = tree.members(g);
    for (std::size_t j = 0; j + 1 < members.size(); j += 2) {
      Vector v = gaussian(rng, dim);
      orthogonalize(v, basis, basis.cols());
      normalize(v, scale);
      for (std::size_t i = 0; i < dim; ++i) {
        out(members[j], i) = v[i];
        out(members[j + 1], i) = -v[i];
      }
    }
  }
  return out;
}

/// Signed coordinate axes (+e_0, +e_1, ..., -e_0, -e_1, ...) for the first 2R
/// groups; random unit directions beyond that.
Matrix group_directions(Rng& rng, std::size_t groups, std::size_t rank) {
  Matrix out(groups, rank);
  for (std::size_t g = 0; g < groups; ++g) {
    if (g < 2 * rank) {
      out(g, g % rank) = g < rank ? 1.0 : -1.0;
    } else {
      Vector v = gaussian(rng, rank);
      normalize(v, 1.0);
      for (std::size_t r = 0; r < rank; ++r) out(g, r) = v[r];
    }
  }
  return out;
}

Dataset draw(Rng& rng, const SynthSpec& spec, const PlantedModel& planted, std::size_t n,
             Split split) {
  Dataset ds;
  ds.split = split;
  ds.tree = planted.tree;
  ds.x1 = Matrix(n, spec.d1);
  ds.x2 = Matrix(n, spec.d2);
  ds.labels.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    auto x1 = ds.x1.row(i);
    auto x2 = ds.x2.row(i);
    for (double& x : x1) x = rng.normal();
    for (double& x : x2) x = rng.normal();
    ds.labels[i] = planted.label(x1, x2);
    if (spec.noise_std > 0.0) {
      for (double& x : x1) x += spec.noise_std * rng.normal();
      for (double& x : x2) x += spec.noise_std * rng.normal();
    }
  }
  return ds;
}

}  // namespace

void validate(const SynthSpec& spec) {
  if (spec.d1 == 0 || spec.d2 == 0) throw ParameterError("synth: d1, d2 must be >= 1");
  if (spec.classes == 0 || spec.groups == 0 || spec.groups > spec.classes ||
      spec.classes % spec.groups != 0) {
    throw ParameterError("synth: need G | C with 1 <= G <= C, got C=" +
                         std::to_string(spec.classes) + ", G=" + std::to_string(spec.groups));
  }
  if (spec.interaction_rank == 0 || spec.interaction_rank > std::min(spec.d1, spec.d2)) {
    throw ParameterError("synth: interaction rank must be in [1, min(d1, d2)]");
  }
  if (!(spec.noise_std >= 0.0) || !std::isfinite(spec.noise_std)) {
    throw ParameterError("synth: noise_std must be >= 0");
  }
  if (!(spec.linear_scale >= 0.0) || !std::isfinite(spec.linear_scale)) {
    throw ParameterError("synth: linear_scale must be >= 0");
  }
}

Vector PlantedModel::logits(std::span<const double> x1, std::span<const double> x2) const {
  const Vector interaction =
      hadamard(matvec(proj_a, x1, Transpose::Yes), matvec(proj_v, x2, Transpose::Yes));
  const Vector per_group = matvec(group_weights, interaction);
  Vector out = matvec(linear_a, x1);
  axpy(1.0, matvec(linear_v, x2), out);
  for (std::size_t y = 0; y < out.size(); ++y) out[y] += per_group[tree.group_of(y)];
  return out;
}

std::uint32_t PlantedModel::label(std::span<const double> x1, std::span<const double> x2) const {
  const Vector l = logits(x1, x2);
  return static_cast<std::uint32_t>(std::max_element(l.begin(), l.end()) - l.begin());
}

SyntheticData generate_synthetic(const SynthSpec& spec) {
  validate(spec);
  Rng rng(spec.seed);
  SyntheticData out;
  PlantedModel& planted = out.planted;
  planted.tree = LabelTree::balanced(spec.classes, spec.groups);
  planted.proj_a = orthonormal_columns(rng, spec.d1, spec.interaction_rank);
  planted.proj_v = orthonormal_columns(rng, spec.d2, spec.interaction_rank);
  planted.group_weights = group_directions(rng, spec.groups, spec.interaction_rank);
  planted.linear_a = leaf_directions(rng, planted.tree, planted.proj_a, spec.linear_scale);
  planted.linear_v = leaf_directions(rng, planted.tree, planted.proj_v, spec.linear_scale);

  out.train = draw(rng, spec, planted, spec.n_train, Split::Train);
  out.test = draw(rng, spec, planted, spec.n_test, Split::Test);
  return out;
}

}  // namespace bimodal
