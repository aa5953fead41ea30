#include "bimodal/mlp.hpp"

#include <cmath>
#include <string>

namespace bimodal {

double sigmoid(double u) noexcept {
  if (u >= 0.0) return 1.0 / (1.0 + std::exp(-u));
  const double e = std::exp(u);
  return e / (1.0 + e);
}

Vector sigmoid(std::span<const double> u) {
  Vector out(u.size());
  for (std::size_t i = 0; i < u.size(); ++i) out[i] = sigmoid(u[i]);
  return out;
}

double sigmoid_derivative(double u) noexcept {
  const double s = sigmoid(u);
  return s * (1.0 - s);
}

MlpTower make_tower(std::span<const std::size_t> dims) {
  if (dims.empty()) throw ParameterError("tower: empty layer dims");
  MlpTower tower;
  tower.dims.assign(dims.begin(), dims.end());
  for (std::size_t d : dims) {
    if (d == 0) throw ParameterError("tower: layer dims must be >= 1");
  }
  for (std::size_t l = 0; l + 1 < dims.size(); ++l) {
    tower.weights.emplace_back(dims[l], dims[l + 1]);
    tower.biases.emplace_back(dims[l + 1], 0.0);
  }
  return tower;
}

MlpTower init_tower(std::span<const std::size_t> dims, Rng& rng, double scale) {
  if (!(scale >= 0.0)) throw ParameterError("tower: init scale must be >= 0");
  MlpTower tower = make_tower(dims);
  for (Matrix& w : tower.weights) {
    for (double& x : w.values()) x = rng.uniform(-scale, scale);
  }
  return tower;
}

MlpTower init_tower(std::span<const std::size_t> dims, std::uint64_t seed, double scale) {
  Rng rng(seed);
  return init_tower(dims, rng, scale);
}

void validate(const MlpTower& tower) {
  if (tower.dims.empty()) throw ShapeError("tower: empty layer dims");
  const std::size_t layers = tower.dims.size() - 1;
  if (tower.weights.size() != layers || tower.biases.size() != layers) {
    throw ShapeError("tower: expected " + std::to_string(layers) + " layers");
  }
  for (std::size_t l = 0; l < layers; ++l) {
    const Matrix& w = tower.weights[l];
    if (w.rows() != tower.dims[l] || w.cols() != tower.dims[l + 1] ||
        tower.biases[l].size() != tower.dims[l + 1]) {
      throw ShapeError("tower: layer " + std::to_string(l) + " has weight " + w.shape_string() +
                       ", expected " + std::to_string(tower.dims[l]) + "x" +
                       std::to_string(tower.dims[l + 1]));
    }
  }
}

ForwardTrace forward(const MlpTower& tower, std::span<const double> x) {
  if (x.size() != tower.input_dim()) {
    throw ShapeError("tower forward: input length " + std::to_string(x.size()) +
                     ", expected " + std::to_string(tower.input_dim()));
  }
  ForwardTrace trace;
  trace.pre.reserve(tower.num_layers());
  trace.post.reserve(tower.num_layers() + 1);
  trace.post.emplace_back(x.begin(), x.end());
  for (std::size_t l = 0; l < tower.num_layers(); ++l) {
    Vector u = matvec(tower.weights[l], trace.post.back(), Transpose::Yes);
    axpy(1.0, tower.biases[l], u);
    trace.post.push_back(sigmoid(u));
    trace.pre.push_back(std::move(u));
  }
  return trace;
}

TowerGradients backward(const MlpTower& tower, const ForwardTrace& trace,
                        std::span<const double> delta_top) {
  if (delta_top.size() != tower.output_dim()) {
    throw ShapeError("tower backward: delta length " + std::to_string(delta_top.size()) +
                     ", expected " + std::to_string(tower.output_dim()));
  }
  if (trace.pre.size() != tower.num_layers() || trace.post.size() != tower.num_layers() + 1) {
    throw ShapeError("tower backward: trace does not match tower depth");
  }
  const std::size_t layers = tower.num_layers();
  TowerGradients grads;
  grads.weights.resize(layers);
  grads.biases.resize(layers);

  // delta holds dE/dh_{l+1}; sigma' is applied before moving down a layer.
  Vector delta(delta_top.begin(), delta_top.end());
  for (std::size_t l = layers; l-- > 0;) {
    const Vector& u = trace.pre[l];
    Vector local(u.size());
    for (std::size_t i = 0; i < u.size(); ++i) local[i] = sigmoid_derivative(u[i]) * delta[i];
    Matrix gw(tower.dims[l], tower.dims[l + 1]);
    add_outer(gw, trace.post[l], local);
    grads.weights[l] = std::move(gw);
    delta = matvec(tower.weights[l], local);
    grads.biases[l] = std::move(local);
  }
  grads.delta_input = std::move(delta);
  return grads;
}

}  // namespace bimodal
