#include "bimodal/training.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <numeric>
#include <string>

#include "bimodal/rng.hpp"

namespace bimodal {

namespace {

constexpr std::uint64_t kShuffleStream = 0xd1b54a32d192ed03ULL;
constexpr double kProbabilityFloor = 1e-300;

std::string format_double(double x) {
  if (!std::isfinite(x)) return "null";
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, x);
  return std::string(buf, res.ptr);
}

std::size_t argmax(std::span<const double> values) {
  std::size_t best = 0;
  for (std::size_t i = 1; i < values.size(); ++i) {
    if (values[i] > values[best]) best = i;
  }
  return best;
}

void check_compatible(const Model& model, const Dataset& data) {
  auto mismatch = [](const std::string& what, std::size_t got, std::size_t want) {
    throw ShapeError("model/dataset mismatch: " + what + " is " + std::to_string(got) +
                     " in the dataset, " + std::to_string(want) + " in the model");
  };
  if (data.tree.num_leaves() != model.num_classes()) {
    mismatch("C", data.tree.num_leaves(), model.num_classes());
  }
  const bool uses_a = model.kind != ModelKind::VisualOnly;
  const bool uses_v = model.kind != ModelKind::AudioOnly;
  if (uses_a && data.dim_a() != model.tower_a.input_dim()) {
    mismatch("d1", data.dim_a(), model.tower_a.input_dim());
  }
  if (uses_v && data.dim_v() != model.tower_v.input_dim()) {
    mismatch("d2", data.dim_v(), model.tower_v.input_dim());
  }
}

bool is_frozen(ModelKind kind, ParamRole role, FrozenParts frozen) {
  if (!has_gradient(kind, role)) return true;
  if (frozen.towers && (role == ParamRole::TowerA || role == ParamRole::TowerV)) return true;
  if (frozen.bilinear && role == ParamRole::Bilinear) return true;
  return false;
}

template <typename Predict>
Metrics evaluate_with(const Dataset& data, Predict&& predict) {
  std::vector<Vector> posteriors;
  posteriors.reserve(data.size());
  for (std::size_t i = 0; i < data.size(); ++i) {
    posteriors.push_back(predict(data.x1.row(i), data.x2.row(i)));
  }
  return evaluate_posteriors(posteriors, data);
}

}  // namespace

void validate(const TrainConfig& config) {
  if (!(config.learning_rate >= 0.0) || !std::isfinite(config.learning_rate)) {
    throw ParameterError("train: learning rate must be finite and >= 0");
  }
  if (!(config.lambda > 0.0)) throw ParameterError("train: lambda must be positive");
  if (config.minibatch_size == 0) throw ParameterError("train: minibatch size must be >= 1");
  if (!(config.init_scale >= 0.0)) throw ParameterError("train: init scale must be >= 0");
}

std::string to_json_line(const Metrics& m) {
  return "{\"leaf_error\":" + format_double(m.leaf_error) +
         ",\"group_error\":" + format_double(m.group_error) + ",\"nll\":" + format_double(m.nll) +
         ",\"samples\":" + std::to_string(m.samples) + ",\"clamped\":" + std::to_string(m.clamped) +
         "}";
}

std::string to_json_line(const EpochRecord& r) {
  return "{\"epoch\":" + std::to_string(r.epoch) + ",\"split\":\"" + r.split + "\"," +
         to_json_line(r.metrics).substr(1);
}

double cross_entropy(std::span<const Vector> posteriors, std::span<const std::uint32_t> targets,
                     std::size_t* clamped) {
  if (posteriors.size() != targets.size()) {
    throw ShapeError("cross_entropy: " + std::to_string(posteriors.size()) + " posteriors, " +
                     std::to_string(targets.size()) + " targets");
  }
  if (posteriors.empty()) throw ParameterError("cross_entropy: no samples");
  std::size_t floor_hits = 0;
  double sum = 0.0;
  for (std::size_t i = 0; i < posteriors.size(); ++i) {
    if (targets[i] >= posteriors[i].size()) {
      throw ParameterError("cross_entropy: target " + std::to_string(targets[i]) + " out of range");
    }
    double p = posteriors[i][targets[i]];
    if (!(p >= kProbabilityFloor)) {
      p = kProbabilityFloor;
      ++floor_hits;
    }
    sum += std::log(p);
  }
  if (clamped) *clamped = floor_hits;
  return sum / static_cast<double>(posteriors.size());
}

void sgd_step(Model& model, const Model& grads, double learning_rate, double lambda,
              FrozenParts frozen) {
  auto params = parameters(model);
  const auto gparams = parameters(grads);
  if (params.size() != gparams.size()) throw ShapeError("sgd_step: gradient structure differs");
  for (std::size_t i = 0; i < params.size(); ++i) {
    if (params[i].values.size() != gparams[i].values.size()) {
      throw ShapeError("sgd_step: gradient for " + params[i].name + " has wrong size");
    }
    if (!is_frozen(model.kind, params[i].role, frozen) && !all_finite(gparams[i].values)) {
      throw NonFiniteGradient(params[i].name);
    }
  }
  for (std::size_t i = 0; i < params.size(); ++i) {
    if (is_frozen(model.kind, params[i].role, frozen)) continue;
    axpy(learning_rate, gparams[i].values, params[i].values);
  }
  if (model.kind == ModelKind::Bilinear && model.head.factored()) {
    frobenius_project_inplace(model.head.u1, lambda);
    frobenius_project_inplace(model.head.u2, lambda);
  }
}

double batch_gradients(const Model& model, const Dataset& data,
                       std::span<const std::size_t> batch, Model& grads) {
  if (batch.empty()) throw ParameterError("batch_gradients: empty batch");
  for (ParamRef& p : parameters(grads)) std::fill(p.values.begin(), p.values.end(), 0.0);
  const double scale = 1.0 / static_cast<double>(batch.size());
  double total = 0.0;
  for (std::size_t i : batch) {
    total += accumulate_gradients(model, data.x1.row(i), data.x2.row(i), data.labels[i], grads,
                                  scale);
  }
  return total * scale;
}

TrainResult train(Model model, const Dataset& train_set, const TrainConfig& config,
                  const Dataset* test_set,
                  const std::function<void(const EpochRecord&)>& on_record) {
  validate(config);
  validate(model);
  validate(train_set);
  check_compatible(model, train_set);
  if (test_set) check_compatible(model, *test_set);
  if (train_set.size() == 0) throw ParameterError("train: empty training set");

  const FrozenParts frozen{config.freeze_towers || model.kind == ModelKind::Fused,
                           config.freeze_bilinear};
  TrainResult result;
  auto record = [&](std::size_t epoch) {
    EpochRecord r{epoch, "train", evaluate(model, train_set)};
    result.log.push_back(r);
    if (on_record) on_record(r);
    if (test_set && test_set->size() > 0) {
      EpochRecord t{epoch, "test", evaluate(model, *test_set)};
      result.log.push_back(t);
      if (on_record) on_record(t);
    }
    return r.metrics.nll;
  };
  record(0);

  Rng rng(config.seed ^ kShuffleStream);
  std::vector<std::size_t> order(train_set.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  Model grads = zeros_like(model);

  for (std::size_t epoch = 1; epoch <= config.epochs; ++epoch) {
    auto checkpoint = std::make_shared<const Model>(model);
    rng.shuffle(std::span(order));
    for (std::size_t start = 0; start < order.size(); start += config.minibatch_size) {
      const std::size_t count = std::min(config.minibatch_size, order.size() - start);
      const double objective =
          batch_gradients(model, train_set, std::span(order).subspan(start, count), grads);
      if (!std::isfinite(objective)) {
        throw DivergenceError("train: objective became non-finite in epoch " +
                                  std::to_string(epoch),
                              checkpoint, epoch);
      }
      try {
        sgd_step(model, grads, config.learning_rate, config.lambda, frozen);
      } catch (const NonFiniteGradient& e) {
        throw DivergenceError(std::string("train: ") + e.what() + " in epoch " +
                                  std::to_string(epoch),
                              checkpoint, epoch);
      }
    }
    const double nll = record(epoch);
    if (!std::isfinite(nll)) {
      throw DivergenceError("train: training NLL became non-finite after epoch " +
                                std::to_string(epoch),
                            checkpoint, epoch);
    }
  }
  result.model = std::move(model);
  return result;
}

GradCheckReport grad_check(const Model& model, std::span<const double> x1,
                           std::span<const double> x2, std::size_t target, double h) {
  if (!(h > 0.0)) throw ParameterError("grad_check: step must be positive");
  Model grads = zeros_like(model);
  accumulate_gradients(model, x1, x2, target, grads);

  Model probe = model;
  auto objective = [&] {
    return std::log(std::max(predict(probe, x1, x2)[target], kProbabilityFloor));
  };
  auto params = parameters(probe);
  const auto analytic = parameters(std::as_const(grads));
  GradCheckReport report;
  for (std::size_t p = 0; p < params.size(); ++p) {
    if (!has_gradient(probe.kind, params[p].role)) continue;
    auto values = params[p].values;
    for (std::size_t i = 0; i < values.size(); ++i) {
      const double saved = values[i];
      values[i] = saved + h;
      const double up = objective();
      values[i] = saved - h;
      const double down = objective();
      values[i] = saved;
      const double fd = (up - down) / (2.0 * h);
      const double err = std::abs(analytic[p].values[i] - fd) / std::max(1.0, std::abs(fd));
      ++report.checked;
      if (report.parameter.empty() || err > report.max_rel_error) {
        report.max_rel_error = err;
        report.parameter = params[p].name;
        report.index = i;
      }
    }
  }
  return report;
}

Metrics evaluate_posteriors(std::span<const Vector> posteriors, const Dataset& data) {
  if (data.size() == 0) throw ParameterError("evaluate: empty dataset");
  if (posteriors.size() != data.size()) {
    throw ShapeError("evaluate: posterior count does not match dataset size");
  }
  const LabelTree& tree = data.tree;
  std::size_t leaf_wrong = 0;
  std::size_t group_wrong = 0;
  Vector group_mass(tree.num_groups());
  for (std::size_t i = 0; i < data.size(); ++i) {
    const Vector& p = posteriors[i];
    if (p.size() != tree.num_leaves()) throw ShapeError("evaluate: posterior has wrong length");
    const std::size_t y = data.labels[i];
    if (argmax(p) != y) ++leaf_wrong;
    std::fill(group_mass.begin(), group_mass.end(), 0.0);
    for (std::size_t k = 0; k < p.size(); ++k) group_mass[tree.group_of(k)] += p[k];
    if (argmax(group_mass) != tree.group_of(y)) ++group_wrong;
  }
  Metrics m;
  m.samples = data.size();
  const double n = static_cast<double>(data.size());
  m.leaf_error = static_cast<double>(leaf_wrong) / n;
  m.group_error = static_cast<double>(group_wrong) / n;
  m.nll = -cross_entropy(posteriors, data.labels, &m.clamped);
  return m;
}

Metrics evaluate(const Model& model, const Dataset& data) {
  check_compatible(model, data);
  return evaluate_with(data, [&](auto x1, auto x2) { return predict(model, x1, x2); });
}

Metrics evaluate(const Ensemble& ensemble, const Dataset& data) {
  for (const Model& m : ensemble.members()) check_compatible(m, data);
  return evaluate_with(data, [&](auto x1, auto x2) { return ensemble.predict(x1, x2); });
}

}  // namespace bimodal
