#ifndef BIMODAL_TRAINING_HPP_
#define BIMODAL_TRAINING_HPP_

#include <cstddef>
#include <cstdint>
#include <functional>
#include <memory>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "bimodal/dataset.hpp"
#include "bimodal/fusion.hpp"
#include "bimodal/model.hpp"

namespace bimodal {

struct TrainConfig {
  double learning_rate = 0.1;
  std::size_t epochs = 10;
  std::size_t minibatch_size = 32;
  double init_scale = 0.05;
  std::uint64_t seed = 1;
  double lambda = 2.0;
  /// Skip updates to tower parameters (always implied for fused models).
  bool freeze_towers = false;
  /// Skip updates to the bilinear term (W^y or U1, U2, w).
  bool freeze_bilinear = false;
};

void validate(const TrainConfig& config);

struct Metrics {
  double leaf_error = 0.0;
  double group_error = 0.0;
  double nll = 0.0;              // -E, natural log
  std::size_t clamped = 0;       // target probabilities clamped to 1e-300
  std::size_t samples = 0;
};

struct EpochRecord {
  std::size_t epoch = 0;
  std::string split;
  Metrics metrics;
};

/// One JSON object per line: {"epoch":..,"split":..,"leaf_error":..,
/// "group_error":..,"nll":..,"samples":..,"clamped":..}
std::string to_json_line(const EpochRecord& record);
std::string to_json_line(const Metrics& metrics);

/// E = (1/N) sum_i log rho(y_i | x_i): the quantity training ascends.
/// Probabilities are clamped at 1e-300 before the log; the number of clamped
/// targets is written to `clamped` when given.
double cross_entropy(std::span<const Vector> posteriors, std::span<const std::uint32_t> targets,
                     std::size_t* clamped = nullptr);

class NonFiniteGradient : public std::runtime_error {
 public:
  explicit NonFiniteGradient(const std::string& parameter)
      : std::runtime_error("non-finite gradient in " + parameter), parameter_(parameter) {}
  const std::string& parameter() const noexcept { return parameter_; }

 private:
  std::string parameter_;
};

struct FrozenParts {
  bool towers = false;
  bool bilinear = false;
};

/// theta <- theta + lr * grad for every non-frozen parameter, then U1, U2 are
/// projected onto the Frobenius ball of radius lambda. Throws
/// NonFiniteGradient before touching anything if a gradient entry is not finite.
void sgd_step(Model& model, const Model& grads, double learning_rate, double lambda,
              FrozenParts frozen = {});

/// Raised when the objective stops being finite. Carries the model as it was
/// at the start of the failing epoch.
class DivergenceError : public std::runtime_error {
 public:
  DivergenceError(const std::string& what, std::shared_ptr<const Model> checkpoint,
                  std::size_t epoch)
      : std::runtime_error(what), checkpoint_(std::move(checkpoint)), epoch_(epoch) {}
  const Model& checkpoint() const noexcept { return *checkpoint_; }
  std::size_t epoch() const noexcept { return epoch_; }

 private:
  std::shared_ptr<const Model> checkpoint_;
  std::size_t epoch_;
};

struct TrainResult {
  Model model;
  std::vector<EpochRecord> log;
};

/// Minibatch SGD ascent on E. Samples are reshuffled every epoch by a PRNG
/// seeded from config.seed. Records for epoch 0 (the initial model) and every
/// completed epoch are appended to the log, for the train split and, when
/// given, the test split. `on_record` sees each record as it is produced.
TrainResult train(Model model, const Dataset& train_set, const TrainConfig& config,
                  const Dataset* test_set = nullptr,
                  const std::function<void(const EpochRecord&)>& on_record = {});

/// Overwrites `grads` with the mean gradient over the samples whose indices
/// are listed in `batch`, accumulated in that order. Returns the batch-mean
/// log-likelihood.
double batch_gradients(const Model& model, const Dataset& data,
                       std::span<const std::size_t> batch, Model& grads);

struct GradCheckReport {
  double max_rel_error = 0.0;
  std::string parameter;   // where max_rel_error occurred
  std::size_t index = 0;   // flat index within that parameter
  std::size_t checked = 0; // number of scalar parameters compared
};

/// Compares accumulate_gradients against central differences
/// (E(theta + h) - E(theta - h)) / 2h of the single-sample log-likelihood, for
/// every parameter that receives a gradient. Relative error is
/// |analytic - fd| / max(1, |fd|).
GradCheckReport grad_check(const Model& model, std::span<const double> x1,
                           std::span<const double> x2, std::size_t target, double h = 1e-5);

/// Leaf error, group error (argmax of group-summed posteriors) and NLL.
/// argmax ties go to the lowest index. Throws ParameterError on an empty set.
Metrics evaluate(const Model& model, const Dataset& data);
Metrics evaluate(const Ensemble& ensemble, const Dataset& data);
Metrics evaluate_posteriors(std::span<const Vector> posteriors, const Dataset& data);

}  // namespace bimodal

#endif  // BIMODAL_TRAINING_HPP_
