#include "bimodal/cli/cli.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <cctype>
#include <charconv>
#include <fstream>
#include <memory>
#include <sstream>

#include "bimodal/dataset.hpp"
#include "bimodal/fusion.hpp"
#include "bimodal/io_errors.hpp"
#include "bimodal/model_io.hpp"
#include "bimodal/synthetic.hpp"
#include "bimodal/training.hpp"

namespace bimodal::cli {
namespace {

/// Flag combinations CLI11 cannot express; reported like a parse error.
class UsageError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

class Scanner {
 public:
  explicit Scanner(std::string_view text) : text_(text) {}

  std::size_t pos() const noexcept { return pos_; }
  bool done() {
    skip_space();
    return pos_ == text_.size();
  }
  char peek() {
    skip_space();
    return pos_ < text_.size() ? text_[pos_] : '\0';
  }
  void expect(char c) {
    if (peek() != c) {
      throw ArchError(std::string("expected '") + c + "'", pos_);
    }
    ++pos_;
  }
  std::size_t number() {
    skip_space();
    std::size_t value = 0;
    const char* first = text_.data() + pos_;
    const auto [ptr, ec] = std::from_chars(first, text_.data() + text_.size(), value);
    if (ec != std::errc() || ptr == first) throw ArchError("expected a positive integer", pos_);
    if (value == 0) throw ArchError("dimensions must be positive", pos_);
    pos_ += static_cast<std::size_t>(ptr - first);
    return value;
  }

 private:
  void skip_space() {
    while (pos_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[pos_]))) ++pos_;
  }

  std::string_view text_;
  std::size_t pos_ = 0;
};

/// Reads a comma list and records where each entry starts.
std::vector<std::size_t> dim_list(Scanner& s, std::vector<std::size_t>& starts) {
  std::vector<std::size_t> dims;
  for (;;) {
    s.peek();
    starts.push_back(s.pos());
    dims.push_back(s.number());
    if (s.peek() != ',') return dims;
    s.expect(',');
  }
}

HeadVariant variant_from(const std::string& name) {
  if (name == "full") return HeadVariant::Full;
  if (name == "factored") return HeadVariant::Factored;
  return HeadVariant::FactoredShared;
}

ModelKind kind_from(const std::string& name) {
  if (name == "audio") return ModelKind::AudioOnly;
  if (name == "visual") return ModelKind::VisualOnly;
  if (name == "fused") return ModelKind::Fused;
  return ModelKind::Bilinear;
}

/// Flags shared by `train` and `gradcheck` that describe the model.
struct ModelFlags {
  std::string mode = "bilinear";
  std::string variant = "shared";
  std::string arch;
  std::size_t classes = 0;
  std::size_t groups = 0;
  std::string top;
  std::string tower_a_file;
  std::string tower_v_file;
  double init_scale = TrainConfig{}.init_scale;
  double lambda = 2.0;
};

void add_model_flags(CLI::App& cmd, ModelFlags& f) {
  cmd.add_option("--mode", f.mode, "audio | visual | fused | bilinear")
      ->check(CLI::IsMember({"audio", "visual", "fused", "bilinear"}))
      ->capture_default_str();
  cmd.add_option("--variant", f.variant, "bilinear head: full | factored | shared")
      ->check(CLI::IsMember({"full", "factored", "shared"}))
      ->capture_default_str();
  cmd.add_option("--arch", f.arch, "architecture, e.g. \"[20,40,8 | 20,40,8 | F=8]\"");
  cmd.add_option("--classes", f.classes,
                 "class count; when given, --arch lists tower widths only");
  cmd.add_option("--groups", f.groups, "number of label groups (balanced tree)");
  cmd.add_option("--top", f.top, "hidden widths of the fused top network, e.g. 64,32");
  cmd.add_option("--tower-a", f.tower_a_file, "model file to take the audio tower from")
      ->check(CLI::ExistingFile);
  cmd.add_option("--tower-v", f.tower_v_file, "model file to take the visual tower from")
      ->check(CLI::ExistingFile);
  cmd.add_option("--init-scale", f.init_scale, "uniform init half-width")
      ->check(CLI::NonNegativeNumber)
      ->capture_default_str();
  cmd.add_option("--lambda", f.lambda, "Frobenius bound on U1, U2")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
}

std::optional<Architecture> arch_from(const ModelFlags& f) {
  if (f.arch.empty()) return std::nullopt;
  Architecture arch = parse_arch(f.arch, f.classes == 0);
  if (f.classes != 0) arch.classes = f.classes;
  return arch;
}

MlpTower tower_from_file(const std::string& path, bool audio) {
  Model donor = load_model(path);
  MlpTower& t = audio ? donor.tower_a : donor.tower_v;
  if (t.dims.empty()) {
    throw ValidationError(path + " has no " + (audio ? "audio" : "visual") + " tower");
  }
  return std::move(t);
}

/// Builds an initialised model of the requested mode over `tree`.
Model build_model(const ModelFlags& f, const LabelTree& tree, std::uint64_t seed,
                  std::ostream& err) {
  const std::optional<Architecture> arch = arch_from(f);
  if (arch && arch->classes != tree.num_leaves()) {
    throw UsageError("architecture has " + std::to_string(arch->classes) +
                     " classes, label tree has " + std::to_string(tree.num_leaves()));
  }
  const ModelKind kind = kind_from(f.mode);

  auto tower = [&](bool audio) -> MlpTower {
    const std::string& file = audio ? f.tower_a_file : f.tower_v_file;
    if (!file.empty()) return tower_from_file(file, audio);
    if (!arch) throw UsageError(std::string("--arch or --tower-") + (audio ? "a" : "v") +
                                " is required");
    // Distinct streams from the ones make_* derives from `seed`.
    return init_tower(audio ? arch->tower_a : arch->tower_v, seed + (audio ? 1 : 2),
                      f.init_scale);
  };

  switch (kind) {
    case ModelKind::AudioOnly:
    case ModelKind::VisualOnly: {
      const bool audio = kind == ModelKind::AudioOnly;
      const std::string& file = audio ? f.tower_a_file : f.tower_v_file;
      if (!arch && file.empty()) throw UsageError("--arch is required");
      Model m = make_unimodal(kind, file.empty() ? (audio ? arch->tower_a : arch->tower_v)
                                                 : tower_from_file(file, audio).dims,
                              tree, seed, f.init_scale);
      if (!file.empty()) (audio ? m.tower_a : m.tower_v) = tower_from_file(file, audio);
      return m;
    }
    case ModelKind::Fused:
      return make_fused(tower(true), tower(false), parse_dims(f.top), tree, seed, f.init_scale);
    case ModelKind::Bilinear: {
      if (!arch) throw UsageError("--arch is required for bilinear models");
      const HeadVariant variant = variant_from(f.variant);
      if (variant != HeadVariant::Full && !arch->factors) {
        throw UsageError("--arch needs an F=n part for the " + f.variant + " variant");
      }
      const std::size_t factors = arch->factors.value_or(1);
      if (variant != HeadVariant::Full && factors > arch->tower_a.back() &&
          factors > arch->tower_v.back()) {
        err << "warning: F=" << factors << " exceeds both final hidden widths\n";
      }
      Model m = make_bilinear(variant, arch->tower_a, arch->tower_v, factors, tree, f.lambda,
                              seed, f.init_scale);
      if (!f.tower_a_file.empty()) m.tower_a = tower_from_file(f.tower_a_file, true);
      if (!f.tower_v_file.empty()) m.tower_v = tower_from_file(f.tower_v_file, false);
      validate(m);
      return m;
    }
  }
  throw UsageError("unknown mode " + f.mode);
}

LabelTree tree_for(std::size_t classes, std::size_t groups) {
  if (groups == 0) return LabelTree::singletons(classes);
  if (groups > classes || classes % groups != 0) {
    throw UsageError("--groups must divide --classes");
  }
  return LabelTree::balanced(classes, groups);
}

void write_text(const std::string& path, const std::string& text) {
  const std::string tmp = path + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw FormatError("cannot open " + tmp + " for writing");
    out << text;
    out.flush();
    if (!out) throw FormatError("write failed: " + tmp);
  }
  std::filesystem::rename(tmp, path);
}

std::uint64_t default_seed() {
  if (const char* env = std::getenv("BIMODAL_SEED")) {
    std::uint64_t v = 0;
    const std::string_view s(env);
    const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec == std::errc() && ptr == s.data() + s.size()) return v;
  }
  return 1;
}

}  // namespace

Architecture parse_arch(std::string_view text, bool with_classes) {
  Scanner s(text);
  s.expect('[');
  std::vector<std::size_t> starts_a, starts_v;
  Architecture arch;
  arch.tower_a = dim_list(s, starts_a);
  s.expect('|');
  arch.tower_v = dim_list(s, starts_v);
  if (s.peek() == '|') {
    s.expect('|');
    if (s.peek() != 'F') throw ArchError("expected 'F='", s.pos());
    s.expect('F');
    s.expect('=');
    arch.factors = s.number();
  }
  s.expect(']');
  if (!s.done()) throw ArchError("trailing characters", s.pos());

  if (with_classes) {
    if (arch.tower_a.size() < 2) throw ArchError("audio side needs input and class dims", 1);
    if (arch.tower_v.size() < 2) {
      throw ArchError("visual side needs input and class dims", starts_v.front());
    }
    const std::size_t ca = arch.tower_a.back();
    const std::size_t cv = arch.tower_v.back();
    if (ca != cv) {
      throw ArchError("class counts " + std::to_string(ca) + " != " + std::to_string(cv),
                      starts_v.back());
    }
    arch.classes = ca;
    arch.tower_a.pop_back();
    arch.tower_v.pop_back();
  }
  return arch;
}

std::vector<std::size_t> parse_dims(std::string_view text) {
  std::vector<std::size_t> dims;
  Scanner s(text);
  if (s.done()) return dims;
  std::vector<std::size_t> starts;
  dims = dim_list(s, starts);
  if (!s.done()) throw ArchError("expected ','", s.pos());
  return dims;
}

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Bimodal classifiers with bilinear softmax heads", "bimodal"};
  app.set_config("--config", "", "key=value file; options of a command go under [command]");
  app.require_subcommand(1);
  std::uint64_t seed = default_seed();

  // synth ------------------------------------------------------------------
  SynthSpec synth;
  std::string synth_train, synth_test;
  CLI::App* synth_cmd = app.add_subcommand("synth", "generate a planted train/test pair");
  synth_cmd->add_option("--out-train", synth_train, "training set path")->required();
  synth_cmd->add_option("--out-test", synth_test, "test set path")->required();
  synth_cmd->add_option("--d1", synth.d1)->capture_default_str();
  synth_cmd->add_option("--d2", synth.d2)->capture_default_str();
  synth_cmd->add_option("--classes", synth.classes)->capture_default_str();
  synth_cmd->add_option("--groups", synth.groups)->capture_default_str();
  synth_cmd->add_option("--n-train", synth.n_train)->capture_default_str();
  synth_cmd->add_option("--n-test", synth.n_test)->capture_default_str();
  synth_cmd->add_option("--noise", synth.noise_std)->capture_default_str();
  synth_cmd->add_option("--rank", synth.interaction_rank)->capture_default_str();
  synth_cmd->add_option("--linear-scale", synth.linear_scale)->capture_default_str();
  synth_cmd->add_option("--seed", seed, "PRNG seed (default $BIMODAL_SEED or 1)");

  // train ------------------------------------------------------------------
  ModelFlags train_flags;
  TrainConfig config;
  std::string train_path, test_path, model_out, log_out;
  CLI::App* train_cmd = app.add_subcommand("train", "train a model and write it to --out");
  add_model_flags(*train_cmd, train_flags);
  train_cmd->add_option("--train", train_path, "training set")->required()->check(
      CLI::ExistingFile);
  train_cmd->add_option("--test", test_path, "test set, evaluated every epoch")->check(
      CLI::ExistingFile);
  train_cmd->add_option("--out", model_out, "model output path")->required();
  train_cmd->add_option("--log", log_out, "metrics log, one JSON record per line");
  train_cmd->add_option("--lr", config.learning_rate)->check(CLI::NonNegativeNumber)
      ->capture_default_str();
  train_cmd->add_option("--epochs", config.epochs)->capture_default_str();
  train_cmd->add_option("--batch", config.minibatch_size)->check(CLI::PositiveNumber)
      ->capture_default_str();
  train_cmd->add_option("--seed", seed, "PRNG seed (default $BIMODAL_SEED or 1)");
  train_cmd->add_flag("--freeze-towers", config.freeze_towers, "do not update tower weights");
  train_cmd->add_flag("--freeze-bilinear", config.freeze_bilinear,
                      "do not update the bilinear term");

  // eval -------------------------------------------------------------------
  std::string eval_model, eval_data;
  CLI::App* eval_cmd = app.add_subcommand("eval", "print metrics of a model on a dataset");
  eval_cmd->add_option("--model", eval_model)->required()->check(CLI::ExistingFile);
  eval_cmd->add_option("--data", eval_data)->required()->check(CLI::ExistingFile);

  // gradcheck --------------------------------------------------------------
  ModelFlags check_flags;
  check_flags.init_scale = 0.5;
  double step = 1e-5;
  CLI::App* check_cmd =
      app.add_subcommand("gradcheck", "compare analytic gradients with central differences");
  add_model_flags(*check_cmd, check_flags);
  check_cmd->add_option("--step", step, "finite-difference step")->check(CLI::PositiveNumber)
      ->capture_default_str();
  check_cmd->add_option("--seed", seed, "PRNG seed (default $BIMODAL_SEED or 1)");

  // ensemble ---------------------------------------------------------------
  std::vector<std::string> members;
  std::string ens_data;
  CLI::App* ens_cmd = app.add_subcommand("ensemble", "average the posteriors of several models");
  ens_cmd->add_option("models", members, "model files")->required()->expected(2, -1)->check(
      CLI::ExistingFile);
  ens_cmd->add_option("--data", ens_data)->required()->check(CLI::ExistingFile);

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (synth_cmd->parsed()) {
      synth.seed = seed;
      const SyntheticData data = generate_synthetic(synth);
      save_dataset(data.train, synth_train);
      save_dataset(data.test, synth_test);
      out << "{\"train_samples\":" << data.train.size()
          << ",\"test_samples\":" << data.test.size() << "}\n";
    } else if (train_cmd->parsed()) {
      const Dataset train_set = load_dataset(train_path);
      std::unique_ptr<Dataset> test_set;
      if (!test_path.empty()) test_set = std::make_unique<Dataset>(load_dataset(test_path));
      if (train_flags.groups != 0 && train_flags.groups != train_set.tree.num_groups()) {
        throw UsageError("--groups " + std::to_string(train_flags.groups) +
                         " does not match the dataset's " +
                         std::to_string(train_set.tree.num_groups()));
      }
      config.seed = seed;
      config.init_scale = train_flags.init_scale;
      config.lambda = train_flags.lambda;
      const Model initial = build_model(train_flags, train_set.tree, seed, err);
      std::ostringstream log;
      const TrainResult result =
          train(initial, train_set, config, test_set.get(),
                [&](const EpochRecord& r) { log << to_json_line(r) << '\n'; });
      save_model(result.model, model_out);
      if (!log_out.empty()) write_text(log_out, log.str());
      const std::size_t tail = test_set ? 2 : 1;
      for (std::size_t i = result.log.size() - tail; i < result.log.size(); ++i) {
        out << to_json_line(result.log[i]) << '\n';
      }
    } else if (eval_cmd->parsed()) {
      out << to_json_line(evaluate(load_model(eval_model), load_dataset(eval_data))) << '\n';
    } else if (check_cmd->parsed()) {
      const std::optional<Architecture> arch = arch_from(check_flags);
      if (!arch) throw UsageError("--arch is required");
      const std::size_t groups = check_flags.groups;
      const Model model = build_model(check_flags, tree_for(arch->classes, groups), seed, err);
      Rng rng(seed);
      Vector x1(model.kind == ModelKind::VisualOnly ? 1 : arch->tower_a.front());
      Vector x2(model.kind == ModelKind::AudioOnly ? 1 : arch->tower_v.front());
      for (double& x : x1) x = rng.uniform(-1.0, 1.0);
      for (double& x : x2) x = rng.uniform(-1.0, 1.0);
      const std::size_t target = rng.below(arch->classes);
      const GradCheckReport r = grad_check(model, x1, x2, target, step);
      std::ostringstream line;
      line.precision(17);
      line << "{\"max_rel_error\":" << r.max_rel_error << ",\"parameter\":\"" << r.parameter
           << "\",\"index\":" << r.index << ",\"checked\":" << r.checked << "}";
      out << line.str() << '\n';
      return r.max_rel_error < 1e-5 ? kExitOk : kExitFailure;
    } else if (ens_cmd->parsed()) {
      std::vector<Model> models;
      for (const std::string& path : members) models.push_back(load_model(path));
      out << to_json_line(evaluate(Ensemble(std::move(models)), load_dataset(ens_data))) << '\n';
    }
  } catch (const UsageError& e) {
    err << "usage error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const ArchError& e) {
    err << "usage error: --arch: " << e.what() << '\n';
    return kExitUsage;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitFailure;
  }
  return kExitOk;
}

}  // namespace bimodal::cli
