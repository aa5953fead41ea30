#include <gtest/gtest.h>

#include <cmath>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "bimodal/dataset.hpp"
#include "bimodal/io_errors.hpp"
#include "bimodal/model_io.hpp"
#include "bimodal/synthetic.hpp"
#include "bimodal/training.hpp"
#include "fixtures.hpp"
#include "oracles.hpp"

namespace bimodal {
namespace {

namespace fs = std::filesystem;

class TempDir {
 public:
  TempDir() {
    const auto* info = ::testing::UnitTest::GetInstance()->current_test_info();
    path_ = fs::temp_directory_path() /
            (std::string("bimodal_") + info->test_suite_name() + "_" + info->name());
    fs::remove_all(path_);
    fs::create_directories(path_);
  }
  ~TempDir() { fs::remove_all(path_); }
  fs::path operator/(const std::string& name) const { return path_ / name; }

 private:
  fs::path path_;
};

std::string serialize(const Dataset& d) {
  std::ostringstream out(std::ios::binary);
  write_dataset(d, out);
  return out.str();
}

std::string serialize(const Model& m) {
  std::ostringstream out(std::ios::binary);
  write_model(m, out);
  return out.str();
}

SynthSpec small_spec() {
  SynthSpec spec;
  spec.n_train = 400;
  spec.n_test = 100;
  spec.seed = 5;
  return spec;
}

// ----------------------------------------------------------------- synthetic

TEST(Synthetic, SameSeedIsBitIdentical) {
  const SyntheticData a = generate_synthetic(small_spec());
  const SyntheticData b = generate_synthetic(small_spec());
  EXPECT_EQ(serialize(a.train), serialize(b.train));
  EXPECT_EQ(serialize(a.test), serialize(b.test));
  SynthSpec other = small_spec();
  other.seed = 6;
  EXPECT_NE(serialize(generate_synthetic(other).train), serialize(a.train));
}

TEST(Synthetic, SplitsAndShapes) {
  const SyntheticData d = generate_synthetic(small_spec());
  EXPECT_EQ(d.train.split, Split::Train);
  EXPECT_EQ(d.test.split, Split::Test);
  EXPECT_EQ(d.train.size(), 400u);
  EXPECT_EQ(d.test.dim_v(), 20u);
  EXPECT_EQ(d.train.tree, LabelTree::balanced(8, 4));
}

TEST(Synthetic, RejectsInvalidSpecs) {
  SynthSpec spec = small_spec();
  spec.groups = 3;  // does not divide 8
  EXPECT_THROW(generate_synthetic(spec), ParameterError);
  spec = small_spec();
  spec.interaction_rank = 21;
  EXPECT_THROW(generate_synthetic(spec), ParameterError);
  spec = small_spec();
  spec.noise_std = -0.1;
  EXPECT_THROW(generate_synthetic(spec), ParameterError);
}

TEST(Synthetic, DefaultSpecLeafHistogramWithinThreeSigma) {
  SynthSpec spec;
  spec.n_test = 1;
  spec.seed = 7;
  const SyntheticData d = generate_synthetic(spec);
  std::vector<std::size_t> counts(spec.classes, 0);
  for (std::uint32_t y : d.train.labels) ++counts[y];
  const double n = static_cast<double>(spec.n_train);
  const double p = 1.0 / static_cast<double>(spec.classes);
  const double sigma = std::sqrt(n * p * (1.0 - p));
  for (std::size_t c : counts) EXPECT_LE(std::abs(static_cast<double>(c) - n * p), 3.0 * sigma);
}

TEST(Synthetic, PlantedRuleIsExactWithoutNoise) {
  SynthSpec spec = small_spec();
  spec.noise_std = 0.0;
  const SyntheticData d = generate_synthetic(spec);
  std::size_t wrong = 0;
  for (std::size_t i = 0; i < d.test.size(); ++i) {
    wrong += d.planted.label(d.test.x1.row(i), d.test.x2.row(i)) != d.test.labels[i];
  }
  EXPECT_LT(static_cast<double>(wrong) / static_cast<double>(d.test.size()), 0.01);
}

SynthSpec xor_spec() {
  SynthSpec spec;
  spec.classes = 2;
  spec.groups = 2;
  spec.interaction_rank = 1;
  spec.linear_scale = 0.0;
  spec.noise_std = 0.0;
  spec.n_train = 2000;
  spec.n_test = 2000;
  spec.seed = 3;
  return spec;
}

TEST(Synthetic, ProductLabelFlipsWithModality) {
  const SyntheticData d = generate_synthetic(xor_spec());
  for (std::size_t i = 0; i < 200; ++i) {
    Vector neg(d.test.x1.row(i).begin(), d.test.x1.row(i).end());
    for (double& x : neg) x = -x;
    EXPECT_NE(d.planted.label(neg, d.test.x2.row(i)), d.test.labels[i]);
  }
}

TEST(Synthetic, LinearClassifierStaysNearChanceOnProductLabels) {
  const SyntheticData d = generate_synthetic(xor_spec());
  const std::vector<std::size_t> identity{20};
  const Model linear = make_fused(make_tower(identity), make_tower(identity), {}, d.train.tree,
                                  1, 0.01);
  TrainConfig config;
  config.epochs = 10;
  config.learning_rate = 0.05;
  const Model trained = train(linear, d.train, config).model;
  EXPECT_GT(evaluate(trained, d.test).leaf_error, 0.4);

  const std::vector<std::size_t> dims{20, 8};
  const Model bilinear = make_bilinear(HeadVariant::FactoredShared, identity, identity, 2,
                                       d.train.tree, 2.0, 1, 0.3);
  config.learning_rate = 0.1;
  EXPECT_LT(evaluate(train(bilinear, d.train, config).model, d.test).leaf_error, 0.1);
}

// ------------------------------------------------------------------ datasets

TEST(DatasetFile, RoundTripIsBitIdentical) {
  TempDir dir;
  const SyntheticData d = generate_synthetic(small_spec());
  save_dataset(d.train, dir / "train.bin");
  save_dataset(d.test, dir / "test.bin");
  const Dataset train = load_dataset(dir / "train.bin");
  EXPECT_EQ(train, d.train);
  EXPECT_EQ(load_dataset(dir / "test.bin"), d.test);
  EXPECT_EQ(serialize(train), serialize(d.train));
  EXPECT_FALSE(fs::exists(dir / "train.bin.tmp"));
}

TEST(DatasetFile, HeaderLayout) {
  const Dataset d = testing::random_dataset(3, 2, 1, LabelTree::balanced(4, 2), 1);
  const std::string bytes = serialize(d);
  EXPECT_EQ(bytes.substr(0, 4), "BMDS");
  std::uint32_t version = 0;
  std::memcpy(&version, bytes.data() + 4, 4);
  EXPECT_EQ(version, 1u);
  // header 36 bytes, group table 4*C, features 8*N*(d1+d2), labels 4*N
  EXPECT_EQ(bytes.size(), 36u + 16 + 8 * 3 * 3 + 12);
}

TEST(DatasetFile, TruncationRaisesParseErrorWithOffset) {
  TempDir dir;
  const Dataset d = testing::random_dataset(10, 2, 2, LabelTree::balanced(4, 2), 1);
  const std::string bytes = serialize(d);
  for (std::size_t cut : {std::size_t{2}, std::size_t{20}, bytes.size() / 2, bytes.size() - 1}) {
    std::istringstream in(bytes.substr(0, cut));
    try {
      read_dataset(in);
      FAIL() << "no error at cut " << cut;
    } catch (const ParseError& e) {
      EXPECT_LE(e.offset(), cut);
    }
    std::ofstream(dir / "cut.bin", std::ios::binary) << bytes.substr(0, cut);
    EXPECT_THROW(load_dataset(dir / "cut.bin"), ParseError);
  }
}

TEST(DatasetFile, ZeroClassesRejected) {
  std::string bytes = serialize(testing::random_dataset(1, 1, 1, LabelTree::singletons(1), 1));
  const std::uint32_t zero = 0;
  std::memcpy(bytes.data() + 20, &zero, 4);  // C
  std::istringstream in(bytes);
  EXPECT_THROW(read_dataset(in), ValidationError);
}

TEST(DatasetFile, WrongMagicAndVersion) {
  const std::string good = serialize(testing::random_dataset(2, 1, 1, LabelTree::singletons(2), 1));
  std::string bad = good;
  bad[0] = 'X';
  std::istringstream magic(bad);
  EXPECT_THROW(read_dataset(magic), ParseError);
  bad = good;
  bad[4] = 2;
  std::istringstream version(bad);
  EXPECT_THROW(read_dataset(version), VersionError);
}

TEST(DatasetFile, TrailingBytesRejected) {
  std::istringstream in(serialize(testing::random_dataset(2, 1, 1, LabelTree::singletons(2), 1)) +
                        "x");
  EXPECT_THROW(read_dataset(in), ParseError);
}

TEST(DatasetFile, InvalidContentsRejectedOnSave) {
  TempDir dir;
  Dataset d = testing::random_dataset(2, 1, 1, LabelTree::singletons(2), 1);
  d.labels[1] = 2;
  EXPECT_THROW(save_dataset(d, dir / "bad.bin"), ValidationError);
  d.labels[1] = 1;
  d.x1(0, 0) = std::nan("");
  EXPECT_THROW(save_dataset(d, dir / "bad.bin"), ValidationError);
}

// -------------------------------------------------------------------- models

std::vector<Model> every_model_kind() {
  const LabelTree tree = LabelTree::balanced(6, 3);
  const std::vector<std::size_t> a{4, 5, 3};
  const std::vector<std::size_t> v{2, 3};
  const std::vector<std::size_t> top{4};
  std::vector<Model> out;
  out.push_back(make_unimodal(ModelKind::AudioOnly, a, tree, 1, 0.3));
  out.push_back(make_unimodal(ModelKind::VisualOnly, v, tree, 2, 0.3));
  out.push_back(make_fused(init_tower(a, 3, 0.3), init_tower(v, 4, 0.3), {}, tree, 5, 0.3));
  out.push_back(make_fused(init_tower(a, 3, 0.3), init_tower(v, 4, 0.3), top, tree, 6, 0.3));
  for (HeadVariant variant :
       {HeadVariant::Full, HeadVariant::Factored, HeadVariant::FactoredShared}) {
    out.push_back(make_bilinear(variant, a, v, 2, tree, 1.5, 7, 0.3));
  }
  return out;
}

TEST(ModelFile, EveryKindRoundTripsBitwise) {
  TempDir dir;
  const Vector x1{0.1, 0.2, -0.3, 0.4};
  const Vector x2{0.9, -0.5};
  for (const Model& m : every_model_kind()) {
    save_model(m, dir / "m.model");
    const Model back = load_model(dir / "m.model");
    EXPECT_EQ(back, m) << to_string(m.kind);
    EXPECT_EQ(serialize(back), serialize(m));
    const Vector p = predict(m, x1, x2);
    const Vector q = predict(back, x1, x2);
    EXPECT_EQ(std::memcmp(p.data(), q.data(), p.size() * sizeof(double)), 0);
  }
}

TEST(ModelFile, HeaderIsReadableText) {
  const Model m = every_model_kind().back();
  const std::string text = serialize(m);
  EXPECT_EQ(text.rfind("bimodal-model 1\nkind=bilinear\nvariant=shared\n", 0), 0u);
  EXPECT_NE(text.find("\nlambda=1.5\n"), std::string::npos);
  EXPECT_NE(text.find("\ngroup_of=0,0,1,1,2,2\n"), std::string::npos);
}

TEST(ModelFile, FullScaleBilinearRoundTrip) {
  TempDir dir;
  const std::vector<std::size_t> a{360, 500, 500, 200};
  const std::vector<std::size_t> v{540, 500, 500, 200};
  const Model m = make_bilinear(HeadVariant::FactoredShared, a, v, 200,
                                testing::interleaved_tree(1328, 42), 2.0, 11, 0.05);
  EXPECT_EQ(param_count(m.head).w_block, 8400u);
  save_model(m, dir / "large.model");
  EXPECT_EQ(load_model(dir / "large.model"), m);
}

TEST(ModelFile, WrongMagicAndVersion) {
  const std::string good = serialize(every_model_kind().front());
  std::istringstream magic("bimodel-model 1\n" + good.substr(good.find('\n') + 1));
  EXPECT_THROW(read_model(magic), ParseError);
  std::istringstream version("bimodal-model 2\n" + good.substr(good.find('\n') + 1));
  EXPECT_THROW(read_model(version), VersionError);
}

TEST(ModelFile, TruncatedPayloadRejected) {
  const std::string good = serialize(every_model_kind().back());
  std::istringstream in(good.substr(0, good.size() - 3));
  EXPECT_THROW(read_model(in), ParseError);
}

TEST(ModelFile, InconsistentHeaderRejected) {
  std::string text = serialize(every_model_kind().back());
  const auto at = text.find("classes=6");
  text.replace(at, 9, "classes=7");
  std::istringstream in(text);
  EXPECT_THROW(read_model(in), FormatError);
}

}  // namespace
}  // namespace bimodal
