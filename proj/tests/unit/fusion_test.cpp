#include <gtest/gtest.h>

#include "bimodal/fusion.hpp"
#include "bimodal/model.hpp"
#include "bimodal/training.hpp"
#include "fixtures.hpp"

namespace bimodal {
namespace {

TEST(FuseFeatures, ConcatenatesTowerOutputs) {
  const MlpTower a = make_tower(std::vector<std::size_t>{2});
  const MlpTower v = make_tower(std::vector<std::size_t>{1});
  EXPECT_EQ(fuse_features(a, v, Vector{1, 2}, Vector{3}), (Vector{1, 2, 3}));
}

TEST(FuseFeatures, TwoHundredWideTowersGiveFourHundredDims) {
  const MlpTower a = init_tower(std::vector<std::size_t>{360, 500, 500, 200}, 1, 0.05);
  const MlpTower v = init_tower(std::vector<std::size_t>{540, 500, 500, 200}, 2, 0.05);
  EXPECT_EQ(fuse_features(a, v, Vector(360, 0.1), Vector(540, 0.2)).size(), 400u);
}

TEST(FuseFeatures, InputMismatchThrows) {
  const MlpTower a = make_tower(std::vector<std::size_t>{2, 3});
  const MlpTower v = make_tower(std::vector<std::size_t>{2, 3});
  EXPECT_THROW(fuse_features(a, v, Vector{1, 2}, Vector{1}), ShapeError);
}

TEST(AveragePosteriors, Examples) {
  const std::vector<Vector> two{{1.0, 0.0}, {0.0, 1.0}};
  EXPECT_EQ(average_posteriors(two), (Vector{0.5, 0.5}));
  const std::vector<Vector> one{{0.2, 0.3, 0.5}};
  EXPECT_EQ(average_posteriors(one), one.front());
  const std::vector<Vector> three{{0.6, 0.4}, {0.6, 0.4}, {0.6, 0.4}};
  EXPECT_NEAR(average_posteriors(three)[0], 0.6, 1e-15);
}

TEST(AveragePosteriors, Errors) {
  EXPECT_THROW(average_posteriors(std::vector<Vector>{}), ParameterError);
  const std::vector<Vector> ragged{{0.5, 0.5}, {1.0}};
  EXPECT_THROW(average_posteriors(ragged), ShapeError);
}

TEST(Ensemble, RejectsMembersOnDifferentTrees) {
  const std::vector<std::size_t> dims{3, 2};
  std::vector<Model> members;
  members.push_back(make_unimodal(ModelKind::AudioOnly, dims, LabelTree::balanced(4, 2), 1, 0.1));
  members.push_back(make_unimodal(ModelKind::AudioOnly, dims, LabelTree::singletons(4), 2, 0.1));
  EXPECT_THROW(Ensemble{members}, ShapeError);
  EXPECT_THROW(Ensemble{{}}, ParameterError);
}

TEST(Ensemble, PredictIsMeanOfMembers) {
  const LabelTree tree = LabelTree::balanced(4, 2);
  const std::vector<std::size_t> dims{3, 5};
  std::vector<Model> members{
      make_unimodal(ModelKind::AudioOnly, dims, tree, 1, 0.8),
      make_unimodal(ModelKind::VisualOnly, dims, tree, 2, 0.8),
      make_bilinear(HeadVariant::FactoredShared, dims, dims, 2, tree, 2.0, 3, 0.8),
  };
  const Ensemble ensemble(members);
  const Vector x1{0.1, -0.4, 0.9};
  const Vector x2{0.7, 0.2, -0.3};
  const Vector got = ensemble.predict(x1, x2);
  for (std::size_t k = 0; k < 4; ++k) {
    double s = 0.0;
    for (const Model& m : members) s += predict(m, x1, x2)[k];
    EXPECT_NEAR(got[k], s / 3.0, 1e-15);
  }
}

TEST(FusedModel, TopInputIsConcatenatedWidth) {
  const MlpTower a = init_tower(std::vector<std::size_t>{4, 3}, 1, 0.1);
  const MlpTower v = init_tower(std::vector<std::size_t>{5, 6}, 2, 0.1);
  const std::vector<std::size_t> hidden{7};
  const Model m = make_fused(a, v, hidden, LabelTree::singletons(3), 9, 0.1);
  EXPECT_EQ(m.top.input_dim(), 9u);
  EXPECT_EQ(m.softmax.weights.rows(), 7u);
  EXPECT_EQ(m.softmax.weights.cols(), 3u);
}

TEST(FusedModel, TrainingNeverTouchesTowers) {
  const LabelTree tree = LabelTree::balanced(4, 2);
  const MlpTower a = init_tower(std::vector<std::size_t>{3, 4}, 1, 0.5);
  const MlpTower v = init_tower(std::vector<std::size_t>{2, 4}, 2, 0.5);
  for (const std::vector<std::size_t>& hidden :
       {std::vector<std::size_t>{}, std::vector<std::size_t>{5}}) {
    const Model m = make_fused(a, v, hidden, tree, 3, 0.5);
    TrainConfig config;
    config.epochs = 3;
    config.learning_rate = 0.5;
    const Dataset data = testing::random_dataset(64, 3, 2, tree, 4);
    const TrainResult r = train(m, data, config);
    EXPECT_EQ(r.model.tower_a, a);
    EXPECT_EQ(r.model.tower_v, v);
    EXPECT_NE(r.model.softmax, m.softmax);

    Model grads = zeros_like(m);
    accumulate_gradients(m, data.x1.row(0), data.x2.row(0), data.labels[0], grads);
    for (const Matrix& w : grads.tower_a.weights) {
      for (double x : w.values()) EXPECT_EQ(x, 0.0);
    }
  }
}

}  // namespace
}  // namespace bimodal
