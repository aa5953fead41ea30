#include <gtest/gtest.h>

#include <cmath>

#include "bimodal/linalg.hpp"
#include "bimodal/rng.hpp"
#include "oracles.hpp"

namespace bimodal {
namespace {

TEST(Matmul, IdentityLeavesOperandUnchanged) {
  const Matrix a{{1, 2}, {3, 4}};
  EXPECT_EQ(matmul(Matrix::identity(2), a), a);
}

TEST(Matmul, ProjectorZeroesSecondRow) {
  const Matrix p{{1, 0}, {0, 0}};
  const Matrix b{{5, 6}, {7, 8}};
  EXPECT_EQ(matmul(p, b), (Matrix{{5, 6}, {0, 0}}));
}

TEST(Matmul, HandMultipliedProduct) {
  // 1*5+2*7, 1*6+2*8 / 3*5+4*7, 3*6+4*8
  EXPECT_EQ(matmul(Matrix{{1, 2}, {3, 4}}, Matrix{{5, 6}, {7, 8}}),
            (Matrix{{19, 22}, {43, 50}}));
}

TEST(Matmul, TransposeFlags) {
  const Matrix a{{1, 2, 3}, {4, 5, 6}};  // 2x3
  // a^T a is 3x3, a a^T is 2x2
  const Matrix ata = matmul(a, a, Transpose::Yes, Transpose::No);
  ASSERT_EQ(ata.rows(), 3u);
  EXPECT_DOUBLE_EQ(ata(0, 0), 17.0);
  EXPECT_DOUBLE_EQ(ata(1, 2), 2 * 3 + 5 * 6);
  const Matrix aat = matmul(a, a, Transpose::No, Transpose::Yes);
  EXPECT_EQ(aat, (Matrix{{14, 32}, {32, 77}}));
}

TEST(Matmul, ShapeErrorNamesBothShapes) {
  try {
    matmul(Matrix(2, 3), Matrix(2, 3));
    FAIL() << "expected ShapeError";
  } catch (const ShapeError& e) {
    const std::string what = e.what();
    EXPECT_NE(what.find("2x3"), std::string::npos);
  }
}

TEST(Matvec, BothOrientations) {
  const Matrix a{{1, 2}, {3, 4}, {5, 6}};
  EXPECT_EQ(matvec(a, Vector{1, 1}), (Vector{3, 7, 11}));
  EXPECT_EQ(matvec(a, Vector{1, 0, 1}, Transpose::Yes), (Vector{6, 8}));
  EXPECT_THROW(matvec(a, Vector{1, 2, 3}), ShapeError);
}

TEST(Hadamard, Examples) {
  EXPECT_EQ(hadamard(Vector{1, 2}, Vector{3, 4}), (Vector{3, 8}));
  const Vector u{0.3, -1.7, 2.5};
  EXPECT_EQ(hadamard(u, Vector(3, 0.0)), Vector(3, 0.0));
  EXPECT_EQ(hadamard(u, Vector(3, 1.0)), u);
  EXPECT_THROW(hadamard(Vector{1}, Vector{1, 2}), ShapeError);
}

TEST(FrobeniusProject, InsideBallUnchanged) {
  const Matrix m{{0.6, 0.0}, {0.0, 0.8}};  // norm 1
  EXPECT_EQ(frobenius_project(m, 2.0), m);
}

TEST(FrobeniusProject, ThreeFourFiveScalesByTwoFifths) {
  const Matrix out = frobenius_project(Matrix{{3, 0}, {0, 4}}, 2.0);
  EXPECT_NEAR(out(0, 0), 1.2, 1e-15);
  EXPECT_NEAR(out(1, 1), 1.6, 1e-15);
  EXPECT_EQ(out(0, 1), 0.0);
  EXPECT_LE(out.frobenius_norm(), 2.0);
}

TEST(FrobeniusProject, ZeroMatrixStaysZero) {
  EXPECT_EQ(frobenius_project(Matrix(3, 2), 0.5), Matrix(3, 2));
}

TEST(FrobeniusProject, RejectsNonPositiveLambda) {
  EXPECT_THROW(frobenius_project(Matrix(1, 1), 0.0), ParameterError);
  EXPECT_THROW(frobenius_project(Matrix(1, 1), -1.0), ParameterError);
}

TEST(FrobeniusProject, IdempotentAndBoundedOnRandomInputs) {
  Rng rng(2024);
  for (int trial = 0; trial < 500; ++trial) {
    const double lambda = rng.uniform(0.1, 5.0);
    Matrix m(1 + rng.below(6), 1 + rng.below(6));
    testing::randomize(m, rng);
    const double target = rng.uniform(0.0, 10.0 * lambda);
    const double norm = m.frobenius_norm();
    if (norm > 0) {
      for (double& x : m.values()) x *= target / norm;
    }
    const Matrix once = frobenius_project(m, lambda);
    const Matrix twice = frobenius_project(once, lambda);
    EXPECT_LE(once.frobenius_norm(), lambda + 1e-12);
    for (std::size_t i = 0; i < once.size(); ++i) {
      EXPECT_NEAR(once.values()[i], twice.values()[i], 1e-15);
    }
  }
}

TEST(Matrix, IdentityIsExactLeftUnitOnRandomMatrices) {
  Rng rng(5);
  for (int trial = 0; trial < 50; ++trial) {
    Matrix a(1 + rng.below(7), 1 + rng.below(7));
    testing::randomize(a, rng, 100.0);
    EXPECT_EQ(matmul(Matrix::identity(a.rows()), a), a);
  }
}

TEST(Matrix, RaggedInitializerRejected) {
  EXPECT_THROW((Matrix{{1, 2}, {3}}), ShapeError);
}

}  // namespace
}  // namespace bimodal
