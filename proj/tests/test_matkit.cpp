#include "lyapcert/matkit.hpp"

#include <gtest/gtest.h>

#include <algorithm>
#include <limits>
#include <random>

using namespace lyapcert;
using namespace lyapcert::matkit;

namespace {

Mat random_mat(std::mt19937_64& rng, int r, int c) {
  std::normal_distribution<double> g;
  Mat m(r, c);
  for (int i = 0; i < r; ++i)
    for (int j = 0; j < c; ++j) m(i, j) = g(rng);
  return m;
}

}  // namespace

TEST(RankTol, Examples) {
  EXPECT_EQ(rank_tol(Mat::Identity(2, 2)), 2u);
  Mat r1(2, 2);
  r1 << 1, 2, 2, 4;
  EXPECT_EQ(rank_tol(r1), 1u);
  Mat tiny(2, 2);
  tiny << 1, 0, 0, 1e-15;
  EXPECT_EQ(rank_tol(tiny), 1u);
  EXPECT_EQ(rank_tol(Mat::Zero(3, 2)), 0u);
}

TEST(RankTol, RejectsNonFinite) {
  Mat m = Mat::Identity(2, 2);
  m(0, 1) = std::numeric_limits<double>::quiet_NaN();
  EXPECT_THROW(rank_tol(m), InputError);
}

TEST(RankTol, PermutationAndTransposeInvariant) {
  std::mt19937_64 rng(7);
  for (int trial = 0; trial < 20; ++trial) {
    Mat low = random_mat(rng, 5, 2) * random_mat(rng, 2, 4);
    std::size_t r = rank_tol(low);
    EXPECT_EQ(r, 2u);
    EXPECT_EQ(rank_tol(low.transpose()), r);
    Eigen::PermutationMatrix<Eigen::Dynamic> pr(5), pc(4);
    pr.setIdentity();
    pc.setIdentity();
    std::shuffle(pr.indices().data(), pr.indices().data() + 5, rng);
    std::shuffle(pc.indices().data(), pc.indices().data() + 4, rng);
    EXPECT_EQ(rank_tol(pr * low * pc), r);
  }
}

TEST(MinEig, Examples) {
  EXPECT_DOUBLE_EQ(min_eig(Mat::Zero(3, 3)), 0.0);
  EXPECT_NEAR(min_eig(Vec(Eigen::Vector3d(2, -5, 1)).asDiagonal().toDenseMatrix()), -5.0, 1e-14);
  Mat s(2, 2);
  s << 2, 1, 1, 2;
  EXPECT_NEAR(min_eig(s), 1.0, 1e-14);
}

TEST(MinEig, RejectsAsymmetric) {
  Mat s(2, 2);
  s << 1, 2, 0, 1;
  EXPECT_THROW(min_eig(s), InputError);
}

TEST(MinEig, ShiftProperty) {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> c(-5, 5);
  for (int trial = 0; trial < 50; ++trial) {
    Mat a = random_mat(rng, 6, 6);
    Mat s = sym(a);
    double shift = c(rng);
    EXPECT_NEAR(min_eig(s + shift * Mat::Identity(6, 6)), min_eig(s) + shift, 1e-9);
  }
}

TEST(Kron, Examples) {
  Mat m(2, 3);
  m << 1, 2, 3, 4, 5, 6;
  EXPECT_EQ(kron(Mat::Ones(1, 1), m), m);
  EXPECT_EQ(kron(Mat::Identity(2, 2), Mat::Constant(1, 1, 3.0)), Mat(3.0 * Mat::Identity(2, 2)));

  const double sigma = 0.7;
  Mat base(3, 3);
  base << sigma, 0, 1, 0, 0, 0, 1, 0, 0;
  base /= 2;
  Mat e1 = Mat::Zero(2, 2);
  e1(0, 0) = 1;
  Mat k = kron(base, e1);
  ASSERT_EQ(k.rows(), 6);
  ASSERT_EQ(k.cols(), 6);
  Mat expect = Mat::Zero(6, 6);
  expect(0, 0) = sigma / 2;
  expect(0, 4) = expect(4, 0) = 0.5;
  EXPECT_EQ(k, expect);
}

TEST(Kron, MixedProduct) {
  std::mt19937_64 rng(3);
  for (int trial = 0; trial < 20; ++trial) {
    Mat a = random_mat(rng, 2, 3), b = random_mat(rng, 3, 2);
    Mat c = random_mat(rng, 3, 4), d = random_mat(rng, 2, 2);
    Mat lhs = kron(a, b) * kron(c, d);
    Mat rhs = kron(a * c, b * d);
    EXPECT_LE((lhs - rhs).cwiseAbs().maxCoeff(), 1e-12 * (1 + rhs.cwiseAbs().maxCoeff()));
  }
}

TEST(NullSpace, SpansKernel) {
  Mat m(2, 4);
  m << 1, 0, 1, 0, 0, 1, 0, 1;
  Mat z = null_space(m);
  ASSERT_EQ(z.cols(), 2);
  EXPECT_LE((m * z).norm(), 1e-12);
  EXPECT_LE((z.transpose() * z - Mat::Identity(2, 2)).norm(), 1e-12);
  EXPECT_EQ(null_space(Mat::Identity(3, 3)).cols(), 0);
}

TEST(Stack, SkipsEmptyParts) {
  Mat a = Mat::Ones(1, 2);
  Mat v = vstack({a, Mat(0, 2), 2 * a});
  EXPECT_EQ(v.rows(), 2);
  EXPECT_EQ(v(1, 0), 2.0);
  Mat h = hstack({a, Mat(1, 0), a});
  EXPECT_EQ(h.cols(), 4);
}
