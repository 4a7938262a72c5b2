#include "lyapcert/interp.hpp"
#include "support.hpp"

#include <gtest/gtest.h>

#include <random>

using namespace lyapcert;
using namespace lyapcert::interp;

namespace {

Mat rows2(std::initializer_list<std::initializer_list<double>> r) {
  Mat m(static_cast<Eigen::Index>(r.size()), static_cast<Eigen::Index>(r.begin()->size()));
  Eigen::Index i = 0;
  for (const auto& row : r) {
    Eigen::Index j = 0;
    for (double v : row) m(i, j++) = v;
    ++i;
  }
  return m;
}

Vec random_vec(std::mt19937_64& rng, Eigen::Index n) {
  std::normal_distribution<double> g;
  Vec v(n);
  for (Eigen::Index i = 0; i < n; ++i) v(i) = g(rng);
  return v;
}

MethodRepresentation random_rep(std::mt19937_64& rng, std::size_t n, std::size_t m) {
  std::normal_distribution<double> g;
  MethodRepresentation rep;
  rep.n = n;
  rep.m = m;
  auto rnd = [&](std::size_t r, std::size_t c) {
    Mat x(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c));
    for (Eigen::Index i = 0; i < x.size(); ++i) x(i) = g(rng);
    return x;
  };
  rep.A = rnd(n, n);
  rep.B = rnd(n, m);
  rep.C = rnd(m, n);
  rep.D = rnd(m, m);
  rep.classes.assign(m, FunctionClass{0.5, 3.0});
  return rep;
}

}  // namespace

TEST(Blocks, NonsmoothZeroModulus) {
  std::vector<FunctionClass> c = {{0, kInf}};
  auto b = build_blocks(c);
  EXPECT_EQ(b.M[0], rows2({{0, 0, 0.5}, {0, 0, 0}, {0.5, 0, 0}}));
  EXPECT_EQ(b.a[0], Vec::Constant(1, -1.0));
}

TEST(Blocks, SmoothUnitInterval) {
  std::vector<FunctionClass> c = {{0, 1}};
  auto b = build_blocks(c);
  EXPECT_EQ(b.M[0], rows2({{0, 0, 0.5}, {0, 0.5, -0.5}, {0.5, -0.5, 0.5}}));
}

TEST(Blocks, SecondComponentPlacement) {
  std::vector<FunctionClass> c = {{0, 4}, {1, kInf}};
  auto b = build_blocks(c);
  Mat expect = Mat::Zero(6, 6);
  // (y, u_i, u_j) blocks of size 2; component 2 sits at offsets 1, 3, 5.
  expect(1, 1) = 0.5;
  expect(1, 5) = expect(5, 1) = 0.5;
  EXPECT_EQ(b.M[1], expect);
  EXPECT_EQ(b.a[1], Vec(Eigen::Vector2d(0, -1)));
}

TEST(Blocks, RejectsBadClass) {
  std::vector<FunctionClass> c = {{2, 1}};
  EXPECT_THROW(build_blocks(c), InputError);
}

TEST(Blocks, VanishOnEqualSubgradients) {
  std::mt19937_64 rng(4);
  std::vector<FunctionClass> c = {{0.3, 5}, {0, kInf}, {1, 2}};
  auto b = build_blocks(c);
  for (int trial = 0; trial < 20; ++trial) {
    Vec u = random_vec(rng, 3);
    Vec z(9);
    z << Vec::Zero(3), u, u;
    for (const Mat& M : b.M) EXPECT_NEAR(matkit::quad(M, z), 0.0, 1e-12);
  }
}

TEST(Interpolation, Examples) {
  const FunctionClass smooth{0, 1};
  std::vector<Triplet> single = {{Vec::Zero(1), 0.0, Vec::Zero(1)}};
  EXPECT_TRUE(check_interpolation(single, smooth));

  std::vector<Triplet> quad = {{Vec::Zero(1), 0.0, Vec::Zero(1)}, {Vec::Ones(1), 0.5, Vec::Ones(1)}};
  EXPECT_TRUE(check_interpolation(quad, smooth));

  std::vector<Triplet> flat = {{Vec::Zero(1), 0.0, Vec::Zero(1)}, {Vec::Ones(1), 0.0, Vec::Zero(1)}};
  EXPECT_FALSE(check_interpolation(flat, FunctionClass{1, kInf}));
  EXPECT_TRUE(check_interpolation(flat, FunctionClass{0, kInf}));
}

TEST(Interpolation, QuadraticSamplesInterpolate) {
  std::mt19937_64 rng(8);
  std::uniform_real_distribution<double> h(0.5, 3.0);
  for (int trial = 0; trial < 20; ++trial) {
    Vec d(3);
    for (int i = 0; i < 3; ++i) d(i) = h(rng);
    std::vector<Triplet> fam;
    for (int k = 0; k < 6; ++k) {
      Vec y = random_vec(rng, 3);
      fam.push_back({y, 0.5 * y.dot(d.asDiagonal() * y), d.asDiagonal() * y});
    }
    EXPECT_TRUE(check_interpolation(fam, FunctionClass{0.5, 3.0}));
  }
}

TEST(Structure, GradientMethodLift) {
  const double g = 0.3;
  auto rep = fixtures::gradient_method(g, {1, 10});
  auto st = build_structure(rep);
  ASSERT_EQ(st.E[0].rows(), 3);
  ASSERT_EQ(st.E[0].cols(), 4);
  EXPECT_EQ(st.Sigma_o.rows(), 4);

  MethodRepresentation scalar;
  scalar.n = 1;
  scalar.m = 1;
  scalar.A = rows2({{1}});
  scalar.B = rows2({{-g}});
  scalar.C = rows2({{1}});
  scalar.D = rows2({{0}});
  scalar.classes = {{1, 10}};
  auto s1 = build_structure(scalar);
  EXPECT_EQ(s1.E[0], rows2({{0, g, 0}, {0, 1, 0}, {0, 0, 1}}));
  EXPECT_EQ(s1.Sigma_o, rows2({{1, 0, 0}, {0, 1, 0}, {0, 0, 0}}));
}

TEST(Structure, GeneralScalarLift) {
  const double a = 0.4, b = -1.5, c = 2.0, d = -0.25;
  MethodRepresentation rep;
  rep.n = rep.m = 1;
  rep.A = rows2({{a}});
  rep.B = rows2({{b}});
  rep.C = rows2({{c}});
  rep.D = rows2({{d}});
  rep.classes = {{0, kInf}};
  auto st = build_structure(rep);
  EXPECT_EQ(st.E[0], rows2({{c * (1 - a), d - c * b, -d}, {0, 1, 0}, {0, 0, 1}}));
}

TEST(Structure, TwoComponentBlocks) {
  auto rep = fixtures::build(Family::douglas_rachford, {1, 1}, {{1, 2}, {0, kInf}});
  auto st = build_structure(rep);
  EXPECT_EQ(st.N, rows2({{1}, {-1}}));
  Mat I = Mat::Identity(2, 2), Z = Mat::Zero(2, 2);
  EXPECT_EQ(st.H[2], matkit::hstack({I, Z}));
  EXPECT_EQ(st.H[3], matkit::hstack({-I, Z}));
  for (std::size_t k = 0; k < 6; k += 2) EXPECT_EQ(st.H[k], Mat(-st.H[k + 1]));
}

TEST(Structure, PairwiseAntisymmetryAndDefinitions) {
  auto rep = fixtures::build(Family::davis_yin, {0.5, 1}, {{0, 10}, {1, 2}, {0, kInf}});
  auto st = build_structure(rep);
  auto blocks = build_blocks(rep.classes);
  for (std::size_t l = 0; l < rep.m; ++l) {
    for (std::size_t k = 0; k < 6; ++k) {
      EXPECT_EQ(st.Mlij[l][k], Mat(st.E[k].transpose() * blocks.M[l] * st.E[k]));
      EXPECT_EQ(st.alij[l][k], Vec(st.H[k].transpose() * blocks.a[l]));
    }
    for (std::size_t k = 0; k < 6; k += 2) EXPECT_EQ(st.alij[l][k], Vec(-st.alij[l][k + 1]));
  }
}

TEST(Structure, DimensionAudit) {
  std::mt19937_64 rng(31);
  std::uniform_int_distribution<std::size_t> dn(1, 6), dm(1, 4);
  for (int trial = 0; trial < 50; ++trial) {
    const std::size_t n = dn(rng), m = dm(rng);
    auto rep = random_rep(rng, n, m);
    auto st = build_structure(rep);
    const auto L = static_cast<Eigen::Index>(n + 3 * m - 1);
    const auto mm = static_cast<Eigen::Index>(m);
    EXPECT_EQ(st.N.rows(), mm);
    EXPECT_EQ(st.N.cols(), mm - 1);
    for (std::size_t k = 0; k < 6; ++k) {
      EXPECT_EQ(st.E[k].rows(), 3 * mm);
      EXPECT_EQ(st.E[k].cols(), L);
      EXPECT_EQ(st.H[k].rows(), mm);
      EXPECT_EQ(st.H[k].cols(), 2 * mm);
    }
    EXPECT_EQ(st.Sigma_o.rows(), static_cast<Eigen::Index>(n + 2 * m));
    EXPECT_EQ(st.Sigma_o.cols(), L);
    EXPECT_EQ(st.Sigma_p.rows(), static_cast<Eigen::Index>(n + 2 * m));
    EXPECT_EQ(st.Sigma_p.cols(), L);
  }
}

TEST(Structure, QuadraticPushforward) {
  std::mt19937_64 rng(17);
  for (int trial = 0; trial < 20; ++trial) {
    Mat X(5, 3);
    for (Eigen::Index i = 0; i < X.size(); ++i) X(i) = random_vec(rng, 1)(0);
    Mat W = matkit::sym(Mat::Random(5, 5));
    Vec z = random_vec(rng, 3);
    EXPECT_NEAR(matkit::quad(W, X * z), matkit::quad(X.transpose() * W * X, z), 1e-10);
  }
}
