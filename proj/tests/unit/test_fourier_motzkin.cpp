#include <gtest/gtest.h>

#include <cstdlib>
#include <random>

#include "../support/feasibility_oracle.hpp"
#include "sparse_closure/fourier_motzkin.hpp"

using namespace sparse_closure;

namespace {

Halfspace row(std::initializer_list<int> c, int rhs) {
  Halfspace h;
  for (int v : c) h.coeffs.emplace_back(v);
  h.rhs = rhs;
  return h;
}

RationalPolyhedron unit_square() {
  return RationalPolyhedron(2, {row({1, 0}, 1), row({-1, 0}, 0), row({0, 1}, 1), row({0, -1}, 0)});
}

RationalPolyhedron random_system(std::mt19937_64& rng, std::size_t vars, std::size_t rows) {
  std::uniform_int_distribution<int> e(-3, 3);
  std::vector<Halfspace> hs;
  for (std::size_t i = 0; i < rows; ++i) {
    Halfspace h;
    for (std::size_t j = 0; j < vars; ++j) h.coeffs.emplace_back(e(rng));
    h.rhs = e(rng);
    hs.push_back(h);
  }
  return RationalPolyhedron(vars, hs);
}

Rational random_rational(std::mt19937_64& rng) {
  std::uniform_int_distribution<int> num(-9, 9), den(1, 3);
  Rational q(num(rng), den(rng));
  q.canonicalize();
  return q;
}

}  // namespace

TEST(EliminateVariable, ForcedEquality) {
  // x <= 1, -x <= 0, t - x <= 0, x - t <= 0 over (x, t).
  const RationalPolyhedron p(2, {row({1, 0}, 1), row({-1, 0}, 0), row({-1, 1}, 0), row({1, -1}, 0)});
  const auto q = eliminate_variable(p, 0);
  ASSERT_EQ(q.num_vars(), 1u);
  for (int num = -4; num <= 8; ++num) {
    const Rational t(num, 4);
    EXPECT_EQ(contains(q, {t}), t >= 0 && t <= 1) << t;
  }
}

TEST(EliminateVariable, UnrelatedRowsPassThrough) {
  const RationalPolyhedron p(2, {row({0, 1}, 2), row({0, -1}, 1)});
  const auto q = eliminate_variable(p, 0);
  EXPECT_EQ(q.num_rows(), 2u);
  EXPECT_TRUE(contains(q, {Rational(2)}));
  EXPECT_FALSE(contains(q, {Rational(3)}));
  EXPECT_THROW(eliminate_variable(p, 2), std::out_of_range);
}

TEST(EliminateVariable, RowCap) {
  std::vector<Halfspace> rows;
  for (int i = 1; i <= 20; ++i) {
    rows.push_back(row({1, i}, i));
    rows.push_back(row({-1, i}, i));
  }
  const RationalPolyhedron p(2, rows);
  EXPECT_THROW(eliminate_variable(p, 0, 50), RowCapExceeded);
  EXPECT_NO_THROW(eliminate_variable(p, 0, 1000));
}

TEST(RowCapFromEnv, ReadsVariable) {
  ::setenv("SPARSE_CLOSURE_ROW_CAP", "123", 1);
  EXPECT_EQ(row_cap_from_env(), 123u);
  ::unsetenv("SPARSE_CLOSURE_ROW_CAP");
  EXPECT_EQ(row_cap_from_env(), kDefaultRowCap);
}

TEST(AffineImage, IdentityKeepsBase) {
  const auto img = affine_image({RationalMatrix::identity(2), unit_square()});
  for (int a = -1; a <= 3; ++a)
    for (int b = -1; b <= 3; ++b) {
      const std::vector<Rational> t{Rational(a, 2), Rational(b, 2)};
      EXPECT_EQ(contains(img, t), contains(unit_square(), t));
    }
}

TEST(AffineImage, SumOverUnitSquareIsInterval) {
  const auto img = affine_image({RationalMatrix{{1, 1}}, unit_square()});
  ASSERT_EQ(img.num_vars(), 1u);
  EXPECT_EQ(img.num_rows(), 2u);
  EXPECT_TRUE(contains(img, {Rational(0)}));
  EXPECT_TRUE(contains(img, {Rational(2)}));
  EXPECT_FALSE(contains(img, {Rational(-1, 100)}));
  EXPECT_FALSE(contains(img, {Rational(201, 100)}));
}

TEST(AffineImage, InfeasibleBaseStaysInfeasible) {
  const RationalPolyhedron base(1, {row({1}, 0), row({-1}, -1)});
  const auto img = affine_image({RationalMatrix{{2}}, base});
  EXPECT_TRUE(img.has_contradiction());
}

TEST(Contains, BoundaryIncluded) {
  const RationalPolyhedron p(1, {row({1}, 1), row({-1}, 0)});
  EXPECT_TRUE(contains(p, {Rational(1)}));
  EXPECT_FALSE(contains(p, {Rational(2)}));
}

TEST(DropRedundant, DuplicatesAndDominance) {
  const RationalPolyhedron dup(1, {row({1}, 1), row({1}, 1)});
  EXPECT_EQ(drop_redundant(dup).num_rows(), 1u);
  const RationalPolyhedron dom(1, {row({1}, 1), row({2}, 4)});
  const auto q = drop_redundant(dom);
  ASSERT_EQ(q.num_rows(), 1u);
  EXPECT_EQ(q.rows()[0].rhs, Rational(1));
  const RationalPolyhedron trivial(1, {row({0}, 3), row({1}, 1)});
  EXPECT_EQ(drop_redundant(trivial).num_rows(), 1u);
}

TEST(DropRedundant, PairImpliedRowRemoved) {
  // x <= 1, y <= 1 imply x + y <= 3.
  const RationalPolyhedron p(2, {row({1, 0}, 1), row({0, 1}, 1), row({1, 1}, 3)});
  EXPECT_EQ(drop_redundant(p).num_rows(), 2u);
}

TEST(DropRedundant, SetUnchangedOnRandomSystems) {
  std::mt19937_64 rng(11);
  for (int trial = 0; trial < 60; ++trial) {
    const auto p = random_system(rng, 2, 6);
    const auto q = drop_redundant(p);
    for (int s = 0; s < 40; ++s) {
      const std::vector<Rational> x{random_rational(rng), random_rational(rng)};
      EXPECT_EQ(contains(p, x), contains(q, x));
    }
  }
}

TEST(Project, RandomThreeVariableSystemsOnGrid) {
  std::mt19937_64 rng(5);
  for (int trial = 0; trial < 5; ++trial) {
    const auto p = random_system(rng, 3, 6);
    const auto q = project_onto(p, {0, 2});
    for (int a = -10; a <= 10; ++a)
      for (int b = -10; b <= 10; ++b) {
        const std::vector<Rational> t{Rational(a, 3), Rational(b, 3)};
        ASSERT_EQ(contains(q, t), oracle::in_projection(p, {0, 2}, t)) << "trial " << trial << " t=" << a << "/3," << b << "/3";
      }
  }
}

TEST(Project, EliminateAllDecidesFeasibility) {
  std::mt19937_64 rng(17);
  int feasible = 0;
  for (int trial = 0; trial < 150; ++trial) {
    const auto p = random_system(rng, 1 + trial % 4, 2 + trial % 7);
    const auto q = project_onto(p, {});
    EXPECT_EQ(q.num_vars(), 0u);
    const bool fm = contains(q, {});
    EXPECT_EQ(fm, oracle::feasible(p)) << "trial " << trial;
    feasible += fm;
  }
  EXPECT_GT(feasible, 10);  // both outcomes are exercised
  EXPECT_LT(feasible, 140);
}

TEST(Project, KeepOutOfRange) {
  EXPECT_THROW(project_onto(unit_square(), {2}), std::out_of_range);
}

TEST(Json, RoundTrip) {
  const auto p = RationalPolyhedron(2, {row({1, -2}, 3), row({0, 1}, -1)});
  const auto j = polyhedron_to_json(p);
  const auto back = polyhedron_from_json(j);
  EXPECT_EQ(back.rows(), p.rows());
  EXPECT_EQ(polyhedron_from_json(nlohmann::json::parse(R"({"C":[["1/2",1]],"y":["3/4"]})")).rows()[0].rhs, Rational(3, 4));
  EXPECT_THROW(polyhedron_from_json(nlohmann::json::parse(R"({"C":[[1,2]],"y":[]})")), std::invalid_argument);
  EXPECT_THROW(polyhedron_from_json(nlohmann::json::parse(R"({"C":[[1.5]],"y":[1]})")), std::invalid_argument);
}
