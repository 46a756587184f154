#include <gtest/gtest.h>

#include <array>
#include <fstream>
#include <random>
#include <set>
#include <sstream>

#include "sparse_closure/linear_closure.hpp"

using namespace sparse_closure;

TEST(LuMembership, SwapMatrixRejectedIdentityAccepted) {
  EXPECT_FALSE(lu_membership(RationalMatrix{{0, 1}, {1, 0}}));
  EXPECT_TRUE(lu_membership(RationalMatrix::identity(2)));
  EXPECT_TRUE(lu_membership(RationalMatrix::identity(5)));
  EXPECT_TRUE(lu_membership(RationalMatrix{{0, 3}, {0, 0}}));
  EXPECT_TRUE(lu_membership(RationalMatrix{{0, 0}, {3, 0}}));
  EXPECT_THROW(lu_membership(RationalMatrix(2, 3)), std::invalid_argument);
}

// Closed-form oracle for 2x2: A = LU iff a11 != 0 or a12 a21 = 0.
TEST(LuMembership, Exhaustive2x2AgainstClosedForm) {
  int cases = 0;
  for (int a = -2; a <= 2; ++a)
    for (int b = -2; b <= 2; ++b)
      for (int c = -2; c <= 2; ++c)
        for (int d = -2; d <= 2; ++d) {
          const RationalMatrix m{{a, b}, {c, d}};
          EXPECT_EQ(lu_membership(m), a != 0 || b * c == 0) << m;
          ++cases;
        }
  EXPECT_EQ(cases, 625);
}

// Frozen labels for all 3^9 matrices with entries in {-1,0,1}: the listed
// ones have no LU factorization (decided by a QF_NRA solver on the nine
// bilinear equations, see tests/oracles/label_lu3.py).
TEST(LuMembership, Exhaustive3x3AgainstSolverLabels) {
  std::ifstream in(std::string(TEST_DATA_DIR) + "/lu3_rejected.txt");
  ASSERT_TRUE(in) << "missing frozen oracle data";
  std::set<std::array<int, 9>> rejected;
  for (std::string line; std::getline(in, line);) {
    if (line.empty()) continue;
    std::istringstream ss(line);
    std::array<int, 9> e{};
    for (auto& v : e) ss >> v;
    rejected.insert(e);
  }
  ASSERT_EQ(rejected.size(), 7128u);
  std::size_t disagreements = 0;
  for (int code = 0; code < 19683; ++code) {
    std::array<int, 9> e{};
    int rest = code;
    for (auto& v : e) {
      v = rest % 3 - 1;
      rest /= 3;
    }
    RationalMatrix m(3, 3);
    for (int i = 0; i < 9; ++i) m(i / 3, i % 3) = e[i];
    if (lu_membership(m) == (rejected.count(e) != 0)) ++disagreements;
  }
  EXPECT_EQ(disagreements, 0u);
}

TEST(LuMembership, ProductsOfTriangularFactorsAreAccepted) {
  std::mt19937 rng(7);
  std::uniform_int_distribution<int> coef(-2, 2);
  for (int trial = 0; trial < 200; ++trial) {
    const std::size_t n = 2 + trial % 4;
    RationalMatrix l(n, n), u(n, n);
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j) {
        if (j <= i) l(i, j) = coef(rng);
        if (j >= i) u(i, j) = coef(rng);
      }
    EXPECT_TRUE(lu_membership(l * u)) << l << " * " << u;
  }
}

TEST(GapWitness, AntiDiagonalRejectedForAllSizes) {
  EXPECT_EQ(closure_gap_witness_lu(2), (RationalMatrix{{0, 1}, {1, 0}}));
  EXPECT_EQ(closure_gap_witness_lu(3), RationalMatrix::anti_identity(3));
  for (std::size_t d = 2; d <= 5; ++d) EXPECT_FALSE(lu_membership(closure_gap_witness_lu(d))) << d;
  EXPECT_THROW(closure_gap_witness_lu(1), std::invalid_argument);
}

TEST(Verdict, LuIsNotClosedWithWitness) {
  const auto v = closedness_verdict(lu_pattern(2));
  EXPECT_EQ(v.status, Closedness::NotClosed);
  EXPECT_EQ(v.rule, rules::kLuTriangular);
  ASSERT_TRUE(v.witness.has_value());
  EXPECT_EQ(*v.witness, (RationalMatrix{{0, 1}, {1, 0}}));
}

TEST(Verdict, ScalarOutputIsClosed) {
  Mask m1{{0, 3}, {2, 7}, {4, 9}};
  Mask m2{{0, 1}, {0, 4}};
  const auto v = closedness_verdict(SupportPattern({10, 5, 1}, {m1, m2}));
  EXPECT_EQ(v.status, Closedness::Closed);
  EXPECT_EQ(v.rule, rules::kScalarOutput);
}

TEST(Verdict, DenseShallowIsClosed) {
  const auto v = closedness_verdict(dense_pattern({5, 4, 3}));
  EXPECT_EQ(v.status, Closedness::Closed);
  EXPECT_EQ(v.rule, rules::kDenseShallow);
}

TEST(Verdict, SingleLayerIsClosed) {
  const auto v = closedness_verdict(SupportPattern({2, 2}, {Mask{{0, 0}, {1, 0}}}));
  EXPECT_EQ(v.status, Closedness::Closed);
  EXPECT_EQ(v.rule, rules::kSingleLayer);
}

TEST(Verdict, DeepPatternIsUnknownWithSentence) {
  const auto p = dense_pattern({2, 2, 2, 2});
  const auto v = closedness_verdict(p);
  EXPECT_EQ(v.status, Closedness::Unknown);
  ASSERT_TRUE(v.sentence_stats.has_value());
  EXPECT_EQ(*v.sentence_stats, expected_qe_stats(p));
  EXPECT_FALSE(v.sentence_path.has_value());
}

TEST(HiddenSubsets, DenseShallowHolds) {
  const auto r = check_hidden_subset_conditions(dense_pattern({3, 3, 2}));
  EXPECT_TRUE(r.second_layer_full);
  EXPECT_EQ(r.subsets.size(), 7u);
  EXPECT_TRUE(r.all_subsets_closed);
  EXPECT_TRUE(r.sufficient_condition_holds);
}

TEST(HiddenSubsets, ScalarOutputWithFullSecondLayerHolds) {
  const SupportPattern p({3, 3, 1}, {Mask{{0, 0}, {1, 2}, {2, 1}, {2, 2}}, full_mask(1, 3)});
  const auto r = check_hidden_subset_conditions(p);
  EXPECT_TRUE(r.second_layer_full);
  EXPECT_TRUE(r.sufficient_condition_holds);
}

TEST(HiddenSubsets, MissingSecondLayerEntryFailsConditionOne) {
  const SupportPattern p({2, 2, 2}, {full_mask(2, 2), Mask{{0, 0}, {1, 0}, {1, 1}}});
  const auto r = check_hidden_subset_conditions(p);
  EXPECT_FALSE(r.second_layer_full);
  EXPECT_FALSE(r.sufficient_condition_holds);
}

TEST(HiddenSubsets, SubsetsAreSortedAndCapped) {
  const auto r = check_hidden_subset_conditions(lu_pattern(3));
  ASSERT_EQ(r.subsets.size(), 7u);
  for (std::size_t i = 1; i < r.subsets.size(); ++i) EXPECT_LT(r.subsets[i - 1].subset, r.subsets[i].subset);
  EXPECT_THROW(check_hidden_subset_conditions(dense_pattern({1, 20, 1}), 16), EnumerationCapExceeded);
  EXPECT_THROW(check_hidden_subset_conditions(dense_pattern({1, 1})), PatternError);
}

TEST(Json, VerdictAndMatrixRoundTrip) {
  const auto v = closedness_verdict(lu_pattern(2));
  const auto j = verdict_to_json(v);
  EXPECT_EQ(j["status"], "NotClosed");
  EXPECT_EQ(j["rule"], rules::kLuTriangular);
  EXPECT_EQ(matrix_from_json(j["witness"]), *v.witness);
  EXPECT_TRUE(j["sentence_path"].is_null());
  EXPECT_EQ(matrix_from_json(nlohmann::json::parse(R"([["1/2", 3], [0.5, "-7"]])")),
            (RationalMatrix{{Rational(1, 2), 3}, {Rational(1, 2), -7}}));
  EXPECT_THROW(matrix_from_json(nlohmann::json::parse(R"([[1, 2], [3]])")), std::invalid_argument);
}
