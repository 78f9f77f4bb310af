#include "qpr/msop.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>

#include <gtest/gtest.h>

#include "qpr/spinchain.hpp"

using namespace qpr;
using namespace qpr::msop;

namespace {

// the d = 1 expansion, frozen
const char* kGoldenD1 =
    "coefficient,sop_factors,pauli_string\n"
    "0.25,S02,X1 Z2\n"
    "0.25,S04,X1 X3 Z4\n"
    "0.5,S35,Z3 X4 Z5\n"
    "-0.25,S02*S46,X1 Z2 Z4 X5 Z6\n"
    "0.25,S06,X1 X3 X5 Z6\n"
    "0.25,S68,Z6 X7\n"
    "-0.25,S24*S68,Z2 X3 Z4 Z6 X7\n"
    "0.25,S48,Z4 X5 X7\n"
    "0.25,S28,Z2 X3 X5 X7\n"
    "-0.5,S08*S35,X1 Y3 X4 Y5 X7\n";

IndexSet make_set(std::initializer_list<int> sites) {
  IndexSet s;
  for (int j : sites) s.set(j);
  return s;
}

const Term* find_term(const Expansion& ex, const IndexSet& idx) {
  for (const Term& t : ex.terms)
    if (t.idx == idx) return &t;
  return nullptr;
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  EXPECT_TRUE(in.good()) << path;
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

TEST(Msop, ChainLength) {
  EXPECT_EQ(chain_length(1), 7);
  EXPECT_EQ(chain_length(2), 43);
  EXPECT_EQ(chain_length(3), 151);
  EXPECT_THROW(chain_length(0), std::invalid_argument);
  EXPECT_THROW(chain_length(4), std::invalid_argument);
}

TEST(Msop, DyadicArithmetic) {
  EXPECT_EQ(Dyadic::integer(3).decimal(), "3");
  EXPECT_EQ(Dyadic::integer(-1).decimal(), "-1");
  EXPECT_EQ((Dyadic::half() * Dyadic::half()).decimal(), "0.25");
  EXPECT_EQ((-Dyadic::half()).decimal(), "-0.5");
  Dyadic q = Dyadic::half() * Dyadic::half();
  EXPECT_EQ((q + q).decimal(), "0.5");
  EXPECT_EQ((q + (-q)).m, 0);
  EXPECT_TRUE((q + (-q)).is_zero());
  EXPECT_DOUBLE_EQ(q.value(), 0.25);
  // m stays odd under normalization
  Dyadic four = Dyadic::integer(4);
  EXPECT_EQ(four.m, 1);
  EXPECT_EQ(four.e, 2);
}

TEST(Msop, IndexSetOps) {
  IndexSet s = make_set({1, 64, 130});
  EXPECT_TRUE(s.test(1));
  EXPECT_TRUE(s.test(64));
  EXPECT_TRUE(s.test(130));
  EXPECT_FALSE(s.test(2));
  EXPECT_EQ(s.count(), 3);
  EXPECT_EQ(s.sites(), (std::vector<int>{1, 64, 130}));

  EXPECT_EQ(s.shl1().sites(), (std::vector<int>{2, 65, 131}));
  EXPECT_EQ(s.shr1().sites(), (std::vector<int>{63, 129}));  // site 1 drops

  EXPECT_EQ((make_set({1, 2}) ^ make_set({2, 3})).sites(), (std::vector<int>{1, 3}));
  EXPECT_EQ((make_set({1, 2}) & make_set({2, 3})).sites(), (std::vector<int>{2}));
  EXPECT_TRUE(make_set({}).empty());
  EXPECT_EQ(IndexSetHash{}(s), IndexSetHash{}(make_set({1, 64, 130})));
  EXPECT_TRUE(make_set({4}) < make_set({5}));
}

TEST(Msop, GoldenD1MatchesFrozenTable) {
  Expansion ex = expand({.d = 1});
  EXPECT_EQ(to_csv(ex), kGoldenD1);
}

TEST(Msop, GoldenD1MatchesShippedFile) {
  Expansion ex = expand({.d = 1});
  EXPECT_EQ(to_csv(ex), read_file(std::string(QPR_DATA_DIR) + "/msop_d1.csv"));
}

TEST(Msop, D1Stats) {
  Expansion ex = expand({.d = 1});
  EXPECT_EQ(ex.n, 7);
  EXPECT_EQ(ex.terms.size(), 10u);
  EXPECT_FALSE(ex.truncated);
  EXPECT_EQ(ex.final_level_products, 25u);
  ASSERT_EQ(ex.levels.size(), 1u);
  EXPECT_EQ(ex.levels[0].level, 1);
  EXPECT_EQ(ex.levels[0].products, 25u);
  EXPECT_EQ(ex.levels[0].terms, 10u);
  EXPECT_EQ(ex.coefficient_sum(), Dyadic::integer(1));
  EXPECT_EQ(ex.max_depth(), 2);
  EXPECT_TRUE(std::is_sorted(ex.terms.begin(), ex.terms.end(),
                             [](const Term& a, const Term& b) { return a.idx < b.idx; }));
}

TEST(Msop, D1CoefficientInventory) {
  Expansion ex = expand({.d = 1});
  std::map<std::string, int> hist;
  for (const Term& t : ex.terms) ++hist[t.coef.decimal()];
  EXPECT_EQ(hist["0.25"], 6);
  EXPECT_EQ(hist["-0.25"], 2);
  EXPECT_EQ(hist["0.5"], 1);
  EXPECT_EQ(hist["-0.5"], 1);
}

TEST(Msop, D1SignedTerm) {
  Expansion ex = expand({.d = 1});
  const Term* t = find_term(ex, make_set({1, 3, 4, 5, 7}));
  ASSERT_NE(t, nullptr);
  EXPECT_EQ(t->coef, -Dyadic::half());
  EXPECT_EQ(canonical_sign(t->idx, 7), -1);
  EXPECT_EQ(pauli_label(t->idx, 7), "X1 Y3 X4 Y5 X7");
  EXPECT_EQ(factor_label(t->idx, 7), "S08*S35");
  EXPECT_EQ(to_pauli(t->idx, 7).str(), "X1Y3X4Y5X7");

  // every other product is sign free
  for (const Term& u : ex.terms)
    if (!(u.idx == t->idx)) EXPECT_EQ(canonical_sign(u.idx, 7), 1) << factor_label(u.idx, 7);
}

TEST(Msop, D1SingleStabilizerTerm) {
  Expansion ex = expand({.d = 1});
  const Term* t = find_term(ex, make_set({4}));
  ASSERT_NE(t, nullptr);
  EXPECT_EQ(t->coef, Dyadic::half());
  EXPECT_EQ(factor_label(t->idx, 7), "S35");
  EXPECT_EQ(pauli_label(t->idx, 7), "Z3 X4 Z5");
  EXPECT_EQ(site_letters(t->idx, 7), "IIZXZII");
}

TEST(Msop, D1ClusterStateExpectationIsOne) {
  Expansion ex = expand({.d = 1});
  WeightedPauliSum op = to_pauli_sum(ex);
  EXPECT_EQ(op.n, 7);
  EXPECT_NEAR(op.expectation(cluster_state(7)), 1.0, 1e-12);
}

TEST(Msop, ToMatrixMatchesPauliSum) {
  Expansion ex = expand({.d = 1});
  Eigen::MatrixXcd a = to_matrix(ex);
  Eigen::MatrixXcd b = to_pauli_sum(ex).dense();
  EXPECT_LT((a - b).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(Msop, D1Parts) {
  Expansion sum = expand({.d = 1, .part = Part::sum});
  EXPECT_EQ(sum.terms.size(), 9u);
  EXPECT_EQ(sum.levels[0].products, 9u);
  EXPECT_EQ(sum.coefficient_sum(), Dyadic::integer(3));

  Expansion prod = expand({.d = 1, .part = Part::product});
  EXPECT_EQ(prod.terms.size(), 1u);
  EXPECT_EQ(prod.levels[0].products, 16u);
  EXPECT_EQ(prod.coefficient_sum(), Dyadic::integer(1));
}

TEST(Msop, D1MeasurementSettings) {
  EXPECT_EQ(measurement_settings(expand({.d = 1})).size(), 3u);
  EXPECT_EQ(measurement_settings(expand({.d = 1, .part = Part::sum})).size(), 2u);
  EXPECT_EQ(measurement_settings(expand({.d = 1, .part = Part::product})).size(), 1u);
}

TEST(Msop, D2SumPart) {
  Expansion ex = expand({.d = 2, .part = Part::sum});
  EXPECT_EQ(ex.n, 43);
  EXPECT_FALSE(ex.truncated);
  EXPECT_EQ(ex.terms.size(), 9576u);
  EXPECT_EQ(ex.coefficient_sum(), Dyadic::integer(3));
  EXPECT_EQ(measurement_settings(ex).size(), 2u);
}

TEST(Msop, D2FullLevelTwoDescend) {
  ExpandOptions opt{.d = 2, .memory_cap_bytes = 1 << 20, .allow_truncation = true};
  Expansion ex = expand(opt);
  ASSERT_GE(ex.levels.size(), 1u);
  EXPECT_EQ(ex.levels[0].level, 2);
  EXPECT_EQ(ex.levels[0].products, 4144u);
  EXPECT_EQ(ex.levels[0].terms, 304u);
  EXPECT_TRUE(ex.truncated);
  // the exact final-level branch count is known up front even when cut short
  EXPECT_EQ(ex.final_level_products, 44649124009576u);
  EXPECT_GT(ex.final_level_products, 10000u);
}

TEST(Msop, D2FullThrowsWithoutTruncation) {
  ExpandOptions opt{.d = 2, .memory_cap_bytes = 1 << 20};
  try {
    expand(opt);
    FAIL() << "expected CapExceeded";
  } catch (const CapExceeded& e) {
    EXPECT_EQ(e.level, 1);
    EXPECT_EQ(e.products_pending, 44649124009576u);
    EXPECT_EQ(e.terms_held, std::uint64_t{1 << 20} / 64);
    EXPECT_GE(e.products_emitted, e.terms_held);
    EXPECT_NE(std::string(e.what()).find("cap"), std::string::npos);
  }
}

TEST(Msop, TruncatedRunsAreReproducible) {
  ExpandOptions opt{.d = 2, .memory_cap_bytes = 1 << 20, .allow_truncation = true};
  Expansion a = expand(opt);
  Expansion b = expand(opt);
  ASSERT_EQ(a.terms.size(), b.terms.size());
  for (std::size_t i = 0; i < a.terms.size(); ++i) {
    EXPECT_EQ(a.terms[i].idx, b.terms[i].idx);
    EXPECT_EQ(a.terms[i].coef, b.terms[i].coef);
  }
}

TEST(Msop, TinyCapOnD1) {
  ExpandOptions opt{.d = 1, .memory_cap_bytes = 4 * 64};
  EXPECT_THROW(expand(opt), CapExceeded);
  opt.allow_truncation = true;
  Expansion ex = expand(opt);
  EXPECT_TRUE(ex.truncated);
  EXPECT_LE(ex.terms.size(), 4u);
}

TEST(Msop, ExpandRejectsBadDepth) {
  EXPECT_THROW(expand({.d = 0}), std::invalid_argument);
  EXPECT_THROW(expand({.d = 4}), std::invalid_argument);
}

TEST(Msop, WriteCsvMatchesString) {
  Expansion ex = expand({.d = 1});
  std::string path = ::testing::TempDir() + "msop_d1_out.csv";
  write_csv(ex, path);
  EXPECT_EQ(read_file(path), to_csv(ex));
  std::remove(path.c_str());
}
