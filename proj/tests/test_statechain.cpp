#include <gtest/gtest.h>

#include <random>
#include <sstream>

#include "islchan/statechain.hpp"
#include "oracles.hpp"

using namespace islchan;
using namespace islchan::statechain;

namespace {

const std::size_t BAD = 0, MODERATE = 1, GOOD = 2;

TransitionMatrix random_chain(std::mt19937_64& eng, std::size_t k) {
  std::uniform_real_distribution<double> u(0.01, 1.0);
  std::vector<std::vector<double>> r(k, std::vector<double>(k));
  for (auto& row : r) {
    double s = 0.0;
    for (auto& v : row) s += (v = u(eng));
    for (auto& v : row) v /= s;
  }
  return TransitionMatrix::validate(r);
}

}  // namespace

TEST(Transition, ReferenceLayout) {
  const auto t = reference_matrix();
  EXPECT_DOUBLE_EQ(t(GOOD, GOOD), 0.8);
  EXPECT_DOUBLE_EQ(t(GOOD, BAD), 0.1);
  EXPECT_DOUBLE_EQ(t(MODERATE, GOOD), 0.5);
  EXPECT_DOUBLE_EQ(t(BAD, GOOD), 0.7);
  EXPECT_DOUBLE_EQ(t(BAD, BAD), 0.05);
  EXPECT_EQ(three_state_labels()[GOOD], "GOOD");
}

TEST(Transition, RejectsNonStochastic) {
  try {
    TransitionMatrix::validate({{0.5, 0.5}, {0.6, 0.6}});
    FAIL();
  } catch (const NotStochastic& e) {
    EXPECT_EQ(e.row(), 1u);
  }
  EXPECT_THROW(TransitionMatrix::validate({{1.2, -0.2}, {0.5, 0.5}}), NotStochastic);
  EXPECT_THROW(TransitionMatrix::validate({{1.0, 0.0}}), NotStochastic);
  EXPECT_THROW(TransitionMatrix::validate({}), NotStochastic);
}

TEST(Transition, RenormalizesTinyDrift) {
  const auto t = TransitionMatrix::validate({{0.5 + 4e-10, 0.5}, {0.3, 0.7}});
  EXPECT_NEAR(t(0, 0) + t(0, 1), 1.0, 1e-15);
}

TEST(Transition, Permutation) {
  const auto t = reference_matrix();
  const std::size_t perm[3] = {2, 1, 0};
  const auto back = t.permuted(perm);
  const auto printed = reference_rows_printed();
  for (std::size_t i = 0; i < 3; ++i)
    for (std::size_t j = 0; j < 3; ++j) EXPECT_DOUBLE_EQ(back(i, j), printed[i][j]);
  const std::size_t bad[3] = {0, 0, 1};
  EXPECT_THROW(t.permuted(bad), DomainError);
}

TEST(Stationary, ReferenceValues) {
  const auto p = stationary_distribution(reference_matrix());
  EXPECT_NEAR(p[GOOD], 0.745454545, 1e-6);
  EXPECT_NEAR(p[MODERATE], 0.145454545, 1e-6);
  EXPECT_NEAR(p[BAD], 0.109090909, 1e-6);
  const auto o = oracle::stationary(reference_matrix().rows());
  for (std::size_t i = 0; i < 3; ++i) EXPECT_NEAR(p[i], o[i], 1e-12);
}

TEST(Stationary, RandomChainsAgreeWithLeastSquares) {
  std::mt19937_64 eng(3);
  for (int trial = 0; trial < 200; ++trial) {
    const auto t = random_chain(eng, 2 + trial % 5);
    const auto p = stationary_distribution(t);
    const auto o = oracle::stationary(t.rows());
    double s = 0.0;
    for (std::size_t i = 0; i < p.size(); ++i) {
      EXPECT_NEAR(p[i], o[i], 1e-10);
      s += p[i];
    }
    EXPECT_NEAR(s, 1.0, 1e-12);
  }
}

TEST(Stationary, ReducibleChain) {
  EXPECT_THROW(stationary_distribution(TransitionMatrix::identity(2)), Reducible);
  EXPECT_THROW(stationary_distribution(TransitionMatrix::validate({{1, 0, 0}, {0, 0.5, 0.5}, {0, 0.5, 0.5}})),
               Reducible);
}

TEST(Stationary, SingleState) {
  EXPECT_EQ(stationary_distribution(TransitionMatrix{}), std::vector<double>{1.0});
}

TEST(Sojourn, Values) {
  const auto t = reference_matrix();
  EXPECT_NEAR(mean_sojourn(t, GOOD), 5.0, 1e-12);
  EXPECT_NEAR(mean_sojourn(t, MODERATE), 1.4285714, 1e-6);
  EXPECT_NEAR(mean_sojourn(t, BAD), 1.0526316, 1e-6);
  EXPECT_THROW(mean_sojourn(TransitionMatrix{}, 0), Absorbing);
  EXPECT_THROW(mean_sojourn(t, 3), DomainError);
}

TEST(Sequence, StartsInInitialState) {
  Rng rng(1);
  const auto s = generate_sequence(reference_matrix(), GOOD, 100, 0.01, rng);
  EXPECT_EQ(s.states.front(), GOOD);
  EXPECT_EQ(s.states.size(), 100u);
  EXPECT_NEAR(s.total, 1.0, 1e-12);
  Rng rng2(1);
  EXPECT_THROW(generate_sequence(reference_matrix(), 3, 10, 0.01, rng2), DomainError);
  EXPECT_THROW(generate_sequence(reference_matrix(), 0, 10, 0.0, rng2), DomainError);
}

TEST(Sequence, DwellSumsToTotal) {
  std::mt19937_64 eng(5);
  for (int trial = 0; trial < 50; ++trial) {
    const auto t = random_chain(eng, 3);
    Rng rng(static_cast<std::uint64_t>(trial));
    const auto s = generate_sequence(t, 0, 1000, 0.001, rng);
    double sum = 0.0;
    for (double d : s.dwell) sum += d;
    EXPECT_DOUBLE_EQ(sum, s.total);
    EXPECT_NEAR(s.total, 1.0, 1e-9);
  }
}

TEST(Sequence, EmpiricalFrequencies) {
  Rng rng(42);
  const auto t = reference_matrix();
  const auto s = generate_sequence(t, GOOD, 1'000'000, 1.0, rng);
  const auto p = stationary_distribution(t);
  std::vector<double> occ(3, 0.0), counts(9, 0.0), from(3, 0.0);
  for (std::size_t i = 0; i < s.states.size(); ++i) {
    occ[s.states[i]] += 1.0;
    if (i + 1 < s.states.size()) {
      counts[s.states[i] * 3 + s.states[i + 1]] += 1.0;
      from[s.states[i]] += 1.0;
    }
  }
  for (std::size_t i = 0; i < 3; ++i) {
    EXPECT_NEAR(occ[i] / 1e6, p[i], 0.01);
    for (std::size_t j = 0; j < 3; ++j) EXPECT_NEAR(counts[i * 3 + j] / from[i], t(i, j), 0.01);
  }
}

TEST(Sequence, IdentityNeverMoves) {
  Rng rng(2);
  const auto s = generate_sequence(TransitionMatrix::identity(3), 1, 500, 1.0, rng);
  EXPECT_EQ(s.transitions(), 0u);
  EXPECT_DOUBLE_EQ(s.dwell[1], 500.0);
}

TEST(Perturb, ZeroVarianceIsIdentity) {
  Rng rng(1);
  const auto t = reference_matrix();
  const auto p = perturb(t, 0.0, rng);
  EXPECT_EQ(p.rows(), t.rows());
}

TEST(Perturb, StaysStochastic) {
  Rng rng(8);
  for (double var : {1e-4, 1e-2, 0.5, 10.0}) {
    const auto p = perturb(reference_matrix(), var, rng);
    for (std::size_t j = 0; j < 3; ++j) {
      double s = 0.0;
      for (double v : p.row(j)) {
        EXPECT_GE(v, 0.0);
        s += v;
      }
      EXPECT_NEAR(s, 1.0, 1e-12);
    }
  }
  EXPECT_THROW(perturb(reference_matrix(), -1.0, rng), DomainError);
}

TEST(Classify, BoundariesGoUp) {
  std::vector<StateDef> defs(3);
  for (std::size_t i = 0; i < 3; ++i) defs[i].index = i;
  defs[1].gamma_threshold = 0.2;
  defs[2].gamma_threshold = 0.7;
  validate_states(defs);
  EXPECT_EQ(classify_gain(0.0, defs), BAD);
  EXPECT_EQ(classify_gain(0.19, defs), BAD);
  EXPECT_EQ(classify_gain(0.2, defs), MODERATE);
  EXPECT_EQ(classify_gain(0.7, defs), GOOD);
  EXPECT_EQ(classify_gain(50.0, defs), GOOD);
  defs[2].gamma_threshold = 0.1;
  EXPECT_THROW(validate_states(defs), DomainError);
}

TEST(TraceCsv, Format) {
  StateSequence s;
  s.states = {2, 0};
  s.step_duration_s = 0.01;
  std::ostringstream os;
  const std::vector<double> om{1.0, 0.1};
  write_state_trace_csv(os, s, three_state_labels(), om);
  EXPECT_EQ(os.str(), "step,t_s,state_index,state_label,omega\n0,0,2,GOOD,1\n1,0.01,0,BAD,0.1\n");
}
