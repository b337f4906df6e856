#include <gtest/gtest.h>

#include <cmath>
#include <complex>
#include <random>

#include "dense_oracle.hpp"
#include "hanoi_walk/engine.hpp"

using namespace hanoi_walk;

namespace {

StateVector random_state(const EvolutionConfig& config, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss;
  StateVector s(config.coin_dimension(), static_cast<std::size_t>(config.network.vertex_count()));
  for (Amplitude& a : s.amplitudes()) a = {gauss(rng), gauss(rng)};
  const double norm = std::sqrt(s.squared_norm());
  for (Amplitude& a : s.amplitudes()) a /= norm;
  return s;
}

double max_abs_diff(const StateVector& a, const oracle::Vector& b) {
  double worst = 0.0;
  const auto amps = a.amplitudes();
  for (std::size_t k = 0; k < amps.size(); ++k) {
    worst = std::max(worst, std::abs(amps[k] - b(static_cast<Eigen::Index>(k))));
  }
  return worst;
}

EvolutionConfig regular_hn3(int n, Vertex target = 4) {
  return EvolutionConfig(NetworkSpec(NetworkKind::HN3, n), CoinSpec::regular(), target);
}

}  // namespace

TEST(Config, DefaultOrderFollowsMode) {
  EXPECT_EQ(regular_hn3(4).order, Order::ShiftAfterCoin);
  const EvolutionConfig lazy(NetworkSpec(NetworkKind::HN4, 4), CoinSpec::lackadaisical(0.2), 4);
  EXPECT_EQ(lazy.order, Order::CoinAfterShift);
  EXPECT_EQ(lazy.coin_dimension(), 5);
  EXPECT_THROW(regular_hn3(4, 17), std::domain_error);
  EXPECT_THROW(CoinSpec::lackadaisical(-1.0), std::domain_error);
}

TEST(InitialState, RegularIsUniform) {
  const StateVector s = uniform_initial_state(regular_hn3(4));
  for (const Amplitude& a : s.amplitudes()) EXPECT_NEAR(a.real(), 1.0 / std::sqrt(48.0), 1e-15);
  EXPECT_NEAR(s.at(0, 1).real(), 0.144338, 1e-6);
  EXPECT_NEAR(s.squared_norm(), 1.0, 1e-14);
}

TEST(InitialState, LackadaisicalWithZeroWeight) {
  const EvolutionConfig c(NetworkSpec(NetworkKind::HN4, 4), CoinSpec::lackadaisical(0.0), 4);
  const StateVector s = uniform_initial_state(c);
  for (Vertex x = 1; x <= 16; ++x) {
    EXPECT_EQ(s.at(4, x), Amplitude(0.0));
    for (int p = 0; p < 4; ++p) EXPECT_NEAR(s.at(p, x).real(), 1.0 / std::sqrt(64.0), 1e-15);
  }
  EXPECT_NEAR(s.squared_norm(), 1.0, 1e-14);
}

TEST(InitialState, WeightedLoopAmplitude) {
  const double l = 0.7;
  const EvolutionConfig c(NetworkSpec(NetworkKind::HN3, 5), CoinSpec::lackadaisical(l), 4);
  const StateVector s = uniform_initial_state(c);
  EXPECT_NEAR(s.at(3, 9).real(), std::sqrt(l) / std::sqrt((3 + l) * 32), 1e-15);
  EXPECT_NEAR(s.at(1, 9).real(), 1.0 / std::sqrt((3 + l) * 32), 1e-15);
  EXPECT_NEAR(s.squared_norm(), 1.0, 1e-14);
}

TEST(GroverCoin, RegularEntries) {
  const auto m = grover_coin(CoinSpec::regular(), 3);
  for (int r = 0; r < 3; ++r) {
    for (int c = 0; c < 3; ++c) EXPECT_NEAR(m[r * 3 + c], r == c ? -1.0 / 3 : 2.0 / 3, 1e-15);
  }
}

TEST(GroverCoin, LackadaisicalEntries) {
  const auto m = grover_coin(CoinSpec::lackadaisical(1.0), 4);
  for (int r = 0; r < 5; ++r) {
    for (int c = 0; c < 5; ++c) EXPECT_NEAR(m[r * 5 + c], 2.0 / 5 - (r == c ? 1.0 : 0.0), 1e-15);
  }
}

TEST(GroverCoin, IsInvolutive) {
  for (const CoinSpec& coin : {CoinSpec::regular(), CoinSpec::lackadaisical(0.0), CoinSpec::lackadaisical(0.37),
                               CoinSpec::lackadaisical(5.0)}) {
    for (int d : {3, 4}) {
      const auto m = grover_coin(coin, d);
      const int dim = coin.dimension(d);
      for (int r = 0; r < dim; ++r) {
        for (int c = 0; c < dim; ++c) {
          double sum = 0.0;
          for (int k = 0; k < dim; ++k) sum += m[r * dim + k] * m[k * dim + c];
          EXPECT_NEAR(sum, r == c ? 1.0 : 0.0, 1e-14);
        }
      }
    }
  }
}

TEST(OracleCoin, NegatesReferenceStateAtTarget) {
  const EvolutionConfig c = regular_hn3(4, 4);
  StateVector s(3, 16);
  for (int p = 0; p < 3; ++p) s.at(p, 4) = 1.0 / std::sqrt(3.0);
  const StateVector out = apply_oracle_coin(s, c);
  for (int p = 0; p < 3; ++p) EXPECT_NEAR(out.at(p, 4).real(), -1.0 / std::sqrt(3.0), 1e-15);
  EXPECT_NEAR(out.squared_norm(), 1.0, 1e-14);
}

TEST(OracleCoin, AppliesCoinAwayFromTarget) {
  const EvolutionConfig c = regular_hn3(4, 4);
  StateVector s(3, 16);
  s.at(0, 7) = {1.0, 0.0};
  const StateVector out = apply_oracle_coin(s, c);
  EXPECT_NEAR(out.at(0, 7).real(), -1.0 / 3, 1e-15);
  EXPECT_NEAR(out.at(1, 7).real(), 2.0 / 3, 1e-15);
  EXPECT_NEAR(out.at(2, 7).real(), 2.0 / 3, 1e-15);
}

TEST(OracleCoin, MatchesDenseOperatorOnRandomState) {
  const EvolutionConfig c = regular_hn3(4, 4);
  const StateVector s = random_state(c, 7);
  const oracle::Dense dense(4, false, false);
  const oracle::Vector expected = dense.oracle_coin(0.0, 4) * oracle::to_vector(s);
  EXPECT_LT(max_abs_diff(apply_oracle_coin(s, c), expected), 1e-12);
}

TEST(OracleCoin, IsInvolutive) {
  for (const CoinSpec& coin : {CoinSpec::regular(), CoinSpec::lackadaisical(0.8)}) {
    const EvolutionConfig c(NetworkSpec(NetworkKind::HN4, 5), coin, 6);
    const StateVector s = random_state(c, 3);
    const StateVector twice = apply_oracle_coin(apply_oracle_coin(s, c), c);
    for (std::size_t k = 0; k < s.size(); ++k) EXPECT_LT(std::abs(twice.amplitudes()[k] - s.amplitudes()[k]), 1e-13);
  }
}

TEST(OracleCoin, RejectsMismatchedState) {
  StateVector wrong(4, 16);
  EXPECT_THROW(apply_oracle_coin(wrong, regular_hn3(4)), std::invalid_argument);
  EXPECT_THROW(apply_shift(wrong, regular_hn3(4)), std::invalid_argument);
}

TEST(Shift, MovesBasisState) {
  StateVector s(3, 16);
  s.at(0, 1) = 1.0;
  const StateVector out = apply_shift(s, regular_hn3(4));
  EXPECT_EQ(out.at(1, 2), Amplitude(1.0));
  EXPECT_NEAR(out.squared_norm(), 1.0, 0.0);
}

TEST(Shift, LoopPortStaysPut) {
  const EvolutionConfig c(NetworkSpec(NetworkKind::HN3, 4), CoinSpec::lackadaisical(0.5), 4);
  StateVector s(4, 16);
  s.at(3, 5) = 1.0;
  const StateVector out = apply_shift(s, c);
  EXPECT_EQ(out.at(3, 5), Amplitude(1.0));
  EXPECT_NEAR(out.squared_norm(), 1.0, 0.0);
}

TEST(Shift, IsExactlyInvolutive) {
  for (NetworkKind kind : {NetworkKind::HN3, NetworkKind::HN4}) {
    for (const CoinSpec& coin : {CoinSpec::regular(), CoinSpec::lackadaisical(0.3)}) {
      const EvolutionConfig c(NetworkSpec(kind, 6), coin, 4);
      const StateVector s = random_state(c, 11);
      const StateVector twice = apply_shift(apply_shift(s, c), c);
      for (std::size_t k = 0; k < s.size(); ++k) ASSERT_EQ(twice.amplitudes()[k], s.amplitudes()[k]);
    }
  }
}

TEST(Step, PreservesNorm) {
  const EvolutionConfig c(NetworkSpec(NetworkKind::HN4, 6), CoinSpec::lackadaisical(0.05), 9);
  const StateVector s = random_state(c, 5);
  EXPECT_NEAR(step(s, c).squared_norm(), s.squared_norm(), 1e-14);
}

// Sparse engine against dense U^t from explicit operator sums.
struct DenseCase {
  NetworkKind kind;
  int n;
  bool lazy;
  Order order;
};

class DenseEquivalence : public ::testing::TestWithParam<DenseCase> {};

TEST_P(DenseEquivalence, HundredStepsMatch) {
  const DenseCase p = GetParam();
  const NetworkSpec net(p.kind, p.n);
  const double l = p.lazy ? (p.kind == NetworkKind::HN3 ? 2.52 : 3.48) / static_cast<double>(net.vertex_count()) : 0.0;
  const CoinSpec coin = p.lazy ? CoinSpec::lackadaisical(l) : CoinSpec::regular();
  const EvolutionConfig config(net, coin, 4, p.order);

  const oracle::Dense dense(p.n, p.kind == NetworkKind::HN4, p.lazy);
  const oracle::Matrix U = dense.unitary(l, 4, p.order);
  oracle::Vector v = dense.initial(l);

  const Walk walk(config);
  StateVector s = walk.initial_state();
  ASSERT_LT(max_abs_diff(s, v), 1e-15);
  for (int t = 1; t <= 100; ++t) {
    walk.step(s);
    v = U * v;
    ASSERT_LT(max_abs_diff(s, v), 1e-10) << "step " << t;
  }
}

INSTANTIATE_TEST_SUITE_P(SmallNetworks, DenseEquivalence, ::testing::ValuesIn([] {
                           std::vector<DenseCase> cases;
                           for (NetworkKind k : {NetworkKind::HN3, NetworkKind::HN4}) {
                             for (int n : {4, 5}) {
                               for (bool lazy : {false, true}) {
                                 for (Order o : {Order::ShiftAfterCoin, Order::CoinAfterShift}) cases.push_back({k, n, lazy, o});
                               }
                             }
                           }
                           return cases;
                         }()),
                         [](const auto& info) {
                           const DenseCase& c = info.param;
                           return std::string(to_string(c.kind)) + "_n" + std::to_string(c.n) +
                                  (c.lazy ? "_lazy" : "_regular") + (c.order == Order::ShiftAfterCoin ? "_SC" : "_CS");
                         });

TEST(Step, DenseOracleHN4LazyN32) {
  const NetworkSpec net(NetworkKind::HN4, 5);
  const double l = 3.48 / 32;
  const EvolutionConfig c(net, CoinSpec::lackadaisical(l), 4);
  const oracle::Dense dense(5, true, true);
  ASSERT_EQ(dense.dim(), 160);
  const oracle::Matrix U = dense.unitary(l, 4, Order::CoinAfterShift);
  oracle::Vector v = dense.initial(l);
  StateVector s = uniform_initial_state(c);
  for (int t = 0; t < 100; ++t) {
    s = step(std::move(s), c);
    v = U * v;
  }
  EXPECT_LT(max_abs_diff(s, v), 1e-10);
}

TEST(TargetProbability, Examples) {
  const EvolutionConfig c = regular_hn3(4);
  const StateVector s = uniform_initial_state(c);
  for (Vertex t = 1; t <= 16; ++t) EXPECT_NEAR(target_probability(s, t), 1.0 / 16, 1e-15);

  StateVector basis(3, 16);
  basis.at(0, 5) = 1.0;
  EXPECT_EQ(target_probability(basis, 5), 1.0);
  EXPECT_THROW(target_probability(basis, 17), std::domain_error);
}

TEST(TargetProbability, SumsToOne) {
  const EvolutionConfig c(NetworkSpec(NetworkKind::HN4, 7), CoinSpec::lackadaisical(0.02), 4);
  const StateVector s = random_state(c, 99);
  double sum = 0.0;
  for (Vertex x = 1; x <= 128; ++x) sum += target_probability(s, x);
  EXPECT_NEAR(sum, 1.0, 1e-12);
}

TEST(Invariants, UnitarityOverTenThousandSteps) {
  for (NetworkKind kind : {NetworkKind::HN3, NetworkKind::HN4}) {
    for (bool lazy : {false, true}) {
      const NetworkSpec net(kind, 10);
      const CoinSpec coin = lazy ? CoinSpec::lackadaisical((kind == NetworkKind::HN3 ? 2.52 : 3.48) / 1024.0) : CoinSpec::regular();
      const Walk walk(EvolutionConfig(net, coin, 4));
      StateVector s = walk.initial_state();
      for (int t = 0; t < 10000; ++t) walk.step(s);
      EXPECT_LT(std::abs(s.squared_norm() - 1.0), 1e-10) << to_string(kind) << " lazy=" << lazy;
    }
  }
}

TEST(Invariants, ZeroLoopWeightReproducesRegularTrace) {
  for (NetworkKind kind : {NetworkKind::HN3, NetworkKind::HN4}) {
    for (Order order : {Order::ShiftAfterCoin, Order::CoinAfterShift}) {
      const NetworkSpec net(kind, 8);
      const Walk regular(EvolutionConfig(net, CoinSpec::regular(), 4, order));
      const Walk lazy(EvolutionConfig(net, CoinSpec::lackadaisical(0.0), 4, order));
      StateVector a = regular.initial_state();
      StateVector b = lazy.initial_state();
      for (int t = 0; t <= 500; ++t) {
        ASSERT_NEAR(target_probability(a, 4), target_probability(b, 4), 1e-12) << "step " << t;
        regular.step(a);
        lazy.step(b);
      }
    }
  }
}

TEST(Invariants, MirrorTargetsGiveEqualTraces) {
  for (NetworkKind kind : {NetworkKind::HN3, NetworkKind::HN4}) {
    for (bool lazy : {false, true}) {
      const NetworkSpec net(kind, 8);
      const CoinSpec coin = lazy ? CoinSpec::lackadaisical(0.01) : CoinSpec::regular();
      for (Vertex t : {Vertex{4}, Vertex{37}}) {
        const Vertex mirror = net.vertex_count() - t;
        const Walk wa(EvolutionConfig(net, coin, t));
        const Walk wb(EvolutionConfig(net, coin, mirror));
        StateVector a = wa.initial_state();
        StateVector b = wb.initial_state();
        for (int step_no = 0; step_no <= 500; ++step_no) {
          ASSERT_NEAR(target_probability(a, t), target_probability(b, mirror), 1e-10);
          wa.step(a);
          wb.step(b);
        }
      }
    }
  }
}
