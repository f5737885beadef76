#include <gtest/gtest.h>

#include <random>

#include "ppgpt/common/error.hpp"
#include "ppgpt/ranking/ranking.hpp"

using namespace ppgpt;
using namespace ppgpt::ranking;

TEST(Ranking, ReferenceScore) {
  EXPECT_NEAR(score({0.8, 0.7, 0.6, 0.5}, Weights::reference()), 0.6650, 1e-4);
  EXPECT_NEAR(score({1, 1, 1, 1}, Weights::reference().normalized()), 1.0, 1e-12);
}

TEST(Ranking, NonFiniteThrows) {
  EXPECT_THROW(score({NAN, 0, 0, 0}, Weights::reference()), Error);
}

TEST(Ranking, TopKOrderAndTies) {
  auto r = rank_topk({{"b", {1, 1, 1, 1}}, {"a", {1, 1, 1, 1}}, {"c", {0, 0, 0, 0}}}, Weights::reference(), 2);
  ASSERT_EQ(r.size(), 2u);
  EXPECT_EQ(r[0].id, "a");
  EXPECT_EQ(r[1].id, "b");
  EXPECT_EQ(rank_topk({{"x", {}}}, Weights::reference(), 5).size(), 1u);
}

TEST(Ranking, NormalizationKeepsArgmax) {
  std::mt19937 rng(7);
  std::uniform_real_distribution<double> u(0, 1);
  for (int t = 0; t < 200; ++t) {
    std::vector<std::pair<std::string, FeatureVector>> cs;
    for (int i = 0; i < 6; ++i) cs.push_back({std::to_string(i), {u(rng), u(rng), u(rng), u(rng)}});
    EXPECT_EQ(rank_topk(cs, Weights::reference(), 1)[0].id, rank_topk(cs, Weights::reference().normalized(), 1)[0].id);
  }
}

TEST(Ranking, FitRecoversPlantedWeights) {
  std::mt19937 rng(1);
  std::uniform_real_distribution<double> u(0, 1);
  Weights planted{0.2, 0.5, 0.1, 0.3};
  std::vector<TrainingRecord> rs;
  for (int i = 0; i < 30; ++i) {
    FeatureVector f{u(rng), u(rng), u(rng), u(rng)};
    rs.push_back({f, score(f, planted)});
  }
  Fit fit = fit_weights(rs);
  EXPECT_NEAR(fit.raw.alpha, 0.2, 1e-9);
  EXPECT_NEAR(fit.raw.beta, 0.5, 1e-9);
  EXPECT_NEAR(fit.raw.gamma, 0.1, 1e-9);
  EXPECT_NEAR(fit.raw.eta, 0.3, 1e-9);
  EXPECT_NEAR(fit.normalized.sum(), 1.0, 1e-12);
  EXPECT_NEAR(fit.metrics.mae, 0, 1e-9);
  EXPECT_NEAR(fit.metrics.r2, 1, 1e-9);
}

TEST(Ranking, FitNeedsEnoughIndependentRecords) {
  std::vector<TrainingRecord> three(3, {{1, 2, 3, 4}, 1});
  EXPECT_THROW(fit_weights(three), Error);
  std::vector<TrainingRecord> dup(6, {{1, 2, 3, 4}, 1});
  EXPECT_THROW(fit_weights(dup), Error);
}

TEST(Ranking, MetricsByHand) {
  Weights w{1, 0, 0, 0};
  std::vector<TrainingRecord> rs = {{{1, 0, 0, 0}, 2}, {{2, 0, 0, 0}, 2}, {{3, 0, 0, 0}, 0}};
  // predictions 1,2,3; errors 1,0,-3
  Metrics m = evaluate(rs, w);
  EXPECT_NEAR(m.mae, 4.0 / 3, 1e-12);
  EXPECT_NEAR(m.mse, 10.0 / 3, 1e-12);
  EXPECT_NEAR(m.rmse, std::sqrt(10.0 / 3), 1e-12);
  EXPECT_NEAR(m.mde, -2.0 / 3, 1e-12);
  EXPECT_NEAR(m.mape, 100.0 * (0.5 + 0) / 2, 1e-12);  // zero actual skipped
  // mean actual 4/3, ss_tot = 4/9+4/9+16/9 = 24/9
  EXPECT_NEAR(m.r2, 1 - 10.0 / (24.0 / 9), 1e-12);
  EXPECT_EQ(m.n, 3u);
}
