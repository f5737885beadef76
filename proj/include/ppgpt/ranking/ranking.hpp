#pragma once

#include <string>
#include <vector>

namespace ppgpt::ranking {

struct FeatureVector {
  double x_raw = 0;      // code vs. reference code
  double x_summary = 0;  // their summaries
  double y_raw = 0;      // candidate vs. reference property
  double y_summary = 0;  // their summaries
};

struct Weights {
  double alpha = 0, beta = 0, gamma = 0, eta = 0;

  double sum() const { return alpha + beta + gamma + eta; }
  // Divided by the sum, so the four add up to one.
  Weights normalized() const;
  // Reference fit; sums to 0.999.
  static Weights reference() { return {0.134, 0.556, 0.141, 0.168}; }
};

// alpha*x_raw + beta*x_summary + gamma*y_raw + eta*y_summary; throws on non-finite input.
double score(const FeatureVector& fv, const Weights& w);

struct Ranked {
  std::string id;
  FeatureVector features;
  double score = 0;
};

// Descending by score, ties by id ascending, at most k.
std::vector<Ranked> rank_topk(const std::vector<std::pair<std::string, FeatureVector>>& candidates, const Weights& w,
                              size_t k = 2);

struct TrainingRecord {
  FeatureVector features;
  double actual = 0;
};

struct Metrics {
  double mae = 0, mse = 0, rmse = 0, r2 = 0;
  double mape = 0;  // percent, records with actual == 0 skipped
  double mde = 0;   // mean(actual - predicted)
  size_t n = 0;
};

struct Fit {
  Weights raw;
  Weights normalized;
  Metrics metrics;  // of the raw weights on the training records
};

// Plain least squares without intercept. Needs >= 4 records and full column rank.
Fit fit_weights(const std::vector<TrainingRecord>& records);
Metrics evaluate(const std::vector<TrainingRecord>& records, const Weights& w);

// Line-delimited {xRaw, xSummary, yRaw, ySummary, actual}.
std::vector<TrainingRecord> load_training_records(const std::string& path);
void save_training_records(const std::string& path, const std::vector<TrainingRecord>& records);

}  // namespace ppgpt::ranking
