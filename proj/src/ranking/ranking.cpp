#include "ppgpt/ranking/ranking.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <fstream>
#include <json.hpp>

#include "ppgpt/common/error.hpp"

namespace ppgpt::ranking {

Weights Weights::normalized() const {
  double s = sum();
  if (s == 0 || !std::isfinite(s)) throw Error("weights cannot be normalized (sum is " + std::to_string(s) + ")");
  return {alpha / s, beta / s, gamma / s, eta / s};
}

double score(const FeatureVector& f, const Weights& w) {
  for (double x : {f.x_raw, f.x_summary, f.y_raw, f.y_summary, w.alpha, w.beta, w.gamma, w.eta})
    if (!std::isfinite(x)) throw Error("non-finite feature or weight");
  return w.alpha * f.x_raw + w.beta * f.x_summary + w.gamma * f.y_raw + w.eta * f.y_summary;
}

std::vector<Ranked> rank_topk(const std::vector<std::pair<std::string, FeatureVector>>& candidates, const Weights& w,
                              size_t k) {
  if (k == 0) throw Error("rank.k must be at least 1");
  std::vector<Ranked> out;
  for (const auto& [id, fv] : candidates) out.push_back({id, fv, score(fv, w)});
  std::sort(out.begin(), out.end(), [](const Ranked& a, const Ranked& b) {
    if (a.score != b.score) return a.score > b.score;
    return a.id < b.id;
  });
  if (out.size() > k) out.resize(k);
  return out;
}

Metrics evaluate(const std::vector<TrainingRecord>& rs, const Weights& w) {
  Metrics m;
  m.n = rs.size();
  if (rs.empty()) return m;
  double mean = 0;
  for (const auto& r : rs) mean += r.actual;
  mean /= rs.size();
  double ss_res = 0, ss_tot = 0, ape = 0;
  size_t ape_n = 0;
  for (const auto& r : rs) {
    double p = score(r.features, w);
    double e = r.actual - p;
    m.mae += std::abs(e);
    ss_res += e * e;
    m.mde += e;
    ss_tot += (r.actual - mean) * (r.actual - mean);
    if (r.actual != 0) {
      ape += std::abs(e / r.actual);
      ++ape_n;
    }
  }
  m.mae /= rs.size();
  m.mse = ss_res / rs.size();
  m.rmse = std::sqrt(m.mse);
  m.mde /= rs.size();
  m.r2 = ss_tot > 0 ? 1 - ss_res / ss_tot : (ss_res == 0 ? 1.0 : 0.0);
  m.mape = ape_n ? 100.0 * ape / ape_n : 0;
  return m;
}

Fit fit_weights(const std::vector<TrainingRecord>& rs) {
  if (rs.size() < 4) throw Error("fit needs at least 4 records, got " + std::to_string(rs.size()));
  Eigen::MatrixXd X(rs.size(), 4);
  Eigen::VectorXd y(rs.size());
  for (size_t i = 0; i < rs.size(); ++i) {
    const auto& f = rs[i].features;
    X.row(i) << f.x_raw, f.x_summary, f.y_raw, f.y_summary;
    y(i) = rs[i].actual;
  }
  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(X);
  if (qr.rank() < 4) throw Error("feature matrix is rank deficient (rank " + std::to_string(qr.rank()) + ")");
  Eigen::VectorXd b = qr.solve(y);
  Fit fit;
  fit.raw = {b(0), b(1), b(2), b(3)};
  fit.normalized = fit.raw.sum() != 0 ? fit.raw.normalized() : fit.raw;
  fit.metrics = evaluate(rs, fit.raw);
  return fit;
}

std::vector<TrainingRecord> load_training_records(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot read " + path);
  std::vector<TrainingRecord> out;
  std::string line;
  int n = 0;
  while (std::getline(in, line)) {
    ++n;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      auto j = nlohmann::json::parse(line);
      out.push_back({{j.at("xRaw").get<double>(), j.at("xSummary").get<double>(), j.at("yRaw").get<double>(),
                      j.at("ySummary").get<double>()},
                     j.at("actual").get<double>()});
    } catch (const nlohmann::json::exception& e) {
      throw Error(path + ":" + std::to_string(n) + ": malformed training record");
    }
  }
  return out;
}

void save_training_records(const std::string& path, const std::vector<TrainingRecord>& rs) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write " + path);
  for (const auto& r : rs)
    out << nlohmann::json{{"xRaw", r.features.x_raw},
                          {"xSummary", r.features.x_summary},
                          {"yRaw", r.features.y_raw},
                          {"ySummary", r.features.y_summary},
                          {"actual", r.actual}}
               .dump()
        << "\n";
}

}  // namespace ppgpt::ranking
