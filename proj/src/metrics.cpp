#include "possig/metrics.hpp"

#include <cmath>

#include <nlohmann/json.hpp>

#include "possig/errors.hpp"

namespace possig {

double brier(std::span<const Prediction> predictions, std::span<const Sample> targets) {
  require(!targets.empty(), "brier: empty input");
  require(predictions.size() == targets.size(), "brier: length mismatch");
  double total = 0.0;
  for (std::size_t i = 0; i < targets.size(); ++i) {
    const std::size_t truth = action_index(targets[i].target_action);
    for (std::size_t k = 0; k < kNumActions; ++k) {
      const double diff = predictions[i].action_probs[k] - (k == truth ? 1.0 : 0.0);
      total += diff * diff;
    }
  }
  return total / static_cast<double>(targets.size());
}

double kl_divergence(std::span<const double> p, std::span<const double> q, double eps) {
  require(p.size() == q.size() && !p.empty(), "kl_divergence: size mismatch");
  bool needs_smoothing = false;
  for (std::size_t k = 0; k < p.size(); ++k) needs_smoothing = needs_smoothing || (q[k] <= 0.0 && p[k] > 0.0);

  double sp = 0.0;
  double sq = 0.0;
  for (std::size_t k = 0; k < p.size(); ++k) {
    sp += p[k];
    sq += q[k];
  }
  const double e = needs_smoothing ? eps : 0.0;
  const double np = sp + e * static_cast<double>(p.size());
  const double nq = sq + e * static_cast<double>(q.size());
  double kl = 0.0;
  for (std::size_t k = 0; k < p.size(); ++k) {
    const double pk = (p[k] + e) / np;
    const double qk = (q[k] + e) / nq;
    if (pk > 0.0) kl += pk * std::log(pk / qk);
  }
  return kl;
}

ZoneKL zone_kl(std::span<const Prediction> predictions, std::span<const Sample> targets,
               const PitchPartition& partition) {
  require(predictions.size() == targets.size(), "zone_kl: length mismatch");
  struct Acc {
    std::array<double, kNumActions> p{};
    std::array<double, kNumActions> q{};
    std::size_t n = 0;
  };
  std::map<int, Acc> acc;
  for (std::size_t i = 0; i < targets.size(); ++i) {
    auto& a = acc[partition.zone_of(targets[i].target_x, targets[i].target_y)];
    ++a.n;
    for (std::size_t k = 0; k < kNumActions; ++k) a.p[k] += predictions[i].action_probs[k];
    a.q[action_index(targets[i].target_action)] += 1.0;
  }

  ZoneKL out;
  double weighted = 0.0;
  std::size_t n = 0;
  for (auto& [zone, a] : acc) {
    for (std::size_t k = 0; k < kNumActions; ++k) {
      a.p[k] /= static_cast<double>(a.n);
      a.q[k] /= static_cast<double>(a.n);
    }
    ZoneKL::Entry e{kl_divergence(a.p, a.q), a.n};
    out.per_zone[zone] = e;
    weighted += e.kl * static_cast<double>(e.n);
    n += e.n;
  }
  out.overall = n > 0 ? weighted / static_cast<double>(n) : 0.0;
  return out;
}

EvalReport evaluate_predictions(std::span<const Prediction> predictions, std::span<const Sample> test_set,
                                const PitchPartition& partition, double lambda, bool report_mse) {
  require(!test_set.empty(), "evaluate: empty test set");
  const auto lb = loss_from_predictions(predictions, test_set, lambda);
  EvalReport r;
  r.n_samples = test_set.size();
  r.lambda = lambda;
  r.rmse = lb.rmse;
  r.cel = lb.cel;
  r.test_loss = lb.total;
  r.report_mse = report_mse;
  r.location_error = report_mse ? lb.rmse * lb.rmse : lb.rmse;
  r.brier = brier(predictions, test_set);
  auto kl = zone_kl(predictions, test_set, partition);
  r.kl = kl.overall;
  r.per_zone_kl = std::move(kl.per_zone);
  return r;
}

EvalReport evaluate(const PredictorParams& params, std::span<const Sample> test_set, const PitchPartition& partition,
                    double lambda, bool report_mse) {
  require(!test_set.empty(), "evaluate: empty test set");
  const auto preds = forward_batch(params, test_set);
  return evaluate_predictions(preds, test_set, partition, lambda, report_mse);
}

std::vector<Prediction> oracle_predictions(std::span<const Sample> samples) {
  std::vector<Prediction> out(samples.size());
  for (std::size_t i = 0; i < samples.size(); ++i) {
    out[i].action_probs[action_index(samples[i].target_action)] = 1.0;
    out[i].x = samples[i].target_x;
    out[i].y = samples[i].target_y;
  }
  return out;
}

nlohmann::json eval_report_to_json(const EvalReport& r) {
  nlohmann::json zones = nlohmann::json::object();
  for (const auto& [zone, e] : r.per_zone_kl) zones[std::to_string(zone)] = {{"kl", e.kl}, {"n", e.n}};
  return {{"test_loss", r.test_loss},
          {r.report_mse ? "mse" : "rmse", r.location_error},
          {"cel", r.cel},
          {"brier", r.brier},
          {"kl", r.kl},
          {"per_zone_kl", zones},
          {"n_samples", r.n_samples},
          {"lambda", r.lambda}};
}

}  // namespace possig
