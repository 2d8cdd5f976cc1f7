#pragma once

#include <cstddef>
#include <map>
#include <span>

#include <nlohmann/json_fwd.hpp>

#include "possig/dataset.hpp"
#include "possig/pitch.hpp"
#include "possig/predictor.hpp"

namespace possig {

/// Multi-class Brier score over all seven classes.
double brier(std::span<const Prediction> predictions, std::span<const Sample> targets);

struct ZoneKL {
  double overall = 0.0;
  struct Entry {
    double kl = 0.0;
    std::size_t n = 0;
  };
  std::map<int, Entry> per_zone;  // zones with at least one sample
};

/// Smoothing constant for zone distributions that have empty classes.
inline constexpr double kKlEpsilon = 1e-9;

/// KL(P || Q) in nats with 0 log 0 = 0. When some class has q = 0 < p both
/// distributions are epsilon-smoothed and renormalized first.
double kl_divergence(std::span<const double> p, std::span<const double> q, double eps = kKlEpsilon);

/// Per zone of the true target location: P = mean predicted distribution,
/// Q = empirical distribution of true actions. Overall value is the
/// sample-weighted mean over non-empty zones.
ZoneKL zone_kl(std::span<const Prediction> predictions, std::span<const Sample> targets,
               const PitchPartition& partition);

struct EvalReport {
  double test_loss = 0.0;
  double location_error = 0.0;  // RMSE, or MSE when report_mse is set
  bool report_mse = false;
  double rmse = 0.0;
  double cel = 0.0;
  double brier = 0.0;
  double kl = 0.0;
  std::map<int, ZoneKL::Entry> per_zone_kl;
  std::size_t n_samples = 0;
  double lambda = 1.0;
};

EvalReport evaluate_predictions(std::span<const Prediction> predictions, std::span<const Sample> test_set,
                                const PitchPartition& partition, double lambda, bool report_mse = false);
EvalReport evaluate(const PredictorParams& params, std::span<const Sample> test_set,
                    const PitchPartition& partition, double lambda, bool report_mse = false);

/// Predictions equal to the truth: one-hot action, exact location.
std::vector<Prediction> oracle_predictions(std::span<const Sample> samples);

nlohmann::json eval_report_to_json(const EvalReport& r);

}  // namespace possig
