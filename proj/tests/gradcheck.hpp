#pragma once

#include <algorithm>
#include <cmath>
#include <random>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "possig/predictor.hpp"
#include "possig/random.hpp"

namespace gradcheck {

struct Result {
  double worst_rel = 0.0;
  std::string worst_where;
  std::size_t checked = 0;
  std::size_t skipped = 0;  // coordinates whose +-eps step crosses a LeakyReLU kink
};

// Relative error with a floor on the scale so vanishing gradients are
// compared absolutely.
inline double rel_error(double a, double b) {
  return std::abs(a - b) / std::max({std::abs(a), std::abs(b), 1e-6});
}

// Signs of every hidden pre-activation over a batch.
inline std::vector<bool> activation_pattern(const possig::PredictorParams& p, const std::vector<possig::Sample>& batch) {
  std::vector<bool> signs;
  for (const auto& s : batch) {
    Eigen::RowVectorXd a = possig::input_features(p, s);
    for (std::size_t l = 0; l + 1 < p.weights.size(); ++l) {
      const Eigen::RowVectorXd z = a * p.weights[l] + p.biases[l];
      for (Eigen::Index j = 0; j < z.size(); ++j) signs.push_back(z(j) > 0.0);
      a = z.unaryExpr([&](double v) { return v > 0.0 ? v : p.config.leaky_alpha * v; });
    }
  }
  return signs;
}

// Central differences on `per_tensor` random coordinates of every parameter
// tensor, separately for the RMSE and the CEL term.
inline Result check(const possig::PredictorParams& params, const std::vector<possig::Sample>& batch,
                    std::size_t per_tensor, std::uint64_t seed, double eps = 1e-5) {
  using possig::PredictorParams;
  Result res;
  auto g_rmse = possig::loss_and_gradient(params, batch, 0.0).second;
  auto g_total = possig::loss_and_gradient(params, batch, 1.0).second;
  auto grmse_t = g_rmse.tensors();
  auto gtot_t = g_total.tensors();

  const auto base_signs = activation_pattern(params, batch);
  PredictorParams work = params;
  auto wt = work.tensors();
  std::mt19937_64 rng(seed);
  for (std::size_t t = 0; t < wt.size(); ++t) {
    auto& [name, values] = wt[t];
    std::size_t done = 0;
    std::size_t attempts = 0;
    while (done < per_tensor && attempts < per_tensor * 20) {
      ++attempts;
      const std::size_t i = possig::uniform_index(rng, values.size());
      const double orig = values[i];
      values[i] = orig + eps;
      const auto up = possig::loss(work, batch, 1.0);
      const auto up_signs = activation_pattern(work, batch);
      values[i] = orig - eps;
      const auto down = possig::loss(work, batch, 1.0);
      const auto down_signs = activation_pattern(work, batch);
      values[i] = orig;
      if (up_signs != base_signs || down_signs != base_signs) {
        ++res.skipped;
        continue;
      }

      const double fd_rmse = (up.rmse - down.rmse) / (2 * eps);
      const double fd_cel = (up.cel - down.cel) / (2 * eps);
      const double an_rmse = grmse_t[t].second[i];
      const double an_cel = gtot_t[t].second[i] - grmse_t[t].second[i];
      for (auto [fd, an, term] : {std::tuple{fd_rmse, an_rmse, "rmse"}, std::tuple{fd_cel, an_cel, "cel"}}) {
        const double r = rel_error(fd, an);
        if (r > res.worst_rel) {
          res.worst_rel = r;
          res.worst_where = name + "[" + std::to_string(i) + "] " + term;
        }
      }
      ++res.checked;
      ++done;
    }
  }
  return res;
}

}  // namespace gradcheck
