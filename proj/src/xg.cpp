#include "possig/xg.hpp"

#include <algorithm>
#include <cmath>

#include <Eigen/Dense>
#include <nlohmann/json.hpp>

#include "possig/errors.hpp"

namespace possig {

ShotGeometry shot_geometry(double x, double y) {
  const double px = x * kPitchLength;
  const double py = y * kPitchWidth;
  const double cx = kPitchLength;
  const double cy = kPitchWidth / 2.0;
  const double half = kGoalWidth / 2.0;

  ShotGeometry g;
  g.distance = std::hypot(cx - px, cy - py);
  const double d1 = std::hypot(cx - px, cy - half - py);
  const double d2 = std::hypot(cx - px, cy + half - py);
  if (d1 < 1e-12 || d2 < 1e-12) {
    // standing on a post
    g.angle = M_PI;
    return g;
  }
  const double c = (d1 * d1 + d2 * d2 - kGoalWidth * kGoalWidth) / (2.0 * d1 * d2);
  g.angle = std::acos(std::clamp(c, -1.0, 1.0));
  return g;
}

double XgModel::logit(double x, double y) const {
  const auto g = shot_geometry(x, y);
  return gamma[0] + gamma[1] * g.distance + gamma[2] * g.angle;
}

double XgModel::prob(double x, double y) const { return 1.0 / (1.0 + std::exp(-logit(x, y))); }

nlohmann::json XgModel::to_json() const {
  return {{"format", "possig-xg"}, {"features", {"intercept", "distance_m", "angle_rad"}}, {"gamma", gamma}};
}

XgModel XgModel::from_json(const nlohmann::json& j) {
  try {
    XgModel m;
    auto g = j.at("gamma").get<std::vector<double>>();
    if (g.size() != 3) throw DataError("xG model: gamma must have 3 entries");
    std::copy(g.begin(), g.end(), m.gamma.begin());
    return m;
  } catch (const nlohmann::json::exception& e) {
    throw DataError(std::string("xG model: ") + e.what());
  }
}

namespace {

struct NewtonOutcome {
  Eigen::Vector3d beta = Eigen::Vector3d::Zero();
  Eigen::Matrix3d hessian = Eigen::Matrix3d::Identity();
  double grad_norm = INFINITY;
  double loglik = -INFINITY;
  std::size_t iterations = 0;
  bool converged = false;
};

double log_likelihood(const Eigen::MatrixXd& x, const Eigen::VectorXd& y, const Eigen::Vector3d& beta, double ridge) {
  const Eigen::VectorXd eta = x * beta;
  double ll = 0.0;
  for (Eigen::Index i = 0; i < eta.size(); ++i) {
    // log sigma(eta) = -log1p(exp(-eta)), computed stably
    const double e = eta(i);
    const double log1pexp = e > 0 ? e + std::log1p(std::exp(-e)) : std::log1p(std::exp(e));
    ll += y(i) * e - log1pexp;
  }
  return ll - 0.5 * ridge * beta.tail<2>().squaredNorm();
}

NewtonOutcome newton(const Eigen::MatrixXd& x, const Eigen::VectorXd& y, double ridge) {
  constexpr std::size_t kMaxIter = 100;
  constexpr double kGradTol = 1e-8;
  Eigen::Matrix3d penalty = Eigen::Matrix3d::Zero();
  penalty(1, 1) = ridge;
  penalty(2, 2) = ridge;

  NewtonOutcome out;
  out.loglik = log_likelihood(x, y, out.beta, ridge);
  for (out.iterations = 0; out.iterations < kMaxIter; ++out.iterations) {
    const Eigen::VectorXd p = (x * out.beta).unaryExpr([](double e) { return 1.0 / (1.0 + std::exp(-e)); });
    const Eigen::Vector3d grad = x.transpose() * (y - p) - penalty * out.beta;
    const Eigen::VectorXd w = p.array() * (1.0 - p.array());
    out.hessian = x.transpose() * w.asDiagonal() * x + penalty;
    out.grad_norm = grad.norm();
    if (out.grad_norm < kGradTol) {
      out.converged = true;
      return out;
    }
    const Eigen::Vector3d step = out.hessian.ldlt().solve(grad);
    if (!step.allFinite()) return out;

    double scale = 1.0;
    bool improved = false;
    for (int halving = 0; halving < 40; ++halving, scale *= 0.5) {
      const Eigen::Vector3d trial = out.beta + scale * step;
      const double ll = log_likelihood(x, y, trial, ridge);
      if (ll >= out.loglik) {
        out.beta = trial;
        out.loglik = ll;
        improved = true;
        break;
      }
    }
    // at the optimum roundoff can stall the line search before the gradient
    // tolerance is met
    if (!improved || (scale * step).lpNorm<Eigen::Infinity>() < 1e-14 * (1.0 + out.beta.lpNorm<Eigen::Infinity>())) {
      out.converged = out.grad_norm < 1e-6 * static_cast<double>(y.size());
      return out;
    }
  }
  return out;
}

}  // namespace

XgFit fit_xg(std::span<const Shot> shots) {
  require(shots.size() >= kMinShots, "fit_xg: need at least 50 shots, got " + std::to_string(shots.size()));
  const auto n = static_cast<Eigen::Index>(shots.size());
  Eigen::MatrixXd x(n, 3);
  Eigen::VectorXd y(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const auto& s = shots[static_cast<std::size_t>(i)];
    const auto g = shot_geometry(s.x, s.y);
    x(i, 0) = 1.0;
    x(i, 1) = g.distance;
    x(i, 2) = g.angle;
    y(i) = s.goal ? 1.0 : 0.0;
  }

  XgFit fit;
  auto result = newton(x, y, 0.0);
  // separation shows up as saturated fitted log-odds
  const double max_eta = (x * result.beta).lpNorm<Eigen::Infinity>();
  const bool separated = !result.converged || !(max_eta < 25.0) || y.sum() == 0.0 ||
                         y.sum() == static_cast<double>(n);
  if (separated) {
    fit.ridge = true;
    fit.warning = "xG fit did not converge (possible separation); refitted with ridge penalty 1e-6";
    result = newton(x, y, 1e-6);
  }
  if (!result.beta.allFinite()) throw NumericError("fit_xg: non-finite coefficients");

  for (int k = 0; k < 3; ++k) fit.model.gamma[static_cast<std::size_t>(k)] = result.beta(k);
  const Eigen::Matrix3d cov = result.hessian.inverse();
  for (int k = 0; k < 3; ++k) fit.std_errors[static_cast<std::size_t>(k)] = std::sqrt(std::max(cov(k, k), 0.0));
  fit.iterations = result.iterations;
  fit.gradient_norm = result.grad_norm;
  fit.log_likelihood = result.loglik;
  return fit;
}

}  // namespace possig
